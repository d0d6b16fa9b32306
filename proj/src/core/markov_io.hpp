// Copyright 2026 The stprivacy Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "markov.hpp"

namespace stp {

struct ModelFile {
  MarkovModel model;
  std::optional<Distribution> pi;
};

// {"m": m, "transitions": [[[row], ...], ...], "pi": [...], "smoothing": s}
nlohmann::json model_to_json(const MarkovModel& model,
                             const std::optional<Distribution>& pi = std::nullopt);
ModelFile model_from_json(const nlohmann::json& doc);

ModelFile load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const MarkovModel& model,
                const std::optional<Distribution>& pi = std::nullopt);

}  // namespace stp
