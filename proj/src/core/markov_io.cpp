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

#include "markov_io.hpp"

#include <fstream>
#include <string>

#include "error.hpp"

namespace stp {

nlohmann::json model_to_json(const MarkovModel& model,
                             const std::optional<Distribution>& pi) {
  nlohmann::json doc;
  doc["m"] = model.states();
  doc["smoothing"] = model.smoothing();
  auto& mats = doc["transitions"] = nlohmann::json::array();
  for (const auto& mat : model.transitions()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      rows.push_back(std::vector<double>(mat.row(i).begin(), mat.row(i).end()));
    }
    mats.push_back(std::move(rows));
  }
  if (pi) {
    doc["pi"] = std::vector<double>(pi->probs().begin(), pi->probs().end());
  }
  return doc;
}

ModelFile model_from_json(const nlohmann::json& doc) {
  try {
    const auto m = doc.at("m").get<std::size_t>();
    const auto n = static_cast<Eigen::Index>(m);
    std::vector<Eigen::MatrixXd> mats;
    for (const auto& rows : doc.at("transitions")) {
      require(rows.size() == m, ErrorCode::ParseError,
              "transition matrix must have m rows");
      Eigen::MatrixXd mat(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
        require(row.size() == m, ErrorCode::ParseError,
                "transition row must have m entries");
        mat.row(i) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), n);
      }
      mats.push_back(std::move(mat));
    }
    const double smoothing = doc.value("smoothing", 0.0);
    ModelFile out{MarkovModel(std::move(mats), smoothing), std::nullopt};
    if (doc.contains("pi") && !doc["pi"].is_null()) {
      const auto pi = doc["pi"].get<std::vector<double>>();
      require(pi.size() == m, ErrorCode::ParseError, "pi must have m entries");
      out.pi = Distribution(Eigen::Map<const Eigen::VectorXd>(pi.data(), n));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("model JSON: ") + e.what());
  }
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoError,
          "cannot open model file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

void save_model(const std::filesystem::path& path, const MarkovModel& model,
                const std::optional<Distribution>& pi) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::IoError,
          "cannot write model file " + path.string());
  out << model_to_json(model, pi).dump() << '\n';
}

}  // namespace stp
