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

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <variant>

#include <Eigen/Core>

#include "events.hpp"
#include "markov.hpp"
#include "twoworld.hpp"

namespace stp {

struct PrivacyParams {
  double epsilon = 1.0;
};

// Condition pi Q pi^T + l . pi <= 0, required for every feasible pi.
// Conditions built from check vectors keep Q in factored form
// Q = sym(u v^T), so pi Q pi^T = (pi . u)(pi . v) and the dense matrix is
// never materialized.
class QuadraticCondition {
 public:
  static QuadraticCondition dense(Eigen::MatrixXd q, Eigen::VectorXd l);
  static QuadraticCondition rank_two(Eigen::VectorXd u, Eigen::VectorXd v, Eigen::VectorXd l);

  std::size_t size() const noexcept { return static_cast<std::size_t>(l_.size()); }
  bool factored() const noexcept { return factored_; }
  const Eigen::VectorXd& u() const noexcept { return u_; }
  const Eigen::VectorXd& v() const noexcept { return v_; }
  const Eigen::VectorXd& l() const noexcept { return l_; }
  // Symmetric Q (materialized on demand for factored conditions).
  Eigen::MatrixXd q() const;

  double value(const Eigen::VectorXd& pi) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& pi) const;

  // Set when the inputs make the likelihood ratio undefined (event or
  // observation probability identically zero).
  bool degenerate = false;

 private:
  bool factored_ = false;
  Eigen::MatrixXd q_;
  Eigen::VectorXd u_;
  Eigen::VectorXd v_;
  Eigen::VectorXd l_;
};

struct ConditionPair {
  QuadraticCondition forward;   // Pr(o | E) <= e^eps Pr(o | not E)
  QuadraticCondition backward;  // Pr(o | not E) <= e^eps Pr(o | E)
};

// a, b, c are the m-dimensional projections (rows reachable from [pi, 0]).
// b and c are rescaled by max(c) first; the conditions are homogeneous in
// (b, c) so this does not change any verdict.
ConditionPair build_conditions(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& c, PrivacyParams params);
ConditionPair build_conditions(const CheckVectors& cv, PrivacyParams params);

enum class FeasibleSet { Simplex, Box };

struct CertifyOptions {
  double budget_ms = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  std::size_t starts = 16;
  std::size_t iters = 200;
  // Values above tol refute.
  double tol = 1e-10;
  // Values at most cert_slack certify. Covers rounding in conditions that
  // hold with equality somewhere (e.g. at a vertex where the event is
  // certain).
  double cert_slack = 1e-13;
  FeasibleSet feasible = FeasibleSet::Simplex;
};

struct Certified {
  double upper = 0.0;
};
struct Refuted {
  Eigen::VectorXd witness;
  double margin = 0.0;
};
struct Unknown {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool timed_out = false;
};
using CheckVerdict = std::variant<Certified, Refuted, Unknown>;

inline bool is_certified(const CheckVerdict& v) { return std::holds_alternative<Certified>(v); }

// Sound upper bound on the maximum of the condition over the feasible set.
double upper_bound(const QuadraticCondition& cond, FeasibleSet feasible);

// Exact maximum over the simplex for a factored condition. Such a function
// is linear on each slice {pi . u = const}, so its maximum sits on an edge
// of the simplex; every edge is a 1-D quadratic.
std::pair<double, Eigen::VectorXd> edge_scan_max(const QuadraticCondition& cond);

// Throws DegenerateEvent for degenerate conditions.
CheckVerdict certify(const QuadraticCondition& cond, const CertifyOptions& options = {});

struct FixedPiRatio {
  double prior = 0.0;
  double ratio_fwd = 1.0;
  double ratio_bwd = 1.0;
  bool holds = true;
};

// Likelihood ratios for one initial distribution. holds compares
// max(ratio) with e^eps at relative tolerance 1e-9. DegeneratePrior when
// Pr(event) is within 1e-12 of 0 or 1; ZeroLikelihood when the observations
// are impossible.
FixedPiRatio quantify_fixed_pi(const Event& event, std::shared_ptr<const MarkovModel> model,
                               const Distribution& pi,
                               std::span<const EmissionColumn> emissions, double epsilon);
FixedPiRatio quantify_fixed_pi(const AugmentedChain& chain, const Distribution& pi,
                               std::span<const EmissionColumn> emissions, double epsilon);

}  // namespace stp
