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

#include "checker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "error.hpp"
#include "sampling.hpp"

namespace stp {
namespace {

using Clock = std::chrono::steady_clock;

class Deadline {
 public:
  explicit Deadline(double budget_ms) : unlimited_(!std::isfinite(budget_ms)) {
    if (!unlimited_) {
      end_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                std::chrono::duration<double, std::milli>(budget_ms));
    }
  }
  bool expired() const { return !unlimited_ && Clock::now() >= end_; }

 private:
  bool unlimited_;
  Clock::time_point end_{};
};

// Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& y) {
  std::vector<double> s(y.data(), y.data() + y.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) theta = t;
  }
  Eigen::VectorXd x = (y.array() - theta).max(0.0).matrix();
  const double total = x.sum();
  if (total > 0.0) x /= total;
  return x;
}

Eigen::VectorXd project(const Eigen::VectorXd& y, FeasibleSet feasible) {
  if (feasible == FeasibleSet::Simplex) return project_simplex(y);
  return y.cwiseMax(0.0).cwiseMin(1.0);
}

double lambda_max_factored(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  // sym(u v^T) has eigenvalues (u.v +- |u||v|) / 2 on span{u, v}, zero elsewhere.
  return 0.5 * (u.dot(v) + u.norm() * v.norm());
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double bound_from_lambda(double lambda_max, const Eigen::VectorXd& l, FeasibleSet feasible) {
  const double m = static_cast<double>(l.size());
  if (feasible == FeasibleSet::Simplex) return std::max(lambda_max, 0.0) + l.maxCoeff();
  return std::max(lambda_max, 0.0) * m + l.cwiseMax(0.0).sum();
}

struct Best {
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd point;

  void offer(double v, const Eigen::VectorXd& p) {
    if (v > value) {
      value = v;
      point = p;
    }
  }
};

// Projected gradient ascent with a step that doubles after success and
// halves on failure.
void ascend(const QuadraticCondition& cond, Eigen::VectorXd x, const CertifyOptions& opt,
            const Deadline& deadline, Best& best) {
  double fx = cond.value(x);
  double step = 1.0;
  for (std::size_t it = 0; it < opt.iters; ++it) {
    if (deadline.expired()) break;
    const Eigen::VectorXd g = cond.gradient(x);
    bool moved = false;
    for (int tries = 0; tries < 40; ++tries) {
      const Eigen::VectorXd y = project(x + step * g, opt.feasible);
      const double fy = cond.value(y);
      if (fy > fx) {
        moved = (y - x).lpNorm<Eigen::Infinity>() > 1e-15;
        x = y;
        fx = fy;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  best.offer(fx, x);
}

Eigen::VectorXd random_start(std::size_t m, FeasibleSet feasible, Rng& rng) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(m));
  if (feasible == FeasibleSet::Simplex) {
    std::exponential_distribution<double> expo(1.0);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = expo(rng);
    x /= x.sum();
  } else {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = unif(rng);
  }
  return x;
}

CheckVerdict finish(const QuadraticCondition& cond, const Best& best, double upper,
                    const CertifyOptions& opt, bool timed_out) {
  if (best.value > opt.tol) {
    const double v = cond.value(best.point);
    if (v > opt.tol) return Refuted{best.point, v};
  }
  if (upper <= opt.cert_slack) return Certified{upper};
  return Unknown{best.value, upper, timed_out};
}

}  // namespace

QuadraticCondition QuadraticCondition::dense(Eigen::MatrixXd q, Eigen::VectorXd l) {
  require(q.rows() == q.cols() && q.rows() == l.size(), ErrorCode::InvalidArgument,
          "quadratic condition dimensions disagree");
  require(l.size() > 0, ErrorCode::InvalidArgument, "empty quadratic condition");
  QuadraticCondition out;
  out.q_ = 0.5 * (q + q.transpose());
  out.l_ = std::move(l);
  return out;
}

QuadraticCondition QuadraticCondition::rank_two(Eigen::VectorXd u, Eigen::VectorXd v,
                                                Eigen::VectorXd l) {
  require(u.size() == v.size() && u.size() == l.size(), ErrorCode::InvalidArgument,
          "quadratic condition dimensions disagree");
  require(l.size() > 0, ErrorCode::InvalidArgument, "empty quadratic condition");
  QuadraticCondition out;
  out.factored_ = true;
  out.u_ = std::move(u);
  out.v_ = std::move(v);
  out.l_ = std::move(l);
  return out;
}

Eigen::MatrixXd QuadraticCondition::q() const {
  if (!factored_) return q_;
  const Eigen::MatrixXd uv = u_ * v_.transpose();
  return 0.5 * (uv + uv.transpose());
}

double QuadraticCondition::value(const Eigen::VectorXd& pi) const {
  if (factored_) return pi.dot(u_) * pi.dot(v_) + pi.dot(l_);
  return pi.dot(q_ * pi) + pi.dot(l_);
}

Eigen::VectorXd QuadraticCondition::gradient(const Eigen::VectorXd& pi) const {
  if (factored_) return u_ * pi.dot(v_) + v_ * pi.dot(u_) + l_;
  return 2.0 * (q_ * pi) + l_;
}

ConditionPair build_conditions(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& c, PrivacyParams params) {
  require(params.epsilon > 0.0, ErrorCode::InvalidArgument, "epsilon must be positive");
  require(a.size() == b.size() && a.size() == c.size() && a.size() > 0,
          ErrorCode::InvalidArgument, "check vector sizes disagree");
  const double scale = c.maxCoeff();
  const bool degenerate = !(a.maxCoeff() > 0.0) || !(scale > 0.0);
  const Eigen::VectorXd bn = degenerate ? b : Eigen::VectorXd(b / scale);
  const Eigen::VectorXd cn = degenerate ? c : Eigen::VectorXd(c / scale);
  const double e = std::exp(params.epsilon);
  const double em1 = std::expm1(params.epsilon);

  // With P = pi.a, J = pi.b, O = pi.c and sum(pi) = 1:
  //   forward:  (e^eps - 1) P J - e^eps P O + J <= 0
  //   backward: (e^eps - 1) P J + P O - e^eps J <= 0
  ConditionPair out{
      QuadraticCondition::rank_two(a, em1 * bn - e * cn, bn),
      QuadraticCondition::rank_two(a, em1 * bn + cn, -e * bn),
  };
  out.forward.degenerate = degenerate;
  out.backward.degenerate = degenerate;
  return out;
}

ConditionPair build_conditions(const CheckVectors& cv, PrivacyParams params) {
  return build_conditions(cv.a(), cv.b(), cv.c(), params);
}

double upper_bound(const QuadraticCondition& cond, FeasibleSet feasible) {
  const double lam = cond.factored() ? lambda_max_factored(cond.u(), cond.v())
                                     : eigenvalues(cond.q()).maxCoeff();
  return bound_from_lambda(lam, cond.l(), feasible);
}

std::pair<double, Eigen::VectorXd> edge_scan_max(const QuadraticCondition& cond) {
  require(cond.factored(), ErrorCode::InvalidArgument, "edge scan needs a factored condition");
  const Eigen::VectorXd& u = cond.u();
  const Eigen::VectorXd& v = cond.v();
  const Eigen::VectorXd& l = cond.l();
  const Eigen::Index m = l.size();

  double best = -std::numeric_limits<double>::infinity();
  Eigen::Index bi = 0, bj = 0;
  double blam = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double f = u(i) * v(i) + l(i);
    if (f > best) {
      best = f;
      bi = bj = i;
    }
  }
  // pi = lam e_i + (1 - lam) e_j gives A lam^2 + B lam + C; only a concave
  // edge can peak inside (0, 1).
  for (Eigen::Index j = 0; j < m; ++j) {
    const double uj = u(j), vj = v(j), lj = l(j);
    const double cst = uj * vj + lj;
    for (Eigen::Index i = j + 1; i < m; ++i) {
      const double du = u(i) - uj;
      const double dv = v(i) - vj;
      const double qa = du * dv;
      if (qa >= 0.0) continue;
      const double qb = uj * dv + vj * du + (l(i) - lj);
      const double lam = -qb / (2.0 * qa);
      if (lam <= 0.0 || lam >= 1.0) continue;
      const double f = cst - qb * qb / (4.0 * qa);
      if (f > best) {
        best = f;
        bi = i;
        bj = j;
        blam = lam;
      }
    }
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  x(bi) += blam;
  x(bj) += 1.0 - blam;
  return {best, x};
}

CheckVerdict certify(const QuadraticCondition& cond, const CertifyOptions& opt) {
  require(!cond.degenerate, ErrorCode::DegenerateEvent,
          "event probability or observation likelihood is identically zero");
  const Deadline deadline(opt.budget_ms);
  const auto m = static_cast<Eigen::Index>(cond.size());

  // Stage 1: spectral bound.
  Eigen::VectorXd lambdas;
  double lam_max;
  if (cond.factored()) {
    lam_max = lambda_max_factored(cond.u(), cond.v());
  } else {
    lambdas = eigenvalues(cond.q());
    lam_max = lambdas.maxCoeff();
  }
  double upper = bound_from_lambda(lam_max, cond.l(), opt.feasible);
  if (upper <= opt.cert_slack) return Certified{upper};

  // Stage 2: vertices, then the exact edge scan or multistart ascent.
  Best best;
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e(i) = 1.0;
    best.offer(cond.value(e), e);
  }
  if (opt.feasible == FeasibleSet::Box) best.offer(0.0, Eigen::VectorXd::Zero(m));
  if (best.value > opt.tol) return finish(cond, best, upper, opt, false);
  if (deadline.expired()) return Unknown{best.value, upper, true};

  if (cond.factored() && opt.feasible == FeasibleSet::Simplex) {
    auto [value, point] = edge_scan_max(cond);
    best.offer(cond.value(point), point);
    if (deadline.expired() && best.value <= opt.tol) return Unknown{best.value, upper, true};
    return finish(cond, best, std::max(value, best.value), opt, false);
  }

  Rng rng(opt.seed);
  for (std::size_t s = 0; s < opt.starts; ++s) {
    if (deadline.expired()) return finish(cond, best, upper, opt, true);
    Eigen::VectorXd x0 = s == 0 ? Eigen::VectorXd(Eigen::VectorXd::Constant(
                                      m, opt.feasible == FeasibleSet::Simplex
                                             ? 1.0 / static_cast<double>(m)
                                             : 0.5))
                                : random_start(static_cast<std::size_t>(m), opt.feasible, rng);
    ascend(cond, std::move(x0), opt, deadline, best);
    if (best.value > opt.tol) return finish(cond, best, upper, opt, false);
  }

  // Stage 3: cases where the maximum is known exactly or tightly bounded.
  if (deadline.expired()) return finish(cond, best, upper, opt, true);
  if (lambdas.size() == 0) lambdas = eigenvalues(cond.q());
  const double scale = std::max(lambdas.cwiseAbs().maxCoeff(), 1e-300);
  const double zero = 1e-12 * scale;
  const bool psd = lambdas.minCoeff() >= -zero;
  const bool nsd = lambdas.maxCoeff() <= zero;

  if (psd) {
    // Convex: the maximum sits at a vertex of the feasible polytope.
    if (opt.feasible == FeasibleSet::Simplex) {
      return finish(cond, best, std::min(upper, best.value), opt, false);
    }
    if (m <= 20) {
      const std::uint64_t corners = std::uint64_t{1} << m;
      for (std::uint64_t mask = 0; mask < corners; ++mask) {
        if ((mask & 0xfff) == 0 && deadline.expired()) return finish(cond, best, upper, opt, true);
        Eigen::VectorXd x(m);
        for (Eigen::Index i = 0; i < m; ++i) x(i) = (mask >> i) & 1 ? 1.0 : 0.0;
        best.offer(cond.value(x), x);
      }
      return finish(cond, best, std::min(upper, best.value), opt, false);
    }
    return finish(cond, best, upper, opt, false);
  }
  if (nsd) {
    // Concave: the Frank-Wolfe gap at the best point bounds the maximum.
    const Eigen::VectorXd g = cond.gradient(best.point);
    const double linear_max = opt.feasible == FeasibleSet::Simplex ? g.maxCoeff()
                                                                  : g.cwiseMax(0.0).sum();
    const double fw = best.value + linear_max - g.dot(best.point);
    return finish(cond, best, std::min(upper, fw), opt, false);
  }
  if (opt.feasible == FeasibleSet::Simplex) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cond.q());
    const Eigen::VectorXd& ev = es.eigenvalues();
    std::vector<Eigen::Index> significant;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev(i)) > zero) significant.push_back(i);
    }
    if (significant.size() == 2 && ev(significant[0]) < 0.0 && ev(significant[1]) > 0.0) {
      // lam1 x x^T - lam2 y y^T = sym((x' + y')(x' - y')^T) with scaled x', y'.
      const Eigen::VectorXd neg = std::sqrt(-ev(significant[0])) * es.eigenvectors().col(significant[0]);
      const Eigen::VectorXd pos = std::sqrt(ev(significant[1])) * es.eigenvectors().col(significant[1]);
      const auto factored = QuadraticCondition::rank_two(pos + neg, pos - neg, cond.l());
      auto [value, point] = edge_scan_max(factored);
      best.offer(cond.value(point), point);
      // Dropped eigenvalues are below `zero`; widen by that much.
      return finish(cond, best, std::min(upper, value + zero), opt, false);
    }
  }
  return finish(cond, best, upper, opt, false);
}

FixedPiRatio quantify_fixed_pi(const AugmentedChain& chain, const Distribution& pi,
                               std::span<const EmissionColumn> emissions, double epsilon) {
  require(epsilon > 0.0, ErrorCode::InvalidArgument, "epsilon must be positive");
  FixedPiRatio out;
  out.prior = prior(chain, pi);
  require(out.prior > 1e-12 && out.prior < 1.0 - 1e-12, ErrorCode::DegeneratePrior,
          "event prior " + std::to_string(out.prior) + " is 0 or 1 for this distribution");
  const double jt = joint(chain, pi, emissions, World::EventTrue).log();
  const double jf = joint(chain, pi, emissions, World::EventFalse).log();
  require(std::isfinite(jt) || std::isfinite(jf), ErrorCode::ZeroLikelihood,
          "observations have zero probability");
  const double log_ratio = (jt - std::log(out.prior)) - (jf - std::log1p(-out.prior));
  out.ratio_fwd = std::exp(log_ratio);
  out.ratio_bwd = std::exp(-log_ratio);
  out.holds = std::abs(log_ratio) <= epsilon + std::log1p(1e-9);
  return out;
}

FixedPiRatio quantify_fixed_pi(const Event& event, std::shared_ptr<const MarkovModel> model,
                               const Distribution& pi,
                               std::span<const EmissionColumn> emissions, double epsilon) {
  const std::size_t horizon = std::max(emissions.size(), event.end());
  const AugmentedChain chain(event, std::move(model), horizon);
  return quantify_fixed_pi(chain, pi, emissions, epsilon);
}

}  // namespace stp
