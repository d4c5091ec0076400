/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
you may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "mdc/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mdc {

namespace {

constexpr int kMaxBisectionIterations = 1000;
constexpr int kMaxBracketExpansions = 200;

struct RateEval {
  Eigen::ArrayXd rates;
  double total = 0.0;
};

RateEval eval_rates(const std::vector<CtuRdModel>& models,
                    const Eigen::ArrayXd& coefficients, double lambda) {
  RateEval ev;
  ev.rates.resize(static_cast<Eigen::Index>(models.size()));
  for (std::size_t i = 0; i < models.size(); ++i) {
    // A zero coefficient (redundant CTU on a clean channel) removes the
    // distortion term entirely; the stationary point degenerates to the
    // minimum rate.
    ev.rates[static_cast<Eigen::Index>(i)] =
        coefficients[static_cast<Eigen::Index>(i)] <= 0.0
            ? models[i].r_min
            : stationary_rate(models[i], coefficients[static_cast<Eigen::Index>(i)],
                              lambda);
  }
  ev.total = ev.rates.sum();
  return ev;
}

}  // namespace

RoleAssignment assign_roles(const CtuGrid& grid, RolePattern pattern) {
  const int n = grid.count();
  if (n < 2) throw std::invalid_argument("degenerate-grid");

  RoleAssignment assignment;
  assignment.roles[0].resize(n);
  assignment.roles[1].resize(n);
  for (int i = 0; i < n; ++i) {
    const bool first = pattern == RolePattern::Checkerboard
                           ? ((grid.row_of(i) + grid.col_of(i)) % 2 == 0)
                           : (grid.col_of(i) % 2 == 0);
    assignment.roles[0][i] = first ? CtuRole::Principal : CtuRole::Redundant;
    assignment.roles[1][i] = first ? CtuRole::Redundant : CtuRole::Principal;
  }
  return assignment;
}

double stationary_rate(const CtuRdModel& model, double c, double lambda) {
  if (model.b >= 0.0 || model.a <= 0.0)
    throw std::invalid_argument("invalid-model: requires a > 0 and b < 0");
  if (c <= 0.0 || lambda <= 0.0)
    throw std::invalid_argument("stationary_rate: requires c > 0 and lambda > 0");
  // Root of C*a*b*exp(b*R) + lambda = 0.
  const double root = std::log(lambda / (c * model.a * (-model.b))) / model.b;
  return std::clamp(root, model.r_min, model.r_max);
}

DescriptionSolution solve_for_target(const std::vector<CtuRdModel>& models,
                                     const Eigen::ArrayXd& coefficients,
                                     double target, double epsilon,
                                     double lambda_min, double lambda_max,
                                     BisectionRule rule) {
  double sum_min = 0.0, sum_max = 0.0;
  for (const CtuRdModel& m : models) {
    sum_min += m.r_min;
    sum_max += m.r_max;
  }
  if (target < sum_min || target > sum_max)
    throw std::runtime_error("infeasible-target");

  double lo = lambda_min;
  double hi = lambda_max;

  // The map lambda -> total rate is non-increasing; expand until the bracket
  // straddles the target.
  int expansions = 0;
  while (eval_rates(models, coefficients, lo).total < target) {
    if (++expansions > kMaxBracketExpansions)
      throw std::runtime_error("bracket-expansion-failed");
    lo /= 2.0;
  }
  expansions = 0;
  while (eval_rates(models, coefficients, hi).total > target) {
    if (++expansions > kMaxBracketExpansions)
      throw std::runtime_error("bracket-expansion-failed");
    hi *= 2.0;
  }

  DescriptionSolution solution;
  for (int it = 1; it <= kMaxBisectionIterations; ++it) {
    const double lambda = (lo + hi) / 2.0;
    const RateEval ev = eval_rates(models, coefficients, lambda);
    solution.lambda = lambda;
    solution.rates = ev.rates;
    solution.rate_total = ev.total;
    solution.iterations = it;
    if (std::abs(ev.total - target) <= epsilon) {
      solution.converged = true;
      return solution;
    }
    if (rule == BisectionRule::Standard) {
      if (ev.total < target)
        hi = lambda;
      else
        lo = lambda;
    } else {
      // Compatibility variant: both endpoints move toward each other.
      if (ev.total < target)
        hi = (lambda + lo) / 2.0;
      else
        lo = (lambda + hi) / 2.0;
    }
  }
  return solution;
}

DescriptionSolution solve_description(const AllocationProblem& problem,
                                      const std::vector<CtuRole>& roles_j) {
  if (problem.channel.pe < 0.0 || problem.channel.pe >= 1.0)
    throw std::invalid_argument("allocation requires 0 <= p_e < 1");
  if (roles_j.size() != problem.models.size())
    throw std::invalid_argument("role/model size mismatch");

  Eigen::ArrayXd c(static_cast<Eigen::Index>(roles_j.size()));
  for (std::size_t i = 0; i < roles_j.size(); ++i)
    c[static_cast<Eigen::Index>(i)] =
        role_coefficient(roles_j[i], problem.channel.pe);

  const double target = problem.r_target / 2.0;
  const double epsilon =
      problem.epsilon > 0.0 ? problem.epsilon : default_epsilon(problem.r_target);
  return solve_for_target(problem.models, c, target, epsilon, problem.lambda_min,
                          problem.lambda_max, problem.rule);
}

int rate_to_qp(const CtuRdModel& model, double rate, int qp_min, int qp_max) {
  if (model.samples.empty())
    throw std::invalid_argument("rate_to_qp: model carries no sweep samples");
  // Sweep samples sorted by ascending QP carry non-increasing rates.
  std::vector<RdSample> sorted = model.samples;
  std::sort(sorted.begin(), sorted.end(),
            [](const RdSample& a, const RdSample& b) { return a.qp < b.qp; });

  const auto clamp_qp = [&](double q) {
    const int rounded = static_cast<int>(round_half_away(q));
    return std::clamp(rounded, qp_min, qp_max);
  };

  // Exact sample hit: return that sample's QP (smallest wins on ties).
  for (const RdSample& s : sorted)
    if (s.rate == rate) return clamp_qp(s.qp);

  if (rate >= sorted.front().rate) return clamp_qp(sorted.front().qp);
  if (rate <= sorted.back().rate) return clamp_qp(sorted.back().qp);

  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    const double hi = sorted[k].rate;
    const double lo = sorted[k + 1].rate;
    if (rate < lo || rate > hi || hi == lo) continue;
    const double t = (hi - rate) / (hi - lo);
    return clamp_qp(sorted[k].qp + t * (sorted[k + 1].qp - sorted[k].qp));
  }
  return clamp_qp(sorted.back().qp);
}

AllocationResult allocate_frame(const AllocationProblem& problem,
                                const RoleAssignment& roles) {
  AllocationResult result;
  for (int j = 0; j < 2; ++j) {
    const DescriptionSolution sol = solve_description(problem, roles.roles[j]);
    DescriptionAllocation& alloc = result.desc[j];
    alloc.lambda = sol.lambda;
    alloc.r_star = sol.rates;
    alloc.rate_total = sol.rate_total;
    alloc.role = roles.roles[j];
    alloc.c.resize(sol.rates.size());
    alloc.qp.resize(sol.rates.size());
    alloc.d_principal = 0.0;
    alloc.d_redundant = 0.0;
    for (std::size_t i = 0; i < problem.models.size(); ++i) {
      const Eigen::Index e = static_cast<Eigen::Index>(i);
      alloc.c[e] = role_coefficient(roles.roles[j][i], problem.channel.pe);
      alloc.qp[e] =
          rate_to_qp(problem.models[i], sol.rates[e], problem.qp_min, problem.qp_max);
      const double d = problem.models[i].predicted(sol.rates[e]);
      if (roles.roles[j][i] == CtuRole::Principal)
        alloc.d_principal += d;
      else
        alloc.d_redundant += d;
    }
  }
  return result;
}

double expected_distortion(const AllocationResult& result,
                           const ChannelState& channel, double d_error) {
  const double pe = channel.pe;
  const double dp = result.desc[0].d_principal + result.desc[1].d_principal;
  const double dr = result.desc[0].d_redundant + result.desc[1].d_redundant;
  return (1.0 - pe) * dp + pe * (1.0 - pe) * dr + pe * pe * d_error;
}

IdrSchedule idr_period(const ChannelState& channel, int max_period) {
  if (max_period < 1) throw std::invalid_argument("max-period must be >= 1");
  IdrSchedule schedule;
  schedule.max_period = max_period;
  if (channel.pe <= 0.0) {
    schedule.period = max_period;
  } else {
    const int raw = static_cast<int>(round_half_away(1.0 / channel.pe));
    schedule.period = std::clamp(raw, 1, max_period);
  }
  return schedule;
}

void write_allocation_csv_header(std::ostream& out) {
  out << "frame,desc,ctu,role,c,a,b,lambda,r_star,qp\n";
}

void write_allocation_csv(std::ostream& out, int frame,
                          const AllocationResult& result,
                          const std::vector<CtuRdModel>& models) {
  char buf[256];
  for (int j = 0; j < 2; ++j) {
    const DescriptionAllocation& alloc = result.desc[j];
    for (std::size_t i = 0; i < models.size(); ++i) {
      const Eigen::Index e = static_cast<Eigen::Index>(i);
      std::snprintf(buf, sizeof(buf),
                    "%d,%d,%zu,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%d\n", frame,
                    j + 1, i,
                    alloc.role[i] == CtuRole::Principal ? "principal"
                                                        : "redundant",
                    alloc.c[e], models[i].a, models[i].b, alloc.lambda,
                    alloc.r_star[e], alloc.qp[e]);
      out << buf;
    }
  }
}

}  // namespace mdc
