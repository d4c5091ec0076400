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

#pragma once

#include "mdc/rd_model.hpp"
#include "mdc/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace mdc {

struct ChannelState {
  double pe = 0.0;  // per-packet i.i.d. erasure probability
};

enum class CtuRole : std::uint8_t { Principal = 0, Redundant = 1 };

/// Weight of a CTU's distortion term in the per-description cost:
/// (1 - pe) for a principal copy, pe * (1 - pe) for a redundant copy.
inline double role_coefficient(CtuRole role, double pe) {
  return role == CtuRole::Principal ? 1.0 - pe : pe * (1.0 - pe);
}

enum class RolePattern { Checkerboard, ColumnAlternating };

/// Complementary principal/redundant split: every CTU is principal in exactly
/// one description and redundant in the other, with set sizes balanced to
/// within one.
struct RoleAssignment {
  std::array<std::vector<CtuRole>, 2> roles;  // per description, size N
};

RoleAssignment assign_roles(const CtuGrid& grid, RolePattern pattern);

enum class BisectionRule {
  Standard,        // midpoint replaces the violating endpoint
  EndpointAverage  // compatibility variant: both endpoints move inward
};

struct AllocationProblem {
  std::vector<CtuRdModel> models;
  ChannelState channel;
  double r_target = 0.0;  // frame total R_t; each description gets R_t / 2
  int qp_min = kQpMin;
  int qp_max = kQpMax;
  double epsilon = 0.0;  // rate tolerance; 0 selects the default
  double lambda_min = 1e-8;
  double lambda_max = 1e8;
  BisectionRule rule = BisectionRule::Standard;
};

inline double default_epsilon(double r_target) {
  const double half = r_target / 2.0;
  return half * 1e-3 > 8.0 ? half * 1e-3 : 8.0;
}

/// Unique root of C*a*b*exp(b*R) + lambda = 0, clipped to the model's
/// measured rate bounds. Requires a > 0, b < 0, c > 0, lambda > 0.
double stationary_rate(const CtuRdModel& model, double c, double lambda);

struct DescriptionSolution {
  double lambda = 0.0;
  Eigen::ArrayXd rates;      // per CTU
  double rate_total = 0.0;   // sum of rates
  int iterations = 0;
  bool converged = false;    // |rate_total - target| <= epsilon reached
};

/// Bisection on lambda over the monotone map
///   lambda -> sum_i stationary_rate(model_i, c_i, lambda)
/// until the description rate meets its target within epsilon. CTUs with a
/// zero coefficient (pe = 0 redundancy) are pinned at their minimum rate.
/// Throws infeasible-target / bracket-expansion-failed.
DescriptionSolution solve_for_target(const std::vector<CtuRdModel>& models,
                                     const Eigen::ArrayXd& coefficients,
                                     double target, double epsilon,
                                     double lambda_min, double lambda_max,
                                     BisectionRule rule);

DescriptionSolution solve_description(const AllocationProblem& problem,
                                      const std::vector<CtuRole>& roles_j);

struct DescriptionAllocation {
  double lambda = 0.0;
  Eigen::ArrayXd r_star;  // per CTU, bits
  Eigen::ArrayXd c;       // per CTU weight C_{i,j}
  Eigen::ArrayXi qp;      // per CTU, from the measured sweep
  std::vector<CtuRole> role;
  double rate_total = 0.0;
  double d_principal = 0.0;  // model-predicted distortion sums at r_star
  double d_redundant = 0.0;
};

struct AllocationResult {
  std::array<DescriptionAllocation, 2> desc;
};

/// Solves both descriptions independently and maps each optimal rate back to
/// an integer QP by interpolating the CTU's measured (rate, QP) sweep.
AllocationResult allocate_frame(const AllocationProblem& problem,
                                const RoleAssignment& roles);

/// Monotone piecewise-linear inverse of the measured sweep, rounded to the
/// nearest integer QP within bounds.
int rate_to_qp(const CtuRdModel& model, double rate, int qp_min, int qp_max);

/// Expected decoder distortion:
///   (1-pe) * (Dp1 + Dp2) + pe*(1-pe) * (Dr1 + Dr2) + pe^2 * d_error
double expected_distortion(const AllocationResult& result,
                           const ChannelState& channel, double d_error);

struct IdrSchedule {
  int period = 1;
  int max_period = 1;
};

/// Adaptive refresh period T = 1/pe, clamped to [1, max_period]; a clean
/// channel gets the maximum period.
IdrSchedule idr_period(const ChannelState& channel, int max_period);

/// Columns: frame,desc,ctu,role,c,a,b,lambda,r_star,qp
void write_allocation_csv_header(std::ostream& out);
void write_allocation_csv(std::ostream& out, int frame,
                          const AllocationResult& result,
                          const std::vector<CtuRdModel>& models);

}  // namespace mdc
