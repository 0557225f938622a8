#pragma once

#include <span>
#include <vector>

#include "fpkdescent/fields.hpp"
#include "fpkdescent/grid.hpp"
#include "fpkdescent/montecarlo.hpp"
#include "fpkdescent/problem.hpp"
#include "fpkdescent/spectral.hpp"

namespace fpkd {

/// One descent iterate. residual is the predicted decrease of the step
/// LEAVING this iterate (exact-increment quadrature, nonnegative for argmin
/// comparison controls); NaN on the final record. wall_time is the seconds
/// spent producing this iterate.
struct IterationRecord {
    int index = 0;
    CostReport cost;
    double residual = 0.0;
    double wall_time = 0.0;
};

struct DescentResult {
    ControlField control;
    std::vector<IterationRecord> history;
    bool converged = false;
    DensityField density;
};

/// Grid argmin of the control channel from an adjoint sweep: per (t, x)
/// node the eta-aggregated coefficient of u feeds
/// argmin_hamiltonian_pointwise. density may be null except for DirectL2,
/// which needs the density weight; without one the aggregation falls back
/// to bare quadrature weights.
ControlField comparison_control_markovian(const ProblemSpec& spec, const TensorGrid& grid,
                                          const AdjointField& adjoint,
                                          const DensityField* density);

/// Scalar minimizer of the slab-averaged Hamiltonian at time t (open-loop
/// comparison value).
double comparison_control_openloop(const ProblemSpec& spec, const TensorGrid& grid,
                                   const AdjointField& adjoint,
                                   std::span<const double> density_slab, double t);

/// Quadrature of the Hamiltonian difference of two controls against the
/// target's density, using the reference adjoint gradient; equals the cost
/// difference total(target) - total(ref) up to discretization.
double exact_increment(const ProblemSpec& spec, const TensorGrid& grid,
                       const AdjointField& adjoint_ref, const DensityField& density_target,
                       const ControlField& control_target, const ControlField& control_ref);

/// Markovian descent: iterate forward solve, cost, backward adjoint, then
/// realize the comparison control through a sample-and-hold feedback
/// forward solve. Stops when the cost decrease falls below epsilon.
DescentResult run_algorithm_1(const ProblemSpec& spec, const TensorGrid& grid,
                              std::span<const double> initial_density,
                              const ControlField& initial_guess, double epsilon,
                              int max_iterations = 50);

/// Open-loop descent: the comparison value is recomputed from the evolving
/// density each step (nonlocal forward solve); the realized per-step values
/// become the next iterate.
DescentResult run_algorithm_2(const ProblemSpec& spec, const TensorGrid& grid,
                              std::span<const double> initial_density,
                              const ControlField& initial_guess, double epsilon,
                              int max_iterations = 50);

struct NeedleCurveSample {
    double s = 0.0;
    double expected_terminal_cost = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo sweep of switch times: paths follow control_target on
/// [0, s) and control_ref afterwards; one sample of E[terminal] per s.
/// Every s reuses the same seed so the curve is smooth in s.
std::vector<NeedleCurveSample> evaluate_needle_curve(const ProblemSpec& spec,
                                                     const TensorGrid& grid,
                                                     const ControlField& control_target,
                                                     const ControlField& control_ref,
                                                     std::span<const double> s_values,
                                                     std::span<const double> initial_density,
                                                     const SimulationConfig& config);

/// 33 uniform switch times covering [0, T].
std::vector<double> default_needle_grid(double horizon);

} // namespace fpkd
