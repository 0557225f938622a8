#include "fpkdescent/descent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "drift_cache.hpp"
#include "fpkdescent/errors.hpp"

namespace fpkd {

namespace {

using detail::DriftCache;

constexpr double kMassFloor = 1e-14;

double eta_aggregate_at(const ProblemSpec& spec, const TensorGrid& grid,
                        const DriftCache& cache, std::span<const double> grad_slab,
                        const double* density_slab, int i) {
    double a = 0.0, m = 0.0;
    for (int j = 0; j < grid.n_eta(); ++j) {
        std::size_t idx = static_cast<std::size_t>(j) * grid.n_x() + i;
        double rho = density_slab ? density_slab[idx] : 1.0;
        double w = grid.eta_weight(j);
        a += grad_slab[idx] * cache.gain_row(j)[i] * rho * w;
        m += rho * w;
    }
    if (spec.penalty.kind == PenaltyKind::MeasureWeighted)
        return a / std::max(m, kMassFloor);
    return a;
}

void comparison_slab(const ProblemSpec& spec, const TensorGrid& grid, const DriftCache& cache,
                     double t, std::span<const double> grad_slab, const double* density_slab,
                     std::span<double> out) {
    for (int i = 0; i < grid.n_x(); ++i) {
        double agg = eta_aggregate_at(spec, grid, cache, grad_slab, density_slab, i);
        out[i] = argmin_hamiltonian_pointwise(spec, t, grid.x(i), agg);
    }
}

double openloop_value(const ProblemSpec& spec, const TensorGrid& grid, const DriftCache& cache,
                      double t, std::span<const double> grad_slab,
                      std::span<const double> density_slab) {
    double a = 0.0, m = 0.0;
    for (int j = 0; j < grid.n_eta(); ++j) {
        double w = grid.eta_weight(j);
        double row_a = 0.0, row_m = 0.0;
        for (int i = 0; i < grid.n_x(); ++i) {
            std::size_t idx = static_cast<std::size_t>(j) * grid.n_x() + i;
            row_a += grad_slab[idx] * cache.gain_row(j)[i] * density_slab[idx];
            row_m += density_slab[idx];
        }
        a += row_a * w;
        m += row_m * w;
    }
    a *= grid.dx();
    m *= grid.dx();
    double agg = spec.penalty.kind == PenaltyKind::MeasureWeighted ? a / std::max(m, kMassFloor)
                                                                   : a;
    return argmin_hamiltonian_pointwise(spec, t, 0.0, agg);
}

void check_adjoint_shape(const TensorGrid& grid, const AdjointField& adjoint) {
    if (adjoint.n_t() != grid.n_t() || adjoint.n_eta() != grid.n_eta() ||
        adjoint.n_x() != grid.n_x())
        throw ShapeMismatch("adjoint shape does not match the grid");
}

void check_control_shape(const TensorGrid& grid, const ControlField& control) {
    if (control.n_t() != grid.n_t())
        throw ShapeMismatch("control time nodes do not match the grid");
    if (control.kind() == ControlClass::Markovian && control.n_x() != grid.n_x())
        throw ShapeMismatch("control x nodes do not match the grid");
}

void check_admissible(const ProblemSpec& spec, const ControlField& control) {
    if (control.min_value() < spec.u_lo - 1e-12 || control.max_value() > spec.u_hi + 1e-12)
        throw InvalidSpec("initial control leaves the admissible interval");
}

DescentResult run_descent(const ProblemSpec& spec, const TensorGrid& grid,
                          std::span<const double> initial_density,
                          const ControlField& initial_guess, double epsilon, int max_iterations,
                          ControlClass algorithm_class) {
    if (!(epsilon > 0.0))
        throw InvalidSpec("stopping threshold must be positive");
    if (max_iterations < 1)
        throw InvalidSpec("descent needs at least one iteration");
    if (initial_guess.kind() != algorithm_class || spec.control_class != algorithm_class)
        throw InvalidSpec(algorithm_class == ControlClass::Markovian
                              ? "markovian descent needs a markovian spec and initial control"
                              : "open-loop descent needs an open-loop spec and initial control");
    spec.validate(grid);
    check_control_shape(grid, initial_guess);
    check_admissible(spec, initial_guess);

    using clock = std::chrono::steady_clock;
    auto seconds_since = [](clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };
    double nan = std::numeric_limits<double>::quiet_NaN();

    DescentResult result{initial_guess, {}, false,
                         DensityField(grid.n_t(), grid.n_eta(), grid.n_x())};

    auto t0 = clock::now();
    result.density = solve_forward(spec, grid, initial_density, result.control);
    CostReport cost = evaluate_cost(spec, grid, result.density, result.control);
    result.history.push_back({0, cost, nan, seconds_since(t0)});

    DriftCache cache(spec, grid);
    for (int iter = 1; iter <= max_iterations; ++iter) {
        t0 = clock::now();
        AdjointField adjoint =
            solve_backward_cost_to_go(spec, grid, result.control, /*store_p=*/false);

        FeedbackRule rule;
        rule.kind = algorithm_class;
        rule.adjoint = &adjoint;
        rule.sample_and_hold = true;
        if (algorithm_class == ControlClass::Markovian) {
            rule.build = [&](double t, int, std::span<const double> dens,
                             std::span<const double> grad, std::span<double> out) {
                cache.refresh(t);
                comparison_slab(spec, grid, cache, t, grad, dens.data(), out);
            };
        } else {
            rule.build = [&](double t, int, std::span<const double> dens,
                             std::span<const double> grad, std::span<double> out) {
                cache.refresh(t);
                std::fill(out.begin(), out.end(),
                          openloop_value(spec, grid, cache, t, grad, dens));
            };
        }

        FeedbackSolveResult step = solve_forward(spec, grid, initial_density, rule);
        CostReport new_cost = evaluate_cost(spec, grid, step.density, step.realized);
        result.history.back().residual =
            -exact_increment(spec, grid, adjoint, step.density, step.realized, result.control);

        if (new_cost.total > cost.total + 1e-9) {
            std::ostringstream msg;
            msg << "cost increased from " << cost.total << " to " << new_cost.total
                << " at iteration " << iter;
            throw MonotonicityViolation(msg.str());
        }

        double decrease = cost.total - new_cost.total;
        result.control = std::move(step.realized);
        result.density = std::move(step.density);
        cost = new_cost;
        result.history.push_back({iter, cost, nan, seconds_since(t0)});

        if (decrease < epsilon) {
            result.converged = true;
            break;
        }
    }
    return result;
}

} // namespace

ControlField comparison_control_markovian(const ProblemSpec& spec, const TensorGrid& grid,
                                          const AdjointField& adjoint,
                                          const DensityField* density) {
    check_adjoint_shape(grid, adjoint);
    if (spec.penalty.kind == PenaltyKind::DirectL2 && !density)
        throw MissingDensity("the quadratic control penalty needs the density weight");
    if (density && (density->n_t() != grid.n_t() || density->n_eta() != grid.n_eta() ||
                    density->n_x() != grid.n_x()))
        throw ShapeMismatch("density shape does not match the grid");

    DriftCache cache(spec, grid);
    ControlField w = ControlField::markovian(grid.n_t(), grid.n_x());
    for (int k = 0; k < grid.n_t(); ++k) {
        double t = grid.t(k);
        cache.refresh(t);
        comparison_slab(spec, grid, cache, t, adjoint.grad_slab(k),
                        density ? density->slab(k).data() : nullptr, w.slab(k));
    }
    return w;
}

double comparison_control_openloop(const ProblemSpec& spec, const TensorGrid& grid,
                                   const AdjointField& adjoint,
                                   std::span<const double> density_slab, double t) {
    check_adjoint_shape(grid, adjoint);
    if (density_slab.size() != grid.slab_size())
        throw ShapeMismatch("density slab size does not match the grid");
    DriftCache cache(spec, grid);
    cache.refresh(t);
    return openloop_value(spec, grid, cache, t, adjoint.grad_slab(grid.time_index(t)),
                          density_slab);
}

double exact_increment(const ProblemSpec& spec, const TensorGrid& grid,
                       const AdjointField& adjoint_ref, const DensityField& density_target,
                       const ControlField& control_target, const ControlField& control_ref) {
    check_adjoint_shape(grid, adjoint_ref);
    if (density_target.n_t() != grid.n_t() || density_target.n_eta() != grid.n_eta() ||
        density_target.n_x() != grid.n_x())
        throw ShapeMismatch("density shape does not match the grid");
    check_control_shape(grid, control_target);
    check_control_shape(grid, control_ref);

    DriftCache cache(spec, grid);
    int n_t = grid.n_t(), n_eta = grid.n_eta(), n_x = grid.n_x();
    double dt = grid.dt();
    double acc = 0.0;
    for (int k = 0; k < n_t; ++k) {
        double t = grid.t(k);
        cache.refresh(t);
        double slab = 0.0;
        for (int i = 0; i < n_x; ++i) {
            double u = control_target.value(k, i);
            double ur = control_ref.value(k, i);
            if (u == ur)
                continue;
            double du = u - ur;
            double x = grid.x(i);
            double rdiff = measure_stage_cost(spec, t, x, u) - measure_stage_cost(spec, t, x, ur);
            double adv = 0.0, mass = 0.0;
            for (int j = 0; j < n_eta; ++j) {
                double rho = density_target.at(k, j, i) * grid.eta_weight(j);
                adv += adjoint_ref.grad(k, j, i) * cache.gain_row(j)[i] * rho;
                mass += rho;
            }
            slab += adv * du + rdiff * mass;
        }
        acc += slab * grid.dx() * ((k == 0 || k == n_t - 1) ? 0.5 * dt : dt);
    }
    acc += control_energy_penalty(spec, grid, control_target) -
           control_energy_penalty(spec, grid, control_ref);
    return acc;
}

DescentResult run_algorithm_1(const ProblemSpec& spec, const TensorGrid& grid,
                              std::span<const double> initial_density,
                              const ControlField& initial_guess, double epsilon,
                              int max_iterations) {
    return run_descent(spec, grid, initial_density, initial_guess, epsilon, max_iterations,
                       ControlClass::Markovian);
}

DescentResult run_algorithm_2(const ProblemSpec& spec, const TensorGrid& grid,
                              std::span<const double> initial_density,
                              const ControlField& initial_guess, double epsilon,
                              int max_iterations) {
    return run_descent(spec, grid, initial_density, initial_guess, epsilon, max_iterations,
                       ControlClass::OpenLoop);
}

std::vector<NeedleCurveSample> evaluate_needle_curve(const ProblemSpec& spec,
                                                     const TensorGrid& grid,
                                                     const ControlField& control_target,
                                                     const ControlField& control_ref,
                                                     std::span<const double> s_values,
                                                     std::span<const double> initial_density,
                                                     const SimulationConfig& config) {
    check_control_shape(grid, control_target);
    check_control_shape(grid, control_ref);
    PathProblem prob;
    prob.drift = spec.drift;
    prob.beta = spec.diffusion_coeff;
    prob.wrap = true;
    prob.terminal = spec.terminal_cost;
    SlabSampler sampler(grid, initial_density);
    std::vector<NeedleCurveSample> out;
    out.reserve(s_values.size());
    for (double s : s_values) {
        if (s < 0.0 || s > grid.horizon() + 1e-12)
            throw InvalidSpec("needle switch time outside the horizon");
        ControlLookup lk = ControlLookup::switched(control_target, control_ref, s, grid);
        PathBatchStats stats =
            simulate_terminal_cost(prob, lk, sampler, 0.0, grid.horizon(), config);
        out.push_back({s, stats.mean, stats.std_error});
    }
    return out;
}

std::vector<double> default_needle_grid(double horizon) {
    std::vector<double> s(33);
    for (int i = 0; i < 33; ++i)
        s[i] = horizon * i / 32.0;
    return s;
}

} // namespace fpkd
