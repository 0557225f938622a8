#include "fpkdescent/problem.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fpkdescent/errors.hpp"

namespace fpkd {

double ProblemSpec::clamp_control(double u) const {
    return std::clamp(u, u_lo, u_hi);
}

namespace {

double max_second_difference(const TerminalCostFn& cost, int n) {
    double h = kTwoPi / n;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = cost(i * h);
        if (!std::isfinite(v[i]))
            throw InvalidSpec("terminal cost is non-finite on the grid");
    }
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double d2 = (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]) / (h * h);
        worst = std::max(worst, std::abs(d2));
    }
    return worst;
}

} // namespace

void ProblemSpec::validate(const TensorGrid& grid) const {
    if (!drift)
        throw InvalidSpec("drift function is not set");
    if (!terminal_cost)
        throw InvalidSpec("terminal cost function is not set");
    if (!(u_lo <= u_hi) || !std::isfinite(u_lo) || !std::isfinite(u_hi))
        throw InvalidSpec("control interval must satisfy u_lo <= u_hi and be finite");
    if (!(diffusion_coeff > 0.0) || !std::isfinite(diffusion_coeff))
        throw InvalidSpec("diffusion coefficient must be positive");
    if (penalty.kind != PenaltyKind::None &&
        (!(penalty.alpha > 0.0) || !std::isfinite(penalty.alpha)))
        throw InvalidSpec("penalty weight must be positive");

    if (u_hi > u_lo) {
        double mid = 0.5 * (u_lo + u_hi);
        double ts[3] = {0.0, 0.5 * grid.horizon(), grid.horizon()};
        int xi[3] = {0, grid.n_x() / 3, (2 * grid.n_x()) / 3};
        for (double t : ts) {
            for (int i : xi) {
                for (int j = 0; j < grid.n_eta(); j += std::max(1, grid.n_eta() / 2)) {
                    double x = grid.x(i), e = grid.eta(j);
                    double fa = drift(t, x, e, u_lo);
                    double fb = drift(t, x, e, u_hi);
                    double fm = drift(t, x, e, mid);
                    double tol = 1e-8 * (1.0 + std::abs(fa) + std::abs(fb));
                    if (std::abs(fm - 0.5 * (fa + fb)) > tol)
                        throw InvalidSpec("drift is not affine in the control");
                }
            }
        }
    }

    double coarse = max_second_difference(terminal_cost, 128);
    double fine = max_second_difference(terminal_cost, 256);
    if (fine > 1.6 * coarse + 1e-3 * (1.0 + coarse))
        throw InvalidSpec(
            "terminal cost fails the smoothness probe (second differences grow under refinement)");
}

double control_gain(const ProblemSpec& spec, double t, double x, double eta) {
    return spec.drift(t, x, eta, 1.0) - spec.drift(t, x, eta, 0.0);
}

double drift_base(const ProblemSpec& spec, double t, double x, double eta) {
    return spec.drift(t, x, eta, 0.0);
}

double measure_stage_cost(const ProblemSpec& spec, double t, double x, double u) {
    double r = spec.has_running_cost() ? spec.running_cost(t, x, u) : 0.0;
    if (spec.penalty.kind == PenaltyKind::MeasureWeighted)
        r += 0.5 * spec.penalty.alpha * u * u;
    return r;
}

double hamiltonian(const ProblemSpec& spec, double t, double x, double eta, double psi,
                   double u) {
    double h = psi * spec.drift(t, x, eta, u);
    if (spec.has_running_cost())
        h += spec.running_cost(t, x, u);
    return h;
}

double argmin_hamiltonian_pointwise(const ProblemSpec& spec, double t, double x,
                                    double eta_aggregate) {
    (void)t;
    (void)x;
    if (spec.penalty.kind == PenaltyKind::None) {
        if (eta_aggregate > 0.0)
            return spec.u_lo;
        if (eta_aggregate < 0.0)
            return spec.u_hi;
        if (spec.u_lo <= 0.0 && 0.0 <= spec.u_hi)
            return 0.0;
        double lo = std::abs(spec.u_lo), hi = std::abs(spec.u_hi);
        if (lo != hi)
            return lo < hi ? spec.u_lo : spec.u_hi;
        return spec.u_lo;
    }
    return spec.clamp_control(-eta_aggregate / spec.penalty.alpha);
}

double control_energy_penalty(const ProblemSpec& spec, const TensorGrid& grid,
                              const ControlField& control) {
    if (spec.penalty.kind != PenaltyKind::DirectL2)
        return 0.0;
    if (control.n_t() != grid.n_t())
        throw ShapeMismatch("control time nodes do not match the grid");
    int last = grid.n_t() - 1;
    double dt = grid.dt(), alpha = spec.penalty.alpha;
    double total = 0.0;
    if (control.kind() == ControlClass::Markovian) {
        if (control.n_x() != grid.n_x())
            throw ShapeMismatch("markovian control x nodes do not match the grid");
        for (int k = 0; k <= last; ++k) {
            double slab = 0.0;
            for (int i = 0; i < grid.n_x(); ++i) {
                double w = control.at(k, i);
                slab += w * w;
            }
            total += 0.5 * alpha * slab * grid.dx() * ((k == 0 || k == last) ? 0.5 * dt : dt);
        }
    } else {
        for (int k = 0; k <= last; ++k) {
            double u = control.value(k, 0);
            total += 0.5 * alpha * u * u * ((k == 0 || k == last) ? 0.5 * dt : dt);
        }
    }
    return total;
}

CostReport evaluate_cost(const ProblemSpec& spec, const TensorGrid& grid,
                         const DensityField& density, const ControlField& control) {
    if (density.n_t() != grid.n_t() || density.n_eta() != grid.n_eta() ||
        density.n_x() != grid.n_x())
        throw ShapeMismatch("density shape does not match the grid");
    if (control.n_t() != grid.n_t())
        throw ShapeMismatch("control time nodes do not match the grid");
    if (control.kind() != spec.control_class)
        throw ShapeMismatch("control class does not match the problem spec");
    if (control.kind() == ControlClass::Markovian && control.n_x() != grid.n_x())
        throw ShapeMismatch("markovian control x nodes do not match the grid");

    int n_t = grid.n_t(), n_eta = grid.n_eta(), n_x = grid.n_x();
    double dx = grid.dx(), dt = grid.dt();

    CostReport report;

    int last = n_t - 1;
    for (int j = 0; j < n_eta; ++j) {
        double row = 0.0;
        for (int i = 0; i < n_x; ++i)
            row += spec.terminal_cost(grid.x(i)) * density.at(last, j, i);
        report.terminal_part += row * grid.eta_weight(j);
    }
    report.terminal_part *= dx;

    auto trapz_weight = [&](int k) { return (k == 0 || k == last) ? 0.5 * dt : dt; };

    if (spec.has_running_cost()) {
        for (int k = 0; k < n_t; ++k) {
            double t = grid.t(k);
            double slab = 0.0;
            for (int j = 0; j < n_eta; ++j) {
                double row = 0.0;
                for (int i = 0; i < n_x; ++i)
                    row += spec.running_cost(t, grid.x(i), control.value(k, i)) *
                           density.at(k, j, i);
                slab += row * grid.eta_weight(j);
            }
            report.running_part += slab * dx * trapz_weight(k);
        }
    }

    double alpha = spec.penalty.alpha;
    switch (spec.penalty.kind) {
    case PenaltyKind::None:
        break;
    case PenaltyKind::MeasureWeighted:
        for (int k = 0; k < n_t; ++k) {
            double slab = 0.0;
            for (int j = 0; j < n_eta; ++j) {
                double row = 0.0;
                for (int i = 0; i < n_x; ++i) {
                    double u = control.value(k, i);
                    row += 0.5 * alpha * u * u * density.at(k, j, i);
                }
                slab += row * grid.eta_weight(j);
            }
            report.penalty_part += slab * dx * trapz_weight(k);
        }
        break;
    case PenaltyKind::DirectL2:
        report.penalty_part = control_energy_penalty(spec, grid, control);
        break;
    }

    report.total = report.terminal_part + report.running_part + report.penalty_part;
    return report;
}

} // namespace fpkd
