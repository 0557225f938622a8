#pragma once

#include <functional>

#include "fpkdescent/fields.hpp"
#include "fpkdescent/grid.hpp"

namespace fpkd {

/// Drift f(t, x, eta, u). Must be affine in u (probed by validate()).
using DriftFn = std::function<double(double, double, double, double)>;
/// Terminal cost l(x).
using TerminalCostFn = std::function<double(double)>;
/// Running cost R(t, x, u); optional.
using RunningCostFn = std::function<double(double, double, double)>;

enum class PenaltyKind { None, MeasureWeighted, DirectL2 };

struct Penalty {
    PenaltyKind kind = PenaltyKind::None;
    double alpha = 0.0;

    static Penalty none() { return {PenaltyKind::None, 0.0}; }
    static Penalty measure_weighted(double alpha) {
        return {PenaltyKind::MeasureWeighted, alpha};
    }
    static Penalty direct_l2(double alpha) { return {PenaltyKind::DirectL2, alpha}; }
};

/// Control problem data: dynamics, costs, admissible control interval,
/// penalty mode and control class.
struct ProblemSpec {
    DriftFn drift;
    double diffusion_coeff = 0.0;
    TerminalCostFn terminal_cost;
    RunningCostFn running_cost;
    double u_lo = 0.0;
    double u_hi = 0.0;
    Penalty penalty;
    ControlClass control_class = ControlClass::Markovian;

    bool has_running_cost() const { return static_cast<bool>(running_cost); }
    double clamp_control(double u) const;

    /// Checks the invariants: interval order, positive diffusion, positive
    /// penalty weight, affine control dependence of the drift (sampled) and
    /// a finite-difference smoothness probe of the terminal cost on the
    /// periodic x grid. Throws InvalidSpec on failure.
    void validate(const TensorGrid& grid) const;
};

/// Control channel gain g(t,x,eta) = f(t,x,eta,1) - f(t,x,eta,0).
double control_gain(const ProblemSpec& spec, double t, double x, double eta);

/// Drift with the control channel off: f(t,x,eta,0).
double drift_base(const ProblemSpec& spec, double t, double x, double eta);

/// Running cost as seen by the measure: user running cost plus the
/// measure-weighted quadratic penalty when that mode is active. DirectL2 is
/// density-free and deliberately excluded.
double measure_stage_cost(const ProblemSpec& spec, double t, double x, double u);

/// psi * f(t,x,eta,u) plus the running cost when one is set.
double hamiltonian(const ProblemSpec& spec, double t, double x, double eta, double psi,
                   double u);

/// Pointwise minimizer of the control channel given the eta-integrated
/// coefficient of u. Penalty None: bang-bang on the sign, ties resolved to
/// the admissible value of smallest magnitude (then the smaller value).
/// Quadratic penalties: clamp(-eta_aggregate/alpha, [u_lo, u_hi]); callers
/// fold any density weighting into eta_aggregate.
double argmin_hamiltonian_pointwise(const ProblemSpec& spec, double t, double x,
                                    double eta_aggregate);

/// Density-free quadratic control penalty: for DirectL2 the time-trapezoid
/// of (alpha/2) * ||w_t||^2 in L2(dx) (Markovian) or of (alpha/2) * u_t^2
/// (open-loop); zero for the other penalty modes.
double control_energy_penalty(const ProblemSpec& spec, const TensorGrid& grid,
                              const ControlField& control);

/// Cost functional of a control given its density trajectory. Trapezoid in
/// t, exact Riemann in x, grid eta weights.
CostReport evaluate_cost(const ProblemSpec& spec, const TensorGrid& grid,
                         const DensityField& density, const ControlField& control);

} // namespace fpkd
