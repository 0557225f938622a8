#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "fpkdescent/fields.hpp"
#include "fpkdescent/grid.hpp"
#include "fpkdescent/problem.hpp"

struct fftw_plan_s;

namespace fpkd {

/// FFT plans plus scratch for one periodic x resolution. forward() is the
/// unnormalized r2c transform, inverse() divides by n_x; spectra hold
/// n_x/2 + 1 modes. Not copyable (owns FFTW plans).
class SpectralWorkspace {
  public:
    explicit SpectralWorkspace(int n_x);
    ~SpectralWorkspace();
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    int n_x() const { return n_; }
    int n_modes() const { return n_ / 2 + 1; }
    /// First dropped mode of the 2/3 rule; k >= cutoff() is zeroed in
    /// products and in dealias().
    int cutoff() const { return cutoff_; }

    void forward(std::span<const double> in, std::span<std::complex<double>> out);
    void inverse(std::span<const std::complex<double>> in, std::span<double> out);

    /// Zeroes modes at and above the cutoff (Nyquist included).
    void dealias(std::span<std::complex<double>> spec) const;
    /// Multiplies by ik; the Nyquist mode is zeroed, everything else kept.
    void derivative_spectral(std::span<const std::complex<double>> in,
                             std::span<std::complex<double>> out) const;
    /// Real-space round trip of derivative_spectral.
    void derivative(std::span<const double> in, std::span<double> out);

  private:
    int n_, cutoff_;
    fftw_plan_s* plan_r2c_;
    fftw_plan_s* plan_c2r_;
    double* real_buf_;
    std::complex<double>* spec_buf_;
};

/// Generator L[u]phi = f[u] * dphi/dx + beta * d2phi/dx2 on one full
/// (eta, x) slab; the state input and the advection product are dealiased,
/// diffusion acts on the full spectrum. control_slab has one value per x
/// node (broadcast over eta).
std::vector<double> apply_generator(const ProblemSpec& spec, const TensorGrid& grid,
                                    SpectralWorkspace& ws, std::span<const double> phi,
                                    std::span<const double> control_slab, double t);

/// Adjoint L*[u]rho = -d/dx(f[u] * rho) + beta * d2rho/dx2, dealiased the
/// same way; exactly dual to apply_generator in the discrete inner product.
std::vector<double> apply_adjoint_generator(const ProblemSpec& spec, const TensorGrid& grid,
                                            SpectralWorkspace& ws, std::span<const double> rho,
                                            std::span<const double> control_slab, double t);

/// Density-dependent control law for the realization sweep. build fills an
/// x slab of admissible values from the current density slab and the
/// adjoint gradient slab of the step's left node; for an open-loop rule the
/// slab is constant. With sample_and_hold the output is frozen across the
/// step's RK4 stages, otherwise it is rebuilt at each stage time.
struct FeedbackRule {
    ControlClass kind = ControlClass::Markovian;
    std::function<void(double t, int time_index, std::span<const double> density_slab,
                       std::span<const double> grad_slab, std::span<double> control_out)>
        build;
    const AdjointField* adjoint = nullptr;
    bool sample_and_hold = true;
};

struct FeedbackSolveResult {
    DensityField density;
    ControlField realized;
};

/// Forward density solve under a fixed control, RK4 in spectral space.
/// Plain controls are read by linear interpolation in t at stage times.
DensityField solve_forward(const ProblemSpec& spec, const TensorGrid& grid,
                           std::span<const double> initial_density,
                           const ControlField& control);

/// Forward solve with the control recomputed from the evolving density at
/// every step. Returns the trajectory and the realized control.
FeedbackSolveResult solve_forward(const ProblemSpec& spec, const TensorGrid& grid,
                                  std::span<const double> initial_density,
                                  const FeedbackRule& feedback);

/// Inhomogeneous source q(t, x, u) of the backward equation.
using SourceFn = std::function<double(double, double, double)>;

/// Backward adjoint solve of {d/ds + L[u]} p = q from p(T) = terminal cost,
/// RK4 on the reversed clock. grad is always filled; store_p=false drops
/// the p values to halve the footprint.
AdjointField solve_backward(const ProblemSpec& spec, const TensorGrid& grid,
                            const ControlField& control, const SourceFn& source = {},
                            bool store_p = true);

/// Backward solve whose source makes p the expected cost-to-go: q absorbs
/// the user running cost and the measure-weighted penalty term.
AdjointField solve_backward_cost_to_go(const ProblemSpec& spec, const TensorGrid& grid,
                                       const ControlField& control, bool store_p = true);

} // namespace fpkd
