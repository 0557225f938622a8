#pragma once

#include <cstddef>
#include <vector>

namespace fpkd {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wrap a coordinate into [0, 2pi).
double wrap_angle(double x);

/// Tensor discretization shared by all solvers: periodic x in [0, 2pi) with a
/// power-of-two node count (FFT), the parameter eta on a bounded interval with
/// trapezoid quadrature weights, and uniform time nodes on [0, T].
///
/// eta carries no dynamics of its own, so the PDE factorizes into independent
/// x problems per eta node; the weights only enter quadratures.
class TensorGrid {
  public:
    TensorGrid(int n_x, int n_eta, int n_t, double horizon,
               double eta_min = -2.0, double eta_max = 2.0);

    int n_x() const { return n_x_; }
    int n_eta() const { return n_eta_; }
    int n_t() const { return n_t_; }
    double horizon() const { return horizon_; }
    double dx() const { return dx_; }
    double dt() const { return dt_; }
    double eta_min() const { return eta_min_; }
    double eta_max() const { return eta_max_; }

    double x(int i) const { return x_[i]; }
    double eta(int j) const { return eta_[j]; }
    double t(int k) const { return t_[k]; }

    const std::vector<double>& x_nodes() const { return x_; }
    const std::vector<double>& eta_nodes() const { return eta_; }
    const std::vector<double>& t_nodes() const { return t_; }

    /// Trapezoid quadrature weights over eta ({1} for a single node).
    const std::vector<double>& eta_weights() const { return eta_w_; }
    double eta_weight(int j) const { return eta_w_[j]; }

    /// Values per (eta, x) slab, x fastest.
    std::size_t slab_size() const {
        return static_cast<std::size_t>(n_eta_) * static_cast<std::size_t>(n_x_);
    }

    /// Nearest time node index for a time in [0, T].
    int time_index(double t) const;

    /// Largest RK4-stable step for diffusion beta at this x resolution
    /// (explicit diffusion limit using the post-dealiasing mode count).
    static double max_stable_dt(double beta, int n_x);

    /// Smallest node count whose uniform step satisfies max_stable_dt.
    static int time_nodes_for_stability(double horizon, double beta, int n_x);

  private:
    int n_x_, n_eta_, n_t_;
    double horizon_, dx_, dt_, eta_min_, eta_max_;
    std::vector<double> x_, eta_, t_, eta_w_;
};

} // namespace fpkd
