#pragma once

#include <span>
#include <vector>

#include "fpkdescent/grid.hpp"

namespace fpkd {

enum class ControlClass { Markovian, OpenLoop };

/// Control iterate on the time grid. Markovian controls hold one x slab per
/// time node (t-major, x fastest); open-loop controls hold one scalar per
/// time node.
class ControlField {
  public:
    static ControlField markovian(int n_t, int n_x, double fill = 0.0);
    static ControlField open_loop(int n_t, double fill = 0.0);

    ControlClass kind() const { return kind_; }
    int n_t() const { return n_t_; }
    int n_x() const { return n_x_; }

    double& at(int it, int ix) { return values_[idx(it, ix)]; }
    double at(int it, int ix) const { return values_[idx(it, ix)]; }
    double& at(int it) { return values_[it]; }
    double at(int it) const { return values_[it]; }

    /// Value at a node regardless of class (open-loop broadcasts over x).
    double value(int it, int ix) const {
        return kind_ == ControlClass::Markovian ? values_[idx(it, ix)] : values_[it];
    }

    std::span<double> slab(int it);
    std::span<const double> slab(int it) const;

    const std::vector<double>& raw() const { return values_; }
    double min_value() const;
    double max_value() const;

  private:
    ControlField(ControlClass kind, int n_t, int n_x, double fill);
    std::size_t idx(int it, int ix) const {
        return static_cast<std::size_t>(it) * n_x_ + ix;
    }

    ControlClass kind_;
    int n_t_, n_x_;
    std::vector<double> values_;
};

/// Probability density trajectory: one (eta, x) slab per stored time node,
/// row-major with x fastest. Spectral undershoot below zero is tolerated in
/// storage and clamped only on export.
class DensityField {
  public:
    DensityField(int n_t, int n_eta, int n_x);

    int n_t() const { return n_t_; }
    int n_eta() const { return n_eta_; }
    int n_x() const { return n_x_; }

    double at(int it, int j, int i) const { return values_[idx(it, j, i)]; }
    double& at(int it, int j, int i) { return values_[idx(it, j, i)]; }

    std::span<double> slab(int it);
    std::span<const double> slab(int it) const;

    /// Quadrature mass of the slab at one time node.
    double mass(const TensorGrid& grid, int it) const;
    /// max over time nodes of |mass - 1|.
    double max_mass_drift(const TensorGrid& grid) const;

    /// Slab copy with negatives clamped to zero (export form).
    std::vector<double> clamped_slab(int it) const;

  private:
    std::size_t idx(int it, int j, int i) const {
        return (static_cast<std::size_t>(it) * n_eta_ + j) * n_x_ + i;
    }

    int n_t_, n_eta_, n_x_;
    std::vector<double> values_;
};

/// Backward sweep output: p and its spectral x derivative, one (eta, x) slab
/// per time node, same layout as DensityField. grad stays valid after
/// drop_values() releases p for memory-lean increment evaluation.
class AdjointField {
  public:
    AdjointField(int n_t, int n_eta, int n_x, bool store_values = true);

    int n_t() const { return n_t_; }
    int n_eta() const { return n_eta_; }
    int n_x() const { return n_x_; }
    bool has_values() const { return !p_.empty(); }

    double p(int it, int j, int i) const { return p_[idx(it, j, i)]; }
    double grad(int it, int j, int i) const { return grad_[idx(it, j, i)]; }

    std::span<double> p_slab(int it);
    std::span<const double> p_slab(int it) const;
    std::span<double> grad_slab(int it);
    std::span<const double> grad_slab(int it) const;

    void drop_values();

  private:
    std::size_t idx(int it, int j, int i) const {
        return (static_cast<std::size_t>(it) * n_eta_ + j) * n_x_ + i;
    }

    int n_t_, n_eta_, n_x_;
    std::vector<double> p_, grad_;
};

/// Cost functional split by origin; total is the exact sum of the parts.
struct CostReport {
    double total = 0.0;
    double terminal_part = 0.0;
    double running_part = 0.0;
    double penalty_part = 0.0;
};

} // namespace fpkd
