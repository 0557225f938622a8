#include "fpkdescent/fields.hpp"

#include <algorithm>
#include <cmath>

#include "fpkdescent/errors.hpp"

namespace fpkd {

ControlField::ControlField(ControlClass kind, int n_t, int n_x, double fill)
    : kind_(kind), n_t_(n_t), n_x_(n_x) {
    if (n_t < 2)
        throw InvalidSpec("control needs at least two time nodes");
    if (kind == ControlClass::Markovian && n_x < 1)
        throw InvalidSpec("markovian control needs a positive x resolution");
    values_.assign(static_cast<std::size_t>(n_t) * (kind == ControlClass::Markovian ? n_x : 1),
                   fill);
}

ControlField ControlField::markovian(int n_t, int n_x, double fill) {
    return ControlField(ControlClass::Markovian, n_t, n_x, fill);
}

ControlField ControlField::open_loop(int n_t, double fill) {
    return ControlField(ControlClass::OpenLoop, n_t, 1, fill);
}

std::span<double> ControlField::slab(int it) {
    std::size_t w = kind_ == ControlClass::Markovian ? n_x_ : 1;
    return {values_.data() + it * w, w};
}

std::span<const double> ControlField::slab(int it) const {
    std::size_t w = kind_ == ControlClass::Markovian ? n_x_ : 1;
    return {values_.data() + it * w, w};
}

double ControlField::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

double ControlField::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}

DensityField::DensityField(int n_t, int n_eta, int n_x)
    : n_t_(n_t), n_eta_(n_eta), n_x_(n_x) {
    values_.assign(static_cast<std::size_t>(n_t) * n_eta * n_x, 0.0);
}

std::span<double> DensityField::slab(int it) {
    std::size_t w = static_cast<std::size_t>(n_eta_) * n_x_;
    return {values_.data() + it * w, w};
}

std::span<const double> DensityField::slab(int it) const {
    std::size_t w = static_cast<std::size_t>(n_eta_) * n_x_;
    return {values_.data() + it * w, w};
}

double DensityField::mass(const TensorGrid& grid, int it) const {
    if (grid.n_eta() != n_eta_ || grid.n_x() != n_x_)
        throw ShapeMismatch("density/grid shape mismatch in mass");
    double m = 0.0;
    for (int j = 0; j < n_eta_; ++j) {
        double row = 0.0;
        for (int i = 0; i < n_x_; ++i)
            row += at(it, j, i);
        m += row * grid.eta_weight(j);
    }
    return m * grid.dx();
}

double DensityField::max_mass_drift(const TensorGrid& grid) const {
    double worst = 0.0;
    for (int it = 0; it < n_t_; ++it)
        worst = std::max(worst, std::abs(mass(grid, it) - 1.0));
    return worst;
}

std::vector<double> DensityField::clamped_slab(int it) const {
    auto s = slab(it);
    std::vector<double> out(s.begin(), s.end());
    for (double& v : out)
        v = std::max(v, 0.0);
    return out;
}

AdjointField::AdjointField(int n_t, int n_eta, int n_x, bool store_values)
    : n_t_(n_t), n_eta_(n_eta), n_x_(n_x) {
    std::size_t total = static_cast<std::size_t>(n_t) * n_eta * n_x;
    if (store_values)
        p_.assign(total, 0.0);
    grad_.assign(total, 0.0);
}

std::span<double> AdjointField::p_slab(int it) {
    std::size_t w = static_cast<std::size_t>(n_eta_) * n_x_;
    return {p_.data() + it * w, w};
}

std::span<const double> AdjointField::p_slab(int it) const {
    std::size_t w = static_cast<std::size_t>(n_eta_) * n_x_;
    return {p_.data() + it * w, w};
}

std::span<double> AdjointField::grad_slab(int it) {
    std::size_t w = static_cast<std::size_t>(n_eta_) * n_x_;
    return {grad_.data() + it * w, w};
}

std::span<const double> AdjointField::grad_slab(int it) const {
    std::size_t w = static_cast<std::size_t>(n_eta_) * n_x_;
    return {grad_.data() + it * w, w};
}

void AdjointField::drop_values() {
    p_.clear();
    p_.shrink_to_fit();
}

} // namespace fpkd
