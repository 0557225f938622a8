#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fpkdescent/grid.hpp"
#include "fpkdescent/problem.hpp"

namespace fpkd::detail {

/// Drift node tables f = base + gain * u, refreshed per query time only
/// when a sample probe sees time dependence.
struct DriftCache {
    const ProblemSpec& spec;
    const TensorGrid& grid;
    int n_eta, n_x;
    bool time_dependent = false;
    double cached_t = 0.0;
    std::vector<double> base, gain;

    DriftCache(const ProblemSpec& s, const TensorGrid& g)
        : spec(s), grid(g), n_eta(g.n_eta()), n_x(g.n_x()),
          base(static_cast<std::size_t>(n_eta) * n_x),
          gain(static_cast<std::size_t>(n_eta) * n_x) {
        fill(0.0);
        const double fracs[] = {0.271828, 0.5, 0.777, 1.0};
        const int xi[] = {0, n_x / 3, (2 * n_x) / 3};
        const int ji[] = {0, n_eta / 2, n_eta - 1};
        for (double fr : fracs) {
            double t = fr * grid.horizon();
            for (int j : ji) {
                for (int i : xi) {
                    double b = spec.drift(t, grid.x(i), grid.eta(j), 0.0);
                    double g1 = spec.drift(t, grid.x(i), grid.eta(j), 1.0) - b;
                    std::size_t idx = static_cast<std::size_t>(j) * n_x + i;
                    if (std::abs(b - base[idx]) > 1e-10 * (1.0 + std::abs(b)) ||
                        std::abs(g1 - gain[idx]) > 1e-10 * (1.0 + std::abs(g1))) {
                        time_dependent = true;
                        return;
                    }
                }
            }
        }
    }

    void fill(double t) {
        for (int j = 0; j < n_eta; ++j) {
            double eta = grid.eta(j);
            for (int i = 0; i < n_x; ++i) {
                double x = grid.x(i);
                std::size_t idx = static_cast<std::size_t>(j) * n_x + i;
                base[idx] = spec.drift(t, x, eta, 0.0);
                gain[idx] = spec.drift(t, x, eta, 1.0) - base[idx];
            }
        }
        cached_t = t;
    }

    void refresh(double t) {
        if (time_dependent && t != cached_t)
            fill(t);
    }

    const double* base_row(int j) const {
        return base.data() + static_cast<std::size_t>(j) * n_x;
    }
    const double* gain_row(int j) const {
        return gain.data() + static_cast<std::size_t>(j) * n_x;
    }
};

} // namespace fpkd::detail
