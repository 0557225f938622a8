#include "fpkdescent/grid.hpp"

#include <cmath>
#include <string>

#include "fpkdescent/errors.hpp"

namespace fpkd {

double wrap_angle(double x) {
    double y = x - kTwoPi * std::floor(x / kTwoPi);
    if (y >= kTwoPi) y -= kTwoPi;
    if (y < 0.0) y = 0.0;
    return y;
}

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

TensorGrid::TensorGrid(int n_x, int n_eta, int n_t, double horizon,
                       double eta_min, double eta_max)
    : n_x_(n_x), n_eta_(n_eta), n_t_(n_t), horizon_(horizon),
      eta_min_(eta_min), eta_max_(eta_max) {
    if (!power_of_two(n_x) || n_x < 8)
        throw InvalidSpec("n_x must be a power of two >= 8, got " + std::to_string(n_x));
    if (n_eta < 1)
        throw InvalidSpec("n_eta must be >= 1");
    if (n_t < 2)
        throw InvalidSpec("n_t must be >= 2");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw InvalidSpec("horizon must be positive and finite");
    if (n_eta > 1 && !(eta_min < eta_max))
        throw InvalidSpec("eta_min must be < eta_max");

    dx_ = kTwoPi / n_x;
    dt_ = horizon / (n_t - 1);

    x_.resize(n_x);
    for (int i = 0; i < n_x; ++i) x_[i] = dx_ * i;

    eta_.resize(n_eta);
    eta_w_.resize(n_eta);
    if (n_eta == 1) {
        eta_[0] = 0.5 * (eta_min + eta_max);
        eta_w_[0] = 1.0;
    } else {
        const double de = (eta_max - eta_min) / (n_eta - 1);
        for (int j = 0; j < n_eta; ++j) {
            eta_[j] = eta_min + de * j;
            eta_w_[j] = (j == 0 || j == n_eta - 1) ? 0.5 * de : de;
        }
    }

    t_.resize(n_t);
    for (int k = 0; k < n_t; ++k) t_[k] = dt_ * k;
    t_.back() = horizon;
}

int TensorGrid::time_index(double t) const {
    int k = static_cast<int>(std::lround(t / dt_));
    if (k < 0) k = 0;
    if (k > n_t_ - 1) k = n_t_ - 1;
    return k;
}

double TensorGrid::max_stable_dt(double beta, int n_x) {
    const int k_max = n_x / 3;
    return 0.8 / (beta * static_cast<double>(k_max) * static_cast<double>(k_max));
}

int TensorGrid::time_nodes_for_stability(double horizon, double beta, int n_x) {
    const double bound = max_stable_dt(beta, n_x);
    const int steps = static_cast<int>(std::ceil(horizon / bound - 1e-12));
    return steps + 1;
}

} // namespace fpkd
