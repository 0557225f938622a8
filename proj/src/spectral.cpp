#include "fpkdescent/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "drift_cache.hpp"
#include "fpkdescent/errors.hpp"

namespace fpkd {

SpectralWorkspace::SpectralWorkspace(int n_x) : n_(n_x), cutoff_(n_x / 3) {
    if (n_x < 8 || (n_x & (n_x - 1)) != 0)
        throw InvalidSpec("spectral transform needs a power-of-two x resolution >= 8");
    real_buf_ = fftw_alloc_real(n_);
    spec_buf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n_modes()));
    plan_r2c_ = fftw_plan_dft_r2c_1d(n_, real_buf_, reinterpret_cast<fftw_complex*>(spec_buf_),
                                     FFTW_MEASURE);
    plan_c2r_ = fftw_plan_dft_c2r_1d(n_, reinterpret_cast<fftw_complex*>(spec_buf_), real_buf_,
                                     FFTW_MEASURE);
}

SpectralWorkspace::~SpectralWorkspace() {
    fftw_destroy_plan(plan_r2c_);
    fftw_destroy_plan(plan_c2r_);
    fftw_free(real_buf_);
    fftw_free(spec_buf_);
}

void SpectralWorkspace::forward(std::span<const double> in, std::span<std::complex<double>> out) {
    if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != n_modes())
        throw ShapeMismatch("forward transform buffer sizes");
    std::memcpy(real_buf_, in.data(), n_ * sizeof(double));
    fftw_execute(plan_r2c_);
    std::memcpy(out.data(), spec_buf_, n_modes() * sizeof(std::complex<double>));
}

void SpectralWorkspace::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    if (static_cast<int>(in.size()) != n_modes() || static_cast<int>(out.size()) != n_)
        throw ShapeMismatch("inverse transform buffer sizes");
    std::memcpy(spec_buf_, in.data(), n_modes() * sizeof(std::complex<double>));
    fftw_execute(plan_c2r_);
    double inv_n = 1.0 / n_;
    for (int i = 0; i < n_; ++i)
        out[i] = real_buf_[i] * inv_n;
}

void SpectralWorkspace::dealias(std::span<std::complex<double>> spec) const {
    if (static_cast<int>(spec.size()) != n_modes())
        throw ShapeMismatch("dealias buffer size");
    for (int k = cutoff_; k < n_modes(); ++k)
        spec[k] = 0.0;
}

void SpectralWorkspace::derivative_spectral(std::span<const std::complex<double>> in,
                                            std::span<std::complex<double>> out) const {
    if (static_cast<int>(in.size()) != n_modes() || static_cast<int>(out.size()) != n_modes())
        throw ShapeMismatch("derivative buffer sizes");
    for (int k = 0; k < n_ / 2; ++k)
        out[k] = std::complex<double>(0.0, k) * in[k];
    out[n_ / 2] = 0.0;
}

void SpectralWorkspace::derivative(std::span<const double> in, std::span<double> out) {
    std::vector<std::complex<double>> a(n_modes()), b(n_modes());
    forward(in, a);
    derivative_spectral(a, b);
    inverse(b, out);
}

namespace {

constexpr int kScanInterval = 64;

double slab_mass(const TensorGrid& grid, std::span<const double> slab) {
    double m = 0.0;
    for (int j = 0; j < grid.n_eta(); ++j) {
        double row = 0.0;
        for (int i = 0; i < grid.n_x(); ++i)
            row += slab[static_cast<std::size_t>(j) * grid.n_x() + i];
        m += row * grid.eta_weight(j);
    }
    return m * grid.dx();
}

void scan_state(const std::vector<std::complex<double>>& state, double threshold,
                const char* what) {
    for (const auto& c : state) {
        double a = std::abs(c.real()) + std::abs(c.imag());
        if (!std::isfinite(a) || a > threshold)
            throw UnstableStep(std::string(what) +
                               " solve blew up mid-run; use a finer time grid");
    }
}

void check_stability(double beta, int n_x, double dt) {
    double bound = TensorGrid::max_stable_dt(beta, n_x);
    if (dt > bound * (1.0 + 1e-9)) {
        std::ostringstream msg;
        msg << "time step " << dt << " exceeds the diffusion stability bound " << bound;
        throw UnstableStep(msg.str());
    }
}

using detail::DriftCache;

/// Control x-slab at an arbitrary time, linear interpolation between nodes.
void control_slab_at(const ControlField& control, const TensorGrid& grid, double s,
                     std::span<double> out) {
    double dt = grid.dt();
    int k = std::clamp(static_cast<int>(std::floor(s / dt)), 0, grid.n_t() - 2);
    double theta = std::clamp(s / dt - k, 0.0, 1.0);
    if (control.kind() == ControlClass::Markovian) {
        for (int i = 0; i < grid.n_x(); ++i)
            out[i] = (1.0 - theta) * control.at(k, i) + theta * control.at(k + 1, i);
    } else {
        double u = (1.0 - theta) * control.value(k, 0) + theta * control.value(k + 1, 0);
        std::fill(out.begin(), out.end(), u);
    }
}

struct SliceScratch {
    std::vector<std::complex<double>> spec_a, spec_b;
    std::vector<double> real_a, real_b;

    SliceScratch(int n_x, int nc)
        : spec_a(nc), spec_b(nc), real_a(n_x), real_b(n_x) {}
};

/// d(rho)/dt per slice: -d/dx(f * P rho) dealiased + beta * d2/dx2 rho.
void forward_rhs(SpectralWorkspace& ws, const DriftCache& tables, int j,
                 const std::complex<double>* y, const double* u, double beta,
                 SliceScratch& sc, std::complex<double>* out) {
    int nc = ws.n_modes(), cut = ws.cutoff(), n = ws.n_x();
    for (int k = 0; k < nc; ++k)
        sc.spec_a[k] = k < cut ? y[k] : 0.0;
    ws.inverse(sc.spec_a, sc.real_a);
    const double* b = tables.base_row(j);
    const double* g = tables.gain_row(j);
    for (int i = 0; i < n; ++i)
        sc.real_b[i] = (b[i] + g[i] * u[i]) * sc.real_a[i];
    ws.forward(sc.real_b, sc.spec_a);
    for (int k = 0; k < nc; ++k) {
        std::complex<double> adv =
            k < cut ? std::complex<double>(0.0, k) * sc.spec_a[k] : std::complex<double>(0.0);
        out[k] = -adv - beta * static_cast<double>(k) * k * y[k];
    }
}

/// dp/dsigma per slice on the reversed clock: f * d/dx(P p) dealiased
/// + beta * d2/dx2 p - q.
void backward_rhs(SpectralWorkspace& ws, const DriftCache& tables, int j,
                  const std::complex<double>* y, const double* u, double beta,
                  const std::complex<double>* q_hat, SliceScratch& sc,
                  std::complex<double>* out) {
    int nc = ws.n_modes(), cut = ws.cutoff(), n = ws.n_x();
    for (int k = 0; k < nc; ++k)
        sc.spec_a[k] = k < cut ? std::complex<double>(0.0, k) * y[k] : 0.0;
    ws.inverse(sc.spec_a, sc.real_a);
    const double* b = tables.base_row(j);
    const double* g = tables.gain_row(j);
    for (int i = 0; i < n; ++i)
        sc.real_b[i] = (b[i] + g[i] * u[i]) * sc.real_a[i];
    ws.forward(sc.real_b, sc.spec_a);
    for (int k = 0; k < nc; ++k) {
        std::complex<double> adv = k < cut ? sc.spec_a[k] : std::complex<double>(0.0);
        out[k] = adv - beta * static_cast<double>(k) * k * y[k];
        if (q_hat)
            out[k] -= q_hat[k];
    }
}

DensityField run_forward(const ProblemSpec& spec, const TensorGrid& grid,
                         std::span<const double> initial, const ControlField* plain,
                         const FeedbackRule* fb, ControlField* realized) {
    int n_x = grid.n_x(), n_eta = grid.n_eta(), n_t = grid.n_t();
    std::size_t slab = grid.slab_size();
    if (initial.size() != slab)
        throw ShapeMismatch("initial density slab size does not match the grid");
    if (plain) {
        if (plain->n_t() != n_t)
            throw ShapeMismatch("control time nodes do not match the grid");
        if (plain->kind() == ControlClass::Markovian && plain->n_x() != n_x)
            throw ShapeMismatch("control x nodes do not match the grid");
    } else if (!fb || !fb->build) {
        throw InvalidSpec("feedback rule has no builder");
    }
    double beta = spec.diffusion_coeff;
    double dt = grid.dt();
    check_stability(beta, n_x, dt);

    double m0 = slab_mass(grid, initial);
    if (std::abs(m0 - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "initial density mass must be 1, got " << m0;
        throw InvalidSpec(msg.str());
    }

    SpectralWorkspace ws(n_x);
    DriftCache tables(spec, grid);
    int nc = ws.n_modes();
    std::size_t total = static_cast<std::size_t>(n_eta) * nc;

    DensityField out(n_t, n_eta, n_x);
    std::copy(initial.begin(), initial.end(), out.slab(0).begin());

    std::vector<std::complex<double>> state(total), stage(total), k1(total), k2(total),
        k3(total), k4(total);
    SliceScratch sc(n_x, nc);
    std::vector<double> c1(n_x), c2(n_x), c3(n_x), c4(n_x), dens_scratch(slab);

    for (int j = 0; j < n_eta; ++j)
        ws.forward(initial.subspan(static_cast<std::size_t>(j) * n_x, n_x),
                   std::span(state).subspan(static_cast<std::size_t>(j) * nc, nc));

    double scale0 = 0.0;
    for (const auto& c : state)
        scale0 = std::max(scale0, std::abs(c.real()) + std::abs(c.imag()));
    double threshold = 1e12 * (1.0 + scale0);

    auto build_feedback = [&](double t, int node, std::span<const double> dens,
                              std::span<double> into) {
        std::span<const double> gsl;
        if (fb->adjoint)
            gsl = fb->adjoint->grad_slab(node);
        fb->build(t, node, dens, gsl, into);
    };
    auto record = [&](int node, const std::vector<double>& c) {
        if (!realized)
            return;
        if (realized->kind() == ControlClass::Markovian)
            for (int i = 0; i < n_x; ++i)
                realized->at(node, i) = c[i];
        else
            realized->at(node) = c[0];
    };
    auto stage_density = [&](const std::vector<std::complex<double>>& y) {
        for (int j = 0; j < n_eta; ++j)
            ws.inverse(std::span(y).subspan(static_cast<std::size_t>(j) * nc, nc),
                       std::span(dens_scratch).subspan(static_cast<std::size_t>(j) * n_x, n_x));
    };

    for (int k = 0; k + 1 < n_t; ++k) {
        double t0 = grid.t(k), tm = t0 + 0.5 * dt, t1 = t0 + dt;
        bool rebuild = fb && !fb->sample_and_hold;
        if (plain) {
            control_slab_at(*plain, grid, t0, c1);
            control_slab_at(*plain, grid, tm, c2);
            c3 = c2;
            control_slab_at(*plain, grid, t1, c4);
        } else {
            build_feedback(t0, k, out.slab(k), c1);
            if (!rebuild) {
                c2 = c1;
                c3 = c1;
                c4 = c1;
            }
        }
        record(k, c1);

        tables.refresh(t0);
        for (int j = 0; j < n_eta; ++j)
            forward_rhs(ws, tables, j, &state[j * nc], c1.data(), beta, sc, &k1[j * nc]);

        for (std::size_t m = 0; m < total; ++m)
            stage[m] = state[m] + 0.5 * dt * k1[m];
        if (rebuild) {
            stage_density(stage);
            build_feedback(tm, k, dens_scratch, c2);
        }
        tables.refresh(tm);
        for (int j = 0; j < n_eta; ++j)
            forward_rhs(ws, tables, j, &stage[j * nc], c2.data(), beta, sc, &k2[j * nc]);

        for (std::size_t m = 0; m < total; ++m)
            stage[m] = state[m] + 0.5 * dt * k2[m];
        if (rebuild) {
            stage_density(stage);
            build_feedback(tm, k, dens_scratch, c3);
        }
        for (int j = 0; j < n_eta; ++j)
            forward_rhs(ws, tables, j, &stage[j * nc], c3.data(), beta, sc, &k3[j * nc]);

        for (std::size_t m = 0; m < total; ++m)
            stage[m] = state[m] + dt * k3[m];
        if (rebuild) {
            stage_density(stage);
            build_feedback(t1, k, dens_scratch, c4);
        }
        tables.refresh(t1);
        for (int j = 0; j < n_eta; ++j)
            forward_rhs(ws, tables, j, &stage[j * nc], c4.data(), beta, sc, &k4[j * nc]);

        double w = dt / 6.0;
        for (std::size_t m = 0; m < total; ++m)
            state[m] += w * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);

        for (int j = 0; j < n_eta; ++j)
            ws.inverse(std::span(state).subspan(static_cast<std::size_t>(j) * nc, nc),
                       out.slab(k + 1).subspan(static_cast<std::size_t>(j) * n_x, n_x));

        if (!std::isfinite(state[std::min<std::size_t>(1, total - 1)].real()))
            throw UnstableStep("forward density solve produced non-finite values");
        if ((k % kScanInterval) == kScanInterval - 1)
            scan_state(state, threshold, "forward density");
    }

    if (fb && realized) {
        build_feedback(grid.horizon(), n_t - 1, out.slab(n_t - 1), c1);
        record(n_t - 1, c1);
    }

    scan_state(state, threshold, "forward density");
    double drift = out.max_mass_drift(grid);
    if (!(drift <= 1e-4)) {
        std::ostringstream msg;
        msg << "density mass drifted by " << drift << " during the forward solve";
        throw UnstableStep(msg.str());
    }
    return out;
}

} // namespace

std::vector<double> apply_generator(const ProblemSpec& spec, const TensorGrid& grid,
                                    SpectralWorkspace& ws, std::span<const double> phi,
                                    std::span<const double> control_slab, double t) {
    int n_x = grid.n_x(), n_eta = grid.n_eta();
    if (ws.n_x() != n_x)
        throw ShapeMismatch("workspace resolution does not match the grid");
    if (phi.size() != grid.slab_size() || static_cast<int>(control_slab.size()) != n_x)
        throw ShapeMismatch("generator input sizes do not match the grid");
    int nc = ws.n_modes(), cut = ws.cutoff();
    double beta = spec.diffusion_coeff;
    std::vector<double> out(grid.slab_size()), d(n_x), prod(n_x);
    std::vector<std::complex<double>> a(nc), b(nc);
    for (int j = 0; j < n_eta; ++j) {
        ws.forward(phi.subspan(static_cast<std::size_t>(j) * n_x, n_x), a);
        for (int k = 0; k < nc; ++k)
            b[k] = k < cut ? std::complex<double>(0.0, k) * a[k] : std::complex<double>(0.0);
        ws.inverse(b, d);
        for (int i = 0; i < n_x; ++i)
            prod[i] = spec.drift(t, grid.x(i), grid.eta(j), control_slab[i]) * d[i];
        ws.forward(prod, b);
        for (int k = 0; k < nc; ++k) {
            std::complex<double> adv = k < cut ? b[k] : std::complex<double>(0.0);
            b[k] = adv - beta * static_cast<double>(k) * k * a[k];
        }
        ws.inverse(b, std::span(out).subspan(static_cast<std::size_t>(j) * n_x, n_x));
    }
    return out;
}

std::vector<double> apply_adjoint_generator(const ProblemSpec& spec, const TensorGrid& grid,
                                            SpectralWorkspace& ws, std::span<const double> rho,
                                            std::span<const double> control_slab, double t) {
    int n_x = grid.n_x(), n_eta = grid.n_eta();
    if (ws.n_x() != n_x)
        throw ShapeMismatch("workspace resolution does not match the grid");
    if (rho.size() != grid.slab_size() || static_cast<int>(control_slab.size()) != n_x)
        throw ShapeMismatch("adjoint generator input sizes do not match the grid");
    int nc = ws.n_modes(), cut = ws.cutoff();
    double beta = spec.diffusion_coeff;
    std::vector<double> out(grid.slab_size()), pr(n_x), prod(n_x);
    std::vector<std::complex<double>> a(nc), b(nc);
    for (int j = 0; j < n_eta; ++j) {
        ws.forward(rho.subspan(static_cast<std::size_t>(j) * n_x, n_x), a);
        for (int k = 0; k < nc; ++k)
            b[k] = k < cut ? a[k] : std::complex<double>(0.0);
        ws.inverse(b, pr);
        for (int i = 0; i < n_x; ++i)
            prod[i] = spec.drift(t, grid.x(i), grid.eta(j), control_slab[i]) * pr[i];
        ws.forward(prod, b);
        for (int k = 0; k < nc; ++k) {
            std::complex<double> adv =
                k < cut ? std::complex<double>(0.0, k) * b[k] : std::complex<double>(0.0);
            b[k] = -adv - beta * static_cast<double>(k) * k * a[k];
        }
        ws.inverse(b, std::span(out).subspan(static_cast<std::size_t>(j) * n_x, n_x));
    }
    return out;
}

DensityField solve_forward(const ProblemSpec& spec, const TensorGrid& grid,
                           std::span<const double> initial_density,
                           const ControlField& control) {
    return run_forward(spec, grid, initial_density, &control, nullptr, nullptr);
}

FeedbackSolveResult solve_forward(const ProblemSpec& spec, const TensorGrid& grid,
                                  std::span<const double> initial_density,
                                  const FeedbackRule& feedback) {
    ControlField realized = feedback.kind == ControlClass::Markovian
                                ? ControlField::markovian(grid.n_t(), grid.n_x())
                                : ControlField::open_loop(grid.n_t());
    DensityField density = run_forward(spec, grid, initial_density, nullptr, &feedback,
                                       &realized);
    return {std::move(density), std::move(realized)};
}

AdjointField solve_backward(const ProblemSpec& spec, const TensorGrid& grid,
                            const ControlField& control, const SourceFn& source,
                            bool store_p) {
    int n_x = grid.n_x(), n_eta = grid.n_eta(), n_t = grid.n_t();
    if (control.n_t() != n_t)
        throw ShapeMismatch("control time nodes do not match the grid");
    if (control.kind() == ControlClass::Markovian && control.n_x() != n_x)
        throw ShapeMismatch("control x nodes do not match the grid");
    double beta = spec.diffusion_coeff;
    double dt = grid.dt();
    check_stability(beta, n_x, dt);

    SpectralWorkspace ws(n_x);
    DriftCache tables(spec, grid);
    int nc = ws.n_modes();
    std::size_t total = static_cast<std::size_t>(n_eta) * nc;

    std::vector<double> ell(n_x);
    for (int i = 0; i < n_x; ++i) {
        ell[i] = spec.terminal_cost(grid.x(i));
        if (!std::isfinite(ell[i]))
            throw InvalidSpec("terminal cost is non-finite on the grid");
    }

    AdjointField out(n_t, n_eta, n_x, store_p);

    std::vector<std::complex<double>> ell_hat(nc);
    ws.forward(ell, ell_hat);
    std::vector<std::complex<double>> state(total), stage(total), k1(total), k2(total),
        k3(total), k4(total), q_hat_a(nc), q_hat_b(nc), q_hat_c(nc);
    SliceScratch sc(n_x, nc);
    std::vector<double> ca(n_x), cb(n_x), cc(n_x), q_real(n_x), grad_row(n_x);

    for (int j = 0; j < n_eta; ++j)
        std::copy(ell_hat.begin(), ell_hat.end(), state.begin() + static_cast<std::size_t>(j) * nc);

    auto store_node = [&](int node) {
        for (int j = 0; j < n_eta; ++j) {
            auto y = std::span<const std::complex<double>>(state).subspan(
                static_cast<std::size_t>(j) * nc, nc);
            for (int k = 0; k < nc; ++k)
                sc.spec_b[k] = k < n_x / 2 ? std::complex<double>(0.0, k) * y[k]
                                           : std::complex<double>(0.0);
            ws.inverse(sc.spec_b, grad_row);
            std::copy(grad_row.begin(), grad_row.end(),
                      out.grad_slab(node).begin() + static_cast<std::size_t>(j) * n_x);
            if (out.has_values() && node != n_t - 1)
                ws.inverse(y, out.p_slab(node).subspan(static_cast<std::size_t>(j) * n_x, n_x));
        }
    };

    if (store_p)
        for (int j = 0; j < n_eta; ++j)
            std::copy(ell.begin(), ell.end(),
                      out.p_slab(n_t - 1).begin() + static_cast<std::size_t>(j) * n_x);
    store_node(n_t - 1);

    double scale0 = 0.0;
    for (const auto& c : ell_hat)
        scale0 = std::max(scale0, std::abs(c.real()) + std::abs(c.imag()));
    double threshold = 1e12 * (1.0 + scale0);

    auto fill_source = [&](double s, const std::vector<double>& u,
                           std::vector<std::complex<double>>& q_hat) {
        for (int i = 0; i < n_x; ++i)
            q_real[i] = source(s, grid.x(i), u[i]);
        ws.forward(q_real, q_hat);
    };

    for (int k = n_t - 1; k >= 1; --k) {
        double s_left = grid.t(k), s_mid = s_left - 0.5 * dt, s_right = grid.t(k - 1);
        control_slab_at(control, grid, s_left, ca);
        control_slab_at(control, grid, s_mid, cb);
        control_slab_at(control, grid, s_right, cc);
        const std::complex<double>*qa = nullptr, *qb = nullptr, *qc = nullptr;
        if (source) {
            fill_source(s_left, ca, q_hat_a);
            fill_source(s_mid, cb, q_hat_b);
            fill_source(s_right, cc, q_hat_c);
            qa = q_hat_a.data();
            qb = q_hat_b.data();
            qc = q_hat_c.data();
        }

        tables.refresh(s_left);
        for (int j = 0; j < n_eta; ++j)
            backward_rhs(ws, tables, j, &state[j * nc], ca.data(), beta, qa, sc, &k1[j * nc]);

        for (std::size_t m = 0; m < total; ++m)
            stage[m] = state[m] + 0.5 * dt * k1[m];
        tables.refresh(s_mid);
        for (int j = 0; j < n_eta; ++j)
            backward_rhs(ws, tables, j, &stage[j * nc], cb.data(), beta, qb, sc, &k2[j * nc]);

        for (std::size_t m = 0; m < total; ++m)
            stage[m] = state[m] + 0.5 * dt * k2[m];
        for (int j = 0; j < n_eta; ++j)
            backward_rhs(ws, tables, j, &stage[j * nc], cb.data(), beta, qb, sc, &k3[j * nc]);

        for (std::size_t m = 0; m < total; ++m)
            stage[m] = state[m] + dt * k3[m];
        tables.refresh(s_right);
        for (int j = 0; j < n_eta; ++j)
            backward_rhs(ws, tables, j, &stage[j * nc], cc.data(), beta, qc, sc, &k4[j * nc]);

        double w = dt / 6.0;
        for (std::size_t m = 0; m < total; ++m)
            state[m] += w * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);

        store_node(k - 1);

        if (!std::isfinite(state[std::min<std::size_t>(1, total - 1)].real()))
            throw UnstableStep("backward adjoint solve produced non-finite values");
        if ((k % kScanInterval) == 0)
            scan_state(state, threshold, "backward adjoint");
    }
    scan_state(state, threshold, "backward adjoint");
    return out;
}

AdjointField solve_backward_cost_to_go(const ProblemSpec& spec, const TensorGrid& grid,
                                       const ControlField& control, bool store_p) {
    if (!spec.has_running_cost() && spec.penalty.kind != PenaltyKind::MeasureWeighted)
        return solve_backward(spec, grid, control, {}, store_p);
    SourceFn q = [&spec](double t, double x, double u) {
        return -measure_stage_cost(spec, t, x, u);
    };
    return solve_backward(spec, grid, control, q, store_p);
}

} // namespace fpkd
