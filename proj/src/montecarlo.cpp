#include "fpkdescent/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "fpkdescent/errors.hpp"

namespace fpkd {

void WelfordAccumulator::add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / n_;
    m2_ += d * (x - mean_);
}

void WelfordAccumulator::merge(const WelfordAccumulator& other) {
    if (other.n_ == 0)
        return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    long long n = n_ + other.n_;
    double d = other.mean_ - mean_;
    mean_ += d * other.n_ / n;
    m2_ += other.m2_ + d * d * (static_cast<double>(n_) * other.n_ / n);
    n_ = n;
}

PathBatchStats WelfordAccumulator::stats() const {
    double se = n_ > 1 ? std::sqrt(sample_variance() / n_) : 0.0;
    return {mean_, se, n_};
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master ^ (0xD2B74407B1CE6E93ull * (index + 1));
    return splitmix64(state);
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t state = seed;
    std::seed_seq seq{static_cast<unsigned>(splitmix64(state) >> 32),
                      static_cast<unsigned>(splitmix64(state)),
                      static_cast<unsigned>(splitmix64(state) >> 32),
                      static_cast<unsigned>(splitmix64(state))};
    gen_.seed(seq);
}

double Rng::uniform() {
    return (gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 1e-300);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = kTwoPi * u2;
    cached_ = r * std::sin(th);
    has_cached_ = true;
    return r * std::cos(th);
}

ControlLookup ControlLookup::none() {
    return ControlLookup();
}

ControlLookup ControlLookup::fixed(const ControlField& control, const TensorGrid& grid) {
    ControlLookup lk;
    lk.tail_ = &control;
    lk.grid_ = &grid;
    return lk;
}

ControlLookup ControlLookup::switched(const ControlField& head, const ControlField& tail,
                                      double switch_time, const TensorGrid& grid) {
    ControlLookup lk;
    lk.head_ = &head;
    lk.tail_ = &tail;
    lk.switch_time_ = switch_time;
    lk.grid_ = &grid;
    return lk;
}

double ControlLookup::value(double t, double x) const {
    const ControlField* field = (head_ && t < switch_time_) ? head_ : tail_;
    if (!field)
        return 0.0;
    int k = std::clamp(static_cast<int>(std::floor(t / grid_->dt())), 0, grid_->n_t() - 1);
    if (field->kind() == ControlClass::OpenLoop)
        return field->value(k, 0);
    double xi = wrap_angle(x) / grid_->dx();
    int i0 = static_cast<int>(std::floor(xi)) % grid_->n_x();
    double theta = xi - std::floor(xi);
    int i1 = (i0 + 1) % grid_->n_x();
    return (1.0 - theta) * field->at(k, i0) + theta * field->at(k, i1);
}

SlabSampler::SlabSampler(const TensorGrid& grid, std::span<const double> slab) : grid_(&grid) {
    if (slab.size() != grid.slab_size())
        throw ShapeMismatch("sampler slab size does not match the grid");
    cdf_.resize(slab.size());
    double acc = 0.0;
    for (int j = 0; j < grid.n_eta(); ++j) {
        double w = grid.eta_weight(j);
        for (int i = 0; i < grid.n_x(); ++i) {
            double v = slab[static_cast<std::size_t>(j) * grid.n_x() + i];
            acc += std::max(v, 0.0) * w;
            cdf_[static_cast<std::size_t>(j) * grid.n_x() + i] = acc;
        }
    }
    if (!(acc > 0.0) || !std::isfinite(acc))
        throw InvalidSpec("sampler slab has no positive mass");
    for (double& c : cdf_)
        c /= acc;
}

void SlabSampler::sample(Rng& rng, double& x, double& eta) const {
    double u = rng.uniform();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t idx = std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    int j = static_cast<int>(idx / grid_->n_x());
    int i = static_cast<int>(idx % grid_->n_x());
    eta = grid_->eta(j);
    x = wrap_angle(grid_->x(i) + (rng.uniform() - 0.5) * grid_->dx());
}

namespace {

constexpr long long kBatchSize = 4096;

struct StartDraw {
    const SlabSampler* sampler = nullptr;
    double x0 = 0.0, eta0 = 0.0;

    void draw(Rng& rng, double& x, double& eta) const {
        if (sampler)
            sampler->sample(rng, x, eta);
        else {
            x = x0;
            eta = eta0;
        }
    }
};

PathBatchStats run_paths(const PathProblem& problem, const ControlLookup& control,
                         const StartDraw& start, double t_start, double horizon,
                         const SimulationConfig& config) {
    if (config.n_paths < 2)
        throw InvalidSpec("simulation needs at least two paths");
    double span = horizon - t_start;
    if (!(config.dt_sim > 0.0) || span <= 0.0)
        throw InvalidSpec("simulation needs a positive step and horizon");
    double steps_real = span / config.dt_sim;
    long long n_steps = std::llround(steps_real);
    if (n_steps < 1 || std::abs(steps_real - n_steps) > 1e-12 * std::max(1.0, steps_real))
        throw InvalidSpec("simulation step must divide the horizon");
    if (!problem.drift || !problem.terminal)
        throw InvalidSpec("path problem needs drift and terminal functions");

    double dt = config.dt_sim;
    double sqrt_dt = std::sqrt(dt);
    double sigma = std::sqrt(2.0 * problem.beta);
    bool noisy = problem.beta > 0.0;

    std::vector<double> noise;
    if (config.antithetic && noisy)
        noise.resize(n_steps);

    auto one_path = [&](Rng& rng, double x0, double eta, const double* replay, double sign) {
        double x = x0;
        double acc = 0.0;
        double t = t_start;
        for (long long m = 0; m < n_steps; ++m) {
            double u = control.value(t, x);
            if (problem.stage)
                acc += problem.stage(t, x, u) * dt;
            double z = 0.0;
            if (noisy)
                z = replay ? sign * replay[m] : rng.normal();
            x += problem.drift(t, x, eta, u) * dt + sigma * sqrt_dt * z;
            if (problem.wrap)
                x = wrap_angle(x);
            if (!std::isfinite(x))
                throw NonFinitePath("simulated state became non-finite");
            t = t_start + (m + 1) * dt;
        }
        return problem.terminal(x) + acc;
    };

    WelfordAccumulator total;
    long long units = config.n_paths;
    long long done = 0;
    std::uint64_t batch_index = 0;
    while (done < units) {
        long long batch = std::min(kBatchSize, units - done);
        Rng rng(derive_seed(config.seed, batch_index));
        WelfordAccumulator acc;
        for (long long p = 0; p < batch; ++p) {
            double x0, eta;
            start.draw(rng, x0, eta);
            if (config.antithetic && noisy) {
                for (long long m = 0; m < n_steps; ++m)
                    noise[m] = rng.normal();
                double a = one_path(rng, x0, eta, noise.data(), 1.0);
                double b = one_path(rng, x0, eta, noise.data(), -1.0);
                acc.add(0.5 * (a + b));
            } else {
                acc.add(one_path(rng, x0, eta, nullptr, 1.0));
            }
        }
        total.merge(acc);
        done += batch;
        ++batch_index;
    }
    return total.stats();
}

} // namespace

PathBatchStats simulate_terminal_cost(const PathProblem& problem, const ControlLookup& control,
                                      double x0, double eta0, double t_start, double horizon,
                                      const SimulationConfig& config) {
    StartDraw start;
    start.x0 = x0;
    start.eta0 = eta0;
    return run_paths(problem, control, start, t_start, horizon, config);
}

PathBatchStats simulate_terminal_cost(const PathProblem& problem, const ControlLookup& control,
                                      const SlabSampler& initial, double t_start, double horizon,
                                      const SimulationConfig& config) {
    StartDraw start;
    start.sampler = &initial;
    return run_paths(problem, control, start, t_start, horizon, config);
}

PathBatchStats simulate_cost(const ProblemSpec& spec, const TensorGrid& grid,
                             const ControlField& control, const SlabSampler& initial,
                             const SimulationConfig& config) {
    PathProblem prob;
    prob.drift = spec.drift;
    prob.beta = spec.diffusion_coeff;
    prob.wrap = true;
    prob.terminal = spec.terminal_cost;
    if (spec.has_running_cost() || spec.penalty.kind == PenaltyKind::MeasureWeighted)
        prob.stage = [&spec](double t, double x, double u) {
            return measure_stage_cost(spec, t, x, u);
        };
    StartDraw start;
    start.sampler = &initial;
    PathBatchStats stats =
        run_paths(prob, ControlLookup::fixed(control, grid), start, 0.0, grid.horizon(), config);
    stats.mean += control_energy_penalty(spec, grid, control);
    return stats;
}

std::vector<PathBatchStats> feynman_kac_probe(const ProblemSpec& spec, const TensorGrid& grid,
                                              const ControlField& control_ref,
                                              std::span<const ProbePoint> probes, double t_start,
                                              const SimulationConfig& config) {
    PathProblem prob;
    prob.drift = spec.drift;
    prob.beta = spec.diffusion_coeff;
    prob.wrap = true;
    prob.terminal = spec.terminal_cost;
    if (spec.has_running_cost() || spec.penalty.kind == PenaltyKind::MeasureWeighted)
        prob.stage = [&spec](double t, double x, double u) {
            return measure_stage_cost(spec, t, x, u);
        };
    ControlLookup lookup = ControlLookup::fixed(control_ref, grid);
    std::vector<PathBatchStats> out;
    out.reserve(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        SimulationConfig sub = config;
        sub.seed = derive_seed(config.seed, 0x50B5E000ull + p);
        out.push_back(simulate_terminal_cost(prob, lookup, grid.x(probes[p].ix),
                                             grid.eta(probes[p].ieta), t_start, grid.horizon(),
                                             sub));
    }
    return out;
}

} // namespace fpkd
