#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "fpkdescent/fields.hpp"
#include "fpkdescent/grid.hpp"
#include "fpkdescent/problem.hpp"

namespace fpkd {

struct SimulationConfig {
    long long n_paths = 10000;
    double dt_sim = 1e-2;
    std::uint64_t seed = 0;
    bool antithetic = false;
};

struct PathBatchStats {
    double mean = 0.0;
    double std_error = 0.0;
    long long n_effective = 0;
};

/// Streaming mean/variance with an associative merge for batch reduction.
class WelfordAccumulator {
  public:
    void add(double x);
    void merge(const WelfordAccumulator& other);
    long long count() const { return n_; }
    double mean() const { return mean_; }
    double sample_variance() const { return n_ > 1 ? m2_ / (n_ - 1) : 0.0; }
    PathBatchStats stats() const;

  private:
    long long n_ = 0;
    double mean_ = 0.0, m2_ = 0.0;
};

/// Deterministic generator: splitmix64-conditioned mt19937_64 with an
/// explicit Box-Muller normal (pair cached), so streams are reproducible
/// bit-for-bit for a given seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);
    double uniform();
    double normal();

  private:
    std::mt19937_64 gen_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

/// Stable sub-seed for an indexed batch or probe.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Path-level dynamics decoupled from ProblemSpec so line tests can run
/// with zero diffusion or without wrapping. stage, when set, is accumulated
/// by a left Riemann sum along the path.
struct PathProblem {
    std::function<double(double, double, double, double)> drift;
    double beta = 0.0;
    bool wrap = true;
    std::function<double(double)> terminal;
    std::function<double(double, double, double)> stage;
};

/// Control value lookup along a path: left-constant in t, linear in x on
/// the periodic grid for Markovian slabs. Optionally switches from a head
/// field to a tail field at a fixed time (head active on [0, s)).
class ControlLookup {
  public:
    static ControlLookup none();
    static ControlLookup fixed(const ControlField& control, const TensorGrid& grid);
    static ControlLookup switched(const ControlField& head, const ControlField& tail,
                                  double switch_time, const TensorGrid& grid);

    double value(double t, double x) const;

  private:
    ControlLookup() = default;
    const ControlField* head_ = nullptr;
    const ControlField* tail_ = nullptr;
    double switch_time_ = 0.0;
    const TensorGrid* grid_ = nullptr;
};

/// Draws (x, eta) starting points from a density slab: eta from the node
/// marginal, x uniform within the chosen node cell. Negative slab values
/// are clamped to zero.
class SlabSampler {
  public:
    SlabSampler(const TensorGrid& grid, std::span<const double> slab);
    void sample(Rng& rng, double& x, double& eta) const;

  private:
    const TensorGrid* grid_;
    std::vector<double> cdf_;
};

/// Euler-Maruyama estimate of E[terminal(X_T) + integral of stage] from a
/// deterministic start at (x0, eta0), integrating t_start -> horizon.
PathBatchStats simulate_terminal_cost(const PathProblem& problem, const ControlLookup& control,
                                      double x0, double eta0, double t_start, double horizon,
                                      const SimulationConfig& config);

/// Same estimate with the start drawn from a density slab.
PathBatchStats simulate_terminal_cost(const PathProblem& problem, const ControlLookup& control,
                                      const SlabSampler& initial, double t_start, double horizon,
                                      const SimulationConfig& config);

/// Full objective estimate for a problem spec: terminal plus running plus
/// measure-weighted penalty along paths; the density-free quadratic control
/// penalty is added deterministically on top.
PathBatchStats simulate_cost(const ProblemSpec& spec, const TensorGrid& grid,
                             const ControlField& control, const SlabSampler& initial,
                             const SimulationConfig& config);

struct ProbePoint {
    int ix = 0;
    int ieta = 0;
};

/// Independent check of the backward solve: per probe node, estimates the
/// expected cost-to-go from (x, eta) at t_start under the reference control.
std::vector<PathBatchStats> feynman_kac_probe(const ProblemSpec& spec, const TensorGrid& grid,
                                              const ControlField& control_ref,
                                              std::span<const ProbePoint> probes, double t_start,
                                              const SimulationConfig& config);

} // namespace fpkd
