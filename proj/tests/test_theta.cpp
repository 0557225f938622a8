#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fpkdescent/descent.hpp"
#include "fpkdescent/errors.hpp"
#include "fpkdescent/grid.hpp"
#include "fpkdescent/problem.hpp"
#include "fpkdescent/theta.hpp"

using namespace fpkd;

TEST_CASE("phase model formulas") {
    ThetaConfig cfg;
    ProblemSpec spec = build_theta_spec(cfg);

    CHECK(spec.terminal_cost(cfg.x_check) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(spec.terminal_cost(cfg.x_check + kPi) == doctest::Approx(2.0).epsilon(1e-15));
    for (int i = 0; i < 64; ++i) {
        double v = spec.terminal_cost(kTwoPi * i / 64.0);
        CHECK(v >= 0.0);
        CHECK(v <= 2.0);
    }

    CHECK(spec.drift(0.0, kPi, 0.7, -25.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(spec.drift(0.0, kPi, 0.7, 25.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(spec.drift(0.0, 0.0, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));

    CHECK(spec.diffusion_coeff == 0.5);
    CHECK(spec.penalty.kind == PenaltyKind::DirectL2);
    CHECK(spec.penalty.alpha == 1.0);
    CHECK(spec.control_class == ControlClass::Markovian);
    CHECK(spec.u_lo == -25.0);
    CHECK(spec.u_hi == 25.0);

    CHECK(cfg.horizon == 6.0);
    CHECK(cfg.beta == 0.5);
    CHECK(cfg.x_check == kPi);
}

TEST_CASE("phase model configuration validation") {
    ThetaConfig bad;
    bad.horizon = 0.0;
    CHECK_THROWS_AS(build_theta_spec(bad), InvalidSpec);

    ThetaConfig narrow;
    narrow.x_concentration = 0.0;
    CHECK_THROWS_AS(build_theta_spec(narrow), InvalidSpec);

    ThetaConfig flat;
    flat.eta_std = -0.5;
    CHECK_THROWS_AS(build_theta_spec(flat), InvalidSpec);
}

TEST_CASE("default grid matches the stability rule") {
    ThetaConfig cfg;
    TensorGrid grid = default_theta_grid(cfg);
    CHECK(grid.n_x() == 128);
    CHECK(grid.n_eta() == 16);
    CHECK(grid.n_t() == TensorGrid::time_nodes_for_stability(cfg.horizon, cfg.beta, 128));
    CHECK(grid.horizon() == cfg.horizon);
    CHECK(grid.dt() <= TensorGrid::max_stable_dt(cfg.beta, 128));
}

TEST_CASE("initial slab is a unit-mass product density") {
    ThetaConfig cfg;
    TensorGrid grid(64, 8, 4, cfg.horizon, cfg.eta_min, cfg.eta_max);
    auto slab = theta_initial_slab(cfg, grid);
    REQUIRE(slab.size() == static_cast<std::size_t>(grid.slab_size()));

    double mass = 0.0;
    for (int j = 0; j < grid.n_eta(); ++j)
        for (int i = 0; i < grid.n_x(); ++i)
            mass += slab[static_cast<std::size_t>(j) * grid.n_x() + i] * grid.eta_weight(j) *
                    grid.dx();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

    for (double v : slab) CHECK(v >= 0.0);

    int peak = 0;
    for (int i = 0; i < grid.n_x(); ++i)
        if (slab[i] > slab[peak]) peak = i;
    double peak_distance = std::abs(std::remainder(grid.x(peak) - cfg.x_mean, kTwoPi));
    CHECK(peak_distance <= grid.dx() + 1e-12);
}

TEST_CASE("circular mean of a density slab") {
    TensorGrid grid(64, 2, 2, 1.0, -2.0, 2.0);

    SUBCASE("concentrated slab points at its cell") {
        std::vector<double> slab(grid.slab_size(), 0.0);
        int target = 25;
        slab[target] = 1.0;
        CHECK(circular_mean_x(grid, slab) == doctest::Approx(grid.x(target)).epsilon(1e-12));
    }

    SUBCASE("symmetric pair around the check phase averages to it") {
        std::vector<double> slab(grid.slab_size(), 0.0);
        int lo = 28, hi = 36;
        slab[lo] = 1.0;
        slab[static_cast<std::size_t>(1) * grid.n_x() + hi] = 1.0;
        double mean = circular_mean_x(grid, slab);
        double mid = 0.5 * (grid.x(lo) + grid.x(hi));
        CHECK(mean == doctest::Approx(mid).epsilon(1e-12));
    }

    SUBCASE("wrap-around mass averages across zero") {
        std::vector<double> slab(grid.slab_size(), 0.0);
        slab[1] = 1.0;
        slab[grid.n_x() - 1] = 1.0;
        double mean = circular_mean_x(grid, slab);
        double expect = 0.5 * (grid.x(1) + grid.x(grid.n_x() - 1) - kTwoPi);
        if (expect < 0.0) expect += kTwoPi;
        CHECK(mean == doctest::Approx(expect).epsilon(1e-10));
    }

    SUBCASE("wrong slab size is rejected") {
        std::vector<double> slab(3, 1.0);
        CHECK_THROWS_AS(circular_mean_x(grid, slab), ShapeMismatch);
    }
}

TEST_CASE("benchmark run at the default resolution") {
    ThetaConfig cfg;
    TensorGrid grid = default_theta_grid(cfg);
    ThetaReport report = run_benchmark(cfg, grid, 0.05);

    const auto& hist = report.descent.history;
    REQUIRE(hist.size() >= 2);
    CHECK(report.descent.converged);
    CHECK(hist.size() <= 6);
    for (std::size_t k = 0; k + 1 < hist.size(); ++k)
        CHECK(hist[k + 1].cost.total <= hist[k].cost.total + 1e-9);
    CHECK(std::isnan(hist.back().residual));
    CHECK(report.descent.density.max_mass_drift(grid) < 1e-6);

    REQUIRE(report.snapshot_times.size() == 3);
    CHECK(report.snapshot_times[0] == 0.0);
    CHECK(std::abs(report.snapshot_times[1] - 0.5) <= 0.5 * grid.dt() + 1e-12);
    CHECK(report.snapshot_times[2] == doctest::Approx(cfg.horizon).epsilon(1e-12));
    REQUIRE(report.snapshots.size() == 3);
    for (const auto& snap : report.snapshots) {
        REQUIRE(snap.size() == static_cast<std::size_t>(grid.slab_size()));
        for (double v : snap) CHECK(v >= 0.0);
    }

    auto init = theta_initial_slab(cfg, grid);
    double worst = 0.0;
    for (std::size_t n = 0; n < init.size(); ++n)
        worst = std::max(worst, std::abs(report.snapshots[0][n] - std::max(init[n], 0.0)));
    CHECK(worst < 1e-12);

    double initial = hist.front().cost.total;
    double first_drop = (initial - hist[1].cost.total) / initial;
    double final_ratio = hist.back().cost.total / initial;
    double mean_distance =
        std::abs(std::remainder(circular_mean_x(grid, report.snapshots[2]) - cfg.x_check,
                                kTwoPi));
    std::ostringstream measured;
    measured << "records=" << hist.size() << " initial=" << initial
             << " first_drop=" << first_drop << " final_ratio=" << final_ratio
             << " terminal_mean_distance=" << mean_distance;
    MESSAGE(measured.str());
}

TEST_CASE("control energy of the converged run is non-increasing in the penalty weight") {
    std::vector<double> alphas = {0.5, 1.0, 2.0};
    std::vector<double> energies;
    for (double alpha : alphas) {
        ThetaConfig cfg;
        cfg.alpha = alpha;
        TensorGrid grid = default_theta_grid(cfg, 64, 8);
        ThetaReport report = run_benchmark(cfg, grid, 0.05);
        const auto& last = report.descent.history.back();
        energies.push_back(2.0 * last.cost.penalty_part / alpha);
    }
    CHECK(energies[1] <= energies[0] + 1e-12);
    CHECK(energies[2] <= energies[1] + 1e-12);
}
