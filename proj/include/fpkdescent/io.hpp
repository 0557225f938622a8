#pragma once

#include <span>
#include <string>
#include <vector>

#include "fpkdescent/descent.hpp"
#include "fpkdescent/fields.hpp"
#include "fpkdescent/grid.hpp"

namespace fpkd {

/// Shortest decimal form that round-trips to the same double, dot decimal
/// separator; "inf"/"nan" for non-finite values.
std::string fmt_double(double v);

/// k,total,terminal,running,penalty,residual,wall_time
void write_cost_history_csv(const std::string& path, const std::vector<IterationRecord>& history);

/// Markovian: t,x,u rows; open-loop: t,u rows.
void write_control_csv(const std::string& path, const TensorGrid& grid,
                       const ControlField& control);

/// x,eta,rho rows, eta-major; values clamped nonnegative at export.
void write_density_csv(const std::string& path, const TensorGrid& grid,
                       std::span<const double> slab);

/// Flat binary: magic "FPKD0001", uint32 n_x, uint32 n_eta, then
/// n_eta * n_x little-endian float64 in (eta, x) row-major order, clamped
/// nonnegative.
void write_density_bin(const std::string& path, const TensorGrid& grid,
                       std::span<const double> slab);

struct VerifyRow {
    std::string check;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// check,error,tolerance,pass
void write_verify_report_csv(const std::string& path, const std::vector<VerifyRow>& rows);

struct McRow {
    std::string functional;
    double estimate = 0.0;
    double std_error = 0.0;
    long long n_effective = 0;
};

/// functional,estimate,std_error,n_effective
void write_mc_report_csv(const std::string& path, const std::vector<McRow>& rows);

/// s,mean,std_error
void write_needle_csv(const std::string& path, const std::vector<NeedleCurveSample>& samples);

} // namespace fpkd
