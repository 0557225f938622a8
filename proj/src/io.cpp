#include "fpkdescent/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "fpkdescent/errors.hpp"

namespace fpkd {

namespace {

std::ofstream open_out(const std::string& path, std::ios_base::openmode mode = std::ios_base::out) {
    std::ofstream out(path, mode);
    if (!out) throw ConfigError("cannot write " + path);
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw ConfigError("write failed for " + path);
}

} // namespace

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    for (char& c : buf) {
        if (c == ',') c = '.';
    }
    return buf;
}

void write_cost_history_csv(const std::string& path, const std::vector<IterationRecord>& history) {
    auto out = open_out(path);
    out << "k,total,terminal,running,penalty,residual,wall_time\n";
    for (const auto& rec : history) {
        out << rec.index << ',' << fmt_double(rec.cost.total) << ','
            << fmt_double(rec.cost.terminal_part) << ',' << fmt_double(rec.cost.running_part)
            << ',' << fmt_double(rec.cost.penalty_part) << ',' << fmt_double(rec.residual) << ','
            << fmt_double(rec.wall_time) << '\n';
    }
    finish(out, path);
}

void write_control_csv(const std::string& path, const TensorGrid& grid,
                       const ControlField& control) {
    if (control.n_t() != grid.n_t()) throw ShapeMismatch("control does not match grid");
    auto out = open_out(path);
    if (control.kind() == ControlClass::Markovian) {
        if (control.n_x() != grid.n_x()) throw ShapeMismatch("control does not match grid");
        out << "t,x,u\n";
        for (int k = 0; k < grid.n_t(); ++k)
            for (int i = 0; i < grid.n_x(); ++i)
                out << fmt_double(grid.t(k)) << ',' << fmt_double(grid.x(i)) << ','
                    << fmt_double(control.at(k, i)) << '\n';
    } else {
        out << "t,u\n";
        for (int k = 0; k < grid.n_t(); ++k)
            out << fmt_double(grid.t(k)) << ',' << fmt_double(control.at(k)) << '\n';
    }
    finish(out, path);
}

void write_density_csv(const std::string& path, const TensorGrid& grid,
                       std::span<const double> slab) {
    if (slab.size() != grid.slab_size()) throw ShapeMismatch("density slab does not match grid");
    auto out = open_out(path);
    out << "x,eta,rho\n";
    for (int j = 0; j < grid.n_eta(); ++j)
        for (int i = 0; i < grid.n_x(); ++i) {
            const double rho = std::max(0.0, slab[static_cast<std::size_t>(j) * grid.n_x() + i]);
            out << fmt_double(grid.x(i)) << ',' << fmt_double(grid.eta(j)) << ','
                << fmt_double(rho) << '\n';
        }
    finish(out, path);
}

void write_density_bin(const std::string& path, const TensorGrid& grid,
                       std::span<const double> slab) {
    static_assert(std::endian::native == std::endian::little,
                  "density binary format is little-endian");
    if (slab.size() != grid.slab_size()) throw ShapeMismatch("density slab does not match grid");
    auto out = open_out(path, std::ios_base::out | std::ios_base::binary);
    const char magic[8] = {'F', 'P', 'K', 'D', '0', '0', '0', '1'};
    out.write(magic, 8);
    const std::uint32_t nx = static_cast<std::uint32_t>(grid.n_x());
    const std::uint32_t ne = static_cast<std::uint32_t>(grid.n_eta());
    out.write(reinterpret_cast<const char*>(&nx), 4);
    out.write(reinterpret_cast<const char*>(&ne), 4);
    for (double v : slab) {
        const double c = std::max(0.0, v);
        out.write(reinterpret_cast<const char*>(&c), 8);
    }
    finish(out, path);
}

void write_verify_report_csv(const std::string& path, const std::vector<VerifyRow>& rows) {
    auto out = open_out(path);
    out << "check,error,tolerance,pass\n";
    for (const auto& r : rows)
        out << r.check << ',' << fmt_double(r.error) << ',' << fmt_double(r.tolerance) << ','
            << (r.pass ? 1 : 0) << '\n';
    finish(out, path);
}

void write_mc_report_csv(const std::string& path, const std::vector<McRow>& rows) {
    auto out = open_out(path);
    out << "functional,estimate,std_error,n_effective\n";
    for (const auto& r : rows)
        out << r.functional << ',' << fmt_double(r.estimate) << ',' << fmt_double(r.std_error)
            << ',' << r.n_effective << '\n';
    finish(out, path);
}

void write_needle_csv(const std::string& path, const std::vector<NeedleCurveSample>& samples) {
    auto out = open_out(path);
    out << "s,mean,std_error\n";
    for (const auto& s : samples)
        out << fmt_double(s.s) << ',' << fmt_double(s.expected_terminal_cost) << ','
            << fmt_double(s.std_error) << '\n';
    finish(out, path);
}

} // namespace fpkd
