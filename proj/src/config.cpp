#include "fpkdescent/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "fpkdescent/errors.hpp"
#include "fpkdescent/io.hpp"

namespace fpkd {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line, const std::string& key) {
    double out = 0.0;
    const char* b = v.data();
    const char* e = b + v.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || ptr != e)
        throw ConfigError(key + ": not a number: '" + v + "'", line);
    return out;
}

long long parse_int(const std::string& v, int line, const std::string& key) {
    long long out = 0;
    const char* b = v.data();
    const char* e = b + v.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || ptr != e)
        throw ConfigError(key + ": not an integer: '" + v + "'", line);
    return out;
}

std::uint64_t parse_u64(const std::string& v, int line, const std::string& key) {
    std::uint64_t out = 0;
    const char* b = v.data();
    const char* e = b + v.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || ptr != e)
        throw ConfigError(key + ": not an unsigned integer: '" + v + "'", line);
    return out;
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'", line);
}

std::vector<double> parse_list(const std::string& v, int line, const std::string& key) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    std::size_t start = 0;
    while (start <= v.size()) {
        std::size_t comma = v.find(',', start);
        std::string item = trim(comma == std::string::npos ? v.substr(start)
                                                           : v.substr(start, comma - start));
        if (item.empty()) throw ConfigError(key + ": empty list entry", line);
        out.push_back(parse_double(item, line, key));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void require_positive(double v, int line, const std::string& key) {
    if (!(v > 0.0)) throw ConfigError(key + " must be positive", line);
}

std::string join_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt_double(v[i]);
    }
    return out;
}

} // namespace

double TrigPoly::eval(double x) const {
    double v = c0;
    for (std::size_t m = 0; m < cos_coeffs.size(); ++m)
        v += cos_coeffs[m] * std::cos(static_cast<double>(m + 1) * x);
    for (std::size_t m = 0; m < sin_coeffs.size(); ++m)
        v += sin_coeffs[m] * std::sin(static_cast<double>(m + 1) * x);
    return v;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream stream(text);
    std::string raw;
    std::string section;
    std::set<std::pair<std::string, std::string>> seen;
    int line = 0;

    while (std::getline(stream, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;

        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("unterminated section header", line);
            section = trim(s.substr(1, s.size() - 2));
            if (section != "problem" && section != "grid" && section != "algorithm" &&
                section != "simulation" && section != "output")
                throw ConfigError("unknown section [" + section + "]", line);
            continue;
        }

        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value", line);
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", line);
        if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line);
        if (!seen.insert({section, key}).second)
            throw ConfigError("duplicate key '" + key + "' in [" + section + "]", line);

        auto& p = cfg.problem;
        if (section == "problem") {
            if (key == "model") {
                std::string m = value;
                for (char& c : m)
                    if (c == '-') c = '_';
                if (m != "theta" && m != "custom_affine")
                    throw ConfigError("model must be theta or custom_affine", line);
                p.model = m;
            } else if (key == "horizon") {
                p.horizon = parse_double(value, line, key);
                require_positive(p.horizon, line, key);
            } else if (key == "beta") {
                p.beta = parse_double(value, line, key);
                require_positive(p.beta, line, key);
            } else if (key == "alpha") {
                p.alpha = parse_double(value, line, key);
                require_positive(p.alpha, line, key);
            } else if (key == "u_lo") {
                p.u_lo = parse_double(value, line, key);
            } else if (key == "u_hi") {
                p.u_hi = parse_double(value, line, key);
            } else if (key == "penalty") {
                if (value != "none" && value != "measure_weighted" && value != "direct_l2")
                    throw ConfigError("penalty must be none, measure_weighted or direct_l2",
                                      line);
                p.penalty = value;
            } else if (key == "x_check") {
                p.x_check = parse_double(value, line, key);
            } else if (key == "x_mean") {
                p.x_mean = parse_double(value, line, key);
            } else if (key == "x_concentration") {
                p.x_concentration = parse_double(value, line, key);
                require_positive(p.x_concentration, line, key);
            } else if (key == "eta_mean") {
                p.eta_mean = parse_double(value, line, key);
            } else if (key == "eta_std") {
                p.eta_std = parse_double(value, line, key);
                require_positive(p.eta_std, line, key);
            } else if (key == "eta_min") {
                p.eta_min = parse_double(value, line, key);
            } else if (key == "eta_max") {
                p.eta_max = parse_double(value, line, key);
            } else if (key == "base_const") {
                p.base.c0 = parse_double(value, line, key);
            } else if (key == "base_cos") {
                p.base.cos_coeffs = parse_list(value, line, key);
            } else if (key == "base_sin") {
                p.base.sin_coeffs = parse_list(value, line, key);
            } else if (key == "eta_gain_const") {
                p.eta_gain.c0 = parse_double(value, line, key);
            } else if (key == "eta_gain_cos") {
                p.eta_gain.cos_coeffs = parse_list(value, line, key);
            } else if (key == "eta_gain_sin") {
                p.eta_gain.sin_coeffs = parse_list(value, line, key);
            } else if (key == "gain_const") {
                p.gain.c0 = parse_double(value, line, key);
            } else if (key == "gain_cos") {
                p.gain.cos_coeffs = parse_list(value, line, key);
            } else if (key == "gain_sin") {
                p.gain.sin_coeffs = parse_list(value, line, key);
            } else if (key == "terminal_const") {
                p.terminal.c0 = parse_double(value, line, key);
            } else if (key == "terminal_cos") {
                p.terminal.cos_coeffs = parse_list(value, line, key);
            } else if (key == "terminal_sin") {
                p.terminal.sin_coeffs = parse_list(value, line, key);
            } else {
                throw ConfigError("unknown key '" + key + "' in [problem]", line);
            }
        } else if (section == "grid") {
            if (key == "n_x") {
                cfg.grid.n_x = static_cast<int>(parse_int(value, line, key));
                if (cfg.grid.n_x < 8 || (cfg.grid.n_x & (cfg.grid.n_x - 1)) != 0)
                    throw ConfigError("n_x must be a power of two >= 8", line);
            } else if (key == "n_eta") {
                cfg.grid.n_eta = static_cast<int>(parse_int(value, line, key));
                if (cfg.grid.n_eta < 1) throw ConfigError("n_eta must be at least 1", line);
            } else if (key == "n_t") {
                cfg.grid.n_t = static_cast<int>(parse_int(value, line, key));
                if (cfg.grid.n_t != 0 && cfg.grid.n_t < 2)
                    throw ConfigError("n_t must be 0 (auto) or at least 2", line);
            } else {
                throw ConfigError("unknown key '" + key + "' in [grid]", line);
            }
        } else if (section == "algorithm") {
            if (key == "class") {
                if (value != "markovian" && value != "openloop")
                    throw ConfigError("class must be markovian or openloop", line);
                cfg.algorithm.control_class = value;
            } else if (key == "epsilon") {
                cfg.algorithm.epsilon = parse_double(value, line, key);
                require_positive(cfg.algorithm.epsilon, line, key);
            } else if (key == "max_iters") {
                cfg.algorithm.max_iters = static_cast<int>(parse_int(value, line, key));
                if (cfg.algorithm.max_iters < 1)
                    throw ConfigError("max_iters must be at least 1", line);
            } else {
                throw ConfigError("unknown key '" + key + "' in [algorithm]", line);
            }
        } else if (section == "simulation") {
            if (key == "n_paths") {
                cfg.simulation.n_paths = parse_int(value, line, key);
                if (cfg.simulation.n_paths < 2)
                    throw ConfigError("n_paths must be at least 2", line);
            } else if (key == "dt_sim") {
                cfg.simulation.dt_sim = parse_double(value, line, key);
                require_positive(cfg.simulation.dt_sim, line, key);
            } else if (key == "seed") {
                cfg.simulation.seed = parse_u64(value, line, key);
            } else if (key == "antithetic") {
                cfg.simulation.antithetic = parse_bool(value, line, key);
            } else {
                throw ConfigError("unknown key '" + key + "' in [simulation]", line);
            }
        } else {
            if (key == "directory") {
                if (value.empty()) throw ConfigError("directory must not be empty", line);
                cfg.output.directory = value;
            } else if (key == "snapshot_times") {
                cfg.output.snapshot_times = parse_list(value, line, key);
            } else {
                throw ConfigError("unknown key '" + key + "' in [output]", line);
            }
        }
    }

    if (cfg.problem.u_lo > cfg.problem.u_hi) throw ConfigError("u_lo must not exceed u_hi");
    if (cfg.problem.eta_min > cfg.problem.eta_max)
        throw ConfigError("eta_min must not exceed eta_max");
    if (cfg.grid.n_eta > 1 && cfg.problem.eta_min == cfg.problem.eta_max)
        throw ConfigError("eta_min must differ from eta_max when n_eta > 1");
    for (double t : cfg.output.snapshot_times)
        if (t < 0.0 || t > cfg.problem.horizon * (1.0 + 1e-12))
            throw ConfigError("snapshot_times must lie in [0, horizon]");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
    const auto& p = cfg.problem;
    std::ostringstream out;
    out << "[problem]\n";
    out << "model = " << p.model << '\n';
    out << "horizon = " << fmt_double(p.horizon) << '\n';
    out << "beta = " << fmt_double(p.beta) << '\n';
    out << "alpha = " << fmt_double(p.alpha) << '\n';
    out << "u_lo = " << fmt_double(p.u_lo) << '\n';
    out << "u_hi = " << fmt_double(p.u_hi) << '\n';
    out << "penalty = " << p.penalty << '\n';
    out << "x_check = " << fmt_double(p.x_check) << '\n';
    out << "x_mean = " << fmt_double(p.x_mean) << '\n';
    out << "x_concentration = " << fmt_double(p.x_concentration) << '\n';
    out << "eta_mean = " << fmt_double(p.eta_mean) << '\n';
    out << "eta_std = " << fmt_double(p.eta_std) << '\n';
    out << "eta_min = " << fmt_double(p.eta_min) << '\n';
    out << "eta_max = " << fmt_double(p.eta_max) << '\n';
    out << "base_const = " << fmt_double(p.base.c0) << '\n';
    out << "base_cos = " << join_list(p.base.cos_coeffs) << '\n';
    out << "base_sin = " << join_list(p.base.sin_coeffs) << '\n';
    out << "eta_gain_const = " << fmt_double(p.eta_gain.c0) << '\n';
    out << "eta_gain_cos = " << join_list(p.eta_gain.cos_coeffs) << '\n';
    out << "eta_gain_sin = " << join_list(p.eta_gain.sin_coeffs) << '\n';
    out << "gain_const = " << fmt_double(p.gain.c0) << '\n';
    out << "gain_cos = " << join_list(p.gain.cos_coeffs) << '\n';
    out << "gain_sin = " << join_list(p.gain.sin_coeffs) << '\n';
    out << "terminal_const = " << fmt_double(p.terminal.c0) << '\n';
    out << "terminal_cos = " << join_list(p.terminal.cos_coeffs) << '\n';
    out << "terminal_sin = " << join_list(p.terminal.sin_coeffs) << '\n';
    out << "\n[grid]\n";
    out << "n_x = " << cfg.grid.n_x << '\n';
    out << "n_eta = " << cfg.grid.n_eta << '\n';
    out << "n_t = " << cfg.grid.n_t << '\n';
    out << "\n[algorithm]\n";
    out << "class = " << cfg.algorithm.control_class << '\n';
    out << "epsilon = " << fmt_double(cfg.algorithm.epsilon) << '\n';
    out << "max_iters = " << cfg.algorithm.max_iters << '\n';
    out << "\n[simulation]\n";
    out << "n_paths = " << cfg.simulation.n_paths << '\n';
    out << "dt_sim = " << fmt_double(cfg.simulation.dt_sim) << '\n';
    out << "seed = " << cfg.simulation.seed << '\n';
    out << "antithetic = " << (cfg.simulation.antithetic ? "true" : "false") << '\n';
    out << "\n[output]\n";
    out << "directory = " << cfg.output.directory << '\n';
    out << "snapshot_times = " << join_list(cfg.output.snapshot_times) << '\n';
    return out.str();
}

ThetaConfig theta_config_from(const ProblemConfig& p) {
    ThetaConfig tc;
    tc.horizon = p.horizon;
    tc.alpha = p.alpha;
    tc.beta = p.beta;
    tc.x_check = p.x_check;
    tc.u_lo = p.u_lo;
    tc.u_hi = p.u_hi;
    tc.x_mean = p.x_mean;
    tc.x_concentration = p.x_concentration;
    tc.eta_mean = p.eta_mean;
    tc.eta_std = p.eta_std;
    tc.eta_min = p.eta_min;
    tc.eta_max = p.eta_max;
    return tc;
}

ProblemSpec build_problem_spec(const RunConfig& cfg) {
    const auto& p = cfg.problem;
    ProblemSpec spec;
    if (p.model == "theta") {
        spec = build_theta_spec(theta_config_from(p));
    } else {
        const TrigPoly base = p.base, eta_gain = p.eta_gain, gain = p.gain;
        spec.drift = [base, eta_gain, gain](double, double x, double eta, double u) {
            return base.eval(x) + eta_gain.eval(x) * eta + gain.eval(x) * u;
        };
        const TrigPoly term = p.terminal;
        spec.terminal_cost = [term](double x) { return term.eval(x); };
        spec.diffusion_coeff = p.beta;
        spec.u_lo = p.u_lo;
        spec.u_hi = p.u_hi;
    }
    if (p.penalty == "none")
        spec.penalty = Penalty::none();
    else if (p.penalty == "measure_weighted")
        spec.penalty = Penalty::measure_weighted(p.alpha);
    else
        spec.penalty = Penalty::direct_l2(p.alpha);
    spec.control_class = cfg.algorithm.control_class == "markovian" ? ControlClass::Markovian
                                                                    : ControlClass::OpenLoop;
    return spec;
}

TensorGrid build_grid(const RunConfig& cfg) {
    const int n_t = cfg.grid.n_t > 0
                        ? cfg.grid.n_t
                        : TensorGrid::time_nodes_for_stability(cfg.problem.horizon,
                                                               cfg.problem.beta, cfg.grid.n_x);
    return TensorGrid(cfg.grid.n_x, cfg.grid.n_eta, n_t, cfg.problem.horizon,
                      cfg.problem.eta_min, cfg.problem.eta_max);
}

std::vector<double> build_initial_density(const RunConfig& cfg, const TensorGrid& grid) {
    return theta_initial_slab(theta_config_from(cfg.problem), grid);
}

} // namespace fpkd
