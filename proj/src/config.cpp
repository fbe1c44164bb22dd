#include "linksaddle/config.hpp"

#include "linksaddle/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace linksaddle {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw Error(ErrorKind::Config, "config key '" + key + "': " + why);
}

double to_double(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d)) {
        bad(key, "expected a finite number, got '" + v + "'");
    }
    return d;
}

long long to_int(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const long long i = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
        bad(key, "expected an integer, got '" + v + "'");
    }
    return i;
}

std::size_t to_count(const std::string& key, const std::string& v) {
    const long long i = to_int(key, v);
    if (i < 0) bad(key, "must be >= 0");
    return static_cast<std::size_t>(i);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    if (v.empty() || v[0] == '-') bad(key, "expected an unsigned integer, got '" + v + "'");
    const unsigned long long i = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || errno == ERANGE) {
        bad(key, "expected an unsigned integer, got '" + v + "'");
    }
    return static_cast<std::uint64_t>(i);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(key, "expected true or false, got '" + v + "'");
}

std::optional<double> to_auto(const std::string& key, const std::string& v) {
    if (v == "auto") return std::nullopt;
    return to_double(key, v);
}

std::string num(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    const std::string& v = value;
    if (key == "domain.dimension") {
        const long long d = to_int(key, v);
        if (d != 1 && d != 2) bad(key, "must be 1 or 2");
        c.domain.dimension = static_cast<int>(d);
    } else if (key == "domain.lx") {
        c.domain.lx = to_double(key, v);
    } else if (key == "domain.ly") {
        c.domain.ly = to_double(key, v);
    } else if (key == "domain.nx") {
        c.domain.nx = static_cast<int>(to_int(key, v));
    } else if (key == "domain.ny") {
        c.domain.ny = static_cast<int>(to_int(key, v));
    } else if (key == "problem.lambda") {
        c.lambda = to_double(key, v);
    } else if (key == "problem.delta") {
        c.delta = to_double(key, v);
    } else if (key == "problem.preset") {
        if (v != "power" && v != "zero") bad(key, "unknown preset '" + v + "' (power | zero)");
        c.preset = v;
    } else if (key == "problem.p") {
        c.p = to_double(key, v);
    } else if (key == "problem.mu") {
        c.mu = to_double(key, v);
    } else if (key == "problem.R") {
        c.threshold = to_double(key, v);
    } else if (key == "problem.c") {
        c.growth_constant = to_double(key, v);
    } else if (key == "frame.r") {
        c.r = to_auto(key, v);
    } else if (key == "frame.rho") {
        c.rho = to_auto(key, v);
    } else if (key == "frame.dim_y") {
        c.dim_y = to_count(key, v);
    } else if (key == "frame.K") {
        c.basis_size = to_count(key, v);
    } else if (key == "frame.seed") {
        c.seed = to_u64(key, v);
    } else if (key == "frame.n_samples") {
        c.n_samples = to_count(key, v);
    } else if (key == "frame.boundary_samples") {
        c.boundary_samples = to_count(key, v);
    } else if (key == "frame.interior_samples") {
        c.interior_samples = to_count(key, v);
    } else if (key == "solver.method") {
        try {
            parse_method(v);
        } catch (const Error&) {
            bad(key, "unknown method '" + v + "' (newton | signflow | flow-then-newton)");
        }
        c.method = v;
    } else if (key == "solver.tolerance") {
        c.tolerance = to_double(key, v);
    } else if (key == "solver.max_iterations") {
        c.max_iterations = static_cast<int>(to_int(key, v));
    } else if (key == "solver.eta") {
        c.eta = to_double(key, v);
    } else if (key == "solver.init") {
        try {
            parse_init(v);
        } catch (const Error&) {
            bad(key, "unknown init '" + v + "' (anchor | eigen | explicit)");
        }
        c.init = v;
    } else if (key == "solver.init_scale") {
        c.init_scale = to_double(key, v);
    } else if (key == "solver.init_value") {
        c.init_value = to_double(key, v);
    } else if (key == "solver.ray_rescale") {
        c.ray_rescale = to_bool(key, v);
    } else if (key == "solver.flow_switch") {
        c.flow_switch = to_double(key, v);
    } else if (key == "solver.flow_max_iterations") {
        c.flow_max_iterations = static_cast<int>(to_int(key, v));
    } else if (key == "output.dir") {
        if (v.empty()) bad(key, "must not be empty");
        c.out_dir = v;
    } else if (key == "output.pgm") {
        c.write_pgm = to_bool(key, v);
    } else if (key == "output.svg") {
        c.write_svg = to_bool(key, v);
    } else if (key == "refine.levels") {
        c.refine_levels = static_cast<int>(to_int(key, v));
    } else if (key == "check.samples") {
        c.check_samples = to_count(key, v);
    } else if (key == "check.geometry") {
        c.check_geometry = to_bool(key, v);
    } else {
        bad(key, "unknown key");
    }
}

void validate_config(const RunConfig& c) {
    if (!(c.domain.lx > 0.0)) bad("domain.lx", "must be > 0");
    if (c.domain.dimension == 2 && !(c.domain.ly > 0.0)) bad("domain.ly", "must be > 0");
    if (c.domain.nx < 1) bad("domain.nx", "must be >= 1");
    if (c.domain.dimension == 2 && c.domain.ny < 1) bad("domain.ny", "must be >= 1");
    if (!(c.p > 2.0)) bad("problem.p", "growth exponent must satisfy p > 2");
    if (!(c.mu > 2.0)) bad("problem.mu", "superquadratic exponent must satisfy mu > 2");
    if (!(c.threshold > 0.0)) bad("problem.R", "must be > 0");
    if (!(c.growth_constant > 0.0)) bad("problem.c", "must be > 0");
    if (c.r && !(*c.r > 0.0)) bad("frame.r", "must be > 0 or auto");
    if (c.rho && !c.r) bad("frame.rho", "a fixed rho needs a fixed r");
    if (c.rho && !(*c.rho > *c.r)) bad("frame.rho", "must exceed frame.r");
    const std::size_t nodes = static_cast<std::size_t>(c.domain.nx) *
                              static_cast<std::size_t>(c.domain.dimension == 2 ? c.domain.ny : 1);
    if (c.dim_y > nodes) bad("frame.dim_y", "exceeds the interior node count");
    if (c.dim_y > 3) bad("frame.dim_y", "chart dimension d_Y + 1 must be <= 4");
    if (c.basis_size > nodes) bad("frame.K", "exceeds the interior node count");
    if (c.boundary_samples < 1) bad("frame.boundary_samples", "must be >= 1");
    if (c.interior_samples < 1) bad("frame.interior_samples", "must be >= 1");
    if (!(c.tolerance > 0.0)) bad("solver.tolerance", "must be > 0");
    if (c.max_iterations < 0) bad("solver.max_iterations", "must be >= 0");
    if (!(c.eta > 0.0)) bad("solver.eta", "must be > 0");
    if (!(c.init_scale > 0.0)) bad("solver.init_scale", "must be > 0");
    if (!(c.flow_switch > 0.0)) bad("solver.flow_switch", "must be > 0");
    if (c.flow_max_iterations < 0) bad("solver.flow_max_iterations", "must be >= 0");
    if (c.refine_levels < 2) bad("refine.levels", "must be >= 2");
    if (c.check_samples < 1) bad("check.samples", "must be >= 1");
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig c;
    bool ny_set = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Config,
                        source + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        set_config_value(c, key, trim(line.substr(eq + 1)));
        ny_set = ny_set || key == "domain.ny";
    }
    if (c.domain.dimension == 1) {
        c.domain.ny = 1;
    } else if (!ny_set) {
        c.domain.ny = c.domain.nx;
    }
    validate_config(c);
    return c;
}

RunConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
    return parse_config(in, path);
}

std::string echo_config(const RunConfig& c) {
    std::ostringstream o;
    auto b = [](bool x) { return x ? "true" : "false"; };
    o << "domain.dimension = " << c.domain.dimension << '\n'
      << "domain.lx = " << num(c.domain.lx) << '\n'
      << "domain.ly = " << num(c.domain.ly) << '\n'
      << "domain.nx = " << c.domain.nx << '\n'
      << "domain.ny = " << c.domain.ny << '\n'
      << "problem.lambda = " << num(c.lambda) << '\n'
      << "problem.delta = " << num(c.delta) << '\n'
      << "problem.preset = " << c.preset << '\n'
      << "problem.p = " << num(c.p) << '\n'
      << "problem.mu = " << num(c.mu) << '\n'
      << "problem.R = " << num(c.threshold) << '\n'
      << "problem.c = " << num(c.growth_constant) << '\n'
      << "frame.r = " << (c.r ? num(*c.r) : "auto") << '\n'
      << "frame.rho = " << (c.rho ? num(*c.rho) : "auto") << '\n'
      << "frame.dim_y = " << c.dim_y << '\n'
      << "frame.K = " << c.basis_size << '\n'
      << "frame.seed = " << c.seed << '\n'
      << "frame.n_samples = " << c.n_samples << '\n'
      << "frame.boundary_samples = " << c.boundary_samples << '\n'
      << "frame.interior_samples = " << c.interior_samples << '\n'
      << "solver.method = " << c.method << '\n'
      << "solver.tolerance = " << num(c.tolerance) << '\n'
      << "solver.max_iterations = " << c.max_iterations << '\n'
      << "solver.eta = " << num(c.eta) << '\n'
      << "solver.init = " << c.init << '\n'
      << "solver.init_scale = " << num(c.init_scale) << '\n'
      << "solver.init_value = " << num(c.init_value) << '\n'
      << "solver.ray_rescale = " << b(c.ray_rescale) << '\n'
      << "solver.flow_switch = " << num(c.flow_switch) << '\n'
      << "solver.flow_max_iterations = " << c.flow_max_iterations << '\n'
      << "output.dir = " << c.out_dir << '\n'
      << "output.pgm = " << b(c.write_pgm) << '\n'
      << "output.svg = " << b(c.write_svg) << '\n'
      << "refine.levels = " << c.refine_levels << '\n'
      << "check.samples = " << c.check_samples << '\n'
      << "check.geometry = " << b(c.check_geometry) << '\n';
    return o.str();
}

ProblemSpec RunConfig::problem_spec() const {
    ProblemSpec s;
    s.domain = domain;
    if (s.domain.dimension == 1) s.domain.ny = 1;
    s.lambda = lambda;
    s.delta = delta;
    if (preset == "zero") {
        s.f = NonlinearitySpec::zero(p);
    } else {
        s.f = NonlinearitySpec::power(p, mu, threshold, growth_constant);
    }
    s.g = s.f;
    return s;
}

SolverConfig RunConfig::solver_config() const {
    SolverConfig s;
    s.method = parse_method(method);
    s.tolerance = tolerance;
    s.max_iterations = max_iterations;
    s.eta = eta;
    s.init = parse_init(init);
    s.init_scale = init_scale;
    s.ray_rescale = ray_rescale;
    s.flow_switch = flow_switch;
    s.flow_max_iterations = flow_max_iterations;
    if (s.init == InitPolicy::Explicit) {
        const std::size_t n = static_cast<std::size_t>(domain.nx) *
                              static_cast<std::size_t>(domain.dimension == 2 ? domain.ny : 1);
        StatePair x = StatePair::zeros(n);
        x.u.setConstant(init_value);
        x.v.setConstant(init_value);
        s.initial_state = std::move(x);
    }
    return s;
}

SampleCounts RunConfig::counts() const {
    return {n_samples, boundary_samples, interior_samples};
}

}  // namespace linksaddle
