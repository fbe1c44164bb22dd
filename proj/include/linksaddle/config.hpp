#pragma once

#include "linksaddle/functional.hpp"
#include "linksaddle/linking.hpp"
#include "linksaddle/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace linksaddle {

/// Resolved run configuration. Text form: one `section.key = value` per
/// line, `#` starts a comment.
struct RunConfig {
    DomainSpec domain = DomainSpec::unit_interval(31);

    double lambda = 0.0;
    double delta = 0.0;
    std::string preset = "power";
    double p = 4.0;
    double mu = 4.0;
    double threshold = 1.0;
    double growth_constant = 1.0;

    std::optional<double> r;    // empty: auto
    std::optional<double> rho;  // empty: auto
    std::size_t dim_y = 1;
    std::size_t basis_size = 0;  // 0: default truncation
    std::uint64_t seed = 1;
    std::size_t n_samples = 1000;
    std::size_t boundary_samples = 1000;
    std::size_t interior_samples = 1000;

    std::string method = "flow-then-newton";
    double tolerance = 1e-10;
    int max_iterations = 100;
    double eta = 0.1;
    std::string init = "anchor";
    double init_scale = 1.0;
    double init_value = 1.0;  // explicit init: constant nodal value for u and v
    bool ray_rescale = true;
    double flow_switch = 1e-3;
    int flow_max_iterations = 5000;

    std::string out_dir = "out";
    bool write_pgm = false;
    bool write_svg = false;

    int refine_levels = 4;

    std::size_t check_samples = 100;
    bool check_geometry = true;

    bool operator==(const RunConfig&) const = default;

    ProblemSpec problem_spec() const;
    SolverConfig solver_config() const;
    SampleCounts counts() const;
};

/// Throws ErrorKind::Config naming the offending key.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Sets one key; used by the parser and for command-line overrides.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Range checks across keys; throws ErrorKind::Config.
void validate_config(const RunConfig& cfg);

/// Canonical text form; re-parses to an equal configuration.
std::string echo_config(const RunConfig& cfg);

}  // namespace linksaddle
