#pragma once

#include "linksaddle/functional.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace linksaddle {

/// One assertion of an invariant suite. Informational rows do not gate the
/// overall verdict.
struct CheckRow {
    std::string suite;
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool pass = false;
    bool gating = true;
};

struct CheckOptions {
    std::size_t samples = 100;
    std::size_t basis_size = 0;  // 0: default truncation
    std::uint64_t seed = 0;
};

std::vector<CheckRow> grid_suite(const Problem& prob, const CheckOptions& opt);
std::vector<CheckRow> splitting_suite(const Problem& prob, const CheckOptions& opt);
std::vector<CheckRow> functional_suite(const Problem& prob, const CheckOptions& opt);
/// (H1)–(H3) for f and g; informational.
std::vector<CheckRow> hypothesis_suite(const ProblemSpec& spec);

std::vector<CheckRow> run_invariant_suites(const Problem& prob, const CheckOptions& opt);

bool all_gating_pass(const std::vector<CheckRow>& rows);

}  // namespace linksaddle
