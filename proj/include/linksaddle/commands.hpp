#pragma once

#include "linksaddle/config.hpp"

#include <iosfwd>
#include <optional>

namespace linksaddle {

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct ResolvedFrame {
    LinkingFrame frame;
    std::optional<RadiiChoice> radii;  // set when r or ρ was "auto"
};

/// Builds the frame from fixed or automatic radii. Throws ErrorKind::Geometry
/// when automatic radii cannot be certified.
ResolvedFrame resolve_frame(const RunConfig& cfg, const Problem& prob);

/// Each command writes its tables under cfg.out_dir and returns an exit code.
/// Progress goes to `log` unless `quiet`.
int cmd_check(const RunConfig& cfg, bool quiet, std::ostream& log);
int cmd_geometry(const RunConfig& cfg, bool quiet, std::ostream& log);
int cmd_intersect(const RunConfig& cfg, bool quiet, std::ostream& log);
int cmd_solve(const RunConfig& cfg, bool quiet, std::ostream& log);
int cmd_refine(const RunConfig& cfg, bool quiet, std::ostream& log);

}  // namespace linksaddle
