#pragma once

#include "linksaddle/grid.hpp"
#include "linksaddle/solver.hpp"

#include <string>
#include <vector>

namespace linksaddle {

/// %.17g, with "nan"/"inf" spelled portably.
std::string format_double(double value);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& row(std::vector<std::string> cells);
    std::size_t size() const noexcept { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// P2 greymap of a nodal field, row 0 at the top (largest y).
std::string pgm_heatmap(const Grid& grid, const ScalarField& field);

/// Line plot of log10 ‖∇J‖ against iteration.
std::string svg_trace(const IterateTrace& trace);

std::string trace_csv(const IterateTrace& trace);

}  // namespace linksaddle
