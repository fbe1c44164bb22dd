#include "linksaddle/output.hpp"

#include "linksaddle/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace linksaddle {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
        throw Error(ErrorKind::Shape, "CSV row width differs from the header");
    }
    rows_.push_back(std::move(cells));
    return *this;
}

std::string CsvTable::str() const {
    std::ostringstream o;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) o << ',';
            o << cells[i];
        }
        o << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return o.str();
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Config, "cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw Error(ErrorKind::Config, "write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorKind::Config, "cannot rename onto '" + path + "': " + ec.message());
    }
}

std::string pgm_heatmap(const Grid& grid, const ScalarField& field) {
    const int w = grid.nx();
    const int h = grid.ny();
    const double lo = field.size() ? field.minCoeff() : 0.0;
    const double hi = field.size() ? field.maxCoeff() : 0.0;
    const double span = hi > lo ? hi - lo : 1.0;
    std::ostringstream o;
    o << "P2\n" << w << ' ' << h << "\n255\n";
    for (int j = h - 1; j >= 0; --j) {
        for (int i = 0; i < w; ++i) {
            const double v = field[static_cast<Eigen::Index>(grid.index(i, j))];
            const int level = static_cast<int>(std::lround(255.0 * (v - lo) / span));
            o << std::clamp(level, 0, 255) << (i + 1 == w ? '\n' : ' ');
        }
    }
    return o.str();
}

std::string svg_trace(const IterateTrace& trace) {
    constexpr double kW = 640.0, kH = 360.0, kPad = 40.0;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : trace.records) {
        pts.emplace_back(r.iteration, std::log10(std::max(r.grad_norm, 1e-300)));
    }
    double xmax = 1.0, ymin = 0.0, ymax = 1.0;
    if (!pts.empty()) {
        xmax = std::max(1.0, pts.back().first);
        ymin = ymax = pts.front().second;
        for (const auto& p : pts) {
            ymin = std::min(ymin, p.second);
            ymax = std::max(ymax, p.second);
        }
        if (ymax == ymin) ymax = ymin + 1.0;
    }
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kPad << "\" y=\"20\" font-size=\"12\">log10 gradient norm vs iteration</text>\n"
      << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : pts) {
        const double x = kPad + (kW - 2 * kPad) * p.first / xmax;
        const double y = kH - kPad - (kH - 2 * kPad) * (p.second - ymin) / (ymax - ymin);
        o << format_double(x) << ',' << format_double(y) << ' ';
    }
    o << "\"/>\n</svg>\n";
    return o.str();
}

std::string trace_csv(const IterateTrace& trace) {
    CsvTable t({"iteration", "stage", "J", "grad_norm", "step", "state_norm", "mu_mass"});
    for (const auto& r : trace.records) {
        t.row({std::to_string(r.iteration), r.stage, format_double(r.J), format_double(r.grad_norm),
               format_double(r.step), format_double(r.state_norm), format_double(r.mu_mass)});
    }
    return t.str();
}

}  // namespace linksaddle
