#include "linksaddle/commands.hpp"

#include "linksaddle/checks.hpp"
#include "linksaddle/error.hpp"
#include "linksaddle/output.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace linksaddle {

namespace {

constexpr const char* kVersion = "linksaddle 1.0.0";

std::string b01(bool x) { return x ? "1" : "0"; }

std::string path_in(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

class Manifest {
public:
    Manifest(const RunConfig& cfg, std::string command)
        : cfg_(cfg), command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

    void step(const std::string& name, bool pass) { steps_ << "step." << name << " = " << (pass ? "pass" : "fail") << '\n'; }

    void write() const {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::ostringstream o;
        o << "# " << kVersion << "\n# command: " << command_ << "\n# seed: " << cfg_.seed
          << "\n# elapsed_seconds: " << format_double(secs) << "\n"
          << echo_config(cfg_) << "# summary\n";
        std::istringstream in(steps_.str());
        std::string line;
        while (std::getline(in, line)) o << "# " << line << '\n';
        write_atomic(path_in(cfg_, "manifest_" + command_ + ".txt"), o.str());
    }

private:
    const RunConfig& cfg_;
    std::string command_;
    std::chrono::steady_clock::time_point start_;
    std::ostringstream steps_;
};

struct Log {
    bool quiet;
    std::ostream& out;
    template <typename T>
    Log& operator<<(const T& v) {
        if (!quiet) out << v;
        return *this;
    }
};

std::string geometry_csv(const GeometryReport& g) {
    CsvTable t({"r", "rho", "dim_y", "b_est", "a_est", "margin", "base_max", "n_count",
                "boundary_count", "b_exact", "a_exact", "certified", "seed"});
    t.row({format_double(g.r), format_double(g.rho), std::to_string(g.dim_y), format_double(g.b_est),
           format_double(g.a_est), format_double(g.margin), format_double(g.base_max),
           std::to_string(g.n_count), std::to_string(g.boundary_count), b01(g.b_exact),
           b01(g.a_exact), b01(g.certified), std::to_string(g.seed)});
    return t.str();
}

std::string radii_csv(const RadiiChoice& r) {
    CsvTable t({"r", "rho", "lambda1", "eps", "c_eps", "sobolev_constant", "component_radius",
                "lower_bound", "pilot_a_est", "rho_doublings"});
    t.row({format_double(r.r), format_double(r.rho), format_double(r.lambda1), format_double(r.eps),
           format_double(r.c_eps), format_double(r.sobolev), format_double(r.component_radius),
           format_double(r.lower_bound), format_double(r.pilot_a_est), std::to_string(r.rho_doublings)});
    return t.str();
}

bool hypotheses_hold(const ProblemSpec& spec) {
    for (const auto* nl : {&spec.f, &spec.g}) {
        if (!validate_hypotheses(*nl, std::max(100.0, 10.0 * nl->threshold), 4001).all()) return false;
    }
    return true;
}

}  // namespace

ResolvedFrame resolve_frame(const RunConfig& cfg, const Problem& prob) {
    const SampleCounts pilot{200, std::min<std::size_t>(400, cfg.boundary_samples), 0};
    if (!cfg.r) {
        RadiiChoice rc = choose_radii(prob, cfg.dim_y, cfg.seed, pilot);
        return {LinkingFrame::from_problem(prob, rc.r, rc.rho, cfg.dim_y, cfg.basis_size), rc};
    }
    if (!cfg.rho) {
        RadiiChoice rc;
        rc.r = *cfg.r;
        rc.rho = choose_rho(prob, rc.r, cfg.dim_y, cfg.seed, pilot, &rc.pilot_a_est, &rc.rho_doublings);
        return {LinkingFrame::from_problem(prob, rc.r, rc.rho, cfg.dim_y, cfg.basis_size), rc};
    }
    return {LinkingFrame::from_problem(prob, *cfg.r, *cfg.rho, cfg.dim_y, cfg.basis_size), std::nullopt};
}

int cmd_check(const RunConfig& cfg, bool quiet, std::ostream& out) {
    Log log{quiet, out};
    Manifest manifest(cfg, "check");
    const Problem prob = make_problem(cfg.problem_spec());
    CheckOptions opt;
    opt.samples = cfg.check_samples;
    opt.basis_size = cfg.basis_size;
    opt.seed = cfg.seed;
    std::vector<CheckRow> rows = run_invariant_suites(prob, opt);

    if (cfg.check_geometry) {
        // Informational: a non-certifying configuration is a valid outcome.
        const bool hyp = hypotheses_hold(prob.spec);
        rows.push_back({"geometry", "hypotheses", hyp ? 1.0 : 0.0, 1.0, hyp, false});
        try {
            const ResolvedFrame rf = resolve_frame(cfg, prob);
            const GeometryReport g = estimate_geometry(rf.frame, prob, cfg.counts(), cfg.seed);
            rows.push_back({"geometry", "b_est", g.b_est, 0.0, g.b_est > 0.0, false});
            rows.push_back({"geometry", "a_est", g.a_est, 0.0, g.a_est <= 0.0, false});
            rows.push_back({"geometry", "margin", g.margin, 0.0, g.certified && hyp, false});
            if (!(g.certified && hyp)) log << "geometry not certified\n";
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Geometry) throw;
            log << "geometry not certified: " << e.what() << '\n';
            rows.push_back({"geometry", "certified", 0.0, 1.0, false, false});
        }
    }

    CsvTable t({"suite", "name", "measured", "bound", "pass", "gating"});
    for (const auto& r : rows) {
        t.row({r.suite, r.name, format_double(r.measured), format_double(r.bound), b01(r.pass), b01(r.gating)});
        log << (r.pass ? "PASS " : (r.gating ? "FAIL " : "INFO ")) << r.suite << '.' << r.name
            << " measured=" << format_double(r.measured) << " bound=" << format_double(r.bound) << '\n';
        if (r.gating) manifest.step(r.suite + "." + r.name, r.pass);
    }
    write_atomic(path_in(cfg, "check.csv"), t.str());
    manifest.write();
    const bool ok = all_gating_pass(rows);
    log << (ok ? "check: all suites pass\n" : "check: failures present\n");
    return ok ? kExitOk : kExitFailure;
}

int cmd_geometry(const RunConfig& cfg, bool quiet, std::ostream& out) {
    Log log{quiet, out};
    Manifest manifest(cfg, "geometry");
    const Problem prob = make_problem(cfg.problem_spec());
    ResolvedFrame rf = [&] {
        try {
            return resolve_frame(cfg, prob);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Geometry) {
                manifest.step("radii", false);
                manifest.write();
            }
            throw;
        }
    }();
    if (rf.radii) write_atomic(path_in(cfg, "radii.csv"), radii_csv(*rf.radii));
    GeometryReport g = estimate_geometry(rf.frame, prob, cfg.counts(), cfg.seed);
    // A sampled margin alone does not certify without the growth hypotheses.
    const bool hyp = hypotheses_hold(prob.spec);
    manifest.step("hypotheses", hyp);
    g.certified = g.certified && hyp;
    write_atomic(path_in(cfg, "geometry.csv"), geometry_csv(g));
    manifest.step("geometry", g.certified);
    manifest.write();
    log << "r = " << format_double(g.r) << ", rho = " << format_double(g.rho) << "\n"
        << "b_est = " << format_double(g.b_est) << ", a_est = " << format_double(g.a_est)
        << ", margin = " << format_double(g.margin) << (g.certified ? " (certified)\n" : " (not certified)\n");
    return g.certified ? kExitOk : kExitFailure;
}

int cmd_intersect(const RunConfig& cfg, bool quiet, std::ostream& out) {
    Log log{quiet, out};
    Manifest manifest(cfg, "intersect");
    const Problem prob = make_problem(cfg.problem_spec());
    const ResolvedFrame rf = resolve_frame(cfg, prob);
    const LinkingFrame& frame = rf.frame;
    const GeometryReport g = estimate_geometry(frame, prob, cfg.counts(), cfg.seed);
    const SampleSets samples = sample_sets(frame, cfg.counts(), cfg.seed);

    CsvTable t({"deformation", "boundary_displacement", "displacement_residual", "p_residual",
                "norm_residual", "lambda0", "J_image", "b_est", "degree_H0", "degree_H1", "pass"});
    bool all_ok = true;
    std::string failure;
    for (const auto& gamma : shipped_deformations(frame)) {
        const CertificateReport cert = certify_deformation(gamma, frame, samples);
        try {
            const IntersectionResult ir = intersection_point(gamma, frame);
            const double j_image = energy(prob, ir.image);
            const int d0 = brouwer_degree_small(
                [&](const Eigen::VectorXd& q) { return homotopy_chart(0.0, q, gamma, frame); }, frame).degree;
            const int d1 = brouwer_degree_small(
                [&](const Eigen::VectorXd& q) { return homotopy_chart(1.0, q, gamma, frame); }, frame).degree;
            const bool ok = cert.boundary_ok && cert.displacement_ok && d0 == 1 && d1 == 1 &&
                            j_image >= g.b_est - 1e-8;
            t.row({gamma.name, format_double(cert.boundary_max_displacement),
                   format_double(cert.displacement_max_residual), format_double(ir.p_residual),
                   format_double(ir.norm_residual), format_double(ir.point.lambda0), format_double(j_image),
                   format_double(g.b_est), std::to_string(d0), std::to_string(d1), b01(ok)});
            log << gamma.name << ": |P gamma| = " << format_double(ir.p_residual)
                << ", | |gamma| - r | = " << format_double(ir.norm_residual) << ", deg H(0) = " << d0
                << ", deg H(1) = " << d1 << (ok ? " ok\n" : " FAILED\n");
            manifest.step("intersect." + gamma.name, ok);
            if (!ok && failure.empty()) failure = gamma.name;
            all_ok = all_ok && ok;
        } catch (const Error& e) {
            const ErrorKind k = e.kind();
            if (k != ErrorKind::Intersection && k != ErrorKind::DegenerateRoot && k != ErrorKind::BoundaryZero) throw;
            t.row({gamma.name, format_double(cert.boundary_max_displacement),
                   format_double(cert.displacement_max_residual), "nan", "nan", "nan", "nan",
                   format_double(g.b_est), "nan", "nan", "0"});
            log << gamma.name << ": " << e.what() << '\n';
            manifest.step("intersect." + gamma.name, false);
            if (failure.empty()) failure = gamma.name;
            all_ok = false;
        }
    }
    write_atomic(path_in(cfg, "intersect.csv"), t.str());
    manifest.write();
    if (!all_ok) log << "intersection failed for deformation '" << failure << "'\n";
    return all_ok ? kExitOk : kExitFailure;
}

int cmd_solve(const RunConfig& cfg, bool quiet, std::ostream& out) {
    Log log{quiet, out};
    Manifest manifest(cfg, "solve");
    const Problem prob = make_problem(cfg.problem_spec());

    const bool hyp = hypotheses_hold(prob.spec);
    manifest.step("hypotheses", hyp);

    std::optional<GeometryReport> geom;
    std::string geom_note;
    try {
        const ResolvedFrame rf = resolve_frame(cfg, prob);
        geom = estimate_geometry(rf.frame, prob, cfg.counts(), cfg.seed);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Geometry) throw;
        geom_note = e.what();
    }
    manifest.step("geometry", geom && geom->certified);

    const SaddleReport rep = solve(prob, cfg.solver_config());
    manifest.step("solve", rep.converged && rep.nontrivial);
    const PSReport ps = ps_monitor(rep.trace, prob.discretization(), cfg.tolerance);
    manifest.step("palais_smale", ps.all());
    const std::optional<bool> consistent =
        geom ? std::optional<bool>(minimax_consistency(rep, *geom)) : std::nullopt;
    manifest.step("minimax_consistency", consistent.value_or(false));

    CsvTable t({"method", "converged", "iterations", "c_est", "grad_norm", "residual_norm",
                "state_norm", "nontrivial", "hypotheses", "geometry_certified", "b_est", "a_est",
                "minimax_consistent", "ps_bounded", "ps_gradient_small", "ps_cauchy", "ps_cauchy_distance",
                "ps_c1", "ps_c2", "ps_min_slack"});
    t.row({rep.method, b01(rep.converged), std::to_string(rep.iterations), format_double(rep.c_est),
           format_double(rep.grad_norm), format_double(rep.residual_norm), format_double(rep.state_norm),
           b01(rep.nontrivial), b01(hyp), b01(geom && geom->certified),
           geom ? format_double(geom->b_est) : "nan", geom ? format_double(geom->a_est) : "nan",
           consistent ? b01(*consistent) : "nan", b01(ps.bounded), b01(ps.gradient_small), b01(ps.cauchy),
           format_double(ps.cauchy_distance), format_double(ps.c1), format_double(ps.c2),
           format_double(ps.min_slack)});
    write_atomic(path_in(cfg, "report.csv"), t.str());
    write_atomic(path_in(cfg, "trace.csv"), trace_csv(rep.trace));
    if (cfg.write_pgm) {
        write_atomic(path_in(cfg, "u.pgm"), pgm_heatmap(prob.grid(), rep.state.u));
        write_atomic(path_in(cfg, "v.pgm"), pgm_heatmap(prob.grid(), rep.state.v));
    }
    if (cfg.write_svg) write_atomic(path_in(cfg, "trace.svg"), svg_trace(rep.trace));
    manifest.write();

    log << "c_est = " << format_double(rep.c_est) << ", |grad J| = " << format_double(rep.grad_norm)
        << ", |x| = " << format_double(rep.state_norm) << " (" << rep.message << ")\n";
    if (!geom_note.empty()) log << "geometry not certified: " << geom_note << '\n';

    const char* failed = nullptr;
    if (!hyp) failed = "hypotheses";
    else if (!geom || !geom->certified) failed = "geometry";
    else if (!rep.converged) failed = "solve";
    else if (!rep.nontrivial) failed = "nontriviality";
    else if (!ps.all()) failed = "palais_smale";
    else if (!consistent.value_or(false)) failed = "minimax_consistency";
    if (failed) {
        log << "stage '" << failed << "' failed\n";
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_refine(const RunConfig& cfg, bool quiet, std::ostream& out) {
    Log log{quiet, out};
    Manifest manifest(cfg, "refine");
    CsvTable t({"level", "nx", "ny", "c_est", "state_norm", "grad_norm", "converged", "difference", "ratio"});
    std::vector<double> c;
    bool all_converged = true;
    for (int level = 0; level < cfg.refine_levels; ++level) {
        RunConfig lc = cfg;
        lc.domain.nx = (cfg.domain.nx + 1) * (1 << level) - 1;
        if (cfg.domain.dimension == 2) lc.domain.ny = (cfg.domain.ny + 1) * (1 << level) - 1;
        const Problem prob = make_problem(lc.problem_spec());
        const SaddleReport rep = solve(prob, lc.solver_config());
        c.push_back(rep.c_est);
        const double diff = level > 0 ? c[level] - c[level - 1] : std::nan("");
        const double ratio = level > 1 ? (c[level - 1] - c[level - 2]) / diff : std::nan("");
        t.row({std::to_string(level), std::to_string(lc.domain.nx),
               std::to_string(lc.domain.dimension == 2 ? lc.domain.ny : 1), format_double(rep.c_est),
               format_double(rep.state_norm), format_double(rep.grad_norm), b01(rep.converged),
               format_double(diff), format_double(ratio)});
        log << "n = " << lc.domain.nx << ": c_est = " << format_double(rep.c_est)
            << (level > 1 ? ", ratio = " + format_double(ratio) : std::string()) << '\n';
        manifest.step("level" + std::to_string(level), rep.converged);
        all_converged = all_converged && rep.converged;
    }
    write_atomic(path_in(cfg, "refine.csv"), t.str());
    manifest.write();
    return all_converged ? kExitOk : kExitFailure;
}

}  // namespace linksaddle
