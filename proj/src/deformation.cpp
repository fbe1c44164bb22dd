#include "linksaddle/error.hpp"
#include "linksaddle/linking.hpp"

#include <algorithm>
#include <cmath>

namespace linksaddle {

namespace {

// max of a(1 − a²) on [0, 1], attained at a = 1/√3
constexpr double kTaperPeak = 0.38490017945975052;

ChartPoint taper_peak(const LinkingFrame& frame) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(frame.dim_y())),
            frame.rho() / (std::sqrt(3.0) * frame.r())};
}

}  // namespace

double boundary_taper(const LinkingFrame& frame, const ChartPoint& p) {
    if (frame.on_boundary(p)) return 0.0;
    const double a = p.lambda0 * frame.r() / frame.rho();
    const double norm = frame.chart_norm(p) / frame.rho();
    return std::max(0.0, a * (1.0 - norm * norm) / kTaperPeak);
}

Deformation identity_deformation(const LinkingFrame& frame) {
    Deformation d;
    d.name = "identity";
    d.map = [frame](const ChartPoint& p) { return frame.embed(p); };
    return d;
}

Deformation shift_deformation(const LinkingFrame& frame, std::size_t k, double s) {
    if (k >= frame.dim_y()) throw Error(ErrorKind::InvalidSpec, "shift index outside the Y chart");
    Deformation d;
    d.name = "shift_e" + std::to_string(k);
    const StatePair e = frame.basis()[k];
    d.map = [frame, e, s](const ChartPoint& p) {
        StatePair x = frame.embed(p);
        if (frame.on_boundary(p)) return x;
        x += (s * boundary_taper(frame, p)) * e;
        return x;
    };
    d.displacement_basis = {e};
    d.hints = {taper_peak(frame)};
    return d;
}

Deformation shear_deformation(const LinkingFrame& frame, std::size_t k, double s) {
    if (k >= frame.dim_y()) throw Error(ErrorKind::InvalidSpec, "shear index outside the Y chart");
    Deformation d;
    d.name = "shear_e" + std::to_string(k);
    const StatePair e = frame.basis()[k];
    d.map = [frame, e, s](const ChartPoint& p) {
        StatePair x = frame.embed(p);
        if (frame.on_boundary(p)) return x;
        x += (s * boundary_taper(frame, p) * p.lambda0) * e;
        return x;
    };
    d.displacement_basis = {e};
    d.hints = {taper_peak(frame)};
    return d;
}

Deformation lift_deformation(const LinkingFrame& frame, double s) {
    Deformation d;
    d.name = "lift_z";
    const StatePair z = frame.anchor_direction();
    d.map = [frame, z, s](const ChartPoint& p) {
        StatePair x = frame.embed(p);
        if (frame.on_boundary(p)) return x;
        x += (s * boundary_taper(frame, p)) * z;
        return x;
    };
    d.displacement_basis = {z};
    d.hints = {taper_peak(frame)};
    return d;
}

Deformation flow_deformation(const LinkingFrame& frame, const StatePair& endpoint) {
    const auto& split = frame.splitting();
    const double r = frame.r();
    double t_star = split.product(endpoint, frame.anchor()) / (r * r);
    StatePair target = endpoint;
    if (t_star < 0.0) {
        // −x* is critical too when the problem is odd; use the copy on the z side.
        target = -endpoint;
        t_star = -t_star;
    }
    const double radius = std::min(t_star * r, frame.rho() - t_star * r);
    if (!(radius > 0.0)) {
        throw Error(ErrorKind::Domain, "flow endpoint projects outside the half-ball M");
    }
    ChartPoint centre{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(frame.dim_y())), t_star};
    const StatePair disp = target - frame.embed(centre);
    const Eigen::VectorXd qc = frame.to_vector(centre);

    Deformation d;
    d.name = "flow";
    d.chart_preserving = false;
    d.map = [frame, disp, qc, radius](const ChartPoint& p) {
        StatePair x = frame.embed(p);
        if (frame.on_boundary(p)) return x;
        const double dist2 = (frame.to_vector(p) - qc).squaredNorm();
        const double beta = std::max(0.0, 1.0 - dist2 / (radius * radius));
        if (beta > 0.0) x += beta * disp;
        return x;
    };
    if (split.norm(disp) > 0.0) d.displacement_basis = {disp};
    d.hints = {centre};
    return d;
}

std::vector<Deformation> shipped_deformations(const LinkingFrame& frame) {
    std::vector<Deformation> out{identity_deformation(frame)};
    const double r = frame.r();
    const double rho = frame.rho();
    if (frame.dim_y() >= 1) {
        out.push_back(shift_deformation(frame, 0, 0.25 * r));
        out.push_back(shear_deformation(frame, frame.dim_y() - 1, 0.25 * r * r / rho));
    }
    out.push_back(lift_deformation(frame, 0.25 * r));
    return out;
}

CertificateReport certify_deformation(const Deformation& gamma, const LinkingFrame& frame,
                                      const SampleSets& samples, double tol) {
    CertificateReport rep;
    const auto& split = frame.splitting();
    for (const auto* set : {&samples.boundary_sphere, &samples.boundary_base}) {
        for (const auto& p : *set) {
            const StatePair diff = gamma(p) - frame.embed(p);
            const double m = std::max(diff.u.cwiseAbs().maxCoeff(), diff.v.cwiseAbs().maxCoeff());
            rep.boundary_max_displacement = std::max(rep.boundary_max_displacement, m);
            ++rep.boundary_samples;
        }
    }
    rep.boundary_ok = rep.boundary_max_displacement == 0.0;

    // Orthonormalise the certified basis in X, then measure what it misses.
    std::vector<StatePair> ortho;
    for (const auto& b : gamma.displacement_basis) {
        StatePair e = b;
        for (const auto& o : ortho) e -= split.product(e, o) * o;
        const double n = split.norm(e);
        if (n > 1e-14) ortho.push_back((1.0 / n) * e);
    }
    for (const auto& p : samples.interior) {
        StatePair diff = gamma(p) - frame.embed(p);
        const double scale = std::max(1.0, split.norm(diff));
        for (const auto& o : ortho) diff -= split.product(diff, o) * o;
        rep.displacement_max_residual =
            std::max(rep.displacement_max_residual, split.norm(diff) / scale);
        ++rep.interior_samples;
    }
    rep.displacement_ok = rep.displacement_max_residual <= tol;
    return rep;
}

}  // namespace linksaddle
