#include "linksaddle/linking.hpp"

#include "linksaddle/error.hpp"
#include "linksaddle/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace linksaddle {

namespace {

constexpr double kGolden = 0.6180339887498949;

std::size_t clamp_basis(std::size_t want, std::size_t size) {
    return std::max<std::size_t>(1, std::min(want, size));
}

Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

/// Uniform direction; falls back to the first axis for a degenerate draw.
Eigen::VectorXd unit_direction(std::mt19937_64& rng, Eigen::Index n) {
    Eigen::VectorXd v = gaussian_vector(rng, n);
    const double norm = v.norm();
    if (norm == 0.0) {
        v.setZero();
        v[0] = 1.0;
        return v;
    }
    return v / norm;
}

/// Maximizes f on [lo, hi]: dense grid, then golden section on the best cell.
std::pair<double, double> maximize_scalar(const std::function<double(double)>& f, double lo,
                                          double hi, int grid = 2001) {
    double best_x = lo;
    double best = -std::numeric_limits<double>::infinity();
    const double step = (hi - lo) / (grid - 1);
    for (int i = 0; i < grid; ++i) {
        const double x = i + 1 == grid ? hi : lo + i * step;
        const double val = f(x);
        if (val > best) {
            best = val;
            best_x = x;
        }
    }
    double a = std::max(lo, best_x - step);
    double b = std::min(hi, best_x + step);
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    const double val = f(x);
    if (val > best) return {x, val};
    return {best_x, best};
}

/// Chart points on ∂M used to check that a map has no boundary zero.
std::vector<Eigen::VectorXd> boundary_probe(const LinkingFrame& frame) {
    const std::size_t dim = frame.chart_dim();
    const double rho = frame.rho();
    std::vector<Eigen::VectorXd> out;
    if (dim == 1) {
        out.push_back(Eigen::VectorXd::Constant(1, 0.0));
        out.push_back(Eigen::VectorXd::Constant(1, rho));
        return out;
    }
    if (dim == 2) {
        for (int i = 0; i <= 4000; ++i) {
            const double th = M_PI * i / 4000.0;
            Eigen::VectorXd q(2);
            q << rho * std::cos(th), rho * std::sin(th);
            out.push_back(q);
            Eigen::VectorXd b(2);
            b << -rho + 2.0 * rho * i / 4000.0, 0.0;
            out.push_back(b);
        }
        return out;
    }
    std::mt19937_64 rng(0xb0da2eULL);
    const auto n = static_cast<Eigen::Index>(dim);
    for (int i = 0; i < 6000; ++i) {
        Eigen::VectorXd q = unit_direction(rng, n);
        q[n - 1] = std::abs(q[n - 1]);
        out.push_back(rho * q);
        Eigen::VectorXd y = unit_direction(rng, n - 1);
        const double rad = rho * std::pow(std::uniform_real_distribution<double>(0.0, 1.0)(rng),
                                          1.0 / static_cast<double>(n - 1));
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        b.head(n - 1) = rad * y;
        out.push_back(b);
    }
    return out;
}

/// Interior lattice of the isometric half-ball, ordered by distance to `centre`.
std::vector<Eigen::VectorXd> interior_lattice(const LinkingFrame& frame, int per_axis,
                                              const Eigen::VectorXd& centre) {
    const auto dim = static_cast<Eigen::Index>(frame.chart_dim());
    const double rho = frame.rho();
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        Eigen::VectorXd q(dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double frac = (idx[static_cast<std::size_t>(k)] + 0.5) / per_axis;
            q[k] = k + 1 == dim ? rho * frac : rho * (2.0 * frac - 1.0);
        }
        if (q.norm() < rho * (1.0 - 1e-9) && q[dim - 1] > 0.0) pts.push_back(q);
        Eigen::Index k = 0;
        while (k < dim && ++idx[static_cast<std::size_t>(k)] == per_axis) {
            idx[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == dim) break;
    }
    std::stable_sort(pts.begin(), pts.end(), [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (a - centre).squaredNorm() < (b - centre).squaredNorm();
    });
    return pts;
}

bool inside_open(const Eigen::VectorXd& q, double rho) {
    return q[q.size() - 1] > 0.0 && q.norm() < rho;
}

struct NewtonOutcome {
    Eigen::VectorXd q;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Damped Newton with a central-difference Jacobian. Steps leaving the open
/// half-ball are shortened.
NewtonOutcome chart_newton(const ChartMap& map, Eigen::VectorXd q, double rho, double tol,
                           int max_iter = 60) {
    NewtonOutcome out;
    Eigen::VectorXd f = map(q);
    double res = f.norm();
    int it = 0;
    for (; it < max_iter && res > tol; ++it) {
        const Eigen::MatrixXd jac = fd_jacobian(map, q, 1e-7 * std::max(1.0, rho));
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) break;
        const Eigen::VectorXd step = lu.solve(-f);
        double alpha = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            const Eigen::VectorXd trial = q + alpha * step;
            if (!inside_open(trial, rho)) continue;
            const Eigen::VectorXd ft = map(trial);
            const double rt = ft.norm();
            if (rt < res || (rt <= tol)) {
                q = trial;
                f = ft;
                res = rt;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    out.q = q;
    out.residual = res;
    out.iterations = it;
    out.converged = res <= tol;
    return out;
}

}  // namespace

// ---------------------------------------------------------------- frame

LinkingFrame::LinkingFrame(DiagonalSplitting splitting, SigmaBasis basis, StatePair anchor,
                           double r, double rho, std::size_t dim_y)
    : splitting_(std::move(splitting)),
      basis_(std::move(basis)),
      anchor_(std::move(anchor)),
      r_(r),
      rho_(rho),
      dim_y_(dim_y) {
    if (!(r > 0.0) || !(rho > r) || !std::isfinite(rho)) {
        throw Error(ErrorKind::InvalidSpec, "linking frame needs rho > r > 0");
    }
    if (dim_y > basis_.size()) {
        throw Error(ErrorKind::InvalidSpec, "d_Y exceeds the sigma basis size");
    }
    const double norm = splitting_.norm(anchor_);
    if (std::abs(norm - r) > 1e-10 * std::max(1.0, r)) {
        throw Error(ErrorKind::InvalidSpec, "anchor norm differs from r");
    }
    if (splitting_.norm(splitting_.project_P(anchor_)) > 1e-10 * std::max(1.0, r)) {
        throw Error(ErrorKind::InvalidSpec, "anchor is not in Z");
    }
    anchor_stiff_ = apply_stiffness(discretization(), anchor_);
}

LinkingFrame LinkingFrame::from_problem(const Problem& prob, double r, double rho,
                                        std::size_t dim_y, std::size_t basis_size) {
    DiagonalSplitting splitting(prob.disc);
    const std::size_t n = prob.disc->size();
    if (dim_y > n) throw Error(ErrorKind::InvalidSpec, "d_Y exceeds the interior node count");
    if (basis_size == 0) basis_size = std::max(dim_y, std::min<std::size_t>(8, n));
    SigmaBasis basis = build_sigma_basis(splitting, clamp_basis(std::max(basis_size, dim_y), n));
    // (φ₁, φ₁) from the Y element (−φ₁, φ₁): same X-norm.
    StatePair dir{basis[0].v, basis[0].v};
    dir *= r / splitting.norm(dir);
    return LinkingFrame(std::move(splitting), std::move(basis), std::move(dir), r, rho, dim_y);
}

LinkingFrame LinkingFrame::with_radii(double r, double rho) const {
    return LinkingFrame(splitting_, basis_, (r / r_) * anchor_, r, rho, dim_y_);
}

StatePair LinkingFrame::embed_y(const Eigen::VectorXd& y) const {
    StatePair out = StatePair::zeros(discretization().size());
    for (std::size_t k = 0; k < dim_y_ && k < static_cast<std::size_t>(y.size()); ++k) {
        const double c = y[static_cast<Eigen::Index>(k)];
        if (c != 0.0) out += c * basis_[k];
    }
    return out;
}

StatePair LinkingFrame::embed(const ChartPoint& p) const {
    StatePair out = embed_y(p.y);
    if (p.lambda0 != 0.0) out += p.lambda0 * anchor_;
    return out;
}

Eigen::VectorXd LinkingFrame::y_coordinates(const StatePair& x) const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(dim_y_));
    for (std::size_t k = 0; k < dim_y_; ++k) {
        c[static_cast<Eigen::Index>(k)] = euclidean_dot(x, basis_.stiff(k));
    }
    return c;
}

ChartPoint LinkingFrame::chart(const StatePair& x) const {
    return {y_coordinates(x), euclidean_dot(x, anchor_stiff_) / (r_ * r_)};
}

double LinkingFrame::y_span_residual(const StatePair& x, const Eigen::VectorXd& coords) const {
    return splitting_.norm(x - embed_y(coords));
}

Eigen::VectorXd LinkingFrame::to_vector(const ChartPoint& p) const {
    Eigen::VectorXd q(static_cast<Eigen::Index>(dim_y_ + 1));
    q.head(static_cast<Eigen::Index>(dim_y_)) = p.y.head(static_cast<Eigen::Index>(dim_y_));
    q[static_cast<Eigen::Index>(dim_y_)] = p.lambda0 * r_;
    return q;
}

ChartPoint LinkingFrame::from_vector(const Eigen::VectorXd& q) const {
    if (static_cast<std::size_t>(q.size()) != dim_y_ + 1) {
        throw Error(ErrorKind::Shape, "chart vector has the wrong dimension");
    }
    return {q.head(static_cast<Eigen::Index>(dim_y_)), q[static_cast<Eigen::Index>(dim_y_)] / r_};
}

double LinkingFrame::chart_norm(const ChartPoint& p) const {
    return std::sqrt(p.y.head(static_cast<Eigen::Index>(dim_y_)).squaredNorm() +
                     p.lambda0 * p.lambda0 * r_ * r_);
}

bool LinkingFrame::in_M(const ChartPoint& p, double tol) const {
    return p.lambda0 >= -tol && chart_norm(p) <= rho_ * (1.0 + tol);
}

bool LinkingFrame::on_boundary(const ChartPoint& p, double tol) const {
    return p.lambda0 <= 0.0 || chart_norm(p) >= rho_ * (1.0 - tol);
}

// ---------------------------------------------------------------- samples

SampleSets sample_sets(const LinkingFrame& frame, const SampleCounts& counts, std::uint64_t seed) {
    SampleSets s;
    const auto& disc = frame.discretization();
    const auto n = static_cast<Eigen::Index>(disc.size());
    const double r = frame.r();
    const double rho = frame.rho();
    const std::size_t dy = frame.dim_y();
    const auto dim = static_cast<Eigen::Index>(dy + 1);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // N
    s.z_one_dimensional = n == 1;
    s.n_set.push_back(frame.anchor());
    s.n_set.push_back(-frame.anchor());
    if (!s.z_one_dimensional) {
        const auto& basis = frame.basis();
        for (std::size_t i = s.n_set.size(); i < counts.n_samples; ++i) {
            ScalarField w;
            if (i % 2 == 0) {
                w = ScalarField::Zero(n);
                for (std::size_t k = 0; k < basis.size(); ++k) {
                    std::normal_distribution<double> normal(0.0, 1.0 / (1.0 + static_cast<double>(k)));
                    w += normal(rng) * basis[k].v;
                }
            } else {
                w = gaussian_vector(rng, n);
            }
            StatePair x{w, w};
            const double norm = frame.splitting().norm(x);
            if (norm == 0.0) continue;
            s.n_set.push_back((r / norm) * x);
        }
    }

    // ∂M, sphere slice: top point, meridians through each e_k, random points.
    const std::size_t sphere_target = counts.boundary_samples / 2;
    const std::size_t base_target = counts.boundary_samples - sphere_target;
    s.boundary_sphere.push_back({Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dy)), rho / r});
    constexpr int kMeridian = 16;
    for (std::size_t k = 0; k < dy; ++k) {
        for (int sign : {1, -1}) {
            for (int i = 0; i < kMeridian; ++i) {
                const double th = 0.5 * M_PI * i / kMeridian;
                ChartPoint p{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dy)),
                             rho * std::sin(th) / r};
                p.y[static_cast<Eigen::Index>(k)] = sign * rho * std::cos(th);
                s.boundary_sphere.push_back(std::move(p));
            }
        }
    }
    while (s.boundary_sphere.size() < sphere_target && dy > 0) {
        Eigen::VectorXd q = unit_direction(rng, dim);
        q[dim - 1] = std::abs(q[dim - 1]);
        s.boundary_sphere.push_back(frame.from_vector(rho * q));
    }

    // ∂M, base λ₀ = 0: centre, ±ρe_k, random points of the ball.
    s.boundary_base.push_back({Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dy)), 0.0});
    for (std::size_t k = 0; k < dy; ++k) {
        for (int sign : {1, -1}) {
            ChartPoint p{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dy)), 0.0};
            p.y[static_cast<Eigen::Index>(k)] = sign * rho;
            s.boundary_base.push_back(std::move(p));
        }
    }
    while (s.boundary_base.size() < base_target && dy > 0) {
        const Eigen::VectorXd y = unit_direction(rng, static_cast<Eigen::Index>(dy));
        const double rad = rho * std::pow(unif(rng), 1.0 / static_cast<double>(dy));
        s.boundary_base.push_back({rad * y, 0.0});
    }

    // int(M): ray points toward z, then uniform points of the half-ball.
    const std::size_t ray = std::min<std::size_t>(counts.interior_samples, 64);
    for (std::size_t i = 0; i < ray; ++i) {
        const double t = (rho / r) * (static_cast<double>(i) + 0.5) / static_cast<double>(ray);
        s.interior.push_back({Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dy)), t});
    }
    while (s.interior.size() < counts.interior_samples) {
        Eigen::VectorXd q = unit_direction(rng, dim);
        q[dim - 1] = std::abs(q[dim - 1]);
        const double rad = rho * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
        ChartPoint p = frame.from_vector(rad * q);
        if (p.lambda0 <= 0.0 || rad >= rho) continue;
        s.interior.push_back(std::move(p));
    }
    return s;
}

// ---------------------------------------------------------------- geometry

GeometryReport estimate_geometry(const LinkingFrame& frame, const Problem& prob,
                                 const SampleCounts& counts, std::uint64_t seed) {
    const SampleSets samples = sample_sets(frame, counts, seed);
    GeometryReport rep;
    rep.r = frame.r();
    rep.rho = frame.rho();
    rep.dim_y = frame.dim_y();
    rep.seed = seed;

    std::vector<double> jn(samples.n_set.size());
    parallel_for(jn.size(), [&](std::size_t i) { jn[i] = energy(prob, samples.n_set[i]); });
    rep.b_est = *std::min_element(jn.begin(), jn.end());
    rep.b_exact = samples.z_one_dimensional;
    rep.n_count = jn.size();

    std::vector<double> js(samples.boundary_sphere.size());
    parallel_for(js.size(), [&](std::size_t i) {
        js[i] = energy(prob, frame.embed(samples.boundary_sphere[i]));
    });
    std::vector<double> jb(samples.boundary_base.size());
    parallel_for(jb.size(), [&](std::size_t i) {
        jb[i] = energy(prob, frame.embed(samples.boundary_base[i]));
    });
    rep.base_max = *std::max_element(jb.begin(), jb.end());
    rep.a_est = std::max(rep.base_max, *std::max_element(js.begin(), js.end()));
    rep.boundary_count = js.size() + jb.size();

    if (frame.dim_y() <= 1) {
        // ∂M is an arc plus a segment (or a point pair): maximize exactly.
        const double rho = frame.rho();
        const double r = frame.r();
        if (frame.dim_y() == 1) {
            auto arc = [&](double th) {
                ChartPoint p{Eigen::VectorXd::Constant(1, rho * std::cos(th)), rho * std::sin(th) / r};
                return energy(prob, frame.embed(p));
            };
            auto seg = [&](double y) {
                return energy(prob, frame.embed({Eigen::VectorXd::Constant(1, y), 0.0}));
            };
            const double arc_max = maximize_scalar(arc, 0.0, M_PI).second;
            const double seg_max = maximize_scalar(seg, -rho, rho).second;
            rep.base_max = std::max(rep.base_max, seg_max);
            rep.a_est = std::max({rep.a_est, arc_max, seg_max});
        }
        rep.a_exact = true;
    }
    rep.margin = rep.b_est - rep.a_est;
    rep.certified = rep.margin > 0.0;
    return rep;
}

RadiiChoice choose_radii(const Problem& prob, std::size_t dim_y, std::uint64_t seed,
                         const SampleCounts& pilot) {
    const auto& spec = prob.spec;
    if (spec.lambda < 0.0 || spec.delta < 0.0) {
        throw Error(ErrorKind::Geometry, "geometry not certified: lambda and delta must be >= 0");
    }
    if (spec.f.p != spec.g.p) {
        throw Error(ErrorKind::Geometry, "automatic radii need equal growth exponents for f and g");
    }
    RadiiChoice out;
    const auto& disc = prob.discretization();
    const double p = spec.f.p;
    out.lambda1 = principal_eigenpair(disc).value;
    const double kappa = 0.5 * (spec.lambda + spec.delta);
    out.eps = 0.5 * out.lambda1 - kappa;
    if (!(out.eps > 0.0)) {
        throw Error(ErrorKind::Geometry, "geometry not certified: (lambda + delta)/2 >= lambda1/2");
    }
    out.c_eps = small_t_constants(spec, out.eps).value;

    // Sampled embedding constant sup ∫|w|^p / ⟨w,Kw⟩^{p/2}.
    {
        DiagonalSplitting splitting(prob.disc);
        const std::size_t n = disc.size();
        const auto pairs = lowest_eigenpairs(disc, std::min<std::size_t>(8, n));
        auto ratio = [&](const ScalarField& w) {
            const double energy_w = disc.dirichlet_product(w, w);
            if (!(energy_w > 0.0)) return 0.0;
            return lebesgue_power(disc, w, p) / std::pow(energy_w, 0.5 * p);
        };
        double best = 0.0;
        for (const auto& e : pairs) best = std::max(best, ratio(e.vector));
        std::mt19937_64 rng(seed ^ 0xc0b5ULL);
        for (int i = 0; i < 200; ++i) {
            ScalarField w = ScalarField::Zero(static_cast<Eigen::Index>(n));
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                std::normal_distribution<double> normal(0.0, 1.0 / (1.0 + static_cast<double>(k)));
                w += normal(rng) * pairs[k].vector;
            }
            best = std::max(best, ratio(w));
            best = std::max(best, ratio(gaussian_vector(rng, static_cast<Eigen::Index>(n))));
        }
        const auto& kmat = disc.stiffness().matrix();
        for (std::size_t i = 0; i < n; ++i) {
            const double kii = kmat.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
            best = std::max(best, disc.grid().cell_volume() / std::pow(kii, 0.5 * p));
        }
        out.sobolev = best;
    }

    const double coeff = 2.0 * out.c_eps * out.sobolev;
    auto bound = [&](double s) { return 0.5 * s * s - coeff * std::pow(s, p); };
    double s_star = 1.0 / std::sqrt(2.0);
    if (coeff > 0.0) {
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 1200; ++i) {
            const double s = std::pow(10.0, -6.0 + 12.0 * i / 1200.0);
            const double b = bound(s);
            if (b > best) {
                best = b;
                s_star = s;
            }
        }
        s_star *= 0.5;
    }
    out.component_radius = s_star;
    out.lower_bound = bound(s_star);
    if (!(out.lower_bound > 0.0)) {
        throw Error(ErrorKind::Geometry, "no radius with a positive certified lower bound");
    }
    out.r = std::sqrt(2.0) * s_star;

    out.rho = choose_rho(prob, out.r, dim_y, seed, pilot, &out.pilot_a_est, &out.rho_doublings);
    return out;
}

double choose_rho(const Problem& prob, double r, std::size_t dim_y, std::uint64_t seed,
                  const SampleCounts& pilot, double* pilot_a_est, int* doublings) {
    const LinkingFrame frame = LinkingFrame::from_problem(prob, r, 2.0 * r, dim_y);
    for (int k = 1; k <= 24; ++k) {
        const double rho = std::ldexp(r, k);
        const GeometryReport rep = estimate_geometry(frame.with_radii(r, rho), prob, pilot, seed);
        if (pilot_a_est) *pilot_a_est = rep.a_est;
        if (doublings) *doublings = k;
        if (rep.a_est <= 0.0) return rho;
    }
    throw Error(ErrorKind::Geometry,
                "no power-of-two multiple of r gives sup over the boundary of M <= 0");
}

// ---------------------------------------------------------------- homotopy

HomotopyValue homotopy_H(double t, const ChartPoint& u, const Deformation& gamma,
                         const LinkingFrame& frame) {
    if (!frame.in_M(u, 1e-6)) throw Error(ErrorKind::Domain, "homotopy_H: point outside M");
    if (t < 0.0 || t > 1.0) throw Error(ErrorKind::Domain, "homotopy_H: t outside [0, 1]");
    const auto& split = frame.splitting();
    HomotopyValue h;
    if (t == 0.0) {
        h.y_part = frame.embed_y(u.y);
        h.z_coeff = u.lambda0 - 1.0;
        return h;
    }
    const StatePair g = gamma(u);
    const StatePair pg = split.project_P(g);
    const double qnorm = split.norm(g - pg);
    h.y_part = t * pg;
    if (t < 1.0) h.y_part += (1.0 - t) * frame.embed_y(u.y);
    h.z_coeff = (t / frame.r()) * qnorm + (1.0 - t) * u.lambda0 - 1.0;
    return h;
}

double homotopy_norm(const HomotopyValue& h, const LinkingFrame& frame) {
    // Y-part ⟂ z in X.
    const double y = frame.splitting().norm(h.y_part);
    const double z = h.z_coeff * frame.r();
    return std::sqrt(y * y + z * z);
}

Eigen::VectorXd homotopy_chart(double t, const Eigen::VectorXd& q, const Deformation& gamma,
                               const LinkingFrame& frame) {
    if (t == 0.0) {
        // H(0,u) = u − z needs no embedding
        if (!frame.in_M(frame.from_vector(q), 1e-6)) throw Error(ErrorKind::Domain, "homotopy_H: point outside M");
        Eigen::VectorXd out = q;
        out[q.size() - 1] -= frame.r();
        return out;
    }
    const HomotopyValue h = homotopy_H(t, frame.from_vector(q), gamma, frame);
    const Eigen::VectorXd coords = frame.y_coordinates(h.y_part);
    const double scale = std::max(1.0, frame.splitting().norm(h.y_part));
    if (frame.y_span_residual(h.y_part, coords) > 1e-8 * scale) {
        throw Error(ErrorKind::Domain, "homotopy leaves the truncated chart; deformation '" +
                                           gamma.name + "' is not chart-preserving");
    }
    Eigen::VectorXd out(q.size());
    out.head(coords.size()) = coords;
    out[q.size() - 1] = h.z_coeff * frame.r();
    return out;
}

Eigen::MatrixXd fd_jacobian(const ChartMap& map, const Eigen::VectorXd& q, double step) {
    const auto n = q.size();
    Eigen::MatrixXd jac(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd qp = q;
        Eigen::VectorXd qm = q;
        qp[j] += step;
        qm[j] -= step;
        const Eigen::VectorXd diff = map(qp) - map(qm);
        if (diff.size() != n) throw Error(ErrorKind::Shape, "chart map changes dimension");
        jac.col(j) = diff / (2.0 * step);
    }
    return jac;
}

IntersectionResult intersection_point(const Deformation& gamma, const LinkingFrame& frame) {
    if (!gamma.chart_preserving) {
        throw Error(ErrorKind::Domain,
                    "intersection_point needs a chart-preserving deformation, got '" + gamma.name + "'");
    }
    const auto dim = static_cast<Eigen::Index>(frame.chart_dim());
    const double rho = frame.rho();
    const double r = frame.r();
    const ChartMap map = [&](const Eigen::VectorXd& q) { return homotopy_chart(1.0, q, gamma, frame); };

    Eigen::VectorXd centre = Eigen::VectorXd::Zero(dim);
    centre[dim - 1] = r;
    std::vector<Eigen::VectorXd> starts{centre};
    const int per_axis = dim <= 2 ? 9 : (dim == 3 ? 7 : 5);
    for (auto& q : interior_lattice(frame, per_axis, centre)) starts.push_back(std::move(q));

    const auto& split = frame.splitting();
    for (std::size_t i = 0; i < starts.size(); ++i) {
        NewtonOutcome res;
        try {
            res = chart_newton(map, starts[i], rho, 1e-12 * std::max(1.0, r));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Domain) continue;
            throw;
        }
        if (!res.converged) continue;
        IntersectionResult out;
        out.point = frame.from_vector(res.q);
        out.image = gamma(out.point);
        out.p_residual = split.norm(split.project_P(out.image));
        out.norm_residual = std::abs(split.norm(out.image) - r);
        out.start_index = i;
        out.iterations = res.iterations;
        if (out.p_residual <= 1e-8 && out.norm_residual <= 1e-8) return out;
    }
    throw Error(ErrorKind::Intersection,
                "no point of gamma(M) on N found for deformation '" + gamma.name + "'");
}

DegreeResult brouwer_degree_small(const ChartMap& map, const LinkingFrame& frame) {
    const auto dim = static_cast<Eigen::Index>(frame.chart_dim());
    if (dim > 4) throw Error(ErrorKind::Domain, "brouwer_degree_small needs chart dimension <= 4");
    const double rho = frame.rho();
    DegreeResult out;

    const auto probe = boundary_probe(frame);
    std::vector<double> mags(probe.size());
    parallel_for(probe.size(), [&](std::size_t i) { mags[i] = map(probe[i]).norm(); });
    out.boundary_min = *std::min_element(mags.begin(), mags.end());
    if (out.boundary_min < 1e-6) {
        throw Error(ErrorKind::BoundaryZero, "map comes within 1e-6 of zero on the boundary of M");
    }

    Eigen::VectorXd centre = Eigen::VectorXd::Zero(dim);
    centre[dim - 1] = 0.5 * rho;
    const int per_axis = dim <= 2 ? 11 : (dim == 3 ? 7 : 5);
    const auto starts = interior_lattice(frame, per_axis, centre);
    std::vector<NewtonOutcome> found(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        try {
            found[i] = chart_newton(map, starts[i], rho, 1e-11 * std::max(1.0, rho));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Domain) throw;
        }
    });
    const double dedupe = 1e-6 * rho;
    for (const auto& f : found) {
        if (!f.converged || !inside_open(f.q, rho)) continue;
        bool dup = false;
        for (const auto& root : out.roots) {
            if ((root - f.q).norm() <= dedupe) {
                dup = true;
                break;
            }
        }
        if (!dup) out.roots.push_back(f.q);
    }
    for (const auto& root : out.roots) {
        const double det = fd_jacobian(map, root, 1e-6 * std::max(1.0, rho)).determinant();
        if (std::abs(det) < 1e-8) {
            throw Error(ErrorKind::DegenerateRoot, "near-singular Jacobian at a root");
        }
        out.determinants.push_back(det);
        out.signs.push_back(det > 0.0 ? 1 : -1);
        out.degree += out.signs.back();
    }
    return out;
}

}  // namespace linksaddle
