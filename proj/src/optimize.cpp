#include "geobo/optimize.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace geobo {

Eigen::VectorXd truncated_cg(
    const Eigen::VectorXd& grad,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& hessvec, double delta,
    int max_iters, Eigen::VectorXd* hs_out) {
    if (delta <= 0) throw std::invalid_argument("truncated_cg: delta > 0 required");
    const int n = static_cast<int>(grad.size());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd hs = Eigen::VectorXd::Zero(n);
    if (hs_out) *hs_out = hs;
    double gn = grad.norm();
    if (gn == 0.0) return s;
    Eigen::VectorXd r = grad;
    Eigen::VectorXd p = -grad;

    auto to_boundary = [&](const Eigen::VectorXd& base, const Eigen::VectorXd& dir) {
        // positive root of |base + tau dir| = delta
        double a = dir.squaredNorm();
        double b = 2.0 * base.dot(dir);
        double c = base.squaredNorm() - delta * delta;
        double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
        return (-b + disc) / (2.0 * a);
    };
    auto finish = [&](const Eigen::VectorXd& step, const Eigen::VectorXd& hstep) {
        if (hs_out) *hs_out = hstep;
        return step;
    };

    double rr = r.squaredNorm();
    for (int k = 0; k < max_iters; ++k) {
        Eigen::VectorXd hp = hessvec(p);
        double php = p.dot(hp);
        if (php <= 0.0) {
            double tau = to_boundary(s, p);
            return finish(s + tau * p, hs + tau * hp);
        }
        double alpha = rr / php;
        Eigen::VectorXd s_next = s + alpha * p;
        if (s_next.norm() >= delta) {
            double tau = to_boundary(s, p);
            return finish(s + tau * p, hs + tau * hp);
        }
        s = s_next;
        hs += alpha * hp;
        r += alpha * hp;
        double rr_next = r.squaredNorm();
        if (std::sqrt(rr_next) <= 1e-14 * std::max(1.0, gn)) return finish(s, hs);
        p = -r + (rr_next / rr) * p;
        rr = rr_next;
    }
    return finish(s, hs);
}

Point project_feasible(const Point& p, const Manifold& m,
                       const std::optional<ConstraintBox>& constraint) {
    if (m.space == Space::Spd && constraint) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.mat());
        Eigen::VectorXd lam = es.eigenvalues();
        bool inside = lam.minCoeff() >= constraint->lambda_min &&
                      lam.maxCoeff() <= constraint->lambda_max;
        if (inside) return p;
        for (int i = 0; i < lam.size(); ++i)
            lam(i) = std::clamp(lam(i), constraint->lambda_min, constraint->lambda_max);
        return Point::spd(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
    }
    if (m.space == Space::Euclidean && m.box_lo.size() == m.dim) {
        Eigen::VectorXd v = p.vec();
        bool inside = true;
        for (int i = 0; i < m.dim; ++i) {
            double c = std::clamp(v(i), m.box_lo(i), m.box_hi(i));
            inside = inside && c == v(i);
            v(i) = c;
        }
        return inside ? p : Point::euclidean(v);
    }
    return p;
}

namespace {

struct Pullback {
    const Objective& objective;
    const Manifold& manifold;
    const std::optional<ConstraintBox>& constraint;
    Point base;

    Point retract(const Eigen::VectorXd& s) const {
        return project_feasible(exp_map({base, s}), manifold, constraint);
    }
    double operator()(const Eigen::VectorXd& s) const { return objective(retract(s)); }

    Eigen::VectorXd gradient(const Eigen::VectorXd& at, double h) const {
        const int n = static_cast<int>(at.size());
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd sp = at, sm = at;
            sp(i) += h;
            sm(i) -= h;
            g(i) = ((*this)(sp) - (*this)(sm)) / (2.0 * h);
        }
        return g;
    }
};

} // namespace

TrOutcome tr_minimize(const Objective& objective, const Manifold& m, const Point& x0,
                      const TrustRegionConfig& cfg,
                      const std::optional<ConstraintBox>& constraint) {
    const int dim = m.intrinsic_dim();
    double diameter = m.reference_diameter();
    double delta = cfg.delta0 > 0 ? cfg.delta0 : 0.1 * diameter;
    const double delta_max = cfg.delta_max > 0 ? cfg.delta_max : diameter;
    const int tcg_iters = cfg.tcg_max_iters > 0 ? cfg.tcg_max_iters : 2 * dim;

    TrOutcome out;
    out.x = project_feasible(x0, m, constraint);
    out.f = objective(out.x);
    if (!std::isfinite(out.f)) throw std::invalid_argument("tr_minimize: objective not finite at x0");
    out.accepted_values.push_back(out.f);

    for (int it = 0; it < cfg.max_iters; ++it) {
        out.iters = it + 1;
        Pullback pb{objective, m, constraint, out.x};
        double h = cfg.fd_step * std::max(1.0, out.x.rep().norm());
        Eigen::VectorXd g;
        try {
            g = pb.gradient(Eigen::VectorXd::Zero(dim), h);
        } catch (const std::exception&) {
            out.aborted = true;
            break;
        }
        if (!g.allFinite()) {
            out.aborted = true;
            break;
        }
        out.grad_norm = g.norm();
        if (out.grad_norm < cfg.grad_tol) break;

        // Forward-difference Hessian-vector products reuse the base gradient.
        auto hessvec = [&](const Eigen::VectorXd& v) {
            double vn = v.norm();
            if (vn == 0.0) return Eigen::VectorXd(Eigen::VectorXd::Zero(dim));
            Eigen::VectorXd gp = pb.gradient(h * v / vn, h);
            return Eigen::VectorXd((gp - g) * (vn / h));
        };

        Eigen::VectorXd step, hstep;
        double pred;
        try {
            step = truncated_cg(g, hessvec, delta, tcg_iters, &hstep);
            pred = -(g.dot(step) + 0.5 * step.dot(hstep));
        } catch (const std::exception&) {
            out.aborted = true;
            break;
        }
        if (step.norm() == 0.0) break;

        Point cand_raw = exp_map({out.x, step});
        Point cand = project_feasible(cand_raw, m, constraint);
        // Steps that the constraint projection moves by more than the trust
        // radius carry no useful model information; reject and shrink.
        bool overclipped = geodesic_distance(cand_raw, cand) > delta;

        double f_cand = overclipped ? std::numeric_limits<double>::infinity() : objective(cand);
        if (!overclipped && !std::isfinite(f_cand)) {
            out.aborted = true;
            break;
        }
        double rho = (pred > 0 && std::isfinite(f_cand)) ? (out.f - f_cand) / pred : -1.0;

        if (rho > cfg.rho_accept && f_cand < out.f) {
            out.x = cand;
            out.f = f_cand;
            out.accepted_values.push_back(out.f);
        }
        if (rho < 0.25) {
            delta *= 0.25;
            if (delta < 1e-12) break;
        } else if (rho > cfg.rho_expand && step.norm() >= 0.99 * delta) {
            delta = std::min(2.0 * delta, delta_max);
        }
    }
    return out;
}

TrOutcome multi_start(const Objective& objective, const Manifold& m, int n_starts,
                      const TrustRegionConfig& cfg, std::mt19937_64& rng,
                      const std::optional<ConstraintBox>& constraint, const Point* incumbent) {
    if (n_starts < 1) throw std::invalid_argument("multi_start: n_starts >= 1");
    std::vector<Point> starts;
    starts.reserve(n_starts + 1);
    for (int i = 0; i < n_starts; ++i)
        starts.push_back(project_feasible(random_point(rng, m), m, constraint));
    if (incumbent) starts.push_back(project_feasible(*incumbent, m, constraint));

    const int total = static_cast<int>(starts.size());
    std::vector<TrOutcome> outcomes(total);
    std::vector<char> failed(total, 0);
#pragma omp parallel for schedule(dynamic) if (total > 1)
    for (int i = 0; i < total; ++i) {
        try {
            outcomes[i] = tr_minimize(objective, m, starts[i], cfg, constraint);
        } catch (const std::exception&) {
            failed[i] = 1;
        }
    }
    int best = -1;
    for (int i = 0; i < total; ++i) {
        if (failed[i]) continue;
        if (best < 0 || outcomes[i].f < outcomes[best].f) best = i;
    }
    if (best < 0) throw std::runtime_error("multi_start: every start failed");
    return outcomes[best];
}

} // namespace geobo
