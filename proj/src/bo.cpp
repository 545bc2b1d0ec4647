#include "geobo/bo.hpp"

#include "geobo/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace geobo {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

FitBounds default_bounds(const Manifold& m, const Eigen::VectorXd& targets) {
    FitBounds b;
    double diam = m.reference_diameter();
    b.kappa_lo = 5e-3 * diam;
    b.kappa_hi = 2.0 * diam;
    double var_y = 1e-8;
    if (targets.size() > 1) {
        double mu = targets.mean();
        var_y = std::max(var_y, (targets.array() - mu).square().mean());
    }
    b.sigma2_lo = 1e-4 * var_y;
    b.sigma2_hi = 1e3 * var_y;
    return b;
}

} // namespace

double expected_improvement(double mu, double var, double best_y) {
    double s = std::sqrt(std::max(0.0, var));
    if (s < 1e-12) return std::max(best_y - mu, 0.0);
    double z = (best_y - mu) / s;
    return s * (z * normal_cdf(z) + normal_pdf(z));
}

double expected_improvement(const GpModel& model, const Point& x, double best_y) {
    auto [mu, var] = model.posterior(x);
    return expected_improvement(mu, var, best_y);
}

BoTrace bo_run(const Objective& objective, const Manifold& m, const BoConfig& cfg) {
    if (cfg.n_init < 1 || cfg.n_iters < 0)
        throw std::invalid_argument("bo_run: n_init >= 1 and n_iters >= 0");
    auto rng_init = make_rng(cfg.seed, 0xB01);
    auto rng_fit = make_rng(cfg.seed, 0xB02);
    auto rng_acq = make_rng(cfg.seed, 0xB03);
    auto rng_retry = make_rng(cfg.seed, 0xB04);

    Manifold domain = m;
    if (m.space == Space::Spd && cfg.constraint) {
        domain.spd_lambda_min = cfg.constraint->lambda_min;
        domain.spd_lambda_max = cfg.constraint->lambda_max;
    }

    BoTrace trace;
    std::vector<Point> xs;
    Eigen::VectorXd ys;

    // Evaluate with one retry at a fresh random query; a second consecutive
    // failure aborts with the partial trace.
    auto evaluate = [&](Point q) -> std::optional<std::pair<Point, double>> {
        for (int attempt = 0; attempt < 2; ++attempt) {
            double y = std::numeric_limits<double>::quiet_NaN();
            try {
                y = objective(q);
            } catch (const std::exception&) {
            }
            if (std::isfinite(y)) return std::make_pair(q, y);
            q = project_feasible(random_point(rng_retry, domain), domain, cfg.constraint);
        }
        return std::nullopt;
    };

    auto append = [&](const Point& q, double y) {
        int iter = static_cast<int>(xs.size());
        xs.push_back(q);
        ys.conservativeResize(xs.size());
        ys(iter) = y;
        double best = trace.records.empty() ? y : std::min(y, trace.records.back().best_y);
        trace.records.push_back({iter, q, y, best});
        trace.best_y = best;
    };

    for (int i = 0; i < cfg.n_init; ++i) {
        Point q = project_feasible(random_point(rng_init, domain), domain, cfg.constraint);
        auto r = evaluate(q);
        if (!r) {
            trace.aborted = true;
            break;
        }
        append(r->first, r->second);
    }

    KernelSpec warm = cfg.kernel;
    warm.kappa = 0.3 * domain.reference_diameter();
    warm.sigma2 = 1.0;

    for (int it = 0; it < cfg.n_iters && !trace.aborted; ++it) {
        Point next;
        if (cfg.random_search) {
            next = project_feasible(random_point(rng_acq, domain), domain, cfg.constraint);
        } else {
            FitConfig fc;
            fc.spec = warm;
            fc.bounds = cfg.fit_bounds_set ? cfg.fit_bounds : default_bounds(domain, ys);
            fc.n_starts = cfg.fit_starts;
            fc.max_iters = 15; // warm-started refits converge quickly
            fc.fit_noise = cfg.fit_noise;
            fc.noise = cfg.noise_floor;
            GpModel model = GpModel::fit(xs, ys, fc, rng_fit);
            warm = model.spec(); // next iteration warm-starts here

            if (cfg.kernel.family == KernelFamily::NaiveGeodesicSe) {
                double me = model.min_gram_eigenvalue();
                trace.min_gram_eigenvalue =
                    trace.min_gram_eigenvalue ? std::min(*trace.min_gram_eigenvalue, me) : me;
            }

            double best_y = trace.best_y;
            auto neg_ei = [&](const Point& p) {
                return -expected_improvement(model, p, best_y);
            };
            int best_idx = 0;
            for (int i = 1; i < static_cast<int>(xs.size()); ++i)
                if (ys(i) < ys(best_idx)) best_idx = i;
            TrOutcome acq = multi_start(neg_ei, domain, cfg.acq_starts, cfg.tr, rng_acq,
                                        cfg.constraint, &xs[best_idx]);
            next = acq.x;
        }
        auto r = evaluate(next);
        if (!r) {
            trace.aborted = true;
            break;
        }
        append(r->first, r->second);
    }

    if (!trace.records.empty()) {
        int best_idx = 0;
        for (int i = 1; i < static_cast<int>(xs.size()); ++i)
            if (ys(i) < ys(best_idx)) best_idx = i;
        trace.recommendation = xs[best_idx];
    }
    return trace;
}

std::vector<double> simple_regret(const BoTrace& trace, double f_star) {
    std::vector<double> r;
    r.reserve(trace.records.size());
    for (const auto& rec : trace.records) r.push_back(rec.best_y - f_star);
    return r;
}

} // namespace geobo
