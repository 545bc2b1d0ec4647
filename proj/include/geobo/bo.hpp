#pragma once

#include "geobo/gp.hpp"
#include "geobo/optimize.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace geobo {

struct BoConfig {
    int n_init = 5;
    int n_iters = 50;
    int acq_starts = 8;
    std::uint64_t seed = 0;
    KernelSpec kernel; // family/nu/truncation; kappa and sigma2 are refit each iteration
    FitBounds fit_bounds;
    bool fit_bounds_set = false; // false: derive from the manifold and observed spread
    double noise_floor = 1e-6;
    bool fit_noise = false; // benchmark objectives are observed noise-free
    int fit_starts = 5;     // warm start plus fresh restarts
    TrustRegionConfig tr;
    std::optional<ConstraintBox> constraint;
    bool random_search = false; // baseline: query uniformly, no model
};

struct BoRecord {
    int iter; // 0-based over init + bo phases
    Point query;
    double y;
    double best_y;
};

struct BoTrace {
    std::vector<BoRecord> records;
    Point recommendation; // best observed query
    double best_y = 0.0;
    bool aborted = false;
    // Most negative Gram eigenvalue seen across refits (naive kernel only).
    std::optional<double> min_gram_eigenvalue;
};

// EI = s (z Phi(z) + phi(z)), z = (best_y - mu)/s, minimization convention;
// max(best_y - mu, 0) when s vanishes.
double expected_improvement(const GpModel& model, const Point& x, double best_y);
double expected_improvement(double mu, double var, double best_y);

// Draw n_init points, then iterate: refit the GP, maximize EI with the
// trust-region multi-start, evaluate, record. Deterministic given the
// seed. A failed objective evaluation is retried once at a fresh random
// query; two consecutive failures abort with the partial trace.
BoTrace bo_run(const Objective& objective, const Manifold& m, const BoConfig& cfg);

// r_t = min_{i<=t} y_i - f_star per record.
std::vector<double> simple_regret(const BoTrace& trace, double f_star);

} // namespace geobo
