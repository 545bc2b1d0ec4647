#pragma once

#include "geobo/manifold.hpp"

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <random>

namespace geobo {

struct TrustRegionConfig {
    double delta0 = 0.0;    // 0: 0.1 * manifold reference diameter
    double delta_max = 0.0; // 0: reference diameter
    double rho_accept = 0.1;
    double rho_expand = 0.75;
    int max_iters = 100;
    double grad_tol = 1e-6;
    int tcg_max_iters = 0; // 0: 2 * intrinsic dimension
    double fd_step = 1e-5; // scaled by max(1, |x|)
};

// Eigenvalue box for SPD search domains.
struct ConstraintBox {
    double lambda_min = 1e-3;
    double lambda_max = 5.0;
};

struct TrOutcome {
    Point x;
    double f = 0.0;
    int iters = 0;
    double grad_norm = 0.0;
    bool aborted = false; // non-finite objective; best-so-far returned
    std::vector<double> accepted_values;
};

using Objective = std::function<double(const Point&)>;

// Steihaug-Toint truncated conjugate gradients for the trust-region
// subproblem min g.s + s.Hs/2, |s| <= delta. Returns the boundary step on
// negative curvature or radius breach. When hs_out is given it receives
// the accumulated H s, so the model decrease costs no extra product.
Eigen::VectorXd truncated_cg(
    const Eigen::VectorXd& grad,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& hessvec, double delta,
    int max_iters, Eigen::VectorXd* hs_out = nullptr);

// Riemannian trust-region minimization. The quadratic model uses a
// central finite-difference gradient along tangent_basis(x) and
// finite-difference Hessian-vector products inside truncated CG;
// candidates retract through exp_map. With a ConstraintBox (SPD domains)
// candidates are projected by eigenvalue clipping before evaluation and
// steps that clip by more than the trust radius are rejected. Euclidean
// candidates are clipped into the manifold's sampling box.
TrOutcome tr_minimize(const Objective& objective, const Manifold& m, const Point& x0,
                      const TrustRegionConfig& cfg,
                      const std::optional<ConstraintBox>& constraint = std::nullopt);

// tr_minimize from n_starts random initializations plus an optional
// incumbent; returns the best outcome (ties broken by start index).
TrOutcome multi_start(const Objective& objective, const Manifold& m, int n_starts,
                      const TrustRegionConfig& cfg, std::mt19937_64& rng,
                      const std::optional<ConstraintBox>& constraint = std::nullopt,
                      const Point* incumbent = nullptr);

// Project into the constraint set (SPD eigenvalue box / Euclidean box);
// identity elsewhere.
Point project_feasible(const Point& p, const Manifold& m,
                       const std::optional<ConstraintBox>& constraint);

} // namespace geobo
