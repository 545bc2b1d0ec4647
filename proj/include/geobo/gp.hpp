#pragma once

#include "geobo/kernel.hpp"
#include "geobo/manifold.hpp"

#include <Eigen/Dense>
#include <memory>
#include <random>
#include <vector>

namespace geobo {

struct FitBounds {
    double kappa_lo = 1e-2, kappa_hi = 1e2;
    double sigma2_lo = 1e-6, sigma2_hi = 1e3;
    double noise_lo = 1e-6, noise_hi = 1e-1;
};

struct FitConfig {
    KernelSpec spec; // family, nu, truncation fixed; kappa/sigma2 are the warm start
    FitBounds bounds;
    int n_starts = 5;
    int max_iters = 40;
    bool fit_noise = false;
    double noise = 1e-6;
    std::vector<double> nu_grid; // optional discrete smoothness search
};

// Immutable fitted GP with cached Cholesky factor and weights. Safe for
// concurrent posterior queries.
class GpModel {
public:
    // Hyperparameters maximize the log marginal likelihood over
    // log-parameters by multi-start gradient ascent with central
    // finite-difference gradients, clamped to the bounds.
    static GpModel fit(std::vector<Point> inputs, Eigen::VectorXd targets,
                       const FitConfig& cfg, std::mt19937_64& rng);

    // Build the caches at fixed hyperparameters (no optimization).
    static GpModel with_params(std::vector<Point> inputs, Eigen::VectorXd targets,
                               const KernelSpec& spec, double noise);

    double log_marginal_likelihood() const { return lml_; }
    std::pair<double, double> posterior(const Point& x) const;

    const KernelSpec& spec() const { return spec_; }
    double noise() const { return noise_; }
    double mean() const { return mean_; }
    double jitter() const { return jitter_; }
    int size() const { return static_cast<int>(inputs_.size()); }
    const std::vector<Point>& inputs() const { return inputs_; }
    const Eigen::VectorXd& targets() const { return targets_; }
    const Eigen::MatrixXd& chol() const { return chol_; }

    // d LML / d log-parameter through the trace identity
    // 0.5 tr((alpha alpha^T - Ktilde^{-1}) dK/dtheta), with dK/dtheta by a
    // central difference of the Gram matrix. Used to cross-check the
    // finite-difference gradient of the evidence itself.
    double lml_grad_trace(int param) const; // 0 = log kappa, 1 = log sigma2, 2 = log noise

    double min_gram_eigenvalue() const; // diagnostic, O(n^3)

private:
    GpModel() = default;

    std::vector<Point> inputs_;
    Eigen::VectorXd targets_;
    KernelSpec spec_;
    double noise_ = 1e-6;
    double mean_ = 0.0;
    double jitter_ = 0.0;
    double lml_ = 0.0;
    Eigen::MatrixXd chol_; // lower factor of K + (noise + jitter) I
    Eigen::VectorXd alpha_;
    std::shared_ptr<const KernelEvaluator> evaluator_; // posterior hot path

    friend class GpFitter;
};

} // namespace geobo
