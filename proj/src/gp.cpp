#include "geobo/gp.hpp"

#include <Eigen/Cholesky>
#include <memory>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace geobo {

namespace {

struct CholResult {
    Eigen::MatrixXd l;
    double jitter;
};

// Cholesky of K + (noise + jitter) I with the jitter ladder 1e-10 -> 1e-4.
CholResult chol_with_jitter(const Eigen::MatrixXd& k, double noise) {
    for (double jitter = 1e-10; jitter <= 1.001e-4; jitter *= 10.0) {
        Eigen::MatrixXd kt = k;
        kt.diagonal().array() += noise + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(kt);
        if (llt.info() == Eigen::Success) return {Eigen::MatrixXd(llt.matrixL()), jitter};
    }
    throw std::runtime_error("GpModel: Cholesky failed after jitter escalation");
}

Eigen::MatrixXd gram_from_features(const KernelEvaluator& ev,
                                   const std::vector<std::vector<PairFeature>>& feats) {
    const int n = static_cast<int>(feats.size());
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = ev.from_feature(feats[i][j - i]);
            k(i, j) = v;
            k(j, i) = v;
        }
    return k;
}

} // namespace

class GpFitter {
public:
    GpFitter(std::vector<Point> inputs, Eigen::VectorXd targets, const FitConfig& cfg)
        : inputs_(std::move(inputs)), targets_(std::move(targets)), cfg_(cfg) {
        if (inputs_.empty() || static_cast<int>(inputs_.size()) != targets_.size())
            throw std::invalid_argument("GpModel::fit: inputs/targets size mismatch");
        if (!targets_.allFinite())
            throw std::invalid_argument("GpModel::fit: non-finite targets");
        mean_ = targets_.mean();
        resid_ = targets_.array() - mean_;
        // Pairwise features do not depend on the hyperparameters, so they
        // are computed once per fit.
        const int n = static_cast<int>(inputs_.size());
        feats_.resize(n);
        for (int i = 0; i < n; ++i) {
            feats_[i].reserve(n - i);
            for (int j = i; j < n; ++j)
                feats_[i].push_back(pair_feature(cfg_.spec, inputs_[i], inputs_[j]));
        }
    }

    // theta = (log kappa, log sigma2 [, log noise])
    double lml(const Eigen::VectorXd& theta) const {
        KernelSpec spec = cfg_.spec;
        spec.kappa = std::exp(theta(0));
        spec.sigma2 = std::exp(theta(1));
        double noise = cfg_.fit_noise ? std::exp(theta(2)) : cfg_.noise;
        KernelEvaluator ev(spec, inputs_[0].space(), inputs_[0].dim());
        Eigen::MatrixXd k = gram_from_features(ev, feats_);
        auto [l, jitter] = chol_with_jitter(k, noise);
        (void)jitter;
        Eigen::VectorXd a = l.triangularView<Eigen::Lower>().solve(resid_);
        double n = static_cast<double>(targets_.size());
        return -0.5 * a.squaredNorm() - l.diagonal().array().log().sum() -
               0.5 * n * std::log(2.0 * M_PI);
    }

    Eigen::VectorXd clamp(Eigen::VectorXd theta) const {
        const FitBounds& b = cfg_.bounds;
        theta(0) = std::clamp(theta(0), std::log(b.kappa_lo), std::log(b.kappa_hi));
        theta(1) = std::clamp(theta(1), std::log(b.sigma2_lo), std::log(b.sigma2_hi));
        if (cfg_.fit_noise)
            theta(2) = std::clamp(theta(2), std::log(b.noise_lo), std::log(b.noise_hi));
        return theta;
    }

    // Projected gradient ascent with backtracking; gradients by central
    // finite differences in the log parameters.
    std::pair<Eigen::VectorXd, double> ascend(Eigen::VectorXd theta) const {
        theta = clamp(theta);
        double f = lml(theta);
        const double h = 1e-4;
        for (int it = 0; it < cfg_.max_iters; ++it) {
            Eigen::VectorXd g(theta.size());
            for (int j = 0; j < theta.size(); ++j) {
                Eigen::VectorXd tp = theta, tm = theta;
                tp(j) += h;
                tm(j) -= h;
                g(j) = (lml(clamp(tp)) - lml(clamp(tm))) / (2.0 * h);
            }
            double gn = g.norm();
            if (gn < 1e-5) break;
            double step = 0.5 / std::max(1.0, gn);
            bool improved = false;
            for (int bt = 0; bt < 8; ++bt) {
                Eigen::VectorXd cand = clamp(theta + step * g);
                double fc = lml(cand);
                if (fc > f) {
                    double gain = fc - f;
                    theta = cand;
                    f = fc;
                    improved = true;
                    if (gain < 1e-7 * (1.0 + std::abs(f))) it = cfg_.max_iters;
                    break;
                }
                step *= 0.5;
            }
            if (!improved) break;
        }
        return {theta, f};
    }

    std::vector<Point> inputs_;
    Eigen::VectorXd targets_;
    FitConfig cfg_;
    double mean_ = 0.0;
    Eigen::VectorXd resid_;
    std::vector<std::vector<PairFeature>> feats_;
};

GpModel GpModel::with_params(std::vector<Point> inputs, Eigen::VectorXd targets,
                             const KernelSpec& spec, double noise) {
    if (inputs.empty() || static_cast<int>(inputs.size()) != targets.size())
        throw std::invalid_argument("GpModel: inputs/targets size mismatch");
    if (!targets.allFinite()) throw std::invalid_argument("GpModel: non-finite targets");
    GpModel m;
    m.inputs_ = std::move(inputs);
    m.targets_ = std::move(targets);
    m.spec_ = spec;
    m.noise_ = noise;
    m.mean_ = m.targets_.mean();
    Eigen::MatrixXd k = gram(spec, m.inputs_);
    auto [l, jitter] = chol_with_jitter(k, noise);
    m.chol_ = l;
    m.jitter_ = jitter;
    Eigen::VectorXd resid = m.targets_.array() - m.mean_;
    Eigen::VectorXd z = m.chol_.triangularView<Eigen::Lower>().solve(resid);
    m.alpha_ = m.chol_.transpose().triangularView<Eigen::Upper>().solve(z);
    double n = static_cast<double>(m.targets_.size());
    m.lml_ = -0.5 * resid.dot(m.alpha_) - m.chol_.diagonal().array().log().sum() -
             0.5 * n * std::log(2.0 * M_PI);
    m.evaluator_ = std::make_shared<const KernelEvaluator>(spec, m.inputs_[0].space(),
                                                           m.inputs_[0].dim());
    return m;
}

GpModel GpModel::fit(std::vector<Point> inputs, Eigen::VectorXd targets, const FitConfig& cfg,
                     std::mt19937_64& rng) {
    std::vector<double> nus =
        cfg.nu_grid.empty() ? std::vector<double>{cfg.spec.nu} : cfg.nu_grid;
    double best_lml = -std::numeric_limits<double>::infinity();
    KernelSpec best_spec = cfg.spec;
    double best_noise = cfg.noise;

    for (double nu : nus) {
        FitConfig c = cfg;
        c.spec.nu = nu;
        GpFitter fitter(inputs, targets, c);
        const FitBounds& b = cfg.bounds;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int dim = c.fit_noise ? 3 : 2;
        for (int s = 0; s < cfg.n_starts; ++s) {
            Eigen::VectorXd theta(dim);
            if (s == 0) {
                // Warm start from the spec as given.
                theta(0) = std::log(cfg.spec.kappa);
                theta(1) = std::log(cfg.spec.sigma2);
                if (c.fit_noise) theta(2) = std::log(cfg.noise);
            } else {
                auto draw = [&](double lo, double hi) {
                    return std::log(lo) + unif(rng) * (std::log(hi) - std::log(lo));
                };
                theta(0) = draw(b.kappa_lo, b.kappa_hi);
                theta(1) = draw(b.sigma2_lo, b.sigma2_hi);
                if (c.fit_noise) theta(2) = draw(b.noise_lo, b.noise_hi);
            }
            auto [t_opt, f_opt] = fitter.ascend(theta);
            if (f_opt > best_lml) {
                best_lml = f_opt;
                best_spec = c.spec;
                best_spec.kappa = std::exp(t_opt(0));
                best_spec.sigma2 = std::exp(t_opt(1));
                best_noise = c.fit_noise ? std::exp(t_opt(2)) : cfg.noise;
            }
        }
    }
    return with_params(std::move(inputs), std::move(targets), best_spec, best_noise);
}

std::pair<double, double> GpModel::posterior(const Point& x) const {
    const int n = size();
    const KernelEvaluator& ev = *evaluator_;
    Eigen::VectorXd ks(n);
    for (int i = 0; i < n; ++i) ks(i) = ev(x, inputs_[i]);
    double mean = mean_ + ks.dot(alpha_);
    Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
    double var = spec_.sigma2 - v.squaredNorm();
    return {mean, std::max(0.0, var)};
}

double GpModel::lml_grad_trace(int param) const {
    const double h = 1e-5;
    const int n = size();
    Eigen::MatrixXd kdot;
    if (param == 0) {
        KernelSpec sp = spec_, sm = spec_;
        sp.kappa = spec_.kappa * std::exp(h);
        sm.kappa = spec_.kappa * std::exp(-h);
        kdot = (gram(sp, inputs_) - gram(sm, inputs_)) / (2.0 * h);
    } else if (param == 1) {
        // K is linear in sigma2, so dK/dlog sigma2 = K.
        kdot = gram(spec_, inputs_);
    } else {
        kdot = noise_ * Eigen::MatrixXd::Identity(n, n);
    }
    Eigen::MatrixXd kinv = Eigen::MatrixXd::Identity(n, n);
    chol_.triangularView<Eigen::Lower>().solveInPlace(kinv);
    chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(kinv);
    Eigen::MatrixXd outer = alpha_ * alpha_.transpose();
    return 0.5 * ((outer - kinv).array() * kdot.array()).sum();
}

double GpModel::min_gram_eigenvalue() const {
    Eigen::MatrixXd k = gram(spec_, inputs_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace geobo
