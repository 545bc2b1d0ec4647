#include <doctest.h>

#include "geobo/gp.hpp"
#include "geobo/rng.hpp"
#include "helpers.hpp"

#include <cmath>

using namespace geobo;

namespace {

Point torus1(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return Point::torus(v);
}

KernelSpec t1_se(double kappa, double sigma2 = 1.0) {
    KernelSpec s;
    s.family = KernelFamily::RiemannianSe;
    s.nu = std::numeric_limits<double>::infinity();
    s.kappa = kappa;
    s.sigma2 = sigma2;
    return s;
}

std::vector<Point> torus_points(std::initializer_list<double> xs) {
    std::vector<Point> out;
    for (double x : xs) out.push_back(torus1(x));
    return out;
}

} // namespace

TEST_CASE("single observation interpolates") {
    auto inputs = torus_points({0.3});
    Eigen::VectorXd y(1);
    y << 1.7;
    GpModel m = GpModel::with_params(inputs, y, t1_se(0.3), 1e-12);
    auto [mu, var] = m.posterior(inputs[0]);
    CHECK(mu == doctest::Approx(1.7).epsilon(1e-8));
    CHECK(var < 1e-6);
    CHECK(var >= 0.0);
}

TEST_CASE("constant targets push sigma2 to the lower bound") {
    auto rng = make_rng(2101);
    auto inputs = torus_points({0.1, 0.35, 0.6, 0.85});
    Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 2.5);
    FitConfig fc;
    fc.spec = t1_se(0.3);
    fc.bounds.sigma2_lo = 1e-6;
    fc.bounds.sigma2_hi = 10.0;
    GpModel m = GpModel::fit(inputs, y, fc, rng);
    CHECK(m.spec().sigma2 == doctest::Approx(1e-6).epsilon(0.5));
    auto [mu, var] = m.posterior(torus1(0.22));
    CHECK(mu == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("length scale recovery on T1 in the median") {
    // 10 samples from a known GP prior with kappa = 0.3; the fitted
    // log-kappa lands within +-1 of the truth in the median over 20 seeds.
    const double true_kappa = 0.3;
    KernelSpec spec = t1_se(true_kappa);
    std::vector<double> errs;
    for (int seed = 0; seed < 20; ++seed) {
        auto rng = make_rng(3000 + seed);
        std::vector<Point> xs;
        for (int i = 0; i < 10; ++i) xs.push_back(random_point(rng, Manifold::torus(1)));
        Eigen::MatrixXd k = gram(spec, xs);
        k.diagonal().array() += 1e-10;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        std::normal_distribution<double> gauss;
        Eigen::VectorXd z(10);
        for (int i = 0; i < 10; ++i) z(i) = gauss(rng);
        Eigen::VectorXd y = Eigen::MatrixXd(llt.matrixL()) * z;

        FitConfig fc;
        fc.spec = t1_se(0.5);
        fc.bounds.kappa_lo = 1e-2;
        fc.bounds.kappa_hi = 10.0;
        GpModel m = GpModel::fit(xs, y, fc, rng);
        errs.push_back(std::abs(std::log(m.spec().kappa) - std::log(true_kappa)));
    }
    std::sort(errs.begin(), errs.end());
    CHECK(errs[errs.size() / 2] <= 1.0);
}

TEST_CASE("log marginal likelihood closed cases") {
    // n = 1, Ktilde ~ [[1]], y = m: -log(2 pi)/2.
    auto inputs = torus_points({0.4});
    Eigen::VectorXd y(1);
    y << 0.7; // mean() = y, resid = 0
    GpModel m = GpModel::with_params(inputs, y, t1_se(0.3, 1.0), 0.0);
    CHECK(m.log_marginal_likelihood() ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-6));
}

TEST_CASE("finite-difference evidence gradient matches the trace identity") {
    auto rng = make_rng(2401);
    std::vector<Point> xs;
    for (int i = 0; i < 8; ++i) xs.push_back(random_point(rng, Manifold::torus(1)));
    std::normal_distribution<double> gauss;
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) y(i) = gauss(rng);

    KernelSpec spec = t1_se(0.4, 1.3);
    double noise = 1e-4;
    auto lml_at = [&](double kappa, double sigma2, double nz) {
        KernelSpec s = spec;
        s.kappa = kappa;
        s.sigma2 = sigma2;
        return GpModel::with_params(xs, y, s, nz).log_marginal_likelihood();
    };
    GpModel m = GpModel::with_params(xs, y, spec, noise);
    double h = 1e-5;
    double fd_kappa = (lml_at(spec.kappa * std::exp(h), spec.sigma2, noise) -
                       lml_at(spec.kappa * std::exp(-h), spec.sigma2, noise)) /
                      (2 * h);
    double fd_sigma = (lml_at(spec.kappa, spec.sigma2 * std::exp(h), noise) -
                       lml_at(spec.kappa, spec.sigma2 * std::exp(-h), noise)) /
                      (2 * h);
    double fd_noise = (lml_at(spec.kappa, spec.sigma2, noise * std::exp(h)) -
                       lml_at(spec.kappa, spec.sigma2, noise * std::exp(-h))) /
                      (2 * h);
    CHECK(m.lml_grad_trace(0) == doctest::Approx(fd_kappa).epsilon(1e-4));
    CHECK(m.lml_grad_trace(1) == doctest::Approx(fd_sigma).epsilon(1e-4));
    CHECK(m.lml_grad_trace(2) == doctest::Approx(fd_noise).epsilon(1e-3));
}

TEST_CASE("a conflicting duplicate input decreases the evidence") {
    auto xs = torus_points({0.1, 0.4, 0.7});
    Eigen::VectorXd y(3);
    y << 0.3, -0.2, 0.9;
    GpModel base = GpModel::with_params(xs, y, t1_se(0.3), 1e-6);

    // Same input observed again with a clashing target: the misfit term
    // penalizes the near-singular covariance row.
    auto xs2 = xs;
    xs2.push_back(xs[1]);
    Eigen::VectorXd y2(4);
    y2 << 0.3, -0.2, 0.9, 0.4;
    GpModel dup = GpModel::with_params(xs2, y2, t1_se(0.3), 1e-6);
    CHECK(dup.log_marginal_likelihood() < base.log_marginal_likelihood());

    // An exact duplicate keeps the complexity penalty finite (jitter
    // escalation succeeds, no degenerate determinant).
    Eigen::VectorXd y3(4);
    y3 << 0.3, -0.2, 0.9, -0.2;
    GpModel exact = GpModel::with_params(xs2, y3, t1_se(0.3), 1e-6);
    CHECK(std::isfinite(exact.log_marginal_likelihood()));
}

TEST_CASE("posterior far from data reverts to the prior") {
    auto xs = torus_points({0.0});
    Eigen::VectorXd y(1);
    y << 3.0;
    KernelSpec spec = t1_se(0.01, 2.0);
    GpModel m = GpModel::with_params(xs, y, spec, 1e-10);
    auto [mu, var] = m.posterior(torus1(0.5));
    CHECK(mu == doctest::Approx(m.mean()).epsilon(1e-6));
    CHECK(var == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("posterior matches a dense-solve oracle") {
    auto rng = make_rng(2701);
    auto xs = torus_points({0.05, 0.22, 0.48, 0.66, 0.91});
    std::normal_distribution<double> gauss;
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) y(i) = gauss(rng);
    KernelSpec spec = t1_se(0.25, 1.5);
    double noise = 1e-6;
    GpModel m = GpModel::with_params(xs, y, spec, noise);

    Eigen::MatrixXd k = gram(spec, xs);
    Eigen::MatrixXd kt = k;
    kt.diagonal().array() += noise + m.jitter();
    for (double q : {0.1, 0.37, 0.73}) {
        Point xq = torus1(q);
        Eigen::VectorXd ks(5);
        for (int i = 0; i < 5; ++i) ks(i) = kernel_eval(spec, xq, xs[i]);
        Eigen::VectorXd resid = y.array() - m.mean();
        double mu_oracle = m.mean() + ks.dot(kt.ldlt().solve(resid));
        double var_oracle = spec.sigma2 - ks.dot(kt.ldlt().solve(ks));
        auto [mu, var] = m.posterior(xq);
        CHECK(mu == doctest::Approx(mu_oracle).epsilon(1e-10));
        CHECK(var == doctest::Approx(var_oracle).epsilon(1e-8));
    }
}

TEST_CASE("predictive variance stays in [0, sigma2]") {
    auto rng = make_rng(2801);
    Manifold s2 = Manifold::sphere(2);
    std::vector<Point> xs;
    for (int i = 0; i < 12; ++i) xs.push_back(random_point(rng, s2));
    std::normal_distribution<double> gauss;
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) y(i) = gauss(rng);
    KernelSpec spec;
    spec.family = KernelFamily::RiemannianMatern;
    spec.nu = 1.5;
    spec.kappa = 0.5;
    spec.sigma2 = 1.2;
    GpModel m = GpModel::with_params(xs, y, spec, 1e-6);
    for (int i = 0; i < 1000; ++i) {
        auto [mu, var] = m.posterior(random_point(rng, s2));
        CHECK(var >= 0.0);
        CHECK(var <= 1.2 + 1e-8);
    }
}

TEST_CASE("posterior mean is isometry invariant") {
    auto rng = make_rng(2901);
    for (const auto& m : geobo::testing::representative_manifolds()) {
        if (m.space == Space::Euclidean || (m.space == Space::Hyperbolic && m.dim == 2))
            continue; // H2 exercised through H3; quadrature cost
        std::vector<Point> xs;
        for (int i = 0; i < 6; ++i) xs.push_back(random_point(rng, m));
        std::normal_distribution<double> gauss;
        Eigen::VectorXd y(6);
        for (int i = 0; i < 6; ++i) y(i) = gauss(rng);
        KernelSpec spec;
        spec.family = KernelFamily::RiemannianSe;
        spec.nu = std::numeric_limits<double>::infinity();
        spec.kappa = 0.6;
        GpModel model = GpModel::with_params(xs, y, spec, 1e-8);

        auto iso = geobo::testing::random_isometry(rng, m);
        std::vector<Point> txs;
        for (const auto& x : xs) txs.push_back(iso(x));
        GpModel tmodel = GpModel::with_params(txs, y, spec, 1e-8);
        for (int i = 0; i < 5; ++i) {
            Point q = random_point(rng, m);
            double mu = model.posterior(q).first;
            double tmu = tmodel.posterior(iso(q)).first;
            CHECK(std::abs(mu - tmu) < 1e-7 * (1.0 + std::abs(mu)));
        }
    }
}

TEST_CASE("conditioning on more data never inflates the variance") {
    auto rng = make_rng(3001);
    Manifold t1 = Manifold::torus(1);
    std::vector<Point> xs;
    for (int i = 0; i < 7; ++i) xs.push_back(random_point(rng, t1));
    std::normal_distribution<double> gauss;
    Eigen::VectorXd y(7);
    for (int i = 0; i < 7; ++i) y(i) = gauss(rng);
    KernelSpec spec = t1_se(0.3);
    GpModel small = GpModel::with_params({xs.begin(), xs.begin() + 6},
                                         y.head(6), spec, 0.0);
    GpModel big = GpModel::with_params(xs, y, spec, 0.0);
    for (int i = 0; i < 100; ++i) {
        Point q = random_point(rng, t1);
        CHECK(big.posterior(q).second <= small.posterior(q).second + 1e-9);
    }
}

TEST_CASE("fit rejects bad input") {
    auto xs = torus_points({0.2, 0.6});
    Eigen::VectorXd y(2);
    y << 1.0, std::numeric_limits<double>::quiet_NaN();
    FitConfig fc;
    fc.spec = t1_se(0.3);
    auto rng = make_rng(1);
    CHECK_THROWS_AS(GpModel::fit(xs, y, fc, rng), std::invalid_argument);
    Eigen::VectorXd y1(1);
    y1 << 1.0;
    CHECK_THROWS_AS(GpModel::fit(xs, y1, fc, rng), std::invalid_argument);
}
