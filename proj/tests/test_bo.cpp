#include <doctest.h>

#include "geobo/bo.hpp"
#include "geobo/rng.hpp"

#include <cmath>

using namespace geobo;

namespace {

KernelSpec sphere_se(double kappa) {
    KernelSpec s;
    s.family = KernelFamily::RiemannianSe;
    s.nu = std::numeric_limits<double>::infinity();
    s.kappa = kappa;
    return s;
}

} // namespace

TEST_CASE("expected improvement closed forms and Monte Carlo oracle") {
    CHECK(expected_improvement(0.0, 0.25, 0.0) ==
          doctest::Approx(0.5 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
    CHECK(expected_improvement(1.0, 0.0, 0.0) == 0.0);
    CHECK(expected_improvement(-1.0, 0.0, 0.0) == doctest::Approx(1.0));

    // mu = best - 1, s = 0.5 against a 1e6-sample Monte Carlo estimate.
    auto rng = make_rng(5100);
    std::normal_distribution<double> gauss;
    double best = 0.0, mu = -1.0, s = 0.5;
    double acc = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) acc += std::max(best - (mu + s * gauss(rng)), 0.0);
    acc /= n;
    CHECK(expected_improvement(mu, s * s, best) == doctest::Approx(acc).epsilon(1e-3));
}

TEST_CASE("n_iters = 0 yields exactly the initial design") {
    Manifold s2 = Manifold::sphere(2);
    BoConfig cfg;
    cfg.n_init = 5;
    cfg.n_iters = 0;
    cfg.seed = 7;
    cfg.kernel = sphere_se(0.5);
    BoTrace t = bo_run([](const Point& p) { return p.vec()(0); }, s2, cfg);
    CHECK(t.records.size() == 5);
    CHECK_FALSE(t.aborted);
}

TEST_CASE("constant objective stays finite and feasible") {
    Manifold spd = Manifold::spd(2);
    BoConfig cfg;
    cfg.n_init = 3;
    cfg.n_iters = 4;
    cfg.seed = 9;
    cfg.kernel = sphere_se(1.0);
    cfg.kernel.family = KernelFamily::RiemannianSe;
    cfg.constraint = ConstraintBox{0.001, 5.0};
    cfg.tr.max_iters = 20;
    BoTrace t = bo_run([](const Point&) { return 1.0; }, spd, cfg);
    CHECK(t.records.size() == 7);
    for (const auto& r : t.records) {
        CHECK(r.best_y == 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.query.mat(), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= 0.001 - 1e-12);
        CHECK(es.eigenvalues().maxCoeff() <= 5.0 + 1e-12);
    }
}

TEST_CASE("identical seeds reproduce the trace bitwise") {
    Manifold t2 = Manifold::torus(2);
    BoConfig cfg;
    cfg.n_init = 4;
    cfg.n_iters = 6;
    cfg.seed = 123;
    cfg.kernel = sphere_se(0.4);
    cfg.tr.max_iters = 25;
    Objective f = [](const Point& p) {
        return std::cos(2 * M_PI * p.vec()(0)) + std::sin(2 * M_PI * p.vec()(1));
    };
    BoTrace a = bo_run(f, t2, cfg);
    BoTrace b = bo_run(f, t2, cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].y == b.records[i].y);
        CHECK((a.records[i].query.rep() - b.records[i].query.rep()).norm() == 0.0);
    }
}

TEST_CASE("incumbent is monotone and regret floors at the optimum") {
    Manifold s2 = Manifold::sphere(2);
    BoConfig cfg;
    cfg.n_init = 5;
    cfg.n_iters = 10;
    cfg.seed = 31;
    cfg.kernel = sphere_se(0.5);
    cfg.tr.max_iters = 25;
    Objective f = [](const Point& p) { return -p.vec()(2); };
    BoTrace t = bo_run(f, s2, cfg);
    for (std::size_t i = 1; i < t.records.size(); ++i)
        CHECK(t.records[i].best_y <= t.records[i - 1].best_y);
    auto reg = simple_regret(t, -1.0);
    for (std::size_t i = 1; i < reg.size(); ++i) {
        CHECK(reg[i] <= reg[i - 1] + 1e-15);
        CHECK(reg[i] >= 0.0);
    }
}

TEST_CASE("objective failures retry once then abort") {
    Manifold s2 = Manifold::sphere(2);
    // Fail on exactly one call: the retry recovers, no abort.
    {
        int calls = 0;
        Objective f = [&](const Point& p) {
            if (++calls == 3) throw std::runtime_error("flaky");
            return p.vec()(0);
        };
        BoConfig cfg;
        cfg.n_init = 4;
        cfg.n_iters = 0;
        cfg.seed = 3;
        cfg.kernel = sphere_se(0.5);
        BoTrace t = bo_run(f, s2, cfg);
        CHECK_FALSE(t.aborted);
        CHECK(t.records.size() == 4);
    }
    // Persistent failure: abort with the partial trace.
    {
        int calls = 0;
        Objective f = [&](const Point& p) {
            if (++calls >= 3) return std::numeric_limits<double>::quiet_NaN();
            return p.vec()(0);
        };
        BoConfig cfg;
        cfg.n_init = 5;
        cfg.n_iters = 2;
        cfg.seed = 3;
        cfg.kernel = sphere_se(0.5);
        BoTrace t = bo_run(f, s2, cfg);
        CHECK(t.aborted);
        CHECK(t.records.size() == 2);
    }
}

TEST_CASE("hidden kernel bump on S2: BO beats random search") {
    Manifold s2 = Manifold::sphere(2);
    Eigen::Vector3d hv(0.2, -0.5, 0.6);
    Point hidden = Point::sphere(hv / hv.norm());
    KernelSpec hidden_spec = sphere_se(0.5);
    KernelEvaluator ev(hidden_spec, Space::Sphere, 2);
    Objective f = [&](const Point& p) { return -ev(p, hidden); }; // min = -1 at hidden

    std::vector<double> bo_regret, rs_regret;
    for (int seed = 0; seed < 10; ++seed) {
        BoConfig cfg;
        cfg.n_init = 5;
        cfg.n_iters = 30;
        cfg.seed = 6000 + seed;
        cfg.kernel = sphere_se(0.5);
        cfg.tr.max_iters = 30;
        BoTrace t = bo_run(f, s2, cfg);
        bo_regret.push_back(t.best_y + 1.0);

        BoConfig rnd = cfg;
        rnd.random_search = true;
        BoTrace r = bo_run(f, s2, rnd);
        rs_regret.push_back(r.best_y + 1.0);
    }
    std::sort(bo_regret.begin(), bo_regret.end());
    std::sort(rs_regret.begin(), rs_regret.end());
    double bo_med = bo_regret[5], rs_med = rs_regret[5];
    CHECK(bo_med < 0.05);     // range of f is 1
    CHECK(bo_med <= rs_med);
}

TEST_CASE("simple regret recomputation from the trace") {
    BoTrace t;
    Point p = Point::torus((Eigen::VectorXd(1) << 0.1).finished());
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 6; ++i) {
        double y = std::cos(i * 1.7);
        best = std::min(best, y);
        t.records.push_back({i, p, y, best});
    }
    auto reg = simple_regret(t, -1.0);
    double running = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 6; ++i) {
        running = std::min(running, t.records[i].y);
        CHECK(reg[i] == doctest::Approx(running + 1.0));
    }
}
