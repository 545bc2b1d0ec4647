#include <doctest.h>

#include "geobo/bench.hpp"
#include "geobo/rng.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace geobo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("manifold names parse") {
    CHECK(manifold_from_name("S5").space == Space::Sphere);
    CHECK(manifold_from_name("S5").dim == 5);
    CHECK(manifold_from_name("T2").dim == 2);
    CHECK(manifold_from_name("SO3").space == Space::Rotation);
    CHECK(manifold_from_name("SPD2", 0.01, 2.0).spd_lambda_max == 2.0);
    CHECK(manifold_from_name("H3").space == Space::Hyperbolic);
    CHECK_THROWS_AS(manifold_from_name("Q7"), std::invalid_argument);
}

TEST_CASE("benchmark functions hit their reference minima") {
    Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
    CHECK(benchmark_function("ackley", zero2) == doctest::Approx(0.0).epsilon(1e-12));
    Eigen::VectorXd ones3 = Eigen::VectorXd::Ones(3);
    CHECK(benchmark_function("rosenbrock", ones3) == doctest::Approx(0.0));
    CHECK(benchmark_function("levy", ones3) == doctest::Approx(0.0));
    Eigen::VectorXd st = Eigen::VectorXd::Constant(2, -2.903534);
    CHECK(benchmark_function("styblinski_tang", st) == doctest::Approx(-39.16617 * 2).epsilon(1e-4));
    CHECK_THROWS_AS(benchmark_function("nope", zero2), std::invalid_argument);
}

TEST_CASE("projected objective: minimum at the base point") {
    auto rng = make_rng(7100);
    for (const std::string mname : {"S2", "T2", "SO3", "SPD2", "H3"}) {
        Manifold m = manifold_from_name(mname);
        BenchmarkSpec bs;
        bs.function = "ackley";
        bs.manifold = m;
        bs.base = random_point(rng, m);
        ProjectedObjective obj = projected_objective(bs);
        CHECK(obj.fn(bs.base) == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(obj.f_star == doctest::Approx(0.0).epsilon(1e-8));
        // Nearby points are worse.
        for (int i = 0; i < 5; ++i) {
            Point q = random_point(rng, m);
            CHECK(obj.fn(q) >= -1e-10);
        }
    }
}

TEST_CASE("radially symmetric objective is invariant under base-fixing isometries") {
    auto rng = make_rng(7200);
    Manifold s2 = Manifold::sphere(2);
    BenchmarkSpec bs;
    bs.function = "hidden_kernel_bump";
    bs.manifold = s2;
    bs.base = random_point(rng, s2);
    ProjectedObjective obj = projected_objective(bs);

    // Rotation about the base axis: Q = H diag(1, R2) H^T with H = [base|B].
    auto basis = tangent_basis(bs.base);
    Eigen::Matrix3d h;
    h.col(0) = bs.base.vec();
    h.col(1) = basis[0].col(0);
    h.col(2) = basis[1].col(0);
    std::uniform_real_distribution<double> unif(0.0, 2 * M_PI);
    for (int trial = 0; trial < 20; ++trial) {
        double a = unif(rng);
        Eigen::Matrix3d blk = Eigen::Matrix3d::Identity();
        blk(1, 1) = std::cos(a);
        blk(1, 2) = -std::sin(a);
        blk(2, 1) = std::sin(a);
        blk(2, 2) = std::cos(a);
        Eigen::Matrix3d q = h * blk * h.transpose();
        Point x = random_point(rng, s2);
        Eigen::VectorXd tx = q * x.vec();
        Point xq = Point::sphere(tx / tx.norm());
        CHECK(obj.fn(xq) == doctest::Approx(obj.fn(x)).epsilon(1e-9));
    }
}

TEST_CASE("T2 levy f_star matches an independent grid-plus-refinement oracle") {
    auto rng = make_rng(7300);
    Manifold t2 = Manifold::torus(2);
    BenchmarkSpec bs;
    bs.function = "levy";
    bs.manifold = t2;
    bs.base = random_point(rng, t2);
    ProjectedObjective obj = projected_objective(bs);

    double radius = benchmark_default_radius("levy");
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_v(2);
    for (int i = 0; i < 400; ++i)
        for (int j = 0; j < 400; ++j) {
            Eigen::VectorXd v(2);
            v << -radius + 2 * radius * i / 399.0, -radius + 2 * radius * j / 399.0;
            if (v.norm() > radius) continue;
            double f = benchmark_function("levy", v);
            if (f < best) {
                best = f;
                best_v = v;
            }
        }
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int s = 0; s < 10000; ++s) {
        Eigen::VectorXd v = best_v + 0.05 * Eigen::VectorXd(Eigen::Vector2d(unif(rng), unif(rng)));
        if (v.norm() > radius) continue;
        double f = benchmark_function("levy", v);
        if (f < best) {
            best = f;
            best_v = v;
        }
    }
    CHECK(obj.f_star == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("cut locus queries return the boundary value and are counted") {
    Manifold s2 = Manifold::sphere(2);
    BenchmarkSpec bs;
    bs.function = "ackley";
    bs.manifold = s2;
    bs.base = Point::sphere(Eigen::Vector3d(0, 0, 1));
    ProjectedObjective obj = projected_objective(bs);
    Point antipode = Point::sphere(Eigen::Vector3d(0, 0, -1));
    double v = obj.fn(antipode);
    CHECK(std::isfinite(v));
    CHECK(obj.cut_locus_hits->load() == 1);
}

TEST_CASE("embedding-space baselines project to valid points") {
    auto rng = make_rng(7400);
    for (const std::string mname : {"S2", "T2", "SO3", "SPD2", "H3"}) {
        Manifold m = manifold_from_name(mname);
        EuclideanEmbedding emb = euclidean_embedding(m);
        for (int i = 0; i < 20; ++i) {
            Point e = random_point(rng, emb.domain);
            Point p = emb.project(e); // constructor validates the invariants
            CHECK(p.space() == m.space);
            CHECK(p.dim() == m.dim);
        }
    }
    // SPD projections respect the eigenvalue box.
    Manifold spd = manifold_from_name("SPD2", 0.5, 2.0);
    EuclideanEmbedding emb = euclidean_embedding(spd);
    for (int i = 0; i < 20; ++i) {
        Point p = emb.project(random_point(rng, emb.domain));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.mat(), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= 0.5 - 1e-12);
        CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-12);
    }
}

TEST_CASE("suite config validation") {
    CHECK_THROWS_AS(suite_config_from_json(R"({"cells": []})"), std::invalid_argument);
    CHECK_THROWS_AS(
        suite_config_from_json(R"({"cells": [{"manifold": "S2", "kernels": []}]})"),
        std::invalid_argument);
    SuiteConfig cfg = suite_config_from_json(
        R"({"master_seed": 5, "seeds": 2, "iters": 3, "cells":
            [{"manifold": "T2", "kernels": ["riemannian_se", "random"]}]})");
    CHECK(cfg.master_seed == 5);
    CHECK(cfg.cells.size() == 1);
    CHECK(cfg.cells[0].kernels.size() == 2);
}

TEST_CASE("suite run: file counts, determinism, summarize round trip") {
    SuiteConfig cfg = suite_config_from_json(
        R"({"master_seed": 99, "seeds": 2, "iters": 3, "n_init": 3,
            "function": "hidden_kernel_bump", "tr_max_iters": 15,
            "cells": [{"manifold": "T2", "kernels": ["riemannian_se", "random"]}]})");

    fs::path dir_a = fs::temp_directory_path() / "geobo_suite_a";
    fs::path dir_b = fs::temp_directory_path() / "geobo_suite_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    REQUIRE(run_suite(cfg, dir_a.string(), 2) == 0);
    REQUIRE(run_suite(cfg, dir_b.string(), 1) == 0);

    // 2 kernels x 2 seeds -> 4 trace files and 4 summary rows.
    int traces = 0;
    for (const auto& e : fs::directory_iterator(dir_a))
        if (e.path().filename().string().rfind("trace_", 0) == 0) ++traces;
    CHECK(traces == 4);
    std::string summary = slurp((dir_a / "summary.csv").string());
    CHECK(count_lines(summary) == 5); // header + 4 rows

    // Byte-identical rerun regardless of the worker count.
    CHECK(summary == slurp((dir_b / "summary.csv").string()));
    CHECK(slurp((dir_a / "plot_data.csv").string()) ==
          slurp((dir_b / "plot_data.csv").string()));
    for (const auto& e : fs::directory_iterator(dir_a)) {
        std::string name = e.path().filename().string();
        if (name.rfind("trace_", 0) == 0)
            CHECK(slurp(e.path().string()) == slurp((dir_b / name).string()));
    }

    // Summary statistics recomputable from the traces alone.
    REQUIRE(summarize_dir(dir_a.string(), "") == 0);
    std::string recomputed = slurp((dir_a / "summary_recomputed.csv").string());
    // Same rows, possibly different order; compare sorted line sets.
    auto sorted_lines = [](const std::string& text) {
        std::vector<std::string> lines;
        std::stringstream ss(text);
        std::string l;
        while (std::getline(ss, l)) lines.push_back(l);
        std::sort(lines.begin(), lines.end());
        return lines;
    };
    CHECK(sorted_lines(summary) == sorted_lines(recomputed));
}

TEST_CASE("kernel eval and gp fit CLI round trips") {
    fs::path dir = fs::temp_directory_path() / "geobo_cli";
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "keval.json");
        out << R"({"manifold": "S2",
                   "kernel": {"family": "riemannian_matern", "nu": 1.5, "kappa": 0.5, "sigma2": 2.0},
                   "points": [[1,0,0],[0,1,0],[0,0,1]]})";
    }
    cli_kernel_eval((dir / "keval.json").string(), (dir / "gram.csv").string());
    std::string gram_text = slurp((dir / "gram.csv").string());
    CHECK(count_lines(gram_text) == 4); // header + 3 rows
    // Parse the diagonal.
    std::stringstream ss(gram_text);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "0,1,2");
    std::getline(ss, line);
    double k00 = std::stod(line.substr(0, line.find(',')));
    CHECK(k00 == doctest::Approx(2.0).epsilon(1e-9));

    {
        std::ofstream out(dir / "gpfit.json");
        out << R"({"manifold": "T1",
                   "kernel": {"family": "riemannian_se", "nu": "inf", "kappa": 0.3},
                   "points": [[0.05],[0.2],[0.45],[0.7],[0.9]],
                   "targets": [0.2, 0.7, -0.3, 0.1, 0.4],
                   "queries": [[0.1],[0.5]],
                   "seed": 11})";
    }
    cli_gp_fit((dir / "gpfit.json").string(), (dir / "fit.json").string());
    std::string fit_text = slurp((dir / "fit.json").string());
    CHECK(fit_text.find("log_marginal_likelihood") != std::string::npos);
    CHECK(fit_text.find("posterior") != std::string::npos);
}
