#include "geobo/bench.hpp"

#include "geobo/rng.hpp"

#include <json.hpp>
#include <omp.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace geobo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

// --------------------------------------------------------- test functions

double benchmark_function(const std::string& name, const Eigen::VectorXd& v) {
    const int d = static_cast<int>(v.size());
    if (name == "ackley") {
        double s2 = v.squaredNorm() / d;
        double sc = 0.0;
        for (int i = 0; i < d; ++i) sc += std::cos(2.0 * M_PI * v(i));
        sc /= d;
        return 20.0 + M_E - 20.0 * std::exp(-0.2 * std::sqrt(s2)) - std::exp(sc);
    }
    if (name == "rosenbrock") {
        if (d == 1) return (1.0 - v(0)) * (1.0 - v(0));
        double acc = 0.0;
        for (int i = 0; i + 1 < d; ++i) {
            double a = v(i + 1) - v(i) * v(i);
            double b = 1.0 - v(i);
            acc += 100.0 * a * a + b * b;
        }
        return acc;
    }
    if (name == "levy") {
        auto w = [&](int i) { return 1.0 + (v(i) - 1.0) / 4.0; };
        double s = std::sin(M_PI * w(0));
        double acc = s * s;
        for (int i = 0; i + 1 < d; ++i) {
            double wi = w(i), sw = std::sin(M_PI * wi + 1.0);
            acc += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * sw * sw);
        }
        double wd = w(d - 1), sd = std::sin(2.0 * M_PI * wd);
        acc += (wd - 1.0) * (wd - 1.0) * (1.0 + sd * sd);
        return acc;
    }
    if (name == "styblinski_tang") {
        double acc = 0.0;
        for (int i = 0; i < d; ++i) {
            double x = v(i), x2 = x * x;
            acc += x2 * x2 - 16.0 * x2 + 5.0 * x;
        }
        return 0.5 * acc;
    }
    throw std::invalid_argument("benchmark_function: unknown function " + name);
}

double benchmark_default_radius(const std::string& name) {
    if (name == "ackley") return 5.0;
    if (name == "rosenbrock") return 2.048;
    if (name == "levy") return 10.0;
    if (name == "styblinski_tang") return 5.0;
    if (name == "hidden_kernel_bump") return 1.0;
    throw std::invalid_argument("benchmark_default_radius: unknown function " + name);
}

double projection_radius(const Manifold& m) {
    double inj = m.injectivity_radius();
    return std::isfinite(inj) ? inj : 0.5 * m.reference_diameter();
}

namespace {

Eigen::VectorXd clip_to_ball(Eigen::VectorXd v, double radius) {
    double n = v.norm();
    if (n > radius) v *= radius / n;
    return v;
}

// Dense grid (dim <= 3) or sampled starts, then coordinate descent with a
// shrinking step, all inside the ball of the given radius.
double estimate_f_star(const std::string& fname, int dim, double radius) {
    Eigen::VectorXd best_v = Eigen::VectorXd::Zero(dim);
    double best = benchmark_function(fname, best_v);
    if (dim <= 3) {
        int n = dim == 1 ? 4001 : dim == 2 ? 241 : 61;
        Eigen::VectorXd v(dim);
        std::vector<int> idx(dim, 0);
        while (true) {
            for (int k = 0; k < dim; ++k) v(k) = -radius + 2.0 * radius * idx[k] / (n - 1);
            if (v.norm() <= radius) {
                double f = benchmark_function(fname, v);
                if (f < best) {
                    best = f;
                    best_v = v;
                }
            }
            int k = 0;
            while (k < dim && idx[k] == n - 1) idx[k++] = 0;
            if (k == dim) break;
            ++idx[k];
        }
    } else {
        auto rng = make_rng(0xF57A, static_cast<std::uint64_t>(dim));
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int s = 0; s < 100000; ++s) {
            Eigen::VectorXd dir(dim);
            for (int k = 0; k < dim; ++k) dir(k) = gauss(rng);
            dir.normalize();
            Eigen::VectorXd v = radius * std::pow(unif(rng), 1.0 / dim) * dir;
            double f = benchmark_function(fname, v);
            if (f < best) {
                best = f;
                best_v = v;
            }
        }
    }
    double step = 0.05 * radius;
    while (step > 1e-10 * radius) {
        bool improved = false;
        for (int k = 0; k < dim; ++k) {
            for (double sgn : {1.0, -1.0}) {
                Eigen::VectorXd v = best_v;
                v(k) += sgn * step;
                v = clip_to_ball(v, radius);
                double f = benchmark_function(fname, v);
                if (f < best) {
                    best = f;
                    best_v = v;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

} // namespace

ProjectedObjective projected_objective(const BenchmarkSpec& spec) {
    const Manifold m = spec.manifold;
    ProjectedObjective out;
    out.cut_locus_hits = std::make_shared<std::atomic<long>>(0);
    out.radius = projection_radius(m);

    if (spec.function == "hidden_kernel_bump") {
        KernelSpec ks;
        ks.family = KernelFamily::RiemannianSe;
        ks.nu = kInf;
        ks.kappa = 0.3 * m.reference_diameter();
        KernelEvaluator ev(ks, m.space, m.dim);
        Point hidden = spec.base;
        out.fn = [ev, hidden](const Point& p) { return -ev(p, hidden); };
        out.f_star = -1.0;
        out.scale = 1.0;
        return out;
    }

    const int dim = m.intrinsic_dim();
    double radius_f =
        spec.domain_radius > 0 ? spec.domain_radius : benchmark_default_radius(spec.function);
    out.scale = radius_f / out.radius;
    const double boundary =
        benchmark_function(spec.function, radius_f * Eigen::VectorXd::Unit(dim, 0));
    Point base = spec.base;
    std::string fname = spec.function;
    double c = out.scale;
    auto hits = out.cut_locus_hits;
    out.fn = [base, fname, c, boundary, hits](const Point& p) {
        try {
            TangentVector v = log_map(base, p);
            return benchmark_function(fname, (c * v.coeffs).eval());
        } catch (const CutLocusError&) {
            ++*hits;
            return boundary;
        }
    };
    out.f_star = estimate_f_star(fname, dim, radius_f);
    return out;
}

// ------------------------------------------------------------- name parsing

Manifold manifold_from_name(const std::string& name, double spd_lo, double spd_hi) {
    auto dim_suffix = [&](std::size_t at) {
        return std::stoi(name.substr(at));
    };
    if (name == "SO3") return Manifold::rotation(3);
    if (name.rfind("SPD", 0) == 0) return Manifold::spd(dim_suffix(3), spd_lo, spd_hi);
    if (name[0] == 'S') return Manifold::sphere(dim_suffix(1));
    if (name[0] == 'T') return Manifold::torus(dim_suffix(1));
    if (name[0] == 'H') return Manifold::hyperbolic(dim_suffix(1));
    throw std::invalid_argument("manifold_from_name: cannot parse '" + name + "'");
}

std::string point_to_field(const Point& p) {
    std::string out;
    for (double v : serialize_point(p)) {
        if (!out.empty()) out += ';';
        out += fmt_g(v);
    }
    return out;
}

// -------------------------------------------------- embedding-space baselines

EuclideanEmbedding euclidean_embedding(const Manifold& m) {
    EuclideanEmbedding e;
    switch (m.space) {
        case Space::Sphere: {
            int n = m.dim + 1;
            e.domain = Manifold::euclidean(Eigen::VectorXd::Constant(n, -1.0),
                                           Eigen::VectorXd::Constant(n, 1.0));
            e.project = [](const Point& p) {
                Eigen::VectorXd v = p.vec();
                double norm = v.norm();
                if (norm < 1e-9) {
                    v = Eigen::VectorXd::Unit(v.size(), 0);
                    norm = 1.0;
                }
                return Point::sphere(v / norm);
            };
            return e;
        }
        case Space::Torus: {
            e.domain = Manifold::euclidean(Eigen::VectorXd::Zero(m.dim),
                                           Eigen::VectorXd::Ones(m.dim));
            e.project = [](const Point& p) { return Point::torus(p.vec()); };
            return e;
        }
        case Space::Rotation: {
            int n = m.dim * m.dim;
            e.domain = Manifold::euclidean(Eigen::VectorXd::Constant(n, -1.0),
                                           Eigen::VectorXd::Constant(n, 1.0));
            e.project = [d = m.dim](const Point& p) {
                Eigen::MatrixXd a(d, d);
                int k = 0;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) a(i, j) = p.vec()(k++);
                // Polar factor via SVD, with the determinant fixed to +1.
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(
                    a, Eigen::ComputeFullU | Eigen::ComputeFullV);
                Eigen::MatrixXd u = svd.matrixU(), v = svd.matrixV();
                Eigen::MatrixXd r = u * v.transpose();
                if (r.determinant() < 0) {
                    u.col(d - 1) *= -1.0;
                    r = u * v.transpose();
                }
                return Point::rotation(r);
            };
            return e;
        }
        case Space::Spd: {
            // Upper-triangle coordinates with eigenvalue clipping as the
            // PSD repair.
            if (m.dim != 2) throw std::invalid_argument("euclidean_embedding: SPD baseline is 2x2");
            Eigen::VectorXd lo(3), hi(3);
            lo << m.spd_lambda_min, -m.spd_lambda_max, m.spd_lambda_min;
            hi << m.spd_lambda_max, m.spd_lambda_max, m.spd_lambda_max;
            e.domain = Manifold::euclidean(lo, hi);
            e.project = [lmin = m.spd_lambda_min, lmax = m.spd_lambda_max](const Point& p) {
                Eigen::Matrix2d s;
                s << p.vec()(0), p.vec()(1), p.vec()(1), p.vec()(2);
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
                Eigen::Vector2d lam = es.eigenvalues();
                for (int i = 0; i < 2; ++i) lam(i) = std::clamp(lam(i), lmin, lmax);
                return Point::spd(es.eigenvectors() * lam.asDiagonal() *
                                  es.eigenvectors().transpose());
            };
            return e;
        }
        case Space::Hyperbolic: {
            // Spatial coordinates only; the projection lifts back to the
            // hyperboloid sheet.
            double r = std::sinh(0.5 * m.reference_diameter());
            e.domain = Manifold::euclidean(Eigen::VectorXd::Constant(m.dim, -r),
                                           Eigen::VectorXd::Constant(m.dim, r));
            e.project = [d = m.dim](const Point& p) {
                Eigen::VectorXd x(d + 1);
                x.tail(d) = p.vec();
                x(0) = std::sqrt(1.0 + p.vec().squaredNorm());
                return Point::hyperbolic(x);
            };
            return e;
        }
        case Space::Euclidean: {
            e.domain = m;
            e.project = [](const Point& p) { return p; };
            return e;
        }
    }
    throw std::logic_error("euclidean_embedding: unreachable");
}

// ----------------------------------------------------------- kernel labels

namespace {

struct RunSetup {
    Manifold domain;
    Objective objective;                          // projected into the manifold
    std::function<Point(const Point&)> to_point;  // query -> manifold point for the trace
    BoConfig bo;
};

std::pair<std::string, double> split_label(const std::string& label) {
    auto pos = label.find(':');
    if (pos == std::string::npos) return {label, 2.5};
    return {label.substr(0, pos), std::stod(label.substr(pos + 1))};
}

RunSetup make_run_setup(const std::string& label, const Manifold& m, const Objective& fn,
                        const SuiteConfig& cfg) {
    auto [name, nu] = split_label(label);
    RunSetup rs;
    rs.domain = m;
    rs.objective = fn;
    rs.to_point = [](const Point& p) { return p; };
    rs.bo.n_init = cfg.n_init;
    rs.bo.n_iters = cfg.iters;
    rs.bo.acq_starts = cfg.acq_starts;
    rs.bo.tr.max_iters = cfg.tr_max_iters;
    if (m.space == Space::Spd) rs.bo.constraint = ConstraintBox{m.spd_lambda_min, m.spd_lambda_max};

    auto embedded = [&](KernelFamily fam, double nu_val) {
        EuclideanEmbedding emb = euclidean_embedding(m);
        rs.domain = emb.domain;
        rs.objective = [fn, project = emb.project](const Point& e) { return fn(project(e)); };
        rs.to_point = emb.project;
        rs.bo.constraint.reset(); // the box of the embedding domain rules
        rs.bo.kernel.family = fam;
        rs.bo.kernel.nu = nu_val;
    };

    if (name == "riemannian_se") {
        rs.bo.kernel.family = KernelFamily::RiemannianSe;
        rs.bo.kernel.nu = kInf;
    } else if (name == "riemannian_matern") {
        rs.bo.kernel.family = KernelFamily::RiemannianMatern;
        rs.bo.kernel.nu = nu;
    } else if (name == "naive_se") {
        rs.bo.kernel.family = KernelFamily::NaiveGeodesicSe;
        rs.bo.kernel.nu = kInf;
    } else if (name == "euclidean_se") {
        embedded(KernelFamily::EuclideanSe, kInf);
    } else if (name == "euclidean_matern") {
        embedded(KernelFamily::EuclideanMatern, nu);
    } else if (name == "cholesky") {
        if (m.space != Space::Spd)
            throw std::invalid_argument("cholesky baseline needs an SPD manifold");
        double lmax = m.spd_lambda_max, lmin = m.spd_lambda_min;
        double cmax = std::sqrt(lmax * 1.1);
        Eigen::VectorXd lo(3), hi(3);
        lo << 0.01, -cmax, 0.01; // positive diagonal enforced by the domain
        hi << cmax, cmax, cmax;
        rs.domain = Manifold::euclidean(lo, hi);
        auto project = [lmin, lmax](const Point& e) {
            Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
            l(0, 0) = e.vec()(0);
            l(1, 0) = e.vec()(1);
            l(1, 1) = e.vec()(2);
            Eigen::Matrix2d s = l * l.transpose();
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
            Eigen::Vector2d lam = es.eigenvalues();
            for (int i = 0; i < 2; ++i) lam(i) = std::clamp(lam(i), lmin, lmax);
            return Point::spd(es.eigenvectors() * lam.asDiagonal() *
                              es.eigenvectors().transpose());
        };
        rs.objective = [fn, project](const Point& e) { return fn(project(e)); };
        rs.to_point = project;
        rs.bo.kernel.family = KernelFamily::EuclideanMatern;
        rs.bo.kernel.nu = nu;
    } else if (name == "eigen_product") {
        if (m.space != Space::Spd)
            throw std::invalid_argument("eigen_product baseline needs an SPD manifold");
        rs.bo.kernel.family = KernelFamily::Product;
        rs.bo.kernel.nu = nu;
    } else if (name == "random") {
        rs.bo.random_search = true;
        rs.bo.kernel.family = KernelFamily::RiemannianSe;
        rs.bo.kernel.nu = kInf;
    } else {
        throw std::invalid_argument("unknown kernel label '" + label + "'");
    }
    return rs;
}

std::string label_to_filename(const std::string& label) {
    std::string s = label;
    std::replace(s.begin(), s.end(), ':', '-');
    return s;
}

std::string filename_to_label(const std::string& s) {
    std::string out = s;
    auto pos = out.rfind('-');
    if (pos != std::string::npos) out[pos] = ':';
    return out;
}

} // namespace

// -------------------------------------------------------------- suite config

SuiteConfig suite_config_from_json(const std::string& text) {
    json j = json::parse(text);
    SuiteConfig cfg;
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.seeds = j.value("seeds", cfg.seeds);
    cfg.iters = j.value("iters", cfg.iters);
    cfg.n_init = j.value("n_init", cfg.n_init);
    cfg.acq_starts = j.value("acq_starts", cfg.acq_starts);
    cfg.tr_max_iters = j.value("tr_max_iters", cfg.tr_max_iters);
    cfg.function = j.value("function", cfg.function);
    cfg.regret_threshold = j.value("regret_threshold", cfg.regret_threshold);
    if (j.contains("spd_box")) {
        cfg.spd_lo = j["spd_box"][0].get<double>();
        cfg.spd_hi = j["spd_box"][1].get<double>();
    }
    if (!j.contains("cells") || j["cells"].empty())
        throw std::invalid_argument("suite config: at least one cell required");
    for (const auto& c : j["cells"]) {
        SuiteCell cell;
        cell.manifold = c.at("manifold").get<std::string>();
        for (const auto& k : c.at("kernels")) cell.kernels.push_back(k.get<std::string>());
        if (cell.kernels.empty())
            throw std::invalid_argument("suite config: empty kernel list in a cell");
        cfg.cells.push_back(cell);
    }
    if (cfg.seeds < 1 || cfg.iters < 0 || cfg.n_init < 1)
        throw std::invalid_argument("suite config: bad seeds/iters/n_init");
    return cfg;
}

SuiteConfig suite_config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return suite_config_from_json(ss.str());
}

// -------------------------------------------------------------- suite runner

namespace {

struct SummaryRow {
    std::string manifold, kernel;
    int seed = 0;
    double final_log_regret = std::numeric_limits<double>::quiet_NaN();
    int iter_to_threshold = -1;
    bool failed = true;
    std::vector<double> regret; // per record, for the plot file
};

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    double pos = q * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - lo;
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

} // namespace

int run_suite(const SuiteConfig& cfg, const std::string& out_dir, int jobs) {
    fs::create_directories(out_dir);

    struct ResolvedCell {
        std::string name;
        Manifold m;
        Point base;
        ProjectedObjective obj;
    };
    std::vector<ResolvedCell> cells;
    for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
        ResolvedCell rc;
        rc.name = cfg.cells[ci].manifold;
        rc.m = manifold_from_name(rc.name, cfg.spd_lo, cfg.spd_hi);
        auto rng = make_rng(cfg.master_seed, 0xBA5E, ci);
        rc.base = random_point(rng, rc.m);
        BenchmarkSpec bs;
        bs.function = cfg.function;
        bs.manifold = rc.m;
        bs.base = rc.base;
        rc.obj = projected_objective(bs);
        cells.push_back(std::move(rc));
    }

    struct Job {
        int cell, kernel, seed;
    };
    std::vector<Job> jobs_list;
    for (int c = 0; c < static_cast<int>(cells.size()); ++c)
        for (int k = 0; k < static_cast<int>(cfg.cells[c].kernels.size()); ++k)
            for (int s = 0; s < cfg.seeds; ++s) jobs_list.push_back({c, k, s});

    std::vector<SummaryRow> rows(jobs_list.size());
    std::atomic<int> failures{0};

#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : omp_get_max_threads())
    for (int ji = 0; ji < static_cast<int>(jobs_list.size()); ++ji) {
        const Job& job = jobs_list[ji];
        const ResolvedCell& rc = cells[job.cell];
        const std::string& label = cfg.cells[job.cell].kernels[job.kernel];
        SummaryRow& row = rows[ji];
        row.manifold = rc.name;
        row.kernel = label;
        row.seed = job.seed;
        try {
            RunSetup rs = make_run_setup(label, rc.m, rc.obj.fn, cfg);
            rs.bo.seed = derive_seed(cfg.master_seed, job.cell, job.kernel, job.seed);
            BoTrace trace = bo_run(rs.objective, rs.domain, rs.bo);
            if (trace.aborted) throw std::runtime_error("bo_run aborted");

            std::string path = out_dir + "/trace_" + rc.name + "_" + label_to_filename(label) +
                               "_" + std::to_string(job.seed) + ".csv";
            std::ofstream out(path);
            out << "seed,iter,phase,point,y,best_y,regret\n";
            row.regret.reserve(trace.records.size());
            for (const auto& rec : trace.records) {
                double regret = rec.best_y - rc.obj.f_star;
                row.regret.push_back(regret);
                out << job.seed << ',' << rec.iter << ','
                    << (rec.iter < cfg.n_init ? "init" : "bo") << ','
                    << point_to_field(rs.to_point(rec.query)) << ',' << fmt_g(rec.y) << ','
                    << fmt_g(rec.best_y) << ',' << fmt_g(regret) << '\n';
            }
            double final_regret = row.regret.back();
            row.final_log_regret = std::log10(std::max(final_regret, 1e-12));
            double r0 = row.regret[cfg.n_init - 1];
            double threshold = cfg.regret_threshold * r0;
            row.iter_to_threshold = -1;
            for (std::size_t i = cfg.n_init; i < row.regret.size(); ++i)
                if (row.regret[i] <= threshold) {
                    row.iter_to_threshold = static_cast<int>(i);
                    break;
                }
            row.failed = false;
        } catch (const std::exception& e) {
#pragma omp critical
            std::cerr << "cell failed: " << rc.name << "/" << label << " seed " << job.seed
                      << ": " << e.what() << "\n";
            ++failures;
        }
    }

    {
        std::ofstream out(out_dir + "/summary.csv");
        out << "manifold,kernel,seed,final_log_regret,median_iter_to_threshold\n";
        for (const auto& row : rows) {
            out << row.manifold << ',' << row.kernel << ',' << row.seed << ','
                << (row.failed ? "nan" : fmt_g(row.final_log_regret)) << ','
                << row.iter_to_threshold << '\n';
        }
    }

    {
        std::ofstream out(out_dir + "/plot_data.csv");
        out << "manifold,kernel,iter,regret_q25,regret_median,regret_q75\n";
        for (int c = 0; c < static_cast<int>(cells.size()); ++c)
            for (int k = 0; k < static_cast<int>(cfg.cells[c].kernels.size()); ++k) {
                std::size_t n_rec = 0;
                for (int ji = 0; ji < static_cast<int>(jobs_list.size()); ++ji)
                    if (jobs_list[ji].cell == c && jobs_list[ji].kernel == k && !rows[ji].failed)
                        n_rec = std::max(n_rec, rows[ji].regret.size());
                for (std::size_t it = 0; it < n_rec; ++it) {
                    std::vector<double> vals;
                    for (int ji = 0; ji < static_cast<int>(jobs_list.size()); ++ji) {
                        const auto& row = rows[ji];
                        if (jobs_list[ji].cell == c && jobs_list[ji].kernel == k &&
                            !row.failed && it < row.regret.size())
                            vals.push_back(row.regret[it]);
                    }
                    if (vals.empty()) continue;
                    out << cells[c].name << ',' << cfg.cells[c].kernels[k] << ',' << it << ','
                        << fmt_g(quantile(vals, 0.25)) << ',' << fmt_g(quantile(vals, 0.5))
                        << ',' << fmt_g(quantile(vals, 0.75)) << '\n';
                }
            }
    }

    {
        json j;
        j["master_seed"] = cfg.master_seed;
        j["seeds"] = cfg.seeds;
        j["iters"] = cfg.iters;
        j["n_init"] = cfg.n_init;
        j["acq_starts"] = cfg.acq_starts;
        j["tr_max_iters"] = cfg.tr_max_iters;
        j["function"] = cfg.function;
        j["regret_threshold"] = cfg.regret_threshold;
        j["spd_box"] = {cfg.spd_lo, cfg.spd_hi};
        j["cells"] = json::array();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            json jc;
            jc["manifold"] = cells[c].name;
            jc["kernels"] = cfg.cells[c].kernels;
            jc["base_point"] = serialize_point(cells[c].base);
            jc["f_star"] = cells[c].obj.f_star;
            jc["projection_scale"] = cells[c].obj.scale;
            jc["projection_radius"] = cells[c].obj.radius;
            jc["cut_locus_hits"] = cells[c].obj.cut_locus_hits->load();
            j["cells"].push_back(jc);
        }
        std::ofstream out(out_dir + "/resolved_config.json");
        out << j.dump(2) << '\n';
    }

    return failures.load();
}

// --------------------------------------------------------------- summarize

int summarize_dir(const std::string& dir, const std::string& out_file) {
    json resolved;
    {
        std::ifstream in(dir + "/resolved_config.json");
        if (!in) throw std::runtime_error("summarize: missing resolved_config.json in " + dir);
        in >> resolved;
    }
    const int n_init = resolved.at("n_init").get<int>();
    const double threshold_frac = resolved.at("regret_threshold").get<double>();

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("trace_", 0) == 0 && name.size() > 4 &&
            name.substr(name.size() - 4) == ".csv")
            files.push_back(name);
    }
    std::sort(files.begin(), files.end());

    std::string target = out_file.empty() ? dir + "/summary_recomputed.csv" : out_file;
    std::ofstream out(target);
    out << "manifold,kernel,seed,final_log_regret,median_iter_to_threshold\n";
    int bad = 0;
    for (const auto& name : files) {
        // trace_<manifold>_<kernel>_<seed>.csv
        std::string stem = name.substr(6, name.size() - 10);
        auto first = stem.find('_');
        auto last = stem.rfind('_');
        if (first == std::string::npos || last == first) {
            ++bad;
            continue;
        }
        std::string manifold = stem.substr(0, first);
        std::string kernel = filename_to_label(stem.substr(first + 1, last - first - 1));
        std::string seed = stem.substr(last + 1);

        std::ifstream in(dir + "/" + name);
        std::string line;
        std::getline(in, line); // header
        std::vector<double> regret;
        double best = std::numeric_limits<double>::infinity();
        bool consistent = true;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string field;
            std::vector<std::string> fields;
            while (std::getline(ss, field, ',')) fields.push_back(field);
            if (fields.size() != 7) {
                consistent = false;
                break;
            }
            double y = std::stod(fields[4]);
            double best_y = std::stod(fields[5]);
            best = std::min(best, y);
            if (std::abs(best - best_y) > 1e-12 * std::max(1.0, std::abs(best)))
                consistent = false;
            regret.push_back(std::stod(fields[6]));
        }
        if (!consistent || regret.empty() || static_cast<int>(regret.size()) < n_init) {
            ++bad;
            continue;
        }
        double flr = std::log10(std::max(regret.back(), 1e-12));
        double thr = threshold_frac * regret[n_init - 1];
        int itt = -1;
        for (std::size_t i = n_init; i < regret.size(); ++i)
            if (regret[i] <= thr) {
                itt = static_cast<int>(i);
                break;
            }
        out << manifold << ',' << kernel << ',' << seed << ',' << fmt_g(flr) << ',' << itt
            << '\n';
    }
    return bad;
}

// ------------------------------------------------------------ CLI endpoints

namespace {

KernelSpec kernel_spec_from_json(const json& j) {
    KernelSpec s;
    std::string fam = j.value("family", std::string("riemannian_matern"));
    if (fam == "riemannian_matern") s.family = KernelFamily::RiemannianMatern;
    else if (fam == "riemannian_se") s.family = KernelFamily::RiemannianSe;
    else if (fam == "euclidean_matern") s.family = KernelFamily::EuclideanMatern;
    else if (fam == "euclidean_se") s.family = KernelFamily::EuclideanSe;
    else if (fam == "naive_geodesic_se") s.family = KernelFamily::NaiveGeodesicSe;
    else if (fam == "product") s.family = KernelFamily::Product;
    else if (fam == "cholesky_euclidean") s.family = KernelFamily::CholeskyEuclidean;
    else throw std::invalid_argument("unknown kernel family '" + fam + "'");
    if (j.contains("nu")) {
        if (j["nu"].is_string()) s.nu = kInf; // "inf"
        else s.nu = j["nu"].get<double>();
    }
    s.kappa = j.value("kappa", 1.0);
    s.sigma2 = j.value("sigma2", 1.0);
    if (j.contains("trunc")) {
        const json& t = j["trunc"];
        s.trunc.torus_l = t.value("torus_l", s.trunc.torus_l);
        s.trunc.sphere_n = t.value("sphere_n", s.trunc.sphere_n);
        s.trunc.so3_l = t.value("so3_l", s.trunc.so3_l);
        s.trunc.matern_quad_nodes = t.value("matern_quad_nodes", s.trunc.matern_quad_nodes);
        s.trunc.line_quad.abs_tol = t.value("line_quad_abs_tol", s.trunc.line_quad.abs_tol);
        s.trunc.line_quad.max_depth = t.value("line_quad_max_depth", s.trunc.line_quad.max_depth);
    }
    if (j.contains("factor_kappas"))
        for (const auto& v : j["factor_kappas"]) s.factor_kappas.push_back(v.get<double>());
    return s;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

std::vector<Point> points_from_json(const json& j, const Manifold& m) {
    std::vector<Point> pts;
    for (const auto& row : j) {
        std::vector<double> data;
        for (const auto& v : row) data.push_back(v.get<double>());
        pts.push_back(deserialize_point(m, data));
    }
    return pts;
}

} // namespace

void cli_kernel_eval(const std::string& in_json_path, const std::string& out_csv_path) {
    json j = load_json(in_json_path);
    double spd_lo = 1e-3, spd_hi = 5.0;
    if (j.contains("spd_box")) {
        spd_lo = j["spd_box"][0].get<double>();
        spd_hi = j["spd_box"][1].get<double>();
    }
    Manifold m = manifold_from_name(j.at("manifold").get<std::string>(), spd_lo, spd_hi);
    KernelSpec spec = kernel_spec_from_json(j.at("kernel"));
    std::vector<Point> pts = points_from_json(j.at("points"), m);
    if (pts.empty()) throw std::invalid_argument("kernel eval: empty point list");
    Eigen::MatrixXd k = gram(spec, pts);

    std::ofstream out(out_csv_path);
    for (int i = 0; i < k.cols(); ++i) out << (i ? "," : "") << i;
    out << '\n';
    for (int i = 0; i < k.rows(); ++i) {
        for (int c = 0; c < k.cols(); ++c) out << (c ? "," : "") << fmt_g(k(i, c));
        out << '\n';
    }
}

void cli_gp_fit(const std::string& in_json_path, const std::string& out_json_path) {
    json j = load_json(in_json_path);
    double spd_lo = 1e-3, spd_hi = 5.0;
    if (j.contains("spd_box")) {
        spd_lo = j["spd_box"][0].get<double>();
        spd_hi = j["spd_box"][1].get<double>();
    }
    Manifold m = manifold_from_name(j.at("manifold").get<std::string>(), spd_lo, spd_hi);
    FitConfig fc;
    fc.spec = kernel_spec_from_json(j.at("kernel"));
    std::vector<Point> pts = points_from_json(j.at("points"), m);
    Eigen::VectorXd y(j.at("targets").size());
    for (int i = 0; i < y.size(); ++i) y(i) = j["targets"][i].get<double>();
    fc.fit_noise = j.value("fit_noise", false);
    fc.noise = j.value("noise", 1e-6);
    fc.n_starts = j.value("n_starts", 5);
    if (j.contains("nu_grid"))
        for (const auto& v : j["nu_grid"])
            fc.nu_grid.push_back(v.is_string() ? kInf : v.get<double>());
    if (j.contains("bounds")) {
        const json& b = j["bounds"];
        fc.bounds.kappa_lo = b.value("kappa_lo", fc.bounds.kappa_lo);
        fc.bounds.kappa_hi = b.value("kappa_hi", fc.bounds.kappa_hi);
        fc.bounds.sigma2_lo = b.value("sigma2_lo", fc.bounds.sigma2_lo);
        fc.bounds.sigma2_hi = b.value("sigma2_hi", fc.bounds.sigma2_hi);
        fc.bounds.noise_lo = b.value("noise_lo", fc.bounds.noise_lo);
        fc.bounds.noise_hi = b.value("noise_hi", fc.bounds.noise_hi);
    }
    auto rng = make_rng(j.value("seed", 0));
    GpModel model = GpModel::fit(pts, y, fc, rng);

    json out;
    out["kappa"] = model.spec().kappa;
    out["sigma2"] = model.spec().sigma2;
    out["nu"] = std::isinf(model.spec().nu) ? json("inf") : json(model.spec().nu);
    out["noise"] = model.noise();
    out["log_marginal_likelihood"] = model.log_marginal_likelihood();
    if (j.contains("queries")) {
        out["posterior"] = json::array();
        for (const auto& p : points_from_json(j["queries"], m)) {
            auto [mu, var] = model.posterior(p);
            out["posterior"].push_back({{"mean", mu}, {"variance", var}});
        }
    }
    std::ofstream os(out_json_path);
    os << out.dump(2) << '\n';
}

} // namespace geobo
