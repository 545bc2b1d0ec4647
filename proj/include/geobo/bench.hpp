#pragma once

#include "geobo/bo.hpp"

#include <atomic>
#include <memory>
#include <string>
#include <vector>

namespace geobo {

// ------------------------------------------------------ projected objectives

struct BenchmarkSpec {
    std::string function = "ackley"; // ackley | rosenbrock | levy | styblinski_tang |
                                     // hidden_kernel_bump
    Manifold manifold;
    Point base;                // projection base point (global minimum lands here)
    double domain_radius = 0;  // 0: the function's default half-width
};

struct ProjectedObjective {
    Objective fn;
    double f_star = 0.0;
    double scale = 1.0;  // tangent coefficients are multiplied by this
    double radius = 0.0; // tangent ball radius mapped onto the domain
    std::shared_ptr<std::atomic<long>> cut_locus_hits;
};

double benchmark_function(const std::string& name, const Eigen::VectorXd& v);
double benchmark_default_radius(const std::string& name);

// Tangent ball radius used for the projection: the injectivity radius on
// compact spaces, half the reference diameter otherwise.
double projection_radius(const Manifold& m);

// f_M(x) = f(scale * log_map(base, x)) with the minimum pinned at `base`;
// f_star is estimated by a dense tangent grid (dim <= 3) or sampled local
// refinement, and cached in the returned struct. Cut-locus queries return
// the function's boundary value and bump the diagnostic counter.
ProjectedObjective projected_objective(const BenchmarkSpec& spec);

// -------------------------------------------------------------- suite runner

struct SuiteCell {
    std::string manifold;
    std::vector<std::string> kernels; // labels, see kernel_setup_from_label
};

struct SuiteConfig {
    std::uint64_t master_seed = 2024;
    int seeds = 10;
    int iters = 100;
    int n_init = 5;
    int acq_starts = 8;
    int tr_max_iters = 40;
    std::string function = "ackley";
    double regret_threshold = 0.1; // fraction of the post-init regret
    double spd_lo = 1e-3, spd_hi = 5.0;
    std::vector<SuiteCell> cells;
};

SuiteConfig suite_config_from_json(const std::string& json_text);
SuiteConfig suite_config_from_file(const std::string& path);

// Executes every (cell, kernel, seed) job on a bounded worker pool, writes
// per-run trace CSVs, summary.csv, plot_data.csv and resolved_config.json
// under out_dir. Returns the number of failed cells.
int run_suite(const SuiteConfig& cfg, const std::string& out_dir, int jobs);

// Recompute summary.csv from the trace files alone (one pass); writes
// summary_recomputed.csv in the directory and returns 0 when every row
// could be rebuilt.
int summarize_dir(const std::string& dir, const std::string& out_file);

// ----------------------------------------------------------- shared plumbing

Manifold manifold_from_name(const std::string& name, double spd_lo = 1e-3,
                            double spd_hi = 5.0);
std::string point_to_field(const Point& p); // semicolon-joined coordinates

// Baseline search domain in embedding coordinates and the projection back
// onto the manifold (normalization / wrap / polar / eigenvalue clip).
struct EuclideanEmbedding {
    Manifold domain;
    std::function<Point(const Point&)> project;
};
EuclideanEmbedding euclidean_embedding(const Manifold& m);

// CLI entry points (JSON in, CSV/JSON out). Throw on malformed input.
void cli_kernel_eval(const std::string& in_json_path, const std::string& out_csv_path);
void cli_gp_fit(const std::string& in_json_path, const std::string& out_json_path);

} // namespace geobo
