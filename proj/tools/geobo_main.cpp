#include <CLI11.hpp>

#include "geobo/bench.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"geometry-aware Bayesian optimization toolkit"};
    app.require_subcommand(1);

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "benchmark suite");
    bench->require_subcommand(1);

    std::string config_path, out_dir = "bench_out";
    int seeds = -1, iters = -1, jobs = 0;
    bool paper_scale = false;
    auto* run = bench->add_subcommand("run", "execute a benchmark suite");
    run->add_option("--config", config_path, "suite config JSON")->required();
    run->add_option("--seeds", seeds, "override: number of seeded repetitions");
    run->add_option("--iters", iters, "override: BO iterations per run");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--jobs", jobs, "parallel worker count (0 = all cores)");
    run->add_flag("--paper-scale", paper_scale, "30 seeds x 200 iterations");

    std::string summ_dir, summ_out;
    auto* summarize = bench->add_subcommand("summarize", "recompute summary from traces");
    summarize->add_option("--in", summ_dir, "suite output directory")->required();
    summarize->add_option("--out", summ_out, "summary CSV path (default: <in>/summary_recomputed.csv)");

    // ---- kernel ----
    auto* kernel = app.add_subcommand("kernel", "kernel evaluation");
    kernel->require_subcommand(1);
    std::string keval_in, keval_out = "gram.csv";
    auto* keval = kernel->add_subcommand("eval", "Gram matrix of a point list");
    keval->add_option("--in", keval_in, "JSON with manifold, kernel spec and points")->required();
    keval->add_option("--out", keval_out, "output CSV");

    // ---- gp ----
    auto* gp = app.add_subcommand("gp", "Gaussian process regression");
    gp->require_subcommand(1);
    std::string gpfit_in, gpfit_out = "fit.json";
    auto* gpfit = gp->add_subcommand("fit", "fit hyperparameters, optionally predict");
    gpfit->add_option("--in", gpfit_in, "JSON with manifold, kernel, points, targets")->required();
    gpfit->add_option("--out", gpfit_out, "output JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            geobo::SuiteConfig cfg = geobo::suite_config_from_file(config_path);
            if (paper_scale) {
                cfg.seeds = 30;
                cfg.iters = 200;
            }
            if (seeds > 0) cfg.seeds = seeds;
            if (iters >= 0) cfg.iters = iters;
            int failures = geobo::run_suite(cfg, out_dir, jobs);
            if (failures > 0) {
                std::cerr << failures << " run(s) failed\n";
                return 1;
            }
            std::cout << "suite written to " << out_dir << "\n";
        } else if (summarize->parsed()) {
            int bad = geobo::summarize_dir(summ_dir, summ_out);
            if (bad > 0) {
                std::cerr << bad << " trace file(s) could not be summarized\n";
                return 1;
            }
            std::cout << "summary recomputed\n";
        } else if (keval->parsed()) {
            geobo::cli_kernel_eval(keval_in, keval_out);
            std::cout << "gram matrix written to " << keval_out << "\n";
        } else if (gpfit->parsed()) {
            geobo::cli_gp_fit(gpfit_in, gpfit_out);
            std::cout << "fit written to " << gpfit_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
