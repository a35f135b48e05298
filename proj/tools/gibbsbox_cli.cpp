// Command-line surface for the gibbsbox library.
//
//   gibbsbox simulate  --config c.json [--out dir]
//   gibbsbox estimate  --config c.json --pattern p.csv --window w.json [--out dir]
//   gibbsbox oracle    --config c.json [--out dir]
//   gibbsbox experiment --config c.json [--name X] [--out dir]
//   gibbsbox diagnose  --config c.json --pattern p.csv --window w.json
//
// Exit code 0 iff the run completed without an error; all randomness flows
// from the single seed in the config.  GIBBSBOX_THREADS caps worker threads.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gibbsbox/io.hpp"

namespace fs = std::filesystem;
using namespace gibbsbox;

namespace {

std::vector<TestFunction> default_test_functions(const EnergyModel2& model) {
    // Counting neighbors at twice the interaction range keeps the third
    // function linearly independent of h (for Strauss, h is exactly the
    // neighbor count at the interaction range).
    return {TestFunction::constant_one(), TestFunction::local_energy_h(),
            TestFunction::neighbor_count(2.0 * model.interaction_range())};
}

std::string out_path(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw GibbsboxError("cannot create output directory '" + dir + "': " + ec.message());
}

int run_simulate(const RunConfig& rc) {
    auto model = rc.model.build();
    SamplerConfig sc = rc.sampler;
    sc.sweeps = sc.thinning * rc.replicates;
    auto samples = mh_sample(model, rc.window, sc);
    ensure_dir(rc.out_dir);
    std::vector<std::string> outputs;
    bool want_csv = std::count(rc.formats.begin(), rc.formats.end(), "csv") > 0;
    bool want_svg = std::count(rc.formats.begin(), rc.formats.end(), "svg") > 0;
    if (want_csv) {
        write_window_json(rc.window, out_path(rc.out_dir, "window.json"));
        outputs.push_back("window.json");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            char name[48];
            std::snprintf(name, sizeof(name), "sample_%03zu.csv", i);
            write_pattern_csv(samples[i], out_path(rc.out_dir, name));
            outputs.push_back(name);
        }
    }
    if (want_svg && !samples.empty()) {
        double radius = model.family() == EnergyModel2::Family::pairwise
                            ? model.interaction_range() / 2.0
                            : model.disk_radius();
        write_text_file(out_path(rc.out_dir, "sample_000.svg"),
                        render_svg(samples.front(), rc.window, radius));
        outputs.push_back("sample_000.svg");
    }
    write_text_file(out_path(rc.out_dir, "manifest.json"),
                    run_manifest(rc, outputs).dump(2) + "\n");
    std::cout << "wrote " << samples.size() << " sample(s) to " << rc.out_dir << "\n";
    return 0;
}

int run_estimate(const RunConfig& rc, const std::string& pattern_path,
                 const std::string& window_path) {
    auto model = rc.model.build();
    Window2 win = read_window_json(window_path);
    auto pat = read_pattern_csv(pattern_path, win, model.interaction_range());

    EstimationResult res;
    if (rc.method == "takacs_fiksel") {
        res = takacs_fiksel_estimate(default_test_functions(model), model, pat, win,
                                     rc.optimizer);
    } else if (rc.method == "mple") {
        res = mple_estimate(model, pat, win, rc.optimizer);
    } else if (rc.method == "mc_mle") {
        res = mc_mle_estimate(model, pat, win, rc.model.z, rc.model.beta, rc.optimizer, 400,
                              rc.seed);
    } else {  // variational
        res.method = "variational";
        res.beta_hat = variational_beta(pat, model, win);
        res.z_hat = static_cast<double>(pat.size()) / win.volume();
        res.border_corrected = true;
    }
    auto j = to_json(res);
    std::cout << j.dump(2) << "\n";
    if (!rc.out_dir.empty()) {
        ensure_dir(rc.out_dir);
        write_text_file(out_path(rc.out_dir, "estimate.json"), j.dump(2) + "\n");
    }
    return 0;
}

int run_oracle(const RunConfig& rc) {
    auto model = rc.model.build();
    auto bc = BoundaryCondition2::free_boundary();
    auto zres = partition_function(model, rc.window, rc.model.z, rc.model.beta, bc, rc.oracle);
    auto mean = oracle_expectation(OracleStatistic::count(), model, rc.window, rc.model.z,
                                   rc.model.beta, bc, rc.oracle);
    auto var = oracle_count_variance(model, rc.window, rc.model.z, rc.model.beta, bc, rc.oracle);
    auto pres = finite_pressure(model, rc.window, rc.model.z, rc.model.beta, rc.oracle);
    nlohmann::json j{
        {"partition_function", {{"estimate", zres.estimate}, {"se", zres.se},
                                {"truncation_bound", zres.truncation_bound}}},
        {"mean_count", {{"estimate", mean.estimate}, {"se", mean.se}}},
        {"count_variance", {{"estimate", var.estimate}, {"se", var.se}}},
        {"pressure", {{"estimate", pres.estimate}, {"se", pres.se}}}};
    std::cout << j.dump(2) << "\n";
    if (!rc.out_dir.empty()) {
        ensure_dir(rc.out_dir);
        write_text_file(out_path(rc.out_dir, "oracle.json"), j.dump(2) + "\n");
    }
    return 0;
}

int run_experiment(const RunConfig& rc) {
    auto model = rc.model.build();
    ExperimentReport rep;
    if (rc.experiment == "gnz") {
        rep = gnz_residual_test(model, rc.model.z, rc.model.beta, rc.window, rc.replicates,
                                default_test_functions(model), rc.seed);
    } else if (rc.experiment == "hardcore_bounds") {
        rep = hardcore_bounds_check(rc.model.z, rc.model.R, rc.window, rc.replicates, rc.seed);
    } else if (rc.experiment == "phase_transition") {
        if (rc.z_values.empty())
            throw GibbsboxError("phase_transition experiment needs z_values in the config");
        rep = phase_transition_experiment(rc.z_values, rc.model.R, rc.window, rc.replicates,
                                          rc.seed,
                                          rc.model.mc_samples > 0 ? rc.model.mc_samples : 1024);
    } else if (rc.experiment == "uniqueness") {
        rep = uniqueness_regime_probe(model, rc.model.z, rc.model.beta, rc.window, rc.replicates,
                                      rc.seed);
    } else if (rc.experiment == "tail") {
        rep = ruelle_tail_report(model, rc.model.z, rc.model.beta,
                                 detail::central_quarter(rc.window), rc.window, rc.replicates,
                                 rc.seed);
    } else {  // mean_energy
        if (rc.window_sides.empty())
            throw GibbsboxError("mean_energy experiment needs window_sides in the config");
        rep = empirical_mean_energy(model, rc.model.z, rc.model.beta, rc.window_sides,
                                    rc.replicates, rc.seed);
    }
    for (const auto& v : rep.verdicts)
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.value << " " << v.relation
                  << " " << v.threshold << "\n";
    for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";
    ensure_dir(rc.out_dir);
    write_text_file(out_path(rc.out_dir, rep.name + ".json"), to_json(rep).dump(2) + "\n");
    write_text_file(out_path(rc.out_dir, rep.name + ".csv"), report_series_csv(rep));
    std::cout << "report: " << out_path(rc.out_dir, rep.name + ".json") << "\n";
    return 0;
}

int run_diagnose(const RunConfig& rc, const std::string& pattern_path,
                 const std::string& window_path) {
    if (rc.experiment != "gnz")
        throw GibbsboxError("unknown diagnostic '" + rc.experiment + "' (available: gnz)");
    auto model = rc.model.build();
    Window2 win = read_window_json(window_path);
    auto pat = read_pattern_csv(pattern_path, win, model.interaction_range());
    auto fs_list = default_test_functions(model);
    auto tab = gnz_table(fs_list, model, pat, win, true, rc.optimizer.quad_nodes);
    auto stats = tab.statistics(rc.model.z, rc.model.beta);
    nlohmann::json per = nlohmann::json::object();
    for (std::size_t k = 0; k < fs_list.size(); ++k)
        per[fs_list[k].name] = stats[k] / win.volume();
    nlohmann::json j{{"diagnostic", "gnz"},
                     {"z", rc.model.z},
                     {"beta", rc.model.beta},
                     {"residual_per_area", per}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and inference toolkit for finite-range Gibbs point processes"};
    app.require_subcommand(1);

    std::string config_path, out_dir, pattern_path, window_path, name;

    auto add_common = [&](CLI::App* cmd, bool needs_pattern) {
        cmd->add_option("--config", config_path, "JSON run configuration")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory (overrides the config)");
        if (needs_pattern) {
            cmd->add_option("--pattern", pattern_path, "point pattern CSV")
                ->required()
                ->check(CLI::ExistingFile);
            cmd->add_option("--window", window_path, "window sidecar JSON")
                ->required()
                ->check(CLI::ExistingFile);
        }
    };

    auto* sim = app.add_subcommand("simulate", "draw samples and write them out");
    add_common(sim, false);
    auto* est = app.add_subcommand("estimate", "fit parameters to a point pattern");
    add_common(est, true);
    est->add_option("--method", name, "takacs_fiksel | mple | mc_mle | variational");
    auto* ora = app.add_subcommand("oracle", "brute-force reference quantities");
    add_common(ora, false);
    auto* exp = app.add_subcommand("experiment", "run a canned experiment");
    add_common(exp, false);
    exp->add_option("--name", name, "experiment name (overrides the config)");
    auto* diag = app.add_subcommand("diagnose", "residual diagnostics for a pattern");
    add_common(diag, true);
    diag->add_option("--name", name, "diagnostic name (default gnz)");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig rc = parse_config(read_text_file(config_path));
        if (!out_dir.empty()) rc.out_dir = out_dir;
        if (sim->parsed()) {
            if (rc.subcommand != "simulate")
                throw GibbsboxError("config subcommand is '" + rc.subcommand +
                                    "', expected 'simulate'");
            return run_simulate(rc);
        }
        if (est->parsed()) {
            if (!name.empty()) rc.method = name;
            return run_estimate(rc, pattern_path, window_path);
        }
        if (ora->parsed()) return run_oracle(rc);
        if (exp->parsed()) {
            if (!name.empty()) rc.experiment = name;
            return run_experiment(rc);
        }
        if (!name.empty()) rc.experiment = name;
        return run_diagnose(rc, pattern_path, window_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
