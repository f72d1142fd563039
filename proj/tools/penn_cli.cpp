#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "penn/experiment.hpp"
#include "penn/net_algebra.hpp"

namespace fs = std::filesystem;
using penn::Json;

namespace {

void emit_error(const std::string& message) {
    Json err;
    err["error"] = message;
    std::cerr << err.dump() << std::endl;
}

struct SimulateConfig {
    std::string model;
    int d = 20;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    std::string out;
};

SimulateConfig parse_simulate_config(const Json& doc) {
    for (const auto& [key, value] : doc.items()) {
        if (key != "version" && key != "model" && key != "d" && key != "n" && key != "seed" &&
            key != "out") {
            throw std::invalid_argument("simulate config: unknown key '" + key + "'");
        }
    }
    if (doc.value("version", 0) != 1) {
        throw std::invalid_argument("simulate config: unsupported or missing version");
    }
    SimulateConfig cfg;
    cfg.model = doc.at("model").get<std::string>();
    cfg.d = doc.value("d", cfg.d);
    cfg.n = doc.value("n", cfg.n);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.out = doc.value("out", "");
    if (cfg.n < 1) throw std::invalid_argument("simulate config: n must be >= 1");
    return cfg;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_override) {
    SimulateConfig cfg = parse_simulate_config(penn::load_json(config_path));
    if (seed) cfg.seed = *seed;
    if (!out_override.empty()) cfg.out = out_override;
    if (cfg.out.empty()) cfg.out = "out_simulate";

    penn::SimModel model = penn::SimModel::by_name(cfg.model, cfg.d);
    penn::Rng rng(cfg.seed);
    penn::SampleSet rows = penn::sample(model, cfg.n, rng);

    fs::create_directories(cfg.out);
    const fs::path csv_path = fs::path(cfg.out) / "dataset.csv";
    penn::write_dataset_csv(csv_path, rows);

    Json manifest;
    manifest["format"] = "penn-manifest";
    manifest["version"] = 1;
    manifest["model"] = cfg.model;
    manifest["seed"] = cfg.seed;
    manifest["n"] = cfg.n;
    manifest["d"] = cfg.d;
    manifest["files"] =
        Json::array({Json{{"path", "dataset.csv"}, {"hash", penn::file_hash(csv_path)}}});
    penn::save_json(fs::path(cfg.out) / "manifest.json", manifest);
    std::cout << "wrote " << csv_path.string() << " (" << cfg.n << " rows)\n";
    return 0;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_override, bool emit_plots) {
    penn::ExperimentConfig cfg = penn::ExperimentConfig::from_json(penn::load_json(config_path));
    if (seed) cfg.seed = *seed;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (cfg.out_dir.empty()) cfg.out_dir = "out_run";

    penn::ExperimentResult result = penn::run_experiment(cfg);
    auto files = penn::write_experiment_outputs(result, cfg.out_dir, emit_plots);
    std::size_t failed = 0;
    for (const auto& unit : result.units) failed += unit.failed;
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
    if (failed > 0) {
        std::cout << failed << " of " << result.units.size()
                  << " repetition units failed (see result.json)\n";
    }
    return 0;
}

int cmd_reproduce(const std::string& preset, double scale, std::uint64_t seed,
                  const std::string& out_override) {
    penn::ExperimentConfig cfg = penn::preset_config(preset, scale, seed);
    cfg.out_dir = out_override.empty() ? "out_" + preset : out_override;
    penn::ExperimentResult result = penn::run_experiment(cfg);
    auto files = penn::write_experiment_outputs(result, cfg.out_dir, /*emit_plots=*/true);
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
    for (const auto& [imputer, summary] : result.summaries) {
        std::cout << preset << " (" << imputer << "): penn wins " << summary.penn_wins << "/"
                  << summary.n_seeds << ", median " << summary.metric << " difference "
                  << summary.median_difference << '\n';
    }
    return 0;
}

int cmd_certify(const std::string& partition_path, const std::string& out_path) {
    const Json doc = penn::load_json(partition_path);
    penn::PatternPartition partition = penn::partition_from_json(doc);

    penn::SeparationCertificate cert;
    if (!doc.contains("separation") ||
        doc.at("separation").value("mode", "coordinates") == "coordinates") {
        std::vector<int> coords;
        if (doc.contains("separation") && doc.at("separation").contains("coordinates")) {
            coords = doc.at("separation").at("coordinates").get<std::vector<int>>();
        } else {
            for (int j = 1; j <= partition.d; ++j) coords.push_back(j);  // arbitrary partition
        }
        cert = penn::separate_by_coordinates(partition, coords);
    } else if (doc.at("separation").at("mode") == "halfspaces") {
        std::vector<std::vector<penn::Halfspace>> halfspaces;
        for (const auto& cell : doc.at("separation").at("halfspaces")) {
            std::vector<penn::Halfspace> list;
            for (const auto& h : cell) {
                list.push_back({h.at("v").get<penn::Vector>(), h.at("b").get<double>()});
            }
            halfspaces.push_back(std::move(list));
        }
        cert = penn::separate_by_halfspaces(partition, halfspaces);
    } else {
        throw std::invalid_argument("certify: separation mode must be coordinates or halfspaces");
    }

    std::string why;
    const bool ok = penn::verify_certificate(cert, partition, &why);
    Json out = penn::to_json(cert);
    out["verdict"] = ok ? "pass" : "fail";
    if (!ok) out["reason"] = why;
    const std::string path = out_path.empty() ? "certificate.json" : out_path;
    penn::save_json(path, out);
    std::cout << (ok ? "pass" : "fail") << ": wrote " << path << '\n';
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pattern embedded neural networks for regression with missing covariates"};
    app.require_subcommand(1);

    std::string config_path, out_dir, preset, partition_path;
    std::optional<std::uint64_t> seed_override;
    std::uint64_t reproduce_seed = 1;
    double scale = 0.2;

    auto* simulate = app.add_subcommand("simulate", "Generate a simulated dataset CSV");
    simulate->add_option("--config", config_path, "simulate config JSON")->required();
    simulate->add_option("--seed", seed_override, "override the config seed");
    simulate->add_option("--out", out_dir, "output directory");

    auto* run = app.add_subcommand("run", "Run a full experiment from a config file");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--seed", seed_override, "override the config seed");
    run->add_option("--out", out_dir, "output directory");
    bool run_plots = false;
    run->add_flag("--plots", run_plots, "also emit box-plot SVG output");

    auto* reproduce =
        app.add_subcommand("reproduce", "Reproduce a simulated experiment preset at desk scale");
    reproduce->add_option("--preset", preset, "example1 | model1 | model2 | model3 | model4")
        ->required();
    reproduce->add_option("--scale", scale, "size multiplier in (0, 1], default 0.2");
    reproduce->add_option("--seed", reproduce_seed, "base seed");
    reproduce->add_option("--out", out_dir, "output directory");

    auto* certify = app.add_subcommand("certify", "Build and verify a separation certificate");
    certify->add_option("--partition", partition_path, "partition JSON file")->required();
    certify->add_option("--out", out_dir, "certificate output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::ostringstream msg;
        msg << e.what();
        emit_error(msg.str());
        return app.exit(e);
    }

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, seed_override, out_dir);
        if (run->parsed()) return cmd_run(config_path, seed_override, out_dir, run_plots);
        if (reproduce->parsed()) return cmd_reproduce(preset, scale, reproduce_seed, out_dir);
        if (certify->parsed()) return cmd_certify(partition_path, out_dir);
    } catch (const std::exception& e) {
        emit_error(e.what());
        return 1;
    }
    return 0;
}
