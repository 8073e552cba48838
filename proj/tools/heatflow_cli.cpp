// heatflow <experiment> [--config PATH] [--seed U64] [--out DIR]
//          [--mc-samples M] [--precision-bits B] [--threads K]
//
// Exit status: 0 when every configured threshold passed, 1 when a threshold
// failed or the run raised, 2 on a usage or config error.

#include "heatflow/errors.hpp"
#include "heatflow/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Heat flow on random characteristic polynomials"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<long long> mc_samples;
    std::optional<long> precision_bits;
    std::optional<int> threads;

    for (const char* name : {"flow", "deformation", "moments", "hermite", "beyond", "pde-residual"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--mc-samples", mc_samples, "Monte Carlo sample count");
        sub->add_option("--precision-bits", precision_bits, "working precision of polynomial arithmetic");
        sub->add_option("--threads", threads, "worker threads (env HEATFLOW_THREADS)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage problems count as an invalid config
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string experiment = app.get_subcommands().front()->get_name();

    try {
        nlohmann::json doc;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            std::stringstream ss;
            ss << is.rdbuf();
            try {
                doc = nlohmann::json::parse(ss.str());
            } catch (const nlohmann::json::parse_error& e) {
                throw heatflow::ConfigInvalid(config_path + ": " + e.what());
            }
            if (!doc.is_object()) throw heatflow::ConfigInvalid(config_path + ": not a JSON object");
            if (doc.contains("experiment") && doc["experiment"] != experiment)
                throw heatflow::ConfigInvalid("config is for experiment '" + doc["experiment"].get<std::string>() +
                                              "', not '" + experiment + "'");
            doc["experiment"] = experiment;
        } else {
            doc = heatflow::default_config(experiment);
        }
        if (seed) doc["seed"] = *seed;
        if (!out_dir.empty()) doc["outputs"] = out_dir;
        if (mc_samples) doc["mc_samples"] = *mc_samples;
        if (precision_bits) doc["precision_bits"] = *precision_bits;
        if (threads) {
            doc["threads"] = *threads;
        } else if (const char* env = std::getenv("HEATFLOW_THREADS"); env != nullptr && !doc.contains("threads")) {
            try {
                doc["threads"] = std::stoi(env);
            } catch (const std::exception&) {
                throw heatflow::ConfigInvalid(std::string("HEATFLOW_THREADS is not an integer: ") + env);
            }
        }

        const auto config = heatflow::parse_config(doc);
        const auto manifest = heatflow::run(config);
        for (const auto& [k, v] : manifest.metrics) std::cout << k << " = " << v << "\n";
        for (const auto& c : manifest.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << (c.relation == "le" ? " <= " : " >= ")
                      << c.threshold << "\n";
        if (!manifest.error.empty()) std::cerr << "error: " << manifest.error << "\n";
        std::cout << "manifest: " << config.outputs << "/manifest.json\n";
        return manifest.passed ? 0 : 1;
    } catch (const heatflow::ConfigInvalid& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
