#pragma once

// Configured experiment runs: config parsing, the experiment bodies, and the
// run manifest.

#include "heatflow/artifacts.hpp"
#include "heatflow/models.hpp"
#include "heatflow/polyheat.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace heatflow {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
    /// flow | deformation | moments | hermite | beyond | pde-residual
    std::string experiment;
    /// Sampled at tau0 (model.params.tau is overwritten by tau0).
    ModelSpec model;
    cplx tau0{1.0, 0.0};
    cplx tau{0.0, 0.0};
    int t_samples = 11;
    std::string outputs = "out";
    std::uint64_t seed = 1;
    mp::Precision precision_bits = 0;
    std::size_t mc_samples = 0;
    int threads = 1;
    std::map<std::string, double> thresholds;
    /// Experiment-specific knobs (see README).
    nlohmann::json options = nlohmann::json::object();
    /// The document as given, echoed in the manifest.
    nlohmann::json source = nlohmann::json::object();
};

/// Throws ConfigInvalid.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(std::string_view text);
/// Minimal config for an experiment name (used when no file is given).
nlohmann::json default_config(std::string_view experiment);

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    /// "le" passes when value <= threshold, "ge" when value >= threshold.
    std::string relation = "le";
    bool pass = false;
};

struct StageTiming {
    std::string name;
    double seconds = 0.0;
};

struct RunManifest {
    nlohmann::json config;
    std::string version = kVersion;
    double wall_seconds = 0.0;
    std::vector<StageTiming> stages;
    std::vector<FileRecord> files;
    std::map<std::string, double> metrics;
    std::vector<Check> checks;
    bool passed = false;
    std::string error;

    nlohmann::json to_json() const;
};

/// Runs the experiment end to end, writes artifacts and manifest.json under
/// config.outputs. Module errors are caught and recorded (passed = false).
RunManifest run(const ExperimentConfig& config);

/// Zeros with |Im z| <= tol (1 + |Re z|). Requires real coefficients up to tol.
int real_root_count(const Poly& p, double tol = 1e-8);

}  // namespace heatflow
