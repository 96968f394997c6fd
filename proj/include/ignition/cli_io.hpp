#pragma once

// Run configuration files, report persistence with checksummed manifests,
// and static SVG plots.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ignition/experiments.hpp"

namespace ignition {

struct ModelConfig {
    double theta = 0.25;
    double theta_star = 0.75;
    std::string shape = "quadratic_ignition";
    ForcingKind forcing_kind = ForcingKind::periodic;
    double base_level = 1.0;
    std::vector<ForcingComponent> components{{1.0, 0.4, 0.0}};
    std::optional<double> beta;
};

/// Validated run configuration. Every field has a default, so a file with
/// only model.theta is complete.
struct RunConfig {
    ModelConfig model;
    SolverConfig solver;
    /// All experiment parameters; model, solver, seed and config_hash are
    /// filled from the other sections.
    ExperimentSpec experiment;
    std::string output = "out";
    std::uint64_t seed = 0;
};

/// Overrides applied on top of a file (command-line flags).
struct ConfigOverrides {
    std::optional<double> h;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    std::optional<std::string> kind;
};

/// Throws IoError when unreadable, ConfigError with line/column on parse
/// errors and with the key path on validation errors.
RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});
/// Same on text already in memory; `source` names it in messages.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>",
                       const ConfigOverrides& overrides = {});
/// Defaults only (plus overrides).
RunConfig default_config(const ConfigOverrides& overrides = {});

/// The validated config with every default spelled out; reloading it yields the same config.
nlohmann::json echo_config(const RunConfig& cfg);
/// SHA-256 (hex) of the compact echoed config.
std::string config_hash(const RunConfig& cfg);

IgnitionNonlinearity build_model(const ModelConfig& m, std::uint64_t seed);
/// Experiment spec with model, solver, seed and config hash filled in.
ExperimentSpec build_spec(const RunConfig& cfg);

nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(const HypothesisReport& report);
nlohmann::json to_json(const SqueezeConstants& constants);

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    std::string started;
    std::string finished;
    std::vector<ManifestEntry> files;
    nlohmann::json config;
};

/// Writes report.json, CSV files for the trace, spectrum (spectra.csv),
/// profile and series groups, SVG plots, and manifest.json. Identical inputs
/// give identical bytes. Throws IoError naming the path on write failure.
RunManifest emit_report(const ExperimentReport& report, const std::string& dir,
                        const nlohmann::json& echoed_config = nlohmann::json::object());

/// Writes manifest.json for files already present in dir.
RunManifest write_manifest(const std::string& dir, const std::vector<std::string>& files,
                           const Provenance& provenance, const nlohmann::json& echoed_config);

/// Paths whose checksum or size no longer matches manifest.json (empty when all verify).
std::vector<std::string> verify_manifest(const std::string& dir);

std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

/// xi(t), overlaid with xi_tilde(t) when present.
void emit_plot(const FrontTrace& trace, const std::string& path);
/// psi vs x with a horizontal line at theta.
void emit_plot(const WaveProfileSnapshot& profile, double theta, const std::string& path);
/// log10 power vs frequency with module markers and the floor.
void emit_plot(const Spectrum& spectrum, const std::string& path);

/// Levenshtein distance, used for key suggestions.
std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace ignition
