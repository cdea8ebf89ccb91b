#pragma once

// Command implementations behind the `fki` executable. Each command writes its
// artifacts atomically and is deterministic in its arguments.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fki/dataset.hpp"
#include "fki/evolution.hpp"
#include "fki/kb_json.hpp"

namespace fki {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int data = 2;
inline constexpr int config = 3;
} // namespace exit_code

/// Runs `body`, mapping exceptions to exit codes with a diagnostic on `err`.
int guarded(const std::function<void()>& body, std::ostream& err);

// ---- configuration -------------------------------------------------------

ordered_json config_to_json(const EvolutionConfig& cfg);
/// Flat object using the EvolutionConfig field names; unknown fields are a ConfigError.
EvolutionConfig config_from_json(const ordered_json& j, EvolutionConfig base = {});
EvolutionConfig load_config(const std::filesystem::path& path, EvolutionConfig base = {});

// ---- manifest ------------------------------------------------------------

struct Manifest {
    DatasetFormat format = DatasetFormat::Iris;
    std::filesystem::path data;
    std::filesystem::path schema; ///< generic CSV sidecar, may be empty
    int num_linguistic = 3;
    double margin = 0.0;
    std::uint64_t seed = 0;
    std::vector<FeatureSpec> features;
    std::vector<std::string> classes;
    std::vector<std::filesystem::path> source_files;
    std::vector<std::size_t> source_rule_counts;

    LoadOptions load_options() const;
};

ordered_json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const ordered_json& j, const std::filesystem::path& base_dir);
Manifest read_manifest(const std::filesystem::path& path);

/// Manifest plus the loaded data and source knowledge bases.
struct Workspace {
    Manifest manifest;
    LabeledDataset data;
    std::vector<KnowledgeBase> sources;
};

Workspace open_workspace(const std::filesystem::path& manifest_path);

// ---- artifacts -----------------------------------------------------------

/// Shortest round-trip decimal form, always with '.' as the separator.
std::string format_real(double x);

std::string run_csv(const std::vector<GenerationStats>& history);
/// Per numeric feature and linguistic value: left foot, apex abscissa, right foot, apex height.
std::string mf_plot_csv(const KnowledgeBase& kb);

/// 1-based generation at which best_fitness first reaches `target`.
std::optional<std::size_t> generations_to_target(const std::vector<GenerationStats>& history, double target);

double median(std::vector<double> values);

// ---- commands ------------------------------------------------------------

struct BootstrapArgs {
    std::filesystem::path data;
    DatasetFormat format = DatasetFormat::Iris;
    std::filesystem::path schema;
    std::size_t sources = 3;
    int num_linguistic = 3;
    double margin = 0.0;
    std::uint64_t seed = 1;
    std::filesystem::path out;
};

/// Writes source_<i>.json for each share plus manifest.json.
void cmd_bootstrap(const BootstrapArgs& args);

struct IntegrateArgs {
    std::filesystem::path manifest;
    EvolutionConfig config;
    std::filesystem::path out;
};

struct IntegrateOutcome {
    IntegrationResult result;
    std::filesystem::path run_csv, best_kb, mf_plot, run_meta;
};

/// Writes run.csv, best_kb.json, mf_plot.csv and run_meta.json.
IntegrateOutcome cmd_integrate(const IntegrateArgs& args);

struct EvaluateArgs {
    std::filesystem::path kb;
    std::filesystem::path data;
    DatasetFormat format = DatasetFormat::Iris;
    std::filesystem::path schema;
    std::vector<std::string> hepatitis_features;
};

struct EvaluateOutcome {
    double accuracy = 0.0;
    std::size_t matched = 0;
    std::size_t total = 0;
};

EvaluateOutcome cmd_evaluate(const EvaluateArgs& args);
std::string evaluate_json_line(const EvaluateOutcome& o);

struct CompareArgs {
    std::filesystem::path manifest;
    EvolutionConfig config;
    std::vector<std::uint64_t> seeds;
    /// Fitness level for generations_to_reach_target; defaults to the GA's median final fitness.
    std::optional<double> target;
    std::filesystem::path out;
};

struct CompareRow {
    std::uint64_t seed = 0;
    std::string method;
    double final_accuracy = 0.0;
    double final_fitness = 0.0;
    std::optional<std::size_t> generations_to_target;
};

struct CompareOutcome {
    double target = 0.0;
    std::vector<CompareRow> rows;
};

/// Writes comparison.csv; never-reached targets are written as -1.
CompareOutcome cmd_compare(const CompareArgs& args);

struct SynthArgs {
    std::size_t rows = 100;
    std::size_t features = 2;
    std::size_t classes = 2;
    double separation = 6.0;
    std::uint64_t seed = 1;
    std::filesystem::path out;
};

/// Gaussian blob per class. Writes synth.csv and synth.schema.json.
void cmd_synth(const SynthArgs& args);

} // namespace fki
