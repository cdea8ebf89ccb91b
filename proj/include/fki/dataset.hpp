#pragma once

// Loaders for UCI-style comma-separated files plus the small transforms the
// harness needs: feature bounds, missing-value policy and source splitting.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fki/fuzzy.hpp"

namespace fki {

enum class DatasetFormat { Hepatitis, Iris, TicTacToe, GenericCsv };

DatasetFormat parse_format(const std::string& name);
std::string format_name(DatasetFormat format);

/// Column names of the UCI hepatitis file after the leading class column.
const std::vector<std::string>& hepatitis_columns();
/// The five laboratory features used by default.
const std::vector<std::string>& hepatitis_default_features();

struct LoadOptions {
    /// Linguistic values per numeric feature.
    int num_linguistic = 3;
    /// Relative padding applied by feature_bounds.
    double margin = 0.0;
    /// Hepatitis only: which columns to keep, by name. Empty keeps the default five.
    std::vector<std::string> hepatitis_features;
    /// GenericCsv only: JSON sidecar describing the columns.
    std::filesystem::path schema_path;
};

/// Parses a dataset from text. `origin` names the source in error messages.
LabeledDataset parse_dataset(DatasetFormat format, const std::string& text, const LoadOptions& options = {},
                             const std::string& origin = "<memory>");

LabeledDataset load_dataset(DatasetFormat format, const std::filesystem::path& path,
                            const LoadOptions& options = {});

/// Per feature: (lower, upper) for numeric features, nullopt for categorical.
std::vector<std::optional<std::pair<double, double>>> feature_bounds(const LabeledDataset& data, double margin);

/// Copies feature_bounds into the dataset's numeric feature specs.
void apply_feature_bounds(LabeledDataset& data, double margin);

enum class ImputePolicy { KeepMissing, MeanImpute };

LabeledDataset impute_policy(LabeledDataset data, ImputePolicy policy);

/// Shuffles rows with `seed`, then deals each class's rows round-robin over P
/// partitions, continuing the deal across classes.
std::vector<LabeledDataset> split_sources(const LabeledDataset& data, std::size_t P, std::uint64_t seed);

} // namespace fki
