#pragma once

// Evolutionary integration engine: subpopulation max-mean arithmetical
// crossover over variable-length genomes, time-variant mutation of the
// membership segment, rule insertion/deletion and elitist plus-selection.
// A plain generational GA lives alongside it as the comparison baseline.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fki/fuzzy.hpp"
#include "fki/genome.hpp"
#include "fki/random.hpp"

namespace fki {

/// A configuration invariant was violated; `field()` names the offending field.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what)
        , field_(std::move(field))
    {
    }
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct EvolutionConfig {
    std::size_t mu = 100;
    std::size_t subpops = 10;
    std::size_t generations = 300;
    double alpha = 0.01;
    double p_mf_mutation = 0.1;
    double tvm_degree = 5.0;
    double p_insert = 0.05;
    double p_delete = 0.05;
    std::pair<double, double> lambda_range{0.0, 1.0};
    /// 0 selects the default of three times the mean source rule count.
    std::size_t max_rules = 0;
    std::uint64_t seed = 1;
    // baseline GA only
    double ga_crossover_rate = 0.9;
    double ga_mutation_rate = 0.01;

    bool operator==(const EvolutionConfig&) const = default;
};

/// Throws ConfigError naming the first violated field.
void validate(const EvolutionConfig& cfg);

struct Individual {
    Genome genome;
    std::optional<FitnessReport> report;

    double fitness() const { return report ? report->fitness : 0.0; }
};

struct Population {
    std::vector<Individual> individuals;
    std::size_t subpop_count = 1;
};

struct GenerationStats {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double best_accuracy = 0.0;
    double best_complexity = 0.0;
    std::size_t best_rule_count = 0;
    double mean_fitness = 0.0;

    bool operator==(const GenerationStats&) const = default;
};

using GenerationCallback = std::function<void(const GenerationStats&)>;

/// Scores genomes against one dataset. Construction checks that the dataset
/// matches the schema; scoring is pure and thread-safe.
class Evaluator {
public:
    Evaluator(Schema schema, GeneBounds bounds, const LabeledDataset& data,
              std::vector<std::size_t> source_rule_counts, double alpha);

    FitnessReport operator()(const Genome& g) const;

    const Schema& schema() const noexcept { return schema_; }
    const GeneBounds& bounds() const noexcept { return bounds_; }
    std::span<const std::size_t> source_rule_counts() const noexcept { return source_counts_; }
    double alpha() const noexcept { return alpha_; }

private:
    Schema schema_;
    GeneBounds bounds_;
    CompiledDataset compiled_;
    std::vector<std::size_t> source_counts_;
    double alpha_;
};

/// Fills every missing report. Individuals are scored in parallel; results do
/// not depend on the number of worker threads.
void evaluate_population(Population& pop, const Evaluator& evaluate);

/// Sources first, then their union (duplicate rules dropped, partitions
/// averaged), then random genomes with 1..mean-source-count rules.
Population init_population(std::span<const KnowledgeBase> sources, const Schema& schema,
                           const GeneBounds& bounds, const EvolutionConfig& cfg, Rng& rng);

Genome merge_sources(std::span<const KnowledgeBase> sources, const GeneBounds& bounds);

struct SubpopSummary {
    std::size_t elite = 0; ///< index into the subpopulation
    std::vector<double> mean_mf;
    std::vector<RuleGene> mean_rules;
};

/// Elite is the fittest member (lowest index on ties); the means run over the
/// remaining members, rule genes truncated to the shortest of them.
SubpopSummary subpop_elite_and_mean(std::span<const Individual> sub);

Genome sbmac_offspring(const Genome& elite, std::span<const double> mean_mf,
                       std::span<const RuleGene> mean_rules, const Genome& parent, double lambda,
                       const GeneBounds& bounds);

/// Step size y * (1 - r^((1 - t/T)^b)); shrinks to zero as t approaches T.
double tvm_delta(double t, double T, double y, double b, double r);

Genome apply_tvm(Genome g, const GeneBounds& bounds, std::size_t t, std::size_t T,
                 const EvolutionConfig& cfg, Rng& rng);

/// Inserts `gene` before position `pos`; no-op at max_rules.
Genome insert_rule(Genome g, std::size_t pos, RuleGene gene, std::size_t max_rules);
/// Removes the rule at `pos`; no-op when only one rule is left.
Genome delete_rule(Genome g, std::size_t pos);

Genome insertion_deletion_mutate(Genome g, const GeneBounds& bounds, const EvolutionConfig& cfg, Rng& rng);

/// Regroups the population so that subpopulation s holds fitness ranks
/// s, s + S, s + 2S, ... in contiguous slots. Returns the subpopulation ranges.
std::vector<std::pair<std::size_t, std::size_t>> arrange_subpopulations(Population& pop);

/// Keeps the best mu of parents and offspring. Surviving parents keep their
/// slots; freed slots take the surviving offspring in rank order.
Population survivor_selection(Population parents, std::vector<Individual> offspring);

GenerationStats population_stats(const Population& pop, std::size_t generation);

/// One generation of the integration strategy. `t` is the 0-based generation.
void nes_generation(Population& pop, const Evaluator& evaluate, std::size_t t,
                    const EvolutionConfig& cfg, Rng& rng);

struct IntegrationResult {
    KnowledgeBase best;
    FitnessReport best_report;
    std::vector<GenerationStats> history;
};

/// Shared setup for both engines: merged schema, bounds, evaluator.
struct IntegrationSetup {
    Schema schema;
    GeneBounds bounds;
    std::vector<std::size_t> source_rule_counts;
};

IntegrationSetup prepare_integration(std::span<const KnowledgeBase> sources, const LabeledDataset& data,
                                     const EvolutionConfig& cfg);

IntegrationResult run_integration(std::span<const KnowledgeBase> sources, const LabeledDataset& data,
                                  const EvolutionConfig& cfg, const GenerationCallback& on_generation = {});

/// Child takes `a`'s first `cut` rules, `b`'s remaining rules and `b`'s membership block.
Genome one_point_crossover(const Genome& a, const Genome& b, std::size_t cut);

/// Roulette selection, one-point crossover at a rule boundary, uniform-reset
/// mutation and elitism of one.
Population baseline_ga_step(const Population& pop, const Evaluator& evaluate, const EvolutionConfig& cfg,
                            Rng& rng);

IntegrationResult run_baseline_ga(std::span<const KnowledgeBase> sources, const LabeledDataset& data,
                                  const EvolutionConfig& cfg, const GenerationCallback& on_generation = {});

} // namespace fki
