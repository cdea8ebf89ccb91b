// fki: bootstrap source knowledge bases, integrate them, evaluate and compare.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fki/harness.hpp"

namespace {

using namespace fki;

struct ConfigFlags {
    std::string config_path;
    std::size_t mu = 0, subpops = 0, generations = 0, max_rules = 0;
    double alpha = 0, p_mf_mutation = 0, tvm_degree = 0, p_insert = 0, p_delete = 0;
    double lambda_min = 0, lambda_max = 1;
    std::uint64_t seed = 0;

    void attach(CLI::App& cmd)
    {
        cmd.add_option("--config", config_path, "Flat JSON file with evolution settings");
        cmd.add_option("--mu", mu, "Population size");
        cmd.add_option("--subpops", subpops, "Number of subpopulations");
        cmd.add_option("--generations,-T", generations, "Number of generations");
        cmd.add_option("--alpha", alpha, "Complexity exponent in the fitness");
        cmd.add_option("--p-mf-mutation", p_mf_mutation, "Per-gene time-variant mutation probability");
        cmd.add_option("--tvm-degree", tvm_degree, "Decay exponent b of the time-variant mutation");
        cmd.add_option("--p-insert", p_insert, "Rule insertion probability");
        cmd.add_option("--p-delete", p_delete, "Rule deletion probability");
        cmd.add_option("--lambda-min", lambda_min, "Lower end of the crossover weight range");
        cmd.add_option("--lambda-max", lambda_max, "Upper end of the crossover weight range");
        cmd.add_option("--max-rules", max_rules, "Rule cap (0 = three times the mean source count)");
        cmd.add_option("--seed", seed, "Random seed");
    }

    /// Defaults, then the config file, then explicit flags.
    EvolutionConfig resolve(const CLI::App& cmd) const
    {
        EvolutionConfig cfg;
        if (!config_path.empty())
            cfg = load_config(config_path, cfg);
        auto given = [&](const char* name) { return cmd.count(name) > 0; };
        if (given("--mu")) cfg.mu = mu;
        if (given("--subpops")) cfg.subpops = subpops;
        if (given("--generations")) cfg.generations = generations;
        if (given("--alpha")) cfg.alpha = alpha;
        if (given("--p-mf-mutation")) cfg.p_mf_mutation = p_mf_mutation;
        if (given("--tvm-degree")) cfg.tvm_degree = tvm_degree;
        if (given("--p-insert")) cfg.p_insert = p_insert;
        if (given("--p-delete")) cfg.p_delete = p_delete;
        if (given("--lambda-min")) cfg.lambda_range.first = lambda_min;
        if (given("--lambda-max")) cfg.lambda_range.second = lambda_max;
        if (given("--max-rules")) cfg.max_rules = max_rules;
        if (given("--seed")) cfg.seed = seed;
        return cfg;
    }
};

const std::vector<std::string> kFormats{"hepatitis", "iris", "tictactoe", "generic"};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fuzzy knowledge-base integration"};
    app.require_subcommand(1);

    BootstrapArgs boot;
    std::string boot_format = "iris";
    auto* bootstrap = app.add_subcommand("bootstrap", "Induce P source knowledge bases from a dataset");
    bootstrap->add_option("--data", boot.data, "Dataset file")->required();
    bootstrap->add_option("--format", boot_format, "Dataset format")->check(CLI::IsMember(kFormats));
    bootstrap->add_option("--schema", boot.schema, "Schema sidecar for generic CSV");
    bootstrap->add_option("--sources,-P", boot.sources, "Number of sources");
    bootstrap->add_option("--linguistic,-L", boot.num_linguistic, "Linguistic values per numeric feature");
    bootstrap->add_option("--margin", boot.margin, "Relative padding of feature bounds");
    bootstrap->add_option("--seed", boot.seed, "Random seed for the source split");
    bootstrap->add_option("--out", boot.out, "Output directory")->required();

    IntegrateArgs integ;
    ConfigFlags integ_flags;
    auto* integrate = app.add_subcommand("integrate", "Integrate the sources listed in a manifest");
    integrate->add_option("--manifest", integ.manifest, "manifest.json from bootstrap")->required();
    integrate->add_option("--out", integ.out, "Output directory")->required();
    integ_flags.attach(*integrate);

    EvaluateArgs eval;
    std::string eval_format = "iris";
    auto* evaluate = app.add_subcommand("evaluate", "Report the accuracy of a knowledge base on a dataset");
    evaluate->add_option("--kb", eval.kb, "Knowledge base JSON")->required();
    evaluate->add_option("--data", eval.data, "Dataset file")->required();
    evaluate->add_option("--format", eval_format, "Dataset format")->check(CLI::IsMember(kFormats));
    evaluate->add_option("--schema", eval.schema, "Schema sidecar for generic CSV");

    CompareArgs cmp;
    ConfigFlags cmp_flags;
    double cmp_target = 0.0;
    auto* compare = app.add_subcommand("compare", "Run the integration strategy and the baseline GA per seed");
    compare->add_option("--manifest", cmp.manifest, "manifest.json from bootstrap")->required();
    compare->add_option("--out", cmp.out, "Output directory")->required();
    compare->add_option("--seeds", cmp.seeds, "Seeds to run")->delimiter(',')->required();
    compare->add_option("--target", cmp_target, "Fitness level for generations-to-target (default: GA median)");
    cmp_flags.attach(*compare);

    SynthArgs syn;
    auto* synth = app.add_subcommand("synth", "Write a Gaussian-cluster dataset and its schema sidecar");
    synth->add_option("--rows", syn.rows, "Number of records");
    synth->add_option("--features", syn.features, "Number of numeric features");
    synth->add_option("--classes", syn.classes, "Number of classes");
    synth->add_option("--separation", syn.separation, "Distance between class centers in noise units");
    synth->add_option("--seed", syn.seed, "Random seed");
    synth->add_option("--out", syn.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code::usage;
    }

    if (*bootstrap) {
        return guarded(
            [&] {
                boot.format = parse_format(boot_format);
                cmd_bootstrap(boot);
            },
            std::cerr);
    }
    if (*integrate) {
        return guarded(
            [&] {
                integ.config = integ_flags.resolve(*integrate);
                cmd_integrate(integ);
            },
            std::cerr);
    }
    if (*evaluate) {
        return guarded(
            [&] {
                eval.format = parse_format(eval_format);
                std::cout << evaluate_json_line(cmd_evaluate(eval)) << std::endl;
            },
            std::cerr);
    }
    if (*compare) {
        return guarded(
            [&] {
                cmp.config = cmp_flags.resolve(*compare);
                if (compare->count("--target"))
                    cmp.target = cmp_target;
                const auto res = cmd_compare(cmp);
                std::cout << "target fitness " << format_real(res.target) << "\n";
            },
            std::cerr);
    }
    if (*synth)
        return guarded([&] { cmd_synth(syn); }, std::cerr);
    return exit_code::usage;
}
