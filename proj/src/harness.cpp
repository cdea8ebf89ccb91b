#include "fki/harness.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>

#include "fki/bootstrap.hpp"
#include "fki/random.hpp"

namespace fki {

namespace fs = std::filesystem;

int guarded(const std::function<void()>& body, std::ostream& err)
{
    try {
        body();
        return exit_code::ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return exit_code::data;
    } catch (const std::invalid_argument& e) {
        err << "data error: " << e.what() << "\n";
        return exit_code::data;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return exit_code::data;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::data;
    }
}

// ---- configuration -------------------------------------------------------

ordered_json config_to_json(const EvolutionConfig& cfg)
{
    ordered_json j;
    j["mu"] = cfg.mu;
    j["subpops"] = cfg.subpops;
    j["generations"] = cfg.generations;
    j["alpha"] = cfg.alpha;
    j["p_mf_mutation"] = cfg.p_mf_mutation;
    j["tvm_degree"] = cfg.tvm_degree;
    j["p_insert"] = cfg.p_insert;
    j["p_delete"] = cfg.p_delete;
    j["lambda_range"] = {cfg.lambda_range.first, cfg.lambda_range.second};
    j["max_rules"] = cfg.max_rules;
    j["seed"] = cfg.seed;
    j["ga_crossover_rate"] = cfg.ga_crossover_rate;
    j["ga_mutation_rate"] = cfg.ga_mutation_rate;
    return j;
}

namespace {

template <typename T>
T field_as(const ordered_json& v, const std::string& name)
{
    try {
        if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_integer() && v.get<long long>() < 0)
                throw ConfigError(name, "must be non-negative");
            if (!v.is_number_integer())
                throw ConfigError(name, "must be an integer");
        } else if (!v.is_number()) {
            throw ConfigError(name, "must be a number");
        }
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(name, "has the wrong type");
    }
}

} // namespace

EvolutionConfig config_from_json(const ordered_json& j, EvolutionConfig cfg)
{
    if (!j.is_object())
        throw ConfigError("config", "must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "mu")
            cfg.mu = field_as<std::size_t>(v, key);
        else if (key == "subpops")
            cfg.subpops = field_as<std::size_t>(v, key);
        else if (key == "generations")
            cfg.generations = field_as<std::size_t>(v, key);
        else if (key == "alpha")
            cfg.alpha = field_as<double>(v, key);
        else if (key == "p_mf_mutation")
            cfg.p_mf_mutation = field_as<double>(v, key);
        else if (key == "tvm_degree")
            cfg.tvm_degree = field_as<double>(v, key);
        else if (key == "p_insert")
            cfg.p_insert = field_as<double>(v, key);
        else if (key == "p_delete")
            cfg.p_delete = field_as<double>(v, key);
        else if (key == "lambda_range") {
            if (!v.is_array() || v.size() != 2)
                throw ConfigError(key, "must be a two-element array");
            cfg.lambda_range = {field_as<double>(v[0], key), field_as<double>(v[1], key)};
        } else if (key == "max_rules")
            cfg.max_rules = field_as<std::size_t>(v, key);
        else if (key == "seed")
            cfg.seed = field_as<std::uint64_t>(v, key);
        else if (key == "ga_crossover_rate")
            cfg.ga_crossover_rate = field_as<double>(v, key);
        else if (key == "ga_mutation_rate")
            cfg.ga_mutation_rate = field_as<double>(v, key);
        else
            throw ConfigError(key, "unknown config field");
    }
    return cfg;
}

EvolutionConfig load_config(const fs::path& path, EvolutionConfig base)
{
    ordered_json j;
    try {
        j = ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
    return config_from_json(j, base);
}

// ---- manifest ------------------------------------------------------------

LoadOptions Manifest::load_options() const
{
    LoadOptions o;
    o.num_linguistic = num_linguistic;
    o.margin = margin;
    o.schema_path = schema;
    if (format == DatasetFormat::Hepatitis) {
        for (const auto& f : features)
            o.hepatitis_features.push_back(f.name);
    }
    return o;
}

ordered_json manifest_to_json(const Manifest& m)
{
    ordered_json j;
    j["format"] = format_name(m.format);
    j["data"] = m.data.string();
    j["schema_file"] = m.schema.string();
    j["num_linguistic"] = m.num_linguistic;
    j["margin"] = m.margin;
    j["seed"] = m.seed;
    auto schema = ordered_json::object();
    schema["features"] = ordered_json::array();
    for (const auto& f : m.features)
        schema["features"].push_back(feature_to_json(f));
    schema["classes"] = m.classes;
    j["schema"] = std::move(schema);
    j["bounds"] = ordered_json::array();
    for (const auto& f : m.features) {
        if (f.is_numeric())
            j["bounds"].push_back(ordered_json{{"feature", f.name}, {"lower", f.lower}, {"upper", f.upper}});
    }
    j["sources"] = ordered_json::array();
    for (const auto& p : m.source_files)
        j["sources"].push_back(p.string());
    j["source_rule_counts"] = m.source_rule_counts;
    return j;
}

Manifest manifest_from_json(const ordered_json& j, const fs::path& base_dir)
{
    Manifest m;
    try {
        m.format = parse_format(j.at("format").get<std::string>());
        m.data = j.at("data").get<std::string>();
        m.schema = j.value("schema_file", std::string{});
        m.num_linguistic = j.value("num_linguistic", 3);
        m.margin = j.value("margin", 0.0);
        m.seed = j.value("seed", std::uint64_t{0});
        for (const auto& f : j.at("schema").at("features"))
            m.features.push_back(feature_from_json(f));
        m.classes = j.at("schema").at("classes").get<std::vector<std::string>>();
        for (const auto& s : j.at("sources")) {
            fs::path p = s.get<std::string>();
            m.source_files.push_back(p.is_absolute() ? p : base_dir / p);
        }
        m.source_rule_counts = j.at("source_rule_counts").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
    if (m.data.is_relative())
        m.data = base_dir / m.data;
    if (!m.schema.empty() && m.schema.is_relative())
        m.schema = base_dir / m.schema;
    if (m.source_files.empty())
        throw DataError("manifest lists no sources");
    return m;
}

Manifest read_manifest(const fs::path& path)
{
    ordered_json j;
    try {
        j = ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("manifest is not valid JSON: " + std::string(e.what()));
    }
    return manifest_from_json(j, path.parent_path());
}

Workspace open_workspace(const fs::path& manifest_path)
{
    Workspace ws;
    ws.manifest = read_manifest(manifest_path);
    ws.data = load_dataset(ws.manifest.format, ws.manifest.data, ws.manifest.load_options());
    // the manifest's bounds are authoritative for the schema
    if (!same_schema(ws.data.features, ws.manifest.features) || ws.data.classes != ws.manifest.classes)
        throw DataError("dataset no longer matches the manifest schema");
    ws.data.features = ws.manifest.features;
    for (const auto& p : ws.manifest.source_files)
        ws.sources.push_back(read_kb_file(p));
    return ws;
}

// ---- artifacts -----------------------------------------------------------

std::string format_real(double x)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc())
        return "nan";
    return std::string(buf, ptr);
}

std::string run_csv(const std::vector<GenerationStats>& history)
{
    std::string s = "t,best_fitness,best_accuracy,best_complexity,best_rule_count,mean_fitness\n";
    for (const auto& h : history) {
        s += std::to_string(h.generation) + "," + format_real(h.best_fitness) + "," + format_real(h.best_accuracy)
            + "," + format_real(h.best_complexity) + "," + std::to_string(h.best_rule_count) + ","
            + format_real(h.mean_fitness) + "\n";
    }
    return s;
}

std::string mf_plot_csv(const KnowledgeBase& kb)
{
    std::string s = "feature,linguistic_index,left,apex,right,apex_membership\n";
    std::size_t part = 0;
    for (const auto& f : kb.features) {
        if (!f.is_numeric())
            continue;
        const auto& mfs = kb.partitions[part++].mfs;
        for (std::size_t j = 0; j < mfs.size(); ++j) {
            const auto& mf = mfs[j];
            s += f.name + "," + std::to_string(j) + "," + format_real(mf.center - mf.half_width) + ","
                + format_real(mf.center) + "," + format_real(mf.center + mf.half_width) + ",1\n";
        }
    }
    return s;
}

std::optional<std::size_t> generations_to_target(const std::vector<GenerationStats>& history, double target)
{
    for (std::size_t i = 0; i < history.size(); ++i)
        if (history[i].best_fitness >= target)
            return i + 1;
    return std::nullopt;
}

double median(std::vector<double> values)
{
    if (values.empty())
        throw std::invalid_argument("median of an empty list");
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---- commands ------------------------------------------------------------

void cmd_bootstrap(const BootstrapArgs& args)
{
    if (args.sources < 1)
        throw ConfigError("sources", "must be >= 1");
    if (args.num_linguistic < 1)
        throw ConfigError("linguistic", "must be >= 1");
    LoadOptions opts;
    opts.num_linguistic = args.num_linguistic;
    opts.margin = args.margin;
    opts.schema_path = args.schema;
    const auto data = load_dataset(args.format, args.data, opts);
    const auto sources = bootstrap_sources(data, args.sources, args.seed);

    fs::create_directories(args.out);
    Manifest m;
    m.format = args.format;
    m.data = fs::absolute(args.data).lexically_normal();
    if (!args.schema.empty())
        m.schema = fs::absolute(args.schema).lexically_normal();
    m.num_linguistic = args.num_linguistic;
    m.margin = args.margin;
    m.seed = args.seed;
    m.features = data.features;
    m.classes = data.classes;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const auto name = "source_" + std::to_string(i) + ".json";
        write_kb_file(args.out / name, sources[i]);
        m.source_files.emplace_back(name);
        m.source_rule_counts.push_back(sources[i].rules.size());
    }
    write_file_atomic(args.out / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

IntegrateOutcome cmd_integrate(const IntegrateArgs& args)
{
    validate(args.config);
    const auto ws = open_workspace(args.manifest);
    IntegrateOutcome out;
    out.result = run_integration(ws.sources, ws.data, args.config);

    fs::create_directories(args.out);
    out.run_csv = args.out / "run.csv";
    out.best_kb = args.out / "best_kb.json";
    out.mf_plot = args.out / "mf_plot.csv";
    out.run_meta = args.out / "run_meta.json";
    write_file_atomic(out.run_csv, run_csv(out.result.history));
    write_kb_file(out.best_kb, out.result.best);
    write_file_atomic(out.mf_plot, mf_plot_csv(out.result.best));

    ordered_json meta;
    meta["format"] = format_name(ws.manifest.format);
    meta["data"] = ws.manifest.data.string();
    meta["config"] = config_to_json(args.config);
    meta["source_rule_counts"] = ws.manifest.source_rule_counts;
    meta["best"] = {{"accuracy", out.result.best_report.accuracy},
                    {"complexity", out.result.best_report.complexity},
                    {"fitness", out.result.best_report.fitness},
                    {"rule_count", out.result.best.rules.size()}};
    write_file_atomic(out.run_meta, meta.dump(2) + "\n");
    return out;
}

EvaluateOutcome cmd_evaluate(const EvaluateArgs& args)
{
    const auto kb = read_kb_file(args.kb);
    LoadOptions opts;
    opts.schema_path = args.schema;
    opts.hepatitis_features = args.hepatitis_features;
    if (args.format == DatasetFormat::Hepatitis && opts.hepatitis_features.empty()) {
        for (const auto& f : kb.features)
            opts.hepatitis_features.push_back(f.name);
    }
    auto data = load_dataset(args.format, args.data, opts);
    // linguistic counts belong to the knowledge base, not the data file
    if (data.features.size() == kb.features.size())
        for (std::size_t i = 0; i < kb.features.size(); ++i)
            if (kb.features[i].is_numeric() && data.features[i].is_numeric())
                data.features[i].num_linguistic = kb.features[i].num_linguistic;
    if (!same_schema(kb.features, data.features) || kb.classes != data.classes)
        throw DataError("knowledge base schema does not match the dataset");
    data.features = kb.features;

    EvaluateOutcome o;
    o.total = data.rows.size();
    o.matched = correct_count(kb, data);
    o.accuracy = static_cast<double>(o.matched) / static_cast<double>(o.total);
    return o;
}

std::string evaluate_json_line(const EvaluateOutcome& o)
{
    ordered_json j;
    j["accuracy"] = o.accuracy;
    j["matched"] = o.matched;
    j["total"] = o.total;
    return j.dump();
}

CompareOutcome cmd_compare(const CompareArgs& args)
{
    validate(args.config);
    if (args.seeds.empty())
        throw ConfigError("seeds", "need at least one seed");
    const auto ws = open_workspace(args.manifest);

    struct Run {
        std::uint64_t seed;
        IntegrationResult nes, ga;
    };
    std::vector<Run> runs;
    for (const auto seed : args.seeds) {
        auto cfg = args.config;
        cfg.seed = seed;
        runs.push_back({seed, run_integration(ws.sources, ws.data, cfg), run_baseline_ga(ws.sources, ws.data, cfg)});
    }

    CompareOutcome out;
    if (args.target) {
        out.target = *args.target;
    } else {
        std::vector<double> finals;
        for (const auto& r : runs)
            finals.push_back(r.ga.history.back().best_fitness);
        out.target = median(finals);
    }

    std::string csv = "seed,method,final_accuracy,final_fitness,generations_to_reach_target\n";
    for (const auto& r : runs) {
        for (const auto& [name, res] : {std::pair<const char*, const IntegrationResult*>{"nes", &r.nes},
                                        std::pair<const char*, const IntegrationResult*>{"ga", &r.ga}}) {
            CompareRow row{r.seed, name, res->best_report.accuracy, res->best_report.fitness,
                           generations_to_target(res->history, out.target)};
            csv += std::to_string(row.seed) + "," + row.method + "," + format_real(row.final_accuracy) + ","
                + format_real(row.final_fitness) + ","
                + (row.generations_to_target ? std::to_string(*row.generations_to_target) : std::string("-1")) + "\n";
            out.rows.push_back(std::move(row));
        }
    }
    fs::create_directories(args.out);
    write_file_atomic(args.out / "comparison.csv", csv);
    return out;
}

void cmd_synth(const SynthArgs& args)
{
    if (args.classes < 2)
        throw ConfigError("classes", "must be >= 2");
    if (args.rows < args.classes)
        throw ConfigError("rows", "must be >= classes");
    if (args.features < 1)
        throw ConfigError("features", "must be >= 1");
    if (!(args.separation > 0.0))
        throw ConfigError("separation", "must be > 0");

    Rng rng(args.seed);
    // class c sits at separation * ((c + f) mod C) on feature f
    std::ostringstream csv;
    for (std::size_t r = 0; r < args.rows; ++r) {
        const std::size_t c = r % args.classes;
        for (std::size_t f = 0; f < args.features; ++f) {
            const double center = args.separation * static_cast<double>((c + f) % args.classes);
            csv << format_real(center + rng.normal()) << ",";
        }
        csv << "c" << c << "\n";
    }

    ordered_json schema;
    schema["header"] = false;
    schema["class_column"] = "class";
    schema["classes"] = ordered_json::array();
    for (std::size_t c = 0; c < args.classes; ++c)
        schema["classes"].push_back("c" + std::to_string(c));
    schema["columns"] = ordered_json::array();
    for (std::size_t f = 0; f < args.features; ++f)
        schema["columns"].push_back(ordered_json{{"name", "x" + std::to_string(f + 1)}, {"kind", "numeric"}});
    schema["columns"].push_back(ordered_json{{"name", "class"}, {"kind", "class"}});

    fs::create_directories(args.out);
    write_file_atomic(args.out / "synth.csv", csv.str());
    write_file_atomic(args.out / "synth.schema.json", schema.dump(2) + "\n");
}

} // namespace fki
