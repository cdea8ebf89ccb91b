#include "fki/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "json.hpp"

#include "fki/kb_json.hpp"
#include "fki/random.hpp"

namespace fki {

namespace {

enum class Role { Numeric, Categorical, Class, Skip };

struct Column {
    std::string name;
    Role role = Role::Numeric;
    std::vector<std::string> categories;
    bool open = false; ///< unseen categories are appended instead of rejected
    int num_linguistic = 0;
};

struct ParsePlan {
    std::vector<Column> columns;
    std::vector<std::string> classes;
    bool open_classes = false;
    std::map<std::string, std::string> class_alias;
    bool header = false;
};

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

bool is_missing(const std::string& field) { return field.empty() || field == "?"; }

int index_of(std::vector<std::string>& values, const std::string& v, bool open)
{
    const auto it = std::find(values.begin(), values.end(), v);
    if (it != values.end())
        return static_cast<int>(it - values.begin());
    if (!open)
        return -1;
    values.push_back(v);
    return static_cast<int>(values.size() - 1);
}

LabeledDataset run_plan(ParsePlan plan, const std::string& text, const LoadOptions& options, const std::string& origin)
{
    LabeledDataset data;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_pending = plan.header;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos)
            nl = text.size();
        const std::string line = trim(std::string_view(text).substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty())
            continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != plan.columns.size())
            throw DataError(origin + ": expected " + std::to_string(plan.columns.size()) + " fields, found "
                                + std::to_string(fields.size()),
                            line_no);

        LabeledRow row;
        bool have_class = false;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            auto& col = plan.columns[c];
            const auto& field = fields[c];
            switch (col.role) {
            case Role::Skip:
                break;
            case Role::Numeric: {
                if (is_missing(field)) {
                    row.instance.values.emplace_back();
                    break;
                }
                double v = 0.0;
                const auto* end = field.data() + field.size();
                const auto [ptr, ec] = std::from_chars(field.data(), end, v);
                if (ec != std::errc() || ptr != end || !std::isfinite(v))
                    throw DataError(origin + ": non-numeric value '" + field + "' in column '" + col.name + "'", line_no);
                row.instance.values.emplace_back(v);
                break;
            }
            case Role::Categorical: {
                if (is_missing(field)) {
                    row.instance.values.emplace_back();
                    break;
                }
                const int k = index_of(col.categories, field, col.open);
                if (k < 0)
                    throw DataError(origin + ": unknown category '" + field + "' in column '" + col.name + "'", line_no);
                row.instance.values.emplace_back(static_cast<double>(k));
                break;
            }
            case Role::Class: {
                if (is_missing(field))
                    throw DataError(origin + ": missing class label", line_no);
                const auto alias = plan.class_alias.find(field);
                const auto& label = alias == plan.class_alias.end() ? field : alias->second;
                const int k = index_of(plan.classes, label, plan.open_classes);
                if (k < 0)
                    throw DataError(origin + ": unknown class label '" + field + "'", line_no);
                row.label = k;
                have_class = true;
                break;
            }
            }
        }
        if (!have_class)
            throw DataError(origin + ": schema has no class column");
        data.rows.push_back(std::move(row));
    }

    for (const auto& col : plan.columns) {
        if (col.role == Role::Numeric)
            data.features.push_back(FeatureSpec::numeric(col.name, 0.0, 1.0,
                                                         col.num_linguistic > 0 ? col.num_linguistic
                                                                                : options.num_linguistic));
        else if (col.role == Role::Categorical)
            data.features.push_back(FeatureSpec::categorical(col.name, col.categories));
    }
    data.classes = plan.classes;
    if (data.rows.empty())
        throw DataError(origin + ": no records");
    apply_feature_bounds(data, options.margin);
    return data;
}

Column numeric(std::string name) { return {std::move(name), Role::Numeric, {}, false, 0}; }
Column categorical(std::string name, std::vector<std::string> cats)
{
    return {std::move(name), Role::Categorical, std::move(cats), false, 0};
}
Column class_column(std::string name) { return {std::move(name), Role::Class, {}, false, 0}; }
Column skip(std::string name) { return {std::move(name), Role::Skip, {}, false, 0}; }

const std::vector<std::string>& hepatitis_numeric()
{
    static const std::vector<std::string> v{"Age", "Bilirubin", "Alk Phosphate", "SGOT", "Albumin", "Protime"};
    return v;
}

ParsePlan hepatitis_plan(const LoadOptions& options)
{
    const auto& wanted = options.hepatitis_features.empty() ? hepatitis_default_features() : options.hepatitis_features;
    for (const auto& w : wanted) {
        const bool known = std::any_of(hepatitis_columns().begin(), hepatitis_columns().end(),
                                       [&](const std::string& c) { return lower(c) == lower(w); });
        if (!known)
            throw DataError("unknown hepatitis column '" + w + "'");
    }
    ParsePlan plan;
    plan.columns.push_back(class_column("Class"));
    plan.classes = {"Die", "Live"};
    plan.class_alias = {{"1", "Die"}, {"2", "Live"}};
    // keep the file's column order regardless of the order requested
    for (const auto& name : hepatitis_columns()) {
        const bool keep = std::any_of(wanted.begin(), wanted.end(),
                                      [&](const std::string& w) { return lower(w) == lower(name); });
        if (!keep) {
            plan.columns.push_back(skip(name));
            continue;
        }
        const bool is_numeric = std::find(hepatitis_numeric().begin(), hepatitis_numeric().end(), name)
            != hepatitis_numeric().end();
        plan.columns.push_back(is_numeric ? numeric(name) : categorical(name, {"1", "2"}));
    }
    return plan;
}

ParsePlan iris_plan()
{
    ParsePlan plan;
    plan.columns = {numeric("sepal length"), numeric("sepal width"), numeric("petal length"), numeric("petal width"),
                    class_column("class")};
    plan.classes = {"Iris-setosa", "Iris-versicolor", "Iris-virginica"};
    return plan;
}

ParsePlan tictactoe_plan()
{
    ParsePlan plan;
    for (const char* sq : {"top-left", "top-middle", "top-right", "middle-left", "middle-middle", "middle-right",
                           "bottom-left", "bottom-middle", "bottom-right"})
        plan.columns.push_back(categorical(sq, {"x", "o", "b"}));
    plan.columns.push_back(class_column("class"));
    plan.classes = {"positive", "negative"};
    return plan;
}

ParsePlan generic_plan(const LoadOptions& options)
{
    if (options.schema_path.empty())
        throw DataError("generic CSV needs a schema sidecar");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(options.schema_path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("schema sidecar '" + options.schema_path.string() + "': " + e.what());
    }
    ParsePlan plan;
    try {
        plan.header = j.value("header", false);
        const auto class_name = j.at("class_column").get<std::string>();
        bool found_class = false;
        for (const auto& c : j.at("columns")) {
            const auto name = c.at("name").get<std::string>();
            if (name == class_name) {
                plan.columns.push_back(class_column(name));
                found_class = true;
                continue;
            }
            const auto kind = c.value("kind", std::string("numeric"));
            if (kind == "numeric") {
                auto col = numeric(name);
                col.num_linguistic = c.value("num_linguistic", 0);
                plan.columns.push_back(std::move(col));
            } else if (kind == "categorical") {
                auto col = categorical(name, c.value("categories", std::vector<std::string>{}));
                col.open = col.categories.empty();
                plan.columns.push_back(std::move(col));
            } else if (kind == "skip") {
                plan.columns.push_back(skip(name));
            } else {
                throw DataError("schema sidecar: unknown column kind '" + kind + "'");
            }
        }
        if (!found_class)
            throw DataError("schema sidecar: class column '" + class_name + "' not among columns");
        plan.classes = j.value("classes", std::vector<std::string>{});
        plan.open_classes = plan.classes.empty();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("schema sidecar: ") + e.what());
    }
    return plan;
}

} // namespace

DatasetFormat parse_format(const std::string& name)
{
    const auto n = lower(name);
    if (n == "hepatitis")
        return DatasetFormat::Hepatitis;
    if (n == "iris")
        return DatasetFormat::Iris;
    if (n == "tictactoe" || n == "tic-tac-toe")
        return DatasetFormat::TicTacToe;
    if (n == "generic" || n == "generic_csv" || n == "csv")
        return DatasetFormat::GenericCsv;
    throw DataError("unknown dataset format '" + name + "'");
}

std::string format_name(DatasetFormat format)
{
    switch (format) {
    case DatasetFormat::Hepatitis:
        return "hepatitis";
    case DatasetFormat::Iris:
        return "iris";
    case DatasetFormat::TicTacToe:
        return "tictactoe";
    case DatasetFormat::GenericCsv:
        return "generic";
    }
    return "generic";
}

const std::vector<std::string>& hepatitis_columns()
{
    static const std::vector<std::string> v{
        "Age",    "Sex",      "Steroid",   "Antivirals",    "Fatigue", "Malaise", "Anorexia",
        "Liver Big", "Liver Firm", "Spleen Palpable", "Spiders", "Ascites", "Varices", "Bilirubin",
        "Alk Phosphate", "SGOT", "Albumin", "Protime", "Histology"};
    return v;
}

const std::vector<std::string>& hepatitis_default_features()
{
    static const std::vector<std::string> v{"Bilirubin", "Alk Phosphate", "SGOT", "Albumin", "Protime"};
    return v;
}

LabeledDataset parse_dataset(DatasetFormat format, const std::string& text, const LoadOptions& options,
                             const std::string& origin)
{
    switch (format) {
    case DatasetFormat::Hepatitis:
        return run_plan(hepatitis_plan(options), text, options, origin);
    case DatasetFormat::Iris:
        return run_plan(iris_plan(), text, options, origin);
    case DatasetFormat::TicTacToe:
        return run_plan(tictactoe_plan(), text, options, origin);
    case DatasetFormat::GenericCsv:
        return run_plan(generic_plan(options), text, options, origin);
    }
    throw DataError("unsupported format");
}

LabeledDataset load_dataset(DatasetFormat format, const std::filesystem::path& path, const LoadOptions& options)
{
    return parse_dataset(format, read_file(path), options, path.string());
}

std::vector<std::optional<std::pair<double, double>>> feature_bounds(const LabeledDataset& data, double margin)
{
    if (!(margin >= 0.0))
        throw std::invalid_argument("margin must be >= 0");
    std::vector<std::optional<std::pair<double, double>>> out(data.features.size());
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        if (!data.features[i].is_numeric())
            continue;
        std::optional<double> lo, hi;
        for (const auto& row : data.rows) {
            const auto& v = row.instance.values[i];
            if (!v)
                continue;
            lo = lo ? std::min(*lo, *v) : *v;
            hi = hi ? std::max(*hi, *v) : *v;
        }
        if (!lo)
            throw DataError("feature '" + data.features[i].name + "' has no observed values");
        const double range = *hi - *lo;
        if (range > 0.0) {
            out[i] = std::pair{*lo - margin * range, *hi + margin * range};
        } else {
            const double pad = std::max(1.0, std::abs(*lo)) * std::max(margin, 0.05);
            out[i] = std::pair{*lo - pad, *hi + pad};
        }
    }
    return out;
}

void apply_feature_bounds(LabeledDataset& data, double margin)
{
    const auto bounds = feature_bounds(data, margin);
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (bounds[i]) {
            data.features[i].lower = bounds[i]->first;
            data.features[i].upper = bounds[i]->second;
        }
    }
}

LabeledDataset impute_policy(LabeledDataset data, ImputePolicy policy)
{
    if (policy == ImputePolicy::KeepMissing)
        return data;
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        const auto& f = data.features[i];
        std::optional<double> fill;
        if (f.is_numeric()) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& row : data.rows) {
                if (const auto& v = row.instance.values[i]) {
                    sum += *v;
                    ++n;
                }
            }
            if (n > 0)
                fill = sum / static_cast<double>(n);
        } else {
            std::vector<std::size_t> counts(f.categories.size(), 0);
            for (const auto& row : data.rows)
                if (const auto& v = row.instance.values[i])
                    ++counts[static_cast<std::size_t>(*v)];
            const auto it = std::max_element(counts.begin(), counts.end());
            if (it != counts.end() && *it > 0)
                fill = static_cast<double>(it - counts.begin());
        }
        if (!fill)
            continue;
        for (auto& row : data.rows)
            if (!row.instance.values[i])
                row.instance.values[i] = fill;
    }
    return data;
}

std::vector<LabeledDataset> split_sources(const LabeledDataset& data, std::size_t P, std::uint64_t seed)
{
    if (P < 1)
        throw std::invalid_argument("need at least one source");
    if (P > data.rows.size())
        throw std::invalid_argument("more sources than rows");

    std::vector<std::size_t> order(data.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<LabeledDataset> parts(P);
    for (auto& p : parts) {
        p.features = data.features;
        p.classes = data.classes;
    }
    std::size_t deal = 0;
    for (std::size_t c = 0; c < data.classes.size(); ++c)
        for (const auto i : order)
            if (data.rows[i].label == static_cast<int>(c))
                parts[deal++ % P].rows.push_back(data.rows[i]);
    return parts;
}

} // namespace fki
