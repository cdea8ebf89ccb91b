#include "fki/kb_json.hpp"

#include <fstream>
#include <sstream>

namespace fki {

namespace {

const char* kind_name(FeatureKind k) { return k == FeatureKind::Numeric ? "numeric" : "categorical"; }

FeatureKind parse_kind(const std::string& s)
{
    if (s == "numeric")
        return FeatureKind::Numeric;
    if (s == "categorical")
        return FeatureKind::Categorical;
    throw DataError("unknown feature kind '" + s + "'");
}

} // namespace

ordered_json feature_to_json(const FeatureSpec& f)
{
    ordered_json j;
    j["name"] = f.name;
    j["kind"] = kind_name(f.kind);
    j["lower"] = f.lower;
    j["upper"] = f.upper;
    j["categories"] = f.categories;
    j["num_linguistic"] = f.num_linguistic;
    return j;
}

FeatureSpec feature_from_json(const ordered_json& j)
{
    FeatureSpec f;
    f.name = j.at("name").get<std::string>();
    f.kind = parse_kind(j.at("kind").get<std::string>());
    f.lower = j.value("lower", 0.0);
    f.upper = j.value("upper", 0.0);
    f.categories = j.value("categories", std::vector<std::string>{});
    f.num_linguistic = j.value("num_linguistic", f.is_numeric() ? 3 : 0);
    return f;
}

ordered_json to_json(const KnowledgeBase& kb)
{
    ordered_json j;
    j["features"] = ordered_json::array();
    for (const auto& f : kb.features)
        j["features"].push_back(feature_to_json(f));
    j["classes"] = kb.classes;
    j["partitions"] = ordered_json::array();
    for (const auto& p : kb.partitions) {
        auto mfs = ordered_json::array();
        for (const auto& mf : p.mfs) {
            ordered_json m;
            m["center"] = mf.center;
            m["half_width"] = mf.half_width;
            mfs.push_back(std::move(m));
        }
        j["partitions"].push_back(std::move(mfs));
    }
    j["rules"] = ordered_json::array();
    for (const auto& rule : kb.rules) {
        auto ants = ordered_json::array();
        for (const auto& tok : rule.antecedents) {
            switch (tok.kind()) {
            case AntecedentToken::Kind::Linguistic:
                ants.push_back(ordered_json{{"lv", tok.index()}});
                break;
            case AntecedentToken::Kind::Category:
                ants.push_back(ordered_json{{"cat", tok.index()}});
                break;
            case AntecedentToken::Kind::DontCare:
                ants.push_back("dc");
                break;
            }
        }
        ordered_json r;
        r["antecedents"] = std::move(ants);
        r["class"] = rule.consequent;
        j["rules"].push_back(std::move(r));
    }
    return j;
}

KnowledgeBase kb_from_json(const ordered_json& j)
{
    KnowledgeBase kb;
    try {
        for (const auto& f : j.at("features"))
            kb.features.push_back(feature_from_json(f));
        kb.classes = j.at("classes").get<std::vector<std::string>>();
        for (const auto& p : j.at("partitions")) {
            LinguisticPartition part;
            for (const auto& m : p)
                part.mfs.push_back({m.at("center").get<double>(), m.at("half_width").get<double>()});
            kb.partitions.push_back(std::move(part));
        }
        for (const auto& r : j.at("rules")) {
            FuzzyRule rule;
            for (const auto& a : r.at("antecedents")) {
                if (a.is_string() && a.get<std::string>() == "dc")
                    rule.antecedents.push_back(AntecedentToken::dont_care());
                else if (a.is_object() && a.contains("lv"))
                    rule.antecedents.push_back(AntecedentToken::linguistic(a.at("lv").get<int>()));
                else if (a.is_object() && a.contains("cat"))
                    rule.antecedents.push_back(AntecedentToken::category(a.at("cat").get<int>()));
                else
                    throw DataError("unrecognised antecedent token " + a.dump());
            }
            rule.consequent = r.at("class").get<int>();
            kb.rules.push_back(std::move(rule));
        }
        validate(kb);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed knowledge base: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("invalid knowledge base: ") + e.what());
    }
    return kb;
}

std::string dump_kb(const KnowledgeBase& kb) { return to_json(kb).dump(2) + "\n"; }

KnowledgeBase parse_kb(const std::string& text)
{
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("knowledge base is not valid JSON: ") + e.what());
    }
    return kb_from_json(j);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

KnowledgeBase read_kb_file(const std::filesystem::path& path) { return parse_kb(read_file(path)); }

void write_kb_file(const std::filesystem::path& path, const KnowledgeBase& kb)
{
    write_file_atomic(path, dump_kb(kb));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out)
            throw DataError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw DataError("cannot rename '" + tmp.string() + "': " + ec.message());
}

} // namespace fki
