#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "fki/fuzzy.hpp"

namespace fki {

using ordered_json = nlohmann::ordered_json;

ordered_json feature_to_json(const FeatureSpec& f);
FeatureSpec feature_from_json(const nlohmann::ordered_json& j);

ordered_json to_json(const KnowledgeBase& kb);

/// Parses and validates; throws DataError on schema or invariant violations.
KnowledgeBase kb_from_json(const ordered_json& j);

std::string dump_kb(const KnowledgeBase& kb);
KnowledgeBase parse_kb(const std::string& text);

KnowledgeBase read_kb_file(const std::filesystem::path& path);
void write_kb_file(const std::filesystem::path& path, const KnowledgeBase& kb);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

} // namespace fki
