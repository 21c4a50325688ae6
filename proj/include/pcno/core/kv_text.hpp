#pragma once

// Flat `key = value` text used for manifests, run configs, model headers and
// metric reports. `#` starts a comment, blank lines separate stanzas.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pcno {

using KvStanza = std::vector<std::pair<std::string, std::string>>;

std::vector<KvStanza> parse_kv_stanzas(std::string_view text);

/// All entries of `text` in one stanza; duplicate keys are rejected.
KvStanza parse_kv(std::string_view text);

std::string format_kv_stanzas(const std::vector<KvStanza>& stanzas);

std::optional<std::string> kv_lookup(const KvStanza& stanza, std::string_view key);
std::string kv_require(const KvStanza& stanza, std::string_view key);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string trim(std::string_view text);

} // namespace pcno
