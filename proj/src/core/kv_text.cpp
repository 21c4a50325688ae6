#include "pcno/core/kv_text.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pcno/core/error.hpp"

namespace pcno {

std::string trim(std::string_view text)
{
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
    return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<KvStanza> parse_kv_stanzas(std::string_view text)
{
  std::vector<KvStanza> stanzas;
  KvStanza current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      if (!current.empty())
        stanzas.push_back(std::move(current));
      current.clear();
      if (end == text.size())
        break;
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw FormatError("line " + std::to_string(line_no) + ": expected `key = value`");
    std::string key = trim(std::string_view(stripped).substr(0, eq));
    std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty())
      throw FormatError("line " + std::to_string(line_no) + ": empty key");
    current.emplace_back(std::move(key), std::move(value));
    if (end == text.size())
      break;
  }
  if (!current.empty())
    stanzas.push_back(std::move(current));
  return stanzas;
}

KvStanza parse_kv(std::string_view text)
{
  KvStanza all;
  for (auto& stanza : parse_kv_stanzas(text))
    for (auto& entry : stanza) {
      if (kv_lookup(all, entry.first))
        throw FormatError("duplicate key `" + entry.first + "`");
      all.push_back(std::move(entry));
    }
  return all;
}

std::string format_kv_stanzas(const std::vector<KvStanza>& stanzas)
{
  std::string out;
  for (std::size_t s = 0; s < stanzas.size(); ++s) {
    if (s > 0)
      out += '\n';
    for (const auto& [key, value] : stanzas[s]) {
      out += key;
      out += " = ";
      out += value;
      out += '\n';
    }
  }
  return out;
}

std::optional<std::string> kv_lookup(const KvStanza& stanza, std::string_view key)
{
  for (const auto& [k, v] : stanza)
    if (k == key)
      return v;
  return std::nullopt;
}

std::string kv_require(const KvStanza& stanza, std::string_view key)
{
  auto value = kv_lookup(stanza, key);
  if (!value)
    throw FormatError("missing key `" + std::string(key) + "`");
  return *value;
}

std::string format_double(double value)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text)
{
  const std::string t = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw FormatError("not a number: `" + t + "`");
  return value;
}

std::int64_t parse_int(std::string_view text)
{
  const std::string t = trim(text);
  std::int64_t value = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw FormatError("not an integer: `" + t + "`");
  return value;
}

std::vector<double> parse_double_list(std::string_view text)
{
  std::vector<double> values;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ','))
    if (!trim(item).empty())
      values.push_back(parse_double(item));
  return values;
}

std::string read_text_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw FormatError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    throw FormatError("write failed for " + path.string());
}

} // namespace pcno
