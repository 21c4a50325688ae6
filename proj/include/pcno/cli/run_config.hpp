#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pcno::cli {

struct KeySpec
{
  std::string key;
  std::string default_value;
  std::string help;
};

struct CommandSchema
{
  std::string name;
  std::string help;
  std::vector<KeySpec> keys; // every command also accepts `seed`
};

const std::vector<CommandSchema>& command_schemas();
const CommandSchema& schema_for(const std::string& command);

/// Resolved settings of one command: schema defaults, then a config file,
/// then command-line values. Unknown keys are usage errors.
class RunConfig
{
public:
  explicit RunConfig(const CommandSchema& schema);

  const std::string& command() const { return schema_->name; }

  void set(const std::string& key, const std::string& value);
  /// `command = ...` in the file must name this command when present.
  void load_file(const std::filesystem::path& path);

  const std::string& text(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::size_t> sizes(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;
  std::uint64_t seed() const;

  /// `command = <name>` followed by every key in schema order.
  std::string snapshot() const;

private:
  std::size_t index(const std::string& key) const;

  const CommandSchema* schema_;
  std::vector<std::string> values_;
};

} // namespace pcno::cli
