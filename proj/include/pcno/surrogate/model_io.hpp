#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pcno/core/kv_text.hpp"
#include "pcno/spectral/fld_io.hpp"
#include "pcno/surrogate/fno.hpp"

namespace pcno {

/// Model file: the line "pcno-model 1", a `key = value` header, a "%%" line,
/// then the parameter blocks as consecutive FLD1 tensors.
struct ModelContainer
{
  KvStanza header;
  std::vector<Tensor> blocks;
};

std::string encode_container(const ModelContainer& c);
ModelContainer decode_container(std::string_view bytes);
void write_container(const ModelContainer& c, const std::filesystem::path& path);
ModelContainer read_container(const std::filesystem::path& path);

std::string format_size_list(const std::vector<std::size_t>& values);
std::vector<std::size_t> parse_size_list(std::string_view text);

/// Header keys describe the hyperparameters and projection; blocks follow
/// parameter_groups. `extra` entries are appended to the header verbatim.
ModelContainer fno_to_container(const FnoParams& p, const KvStanza& extra = {});
FnoParams fno_from_container(const ModelContainer& c);

void save_fno(const FnoParams& p, const std::filesystem::path& path, const KvStanza& extra = {});
FnoParams load_fno(const std::filesystem::path& path);

} // namespace pcno
