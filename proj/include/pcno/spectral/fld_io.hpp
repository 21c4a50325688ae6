#pragma once

// FLD1 tensor files, little-endian throughout:
//   bytes 0-3   "FLD1"
//   byte  4     dtype code (0 = f64)
//   byte  5     axis count A (axis 0 = channels for fields)
//   bytes 6-7   zero
//   A x u64     dimension sizes
//   payload     f64 values, row-major, last axis fastest

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pcno/spectral/field.hpp"

namespace pcno {

struct Tensor
{
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

std::string encode_fld(const Tensor& t);

/// Decodes one tensor from the front of `bytes`. When `consumed` is null the
/// payload must end exactly at the end of `bytes`.
Tensor decode_fld(std::string_view bytes, std::size_t* consumed = nullptr);

Tensor to_tensor(const RealField& f);

/// Field view of a tensor: dims[0] channels, remaining dims become spatial
/// axes x0, x1, ... of unit extent.
RealField to_field(const Tensor& t);

void write_fld(const RealField& f, const std::filesystem::path& path);
RealField read_fld(const std::filesystem::path& path);

} // namespace pcno
