#include "pcno/spectral/fld_io.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "pcno/core/kv_text.hpp"

namespace pcno {

namespace {

constexpr char kMagic[4] = {'F', 'L', 'D', '1'};
constexpr std::size_t kHeaderBytes = 8;

void put_u64(std::string& out, std::uint64_t v)
{
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p)
{
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

} // namespace

std::string encode_fld(const Tensor& t)
{
  require(!t.dims.empty() && t.dims.size() <= 255, "FLD1 supports 1 to 255 axes");
  std::uint64_t count = 1;
  for (auto d : t.dims)
    count *= d;
  require(count == t.values.size(), "tensor payload does not match its dimensions");

  std::string out;
  out.reserve(kHeaderBytes + 8 * (t.dims.size() + t.values.size()));
  out.append(kMagic, 4);
  out.push_back(0); // f64
  out.push_back(static_cast<char>(t.dims.size()));
  out.push_back(0);
  out.push_back(0);
  for (auto d : t.dims)
    put_u64(out, d);
  for (double v : t.values)
    put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Tensor decode_fld(std::string_view bytes, std::size_t* consumed)
{
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("FLD1: bad magic");
  if (p[4] != 0)
    throw FormatError("FLD1: unsupported dtype code " + std::to_string(p[4]));
  const std::size_t axes = p[5];
  if (axes == 0)
    throw FormatError("FLD1: zero axes");
  if (p[6] != 0 || p[7] != 0)
    throw FormatError("FLD1: nonzero header padding");
  if (bytes.size() < kHeaderBytes + 8 * axes)
    throw FormatError("FLD1: truncated dimension table");

  Tensor t;
  std::uint64_t count = 1;
  for (std::size_t a = 0; a < axes; ++a) {
    const auto d = get_u64(p + kHeaderBytes + 8 * a);
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / 8 / d)
      throw FormatError("FLD1: dimensions overflow");
    t.dims.push_back(d);
    count *= d;
  }
  const std::size_t offset = kHeaderBytes + 8 * axes;
  const std::size_t payload = bytes.size() - offset;
  if (payload < 8 * count)
    throw FormatError("FLD1: truncated payload (" + std::to_string(payload) + " bytes for " + std::to_string(count) +
                      " values)");
  if (!consumed && payload != 8 * count)
    throw FormatError("FLD1: payload length " + std::to_string(payload) + " does not match declared " +
                      std::to_string(8 * count));
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    t.values[i] = std::bit_cast<double>(get_u64(p + offset + 8 * i));
  if (consumed)
    *consumed = offset + 8 * count;
  return t;
}

Tensor to_tensor(const RealField& f)
{
  Tensor t;
  t.dims.push_back(static_cast<std::uint64_t>(f.channels()));
  for (auto n : f.grid().sizes())
    t.dims.push_back(n);
  t.values.assign(f.data().data(), f.data().data() + f.data().size());
  return t;
}

RealField to_field(const Tensor& t)
{
  if (t.dims.size() < 2)
    throw FormatError("FLD1 field needs a channel axis and at least one grid axis");
  std::vector<std::size_t> sizes(t.dims.begin() + 1, t.dims.end());
  for (std::size_t a = 0; a < sizes.size(); ++a)
    if (sizes[a] < 2 && !(a == 0 && sizes[a] == 1 && sizes.size() > 1))
      throw FormatError("FLD1 field axes must have size >= 2 (a leading time axis may have size 1)");
  RealField::Storage data = Eigen::Map<const Eigen::ArrayXd>(t.values.data(), static_cast<Eigen::Index>(t.values.size()));
  if (sizes[0] > 1)
    return RealField(GridSpec::periodic(sizes), static_cast<Eigen::Index>(t.dims[0]), std::move(data));
  std::vector<Axis> axes{{"t", 1, 1.0, AxisKind::temporal}};
  for (std::size_t a = 1; a < sizes.size(); ++a)
    axes.push_back({"x" + std::to_string(a), sizes[a], 1.0, AxisKind::spatial});
  return RealField(GridSpec(std::move(axes)), static_cast<Eigen::Index>(t.dims[0]), std::move(data));
}

void write_fld(const RealField& f, const std::filesystem::path& path)
{
  write_text_file(path, encode_fld(to_tensor(f)));
}

RealField read_fld(const std::filesystem::path& path)
{
  return to_field(decode_fld(read_text_file(path)));
}

} // namespace pcno
