#include "pcno/surrogate/model_io.hpp"

#include <cmath>

namespace pcno {

namespace {

constexpr std::string_view kMagic = "pcno-model 1\n";
constexpr std::string_view kSeparator = "%%\n";

std::size_t parse_size(std::string_view text, std::string_view key)
{
  const auto v = parse_int(text);
  if (v < 0)
    throw FormatError("model header key '" + std::string(key) + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

std::size_t header_size(const KvStanza& h, std::string_view key)
{
  return parse_size(kv_require(h, key), key);
}

std::string mass_mode_name(MassMode m)
{
  return m == MassMode::spatial2d ? "spatial2d" : "spatiotemporal3d";
}

MassMode parse_mass_mode(const std::string& s)
{
  if (s == "spatial2d")
    return MassMode::spatial2d;
  if (s == "spatiotemporal3d")
    return MassMode::spatiotemporal3d;
  throw FormatError("unknown mass mode '" + s + "'");
}

} // namespace

std::string format_size_list(const std::vector<std::size_t>& values)
{
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i)
    out += (i ? "," : "") + std::to_string(values[i]);
  return out;
}

std::vector<std::size_t> parse_size_list(std::string_view text)
{
  std::vector<std::size_t> out;
  for (double v : parse_double_list(text)) {
    if (v < 0 || v != std::floor(v))
      throw FormatError("expected a list of non-negative integers, got '" + std::string(text) + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string encode_container(const ModelContainer& c)
{
  KvStanza header = c.header;
  header.emplace_back("blocks", std::to_string(c.blocks.size()));
  std::string out(kMagic);
  out += format_kv_stanzas({header});
  out += kSeparator;
  for (const auto& b : c.blocks)
    out += encode_fld(b);
  return out;
}

ModelContainer decode_container(std::string_view bytes)
{
  if (bytes.substr(0, kMagic.size()) != kMagic)
    throw FormatError("not a model file (bad magic line)");
  const auto sep = bytes.find("\n%%\n", kMagic.size() - 1);
  if (sep == std::string_view::npos)
    throw FormatError("model file has no header terminator");
  ModelContainer c;
  c.header = parse_kv(bytes.substr(kMagic.size(), sep + 1 - kMagic.size()));
  const auto count = header_size(c.header, "blocks");
  std::erase_if(c.header, [](const auto& kv) { return kv.first == "blocks"; });
  std::string_view rest = bytes.substr(sep + 4);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t used = 0;
    c.blocks.push_back(decode_fld(rest, &used));
    rest.remove_prefix(used);
  }
  if (!rest.empty())
    throw FormatError("model file has " + std::to_string(rest.size()) + " trailing bytes");
  return c;
}

void write_container(const ModelContainer& c, const std::filesystem::path& path)
{
  write_text_file(path, encode_container(c));
}

ModelContainer read_container(const std::filesystem::path& path)
{
  return decode_container(read_text_file(path));
}

ModelContainer fno_to_container(const FnoParams& p, const KvStanza& extra)
{
  ModelContainer c;
  auto& h = c.header;
  const auto& hy = p.hyper;
  h = {{"model_kind", "fno"},
       {"layers", std::to_string(hy.layers)},
       {"modes", format_size_list(hy.modes)},
       {"width", std::to_string(hy.width)},
       {"in_ch", std::to_string(hy.in_ch)},
       {"out_ch", std::to_string(hy.out_ch)},
       {"time_padding", std::to_string(hy.time_padding)},
       {"activation", to_string(hy.activation)},
       {"selector", to_string(p.selector)},
       {"mass_mode", mass_mode_name(p.projection.mass.mode)}};
  const auto& mom = p.projection.momentum;
  h.emplace_back("w_inv", format_double(mom.w_inv.center) + "," + format_double(mom.w_inv.edge) + "," +
                            format_double(mom.w_inv.corner));
  if (mom.padding)
    h.emplace_back("momentum_padding", format_size_list(*mom.padding));
  if (p.projection.mass.w_spe)
    h.emplace_back("w_spe_modes", format_size_list(p.projection.mass.w_spe->modes.extent()));
  if (mom.kernel)
    h.emplace_back("kernel_lattice", format_size_list(mom.kernel->lattice()));
  h.insert(h.end(), extra.begin(), extra.end());

  const Eigen::VectorXd flat = flatten(p);
  for (const auto& g : parameter_groups(p)) {
    Tensor t;
    t.dims = {g.count};
    t.values.assign(flat.data() + g.offset, flat.data() + g.offset + g.count);
    c.blocks.push_back(std::move(t));
  }
  return c;
}

FnoParams fno_from_container(const ModelContainer& c)
{
  const auto& h = c.header;
  if (kv_require(h, "model_kind") != "fno")
    throw FormatError("model file holds a '" + kv_require(h, "model_kind") + "' model, expected fno");
  FnoHyper hy;
  hy.layers = header_size(h, "layers");
  hy.modes = parse_size_list(kv_require(h, "modes"));
  hy.width = header_size(h, "width");
  hy.in_ch = static_cast<Eigen::Index>(header_size(h, "in_ch"));
  hy.out_ch = static_cast<Eigen::Index>(header_size(h, "out_ch"));
  hy.time_padding = header_size(h, "time_padding");
  try {
    hy.activation = parse_activation(kv_require(h, "activation"));
  } catch (const UsageError& e) {
    throw FormatError(e.what());
  }

  // Structure only; every weight is overwritten from the blocks below.
  Rng rng(0);
  FnoParams p = init_fno(hy, rng);
  try {
    p.selector = parse_selector(kv_require(h, "selector"));
  } catch (const UsageError& e) {
    throw FormatError(e.what());
  }
  p.projection.mass.mode = parse_mass_mode(kv_require(h, "mass_mode"));
  const auto w_inv = parse_double_list(kv_require(h, "w_inv"));
  if (w_inv.size() != 3)
    throw FormatError("w_inv needs three values");
  p.projection.momentum.w_inv = {w_inv[0], w_inv[1], w_inv[2]};
  if (auto pad = kv_lookup(h, "momentum_padding"))
    p.projection.momentum.padding = parse_size_list(*pad);
  if (auto m = kv_lookup(h, "w_spe_modes"))
    p.projection.mass.w_spe = HermitianMultiplier::unit(HermitianModeSet::truncated(parse_size_list(*m)), hy.out_ch);
  if (auto l = kv_lookup(h, "kernel_lattice"))
    p.projection.momentum.kernel = RotationInvariantKernel::unit(parse_size_list(*l), hy.out_ch);

  const auto groups = parameter_groups(p);
  if (groups.size() != c.blocks.size())
    throw FormatError("model file has " + std::to_string(c.blocks.size()) + " blocks, expected " +
                      std::to_string(groups.size()));
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count(p)));
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& b = c.blocks[i];
    if (b.values.size() != groups[i].count)
      throw FormatError("block '" + groups[i].name + "' has " + std::to_string(b.values.size()) + " values, expected " +
                        std::to_string(groups[i].count));
    std::copy(b.values.begin(), b.values.end(), flat.data() + groups[i].offset);
  }
  unflatten(p, flat);
  return p;
}

void save_fno(const FnoParams& p, const std::filesystem::path& path, const KvStanza& extra)
{
  write_container(fno_to_container(p, extra), path);
}

FnoParams load_fno(const std::filesystem::path& path)
{
  return fno_from_container(read_container(path));
}

} // namespace pcno
