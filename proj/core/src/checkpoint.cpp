#include "mfood/checkpoint.hpp"

#include <string>

#include "binary_io.hpp"
#include "mfood/errors.hpp"

namespace mfood {
namespace {

constexpr std::string_view kMagic = "MFOODCKP";
enum : std::uint8_t { kActNorm = 1, kInvLinear = 2, kCoupling = 3 };

void write_flow(detail::ByteWriter& w, const FlowModel& flow) {
  w.u64(flow.dim());
  w.u64(flow.layers().size());
  for (const auto& layer : flow.layers()) {
    if (const auto* a = std::get_if<ActNorm>(&layer)) {
      w.u8(kActNorm);
      w.u8(a->initialized() ? 1 : 0);
    } else if (const auto* l = std::get_if<InvLinear>(&layer)) {
      w.u8(kInvLinear);
      for (auto p : l->permutation()) w.u64(p);
      for (double s : l->sign()) w.u8(s < 0.0 ? 1 : 0);
    } else {
      const auto& c = std::get<Coupling>(layer);
      w.u8(kCoupling);
      for (auto m : c.mask()) w.u8(m);
      w.f64(c.scale_clamp());
      const auto& widths = c.conditioner().widths();
      w.u64(widths.size());
      for (auto width : widths) w.u64(width);
    }
  }
  // parameters() hands out mutable spans, so read them from a copy.
  FlowModel copy = flow;
  for (const auto& p : copy.parameters()) {
    for (double v : p.value) w.f64(v);
  }
}

FlowModel read_flow(detail::ByteReader& r) {
  const std::uint64_t dim_offset = r.offset();
  const std::uint64_t dim = r.u64();
  if (dim == 0 || dim > (1u << 20)) throw FormatError("implausible flow dimension", dim_offset);
  const std::uint64_t count_offset = r.offset();
  const std::uint64_t n_layers = r.u64();
  if (n_layers > (1u << 16)) throw FormatError("implausible layer count", count_offset);
  FlowModel flow(dim);
  for (std::uint64_t i = 0; i < n_layers; ++i) {
    const std::uint64_t tag_offset = r.offset();
    const std::uint8_t tag = r.u8();
    if (tag == kActNorm) {
      ActNorm a(dim);
      a.set_initialized(r.u8() != 0);
      flow.add_layer(std::move(a));
    } else if (tag == kInvLinear) {
      InvLinear l(dim, nullptr);
      std::vector<std::size_t> perm(dim);
      for (auto& p : perm) p = r.u64();
      try {
        l.set_permutation(std::move(perm));
      } catch (const ConfigError&) {
        throw FormatError("invalid permutation", tag_offset);
      }
      for (auto& s : l.sign()) s = r.u8() ? -1.0 : 1.0;
      flow.add_layer(std::move(l));
    } else if (tag == kCoupling) {
      std::vector<std::uint8_t> mask(dim);
      for (auto& m : mask) m = r.u8();
      const double clamp = r.f64();
      const std::uint64_t n_widths = r.u64();
      if (n_widths < 2 || n_widths > 64) throw FormatError("implausible MLP depth", tag_offset);
      std::vector<std::size_t> widths(n_widths);
      for (auto& width : widths) width = r.u64();
      try {
        Rng rng(0);
        Mlp net(widths, rng, false);
        flow.add_layer(Coupling(std::move(mask), std::move(net), clamp));
      } catch (const ConfigError& e) {
        throw FormatError(std::string("invalid coupling descriptor: ") + e.what(), tag_offset);
      }
    } else {
      throw FormatError("unknown layer tag " + std::to_string(tag), tag_offset);
    }
  }
  for (const auto& p : flow.parameters()) {
    for (auto& v : p.value) v = r.f64();
  }
  return flow;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const ManifoldFlowModel& model,
                                               const PenaltySpec& penalty) {
  model.validate();
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u64(model.split.ambient_dim);
  w.u64(model.split.manifold_dim);
  w.u8(penalty.kind == PenaltyKind::kMse ? 0 : 1);
  w.f64(penalty.delta);
  w.f64(penalty.lambda);
  w.u8(model.manifold_flow ? 1 : 0);
  write_flow(w, model.base);
  if (model.manifold_flow) write_flow(w, *model.manifold_flow);
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes);
  if (r.bytes(kMagic.size()) != kMagic) throw FormatError("not an mfood checkpoint", 0);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), 8);
  }
  Checkpoint ck;
  ck.model.split.ambient_dim = r.u64();
  ck.model.split.manifold_dim = r.u64();
  const std::uint64_t kind_offset = r.offset();
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw FormatError("unknown penalty kind", kind_offset);
  ck.penalty.kind = kind == 0 ? PenaltyKind::kMse : PenaltyKind::kHuber;
  ck.penalty.delta = r.f64();
  ck.penalty.lambda = r.f64();
  const bool has_h = r.u8() != 0;
  ck.model.base = read_flow(r);
  if (has_h) ck.model.manifold_flow = read_flow(r);
  r.expect_end();
  try {
    ck.model.validate();
    ck.penalty.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("inconsistent checkpoint: ") + e.what(), 0);
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ManifoldFlowModel& model,
                     const PenaltySpec& penalty) {
  detail::write_file(path, serialize_checkpoint(model, penalty));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(detail::read_file(path));
}

}  // namespace mfood
