#include "ngds/model_io.hpp"

#include <array>
#include <map>
#include <string>

#include "byte_io.hpp"
#include "ngds/error.hpp"
#include "ngds/tensor_io.hpp"

namespace ngds {

namespace {

using detail::ByteReader;
using detail::ByteWriter;
using Tag = std::array<char, 4>;

constexpr std::size_t kHeaderBytes = 4 + 2 + 4;

void put_sizes(ByteWriter& w, const std::vector<std::size_t>& values) {
  w.u32(static_cast<std::uint32_t>(values.size()));
  for (auto v : values) w.u64(v);
}

std::vector<std::size_t> get_sizes(ByteReader& r) {
  std::vector<std::size_t> out(r.u32());
  for (auto& v : out) v = static_cast<std::size_t>(r.u64());
  return out;
}

void put_matrix(ByteWriter& w, const Matrix& m) {
  const auto bytes = encode_matrix(m);
  w.u64(bytes.size());
  w.raw(bytes);
}

Matrix get_matrix(ByteReader& r) {
  const auto n = static_cast<std::size_t>(r.u64());
  const auto base = r.offset();
  return decode_matrix(r.raw(n), base);
}

void put_fisher(ByteWriter& w, const NModeFisher& f) {
  w.u32(static_cast<std::uint32_t>(f.per_mode.size()));
  for (const auto& r : f.per_mode) {
    w.u32(static_cast<std::uint32_t>(r.mode));
    w.f64(r.between);
    w.f64(r.within);
    w.f64(r.score);
    w.u8(static_cast<std::uint8_t>(r.status));
  }
  w.f64(f.between);
  w.f64(f.within);
  w.f64(f.score);
  w.u8(static_cast<std::uint8_t>(f.status));
}

FisherStatus get_status(ByteReader& r) {
  const auto at = r.offset();
  const auto v = r.u8();
  if (v > static_cast<std::uint8_t>(FisherStatus::indeterminate)) {
    throw FormatError("invalid Fisher status at offset " + std::to_string(at));
  }
  return static_cast<FisherStatus>(v);
}

NModeFisher get_fisher(ByteReader& r) {
  NModeFisher f;
  f.per_mode.resize(r.u32());
  for (auto& m : f.per_mode) {
    m.mode = static_cast<int>(r.u32());
    m.between = r.f64();
    m.within = r.f64();
    m.score = r.f64();
    m.status = get_status(r);
  }
  f.between = r.f64();
  f.within = r.f64();
  f.score = r.f64();
  f.status = get_status(r);
  return f;
}

void put_points(ByteWriter& w, const std::vector<ProductPoint>& points) {
  w.u32(static_cast<std::uint32_t>(points.size()));
  for (const auto& p : points) {
    w.u32(static_cast<std::uint32_t>(p.label ? *p.label : -1));
    w.u32(static_cast<std::uint32_t>(p.parts.size()));
    for (const auto& s : p.parts) put_matrix(w, s.basis());
  }
}

std::vector<ProductPoint> get_points(ByteReader& r) {
  std::vector<ProductPoint> out(r.u32());
  for (auto& p : out) {
    const auto label = static_cast<std::int32_t>(r.u32());
    if (label >= 0) p.label = label;
    const auto parts = r.u32();
    for (std::uint32_t i = 0; i < parts; ++i) p.parts.emplace_back(get_matrix(r));
  }
  return out;
}

void put_section(ByteWriter& out, const char* tag, ByteWriter& payload) {
  out.text(std::string_view(tag, 4));
  out.u64(payload.size());
  out.raw(payload.bytes());
}

}  // namespace

std::vector<std::uint8_t> encode_model(const TrainedModel& model) {
  std::vector<std::pair<const char*, ByteWriter>> sections;
  auto add = [&](const char* tag) -> ByteWriter& { return sections.emplace_back(tag, ByteWriter{}).second; };

  add("CONF").text(format_config(model.config));

  auto& dims = add("DIMS");
  put_sizes(dims, model.tensor_dims);
  put_sizes(dims, model.ambient_dims);
  put_sizes(dims, model.mode_dims);
  put_sizes(dims, model.point_dims);
  put_sizes(dims, model.angle_counts);

  auto& names = add("NAME");
  names.u32(static_cast<std::uint32_t>(model.class_names.size()));
  for (const auto& n : model.class_names) {
    names.u32(static_cast<std::uint32_t>(n.size()));
    names.text(n);
  }

  auto& fish = add("FISH");
  put_fisher(fish, model.fisher_raw);
  put_fisher(fish, model.fisher_projected);

  auto& gds = add("GDSB");
  gds.u32(static_cast<std::uint32_t>(model.gds.size()));
  for (const auto& g : model.gds) {
    gds.u32(static_cast<std::uint32_t>(g.mode));
    gds.u64(g.alpha);
    gds.u64(g.beta);
    gds.u64(g.rank);
    put_matrix(gds, g.eigvecs);
    put_matrix(gds, Matrix(g.eigvals));
    put_matrix(gds, g.basis);
  }

  auto& weights = add("WGHT");
  weights.u32(static_cast<std::uint32_t>(model.weights.weights.size()));
  for (double v : model.weights.weights) weights.f64(v);

  put_points(add("REFS"), model.references);
  put_points(add("MEAN"), model.class_means);

  ByteWriter out;
  out.text("NMDL");
  out.u16(kModelFormatVersion);
  out.u32(static_cast<std::uint32_t>(sections.size()));
  for (auto& [tag, payload] : sections) put_section(out, tag, payload);
  out.u32(crc32(out.bytes()));
  return std::move(out.bytes());
}

TrainedModel decode_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes + 4) {
    throw ChecksumError("model file truncated: " + std::to_string(bytes.size()) + " bytes");
  }
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader trailer(bytes.last(4), body.size());
  const auto stored = trailer.u32();
  const auto actual = crc32(body);
  if (stored != actual) {
    throw ChecksumError("model checksum mismatch (stored " + std::to_string(stored) + ", computed " +
                        std::to_string(actual) + ")");
  }

  ByteReader r(body);
  if (r.text(4) != "NMDL") throw FormatError("bad model magic at offset 0");
  const auto version = r.u16();
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelFormatVersion) + ")");
  }
  const auto count = r.u32();
  std::map<std::string, std::pair<std::span<const std::uint8_t>, std::size_t>> sections;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto tag = r.text(4);
    const auto len = static_cast<std::size_t>(r.u64());
    const auto at = r.offset();
    sections[tag] = {r.raw(len), at};
  }
  if (r.remaining() != 0) {
    throw FormatError("trailing bytes after model sections at offset " + std::to_string(r.offset()));
  }
  auto section = [&](const std::string& tag) {
    const auto it = sections.find(tag);
    if (it == sections.end()) throw FormatError("model is missing section " + tag);
    return ByteReader(it->second.first, it->second.second);
  };
  auto finish = [](const ByteReader& s, const char* tag) {
    if (s.remaining() != 0) throw FormatError(std::string("trailing bytes in model section ") + tag);
  };

  TrainedModel model;
  {
    auto s = section("CONF");
    model.config = parse_config(s.text(s.remaining()));
  }
  {
    auto s = section("DIMS");
    model.tensor_dims = get_sizes(s);
    model.ambient_dims = get_sizes(s);
    model.mode_dims = get_sizes(s);
    model.point_dims = get_sizes(s);
    model.angle_counts = get_sizes(s);
    finish(s, "DIMS");
  }
  {
    auto s = section("NAME");
    model.class_names.resize(s.u32());
    for (auto& n : model.class_names) n = s.text(s.u32());
    finish(s, "NAME");
  }
  {
    auto s = section("FISH");
    model.fisher_raw = get_fisher(s);
    model.fisher_projected = get_fisher(s);
    finish(s, "FISH");
  }
  {
    auto s = section("GDSB");
    model.gds.resize(s.u32());
    for (auto& g : model.gds) {
      g.mode = static_cast<int>(s.u32());
      g.alpha = static_cast<std::size_t>(s.u64());
      g.beta = static_cast<std::size_t>(s.u64());
      g.rank = static_cast<std::size_t>(s.u64());
      g.eigvecs = get_matrix(s);
      const Matrix vals = get_matrix(s);
      if (vals.cols() != 1) throw FormatError("GDS eigenvalues must be a column");
      g.eigvals = vals.col(0);
      g.basis = get_matrix(s);
    }
    finish(s, "GDSB");
  }
  {
    auto s = section("WGHT");
    model.weights.weights.resize(s.u32());
    for (auto& v : model.weights.weights) v = s.f64();
    finish(s, "WGHT");
  }
  {
    auto s = section("REFS");
    model.references = get_points(s);
    finish(s, "REFS");
  }
  {
    auto s = section("MEAN");
    model.class_means = get_points(s);
    finish(s, "MEAN");
  }

  const std::size_t n = model.config.modes.size();
  if (model.ambient_dims.size() != n || model.mode_dims.size() != n || model.point_dims.size() != n ||
      model.angle_counts.size() != n || model.weights.weights.size() != n ||
      (!model.gds.empty() && model.gds.size() != n)) {
    throw FormatError("model sections disagree on the number of modes");
  }
  for (const auto* set : {&model.references, &model.class_means}) {
    for (const auto& p : *set) {
      if (p.parts.size() != n || !p.label || *p.label < 0 ||
          static_cast<std::size_t>(*p.label) >= model.class_names.size()) {
        throw FormatError("model point has the wrong part count or label");
      }
    }
  }
  return model;
}

void write_model(const std::filesystem::path& path, const TrainedModel& model) {
  write_file_atomic(path, encode_model(model));
}

TrainedModel read_model(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_model(bytes);
  } catch (const ChecksumError& e) {
    throw ChecksumError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ngds
