#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include "ngds/error.hpp"
#include "ngds/model_io.hpp"
#include "ngds/pipeline.hpp"
#include "ngds/synthetic.hpp"
#include "ngds/tensor_io.hpp"
#include "support.hpp"

using namespace ngds;
using namespace ngds::test;

namespace {

void put_u32(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
}

void put_u64(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
}

// Recomputes the trailing CRC so that later checks are reached.
void reseal(std::vector<std::uint8_t>& bytes) {
  const auto body = std::span<const std::uint8_t>(bytes).first(bytes.size() - 4);
  put_u32(bytes, bytes.size() - 4, crc32(body));
}

template <class E>
std::string error_text(auto&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return "<no error>";
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

SynthSpec noiseless(std::size_t shared) {
  SynthSpec spec;
  spec.dims = {10, 9, 11};
  spec.samples_per_class = 2;
  spec.classes = 3;
  spec.shared_dim = shared;
  spec.within_noise = 0.0;
  spec.seed = 11;
  return spec;
}

}  // namespace

TEST_SUITE("dataio") {
  TEST_CASE("crc32 matches the standard check value") {
    const std::string s = "123456789";
    CHECK(crc32(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())) == 0xCBF43926u);
  }

  TEST_CASE("tensor files roundtrip bit-exactly") {
    TempDir dir("tensor");
    const auto t = random_tensor({3, 4, 5}, 17);
    write_tensor(dir.path() / "t.nmt", t);
    const auto back = read_tensor(dir.path() / "t.nmt");
    CHECK(back.dims() == t.dims());
    CHECK(std::memcmp(back.data().data(), t.data().data(), t.data().size() * sizeof(double)) == 0);

    const auto bytes = encode_tensor(t);
    CHECK(bytes.size() == 8 + 3 * 8 + 60 * 8 + 4);
    CHECK(std::memcmp(bytes.data(), "NMT1", 4) == 0);
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 0);
    CHECK(bytes[7] == 3);
    CHECK(bytes[8] == 3);
    CHECK(encode_tensor(decode_tensor(bytes)) == bytes);

    const DenseTensor special({2, 2}, {-0.0, std::numeric_limits<double>::denorm_min(), INFINITY, 1e308});
    const auto s = decode_tensor(encode_tensor(special));
    for (std::size_t i = 0; i < 4; ++i) CHECK(same_bits(s.data()[i], special.data()[i]));
  }

  TEST_CASE("matrices travel as row-major 2-mode tensors") {
    const Matrix m = random_matrix(3, 4, 2);
    const auto back = decode_matrix(encode_matrix(m));
    CHECK(back == m);
    const auto t = decode_tensor(encode_matrix(m));
    CHECK(t.data()[1] == m(0, 1));
    CHECK_THROWS_AS(decode_matrix(encode_tensor(random_tensor({2, 2, 2}, 1))), DimensionError);
  }

  TEST_CASE("corrupt tensor headers name the failure") {
    const auto good = encode_tensor(random_tensor({2, 3, 2}, 4));

    auto magic = good;
    magic[2] = 'X';
    reseal(magic);
    const auto m = error_text<FormatError>([&] { (void)decode_tensor(magic); });
    CHECK(m.find("magic") != std::string::npos);
    CHECK(m.find("offset 2") != std::string::npos);

    auto version = good;
    version[4] = 2;
    reseal(version);
    CHECK(error_text<FormatError>([&] { (void)decode_tensor(version); }).find("version") != std::string::npos);

    auto dtype = good;
    dtype[6] = 1;
    reseal(dtype);
    CHECK_THROWS_AS(decode_tensor(dtype), FormatError);

    auto longer = good;
    put_u64(longer, 8, 3);  // dims now claim 3x3x2 = 18 values, payload holds 12
    reseal(longer);
    CHECK(error_text<FormatError>([&] { (void)decode_tensor(longer); }).find("truncated") != std::string::npos);

    auto overflow = good;
    put_u64(overflow, 8, std::uint64_t{1} << 62);
    put_u64(overflow, 16, std::uint64_t{1} << 62);
    reseal(overflow);
    CHECK(error_text<FormatError>([&] { (void)decode_tensor(overflow); }).find("overflow") != std::string::npos);

    const std::vector<std::uint8_t> stub(good.begin(), good.begin() + 6);
    CHECK(error_text<FormatError>([&] { (void)decode_tensor(stub); }).find("truncated") != std::string::npos);

    auto flipped = good;
    flipped[40] ^= 0x01;
    CHECK_THROWS_AS(decode_tensor(flipped), ChecksumError);

    TempDir dir("corrupt");
    std::ofstream(dir.path() / "bad.nmt", std::ios::binary).write(reinterpret_cast<const char*>(flipped.data()),
                                                                  static_cast<std::streamsize>(flipped.size()));
    const auto path_msg = error_text<ChecksumError>([&] { (void)read_tensor(dir.path() / "bad.nmt"); });
    CHECK(path_msg.find("bad.nmt") != std::string::npos);
    CHECK_THROWS_AS(read_tensor(dir.path() / "missing.nmt"), FormatError);
  }

  TEST_CASE("manifest text roundtrip and validation") {
    const std::string text =
        "# dims: 4x5x6\n"
        "# classes: walk,run\n"
        "a/x0.nmt,0,train\n"
        "a/x1.nmt,1,test\n"
        "a/x2.nmt,1,train\n";
    const auto m = parse_manifest(text);
    CHECK(m.dims == std::vector<std::size_t>{4, 5, 6});
    CHECK(m.class_names == std::vector<std::string>{"walk", "run"});
    REQUIRE(m.total() == 3);
    CHECK(m.entries[1].split == Split::test);
    CHECK(m.class_counts() == std::vector<std::size_t>{1, 2});
    CHECK(m.class_counts(Split::train) == std::vector<std::size_t>{1, 1});
    CHECK(parse_manifest(format_manifest(m)).entries.size() == 3);
    CHECK(format_manifest(parse_manifest(format_manifest(m))) == format_manifest(m));

    CHECK_THROWS_AS(parse_manifest("a.nmt,0,train\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest("# dims: 4x5\na.nmt,0,train\na.nmt,1,train\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest("# dims: 4x5\na.nmt,0,train\nb.nmt,2,train\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest("# dims: 4x5\na.nmt,0,val\nb.nmt,1,train\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest("# dims: 4x5\na.nmt,zero,train\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest("# dims: 4x0\na.nmt,0,train\n"), FormatError);
  }

  TEST_CASE("loading checks tensor extents against the manifest") {
    TempDir dir("load");
    const auto ds = generate_synthetic(noiseless(0));
    write_synthetic(dir.path(), ds);
    const auto manifest = read_manifest(dir.path() / "manifest.txt");
    const auto all = load_dataset(manifest, dir.path());
    REQUIRE(all.samples.size() == ds.data.samples.size());
    for (std::size_t i = 0; i < all.samples.size(); ++i) {
      CHECK(std::ranges::equal(all.samples[i].tensor.data(), ds.data.samples[i].tensor.data()));
      CHECK(all.samples[i].label == ds.data.samples[i].label);
    }
    CHECK(load_dataset(manifest, dir.path(), Split::train).samples.size() == ds.split(Split::train).samples.size());

    write_tensor(dir.path() / manifest.entries[0].path, random_tensor({10, 9, 10}, 1));
    const auto msg = error_text<DimensionError>([&] { (void)load_dataset(manifest, dir.path()); });
    CHECK(msg.find(manifest.entries[0].path.generic_string()) != std::string::npos);
    CHECK(msg.find("10x9x11") != std::string::npos);
  }

  TEST_CASE("generator is deterministic per seed") {
    const auto a = generate_synthetic(noiseless(1));
    const auto b = generate_synthetic(noiseless(1));
    REQUIRE(a.data.samples.size() == b.data.samples.size());
    for (std::size_t i = 0; i < a.data.samples.size(); ++i)
      CHECK(encode_tensor(a.data.samples[i].tensor) == encode_tensor(b.data.samples[i].tensor));
    CHECK(format_manifest(a.manifest) == format_manifest(b.manifest));
    auto other = noiseless(1);
    other.seed = 12;
    CHECK(encode_tensor(generate_synthetic(other).data.samples[0].tensor) != encode_tensor(a.data.samples[0].tensor));

    CounterRng r(7);
    CHECK(r.next_u64() == CounterRng::mix64(7 + 0x9E3779B97F4A7C15ull));
    CHECK(r.counter() == 1);
  }

  TEST_CASE("noiseless generator without a shared block plants the class blocks") {
    const auto spec = noiseless(0);
    const auto ds = generate_synthetic(spec);
    const std::vector<std::size_t> dims(3, spec.class_dim);
    const std::vector<int> modes{1, 2, 3};
    std::vector<ProductPoint> points;
    for (const auto& s : ds.data.samples) points.push_back(extract_sample_point(s, modes, dims));
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto label = static_cast<std::size_t>(ds.data.samples[i].label);
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(projector_distance(points[i].parts[k], Subspace(ds.planted[k].class_blocks[label])) <= 1e-10);
      }
      for (std::size_t j = 0; j < points.size(); ++j) {
        if (ds.data.samples[j].label == ds.data.samples[i].label) continue;
        for (std::size_t k = 0; k < 3; ++k)
          CHECK(std::abs(mean_canonical_angle(points[i].parts[k], points[j].parts[k]) - kPi / 2) <= 1e-10);
      }
    }
  }

  TEST_CASE("noiseless generator with a shared block shares one direction") {
    const auto spec = noiseless(1);
    const auto ds = generate_synthetic(spec);
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& planted = ds.planted[k];
      std::vector<Subspace> classes;
      for (const auto& block : planted.class_blocks) {
        Matrix joint(block.rows(), planted.shared.cols() + block.cols());
        joint << planted.shared, block;
        classes.emplace_back(joint);
      }
      for (std::size_t a = 0; a < classes.size(); ++a)
        for (std::size_t b = a + 1; b < classes.size(); ++b)
          CHECK(principal_angles(classes[a], classes[b]).angles(0) <= 1e-10);
    }
    const std::vector<std::size_t> dims(3, 3);
    const std::vector<int> modes{1, 2, 3};
    const auto p = extract_sample_point(ds.data.samples.front(), modes, dims);
    const auto q = extract_sample_point(ds.data.samples.back(), modes, dims);
    for (std::size_t k = 0; k < 3; ++k) CHECK(principal_angles(p.parts[k], q.parts[k]).angles(0) <= 1e-10);
  }

  TEST_CASE("generator spec validation") {
    SynthSpec bad;
    bad.dims = {3, 3, 3};
    bad.shared_dim = 2;
    bad.class_dim = 2;
    CHECK_THROWS_AS(generate_synthetic(bad), InvalidArgument);
    SynthSpec noisy;
    noisy.within_noise = -0.1;
    CHECK_THROWS_AS(generate_synthetic(noisy), InvalidArgument);
  }

  TEST_CASE("feature ingestion substitutes only the named mode") {
    TempDir dir("features");
    const auto ds = generate_synthetic(noiseless(1));
    write_synthetic(dir.path(), ds);
    const auto manifest = read_manifest(dir.path() / "manifest.txt");
    const auto base = load_dataset(manifest, dir.path(), Split::train);

    std::filesystem::create_directories(dir.path() / "same");
    std::filesystem::create_directories(dir.path() / "hog");
    std::size_t at = 0;
    for (const auto& e : manifest.entries) {
      if (e.split != Split::train) continue;
      write_matrix(dir.path() / "same" / e.path.filename(), unfold(base.samples[at].tensor, 3).values);
      write_matrix(dir.path() / "hog" / e.path.filename(), random_matrix(7, 30, at + 1));
      ++at;
    }
    PipelineConfig config;
    config.mode_dims = {3, 3, 3};
    const std::vector<int> modes{1, 2, 3};

    auto same = base;
    const std::vector<FeatureReplacement> identity{{3, dir.path() / "same", std::nullopt}};
    ingest_feature_modes(same, manifest, Split::train, identity);
    auto hog = base;
    const std::vector<FeatureReplacement> features{{3, dir.path() / "hog", 7}};
    ingest_feature_modes(hog, manifest, Split::train, features);
    for (std::size_t i = 0; i < base.samples.size(); ++i) {
      const auto p = extract_sample_point(base.samples[i], modes, config.mode_dims);
      const auto q = extract_sample_point(same.samples[i], modes, config.mode_dims);
      const auto h = extract_sample_point(hog.samples[i], modes, config.mode_dims);
      for (std::size_t k = 0; k < 3; ++k) CHECK(projector_distance(p.parts[k], q.parts[k]) <= 1e-10);
      CHECK(projector_distance(p.parts[0], h.parts[0]) == 0.0);
      CHECK(projector_distance(p.parts[1], h.parts[1]) == 0.0);
      CHECK(h.parts[2].ambient_dim() == 7);
      CHECK(mode_rows(hog.samples[i], 3) == 7);
    }

    auto wrong = base;
    const std::vector<FeatureReplacement> declared{{3, dir.path() / "hog", 8}};
    const auto msg = error_text<DimensionError>([&] { ingest_feature_modes(wrong, manifest, Split::train, declared); });
    CHECK(msg.find("mode 3") != std::string::npos);
    CHECK(msg.find("expected 8") != std::string::npos);
    CHECK(msg.find("got 7") != std::string::npos);

    auto missing = base;
    const std::vector<FeatureReplacement> nowhere{{2, dir.path() / "none", std::nullopt}};
    CHECK_THROWS_AS(ingest_feature_modes(missing, manifest, Split::train, nowhere), FormatError);
  }

  TEST_CASE("model save and load reproduce classifications bit-exactly") {
    SynthSpec spec;
    spec.dims = {8, 8, 8};
    spec.samples_per_class = 8;
    const auto ds = generate_synthetic(spec);
    const auto model = fit(ds.split(Split::train), PipelineConfig{});
    TempDir dir("model");
    write_model(dir.path() / "m.nmdl", model);
    const auto back = read_model(dir.path() / "m.nmdl");
    CHECK(encode_model(back) == encode_model(model));
    CHECK(format_config(back.config) == format_config(model.config));

    SynthSpec probe_spec = spec;
    probe_spec.seed = 99;
    probe_spec.samples_per_class = 5;
    const auto probes = generate_synthetic(probe_spec);
    REQUIRE(probes.data.samples.size() == 20);
    for (const auto& s : probes.data.samples) {
      const auto a = classify(model, s);
      const auto b = classify(back, s);
      CHECK(a.label == b.label);
      REQUIRE(a.class_scores.size() == b.class_scores.size());
      for (std::size_t j = 0; j < a.class_scores.size(); ++j) CHECK(same_bits(a.class_scores[j], b.class_scores[j]));
    }
  }

  TEST_CASE("model container errors") {
    SynthSpec spec;
    spec.dims = {6, 6, 6};
    spec.samples_per_class = 4;
    spec.classes = 2;
    const auto ds = generate_synthetic(spec);
    PipelineConfig config;
    config.method = Method::pgm;
    const auto model = fit(ds.data, config);
    const auto bytes = encode_model(model);

    const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 9);
    CHECK_THROWS_AS(decode_model(truncated), ChecksumError);
    CHECK_THROWS_AS(decode_model(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 3)), ChecksumError);

    auto version = bytes;
    version[4] = 9;
    reseal(version);
    CHECK(error_text<FormatError>([&] { (void)decode_model(version); }).find("version") != std::string::npos);

    TempDir dir("model-errors");
    std::ofstream(dir.path() / "cut.nmdl", std::ios::binary).write(reinterpret_cast<const char*>(truncated.data()),
                                                                   static_cast<std::streamsize>(truncated.size()));
    CHECK_THROWS_AS(read_model(dir.path() / "cut.nmdl"), ChecksumError);

    CHECK_THROWS_AS(classify(model, random_tensor({6, 6, 7}, 3)), DimensionError);
  }
}
