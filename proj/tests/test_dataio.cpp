#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "evloc/dataio.hpp"
#include "evloc/error.hpp"
#include "evloc/simulator.hpp"
#include "helpers.hpp"

#include <json.hpp>

using namespace evloc;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no evloc::Error thrown");
  return ErrorKind::InvalidParameter;
}

// Random finite float32 bit pattern, with special values mixed in.
float random_float(std::mt19937_64& rng) {
  static const float specials[] = {0.0f, -0.0f, std::numeric_limits<float>::denorm_min(),
                                   -std::numeric_limits<float>::denorm_min(),
                                   std::numeric_limits<float>::min() / 2, std::numeric_limits<float>::max(),
                                   std::numeric_limits<float>::lowest(), 1.0f};
  if (rng() % 4 == 0) return specials[rng() % std::size(specials)];
  for (;;) {
    const float f = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    if (std::isfinite(f)) return f;
  }
}

std::vector<VideoSample> simulated(std::size_t n) {
  ScenarioSpec spec;
  spec.n_videos = n;
  spec.n_frames = 16;
  spec.embed_dim = 8;
  spec.transition_fraction = 1.0;
  return to_samples(gen_dataset(spec), true);
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  out << j.dump(2);
}

}  // namespace

TEST_CASE("1x1 matrix encodes to header plus four bytes") {
  const auto bytes = encode_embeddings(EmbeddingMatrix(1, 1, {0.0}));
  CHECK(bytes.size() == 24);
  CHECK(std::memcmp(bytes.data(), "SAILEMB1", 8) == 0);
  CHECK(bytes[8] == 1);  // version, little-endian
  CHECK(bytes[12] == 1);
  CHECK(bytes[16] == 1);
  for (std::size_t k = 20; k < 24; ++k) CHECK(bytes[k] == 0);
}

TEST_CASE("empty matrix is header only") {
  const auto bytes = encode_embeddings(EmbeddingMatrix(0, 5));
  CHECK(bytes.size() == kEmbeddingHeaderBytes);
  const EmbeddingMatrix back = decode_embeddings(bytes);
  CHECK(back.empty());
  CHECK(back.dim() == 5);
}

TEST_CASE("round trip is bitwise lossless for finite float32 values") {
  std::mt19937_64 rng(40);
  const fs::path dir = testing::scratch_dir("roundtrip");
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = testing::pick(rng, 0, 12), dim = testing::pick(rng, 1, 9);
    std::vector<float> f(rows * dim);
    for (float& x : f) x = random_float(rng);
    EmbeddingMatrix m(rows, dim, std::vector<double>(f.begin(), f.end()));
    write_embeddings(m, dir / "m.emb");
    const EmbeddingMatrix back = read_embeddings(dir / "m.emb");
    REQUIRE(back.rows() == rows);
    REQUIRE(back.dim() == dim);
    for (std::size_t k = 0; k < f.size(); ++k) {
      CHECK(std::bit_cast<std::uint32_t>(static_cast<float>(back.data()[k])) == std::bit_cast<std::uint32_t>(f[k]));
      CHECK(std::signbit(back.data()[k]) == std::signbit(f[k]));
    }
  }
}

TEST_CASE("corrupted files are rejected") {
  const auto good = encode_embeddings(EmbeddingMatrix(2, 3, {1, 2, 3, 4, 5, 6}));
  CHECK(decode_embeddings(good) == EmbeddingMatrix(2, 3, {1, 2, 3, 4, 5, 6}));

  auto magic = good;
  magic[3] = 'X';
  try {
    decode_embeddings(magic);
    FAIL("expected FormatError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FormatError);
    CHECK(std::string(e.what()).find("offset 3") != std::string::npos);
  }

  auto extra = good;
  extra.push_back(0);
  CHECK(kind_of([&] { decode_embeddings(extra); }) == ErrorKind::FormatError);

  auto truncated = good;
  truncated.pop_back();
  CHECK(kind_of([&] { decode_embeddings(truncated); }) == ErrorKind::FormatError);

  const std::vector<std::uint8_t> short_header(good.begin(), good.begin() + 10);
  CHECK(kind_of([&] { decode_embeddings(short_header); }) == ErrorKind::FormatError);

  auto version = good;
  version[8] = 2;
  CHECK(kind_of([&] { decode_embeddings(version); }) == ErrorKind::FormatError);

  auto nan = good;
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(std::numeric_limits<float>::quiet_NaN());
  std::memcpy(nan.data() + 20, &bits, 4);
  CHECK(kind_of([&] { decode_embeddings(nan); }) == ErrorKind::NumericalError);

  CHECK(kind_of([&] { encode_embeddings(EmbeddingMatrix(1, 1, {1e300})); }) == ErrorKind::NumericalError);
  CHECK(kind_of([&] { read_embeddings(testing::scratch_dir("missing") / "none.emb"); }) == ErrorKind::IoError);
}

TEST_CASE("simulator-written dataset loads back") {
  const fs::path dir = testing::scratch_dir("dataset");
  const auto videos = simulated(3);
  const fs::path manifest = write_dataset(videos, dir);
  const Dataset ds = load_dataset(manifest);
  CHECK(ds.warnings.empty());
  CHECK(ds.has_ground_truth());
  REQUIRE(ds.videos.size() == 3);
  CHECK(ds.manifest.n_frames == 16);
  CHECK(ds.manifest.embed_dim == 8);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ds.videos[i].id == videos[i].id);
    CHECK(ds.videos[i].captions.rows() == videos[i].captions.rows());
    CHECK(ds.videos[i].synthetic->rows() + 1 == ds.videos[i].captions.rows());
    CHECK(*ds.videos[i].ground_truth == *videos[i].ground_truth);
    // values narrowed to float32 on disk
    for (std::size_t k = 0; k < videos[i].frames.data().size(); ++k) {
      CHECK(ds.videos[i].frames.data()[k] == static_cast<double>(static_cast<float>(videos[i].frames.data()[k])));
    }
  }
  CHECK(parse_manifest(serialize_manifest(ds.manifest)).videos.size() == 3);
}

TEST_CASE("manifest schema violations reject the whole dataset") {
  const fs::path dir = testing::scratch_dir("schema");
  const fs::path manifest = write_dataset(simulated(2), dir);
  const nlohmann::json good = read_json(manifest);

  auto expect = [&](const nlohmann::json& j, ErrorKind kind) {
    write_json(manifest, j);
    CHECK(kind_of([&] { load_dataset(manifest); }) == kind);
  };

  nlohmann::json j = good;
  j["videos"][1]["synthetic"] = j["videos"][1]["captions"];  // N_s synthetic rows
  expect(j, ErrorKind::SchemaError);

  j = good;
  j["embed_dim"] = 9;
  expect(j, ErrorKind::SchemaError);

  j = good;
  j["videos"][0]["frames"] = "nowhere.emb";
  expect(j, ErrorKind::IoError);

  j = good;
  j["videos"][1]["id"] = j["videos"][0]["id"];
  expect(j, ErrorKind::SchemaError);

  j = good;
  j["schema_version"] = 2;
  expect(j, ErrorKind::SchemaError);

  j = good;
  j["videos"][0]["ground_truth"] = {{0.5, 0.2}};
  expect(j, ErrorKind::SchemaError);

  j = good;
  j["videos"][0].erase("captions");
  expect(j, ErrorKind::SchemaError);

  {
    std::ofstream out(manifest);
    out << "{ not json";
  }
  CHECK(kind_of([&] { load_dataset(manifest); }) == ErrorKind::FormatError);

  j = good;
  j["videos"][0]["colour"] = "red";
  j["videos"][0].erase("ground_truth");
  write_json(manifest, j);
  const Dataset ds = load_dataset(manifest);
  CHECK(ds.warnings.size() == 1);
  CHECK_FALSE(ds.has_ground_truth());
}

TEST_CASE("params files") {
  const fs::path dir = testing::scratch_dir("params");
  const std::vector<VideoMasks> masks{{"a", {{0.25, 0.5}, {0.1 + 0.2, 1.0 / 3.0}}}, {"b", {{0.5, 0.9}}}};
  write_params(masks, dir / "p.json");
  const auto back = read_params(dir / "p.json");
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "a");
  CHECK(back[0].events == masks[0].events);
  CHECK(back[1].events == masks[1].events);

  { std::ofstream(dir / "empty.json"); }
  CHECK(kind_of([&] { read_params(dir / "empty.json"); }) == ErrorKind::FormatError);
  {
    std::ofstream out(dir / "bad.json");
    out << R"({"videos": [{"id": "a", "centers": [0.1], "widths": []}]})";
  }
  CHECK(kind_of([&] { read_params(dir / "bad.json"); }) == ErrorKind::SchemaError);
}
