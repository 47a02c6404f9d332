#include "evloc/dataio.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evloc/error.hpp"

namespace evloc {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes[offset + k]) << (8 * k);
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  require(v <= std::numeric_limits<std::uint32_t>::max(), ErrorKind::FormatError,
          std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  require(fs::exists(path), ErrorKind::IoError, "missing file " + path.string());
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorKind::IoError, "read failed for " + path.string());
  return bytes;
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  require(!out.fail(), ErrorKind::IoError, "write failed for " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

json segments_to_json(const std::vector<Segment>& segs) {
  json arr = json::array();
  for (const Segment& s : segs) arr.push_back({s.start, s.end});
  return arr;
}

std::vector<Segment> segments_from_json(const json& j, const std::string& where) {
  require(j.is_array(), ErrorKind::SchemaError, where + " must be an array of [start, end] pairs");
  std::vector<Segment> out;
  for (const json& item : j) {
    require(item.is_array() && item.size() == 2 && item[0].is_number() && item[1].is_number(),
            ErrorKind::SchemaError, where + " entries must be [start, end] number pairs");
    Segment s{item[0].get<double>(), item[1].get<double>()};
    try {
      s.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::SchemaError, where + ": " + e.what());
    }
    out.push_back(s);
  }
  return out;
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  require(obj.contains(key), ErrorKind::SchemaError, where + " is missing '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::SchemaError, where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix) {
  std::vector<std::uint8_t> out;
  out.reserve(kEmbeddingHeaderBytes + 4 * matrix.data().size());
  out.insert(out.end(), kEmbeddingMagic.begin(), kEmbeddingMagic.end());
  put_u32(out, kEmbeddingVersion);
  put_u32(out, checked_u32(matrix.dim(), "embedding dim"));
  put_u32(out, checked_u32(matrix.rows(), "embedding count"));
  for (double v : matrix.data()) {
    const float f = static_cast<float>(v);
    require(std::isfinite(f), ErrorKind::NumericalError, "embedding value is not finite in float32");
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= kEmbeddingHeaderBytes, ErrorKind::FormatError,
          "truncated header: " + std::to_string(bytes.size()) + " bytes");
  for (std::size_t k = 0; k < kEmbeddingMagic.size(); ++k) {
    require(bytes[k] == static_cast<std::uint8_t>(kEmbeddingMagic[k]), ErrorKind::FormatError,
            "bad magic at offset " + std::to_string(k));
  }
  const std::uint32_t version = get_u32(bytes, 8);
  require(version == kEmbeddingVersion, ErrorKind::FormatError,
          "unsupported version " + std::to_string(version) + " at offset 8");
  const std::uint64_t dim = get_u32(bytes, 12);
  const std::uint64_t count = get_u32(bytes, 16);
  const std::uint64_t expected = kEmbeddingHeaderBytes + 4 * dim * count;
  require(bytes.size() >= expected, ErrorKind::FormatError,
          "truncated payload: " + std::to_string(bytes.size()) + " bytes, expected " +
              std::to_string(expected));
  require(bytes.size() == expected, ErrorKind::FormatError,
          "trailing bytes at offset " + std::to_string(expected));
  std::vector<double> data(dim * count);
  for (std::size_t k = 0; k < data.size(); ++k) {
    const float f = std::bit_cast<float>(get_u32(bytes, kEmbeddingHeaderBytes + 4 * k));
    require(std::isfinite(f), ErrorKind::NumericalError,
            "non-finite float at offset " + std::to_string(kEmbeddingHeaderBytes + 4 * k));
    data[k] = static_cast<double>(f);
  }
  return EmbeddingMatrix(count, dim, std::move(data));
}

void write_embeddings(const EmbeddingMatrix& matrix, const fs::path& path) {
  write_bytes(path, encode_embeddings(matrix));
}

EmbeddingMatrix read_embeddings(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_embeddings(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

bool Dataset::has_ground_truth() const {
  for (const VideoSample& v : videos) {
    if (!v.ground_truth.has_value()) return false;
  }
  return !videos.empty();
}

Manifest parse_manifest(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::FormatError, std::string("manifest is not valid JSON: ") + e.what());
  }
  require(root.is_object(), ErrorKind::SchemaError, "manifest root must be an object");
  Manifest m;
  m.schema_version = field<int>(root, "schema_version", "manifest");
  require(m.schema_version == kManifestSchemaVersion, ErrorKind::SchemaError,
          "unsupported schema_version " + std::to_string(m.schema_version));
  m.n_frames = field<std::size_t>(root, "n_frames", "manifest");
  m.embed_dim = field<std::size_t>(root, "embed_dim", "manifest");
  require(m.n_frames >= 2 && m.embed_dim >= 1, ErrorKind::SchemaError,
          "manifest needs n_frames >= 2 and embed_dim >= 1");
  require(root.contains("videos") && root["videos"].is_array(), ErrorKind::SchemaError,
          "manifest 'videos' must be an array");
  for (const json& v : root["videos"]) {
    require(v.is_object(), ErrorKind::SchemaError, "manifest video entries must be objects");
    ManifestEntry e;
    e.id = field<std::string>(v, "id", "video entry");
    const std::string where = "video '" + e.id + "'";
    e.frames = field<std::string>(v, "frames", where);
    e.captions = field<std::string>(v, "captions", where);
    if (v.contains("synthetic") && !v["synthetic"].is_null()) e.synthetic = field<std::string>(v, "synthetic", where);
    if (v.contains("ground_truth") && !v["ground_truth"].is_null()) {
      e.ground_truth = segments_from_json(v["ground_truth"], where + " ground_truth");
    }
    if (v.contains("caption_segments") && !v["caption_segments"].is_null()) {
      e.caption_segments = segments_from_json(v["caption_segments"], where + " caption_segments");
    }
    m.videos.push_back(std::move(e));
  }
  return m;
}

std::string serialize_manifest(const Manifest& manifest) {
  nlohmann::ordered_json root;
  root["schema_version"] = manifest.schema_version;
  root["n_frames"] = manifest.n_frames;
  root["embed_dim"] = manifest.embed_dim;
  root["videos"] = nlohmann::ordered_json::array();
  for (const ManifestEntry& e : manifest.videos) {
    nlohmann::ordered_json v;
    v["id"] = e.id;
    v["frames"] = e.frames;
    v["captions"] = e.captions;
    if (e.synthetic) v["synthetic"] = *e.synthetic;
    if (e.ground_truth) v["ground_truth"] = segments_to_json(*e.ground_truth);
    if (e.caption_segments) v["caption_segments"] = segments_to_json(*e.caption_segments);
    root["videos"].push_back(std::move(v));
  }
  return root.dump(2) + "\n";
}

Dataset load_dataset(const fs::path& manifest_path) {
  Dataset ds;
  const std::string text = read_text(manifest_path);
  ds.manifest = parse_manifest(text);
  {
    static const std::set<std::string> known_root{"schema_version", "n_frames", "embed_dim", "videos"};
    static const std::set<std::string> known_video{"id", "frames", "captions", "synthetic",
                                                   "ground_truth", "caption_segments"};
    const json root = json::parse(text);
    for (const auto& [key, _] : root.items()) {
      if (!known_root.count(key)) ds.warnings.push_back("unknown manifest key '" + key + "'");
    }
    for (const json& v : root["videos"]) {
      for (const auto& [key, _] : v.items()) {
        if (!known_video.count(key)) ds.warnings.push_back("unknown video key '" + key + "'");
      }
    }
  }
  const Manifest& m = ds.manifest;
  require(!m.videos.empty(), ErrorKind::SchemaError, "manifest lists no videos");
  const fs::path base = manifest_path.parent_path();
  std::set<std::string> ids;
  for (const ManifestEntry& e : m.videos) {
    const std::string where = "video '" + e.id + "'";
    require(ids.insert(e.id).second, ErrorKind::SchemaError, "duplicate video id '" + e.id + "'");
    VideoSample s;
    s.id = e.id;
    s.frames = read_embeddings(base / e.frames);
    require(s.frames.rows() == m.n_frames && s.frames.dim() == m.embed_dim, ErrorKind::SchemaError,
            where + " frames are " + std::to_string(s.frames.rows()) + "x" + std::to_string(s.frames.dim()) +
                ", manifest declares " + std::to_string(m.n_frames) + "x" + std::to_string(m.embed_dim));
    s.captions = read_embeddings(base / e.captions);
    require(s.captions.rows() >= 1, ErrorKind::SchemaError, where + " has no captions");
    require(s.captions.dim() == m.embed_dim, ErrorKind::SchemaError, where + " caption dimension mismatch");
    if (e.synthetic) {
      EmbeddingMatrix syn = read_embeddings(base / *e.synthetic);
      require(syn.rows() + 1 == s.captions.rows(), ErrorKind::SchemaError,
              where + " has " + std::to_string(syn.rows()) + " synthetic captions for " +
                  std::to_string(s.captions.rows()) + " captions (expected N_s - 1)");
      require(syn.rows() == 0 || syn.dim() == m.embed_dim, ErrorKind::SchemaError,
              where + " synthetic caption dimension mismatch");
      s.synthetic = std::move(syn);
    }
    s.ground_truth = e.ground_truth;
    if (e.caption_segments) {
      require(e.caption_segments->size() == s.captions.rows(), ErrorKind::SchemaError,
              where + " caption_segments count differs from caption count");
      s.caption_segments = e.caption_segments;
    }
    ds.videos.push_back(std::move(s));
  }
  return ds;
}

fs::path write_dataset(std::span<const VideoSample> videos, const fs::path& dir) {
  require(!videos.empty(), ErrorKind::EmptyDataset, "nothing to write");
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  Manifest m;
  m.n_frames = videos.front().frames.rows();
  m.embed_dim = videos.front().frames.dim();
  for (const VideoSample& v : videos) {
    ManifestEntry e;
    e.id = v.id;
    e.frames = v.id + ".frames.emb";
    e.captions = v.id + ".captions.emb";
    write_embeddings(v.frames, dir / e.frames);
    write_embeddings(v.captions, dir / e.captions);
    if (v.synthetic) {
      e.synthetic = v.id + ".synthetic.emb";
      write_embeddings(*v.synthetic, dir / *e.synthetic);
    }
    e.ground_truth = v.ground_truth;
    e.caption_segments = v.caption_segments;
    m.videos.push_back(std::move(e));
  }
  const fs::path path = dir / "manifest.json";
  write_text(path, serialize_manifest(m));
  return path;
}

void write_params(std::span<const VideoMasks> videos, const fs::path& path) {
  nlohmann::ordered_json root;
  root["schema_version"] = kManifestSchemaVersion;
  root["videos"] = nlohmann::ordered_json::array();
  for (const VideoMasks& v : videos) {
    nlohmann::ordered_json entry;
    entry["id"] = v.id;
    entry["centers"] = nlohmann::ordered_json::array();
    entry["widths"] = nlohmann::ordered_json::array();
    for (const MaskParams& p : v.events) {
      entry["centers"].push_back(p.center);
      entry["widths"].push_back(p.width);
    }
    root["videos"].push_back(std::move(entry));
  }
  write_text(path, root.dump(2) + "\n");
}

std::vector<VideoMasks> read_params(const fs::path& path) {
  const std::string text = read_text(path);
  require(!text.empty(), ErrorKind::FormatError, path.string() + " is empty");
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::FormatError, path.string() + " is not valid JSON: " + e.what());
  }
  require(root.is_object() && root.contains("videos") && root["videos"].is_array(), ErrorKind::FormatError,
          path.string() + " lacks a 'videos' array");
  std::vector<VideoMasks> out;
  for (const json& v : root["videos"]) {
    VideoMasks vm;
    vm.id = field<std::string>(v, "id", "params entry");
    const auto centers = field<std::vector<double>>(v, "centers", "params '" + vm.id + "'");
    const auto widths = field<std::vector<double>>(v, "widths", "params '" + vm.id + "'");
    require(centers.size() == widths.size(), ErrorKind::SchemaError,
            "params '" + vm.id + "' has mismatched center/width counts");
    for (std::size_t i = 0; i < centers.size(); ++i) vm.events.push_back({centers[i], widths[i]});
    out.push_back(std::move(vm));
  }
  require(!out.empty(), ErrorKind::FormatError, path.string() + " lists no videos");
  return out;
}

}  // namespace evloc
