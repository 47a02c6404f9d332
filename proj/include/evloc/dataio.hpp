// On-disk formats.
//
// Embedding file (little-endian, no padding):
//
//   offset  size  field
//   0       8     magic "SAILEMB1"
//   8       4     version (u32) = 1
//   12      4     dim (u32)
//   16      4     count (u32)
//   20      4*count*dim  row-major float32 payload
//
// Manifest: JSON with schema_version, dataset-level n_frames/embed_dim and
// one entry per video (see docs/manifest.md). Paths are relative to the
// manifest's directory.
//
// Params file: JSON list of per-video constrained (center, width) pairs.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evloc/embedding.hpp"
#include "evloc/mask.hpp"
#include "evloc/sample.hpp"

namespace evloc {

inline constexpr std::string_view kEmbeddingMagic = "SAILEMB1";
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 20;
inline constexpr int kManifestSchemaVersion = 1;

/// Serialized bytes of `matrix`; values are narrowed to float32.
std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes);

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

struct ManifestEntry {
  std::string id;
  std::string frames;
  std::string captions;
  std::optional<std::string> synthetic;
  std::optional<std::vector<Segment>> ground_truth;
  std::optional<std::vector<Segment>> caption_segments;
};

struct Manifest {
  int schema_version = kManifestSchemaVersion;
  std::size_t n_frames = 0;
  std::size_t embed_dim = 0;
  std::vector<ManifestEntry> videos;
};

struct Dataset {
  Manifest manifest;
  std::vector<VideoSample> videos;
  std::vector<std::string> warnings;

  /// True when every video carries ground-truth segments.
  bool has_ground_truth() const;
};

Manifest parse_manifest(std::string_view json_text);
std::string serialize_manifest(const Manifest& manifest);

/// Reads the manifest and every referenced file, validating all invariants
/// before returning. Any failure rejects the whole dataset.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes `<id>.frames.emb`, `<id>.captions.emb`, optional `<id>.synthetic.emb`
/// and `manifest.json` into `dir`; returns the manifest path.
std::filesystem::path write_dataset(std::span<const VideoSample> videos,
                                    const std::filesystem::path& dir);

struct VideoMasks {
  std::string id;
  std::vector<MaskParams> events;
};

void write_params(std::span<const VideoMasks> videos, const std::filesystem::path& path);
std::vector<VideoMasks> read_params(const std::filesystem::path& path);

}  // namespace evloc
