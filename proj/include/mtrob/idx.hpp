#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mtrob/errors.hpp"
#include "mtrob/types.hpp"

namespace mtrob {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

namespace detail {

inline std::uint32_t read_be_u32(std::istream& in, std::uint64_t offset,
                                 const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4))
    throw FormatError(path + ": truncated, expected 4 bytes at offset " +
                      std::to_string(offset));
  return (static_cast<std::uint32_t>(buf[0]) << 24) |
         (static_cast<std::uint32_t>(buf[1]) << 16) |
         (static_cast<std::uint32_t>(buf[2]) << 8) |
         static_cast<std::uint32_t>(buf[3]);
}

inline std::ifstream open_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "'");
  return in;
}

inline std::string hex_magic(std::uint32_t magic) {
  char buf[11];
  std::snprintf(buf, sizeof(buf), "0x%08x", magic);
  return buf;
}

}  // namespace detail

/// Big-endian IDX image tensor (magic 0x00000803; dims count, rows, cols).
/// Images are flattened row-major to d = rows*cols and scaled from [0,255]
/// to [0,1]. Returns an n x d matrix with one image per row.
inline Matrix load_idx_images(const std::filesystem::path& path) {
  std::ifstream in = detail::open_idx(path);
  const std::string name = path.string();
  const std::uint32_t magic = detail::read_be_u32(in, 0, name);
  if (magic != kIdxImageMagic)
    throw FormatError(name + ": expected image magic " +
                      detail::hex_magic(kIdxImageMagic) + ", got " +
                      detail::hex_magic(magic));
  const std::uint32_t count = detail::read_be_u32(in, 4, name);
  const std::uint32_t rows = detail::read_be_u32(in, 8, name);
  const std::uint32_t cols = detail::read_be_u32(in, 12, name);
  const std::uint64_t pixels =
      static_cast<std::uint64_t>(count) * rows * cols;
  std::vector<unsigned char> raw(pixels);
  if (pixels > 0 &&
      !in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(pixels)))
    throw FormatError(name + ": truncated, expected " +
                      std::to_string(pixels) + " pixel bytes at offset 16 (got " +
                      std::to_string(in.gcount()) + ")");
  Matrix features(count, static_cast<Index>(rows) * cols);
  for (std::uint32_t n = 0; n < count; ++n)
    for (std::uint32_t p = 0; p < rows * cols; ++p)
      features(n, p) =
          static_cast<double>(raw[static_cast<std::size_t>(n) * rows * cols + p]) /
          255.0;
  return features;
}

/// Big-endian IDX label vector (magic 0x00000801; dim count).
inline std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  std::ifstream in = detail::open_idx(path);
  const std::string name = path.string();
  const std::uint32_t magic = detail::read_be_u32(in, 0, name);
  if (magic != kIdxLabelMagic)
    throw FormatError(name + ": expected label magic " +
                      detail::hex_magic(kIdxLabelMagic) + ", got " +
                      detail::hex_magic(magic));
  const std::uint32_t count = detail::read_be_u32(in, 4, name);
  std::vector<unsigned char> raw(count);
  if (count > 0 &&
      !in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(count)))
    throw FormatError(name + ": truncated, expected " + std::to_string(count) +
                      " label bytes at offset 8 (got " +
                      std::to_string(in.gcount()) + ")");
  return std::vector<int>(raw.begin(), raw.end());
}

namespace detail {

inline void write_be_u32(std::ostream& out, std::uint32_t value) {
  const unsigned char buf[4] = {static_cast<unsigned char>(value >> 24),
                                static_cast<unsigned char>(value >> 16),
                                static_cast<unsigned char>(value >> 8),
                                static_cast<unsigned char>(value)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace detail

/// Writes images (n x rows*cols, values in [0,1]) in IDX format.
inline void write_idx_images(const std::filesystem::path& path,
                             const Matrix& features, std::uint32_t rows,
                             std::uint32_t cols) {
  if (features.cols() != static_cast<Index>(rows) * cols)
    throw DimensionError("write_idx_images: feature width " +
                         std::to_string(features.cols()) + " != rows*cols");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  detail::write_be_u32(out, kIdxImageMagic);
  detail::write_be_u32(out, static_cast<std::uint32_t>(features.rows()));
  detail::write_be_u32(out, rows);
  detail::write_be_u32(out, cols);
  for (Index n = 0; n < features.rows(); ++n)
    for (Index p = 0; p < features.cols(); ++p) {
      const double v = std::min(1.0, std::max(0.0, features(n, p)));
      const unsigned char byte = static_cast<unsigned char>(v * 255.0 + 0.5);
      out.put(static_cast<char>(byte));
    }
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

inline void write_idx_labels(const std::filesystem::path& path,
                             const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  detail::write_be_u32(out, kIdxLabelMagic);
  detail::write_be_u32(out, static_cast<std::uint32_t>(labels.size()));
  for (int lab : labels) {
    if (lab < 0 || lab > 255)
      throw ParameterError("write_idx_labels: label " + std::to_string(lab) +
                           " outside byte range");
    out.put(static_cast<char>(static_cast<unsigned char>(lab)));
  }
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace mtrob
