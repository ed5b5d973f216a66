#include "ngds/tensor_io.hpp"

#include <zlib.h>

#include <fstream>
#include <limits>
#include <string>

#include "byte_io.hpp"
#include "ngds/error.hpp"

namespace ngds {

namespace {

constexpr std::string_view kMagic = "NMT1";
constexpr std::size_t kHeaderFixed = 8;
constexpr std::size_t kCrcBytes = 4;

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t pos = 0; pos < bytes.size(); pos += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - pos);
    crc = ::crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_tensor(const DenseTensor& tensor) {
  detail::ByteWriter w;
  w.text(kMagic);
  w.u16(kTensorFormatVersion);
  w.u8(0);
  w.u8(static_cast<std::uint8_t>(tensor.order()));
  for (auto d : tensor.dims()) w.u64(d);
  for (double v : tensor.data()) w.f64(v);
  w.u32(crc32(w.bytes()));
  return std::move(w.bytes());
}

DenseTensor decode_tensor(std::span<const std::uint8_t> bytes, std::size_t base_offset) {
  detail::ByteReader r(bytes, base_offset);
  if (bytes.size() < kHeaderFixed) {
    throw FormatError("truncated tensor header at offset " + std::to_string(base_offset) + ": " +
                      std::to_string(bytes.size()) + " bytes");
  }
  const std::string magic = r.text(4);
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    if (magic[i] != kMagic[i]) {
      throw FormatError("bad magic at offset " + std::to_string(base_offset + i) +
                        ": expected \"NMT1\"");
    }
  }
  const auto version_offset = r.offset();
  const auto version = r.u16();
  if (version != kTensorFormatVersion) {
    throw FormatError("unsupported tensor format version " + std::to_string(version) +
                      " at offset " + std::to_string(version_offset));
  }
  const auto dtype_offset = r.offset();
  if (const auto dtype = r.u8(); dtype != 0) {
    throw FormatError("unsupported dtype code " + std::to_string(dtype) + " at offset " +
                      std::to_string(dtype_offset));
  }
  const auto ndim_offset = r.offset();
  const auto ndim = r.u8();
  if (ndim < 2 || ndim > kMaxTensorOrder) {
    throw FormatError("invalid ndim " + std::to_string(ndim) + " at offset " +
                      std::to_string(ndim_offset));
  }
  std::vector<std::size_t> dims(ndim);
  std::uint64_t total = 1;
  for (auto& d : dims) {
    const auto dim_offset = r.offset();
    const auto value = r.u64();
    if (value == 0) {
      throw FormatError("zero extent at offset " + std::to_string(dim_offset));
    }
    if (value > std::numeric_limits<std::uint64_t>::max() / 8 / total) {
      throw FormatError("dims overflow at offset " + std::to_string(dim_offset));
    }
    total *= value;
    d = static_cast<std::size_t>(value);
  }
  const std::uint64_t payload = total * 8;
  if (r.remaining() < kCrcBytes || r.remaining() - kCrcBytes < payload) {
    throw FormatError("truncated tensor payload at offset " + std::to_string(r.offset()) +
                      ": header declares " + std::to_string(total) + " values, " +
                      std::to_string(r.remaining()) + " bytes remain");
  }
  if (r.remaining() - kCrcBytes > payload) {
    throw FormatError("tensor record has " + std::to_string(r.remaining() - kCrcBytes - payload) +
                      " trailing bytes after the payload at offset " +
                      std::to_string(r.offset() + payload));
  }
  std::vector<double> data(static_cast<std::size_t>(total));
  for (auto& v : data) v = r.f64();
  const auto crc_offset = r.offset();
  const auto stored = r.u32();
  const auto actual = crc32(bytes.first(bytes.size() - kCrcBytes));
  if (stored != actual) {
    throw ChecksumError("tensor CRC mismatch at offset " + std::to_string(crc_offset));
  }
  return DenseTensor(std::move(dims), std::move(data));
}

Matrix tensor_as_matrix(const DenseTensor& tensor) {
  if (tensor.order() != 2) {
    throw DimensionError("expected a 2-mode tensor for a matrix, got order " +
                         std::to_string(tensor.order()));
  }
  const auto rows = static_cast<Eigen::Index>(tensor.dims()[0]);
  const auto cols = static_cast<Eigen::Index>(tensor.dims()[1]);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      tensor.data().data(), rows, cols);
}

std::vector<std::uint8_t> encode_matrix(const Matrix& matrix) {
  std::vector<double> data(static_cast<std::size_t>(matrix.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), matrix.rows(), matrix.cols()) = matrix;
  return encode_tensor(DenseTensor({static_cast<std::size_t>(matrix.rows()),
                                    static_cast<std::size_t>(matrix.cols())},
                                   std::move(data)));
}

Matrix decode_matrix(std::span<const std::uint8_t> bytes, std::size_t base_offset) {
  return tensor_as_matrix(decode_tensor(bytes, base_offset));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_tensor(const std::filesystem::path& path, const DenseTensor& tensor) {
  write_file_atomic(path, encode_tensor(tensor));
}

DenseTensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_tensor(bytes);
  } catch (const ChecksumError& e) {
    throw ChecksumError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_matrix(const std::filesystem::path& path, const Matrix& matrix) {
  write_file_atomic(path, encode_matrix(matrix));
}

Matrix read_matrix(const std::filesystem::path& path) {
  return tensor_as_matrix(read_tensor(path));
}

}  // namespace ngds
