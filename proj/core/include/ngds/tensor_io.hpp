#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "ngds/tensor.hpp"

namespace ngds {

/// NMT1 tensor files, all fields little-endian:
///
///   offset 0   magic   "NMT1"
///   offset 4   u16     version (1)
///   offset 6   u8      dtype (0 = IEEE-754 binary64)
///   offset 7   u8      ndim
///   offset 8   u64     dims[ndim]
///   ...        f64     payload, canonical order (last index fastest)
///   ...        u32     CRC-32 (IEEE, as in zlib) of every preceding byte
inline constexpr std::uint16_t kTensorFormatVersion = 1;

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_tensor(const DenseTensor& tensor);

/// Decodes one complete NMT1 record occupying all of `bytes`. Error messages
/// report byte offsets relative to `base_offset`.
DenseTensor decode_tensor(std::span<const std::uint8_t> bytes, std::size_t base_offset = 0);

/// Matrices travel as 2-mode tensors (rows x cols, row-major payload).
std::vector<std::uint8_t> encode_matrix(const Matrix& matrix);
Matrix decode_matrix(std::span<const std::uint8_t> bytes, std::size_t base_offset = 0);
Matrix tensor_as_matrix(const DenseTensor& tensor);

void write_tensor(const std::filesystem::path& path, const DenseTensor& tensor);
DenseTensor read_tensor(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Matrix& matrix);
Matrix read_matrix(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace ngds
