#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ngds/pipeline.hpp"

namespace ngds {

/// NMDL model container, little-endian:
///
///   "NMDL"  u16 version  u32 section_count
///   per section: 4-byte tag, u64 length, payload
///   u32 CRC-32 of every preceding byte
///
/// Sections: CONF (canonical config text), DIMS, NAME, FISH, GDSB, WGHT,
/// REFS, MEAN. Matrices inside sections are NMT1 records prefixed by their
/// u64 length. Unknown tags are skipped. The search trace is not stored.
inline constexpr std::uint16_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const TrainedModel& model);

/// Throws ChecksumError when the CRC does not match (including truncation)
/// and FormatError on version mismatch or malformed sections.
TrainedModel decode_model(std::span<const std::uint8_t> bytes);

void write_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel read_model(const std::filesystem::path& path);

}  // namespace ngds
