#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "osmm/problems.hpp"

namespace osmm {

inline constexpr std::uint32_t kInstanceFormatVersion = 1;

/// Binary container: "OSMMINST", u32 version, u64 header length, a JSON
/// header (kind, params, g atom descriptors, array table), then the raw
/// little-endian row-major float64 payload. See docs/instance_format.md.
std::string serialize_instance(const ProblemInstance& instance);
ProblemInstance deserialize_instance(std::string_view bytes);

/// File wrappers; throw Error(Io) on filesystem failures and
/// Error(InvalidArgument) on malformed content.
void save_instance(const ProblemInstance& instance, const std::filesystem::path& path);
ProblemInstance load_instance(const std::filesystem::path& path);

}  // namespace osmm
