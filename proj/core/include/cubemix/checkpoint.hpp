#pragma once

#include <string>

#include "cubemix/network.hpp"

namespace cubemix {

/// Binary checkpoint layout (all integers little-endian):
///   magic "CBMX", u32 version (1),
///   u32 config text length, config text (canonical key=value lines),
///   u32 entry count, then per parameter:
///     u32 name length, name, u32 rank, u32 dims[rank], f32 data[numel],
///   u32 CRC32 over everything before the checksum.
/// Parameter values are stored as little-endian 32-bit floats; loading and
/// re-saving a checkpoint is byte-identical.
void checkpoint_save(const std::string& path, const NetworkParams& params);

/// Loads and reconstructs the full parameter set. The embedded config echo is
/// authoritative for the network structure; blob shapes must match it.
NetworkParams checkpoint_load(const std::string& path);

/// Canonical textual echo of the structural configuration.
std::string config_echo(const NetworkParams& params);

std::uint32_t crc32(const unsigned char* data, std::size_t n);

} // namespace cubemix
