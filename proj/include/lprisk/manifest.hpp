#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lprisk {

// FNV-1a over raw bytes; stable across platforms, good enough to tell
// whether an input or output changed between runs.
std::uint64_t fnv1a_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

// Provenance record written next to every artifact a subcommand emits.
// The wall-clock timestamp lives only here, keeping the data outputs
// byte-reproducible.
struct RunManifest {
    std::string subcommand;
    std::string tool_version;
    std::map<std::string, std::string> flags;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> input_paths;   // hashed on write
    std::vector<std::string> output_paths;  // hashed on write
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace lprisk
