#include "lprisk/manifest.hpp"

#include "lprisk/version.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <stdexcept>

namespace lprisk {

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for hashing");
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["subcommand"] = manifest.subcommand;
    j["tool_version"] =
        manifest.tool_version.empty() ? std::string(kVersion) : manifest.tool_version;
    j["flags"] = manifest.flags;
    if (manifest.seed) j["seed"] = *manifest.seed;

    auto hash_list = [](const std::vector<std::string>& paths) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : paths) {
            arr.push_back({{"path", p}, {"fnv1a64", hash_hex(fnv1a_file(p))}});
        }
        return arr;
    };
    j["inputs"] = hash_list(manifest.input_paths);
    j["outputs"] = hash_list(manifest.output_paths);
    j["created_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace lprisk
