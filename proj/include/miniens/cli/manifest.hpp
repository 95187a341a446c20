#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace miniens::cli {

inline constexpr int kArtifactVersion = 1;

// FNV-1a 64 of a file's bytes, hex-encoded.
std::string file_digest_hex(const std::filesystem::path& path);

// Everything needed to reproduce or reload a run: command, config snapshot,
// input digests (recorded before training), output names, seed. Written
// atomically (tmp file + rename) when the run finishes.
struct RunManifest {
    nlohmann::ordered_json body;

    void write_atomic(const std::filesystem::path& path) const;
    static RunManifest read(const std::filesystem::path& path);
};

}  // namespace miniens::cli
