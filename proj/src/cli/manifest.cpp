#include "miniens/cli/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "miniens/error.hpp"
#include "miniens/hash.hpp"

namespace miniens::cli {

std::string file_digest_hex(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MissingData("cannot digest missing file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(ss.str())));
    return buf;
}

void RunManifest::write_atomic(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw MissingData("cannot write manifest " + tmp.string());
        f << body.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MissingData("cannot open manifest " + path.string());
    RunManifest m;
    try {
        f >> m.body;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedRow(path.string() + ": " + e.what());
    }
    return m;
}

}  // namespace miniens::cli
