#pragma once

// Output directory handling for experiment commands. Files are written to a
// temporary sibling and renamed into place, so a reader never sees a partial
// file. Every command finishes with a JSON manifest listing the configuration
// hash, seed, versions and a content hash of each file it produced.

#include <Eigen/Core>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tsfuzzy/error.hpp"
#include "tsfuzzy/experiment/config.hpp"

namespace tsfuzzy {

inline constexpr std::string_view tool_version = "1.0.0";

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(canonical_config_text(cfg))); }

inline void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw DataError("cannot write '" + tmp.string() + "'");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os)
            throw DataError("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path, ec);
    if (ec)
        throw DataError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw DataError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

class OutputDir {
public:
    explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const noexcept { return root_; }

    void write(const std::string& name, std::string_view content)
    {
        write_file_atomic(root_ / name, content);
        files_[name] = hex64(fnv1a64(content));
    }

    /// name -> content hash of everything written so far
    const std::map<std::string, std::string>& files() const noexcept { return files_; }

    /// Writes manifest_<command>.json. Contains no timestamps, so reruns are byte-identical.
    void write_manifest(const std::string& command, const ExperimentConfig& cfg)
    {
        nlohmann::ordered_json j;
        j["tool"] = "tsfuzzy";
        j["version"] = std::string(tool_version);
        j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                     std::to_string(EIGEN_MINOR_VERSION);
        j["command"] = command;
        j["seed"] = cfg.seed;
        j["config_hash"] = config_hash(cfg);
        nlohmann::ordered_json c = nlohmann::ordered_json::object();
        for (const auto& [k, v] : canonical_config(cfg))
            c[k] = v;
        j["config"] = c;
        nlohmann::ordered_json outs = nlohmann::ordered_json::array();
        for (const auto& [name, hash] : files_)
            outs.push_back({{"file", name}, {"fnv1a64", hash}});
        j["outputs"] = outs;
        const std::string text = j.dump(2) + '\n';
        write_file_atomic(root_ / ("manifest_" + command + ".json"), text);
    }

private:
    std::filesystem::path root_;
    std::map<std::string, std::string> files_;
};

} // namespace tsfuzzy
