#pragma once

#include <map>
#include <string>

namespace pref {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64 over file contents, hex encoded.
std::string file_digest(const std::string& path);

// Per-run provenance: config snapshot, input/output digests, seeds and
// timestamps. Stored as manifest.json in the run directory; enough to
// reproduce every artifact byte-for-byte in replay mode.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string timestamp;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> inputs;   // path -> digest
    std::map<std::string, std::string> outputs;  // path -> digest

    static RunManifest load(const std::string& path);
    static RunManifest load_or_create(const std::string& path);
    void save(const std::string& path) const;

    void record_input(const std::string& path);
    void record_output(const std::string& path);

    // True when the stored digest for `path` (if any) matches the file on
    // disk; message describes any mismatch.
    bool check_artifact(const std::string& path, std::string* message) const;
};

} // namespace pref
