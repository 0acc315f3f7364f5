#include "pref/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "pref/jsonl.hpp"

namespace pref {

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for digest");
    std::uint64_t h = 14695981039346656037ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path);
    const nlohmann::json obj = nlohmann::json::parse(in);
    RunManifest m;
    m.tool_version = obj.value("tool_version", std::string{});
    m.timestamp = obj.value("timestamp", std::string{});
    const auto read_map = [&](const char* key, std::map<std::string, std::string>& dest) {
        const nlohmann::json section = obj.value(key, nlohmann::json::object());
        for (const auto& [k, v] : section.items()) dest[k] = v.get<std::string>();
    };
    read_map("config", m.config);
    read_map("inputs", m.inputs);
    read_map("outputs", m.outputs);
    return m;
}

RunManifest RunManifest::load_or_create(const std::string& path) {
    std::ifstream probe(path);
    if (probe) return load(path);
    return RunManifest{};
}

void RunManifest::save(const std::string& path) const {
    nlohmann::json obj;
    obj["tool_version"] = tool_version;
    obj["timestamp"] = timestamp;
    obj["config"] = config;
    obj["inputs"] = inputs;
    obj["outputs"] = outputs;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open manifest " + path + " for writing");
    out << obj.dump(2) << '\n';
}

void RunManifest::record_input(const std::string& path) {
    inputs[path] = file_digest(path);
}

void RunManifest::record_output(const std::string& path) {
    outputs[path] = file_digest(path);
}

bool RunManifest::check_artifact(const std::string& path, std::string* message) const {
    auto it = outputs.find(path);
    if (it == outputs.end()) return true;  // not produced by a tracked stage
    const std::string current = file_digest(path);
    if (current == it->second) return true;
    if (message) {
        *message = "artifact " + path + " changed since it was produced (recorded " +
                   it->second + ", found " + current + ")";
    }
    return false;
}

} // namespace pref
