#pragma once

#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace pref {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Calls fn(line_number, parsed_object) for every non-empty line.
// Throws IoError naming the file and line on parse failure.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        any = true;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": malformed line: " + e.what());
        }
        fn(lineno, obj);
    }
    if (!any) throw IoError(path + ": empty file");
}

class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path) : out_(path) {
        if (!out_) throw IoError("cannot open " + path + " for writing");
    }
    void write(const nlohmann::json& obj) { out_ << obj.dump() << '\n'; }

private:
    std::ofstream out_;
};

} // namespace pref
