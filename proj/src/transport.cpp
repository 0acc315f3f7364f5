#include <chrono>
#include <cstdlib>
#include <thread>

#include "pref/annotate.hpp"
#include "pref/jsonl.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT_DISABLED
#include <httplib.h>

namespace pref {

std::string request_hash(const std::string& request_text) {
    // FNV-1a 64-bit, hex encoded
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : request_text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void append_cassette_entry(const std::string& cassette_path, const std::string& request_text,
                           const std::string& response_text, const std::string& timestamp) {
    std::ofstream out(cassette_path, std::ios::app);
    if (!out) throw IoError("cannot open cassette " + cassette_path + " for writing");
    nlohmann::json entry = {{"request_hash", request_hash(request_text)},
                            {"request_text", request_text},
                            {"response_text", response_text},
                            {"timestamp", timestamp}};
    out << entry.dump() << '\n';
}

namespace {

class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(const std::string& cassette_path) : path_(cassette_path) {
        for_each_jsonl(cassette_path, [&](std::size_t, const nlohmann::json& obj) {
            recorded_[obj.at("request_hash").get<std::string>()].push_back(
                obj.at("response_text").get<std::string>());
        });
    }

    std::string complete(const std::string& request_text) override {
        const std::string hash = request_hash(request_text);
        auto it = recorded_.find(hash);
        if (it == recorded_.end()) {
            throw AnnotateError("cassette miss in " + path_ + " for request hash " + hash);
        }
        std::size_t& cursor = cursors_[hash];
        if (cursor >= it->second.size()) {
            throw AnnotateError("cassette exhausted in " + path_ + " for request hash " + hash);
        }
        return it->second[cursor++];
    }

private:
    std::string path_;
    std::map<std::string, std::vector<std::string>> recorded_;
    std::map<std::string, std::size_t> cursors_;
};

class LiveTransport : public Transport {
public:
    explicit LiveTransport(const TransportConfig& cfg) : cfg_(cfg) {
        const char* key = std::getenv(cfg.api_key_env.c_str());
        if (!key || !*key) {
            throw AnnotateError("live transport requires credentials in $" + cfg.api_key_env);
        }
        api_key_ = key;
        if (cfg.endpoint.empty()) throw AnnotateError("live transport requires an endpoint");
    }

    std::string complete(const std::string& request_text) override {
        nlohmann::json body = {
            {"model", cfg_.model},
            {"temperature", cfg_.temperature},
            {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"},
                                                               {"content", request_text}}})},
        };
        httplib::Client client(cfg_.endpoint);
        client.set_default_headers({{"Authorization", "Bearer " + api_key_}});

        std::string last_error;
        for (int attempt = 0; attempt < std::max(cfg_.max_attempts, 1); ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(cfg_.backoff_ms * (1 << (attempt - 1))));
            }
            auto res = client.Post("/v1/chat/completions", body.dump(), "application/json");
            if (!res) {
                last_error = "connection failure";
                continue;
            }
            if (res->status != 200) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            try {
                auto parsed = nlohmann::json::parse(res->body);
                return parsed.at("choices").at(0).at("message").at("content")
                    .get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                last_error = std::string("bad completion payload: ") + e.what();
            }
        }
        throw AnnotateError("transport failure after retries: " + last_error);
    }

private:
    TransportConfig cfg_;
    std::string api_key_;
};

class RecordTransport : public Transport {
public:
    explicit RecordTransport(const TransportConfig& cfg)
        : live_(cfg), cassette_path_(cfg.cassette_path) {
        if (cassette_path_.empty()) {
            throw AnnotateError("record mode requires a cassette path");
        }
    }

    std::string complete(const std::string& request_text) override {
        const std::string response = live_.complete(request_text);
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        append_cassette_entry(
            cassette_path_, request_text, response,
            std::to_string(std::chrono::duration_cast<std::chrono::seconds>(now).count()));
        return response;
    }

private:
    LiveTransport live_;
    std::string cassette_path_;
};

} // namespace

std::unique_ptr<Transport> make_transport(const TransportConfig& cfg) {
    switch (cfg.mode) {
        case TransportConfig::Mode::replay:
            if (cfg.cassette_path.empty()) {
                throw AnnotateError("replay mode requires a cassette path");
            }
            return std::make_unique<ReplayTransport>(cfg.cassette_path);
        case TransportConfig::Mode::record:
            return std::make_unique<RecordTransport>(cfg);
        case TransportConfig::Mode::live:
            return std::make_unique<LiveTransport>(cfg);
    }
    throw AnnotateError("unknown transport mode");
}

} // namespace pref
