#include "trustsim/llm_client.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>

#include "trustsim/error.hpp"

namespace trustsim {
namespace {

bool retryable_status(int status) { return status == 429 || status >= 500; }

std::string describe(httplib::Error err, std::chrono::steady_clock::duration elapsed,
                     std::chrono::duration<double> limit) {
    if (err == httplib::Error::ConnectionTimeout) return "timeout while connecting";
    // A read timeout surfaces as a plain read error; elapsed time tells them apart.
    if (err == httplib::Error::Read && elapsed >= limit * 0.9) return "timeout after " + std::to_string(limit.count()) + " s";
    return httplib::to_string(err);
}

}  // namespace

ParsedEndpoint parse_endpoint(const std::string &url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw TransportError("endpoint URL lacks a scheme: " + url);
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw TransportError("unsupported endpoint scheme: " + scheme);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

ChatReply chat_complete(const LlmConfig &config, const std::string &system, const std::string &user) {
    if (system.empty() && user.empty()) throw TransportError("refusing to send empty messages");
    const auto endpoint = parse_endpoint(config.endpoint_url);

    nlohmann::json body{
        {"model", config.model_name},
        {"temperature", config.temperature},
        {"messages", nlohmann::json::array({{{"role", "system"}, {"content", system}},
                                            {{"role", "user"}, {"content", user}}})},
    };
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (const char *key = std::getenv(config.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    httplib::Client client(endpoint.scheme_host_port);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(config.request_timeout);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    std::string last_error;
    auto backoff = config.initial_backoff;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        const auto started = std::chrono::steady_clock::now();
        auto res = client.Post(endpoint.path, headers, payload, "application/json");
        const auto latency = std::chrono::steady_clock::now() - started;

        if (!res) {
            last_error = describe(res.error(), latency, config.request_timeout);
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("credential rejected (HTTP " + std::to_string(res->status) + ")");
        }
        if (retryable_status(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
        }

        const auto j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded()) throw MalformedResponse("reply is not JSON");
        if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
            throw MalformedResponse("reply has no choices");
        }
        const auto &first = j["choices"][0];
        if (!first.contains("message") || !first["message"].contains("content") ||
            !first["message"]["content"].is_string()) {
            throw MalformedResponse("first choice has no message content");
        }
        return ChatReply{first["message"]["content"].get<std::string>(),
                         std::chrono::duration<double, std::milli>(latency), attempt + 1};
    }
    throw TransportError("giving up after " + std::to_string(config.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace trustsim
