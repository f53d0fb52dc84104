#pragma once

#include <chrono>
#include <string>

namespace trustsim {

struct LlmConfig {
    std::string model_name;
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    double temperature = 1.0;
    int max_retries = 3;
    std::chrono::duration<double> request_timeout{60.0};
    std::chrono::duration<double> initial_backoff{1.0};
    int parallelism_limit = 4;
    std::string api_key_env = "OPENAI_API_KEY";
    // One bounded re-ask when a reply fails validation. Off by default:
    // invalid replies are measured, not repaired.
    bool reask_invalid = false;
};

struct ChatReply {
    std::string content;
    std::chrono::duration<double, std::milli> latency{0};  // of the final attempt
    int attempts = 0;
};

/// One OpenAI-compatible chat-completions call (one system + one user
/// message), retrying 429/5xx/transport failures with exponential backoff.
/// Throws AuthError, TransportError, MalformedResponse.
ChatReply chat_complete(const LlmConfig &config, const std::string &system, const std::string &user);

struct ParsedEndpoint {
    std::string scheme_host_port;
    std::string path;
};
ParsedEndpoint parse_endpoint(const std::string &url);  // throws TransportError

}  // namespace trustsim
