#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace trustsim {

struct CacheEntry {
    std::string key;
    nlohmann::json request;
    std::string reply;
    std::string timestamp;
};

/// Append-only reply store in one directory (`responses.jsonl`, one JSON
/// object per line: key, request, reply, timestamp). Safe for concurrent
/// readers and writers; a put is visible to every later get.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string &key) const;
    /// First write for a key wins; later puts for the same key are ignored.
    void put(const std::string &key, const nlohmann::json &request, const std::string &reply);

    std::size_t size() const;
    std::vector<CacheEntry> entries() const;
    const std::filesystem::path &dir() const { return dir_; }

    /// Removes the store file. Not safe while other caches hold it open.
    static void clear(const std::filesystem::path &dir);
    static std::filesystem::path store_path(const std::filesystem::path &dir);

private:
    std::filesystem::path dir_;
    mutable std::shared_mutex mu_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<CacheEntry> entries_;
    std::ofstream out_;
};

}  // namespace trustsim
