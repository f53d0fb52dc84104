#include "trustsim/response_cache.hpp"

#include <stdexcept>

#include "trustsim/clock.hpp"

namespace trustsim {

std::filesystem::path ResponseCache::store_path(const std::filesystem::path &dir) { return dir / "responses.jsonl"; }

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    const auto path = store_path(dir_);
    if (std::ifstream in(path); in) {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            // a killed writer can leave a torn final line; skip it
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("key") || !j.contains("reply")) continue;
            CacheEntry e{j["key"].get<std::string>(), j.value("request", nlohmann::json::object()),
                         j["reply"].get<std::string>(), j.value("timestamp", std::string{})};
            if (index_.count(e.key)) continue;
            index_[e.key] = entries_.size();
            entries_.push_back(std::move(e));
        }
    }
    out_.open(path, std::ios::app | std::ios::binary);
    if (!out_) throw std::runtime_error("cannot open cache store " + path.string());
}

std::optional<std::string> ResponseCache::get(const std::string &key) const {
    std::shared_lock lock(mu_);
    const auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].reply;
}

void ResponseCache::put(const std::string &key, const nlohmann::json &request, const std::string &reply) {
    std::unique_lock lock(mu_);
    if (index_.count(key)) return;
    CacheEntry e{key, request, reply, utc_now_iso8601()};
    nlohmann::json j{{"key", e.key}, {"request", e.request}, {"reply", e.reply}, {"timestamp", e.timestamp}};
    out_ << j.dump() << '\n';
    out_.flush();
    index_[key] = entries_.size();
    entries_.push_back(std::move(e));
}

std::size_t ResponseCache::size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
}

std::vector<CacheEntry> ResponseCache::entries() const {
    std::shared_lock lock(mu_);
    return entries_;
}

void ResponseCache::clear(const std::filesystem::path &dir) { std::filesystem::remove(store_path(dir)); }

}  // namespace trustsim
