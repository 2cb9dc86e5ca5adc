#include "dualgraph/remote_embedding.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dualgraph/error.hpp"

namespace dgr {
namespace {

using json = nlohmann::json;

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.dim == 0) {
        throw Error("remote embedding dimension must be positive");
    }
    if (endpoint_.max_attempts < 1) {
        throw Error("remote embedder needs at least one attempt");
    }
    std::tie(host_, path_) = split_url(endpoint_.url);
}

std::size_t RemoteEmbedder::cache_size() const {
    std::shared_lock lock(cache_mutex_);
    return cache_.size();
}

Vector RemoteEmbedder::embed(std::string_view text) const {
    return embed_batch({std::string(text)}).front();
}

std::vector<Vector> RemoteEmbedder::fetch(const std::vector<std::string>& texts) const {
    const std::string body = json{{"texts", texts}}.dump();
    httplib::Client client(host_);
    client.set_connection_timeout(endpoint_.timeout);
    client.set_read_timeout(endpoint_.timeout);

    auto backoff = endpoint_.initial_backoff;
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < endpoint_.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, endpoint_.max_backoff);
        }
        ++network_calls_;
        auto res = client.Post(path_, body, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (retryable_status(res->status)) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw BadResponse("HTTP " + std::to_string(res->status) + " from embedding service");
        }

        json parsed;
        try {
            parsed = json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw BadResponse(std::string("unparseable response: ") + e.what());
        }
        if (!parsed.is_object() || !parsed.contains("vectors") || !parsed["vectors"].is_array()) {
            throw BadResponse("response lacks a 'vectors' list");
        }
        const auto& rows = parsed["vectors"];
        if (rows.size() != texts.size()) {
            throw BadResponse("expected " + std::to_string(texts.size()) + " vectors, got " +
                              std::to_string(rows.size()));
        }
        std::vector<Vector> out;
        out.reserve(rows.size());
        for (const auto& row : rows) {
            if (!row.is_array()) {
                throw BadResponse("vector entry is not a list");
            }
            if (row.size() != endpoint_.dim) {
                throw DimMismatch(endpoint_.dim, row.size());
            }
            Vector v;
            v.components.reserve(row.size());
            for (const auto& x : row) {
                if (!x.is_number()) {
                    throw BadResponse("vector component is not a number");
                }
                v.components.push_back(x.get<double>());
            }
            out.push_back(normalized(std::move(v)));
        }
        return out;
    }
    throw TransportError("embedding service unreachable after " +
                         std::to_string(endpoint_.max_attempts) + " attempts: " + last_error);
}

std::vector<Vector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<std::uint64_t> keys;
    keys.reserve(texts.size());
    for (const auto& t : texts) {
        keys.push_back(fnv1a64(t));
    }

    std::map<std::uint64_t, Vector> resolved;
    {
        std::shared_lock lock(cache_mutex_);
        for (auto key : keys) {
            if (auto it = cache_.find(key); it != cache_.end()) {
                resolved.emplace(key, it->second);
            }
        }
    }

    // Claim the misses nobody else is fetching; wait on the rest.
    std::vector<std::string> to_fetch;
    std::vector<std::uint64_t> fetch_keys;
    std::map<std::uint64_t, std::promise<Vector>> promises;
    std::map<std::uint64_t, std::shared_future<Vector>> waits;
    {
        std::lock_guard lock(inflight_mutex_);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            const auto key = keys[i];
            if (resolved.contains(key) || promises.contains(key) || waits.contains(key)) {
                continue;
            }
            if (auto it = inflight_.find(key); it != inflight_.end()) {
                waits.emplace(key, it->second);
                continue;
            }
            auto& promise = promises[key];
            inflight_.emplace(key, promise.get_future().share());
            to_fetch.push_back(texts[i]);
            fetch_keys.push_back(key);
        }
    }

    if (!to_fetch.empty()) {
        auto release = [&] {
            std::lock_guard lock(inflight_mutex_);
            for (auto key : fetch_keys) {
                inflight_.erase(key);
            }
        };
        try {
            auto vectors = fetch(to_fetch);
            {
                std::unique_lock lock(cache_mutex_);
                for (std::size_t i = 0; i < fetch_keys.size(); ++i) {
                    cache_.insert_or_assign(fetch_keys[i], vectors[i]);
                }
            }
            for (std::size_t i = 0; i < fetch_keys.size(); ++i) {
                promises[fetch_keys[i]].set_value(vectors[i]);
                resolved.emplace(fetch_keys[i], std::move(vectors[i]));
            }
            release();
        } catch (...) {
            for (auto& [key, promise] : promises) {
                promise.set_exception(std::current_exception());
            }
            release();
            throw;
        }
    }
    for (auto& [key, future] : waits) {
        resolved.emplace(key, future.get());
    }

    std::vector<Vector> out;
    out.reserve(texts.size());
    for (auto key : keys) {
        out.push_back(resolved.at(key));
    }
    return out;
}

void RemoteEmbedder::load_cache(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        return;
    }
    std::string line;
    std::unique_lock lock(cache_mutex_);
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string hex;
        if (!(row >> hex)) {
            continue;
        }
        Vector v;
        double x = 0.0;
        while (row >> x) {
            v.components.push_back(x);
        }
        if (v.dim() != endpoint_.dim) {
            throw DimMismatch(endpoint_.dim, v.dim());
        }
        cache_.insert_or_assign(std::stoull(hex, nullptr, 16), std::move(v));
    }
}

void RemoteEmbedder::save_cache(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    out.precision(17);
    std::shared_lock lock(cache_mutex_);
    for (const auto& [key, v] : cache_) {
        std::ostringstream hex;
        hex << std::hex << key;
        out << hex.str();
        for (double x : v.components) {
            out << ' ' << x;
        }
        out << '\n';
    }
}

std::vector<Vector> remote_embed(const std::vector<std::string>& batch, const RemoteEmbedder& client) {
    return client.embed_batch(batch);
}

}  // namespace dgr
