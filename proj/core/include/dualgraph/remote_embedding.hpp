#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dualgraph/embedding.hpp"

namespace dgr {

struct RemoteEndpoint {
    /// e.g. "http://127.0.0.1:8080/embed"
    std::string url;
    std::size_t dim = kDefaultEmbeddingDim;
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{100};
    std::chrono::milliseconds max_backoff{2000};
    std::chrono::seconds timeout{10};
};

/// HTTP client for an embedding service speaking
///   POST {"texts": [...]}  ->  {"vectors": [[...], ...]}
/// Results are cached by 64-bit content hash. Concurrent requests for the
/// same text share one in-flight call. Failures surface as errors; there is
/// no fallback to the reference embedder.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(RemoteEndpoint endpoint);

    std::string name() const override { return "remote"; }
    std::size_t dim() const override { return endpoint_.dim; }
    Vector embed(std::string_view text) const override;
    std::vector<Vector> embed_batch(const std::vector<std::string>& texts) const override;

    /// Number of HTTP requests issued so far (including retries).
    std::size_t network_calls() const noexcept { return network_calls_.load(); }
    std::size_t cache_size() const;

    /// Cache file: one line per entry, "<hash-hex> <component> ...".
    void load_cache(const std::filesystem::path& path);
    void save_cache(const std::filesystem::path& path) const;

private:
    std::vector<Vector> fetch(const std::vector<std::string>& texts) const;

    RemoteEndpoint endpoint_;
    std::string host_;
    std::string path_;
    mutable std::shared_mutex cache_mutex_;
    mutable std::map<std::uint64_t, Vector> cache_;
    mutable std::mutex inflight_mutex_;
    mutable std::map<std::uint64_t, std::shared_future<Vector>> inflight_;
    mutable std::atomic<std::size_t> network_calls_{0};
};

/// Batch embedding through `client`; order-preserving.
std::vector<Vector> remote_embed(const std::vector<std::string>& batch, const RemoteEmbedder& client);

}  // namespace dgr
