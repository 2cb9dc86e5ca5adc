#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dgr {

inline constexpr std::size_t kDefaultEmbeddingDim = 256;

/// Dense embedding. Unit L2 norm, or all zeros for empty input.
struct Vector {
    std::vector<double> components;

    std::size_t dim() const noexcept { return components.size(); }
    bool is_zero() const noexcept;
    double norm() const noexcept;

    bool operator==(const Vector&) const = default;
};

double dot(const Vector& u, const Vector& v);

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]; 0 when either side is zero.
/// Throws DimMismatch.
double cosine(const Vector& u, const Vector& v);

/// Scales to unit length; the zero vector is returned unchanged.
Vector normalized(Vector v);

std::uint64_t fnv1a64(std::string_view bytes);

/// Reference feature-hashing embedder: lowercased alphanumeric tokens, each
/// adds +1 or -1 (sign from the top hash bit) at index hash mod dim.
Vector embed_text(std::string_view text, std::size_t dim = kDefaultEmbeddingDim);

/// Source of the query encoder f and node encoders g_B / g_D.
/// Implementations must return the same vector for the same text.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual Vector embed(std::string_view text) const = 0;
    virtual std::vector<Vector> embed_batch(const std::vector<std::string>& texts) const;
};

class HashingEmbedder final : public EmbeddingProvider {
public:
    explicit HashingEmbedder(std::size_t dim = kDefaultEmbeddingDim);

    std::string name() const override { return "reference"; }
    std::size_t dim() const override { return dim_; }
    Vector embed(std::string_view text) const override { return embed_text(text, dim_); }

private:
    std::size_t dim_;
};

}  // namespace dgr
