#include "dualgraph/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "dualgraph/error.hpp"
#include "dualgraph/text.hpp"

namespace dgr {

bool Vector::is_zero() const noexcept {
    return std::all_of(components.begin(), components.end(), [](double x) { return x == 0.0; });
}

double Vector::norm() const noexcept {
    double sum = 0.0;
    for (double x : components) {
        sum += x * x;
    }
    return std::sqrt(sum);
}

double dot(const Vector& u, const Vector& v) {
    if (u.dim() != v.dim()) {
        throw DimMismatch(u.dim(), v.dim());
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) {
        sum += u.components[i] * v.components[i];
    }
    return sum;
}

double cosine(const Vector& u, const Vector& v) {
    const double d = dot(u, v);
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) {
        return 0.0;
    }
    return std::clamp(d / (nu * nv), -1.0, 1.0);
}

Vector normalized(Vector v) {
    const double n = v.norm();
    if (n == 0.0) {
        return v;
    }
    for (double& x : v.components) {
        x /= n;
    }
    return v;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

Vector embed_text(std::string_view text, std::size_t dim) {
    Vector v;
    v.components.assign(dim, 0.0);
    for (const auto& token : tokenize(text)) {
        const std::uint64_t h = fnv1a64(token);
        const double sign = (h >> 63) == 0 ? 1.0 : -1.0;
        v.components[h % dim] += sign;
    }
    return normalized(std::move(v));
}

std::vector<Vector> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(embed(t));
    }
    return out;
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) {
        throw Error("embedding dimension must be positive");
    }
}

}  // namespace dgr
