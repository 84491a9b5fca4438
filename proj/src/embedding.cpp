#include "crs/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crs/rng.hpp"

namespace crs {

Vec EmbeddingTable::token_vector(const Token& token) const {
    RngStream stream(mix64(seed ^ fnv1a64(token)));
    Vec v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = stream.uniform(-1.0, 1.0);
    return v;
}

Vec embed_tokens(const Tokens& tokens, const EmbeddingTable& table) {
    if (tokens.empty()) throw std::invalid_argument("embed_tokens: empty token sequence");
    Vec acc(static_cast<std::size_t>(table.dim), 0.0);
    for (const auto& tok : tokens) {
        Vec v = table.token_vector(tok);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (auto& x : acc) x *= inv;
    return acc;
}

double dot(const Vec& u, const Vec& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

double cosine(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine: length mismatch");
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine: zero-norm input");
    double c = dot(u, v) / (nu * nv);
    return std::clamp(c, -1.0, 1.0);
}

}  // namespace crs
