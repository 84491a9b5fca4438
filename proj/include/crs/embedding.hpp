#pragma once

#include <cstdint>
#include <vector>

#include "crs/types.hpp"

namespace crs {

using Vec = std::vector<double>;

// Frozen hash-based embeddings. Every token maps to a pseudo-random vector
// in [-1, 1]^dim determined only by (seed, token), so the relevance signal
// is a fixed, auditable function rather than a learned one.
struct EmbeddingTable {
    int dim = 32;
    std::uint64_t seed = 0;

    Vec token_vector(const Token& token) const;
};

// Mean of per-token hash vectors. Throws on an empty token sequence;
// callers that want a zero-vector fallback must opt in explicitly.
Vec embed_tokens(const Tokens& tokens, const EmbeddingTable& table);

// u.v / (|u||v|), clamped to [-1, 1]. Throws on length mismatch or a
// zero-norm input.
double cosine(const Vec& u, const Vec& v);

double dot(const Vec& u, const Vec& v);
double norm(const Vec& v);

}  // namespace crs
