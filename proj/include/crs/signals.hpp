#pragma once

#include <set>
#include <string>

#include "crs/embedding.hpp"
#include "crs/types.hpp"

namespace crs {

// The three normalized implicit-feedback channels.
struct FeatureVector {
    double engagement = 0.0;      // [0, 1]
    double relevance = 0.0;       // [-1, 1]
    double sentiment_shift = 0.0; // [-1, 1]
};

struct WeakLabel {
    double satisfaction = 0.0;  // [0, 1]
};

struct Lexicon {
    std::set<Token> positive;
    std::set<Token> negative;

    static Lexicon builtin();
    // Plain text, one token per line, "[positive]" / "[negative]" sections.
    static Lexicon load(const std::string& path);
    std::string to_text() const;
};

double engagement_score(const FeedbackEvent& event, double dwell_max);

// (post - pre) / 2, so the raw [-2, 2] range lands in [-1, 1].
double sentiment_shift(const FeedbackEvent& event);

// cosine(query embedding, item embedding); 0 for empty or degenerate queries.
double relevance_score(const Tokens& query_tokens, const Vec& item_vector,
                       const EmbeddingTable& table);

// (positive count - negative count) / total tokens.
double lexicon_sentiment(const Utterance& utterance, const Lexicon& lexicon);

WeakLabel weak_label(const FeatureVector& feature, bool accepted);

}  // namespace crs
