#pragma once

#include <set>
#include <vector>

#include "crs/types.hpp"

namespace crs {

// 1 if any relevant item appears in the first k positions.
double hr_at_k(const std::vector<int>& ranked_items, const std::set<int>& relevant, int k);

// Binary-relevance NDCG with the ideal ordering as normalizer.
double ndcg_at_k(const std::vector<int>& ranked_items, const std::set<int>& relevant, int k);

// Geometric mean of modified 1..4-gram precisions times a brevity penalty.
// Add-one smoothing only on zero counts for n >= 2, so an exact match
// scores 1.0.
double bleu4(const Tokens& candidate, const std::vector<Tokens>& references);

// Weighted engagement/sentiment satisfaction score of one session set.
double satisfaction_score(const std::vector<FeedbackEvent>& sessions, double w_eng,
                          double w_sent, double dwell_max);

// 100 * (S(candidate) - S(baseline)) / S(baseline).
double satisfaction_gain(const std::vector<FeedbackEvent>& baseline,
                         const std::vector<FeedbackEvent>& candidate,
                         double w_eng, double w_sent, double dwell_max);

}  // namespace crs
