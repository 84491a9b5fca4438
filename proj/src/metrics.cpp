#include "crs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "crs/signals.hpp"

namespace crs {

double hr_at_k(const std::vector<int>& ranked_items, const std::set<int>& relevant, int k) {
    if (k <= 0) throw std::invalid_argument("hr_at_k: k must be positive");
    if (relevant.empty()) throw std::invalid_argument("hr_at_k: empty relevant set");
    const std::size_t top = std::min(ranked_items.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < top; ++i)
        if (relevant.count(ranked_items[i])) return 1.0;
    return 0.0;
}

double ndcg_at_k(const std::vector<int>& ranked_items, const std::set<int>& relevant, int k) {
    if (k <= 0) throw std::invalid_argument("ndcg_at_k: k must be positive");
    if (relevant.empty()) throw std::invalid_argument("ndcg_at_k: empty relevant set");
    const std::size_t top = std::min(ranked_items.size(), static_cast<std::size_t>(k));
    double dcg = 0.0;
    for (std::size_t i = 0; i < top; ++i)
        if (relevant.count(ranked_items[i]))
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    const std::size_t ideal = std::min(static_cast<std::size_t>(k), relevant.size());
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

namespace {

std::map<Tokens, int> ngram_counts(const Tokens& tokens, std::size_t n) {
    std::map<Tokens, int> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[Tokens(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i + n))];
    return counts;
}

}  // namespace

double bleu4(const Tokens& candidate, const std::vector<Tokens>& references) {
    if (candidate.empty()) throw std::invalid_argument("bleu4: empty candidate");
    if (references.empty()) throw std::invalid_argument("bleu4: no references");

    const std::size_t max_order = std::min<std::size_t>(4, candidate.size());
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_order; ++n) {
        auto cand = ngram_counts(candidate, n);
        std::map<Tokens, int> max_ref;
        for (const auto& ref : references)
            for (const auto& [gram, c] : ngram_counts(ref, n))
                max_ref[gram] = std::max(max_ref[gram], c);
        int matched = 0, total = 0;
        for (const auto& [gram, c] : cand) {
            total += c;
            auto it = max_ref.find(gram);
            if (it != max_ref.end()) matched += std::min(c, it->second);
        }
        double precision;
        if (matched > 0) {
            precision = static_cast<double>(matched) / static_cast<double>(total);
        } else if (n >= 2) {
            precision = 1.0 / static_cast<double>(total + 1);  // add-one on zero counts
        } else {
            return 0.0;  // no unigram overlap at all
        }
        log_sum += std::log(precision) / static_cast<double>(max_order);
    }

    // closest reference length, shorter on ties
    const double c = static_cast<double>(candidate.size());
    std::size_t r = references.front().size();
    for (const auto& ref : references) {
        double d_new = std::abs(static_cast<double>(ref.size()) - c);
        double d_old = std::abs(static_cast<double>(r) - c);
        if (d_new < d_old || (d_new == d_old && ref.size() < r)) r = ref.size();
    }
    const double bp = std::exp(std::min(0.0, 1.0 - static_cast<double>(r) / c));
    return bp * std::exp(log_sum);
}

double satisfaction_score(const std::vector<FeedbackEvent>& sessions, double w_eng,
                          double w_sent, double dwell_max) {
    if (sessions.empty()) throw std::invalid_argument("satisfaction_score: empty session set");
    double eng = 0.0, sent = 0.0;
    for (const auto& e : sessions) {
        eng += engagement_score(e, dwell_max);
        sent += (sentiment_shift(e) + 1.0) / 2.0;
    }
    const double n = static_cast<double>(sessions.size());
    return w_eng * eng / n + w_sent * sent / n;
}

double satisfaction_gain(const std::vector<FeedbackEvent>& baseline,
                         const std::vector<FeedbackEvent>& candidate,
                         double w_eng, double w_sent, double dwell_max) {
    if (std::abs(w_eng + w_sent - 1.0) > 1e-9)
        throw std::invalid_argument("satisfaction_gain: weights must sum to 1");
    const double sb = satisfaction_score(baseline, w_eng, w_sent, dwell_max);
    if (sb == 0.0) throw std::invalid_argument("satisfaction_gain: undefined, baseline score is 0");
    const double sc = satisfaction_score(candidate, w_eng, w_sent, dwell_max);
    return 100.0 * (sc - sb) / sb;
}

}  // namespace crs
