#pragma once

#include <cstdint>
#include <vector>

#include "crs/corpus.hpp"
#include "crs/dialogue.hpp"
#include "crs/embedding.hpp"
#include "crs/rng.hpp"
#include "crs/types.hpp"

namespace crs {

struct SimConfig {
    int catalog_size = 100;
    int embedding_dim = 32;
    std::uint64_t embedding_seed = 17;
    std::uint64_t catalog_seed = 99;
    int k_window = 4;
    double dwell_max = 30.0;
    double sigmoid_slope = 3.0;      // dwell = dwell_max * sigma(slope * align) + noise
    double sentiment_drift = 0.5;    // additive affect drift per recommendation
    double noise_scale = 0.1;
    double accept_min = 0.2;
    double accept_max = 0.6;
    double affect_baseline_range = 0.3;
    int patience_min = 4;
    int patience_max = 10;
    int max_turns = 20;
    int opening_mentions = 3;        // liked titles mentioned in the opening utterance
    double behavior_greedy_prob = 0.7;
    // On rejection the user either steers back to a liked title or gives a
    // bare complaint with no title; this is the probability of steering back.
    double reject_reanchor_prob = 1.0;
    // Steering mentions one of the user's top-n liked titles.
    int reanchor_pool = 1;
};

struct UserProfile {
    Vec preference_vector;       // unit norm
    double affect_baseline = 0.0;
    double accept_threshold = 0.4;
    double noise_scale = 0.1;
    int patience = 6;            // max agent recommendations tolerated
};

UserProfile sample_user(RngStream& rng, int catalog_dim, const SimConfig& cfg);

enum class BehaviorPolicy { RelevanceGreedy, UniformRandom };

// Catalog, templates and frozen embeddings bundled with the config.
struct Simulator {
    SimConfig cfg;
    Catalog catalog;
    TemplateTable templates;
    EmbeddingTable table;
    ItemEmbeddings item_embeddings;
    TemplateTable positive_replies;  // <ITEM> placeholder, positive lexicon words
    TemplateTable negative_replies;       // <ITEM> slot carries a liked title
    TemplateTable negative_bare_replies;  // no title mention at all

    static Simulator build(const SimConfig& cfg);

    double alignment(const UserProfile& profile, int item_id) const;
    // Items the user would accept; the HR/NDCG ground truth.
    std::vector<int> relevant_items(const UserProfile& profile) const;
};

// Deterministic synthetic catalog (two-token titles, fixed tag vocabulary).
Catalog make_catalog(int size, std::uint64_t seed);

// Per-dialogue mutable user state: affect drifts as recommendations land.
class UserSession {
public:
    UserSession(const Simulator& sim, UserProfile profile);

    const UserProfile& profile() const { return profile_; }
    double affect() const { return affect_; }
    int turns_taken() const { return turns_taken_; }
    bool exhausted() const { return turns_taken_ >= profile_.patience; }

    // The user states what they are after; mentions up to
    // cfg.opening_mentions of their best-aligned titles.
    Utterance opening(RngStream& rng) const;

    // React to one recommendation: emulated dwell, sentiment drift,
    // accept/reject, and a polarity-templated reply.
    std::pair<Utterance, FeedbackEvent> react(const Action& action,
                                              const DialogueState& state,
                                              RngStream& rng);

private:
    const Simulator& sim_;
    UserProfile profile_;
    double affect_;
    int turns_taken_ = 0;
    std::vector<int> liked_;  // item ids sorted by alignment, best first
};

// Synthetic pretraining corpus: behavior policy is relevance-greedy with
// probability cfg.behavior_greedy_prob, uniform random otherwise.
Corpus generate_corpus(const Simulator& sim, int n_dialogues, std::uint64_t seed,
                       BehaviorPolicy policy = BehaviorPolicy::RelevanceGreedy);

int greedy_relevance_action(const Simulator& sim, const Tokens& query_tokens);

}  // namespace crs
