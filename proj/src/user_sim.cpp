#include "crs/user_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crs {

namespace {

const char* kAdjectives[] = {
    "solar", "silent", "crimson", "broken", "midnight", "golden", "electric",
    "frozen", "distant", "hidden", "iron", "velvet", "savage", "gentle",
    "neon", "shattered", "burning", "quiet", "lonely", "final"};
const char* kNouns[] = {
    "drift", "horizon", "empire", "garden", "signal", "mirror", "voyage",
    "harbor", "canyon", "orbit", "thunder", "meadow", "cipher", "lantern",
    "summit", "tides", "echo", "fortress", "valley", "crossing"};
const char* kTagVocab[] = {"scifi", "drama", "comedy", "action",
                           "romance", "thriller", "documentary", "horror"};

Tokens words(std::initializer_list<const char*> ws) {
    Tokens t;
    for (const char* w : ws) t.emplace_back(w);
    return t;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Catalog make_catalog(int size, std::uint64_t seed) {
    constexpr int na = 20, nn = 20;
    if (size > na * nn) throw std::invalid_argument("make_catalog: size exceeds title pool");
    RngStream rng(mix64(seed ^ 0xCA7A106ULL));
    std::vector<int> combos(na * nn);
    std::iota(combos.begin(), combos.end(), 0);
    rng.shuffle(combos);

    Catalog cat;
    cat.items.reserve(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
        Item item;
        item.id = i;
        item.embedding_id = i;
        int c = combos[static_cast<std::size_t>(i)];
        item.title_tokens = {kAdjectives[c / nn], kNouns[c % nn]};
        item.tags.push_back(kTagVocab[rng.uniform_int(8)]);
        if (rng.uniform() < 0.3) {
            const char* extra = kTagVocab[rng.uniform_int(8)];
            if (extra != item.tags[0]) item.tags.push_back(extra);
        }
        cat.items.push_back(std::move(item));
    }
    return cat;
}

Simulator Simulator::build(const SimConfig& cfg) {
    Simulator sim;
    sim.cfg = cfg;
    sim.catalog = make_catalog(cfg.catalog_size, cfg.catalog_seed);
    sim.templates = default_templates();
    sim.table = EmbeddingTable{cfg.embedding_dim, cfg.embedding_seed};
    sim.item_embeddings = ItemEmbeddings::build(sim.catalog, sim.table);
    sim.positive_replies = {
        {words({"i", "love", "<ITEM>", "that", "sounds", "wonderful"}), false},
        {words({"great", "pick", "i", "really", "like", "<ITEM>"}), false},
        {words({"<ITEM>", "sounds", "amazing", "tell", "me", "more"}), false},
        {words({"yes", "i", "would", "enjoy", "<ITEM>"}), false},
    };
    // negative replies re-anchor the query on a liked title
    sim.negative_replies = {
        {words({"no", "that", "seems", "boring", "i", "would", "prefer", "something", "like", "<ITEM>"}), false},
        {words({"that", "sounds", "dull", "maybe", "something", "closer", "to", "<ITEM>"}), false},
        {words({"not", "for", "me", "i", "dislike", "that", "i", "usually", "watch", "things", "like", "<ITEM>"}), false},
        {words({"i", "hated", "that", "idea", "try", "something", "like", "<ITEM>"}), false},
    };
    // bare complaints carry no title at all
    sim.negative_bare_replies = {
        {words({"no", "that", "seems", "boring", "to", "me"}), false},
        {words({"i", "would", "not", "enjoy", "that", "at", "all"}), false},
        {words({"that", "is", "really", "not", "my", "kind", "of", "thing"}), false},
        {words({"please", "stop", "suggesting", "things", "of", "that", "sort"}), false},
    };
    return sim;
}

double Simulator::alignment(const UserProfile& profile, int item_id) const {
    return std::clamp(cosine(profile.preference_vector, item_embeddings.of(item_id)), -1.0, 1.0);
}

std::vector<int> Simulator::relevant_items(const UserProfile& profile) const {
    std::vector<int> out;
    for (int i = 0; i < catalog.size(); ++i)
        if (alignment(profile, i) > profile.accept_threshold) out.push_back(i);
    return out;
}

UserProfile sample_user(RngStream& rng, int catalog_dim, const SimConfig& cfg) {
    UserProfile p;
    p.preference_vector.resize(static_cast<std::size_t>(catalog_dim));
    double n2 = 0.0;
    for (auto& x : p.preference_vector) {
        x = rng.gaussian();
        n2 += x * x;
    }
    double inv = 1.0 / std::sqrt(n2);
    for (auto& x : p.preference_vector) x *= inv;
    p.affect_baseline = rng.uniform(-cfg.affect_baseline_range, cfg.affect_baseline_range);
    p.accept_threshold = rng.uniform(cfg.accept_min, cfg.accept_max);
    p.noise_scale = cfg.noise_scale;
    p.patience = cfg.patience_min +
                 static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.patience_max - cfg.patience_min + 1)));
    return p;
}

UserSession::UserSession(const Simulator& sim, UserProfile profile)
    : sim_(sim), profile_(std::move(profile)), affect_(profile_.affect_baseline) {
    liked_.resize(static_cast<std::size_t>(sim_.catalog.size()));
    std::iota(liked_.begin(), liked_.end(), 0);
    std::vector<double> align(liked_.size());
    for (std::size_t i = 0; i < align.size(); ++i)
        align[i] = sim_.alignment(profile_, static_cast<int>(i));
    std::stable_sort(liked_.begin(), liked_.end(),
                     [&](int a, int b) { return align[static_cast<std::size_t>(a)] > align[static_cast<std::size_t>(b)]; });
}

Utterance UserSession::opening(RngStream& /*rng*/) const {
    Utterance u;
    u.speaker = Speaker::User;
    u.turn_index = 0;
    u.tokens = words({"i", "am", "looking", "for", "something", "like"});
    int mentions = std::min<int>(sim_.cfg.opening_mentions, sim_.catalog.size());
    for (int m = 0; m < mentions; ++m) {
        if (m > 0) u.tokens.emplace_back("or");
        const Tokens& title = sim_.catalog.at(liked_[static_cast<std::size_t>(m)]).title_tokens;
        u.tokens.insert(u.tokens.end(), title.begin(), title.end());
    }
    return u;
}

std::pair<Utterance, FeedbackEvent> UserSession::react(const Action& action,
                                                       const DialogueState& state,
                                                       RngStream& rng) {
    const double align = sim_.alignment(profile_, action.item_id);
    const double dwell_max = sim_.cfg.dwell_max;

    FeedbackEvent fb;
    fb.dwell_time = std::clamp(
        dwell_max * logistic(sim_.cfg.sigmoid_slope * align) +
            rng.gaussian() * profile_.noise_scale * dwell_max,
        0.0, dwell_max);
    fb.sentiment_pre = affect_;
    fb.sentiment_post = std::clamp(
        fb.sentiment_pre + sim_.cfg.sentiment_drift * align + rng.gaussian() * profile_.noise_scale,
        -1.0, 1.0);
    fb.accepted = align > profile_.accept_threshold;

    const bool reanchor = !fb.accepted && rng.uniform() < sim_.cfg.reject_reanchor_prob;
    const TemplateTable& pool = fb.accepted ? sim_.positive_replies
                              : reanchor    ? sim_.negative_replies
                                            : sim_.negative_bare_replies;
    const ResponseTemplate& tpl = pool[rng.uniform_int(pool.size())];

    Utterance reply;
    reply.speaker = Speaker::User;
    reply.turn_index = state.turn_index + 2;
    if (fb.accepted) {
        reply.tokens = substitute_item(tpl.tokens, sim_.catalog.at(action.item_id).title_tokens);
    } else if (reanchor) {
        // steer back to one of the top liked titles
        int pool_n = std::min<int>(std::max(sim_.cfg.reanchor_pool, 1), sim_.catalog.size());
        int pick = liked_[rng.uniform_int(static_cast<std::uint64_t>(pool_n))];
        reply.tokens = substitute_item(tpl.tokens, sim_.catalog.at(pick).title_tokens);
    } else {
        reply.tokens = tpl.tokens;
    }

    affect_ = fb.sentiment_post;
    ++turns_taken_;
    return {reply, fb};
}

int greedy_relevance_action(const Simulator& sim, const Tokens& query_tokens) {
    if (query_tokens.empty()) return 0;
    Vec q = embed_tokens(query_tokens, sim.table);
    if (norm(q) == 0.0) return 0;
    int best = 0;
    double best_score = -2.0;
    for (int i = 0; i < sim.catalog.size(); ++i) {
        double s = cosine(q, sim.item_embeddings.of(i));
        if (s > best_score) {
            best_score = s;
            best = i;
        }
    }
    return best;
}

Corpus generate_corpus(const Simulator& sim, int n_dialogues, std::uint64_t seed,
                       BehaviorPolicy policy) {
    if (n_dialogues <= 0) throw std::invalid_argument("generate_corpus: n_dialogues must be positive");
    RngStream root(seed);
    Corpus corpus;
    corpus.dialogues.reserve(static_cast<std::size_t>(n_dialogues));
    for (int d = 0; d < n_dialogues; ++d) {
        RngStream rng = root.split(static_cast<std::uint64_t>(d));
        UserProfile profile = sample_user(rng, sim.cfg.embedding_dim, sim.cfg);
        UserSession session(sim, profile);

        DialogueLog log;
        log.dialogue_id = d;
        log.user_profile_id = d;

        DialogueState state = initial_state(sim.cfg.k_window, session.opening(rng));
        log.turns.push_back(state.window.front());

        while (!session.exhausted() && state.turn_index + 2 <= sim.cfg.max_turns) {
            Action action;
            bool greedy = policy == BehaviorPolicy::RelevanceGreedy &&
                          rng.uniform() < sim.cfg.behavior_greedy_prob;
            action.item_id = greedy ? greedy_relevance_action(sim, state.active_query_tokens)
                                    : static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(sim.catalog.size())));
            action.template_id = static_cast<int>(rng.uniform_int(sim.templates.size()));

            Utterance agent = render_utterance(action, sim.catalog, sim.templates, state.turn_index + 1);
            auto [reply, fb] = session.react(action, state, rng);

            log.turns.push_back(agent);
            log.turns.push_back(reply);
            log.actions.push_back({agent.turn_index, action.item_id, action.template_id});
            log.feedback.push_back(fb);

            state = advance_state(state, action, agent, reply);
        }
        corpus.dialogues.push_back(std::move(log));
    }
    return corpus;
}

}  // namespace crs
