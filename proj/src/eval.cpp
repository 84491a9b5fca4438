#include "crs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "crs/parallel.hpp"

namespace crs {

namespace {

std::vector<int> rank_items(const std::vector<double>& item_probs) {
    std::vector<int> order(item_probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return item_probs[static_cast<std::size_t>(a)] > item_probs[static_cast<std::size_t>(b)];
    });
    return order;
}

std::vector<Tokens> reference_renders(const Simulator& sim, int item_id) {
    std::vector<Tokens> refs;
    const Tokens& title = sim.catalog.at(item_id).title_tokens;
    for (const auto& tpl : sim.templates)
        if (tpl.reference) refs.push_back(substitute_item(tpl.tokens, title));
    return refs;
}

double stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mu = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mu) * (x - mu);
    return std::sqrt(var / static_cast<double>(xs.size()));
}

SeedEval evaluate_seed(const PolicyParams& params, const Simulator& sim,
                       const EvalConfig& cfg, std::uint64_t seed) {
    SeedEval ev;
    ev.seed = seed;
    RngStream root(seed);
    double hr_sum = 0.0, ndcg_sum = 0.0, bleu_sum = 0.0;
    int scored = 0, bleu_turns = 0;
    std::vector<FeedbackEvent> events;

    for (int d = 0; d < cfg.n_dialogues; ++d) {
        RngStream rng = root.split(static_cast<std::uint64_t>(d));
        UserProfile profile = sample_user(rng, sim.cfg.embedding_dim, sim.cfg);
        UserSession session(sim, profile);
        auto relevant_vec = sim.relevant_items(profile);
        std::set<int> relevant(relevant_vec.begin(), relevant_vec.end());

        DialogueState state = initial_state(sim.cfg.k_window, session.opening(rng));
        while (!session.exhausted() && state.turn_index + 2 <= sim.cfg.max_turns) {
            std::vector<double> sv = encode_state(state, sim.table, sim.cfg.max_turns);
            PolicyOutput out = forward(params, sv);
            auto [action, lp] = sample_action(out, rng);
            (void)lp;

            if (!relevant.empty()) {
                std::vector<int> ranking = rank_items(out.item_probs);
                hr_sum += hr_at_k(ranking, relevant, cfg.k);
                ndcg_sum += ndcg_at_k(ranking, relevant, cfg.k);
                ++scored;
            }
            Utterance agent = render_utterance(action, sim.catalog, sim.templates, state.turn_index + 1);
            bleu_sum += bleu4(agent.tokens, reference_renders(sim, action.item_id));
            ++bleu_turns;

            auto [reply, fb] = session.react(action, state, rng);
            events.push_back(fb);
            state = advance_state(state, action, agent, reply);
        }
    }
    ev.hr = scored > 0 ? hr_sum / scored : 0.0;
    ev.ndcg = scored > 0 ? ndcg_sum / scored : 0.0;
    ev.bleu = bleu_turns > 0 ? bleu_sum / bleu_turns : 0.0;
    ev.satisfaction = events.empty() ? 0.0
                                     : satisfaction_score(events, cfg.w_eng, cfg.w_sent,
                                                          sim.cfg.dwell_max);
    ev.scored_turns = scored;
    return ev;
}

}  // namespace

EvalReport evaluate_policy(const PolicyParams& params, const Simulator& sim,
                           const EvalConfig& cfg) {
    if (cfg.n_dialogues <= 0) throw std::invalid_argument("evaluate_policy: n_dialogues must be positive");
    if (cfg.seeds.empty()) throw std::invalid_argument("evaluate_policy: need at least one seed");

    EvalReport report;
    report.per_seed.resize(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), [&](std::size_t i) {
        report.per_seed[i] = evaluate_seed(params, sim, cfg, cfg.seeds[i]);
    });

    std::vector<double> hrs, ndcgs;
    for (const auto& s : report.per_seed) {
        report.hr_at_k += s.hr;
        report.ndcg_at_k += s.ndcg;
        report.bleu_4 += s.bleu;
        report.satisfaction += s.satisfaction;
        hrs.push_back(s.hr);
        ndcgs.push_back(s.ndcg);
    }
    const double n = static_cast<double>(cfg.seeds.size());
    report.hr_at_k /= n;
    report.ndcg_at_k /= n;
    report.bleu_4 /= n;
    report.satisfaction /= n;
    report.hr_std = stddev(hrs);
    report.ndcg_std = stddev(ndcgs);
    return report;
}

void fill_satisfaction_gain(EvalReport& candidate, const EvalReport& baseline) {
    if (baseline.satisfaction == 0.0)
        throw std::invalid_argument("satisfaction gain: undefined, baseline score is 0");
    candidate.satisfaction_gain_pct =
        100.0 * (candidate.satisfaction - baseline.satisfaction) / baseline.satisfaction;
}

const char* ablation_mode_name(AblationMode mode) {
    switch (mode) {
        case AblationMode::Full: return "full";
        case AblationMode::EngagementOnly: return "engagement-only";
        case AblationMode::SentimentOnly: return "sentiment-only";
        case AblationMode::CoherenceOnly: return "coherence-only";
    }
    return "?";
}

RewardConfig ablation_reward_config(AblationMode mode) {
    switch (mode) {
        case AblationMode::Full: return RewardConfig(1.0 / 3, 1.0 / 3, 1.0 / 3);
        case AblationMode::EngagementOnly: return RewardConfig(1, 0, 0);
        case AblationMode::SentimentOnly: return RewardConfig(0, 0, 1);
        case AblationMode::CoherenceOnly: return RewardConfig(0, 1, 0);
    }
    throw std::logic_error("unknown ablation mode");
}

std::vector<AblationRow> run_ablation(const Simulator& sim, const PolicyParams& pretrained,
                                      const PPOConfig& base_ppo, const EvalConfig& eval_cfg,
                                      const std::vector<std::uint64_t>& train_seeds,
                                      const RewardConfig& full_weights) {
    if (train_seeds.empty()) throw std::invalid_argument("run_ablation: need training seeds");

    EvalReport baseline = evaluate_policy(pretrained, sim, eval_cfg);

    std::vector<AblationRow> rows;
    for (AblationMode mode : {AblationMode::Full, AblationMode::EngagementOnly,
                              AblationMode::SentimentOnly, AblationMode::CoherenceOnly}) {
        AblationRow row;
        row.name = ablation_mode_name(mode);
        std::vector<double> hrs;
        for (std::uint64_t seed : train_seeds) {
            RewardStack stack;
            stack.config = mode == AblationMode::Full ? full_weights
                                                      : ablation_reward_config(mode);
            stack.mode = RewardMode::Linear;
            RngStream mrng(seed ^ 0x5EEDF00D);
            stack.model = RewardModel::init(16, mrng);  // unused in linear mode

            PPOConfig ppo = base_ppo;
            ppo.seed = seed;
            PolicyParams params = pretrained;
            BatchCollector collector =
                make_dialogue_collector(sim, stack, ppo.trajectories_per_batch, sim.cfg.max_turns);
            train(params, ppo, collector);

            EvalReport ev = evaluate_policy(params, sim, eval_cfg);
            fill_satisfaction_gain(ev, baseline);
            row.hr_at_k += ev.hr_at_k;
            row.ndcg_at_k += ev.ndcg_at_k;
            row.bleu_4 += ev.bleu_4;
            row.satisfaction_gain_pct += ev.satisfaction_gain_pct;
            hrs.push_back(ev.hr_at_k);
        }
        const double n = static_cast<double>(train_seeds.size());
        row.hr_at_k /= n;
        row.ndcg_at_k /= n;
        row.bleu_4 /= n;
        row.satisfaction_gain_pct /= n;
        row.hr_std = stddev(hrs);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace crs
