#include "crs/pipeline.hpp"

#include <stdexcept>

#include "crs/parallel.hpp"
#include "crs/policy.hpp"

namespace crs {

FeatureVector step_features(const DialogueState& pre_action_state, const Action& action,
                            const FeedbackEvent& feedback, const Simulator& sim) {
    FeatureVector f;
    f.engagement = engagement_score(feedback, sim.cfg.dwell_max);
    f.relevance = relevance_score(pre_action_state.active_query_tokens,
                                  sim.item_embeddings.of(action.item_id), sim.table);
    f.sentiment_shift = sentiment_shift(feedback);
    return f;
}

Trajectory rollout_dialogue(const PolicyParams& params, const Simulator& sim,
                            const RewardStack& stack, int user_profile_id, RngStream rng) {
    UserProfile profile = sample_user(rng, sim.cfg.embedding_dim, sim.cfg);
    UserSession session(sim, profile);

    Trajectory traj;
    traj.user_profile_id = user_profile_id;
    traj.done = true;

    DialogueState state = initial_state(sim.cfg.k_window, session.opening(rng));
    while (!session.exhausted() && state.turn_index + 2 <= sim.cfg.max_turns) {
        std::vector<double> sv = encode_state(state, sim.table, sim.cfg.max_turns);
        PolicyOutput out = forward(params, sv);
        auto [action, lp] = sample_action(out, rng);

        Utterance agent = render_utterance(action, sim.catalog, sim.templates, state.turn_index + 1);
        auto [reply, fb] = session.react(action, state, rng);

        StepRecord rec;
        rec.state = state;
        rec.action = action;
        rec.feedback = fb;
        rec.log_prob = lp;
        rec.value = out.value;
        rec.raw_reward = reward_for_step(step_features(state, action, fb, sim), stack.model,
                                         stack.config, stack.mode);
        traj.steps.push_back(std::move(rec));

        state = advance_state(state, action, agent, reply);
    }
    return traj;
}

std::vector<Trajectory> collect_batch(const PolicyParams& params, const Simulator& sim,
                                      const RewardStack& stack, int n_trajectories,
                                      RngStream rng, NormalizationScope scope) {
    if (n_trajectories <= 0) throw std::invalid_argument("collect_batch: need at least one trajectory");
    std::vector<Trajectory> batch(static_cast<std::size_t>(n_trajectories));
    parallel_for(batch.size(), [&](std::size_t i) {
        batch[i] = rollout_dialogue(params, sim, stack, static_cast<int>(i), rng.split(i));
    });
    normalize_rewards(batch, scope);
    return batch;
}

RolloutEpisode to_episode(const Trajectory& trajectory, const Simulator& sim, int max_turns) {
    RolloutEpisode ep;
    ep.done = trajectory.done;
    ep.steps.reserve(trajectory.steps.size());
    for (const auto& rec : trajectory.steps) {
        RolloutStep s;
        s.state_vec = encode_state(rec.state, sim.table, max_turns);
        s.action = rec.action;
        s.raw_reward = rec.raw_reward;
        s.norm_reward = rec.normalized_reward;
        s.old_log_prob = rec.log_prob;
        s.value = rec.value;
        ep.steps.push_back(std::move(s));
    }
    return ep;
}

BatchCollector make_dialogue_collector(const Simulator& sim, const RewardStack& stack,
                                       int trajectories_per_batch, int max_turns) {
    return [&sim, stack, trajectories_per_batch, max_turns](const PolicyParams& params,
                                                            RngStream& rng) {
        auto batch = collect_batch(params, sim, stack, trajectories_per_batch, rng,
                                   NormalizationScope::None);
        std::vector<RolloutEpisode> episodes;
        episodes.reserve(batch.size());
        for (const auto& t : batch) episodes.push_back(to_episode(t, sim, max_turns));
        return episodes;
    };
}

std::vector<std::pair<FeatureVector, WeakLabel>> weak_label_dataset(const Corpus& corpus,
                                                                    const Simulator& sim) {
    std::vector<std::pair<FeatureVector, WeakLabel>> out;
    for (const auto& log : corpus.dialogues) {
        // replay active query tokens alongside actions
        Tokens query;
        std::size_t action_idx = 0;
        for (std::size_t t = 0; t < log.turns.size(); ++t) {
            const Utterance& u = log.turns[t];
            if (u.speaker == Speaker::User) {
                query = u.tokens;
                continue;
            }
            if (action_idx >= log.actions.size() ||
                u.turn_index != log.actions[action_idx].turn_index)
                continue;
            const LoggedAction& a = log.actions[action_idx];
            const FeedbackEvent& fb = log.feedback[action_idx];
            ++action_idx;
            if (a.item_id >= sim.catalog.size()) continue;

            FeatureVector f;
            f.engagement = engagement_score(fb, sim.cfg.dwell_max);
            f.relevance = query.empty()
                              ? 0.0
                              : relevance_score(query, sim.item_embeddings.of(a.item_id), sim.table);
            f.sentiment_shift = sentiment_shift(fb);
            out.emplace_back(f, weak_label(f, fb.accepted));
        }
    }
    return out;
}

}  // namespace crs
