#pragma once

#include <cstdint>
#include <vector>

#include "crs/ppo.hpp"
#include "crs/reward.hpp"
#include "crs/user_sim.hpp"

namespace crs {

// The reward path applied to every simulator step.
struct RewardStack {
    RewardModel model;
    RewardConfig config;
    RewardMode mode = RewardMode::Learned;
};

FeatureVector step_features(const DialogueState& pre_action_state, const Action& action,
                            const FeedbackEvent& feedback, const Simulator& sim);

// Roll one dialogue with the policy; returns the fully populated trajectory.
Trajectory rollout_dialogue(const PolicyParams& params, const Simulator& sim,
                            const RewardStack& stack, int user_profile_id, RngStream rng);

// Exactly n complete trajectories with rewards normalized per the scope.
// Each dialogue owns a stream split from rng by its index, so results are
// identical whether rollouts run serially or across worker threads.
std::vector<Trajectory> collect_batch(const PolicyParams& params, const Simulator& sim,
                                      const RewardStack& stack, int n_trajectories,
                                      RngStream rng,
                                      NormalizationScope scope = NormalizationScope::Batch);

RolloutEpisode to_episode(const Trajectory& trajectory, const Simulator& sim, int max_turns);

// Adapter feeding the generic PPO trainer.
BatchCollector make_dialogue_collector(const Simulator& sim, const RewardStack& stack,
                                       int trajectories_per_batch, int max_turns = 20);

// Weak-label training data extracted from a logged corpus.
std::vector<std::pair<FeatureVector, WeakLabel>> weak_label_dataset(const Corpus& corpus,
                                                                    const Simulator& sim);

}  // namespace crs
