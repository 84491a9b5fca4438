#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "crs/policy.hpp"
#include "crs/reward.hpp"
#include "crs/rng.hpp"
#include "crs/types.hpp"

namespace crs {

struct PPOConfig {
    double clip_epsilon = 0.2;
    double learning_rate = 3e-4;
    double discount_gamma = 0.99;
    double gae_lambda = 0.95;
    double value_coef = 0.5;
    double entropy_coef = 0.01;
    int trajectories_per_batch = 128;
    int ppo_epochs_per_batch = 4;
    int outer_epochs = 5;
    int minibatch_size = 256;
    std::uint64_t seed = 0;
    bool normalize_advantages = true;
    NormalizationScope reward_normalization = NormalizationScope::Batch;

    void validate() const;
};

struct UpdateDiagnostics {
    int outer_epoch = 0;
    int update_index = 0;
    double surrogate = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double mean_reward = 0.0;   // raw, over the collected batch
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
};

struct TrainReport {
    std::vector<UpdateDiagnostics> updates;
    std::vector<double> epoch_mean_reward;  // per outer epoch, raw
    bool aborted = false;
};

struct AbortUpdateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Policy-agnostic step buffer the optimizer consumes. state_vec is whatever
// encode_state (or a toy environment) produced.
struct RolloutStep {
    std::vector<double> state_vec;
    Action action;
    double raw_reward = 0.0;
    double norm_reward = 0.0;
    double old_log_prob = 0.0;
    double value = 0.0;
    double advantage = 0.0;
    double ret = 0.0;
};

struct RolloutEpisode {
    std::vector<RolloutStep> steps;
    bool done = true;
};

// Collects one batch of episodes against a frozen policy snapshot; the
// dialogue pipeline and the toy-MDP tests both plug in here.
using BatchCollector =
    std::function<std::vector<RolloutEpisode>(const PolicyParams&, RngStream&)>;

// GAE(gamma, lambda). bootstrap_value is used for V(s_T) when the episode
// was truncated rather than done.
void compute_gae(std::vector<double>& advantages, std::vector<double>& returns,
                 const std::vector<double>& rewards, const std::vector<double>& values,
                 bool done, const PPOConfig& cfg, double bootstrap_value = 0.0);

// Clipped-surrogate loss over one minibatch. Accumulates gradients of
//   -surrogate + value_coef * value MSE - entropy_coef * entropy
// into grad and returns diagnostics.
struct PpoLossResult {
    double total_loss = 0.0;
    double surrogate = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
};
PpoLossResult ppo_loss(const std::vector<const RolloutStep*>& minibatch,
                       const PolicyParams& params, const PPOConfig& cfg,
                       PolicyParams& grad);

// Normalize rewards across the batch, fill GAE advantages/returns in place.
void prepare_batch(std::vector<RolloutEpisode>& batch, const PPOConfig& cfg);

using EvalHook = std::function<void(int outer_epoch, const PolicyParams&)>;

TrainReport train(PolicyParams& params, const PPOConfig& cfg, const BatchCollector& collect,
                  const EvalHook& eval_hook = {});

}  // namespace crs
