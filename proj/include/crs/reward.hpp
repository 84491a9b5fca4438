#pragma once

#include <cstdint>
#include <vector>

#include "crs/rng.hpp"
#include "crs/signals.hpp"
#include "crs/types.hpp"

namespace crs {

struct RewardConfig {
    double alpha = 1.0 / 3.0;  // engagement weight
    double beta = 1.0 / 3.0;   // relevance weight
    double gamma = 1.0 / 3.0;  // sentiment-shift weight

    RewardConfig() = default;
    RewardConfig(double a, double b, double g);
};

// One hidden layer (tanh), scalar linear output. Trained with MSE against
// weak satisfaction labels.
struct RewardModel {
    static constexpr int kInputDim = 3;
    int hidden_dim = 16;
    std::vector<double> w1;  // hidden_dim x 3, row-major
    std::vector<double> b1;  // hidden_dim
    std::vector<double> w2;  // hidden_dim
    double b2 = 0.0;

    static RewardModel init(int hidden_dim, RngStream& rng);
    void check_finite() const;  // throws on a corrupt model
};

struct RewardTrainConfig {
    double learning_rate = 0.05;
    int epochs = 200;
    int minibatch_size = 32;
};

double linear_reward(const FeatureVector& feature, const RewardConfig& cfg);

double predict(const RewardModel& model, const FeatureVector& feature);

// MSE gradient for one minibatch; exposed for the finite-difference suite.
struct RewardGrad {
    std::vector<double> w1, b1, w2;
    double b2 = 0.0;
};
RewardGrad reward_mse_gradient(const RewardModel& model,
                               const std::vector<FeatureVector>& features,
                               const std::vector<double>& labels,
                               double* loss_out = nullptr);

std::vector<double> train_reward(RewardModel& model,
                                 const std::vector<std::pair<FeatureVector, WeakLabel>>& dataset,
                                 const RewardTrainConfig& cfg, std::uint64_t seed);

enum class RewardMode { Linear, Learned, Blended };

double reward_for_step(const FeatureVector& feature, const RewardModel& model,
                       const RewardConfig& cfg, RewardMode mode);

enum class NormalizationScope { Batch, PerConversation, None };

// Fill normalized_reward with the z-score of raw_reward. Throws when the
// scope holds fewer than 2 steps (sigma undefined).
void normalize_rewards(std::vector<Trajectory>& batch,
                       NormalizationScope scope = NormalizationScope::Batch);

}  // namespace crs
