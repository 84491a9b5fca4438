#pragma once

#include <cstdint>
#include <string>

#include "crs/policy.hpp"
#include "crs/reward.hpp"

namespace crs {

constexpr int kCheckpointSchemaVersion = 1;

// Versioned JSON weight files, shared by policy and reward checkpoints.
void save_policy(const PolicyParams& params, const std::string& path, std::uint64_t seed);
PolicyParams load_policy(const std::string& path);

void save_reward_model(const RewardModel& model, const std::string& path, std::uint64_t seed);
RewardModel load_reward_model(const std::string& path);

}  // namespace crs
