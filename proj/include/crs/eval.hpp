#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crs/metrics.hpp"
#include "crs/pipeline.hpp"
#include "crs/policy.hpp"
#include "crs/ppo.hpp"
#include "crs/user_sim.hpp"

namespace crs {

struct EvalConfig {
    int n_dialogues = 100;
    int k = 5;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    double w_eng = 0.5;
    double w_sent = 0.5;
};

struct SeedEval {
    std::uint64_t seed = 0;
    double hr = 0.0;
    double ndcg = 0.0;
    double bleu = 0.0;
    double satisfaction = 0.0;  // S(sessions) for this seed
    int scored_turns = 0;
};

// Metrics stored in [0, 1]; reports scale by 100 at render time.
struct EvalReport {
    double hr_at_k = 0.0;
    double ndcg_at_k = 0.0;
    double bleu_4 = 0.0;
    double satisfaction = 0.0;
    double satisfaction_gain_pct = 0.0;  // vs. a baseline report, 0 when none
    double hr_std = 0.0;
    double ndcg_std = 0.0;
    std::vector<SeedEval> per_seed;
};

EvalReport evaluate_policy(const PolicyParams& params, const Simulator& sim,
                           const EvalConfig& cfg);

// Fill candidate.satisfaction_gain_pct relative to baseline.
void fill_satisfaction_gain(EvalReport& candidate, const EvalReport& baseline);

enum class AblationMode { Full, EngagementOnly, SentimentOnly, CoherenceOnly };

const char* ablation_mode_name(AblationMode mode);
RewardConfig ablation_reward_config(AblationMode mode);

struct AblationRow {
    std::string name;
    double hr_at_k = 0.0;
    double ndcg_at_k = 0.0;
    double bleu_4 = 0.0;
    double satisfaction_gain_pct = 0.0;
    double hr_std = 0.0;
};

// Trains one policy per reward mode (linear reward with the other weights
// zeroed) from the same pretrained initialization and evaluates each; one
// training per (mode, seed), metrics averaged across seeds. The full row
// uses the configured blend weights. Row order matches the report
// convention: full model first.
std::vector<AblationRow> run_ablation(const Simulator& sim, const PolicyParams& pretrained,
                                      const PPOConfig& base_ppo, const EvalConfig& eval_cfg,
                                      const std::vector<std::uint64_t>& train_seeds,
                                      const RewardConfig& full_weights = RewardConfig());

}  // namespace crs
