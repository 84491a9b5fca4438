#include "crs/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crs {

void PPOConfig::validate() const {
    if (clip_epsilon <= 0.0) throw std::invalid_argument("clip_epsilon must be positive");
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
    if (discount_gamma <= 0.0 || discount_gamma > 1.0)
        throw std::invalid_argument("discount_gamma must be in (0, 1]");
    if (gae_lambda < 0.0 || gae_lambda > 1.0)
        throw std::invalid_argument("gae_lambda must be in [0, 1]");
    if (trajectories_per_batch <= 0) throw std::invalid_argument("trajectories_per_batch must be positive");
    if (ppo_epochs_per_batch <= 0) throw std::invalid_argument("ppo_epochs_per_batch must be positive");
    if (minibatch_size <= 0) throw std::invalid_argument("minibatch_size must be positive");
    if (outer_epochs < 0) throw std::invalid_argument("outer_epochs must be non-negative");
}

void compute_gae(std::vector<double>& advantages, std::vector<double>& returns,
                 const std::vector<double>& rewards, const std::vector<double>& values,
                 bool done, const PPOConfig& cfg, double bootstrap_value) {
    if (rewards.size() != values.size() || rewards.empty())
        throw std::invalid_argument("compute_gae: rewards/values length mismatch or empty");
    const std::size_t n = rewards.size();
    advantages.assign(n, 0.0);
    returns.assign(n, 0.0);
    double next_value = done ? 0.0 : bootstrap_value;
    double gae = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        double delta = rewards[i] + cfg.discount_gamma * next_value - values[i];
        gae = delta + cfg.discount_gamma * cfg.gae_lambda * gae;
        advantages[i] = gae;
        returns[i] = gae + values[i];
        next_value = values[i];
    }
}

void prepare_batch(std::vector<RolloutEpisode>& batch, const PPOConfig& cfg) {
    // reuse normalize_rewards so there is exactly one z-score implementation
    std::vector<Trajectory> shim(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        shim[i].steps.resize(batch[i].steps.size());
        for (std::size_t j = 0; j < batch[i].steps.size(); ++j)
            shim[i].steps[j].raw_reward = batch[i].steps[j].raw_reward;
    }
    normalize_rewards(shim, cfg.reward_normalization);
    for (std::size_t i = 0; i < batch.size(); ++i)
        for (std::size_t j = 0; j < batch[i].steps.size(); ++j)
            batch[i].steps[j].norm_reward = shim[i].steps[j].normalized_reward;

    for (auto& ep : batch) {
        std::vector<double> rewards, values, adv, ret;
        rewards.reserve(ep.steps.size());
        values.reserve(ep.steps.size());
        for (const auto& s : ep.steps) {
            rewards.push_back(s.norm_reward);
            values.push_back(s.value);
        }
        compute_gae(adv, ret, rewards, values, ep.done, cfg);
        for (std::size_t j = 0; j < ep.steps.size(); ++j) {
            ep.steps[j].advantage = adv[j];
            ep.steps[j].ret = ret[j];
        }
    }
}

PpoLossResult ppo_loss(const std::vector<const RolloutStep*>& minibatch,
                       const PolicyParams& params, const PPOConfig& cfg,
                       PolicyParams& grad) {
    if (minibatch.empty()) throw std::invalid_argument("ppo_loss: empty minibatch");
    const double invn = 1.0 / static_cast<double>(minibatch.size());

    std::vector<double> advantages(minibatch.size());
    for (std::size_t i = 0; i < minibatch.size(); ++i) advantages[i] = minibatch[i]->advantage;
    if (cfg.normalize_advantages && minibatch.size() > 1) {
        double mu = 0.0;
        for (double a : advantages) mu += a;
        mu *= invn;
        double var = 0.0;
        for (double a : advantages) var += (a - mu) * (a - mu);
        var *= invn;
        double sigma = std::sqrt(var);
        for (double& a : advantages) a = (a - mu) / (sigma + 1e-8);
    }

    PpoLossResult res;
    for (std::size_t i = 0; i < minibatch.size(); ++i) {
        const RolloutStep& step = *minibatch[i];
        const double adv = advantages[i];

        ForwardCache cache;
        PolicyOutput out = forward(params, step.state_vec, &cache);
        const double new_lp = log_prob(out, step.action);
        const double ratio = std::exp(new_lp - step.old_log_prob);
        const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
        const double unclipped = ratio * adv;
        const double clipped = clipped_ratio * adv;
        const double surr = std::min(unclipped, clipped);
        res.surrogate += surr * invn;
        if (std::abs(ratio - 1.0) > cfg.clip_epsilon) res.clip_fraction += invn;
        res.approx_kl += ((ratio - 1.0) - std::log(ratio)) * invn;

        const double verr = out.value - step.ret;
        res.value_loss += verr * verr * invn;

        double h_item = 0.0, h_tmpl = 0.0;
        for (double pv : out.item_probs) h_item -= pv * std::log(pv);
        for (double pv : out.template_probs) h_tmpl -= pv * std::log(pv);
        res.entropy += (h_item + h_tmpl) * invn;

        // d(-surrogate)/d new_lp: gradient only flows through the
        // unclipped branch (the clipped one is constant in theta)
        const double dsurr_dlp = (unclipped <= clipped) ? unclipped : 0.0;
        const double dl_dlp = -dsurr_dlp * invn;

        LossGrads g;
        g.item_logits.assign(out.item_probs.size(), 0.0);
        g.template_logits.assign(out.template_probs.size(), 0.0);
        for (std::size_t k = 0; k < out.item_probs.size(); ++k) {
            double onehot = (static_cast<int>(k) == step.action.item_id) ? 1.0 : 0.0;
            g.item_logits[k] = dl_dlp * (onehot - out.item_probs[k]);
            // entropy bonus: dH/dz_k = -p_k (log p_k + H)
            g.item_logits[k] += cfg.entropy_coef * invn * out.item_probs[k] *
                                (std::log(out.item_probs[k]) + h_item);
        }
        for (std::size_t k = 0; k < out.template_probs.size(); ++k) {
            double onehot = (static_cast<int>(k) == step.action.template_id) ? 1.0 : 0.0;
            g.template_logits[k] = dl_dlp * (onehot - out.template_probs[k]);
            g.template_logits[k] += cfg.entropy_coef * invn * out.template_probs[k] *
                                    (std::log(out.template_probs[k]) + h_tmpl);
        }
        g.value = cfg.value_coef * invn * 2.0 * verr;
        backward(params, cache, g, grad);
    }

    res.total_loss = -res.surrogate + cfg.value_coef * res.value_loss - cfg.entropy_coef * res.entropy;
    if (!std::isfinite(res.total_loss))
        throw AbortUpdateError("ppo_loss: non-finite loss, aborting update");
    return res;
}

TrainReport train(PolicyParams& params, const PPOConfig& cfg, const BatchCollector& collect,
                  const EvalHook& eval_hook) {
    cfg.validate();
    TrainReport report;
    RngStream root(cfg.seed);
    SgdMomentum opt(cfg.learning_rate);
    int update_index = 0;

    for (int outer = 0; outer < cfg.outer_epochs; ++outer) {
        RngStream collect_rng = root.split(2 * static_cast<std::uint64_t>(outer) + 1);
        std::vector<RolloutEpisode> batch = collect(params, collect_rng);
        prepare_batch(batch, cfg);

        std::vector<const RolloutStep*> steps;
        double mean_reward = 0.0;
        for (const auto& ep : batch)
            for (const auto& s : ep.steps) {
                steps.push_back(&s);
                mean_reward += s.raw_reward;
            }
        if (steps.empty()) throw std::runtime_error("train: collector produced no steps");
        mean_reward /= static_cast<double>(steps.size());
        report.epoch_mean_reward.push_back(mean_reward);

        RngStream shuffle_rng = root.split(2 * static_cast<std::uint64_t>(outer) + 2);
        std::vector<std::size_t> order(steps.size());
        std::iota(order.begin(), order.end(), 0);

        try {
            for (int pass = 0; pass < cfg.ppo_epochs_per_batch; ++pass) {
                shuffle_rng.shuffle(order);
                for (std::size_t start = 0; start < order.size();
                     start += static_cast<std::size_t>(cfg.minibatch_size)) {
                    std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch_size));
                    std::vector<const RolloutStep*> mb;
                    mb.reserve(end - start);
                    for (std::size_t k = start; k < end; ++k) mb.push_back(steps[order[k]]);

                    PolicyParams grad = PolicyParams::zeros_like(params);
                    PpoLossResult res = ppo_loss(mb, params, cfg, grad);
                    opt.step(params, grad);

                    UpdateDiagnostics d;
                    d.outer_epoch = outer;
                    d.update_index = update_index++;
                    d.surrogate = res.surrogate;
                    d.value_loss = res.value_loss;
                    d.entropy = res.entropy;
                    d.mean_reward = mean_reward;
                    d.approx_kl = res.approx_kl;
                    d.clip_fraction = res.clip_fraction;
                    report.updates.push_back(d);
                }
            }
        } catch (const AbortUpdateError&) {
            report.aborted = true;
            return report;
        }
        if (eval_hook) eval_hook(outer, params);
    }
    return report;
}

}  // namespace crs
