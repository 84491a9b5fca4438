#include "crs/reward.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crs {

RewardConfig::RewardConfig(double a, double b, double g) : alpha(a), beta(b), gamma(g) {
    if (a < 0 || b < 0 || g < 0 || a + b + g <= 0.0)
        throw std::invalid_argument("RewardConfig: weights must be non-negative with positive sum");
}

RewardModel RewardModel::init(int hidden_dim, RngStream& rng) {
    RewardModel m;
    m.hidden_dim = hidden_dim;
    const double s1 = 1.0 / std::sqrt(static_cast<double>(kInputDim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    m.w1.resize(static_cast<std::size_t>(hidden_dim) * kInputDim);
    m.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    m.w2.resize(static_cast<std::size_t>(hidden_dim));
    for (auto& w : m.w1) w = rng.uniform(-s1, s1);
    for (auto& w : m.w2) w = rng.uniform(-s2, s2);
    m.b2 = 0.0;
    return m;
}

void RewardModel::check_finite() const {
    auto ok = [](double x) { return std::isfinite(x); };
    for (double w : w1) if (!ok(w)) throw std::runtime_error("reward model: corrupt (non-finite w1)");
    for (double w : b1) if (!ok(w)) throw std::runtime_error("reward model: corrupt (non-finite b1)");
    for (double w : w2) if (!ok(w)) throw std::runtime_error("reward model: corrupt (non-finite w2)");
    if (!ok(b2)) throw std::runtime_error("reward model: corrupt (non-finite b2)");
}

double linear_reward(const FeatureVector& f, const RewardConfig& cfg) {
    return cfg.alpha * f.engagement + cfg.beta * f.relevance + cfg.gamma * f.sentiment_shift;
}

namespace {

inline void feature_array(const FeatureVector& f, double x[3]) {
    x[0] = f.engagement;
    x[1] = f.relevance;
    x[2] = f.sentiment_shift;
}

double forward_hidden(const RewardModel& m, const double x[3], std::vector<double>& h) {
    h.resize(static_cast<std::size_t>(m.hidden_dim));
    double out = m.b2;
    for (int j = 0; j < m.hidden_dim; ++j) {
        const double* row = &m.w1[static_cast<std::size_t>(j) * 3];
        double z = m.b1[static_cast<std::size_t>(j)] + row[0] * x[0] + row[1] * x[1] + row[2] * x[2];
        double hj = std::tanh(z);
        h[static_cast<std::size_t>(j)] = hj;
        out += m.w2[static_cast<std::size_t>(j)] * hj;
    }
    return out;
}

}  // namespace

double predict(const RewardModel& model, const FeatureVector& feature) {
    model.check_finite();
    double x[3];
    feature_array(feature, x);
    std::vector<double> h;
    return forward_hidden(model, x, h);
}

RewardGrad reward_mse_gradient(const RewardModel& m,
                               const std::vector<FeatureVector>& features,
                               const std::vector<double>& labels,
                               double* loss_out) {
    if (features.empty() || features.size() != labels.size())
        throw std::invalid_argument("reward_mse_gradient: bad batch");
    RewardGrad g;
    g.w1.assign(m.w1.size(), 0.0);
    g.b1.assign(m.b1.size(), 0.0);
    g.w2.assign(m.w2.size(), 0.0);
    double loss = 0.0;
    std::vector<double> h;
    const double invn = 1.0 / static_cast<double>(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        double x[3];
        feature_array(features[i], x);
        double y = forward_hidden(m, x, h);
        double err = y - labels[i];
        loss += err * err * invn;
        double dy = 2.0 * err * invn;
        g.b2 += dy;
        for (int j = 0; j < m.hidden_dim; ++j) {
            const std::size_t sj = static_cast<std::size_t>(j);
            g.w2[sj] += dy * h[sj];
            double dz = dy * m.w2[sj] * (1.0 - h[sj] * h[sj]);
            g.b1[sj] += dz;
            g.w1[sj * 3 + 0] += dz * x[0];
            g.w1[sj * 3 + 1] += dz * x[1];
            g.w1[sj * 3 + 2] += dz * x[2];
        }
    }
    if (loss_out) *loss_out = loss;
    return g;
}

std::vector<double> train_reward(RewardModel& model,
                                 const std::vector<std::pair<FeatureVector, WeakLabel>>& dataset,
                                 const RewardTrainConfig& cfg, std::uint64_t seed) {
    if (dataset.empty()) throw std::invalid_argument("train_reward: empty dataset");
    RngStream rng(seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> epoch_losses;
    epoch_losses.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.minibatch_size)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch_size));
            std::vector<FeatureVector> fs;
            std::vector<double> ys;
            fs.reserve(end - start);
            ys.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) {
                fs.push_back(dataset[order[k]].first);
                ys.push_back(dataset[order[k]].second.satisfaction);
            }
            double loss = 0.0;
            RewardGrad g = reward_mse_gradient(model, fs, ys, &loss);
            epoch_loss += loss;
            ++batches;
            for (std::size_t i = 0; i < model.w1.size(); ++i) model.w1[i] -= cfg.learning_rate * g.w1[i];
            for (std::size_t i = 0; i < model.b1.size(); ++i) model.b1[i] -= cfg.learning_rate * g.b1[i];
            for (std::size_t i = 0; i < model.w2.size(); ++i) model.w2[i] -= cfg.learning_rate * g.w2[i];
            model.b2 -= cfg.learning_rate * g.b2;
        }
        epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
    }
    model.check_finite();
    return epoch_losses;
}

double reward_for_step(const FeatureVector& feature, const RewardModel& model,
                       const RewardConfig& cfg, RewardMode mode) {
    switch (mode) {
        case RewardMode::Linear: return linear_reward(feature, cfg);
        case RewardMode::Learned: return predict(model, feature);
        case RewardMode::Blended:
            return 0.5 * (linear_reward(feature, cfg) + predict(model, feature));
    }
    throw std::logic_error("reward_for_step: unknown mode");
}

void normalize_rewards(std::vector<Trajectory>& batch, NormalizationScope scope) {
    auto normalize_span = [](std::vector<StepRecord*>& steps) {
        if (steps.size() < 2)
            throw std::invalid_argument("normalize_rewards: need at least 2 steps (sigma undefined)");
        double mu = 0.0;
        for (auto* s : steps) mu += s->raw_reward;
        mu /= static_cast<double>(steps.size());
        double var = 0.0;
        for (auto* s : steps) {
            double d = s->raw_reward - mu;
            var += d * d;
        }
        var /= static_cast<double>(steps.size());
        double sigma = std::sqrt(var);
        if (sigma <= 1e-6) {
            for (auto* s : steps) s->normalized_reward = 0.0;
        } else {
            for (auto* s : steps) s->normalized_reward = (s->raw_reward - mu) / (sigma + 1e-8);
        }
    };

    if (scope == NormalizationScope::None) {
        for (auto& t : batch)
            for (auto& s : t.steps) s.normalized_reward = s.raw_reward;
        return;
    }
    if (scope == NormalizationScope::Batch) {
        std::vector<StepRecord*> all;
        for (auto& t : batch)
            for (auto& s : t.steps) all.push_back(&s);
        normalize_span(all);
    } else {
        for (auto& t : batch) {
            std::vector<StepRecord*> steps;
            for (auto& s : t.steps) steps.push_back(&s);
            normalize_span(steps);
        }
    }
}

}  // namespace crs
