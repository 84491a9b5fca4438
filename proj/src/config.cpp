#include "crs/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace crs {

using nlohmann::json;

namespace {

// Tracks consumed keys so anything left over is reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw std::runtime_error("config: " + path_ + " must be a JSON object");
    }

    template <typename T>
    void take(const char* key, T& target) {
        auto it = j_.find(key);
        if (it != j_.end()) {
            try {
                target = it->get<T>();
            } catch (const json::exception&) {
                throw std::runtime_error("config: bad value type for \"" + path_ + key + "\"");
            }
        }
        seen_.insert(key);
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw std::runtime_error("config: unknown key \"" + path_ + it.key() + "\"");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

RewardMode parse_reward_mode(const std::string& s) {
    if (s == "linear") return RewardMode::Linear;
    if (s == "learned") return RewardMode::Learned;
    if (s == "blended") return RewardMode::Blended;
    throw std::runtime_error("config: unknown reward mode \"" + s + "\"");
}

NormalizationScope parse_scope(const std::string& s) {
    if (s == "batch") return NormalizationScope::Batch;
    if (s == "conversation") return NormalizationScope::PerConversation;
    if (s == "none") return NormalizationScope::None;
    throw std::runtime_error("config: unknown reward normalization \"" + s + "\"");
}

}  // namespace

const char* reward_mode_name(RewardMode mode) {
    switch (mode) {
        case RewardMode::Linear: return "linear";
        case RewardMode::Learned: return "learned";
        case RewardMode::Blended: return "blended";
    }
    return "?";
}

const char* normalization_scope_name(NormalizationScope scope) {
    switch (scope) {
        case NormalizationScope::Batch: return "batch";
        case NormalizationScope::PerConversation: return "conversation";
        case NormalizationScope::None: return "none";
    }
    return "?";
}

void RunConfig::validate() const {
    if (run_id.empty()) throw std::runtime_error("config: run_id must not be empty");
    if (simulator.catalog_size <= 0) throw std::runtime_error("config: catalog_size must be positive");
    if (simulator.embedding_dim <= 0) throw std::runtime_error("config: embedding_dim must be positive");
    if (simulator.k_window <= 0) throw std::runtime_error("config: k_window must be positive");
    if (simulator.dwell_max <= 0) throw std::runtime_error("config: dwell_max must be positive");
    if (simulator.noise_scale < 0) throw std::runtime_error("config: noise_scale must be non-negative");
    if (simulator.reject_reanchor_prob < 0.0 || simulator.reject_reanchor_prob > 1.0)
        throw std::runtime_error("config: reject_reanchor_prob must be in [0, 1]");
    if (simulator.reanchor_pool < 1)
        throw std::runtime_error("config: reanchor_pool must be positive");
    if (simulator.patience_min < 1 || simulator.patience_max < simulator.patience_min)
        throw std::runtime_error("config: bad patience range");
    if (corpus.n_dialogues <= 0) throw std::runtime_error("config: n_dialogues must be positive");
    if (reward.weights.alpha < 0 || reward.weights.beta < 0 || reward.weights.gamma < 0 ||
        reward.weights.alpha + reward.weights.beta + reward.weights.gamma <= 0)
        throw std::runtime_error("config: reward weights alpha/beta/gamma must be non-negative with positive sum");
    if (reward.hidden_dim <= 0) throw std::runtime_error("config: reward hidden_dim must be positive");
    if (policy.hidden_dim <= 0) throw std::runtime_error("config: policy hidden_dim must be positive");
    if (eval.n_dialogues <= 0) throw std::runtime_error("config: eval n_dialogues must be positive");
    if (eval.k <= 0) throw std::runtime_error("config: eval k must be positive");
    if (eval.seeds.empty()) throw std::runtime_error("config: eval seeds must not be empty");
    try {
        ppo.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("config: ") + e.what());
    }
}

void apply_preset(RunConfig& cfg, const std::string& preset) {
    if (preset == "desk") return;  // the defaults
    if (preset == "paper") {
        cfg.ppo.learning_rate = 5e-6;
        cfg.ppo.clip_epsilon = 0.2;
        cfg.ppo.trajectories_per_batch = 128;
        cfg.ppo.outer_epochs = 5;
        return;
    }
    throw std::runtime_error("config: unknown preset \"" + preset + "\" (expected desk|paper)");
}

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    Section root(j, "");
    std::string preset = "desk";
    root.take("preset", preset);
    apply_preset(cfg, preset);

    root.take("run_id", cfg.run_id);
    root.take("output_dir", cfg.output_dir);
    root.take("seed", cfg.seed);

    if (root.has("simulator")) {
        Section s(root.at("simulator"), "simulator.");
        auto& c = cfg.simulator;
        s.take("catalog_size", c.catalog_size);
        s.take("embedding_dim", c.embedding_dim);
        s.take("embedding_seed", c.embedding_seed);
        s.take("catalog_seed", c.catalog_seed);
        s.take("k_window", c.k_window);
        s.take("dwell_max", c.dwell_max);
        s.take("sigmoid_slope", c.sigmoid_slope);
        s.take("sentiment_drift", c.sentiment_drift);
        s.take("noise_scale", c.noise_scale);
        s.take("accept_min", c.accept_min);
        s.take("accept_max", c.accept_max);
        s.take("affect_baseline_range", c.affect_baseline_range);
        s.take("patience_min", c.patience_min);
        s.take("patience_max", c.patience_max);
        s.take("max_turns", c.max_turns);
        s.take("opening_mentions", c.opening_mentions);
        s.take("behavior_greedy_prob", c.behavior_greedy_prob);
        s.take("reject_reanchor_prob", c.reject_reanchor_prob);
        s.take("reanchor_pool", c.reanchor_pool);
        s.finish();
    }
    if (root.has("corpus")) {
        Section s(root.at("corpus"), "corpus.");
        s.take("n_dialogues", cfg.corpus.n_dialogues);
        s.finish();
    }
    if (root.has("reward")) {
        Section s(root.at("reward"), "reward.");
        s.take("alpha", cfg.reward.weights.alpha);
        s.take("beta", cfg.reward.weights.beta);
        s.take("gamma", cfg.reward.weights.gamma);
        if (s.has("mode")) cfg.reward.mode = parse_reward_mode(s.at("mode").get<std::string>());
        s.take("hidden_dim", cfg.reward.hidden_dim);
        s.take("learning_rate", cfg.reward.train.learning_rate);
        s.take("epochs", cfg.reward.train.epochs);
        s.take("minibatch_size", cfg.reward.train.minibatch_size);
        s.finish();
    }
    if (root.has("policy")) {
        Section s(root.at("policy"), "policy.");
        s.take("hidden_dim", cfg.policy.hidden_dim);
        s.take("pretrain_epochs", cfg.policy.pretrain.epochs);
        s.take("pretrain_learning_rate", cfg.policy.pretrain.learning_rate);
        s.take("pretrain_minibatch_size", cfg.policy.pretrain.minibatch_size);
        s.finish();
    }
    if (root.has("ppo")) {
        Section s(root.at("ppo"), "ppo.");
        auto& c = cfg.ppo;
        s.take("clip_epsilon", c.clip_epsilon);
        s.take("learning_rate", c.learning_rate);
        s.take("discount_gamma", c.discount_gamma);
        s.take("gae_lambda", c.gae_lambda);
        s.take("value_coef", c.value_coef);
        s.take("entropy_coef", c.entropy_coef);
        s.take("trajectories_per_batch", c.trajectories_per_batch);
        s.take("ppo_epochs_per_batch", c.ppo_epochs_per_batch);
        s.take("outer_epochs", c.outer_epochs);
        s.take("minibatch_size", c.minibatch_size);
        s.take("normalize_advantages", c.normalize_advantages);
        if (s.has("reward_normalization"))
            c.reward_normalization = parse_scope(s.at("reward_normalization").get<std::string>());
        s.finish();
    }
    if (root.has("eval")) {
        Section s(root.at("eval"), "eval.");
        auto& c = cfg.eval;
        s.take("n_dialogues", c.n_dialogues);
        s.take("k", c.k);
        s.take("seeds", c.seeds);
        s.take("w_eng", c.w_eng);
        s.take("w_sent", c.w_sent);
        s.finish();
    }
    root.finish();

    cfg.ppo.seed = cfg.seed;
    cfg.policy.pretrain.max_turns = cfg.simulator.max_turns;
    cfg.policy.pretrain.k_window = cfg.simulator.k_window;
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config: parse failure in " + path + ": " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const RunConfig& cfg) {
    json j;
    j["run_id"] = cfg.run_id;
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    const auto& s = cfg.simulator;
    j["simulator"] = {{"catalog_size", s.catalog_size},
                      {"embedding_dim", s.embedding_dim},
                      {"embedding_seed", s.embedding_seed},
                      {"catalog_seed", s.catalog_seed},
                      {"k_window", s.k_window},
                      {"dwell_max", s.dwell_max},
                      {"sigmoid_slope", s.sigmoid_slope},
                      {"sentiment_drift", s.sentiment_drift},
                      {"noise_scale", s.noise_scale},
                      {"accept_min", s.accept_min},
                      {"accept_max", s.accept_max},
                      {"affect_baseline_range", s.affect_baseline_range},
                      {"patience_min", s.patience_min},
                      {"patience_max", s.patience_max},
                      {"max_turns", s.max_turns},
                      {"opening_mentions", s.opening_mentions},
                      {"behavior_greedy_prob", s.behavior_greedy_prob},
                      {"reject_reanchor_prob", s.reject_reanchor_prob},
                      {"reanchor_pool", s.reanchor_pool}};
    j["corpus"] = {{"n_dialogues", cfg.corpus.n_dialogues}};
    j["reward"] = {{"alpha", cfg.reward.weights.alpha},
                   {"beta", cfg.reward.weights.beta},
                   {"gamma", cfg.reward.weights.gamma},
                   {"mode", reward_mode_name(cfg.reward.mode)},
                   {"hidden_dim", cfg.reward.hidden_dim},
                   {"learning_rate", cfg.reward.train.learning_rate},
                   {"epochs", cfg.reward.train.epochs},
                   {"minibatch_size", cfg.reward.train.minibatch_size}};
    j["policy"] = {{"hidden_dim", cfg.policy.hidden_dim},
                   {"pretrain_epochs", cfg.policy.pretrain.epochs},
                   {"pretrain_learning_rate", cfg.policy.pretrain.learning_rate},
                   {"pretrain_minibatch_size", cfg.policy.pretrain.minibatch_size}};
    const auto& p = cfg.ppo;
    j["ppo"] = {{"clip_epsilon", p.clip_epsilon},
                {"learning_rate", p.learning_rate},
                {"discount_gamma", p.discount_gamma},
                {"gae_lambda", p.gae_lambda},
                {"value_coef", p.value_coef},
                {"entropy_coef", p.entropy_coef},
                {"trajectories_per_batch", p.trajectories_per_batch},
                {"ppo_epochs_per_batch", p.ppo_epochs_per_batch},
                {"outer_epochs", p.outer_epochs},
                {"minibatch_size", p.minibatch_size},
                {"normalize_advantages", p.normalize_advantages},
                {"reward_normalization", normalization_scope_name(p.reward_normalization)}};
    const auto& e = cfg.eval;
    j["eval"] = {{"n_dialogues", e.n_dialogues},
                 {"k", e.k},
                 {"seeds", e.seeds},
                 {"w_eng", e.w_eng},
                 {"w_sent", e.w_sent}};
    return j;
}

}  // namespace crs
