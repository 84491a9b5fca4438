// End-to-end acceptance gate. Each numbered criterion prints a single
// PASS/FAIL line; the doctest assertions make failures fatal for ctest.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <unistd.h>

#include <json.hpp>

#include "crs/config.hpp"
#include "crs/metrics.hpp"
#include "crs/ppo.hpp"
#include "crs/run.hpp"

using namespace crs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[criterion %d] %s: %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string fmt(double v, int prec = 1) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

// The benchmark configuration: catalog 100, 500 pretraining dialogues,
// 5 outer PPO epochs, 3 evaluation seeds. Optimizer and simulator knobs
// are the tuned benchmark values (see configs/benchmark.json).
RunConfig benchmark_config(const fs::path& out, const std::string& run_id) {
    json j = {
        {"run_id", run_id},
        {"output_dir", out.string()},
        {"seed", 22},
        {"simulator", {{"noise_scale", 0.25}, {"k_window", 8}, {"reanchor_pool", 6}}},
        {"corpus", {{"n_dialogues", 500}}},
        {"ppo",
         {{"learning_rate", 0.05},
          {"trajectories_per_batch", 1024},
          {"ppo_epochs_per_batch", 12},
          {"minibatch_size", 64},
          {"entropy_coef", 0.005},
          {"reward_normalization", "conversation"},
          {"outer_epochs", 5}}},
        {"eval", {{"n_dialogues", 800}}},
    };
    return parse_config(j);
}

struct PipelineResult {
    double baseline_hr = 0.0;
    double tuned_hr = 0.0;
    double tuned_hr_std = 0.0;
    double satisfaction_gain_pct = 0.0;
    double seconds = 0.0;
};

PipelineResult run_pipeline(const RunConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    cmd_gen_corpus(cfg);
    cmd_pretrain(cfg);
    cmd_train_reward(cfg);
    cmd_train_ppo(cfg);
    cmd_evaluate(cfg);
    auto t1 = std::chrono::steady_clock::now();

    json t = json::parse(slurp(run_paths(cfg).reports / "table1.json"));
    PipelineResult r;
    r.baseline_hr = 100.0 * t.at("baseline").at("hr_at_k").get<double>();
    r.tuned_hr = 100.0 * t.at("tuned").at("hr_at_k").get<double>();
    r.tuned_hr_std = 100.0 * t.at("tuned").at("hr_std").get<double>();
    r.satisfaction_gain_pct = t.at("tuned").at("satisfaction_gain_pct").get<double>();
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    return r;
}

std::vector<fs::path> run_artifacts(const RunPaths& p) {
    std::vector<fs::path> files = {p.corpus, p.catalog};
    for (const char* name :
         {"pretrained.json", "reward.json", "tuned.json", "ppo_epoch_0.json", "ppo_epoch_4.json"})
        files.push_back(p.checkpoints / name);
    for (const char* name : {"pretrain.json", "train_reward.json", "ppo_summary.json",
                             "ppo_updates.jsonl", "table1.json", "table1.txt", "fig1_hr5.csv",
                             "fig2_bleu4.csv"})
        files.push_back(p.reports / name);
    return files;
}

}  // namespace

TEST_CASE("acceptance criteria") {
    fs::path work = fs::temp_directory_path() / ("crs_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);

    RunConfig cfg = benchmark_config(work, "bench");
    PipelineResult pr = run_pipeline(cfg);

    // 1. End-to-end improvement on the default synthetic benchmark.
    {
        double gap = pr.tuned_hr - pr.baseline_hr;
        bool pass = gap >= 8.0 && pr.satisfaction_gain_pct > 0.0 && pr.seconds <= 600.0;
        report(1, pass,
               "tuned HR@5 " + fmt(pr.tuned_hr) + " vs pretrained " + fmt(pr.baseline_hr) +
                   " (gap " + fmt(gap) + " >= 8), satisfaction gain " +
                   fmt(pr.satisfaction_gain_pct) + "% > 0, pipeline " + fmt(pr.seconds, 0) +
                   "s <= 600s");
        CHECK(pass);
    }

    // 2. Ablation ordering: full reward beats every single-signal variant.
    {
        cmd_ablate(cfg);
        json t2 = json::parse(slurp(run_paths(cfg).reports / "table2.json"));
        double full = 0.0, best_single = -1.0;
        std::string detail;
        for (const auto& row : t2.at("rows")) {
            double hr = 100.0 * row.at("hr_at_k").get<double>();
            std::string name = row.at("name").get<std::string>();
            if (name == "full") full = hr;
            else best_single = std::max(best_single, hr);
            detail += name + " " + fmt(hr) + "  ";
        }
        bool pass = full >= best_single && full - best_single >= 3.0;
        report(2, pass, detail + "(full - best single = " + fmt(full - best_single) + " >= 3)");
        CHECK(pass);
    }

    // 3. Seed stability of the tuned policy (reported either way).
    {
        bool pass = pr.tuned_hr_std <= 2.5;
        report(3, pass, "tuned HR@5 across-seed std " + fmt(pr.tuned_hr_std, 2) + " points (limit 2.5)");
        CHECK(pass);
    }

    // 4. PPO correctness on the toy 2-state/2-action environment.
    {
        RngStream init(6);
        PolicyParams p = PolicyParams::init(2, 8, 2, 1, init);
        PPOConfig tc;
        tc.learning_rate = 0.1;
        tc.trajectories_per_batch = 128;
        tc.minibatch_size = 128;
        tc.ppo_epochs_per_batch = 4;
        tc.outer_epochs = 40;
        tc.entropy_coef = 0.0;
        tc.reward_normalization = NormalizationScope::None;
        tc.seed = 17;
        TrainReport rep = train(p, tc, [&](const PolicyParams& params, RngStream& rng) {
            std::vector<RolloutEpisode> out;
            for (int i = 0; i < tc.trajectories_per_batch; ++i) {
                int s = static_cast<int>(rng.uniform_int(2));
                std::vector<double> sv = {s == 0 ? 1.0 : 0.0, s == 1 ? 1.0 : 0.0};
                PolicyOutput o = forward(params, sv);
                auto [a, lp] = sample_action(o, rng);
                RolloutStep step;
                step.state_vec = sv;
                step.action = a;
                step.raw_reward = a.item_id == s ? 1.0 : 0.0;
                step.old_log_prob = lp;
                step.value = o.value;
                RolloutEpisode ep;
                ep.steps.push_back(step);
                out.push_back(std::move(ep));
            }
            return out;
        });

        bool greedy_ok = true;
        double worst_value_err = 0.0;
        for (int s = 0; s < 2; ++s) {
            std::vector<double> sv = {s == 0 ? 1.0 : 0.0, s == 1 ? 1.0 : 0.0};
            PolicyOutput o = forward(p, sv);
            if ((o.item_probs[0] > o.item_probs[1] ? 0 : 1) != s) greedy_ok = false;
            worst_value_err = std::max(worst_value_err, std::abs(o.value - 1.0));
        }

        PPOConfig suffix;
        suffix.discount_gamma = 1.0;
        suffix.gae_lambda = 1.0;
        std::vector<double> adv, ret;
        compute_gae(adv, ret, {1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}, true, suffix);
        bool gae_ok = adv == std::vector<double>{6.0, 5.0, 3.0};

        bool pass = rep.updates.size() <= 200 && greedy_ok && worst_value_err <= 0.05 && gae_ok;
        report(4, pass,
               "optimal greedy action after " + std::to_string(rep.updates.size()) +
                   " updates (<= 200), value error " + fmt(100.0 * worst_value_err, 1) +
                   "% of DP value (<= 5%), GAE suffix-sum identity " +
                   (gae_ok ? "exact" : "BROKEN"));
        CHECK(pass);
    }

    // 5. Gradient suite: analytic vs central finite differences.
    {
        RngStream rng(913);
        const double fd_eps = 1e-6;
        double worst = 0.0;
        int instances = 0;

        // policy heads and value head through the shared encoder
        for (int i = 0; i < 20; ++i) {
            RngStream init(rng.next_u64());
            PolicyParams p = PolicyParams::init(5, 6, 4, 3, init);
            for (double* w : p.flat()) *w += init.uniform(-0.3, 0.3);
            std::vector<double> x(5);
            for (auto& v : x) v = rng.uniform(-1, 1);
            Action a{static_cast<int>(rng.uniform_int(4)), static_cast<int>(rng.uniform_int(3))};
            double target = rng.uniform(-1, 1);
            auto loss_at = [&]() {
                PolicyOutput o = forward(p, x);
                double verr = o.value - target;
                return -log_prob(o, a) + 0.5 * verr * verr;
            };
            ForwardCache cache;
            PolicyOutput o = forward(p, x, &cache);
            LossGrads g;
            g.item_logits = o.item_probs;
            g.item_logits[static_cast<std::size_t>(a.item_id)] -= 1.0;
            g.template_logits = o.template_probs;
            g.template_logits[static_cast<std::size_t>(a.template_id)] -= 1.0;
            g.value = o.value - target;
            PolicyParams grad = PolicyParams::zeros_like(p);
            backward(p, cache, g, grad);
            auto fp = p.flat();
            auto fg = grad.flat();
            for (std::size_t k = 0; k < fp.size(); ++k) {
                double keep = *fp[k];
                *fp[k] = keep + fd_eps;
                double up = loss_at();
                *fp[k] = keep - fd_eps;
                double down = loss_at();
                *fp[k] = keep;
                double fd = (up - down) / (2 * fd_eps);
                double denom = std::max({std::abs(fd), std::abs(*fg[k]), 1e-3});
                worst = std::max(worst, std::abs(fd - *fg[k]) / denom);
            }
            ++instances;
        }

        // reward model MSE gradient
        for (int i = 0; i < 20; ++i) {
            RngStream init(rng.next_u64());
            RewardModel m = RewardModel::init(5, init);
            std::vector<FeatureVector> fsv;
            std::vector<double> ys;
            for (int k = 0; k < 4; ++k) {
                FeatureVector f;
                f.engagement = rng.uniform(0, 1);
                f.relevance = rng.uniform(-1, 1);
                f.sentiment_shift = rng.uniform(-1, 1);
                fsv.push_back(f);
                ys.push_back(rng.uniform(0, 1));
            }
            RewardGrad g = reward_mse_gradient(m, fsv, ys);
            auto probe = [&](double& pref, double analytic) {
                double keep = pref, loss = 0.0;
                pref = keep + fd_eps;
                reward_mse_gradient(m, fsv, ys, &loss);
                double up = loss;
                pref = keep - fd_eps;
                reward_mse_gradient(m, fsv, ys, &loss);
                pref = keep;
                double fd = (up - loss) / (2 * fd_eps);
                double denom = std::max({std::abs(fd), std::abs(analytic), 1e-3});
                worst = std::max(worst, std::abs(fd - analytic) / denom);
            };
            for (std::size_t k = 0; k < m.w1.size(); ++k) probe(m.w1[k], g.w1[k]);
            for (std::size_t k = 0; k < m.b1.size(); ++k) probe(m.b1[k], g.b1[k]);
            for (std::size_t k = 0; k < m.w2.size(); ++k) probe(m.w2[k], g.w2[k]);
            probe(m.b2, g.b2);
            ++instances;
        }

        // PPO surrogate including the clipped dead-zone
        for (int i = 0; i < 20; ++i) {
            RngStream init(rng.next_u64());
            PolicyParams p = PolicyParams::init(4, 6, 3, 2, init);
            for (double* w : p.flat()) *w += init.uniform(-0.2, 0.2);
            PPOConfig pc;
            pc.normalize_advantages = false;
            pc.value_coef = 0.5;
            pc.entropy_coef = 0.01;
            std::vector<RolloutStep> steps;
            for (int k = 0; k < 3; ++k) {
                std::vector<double> sv(4);
                for (auto& v : sv) v = rng.uniform(-1, 1);
                Action a{static_cast<int>(rng.uniform_int(3)), static_cast<int>(rng.uniform_int(2))};
                double ratio = k == 0 ? rng.uniform(0.5, 0.75)   // dead zone candidate
                                      : rng.uniform(0.9, 1.1);
                PolicyOutput o = forward(p, sv);
                RolloutStep s;
                s.state_vec = sv;
                s.action = a;
                s.old_log_prob = log_prob(o, a) - std::log(ratio);
                s.advantage = k == 0 ? -std::abs(rng.uniform(0.5, 2.0)) : rng.uniform(-2, 2);
                s.ret = rng.uniform(-1, 1);
                s.value = o.value;
                steps.push_back(std::move(s));
            }
            std::vector<const RolloutStep*> mb;
            for (auto& s : steps) mb.push_back(&s);
            PolicyParams grad = PolicyParams::zeros_like(p);
            ppo_loss(mb, p, pc, grad);
            auto fp = p.flat();
            auto fg = grad.flat();
            for (std::size_t k = 0; k < fp.size(); ++k) {
                double keep = *fp[k];
                auto loss_at = [&]() {
                    PolicyParams g2 = PolicyParams::zeros_like(p);
                    return ppo_loss(mb, p, pc, g2).total_loss;
                };
                *fp[k] = keep + fd_eps;
                double up = loss_at();
                *fp[k] = keep - fd_eps;
                double down = loss_at();
                *fp[k] = keep;
                double fd = (up - down) / (2 * fd_eps);
                double denom = std::max({std::abs(fd), std::abs(*fg[k]), 1e-3});
                worst = std::max(worst, std::abs(fd - *fg[k]) / denom);
            }
            ++instances;
        }

        bool pass = worst < 1e-4;
        report(5, pass,
               std::to_string(instances) + " random instances, worst relative error " +
                   fmt(worst, 8) + " < 1e-4");
        CHECK(pass);
    }

    // 6. Metric identities.
    {
        double perfect = ndcg_at_k({5, 1, 2, 3, 4}, {5}, 5);
        double rank2 = ndcg_at_k({1, 5, 2, 3, 4}, {5}, 5);
        Tokens sent = {"have", "you", "seen", "neon", "tides"};
        double bleu_id = bleu4(sent, {sent});

        RngStream rng(271828);
        std::vector<int> items(100);
        std::iota(items.begin(), items.end(), 0);
        std::set<int> relevant = {3, 21, 47, 68, 90};
        double hits = 0.0;
        for (int t = 0; t < 2000; ++t) {
            rng.shuffle(items);
            hits += hr_at_k(items, relevant, 5);
        }
        double uniform_hr = hits / 2000.0;

        FeedbackEvent e;
        e.dwell_time = 12.0;
        e.sentiment_post = 0.4;
        std::vector<FeedbackEvent> x = {e};
        double self_gain = satisfaction_gain(x, x, 0.5, 0.5, 30.0);

        bool pass = perfect == doctest::Approx(1.0) &&
                    std::abs(rank2 - 0.63093) <= 1e-5 && bleu_id == doctest::Approx(1.0) &&
                    std::abs(uniform_hr - 0.230) <= 0.03 && self_gain == 0.0;
        report(6, pass,
               "NDCG perfect " + fmt(perfect, 5) + ", rank-2 " + fmt(rank2, 5) +
                   ", BLEU identity " + fmt(bleu_id, 5) + ", uniform HR@5 " + fmt(uniform_hr, 3) +
                   " (0.230 +- 0.03), self-gain " + fmt(self_gain, 5));
        CHECK(pass);
    }

    // 7. Determinism: an identical re-run reproduces byte-identical artifacts.
    {
        RunConfig again = benchmark_config(work, "bench-rerun");
        cmd_gen_corpus(again);
        cmd_pretrain(again);
        cmd_train_reward(again);
        cmd_train_ppo(again);
        cmd_evaluate(again);

        RunPaths a = run_paths(cfg);
        RunPaths b = run_paths(again);
        std::vector<fs::path> fa = run_artifacts(a);
        std::vector<fs::path> fb = run_artifacts(b);
        bool pass = true;
        std::string first_diff;
        for (std::size_t i = 0; i < fa.size(); ++i) {
            if (!fs::exists(fa[i]) || !fs::exists(fb[i]) ||
                file_checksum(fa[i]) != file_checksum(fb[i])) {
                pass = false;
                if (first_diff.empty()) first_diff = fa[i].filename().string();
            }
        }
        report(7, pass,
               pass ? std::to_string(fa.size()) + " artifacts byte-identical across re-run"
                    : "artifact mismatch at " + first_diff);
        CHECK(pass);
    }

    // 8. Clipped-objective semantics.
    {
        RngStream init(41);
        PolicyParams p = PolicyParams::init(2, 8, 2, 1, init);
        PPOConfig pc;
        pc.normalize_advantages = false;
        pc.value_coef = 0.0;
        pc.entropy_coef = 0.0;
        std::vector<double> sv = {1.0, 0.0};

        auto make_step = [&](double ratio, double advantage) {
            PolicyOutput o = forward(p, sv);
            RolloutStep s;
            s.state_vec = sv;
            s.action = Action{0, 0};
            s.old_log_prob = log_prob(o, s.action) - std::log(ratio);
            s.advantage = advantage;
            s.ret = o.value;
            s.value = o.value;
            return s;
        };

        // ratio-one minibatch, advantages (2, -1): surrogate = mean = 0.5
        std::vector<RolloutStep> ones = {make_step(1.0, 2.0), make_step(1.0, -1.0)};
        PolicyParams g1 = PolicyParams::zeros_like(p);
        double surr_one = ppo_loss({&ones[0], &ones[1]}, p, pc, g1).surrogate;

        // ratio 1.3, eps 0.2, A = 2: clipped to 2.4
        RolloutStep hi = make_step(1.3, 2.0);
        PolicyParams g2 = PolicyParams::zeros_like(p);
        double surr_hi = ppo_loss({&hi}, p, pc, g2).surrogate;

        // ratio 0.7, eps 0.2, A = -1: dead zone, surrogate -0.8, zero gradient
        RolloutStep lo = make_step(0.7, -1.0);
        PolicyParams g3 = PolicyParams::zeros_like(p);
        double surr_lo = ppo_loss({&lo}, p, pc, g3).surrogate;
        double grad_norm = 0.0;
        for (const double* g : g3.flat()) grad_norm += *g * *g;

        bool pass = std::abs(surr_one - 0.5) < 1e-9 && std::abs(surr_hi - 2.4) < 1e-9 &&
                    std::abs(surr_lo + 0.8) < 1e-9 && grad_norm == 0.0;
        report(8, pass,
               "ratio-one surrogate " + fmt(surr_one, 4) + " (mean advantage 0.5), clipped " +
                   fmt(surr_hi, 4) + " (2.4), dead-zone " + fmt(surr_lo, 4) +
                   " (-0.8) with gradient norm " + fmt(grad_norm, 4));
        CHECK(pass);
    }

    fs::remove_all(work);
}
