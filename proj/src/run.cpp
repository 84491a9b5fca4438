#include "crs/run.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "crs/checkpoint.hpp"
#include "crs/corpus.hpp"
#include "crs/eval.hpp"
#include "crs/pipeline.hpp"
#include "crs/signals.hpp"

namespace crs {

namespace fs = std::filesystem;
using nlohmann::json;

RunPaths run_paths(const RunConfig& cfg) {
    RunPaths p;
    p.root = fs::path(cfg.output_dir) / cfg.run_id;
    p.config_echo = p.root / "config.json";
    p.manifest = p.root / "manifest.json";
    p.corpus = p.root / "corpus.jsonl";
    p.catalog = p.root / "catalog.json";
    p.checkpoints = p.root / "checkpoints";
    p.reports = p.root / "reports";
    return p;
}

std::string file_checksum(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checksum: cannot open " + path.string());
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ULL;
        }
        if (in.eof()) break;
    }
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << h;
    return os.str();
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
}

RunPaths prepare_run(const RunConfig& cfg) {
    RunPaths paths = run_paths(cfg);
    fs::create_directories(paths.checkpoints);
    fs::create_directories(paths.reports);
    write_text(paths.config_echo, config_to_json(cfg).dump(2) + "\n");
    return paths;
}

void append_manifest(const RunPaths& paths, const std::string& subcommand,
                     const std::vector<fs::path>& inputs,
                     const std::vector<fs::path>& outputs, std::uint64_t seed) {
    json rec;
    rec["subcommand"] = subcommand;
    rec["seed"] = seed;
    rec["inputs"] = json::array();
    for (const auto& p : inputs)
        rec["inputs"].push_back({{"path", fs::relative(p, paths.root).string()},
                                 {"checksum", file_checksum(p)}});
    rec["outputs"] = json::array();
    for (const auto& p : outputs)
        rec["outputs"].push_back({{"path", fs::relative(p, paths.root).string()},
                                  {"checksum", file_checksum(p)}});
    json manifest = json::array();
    if (fs::exists(paths.manifest)) {
        std::ifstream in(paths.manifest, std::ios::binary);
        in >> manifest;
    }
    manifest.push_back(rec);
    write_text(paths.manifest, manifest.dump(2) + "\n");
}

json catalog_to_json(const Catalog& catalog) {
    json items = json::array();
    for (const auto& it : catalog.items)
        items.push_back({{"id", it.id},
                         {"title_tokens", it.title_tokens},
                         {"tags", it.tags},
                         {"embedding_id", it.embedding_id}});
    return json{{"schema_version", 1}, {"items", items}};
}

Corpus load_run_corpus(const RunPaths& paths) {
    if (!fs::exists(paths.corpus))
        throw std::runtime_error("missing " + paths.corpus.string() + " (run gen-corpus first)");
    return ingest_external_corpus(paths.corpus.string());
}

PolicyParams init_policy(const RunConfig& cfg, const Simulator& sim) {
    RngStream rng(mix64(cfg.seed ^ 0x701C1ULL));
    return PolicyParams::init(cfg.simulator.embedding_dim + 2, cfg.policy.hidden_dim,
                              sim.catalog.size(), static_cast<int>(sim.templates.size()), rng);
}

json eval_report_to_json(const EvalReport& r) {
    json seeds = json::array();
    for (const auto& s : r.per_seed)
        seeds.push_back({{"seed", s.seed},
                         {"hr_at_k", s.hr},
                         {"ndcg_at_k", s.ndcg},
                         {"bleu_4", s.bleu},
                         {"satisfaction", s.satisfaction},
                         {"scored_turns", s.scored_turns}});
    return json{{"hr_at_k", r.hr_at_k},
                {"ndcg_at_k", r.ndcg_at_k},
                {"bleu_4", r.bleu_4},
                {"satisfaction", r.satisfaction},
                {"satisfaction_gain_pct", r.satisfaction_gain_pct},
                {"hr_std", r.hr_std},
                {"ndcg_std", r.ndcg_std},
                {"per_seed", seeds}};
}

std::string fmt_pct(double value_01) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << 100.0 * value_01;
    return os.str();
}

std::string fmt_gain(double pct) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    if (pct > 0) os << "+";
    os << pct << "%";
    return os.str();
}

std::string render_table1(const EvalReport& baseline, const EvalReport& tuned) {
    std::ostringstream os;
    os << std::left << std::setw(26) << "Model" << std::right << std::setw(8) << "HR@5"
       << std::setw(9) << "NDCG@5" << std::setw(9) << "BLEU-4" << std::setw(20)
       << "Satisfaction Gain" << "\n";
    auto row = [&](const std::string& name, const EvalReport& r, double gain) {
        os << std::left << std::setw(26) << name << std::right << std::setw(8) << fmt_pct(r.hr_at_k)
           << std::setw(9) << fmt_pct(r.ndcg_at_k) << std::setw(9) << fmt_pct(r.bleu_4)
           << std::setw(20) << fmt_gain(gain) << "\n";
    };
    row("Supervised (pretrained)", baseline, 0.0);
    row("RLHF fine-tuned", tuned, tuned.satisfaction_gain_pct);
    return os.str();
}

std::string render_table2(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(20) << "Reward Config" << std::right << std::setw(8) << "HR@5"
       << std::setw(9) << "NDCG@5" << std::setw(9) << "BLEU-4" << std::setw(20)
       << "Satisfaction Gain" << "\n";
    for (const auto& r : rows)
        os << std::left << std::setw(20) << r.name << std::right << std::setw(8)
           << fmt_pct(r.hr_at_k) << std::setw(9) << fmt_pct(r.ndcg_at_k) << std::setw(9)
           << fmt_pct(r.bleu_4) << std::setw(20) << fmt_gain(r.satisfaction_gain_pct) << "\n";
    return os.str();
}

std::string csv_series(const std::vector<std::tuple<std::string, double, double, std::uint64_t>>& rows) {
    std::ostringstream os;
    os << "series,x,y,seed\n";
    os << std::setprecision(17);
    for (const auto& [series, x, y, seed] : rows)
        os << series << "," << x << "," << y << "," << seed << "\n";
    return os.str();
}

}  // namespace

void cmd_gen_corpus(const RunConfig& cfg) {
    RunPaths paths = prepare_run(cfg);
    Simulator sim = Simulator::build(cfg.simulator);
    Corpus corpus = generate_corpus(sim, cfg.corpus.n_dialogues, cfg.seed);
    write_corpus(corpus, paths.corpus.string());
    write_text(paths.catalog, catalog_to_json(sim.catalog).dump(2) + "\n");
    append_manifest(paths, "gen-corpus", {paths.config_echo}, {paths.corpus, paths.catalog}, cfg.seed);
}

void cmd_pretrain(const RunConfig& cfg) {
    RunPaths paths = prepare_run(cfg);
    Simulator sim = Simulator::build(cfg.simulator);
    Corpus corpus = load_run_corpus(paths);

    PolicyParams params = init_policy(cfg, sim);
    std::vector<double> losses = pretrain(params, corpus, sim.table, cfg.policy.pretrain,
                                          mix64(cfg.seed ^ 0x9E7Aull));

    fs::path ckpt = paths.checkpoints / "pretrained.json";
    save_policy(params, ckpt.string(), cfg.seed);
    fs::path loss_path = paths.reports / "pretrain.json";
    write_text(loss_path, json{{"epoch_mean_loss", losses}}.dump(2) + "\n");
    append_manifest(paths, "pretrain", {paths.corpus}, {ckpt, loss_path}, cfg.seed);
}

void cmd_train_reward(const RunConfig& cfg) {
    RunPaths paths = prepare_run(cfg);
    Simulator sim = Simulator::build(cfg.simulator);
    Corpus corpus = load_run_corpus(paths);

    auto dataset = weak_label_dataset(corpus, sim);
    RngStream rng(mix64(cfg.seed ^ 0x4E44ull));
    RewardModel model = RewardModel::init(cfg.reward.hidden_dim, rng);
    std::vector<double> losses = train_reward(model, dataset, cfg.reward.train,
                                              mix64(cfg.seed ^ 0x4E45ull));

    fs::path ckpt = paths.checkpoints / "reward.json";
    save_reward_model(model, ckpt.string(), cfg.seed);
    fs::path loss_path = paths.reports / "train_reward.json";
    write_text(loss_path, json{{"epoch_mean_loss", losses}, {"samples", dataset.size()}}.dump(2) + "\n");
    append_manifest(paths, "train-reward", {paths.corpus}, {ckpt, loss_path}, cfg.seed);
}

void cmd_train_ppo(const RunConfig& cfg) {
    RunPaths paths = prepare_run(cfg);
    Simulator sim = Simulator::build(cfg.simulator);

    fs::path pre_ckpt = paths.checkpoints / "pretrained.json";
    if (!fs::exists(pre_ckpt))
        throw std::runtime_error("missing " + pre_ckpt.string() + " (run pretrain first)");
    PolicyParams params = load_policy(pre_ckpt.string());

    RewardStack stack;
    stack.config = cfg.reward.weights;
    stack.mode = cfg.reward.mode;
    fs::path reward_ckpt = paths.checkpoints / "reward.json";
    if (cfg.reward.mode != RewardMode::Linear) {
        if (!fs::exists(reward_ckpt))
            throw std::runtime_error("missing " + reward_ckpt.string() + " (run train-reward first)");
        stack.model = load_reward_model(reward_ckpt.string());
    } else {
        RngStream rng(0);
        stack.model = RewardModel::init(cfg.reward.hidden_dim, rng);
    }

    std::vector<fs::path> epoch_ckpts;
    EvalHook hook = [&](int outer, const PolicyParams& snapshot) {
        fs::path p = paths.checkpoints / ("ppo_epoch_" + std::to_string(outer) + ".json");
        save_policy(snapshot, p.string(), cfg.seed);
        epoch_ckpts.push_back(p);
    };

    BatchCollector collector = make_dialogue_collector(sim, stack, cfg.ppo.trajectories_per_batch,
                                                       cfg.simulator.max_turns);
    TrainReport report = train(params, cfg.ppo, collector, hook);
    if (report.aborted)
        std::cerr << "warning: training aborted on a non-finite update; partial report written\n";

    fs::path ckpt = paths.checkpoints / "tuned.json";
    save_policy(params, ckpt.string(), cfg.seed);

    std::ostringstream updates;
    for (const auto& u : report.updates) {
        updates << json{{"outer_epoch", u.outer_epoch},
                        {"update_index", u.update_index},
                        {"surrogate", u.surrogate},
                        {"value_loss", u.value_loss},
                        {"entropy", u.entropy},
                        {"mean_reward", u.mean_reward},
                        {"approx_kl", u.approx_kl},
                        {"clip_fraction", u.clip_fraction}}
                        .dump()
                << "\n";
    }
    fs::path updates_path = paths.reports / "ppo_updates.jsonl";
    write_text(updates_path, updates.str());
    fs::path summary_path = paths.reports / "ppo_summary.json";
    write_text(summary_path, json{{"epoch_mean_reward", report.epoch_mean_reward},
                                  {"updates", report.updates.size()},
                                  {"aborted", report.aborted}}
                                     .dump(2) +
                                 "\n");

    std::vector<fs::path> outputs = {ckpt, updates_path, summary_path};
    outputs.insert(outputs.end(), epoch_ckpts.begin(), epoch_ckpts.end());
    append_manifest(paths, "train-ppo", {pre_ckpt}, outputs, cfg.seed);
}

void cmd_evaluate(const RunConfig& cfg) {
    RunPaths paths = prepare_run(cfg);
    Simulator sim = Simulator::build(cfg.simulator);

    fs::path pre_ckpt = paths.checkpoints / "pretrained.json";
    fs::path tuned_ckpt = paths.checkpoints / "tuned.json";
    for (const auto& p : {pre_ckpt, tuned_ckpt})
        if (!fs::exists(p)) throw std::runtime_error("missing checkpoint " + p.string());

    PolicyParams baseline_params = load_policy(pre_ckpt.string());
    PolicyParams tuned_params = load_policy(tuned_ckpt.string());

    EvalReport baseline = evaluate_policy(baseline_params, sim, cfg.eval);
    EvalReport tuned = evaluate_policy(tuned_params, sim, cfg.eval);
    fill_satisfaction_gain(tuned, baseline);

    fs::path table_json = paths.reports / "table1.json";
    write_text(table_json, json{{"schema_version", 1},
                                {"baseline", eval_report_to_json(baseline)},
                                {"tuned", eval_report_to_json(tuned)}}
                                   .dump(2) +
                               "\n");
    fs::path table_txt = paths.reports / "table1.txt";
    write_text(table_txt, render_table1(baseline, tuned));

    std::vector<std::tuple<std::string, double, double, std::uint64_t>> hr_rows, bleu_rows;
    for (const auto& s : baseline.per_seed) {
        hr_rows.emplace_back("supervised", static_cast<double>(s.seed), 100.0 * s.hr, s.seed);
        bleu_rows.emplace_back("supervised", static_cast<double>(s.seed), 100.0 * s.bleu, s.seed);
    }
    for (const auto& s : tuned.per_seed) {
        hr_rows.emplace_back("rlhf", static_cast<double>(s.seed), 100.0 * s.hr, s.seed);
        bleu_rows.emplace_back("rlhf", static_cast<double>(s.seed), 100.0 * s.bleu, s.seed);
    }
    fs::path fig1 = paths.reports / "fig1_hr5.csv";
    fs::path fig2 = paths.reports / "fig2_bleu4.csv";
    write_text(fig1, csv_series(hr_rows));
    write_text(fig2, csv_series(bleu_rows));

    append_manifest(paths, "evaluate", {pre_ckpt, tuned_ckpt},
                    {table_json, table_txt, fig1, fig2}, cfg.seed);
    std::cout << render_table1(baseline, tuned);
}

void cmd_ablate(const RunConfig& cfg) {
    RunPaths paths = prepare_run(cfg);
    Simulator sim = Simulator::build(cfg.simulator);

    fs::path pre_ckpt = paths.checkpoints / "pretrained.json";
    if (!fs::exists(pre_ckpt))
        throw std::runtime_error("missing " + pre_ckpt.string() + " (run pretrain first)");
    PolicyParams pretrained = load_policy(pre_ckpt.string());

    std::vector<std::uint64_t> train_seeds;
    for (std::uint64_t s : cfg.eval.seeds) train_seeds.push_back(mix64(cfg.seed ^ s));
    std::vector<AblationRow> rows =
        run_ablation(sim, pretrained, cfg.ppo, cfg.eval, train_seeds, cfg.reward.weights);

    json jrows = json::array();
    for (const auto& r : rows)
        jrows.push_back({{"name", r.name},
                         {"hr_at_k", r.hr_at_k},
                         {"ndcg_at_k", r.ndcg_at_k},
                         {"bleu_4", r.bleu_4},
                         {"satisfaction_gain_pct", r.satisfaction_gain_pct},
                         {"hr_std", r.hr_std}});
    fs::path table_json = paths.reports / "table2.json";
    write_text(table_json, json{{"schema_version", 1}, {"rows", jrows}}.dump(2) + "\n");
    fs::path table_txt = paths.reports / "table2.txt";
    write_text(table_txt, render_table2(rows));

    std::vector<std::tuple<std::string, double, double, std::uint64_t>> fig_rows;
    for (std::size_t i = 0; i < rows.size(); ++i)
        fig_rows.emplace_back(rows[i].name, static_cast<double>(i), 100.0 * rows[i].hr_at_k, 0);
    fs::path fig3 = paths.reports / "fig3_ablation.csv";
    write_text(fig3, csv_series(fig_rows));

    append_manifest(paths, "ablate", {pre_ckpt}, {table_json, table_txt, fig3}, cfg.seed);
    std::cout << render_table2(rows);
}

void cmd_report(const RunConfig& cfg) {
    RunPaths paths = run_paths(cfg);
    if (!fs::exists(paths.root))
        throw std::runtime_error("no such run: " + paths.root.string());
    bool printed = false;
    fs::path t1 = paths.reports / "table1.txt";
    fs::path t2 = paths.reports / "table2.txt";
    if (fs::exists(t1)) {
        std::ifstream in(t1);
        std::cout << "== Baseline vs RLHF ==\n" << in.rdbuf() << "\n";
        printed = true;
    }
    if (fs::exists(t2)) {
        std::ifstream in(t2);
        std::cout << "== Reward signal ablation ==\n" << in.rdbuf() << "\n";
        printed = true;
    }
    if (!printed)
        throw std::runtime_error("run " + cfg.run_id + " has no reports yet (run evaluate or ablate)");
}

}  // namespace crs
