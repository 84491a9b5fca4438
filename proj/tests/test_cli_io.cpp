#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "crs/checkpoint.hpp"
#include "crs/config.hpp"
#include "crs/corpus.hpp"
#include "crs/run.hpp"
#include "crs/user_sim.hpp"

using namespace crs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string thrown_message(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("crs_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

RunConfig tiny_config(const fs::path& out, const std::string& run_id) {
    json j = {
        {"run_id", run_id},
        {"output_dir", out.string()},
        {"seed", 11},
        {"simulator", {{"catalog_size", 20}}},
        {"corpus", {{"n_dialogues", 12}}},
        {"reward", {{"epochs", 10}}},
        {"policy", {{"pretrain_epochs", 2}}},
        {"ppo", {{"trajectories_per_batch", 8}, {"outer_epochs", 1}, {"minibatch_size", 32},
                 {"ppo_epochs_per_batch", 1}}},
        {"eval", {{"n_dialogues", 6}}},
    };
    return parse_config(j);
}

}  // namespace

TEST_CASE("an empty JSON object parses to the valid default config") {
    RunConfig cfg = parse_config(json::object());
    CHECK(cfg.run_id == "run-0");
    CHECK(cfg.seed == 7);
    CHECK(cfg.simulator.catalog_size == 100);
    CHECK(cfg.corpus.n_dialogues == 500);
    CHECK(cfg.ppo.clip_epsilon == 0.2);
    CHECK(cfg.ppo.learning_rate == 3e-4);
    CHECK(cfg.ppo.outer_epochs == 5);
    CHECK(cfg.eval.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(cfg.ppo.seed == cfg.seed);
    cfg.validate();  // must not throw
}

TEST_CASE("invalid values are rejected with the offending key named") {
    std::string msg = thrown_message([] {
        parse_config(json{{"ppo", {{"clip_epsilon", -0.1}}}});
    });
    CHECK(msg.find("clip_epsilon") != std::string::npos);

    msg = thrown_message([] {
        parse_config(json{{"simulator", {{"catalog_size", 0}}}});
    });
    CHECK(msg.find("catalog_size") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with their full path") {
    std::string msg = thrown_message([] {
        parse_config(json{{"ppo", {{"clip_epsilonn", 0.2}}}});
    });
    CHECK(msg.find("ppo.clip_epsilonn") != std::string::npos);

    msg = thrown_message([] { parse_config(json{{"totally_new_section", 1}}); });
    CHECK(msg.find("totally_new_section") != std::string::npos);
}

TEST_CASE("the paper preset pins the published hyperparameters") {
    RunConfig cfg = parse_config(json{{"preset", "paper"}});
    CHECK(cfg.ppo.learning_rate == 5e-6);
    CHECK(cfg.ppo.clip_epsilon == 0.2);
    CHECK(cfg.ppo.trajectories_per_batch == 128);
    CHECK(cfg.ppo.outer_epochs == 5);

    // explicit keys still override the preset
    RunConfig over = parse_config(json{{"preset", "paper"}, {"ppo", {{"outer_epochs", 2}}}});
    CHECK(over.ppo.outer_epochs == 2);
    CHECK(over.ppo.learning_rate == 5e-6);

    CHECK_THROWS(parse_config(json{{"preset", "journal"}}));
}

TEST_CASE("config echo round-trips through parse_config") {
    json j = {
        {"run_id", "rt"},
        {"seed", 123},
        {"simulator", {{"catalog_size", 42}, {"noise_scale", 0.25}, {"k_window", 8}}},
        {"reward", {{"mode", "blended"}, {"alpha", 0.5}, {"beta", 0.2}, {"gamma", 0.3}}},
        {"ppo", {{"learning_rate", 0.05}, {"reward_normalization", "conversation"}}},
        {"eval", {{"seeds", {4, 5, 6, 7}}}},
    };
    RunConfig cfg = parse_config(j);
    RunConfig back = parse_config(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(back.reward.mode == RewardMode::Blended);
    CHECK(back.ppo.reward_normalization == NormalizationScope::PerConversation);
    CHECK(back.eval.seeds == std::vector<std::uint64_t>{4, 5, 6, 7});
}

TEST_CASE("corpus serialization round-trips exactly") {
    SimConfig sc;
    sc.catalog_size = 15;
    Simulator sim = Simulator::build(sc);
    Corpus corpus = generate_corpus(sim, 10, 3);

    std::string text = corpus_to_jsonl(corpus);
    Corpus parsed = parse_corpus_jsonl(text);
    CHECK(corpus_to_jsonl(parsed) == text);
    REQUIRE(parsed.dialogues.size() == corpus.dialogues.size());
    CHECK(parsed.dialogues[0].turns.size() == corpus.dialogues[0].turns.size());
}

TEST_CASE("schema violations report their 1-based line number") {
    SimConfig sc;
    sc.catalog_size = 5;
    Simulator sim = Simulator::build(sc);
    std::string good = dialogue_to_jsonl_line(generate_corpus(sim, 1, 1).dialogues[0]);

    // line 2: drop the speaker field from the first turn
    json bad = json::parse(good);
    bad["turns"][0].erase("speaker");
    std::string text = good + "\n" + bad.dump() + "\n";
    std::string msg = thrown_message([&] { parse_corpus_jsonl(text); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("speaker") != std::string::npos);

    // wrong schema_version is refused
    json versioned = json::parse(good);
    versioned["schema_version"] = 99;
    msg = thrown_message([&] { parse_corpus_jsonl(versioned.dump() + "\n"); });
    CHECK(msg.find("schema_version") != std::string::npos);

    // malformed JSON names the line too
    msg = thrown_message([&] { parse_corpus_jsonl(good + "\n{not json\n"); });
    CHECK(msg.find("line 2") != std::string::npos);
}

TEST_CASE("external logs with item_title derive a first-appearance catalog") {
    json turn0 = {{"speaker", "user"}, {"tokens", {"hi"}}, {"turn_index", 0}};
    json turn1 = {{"speaker", "agent"}, {"tokens", {"try", "a"}}, {"turn_index", 1}};
    json fb = {{"dwell_time", 5.0}, {"sentiment_pre", 0.0}, {"sentiment_post", 0.1},
               {"accepted", true}};
    auto action = [&](json title) {
        return json{{"turn_index", 1}, {"template_id", 0}, {"item_title", title}};
    };
    json d1 = {{"schema_version", 1}, {"dialogue_id", 0}, {"user_profile_id", 0},
               {"turns", {turn0, turn1}}, {"actions", {action({"neon", "tides"})}},
               {"feedback", {fb}}};
    json d2 = d1;
    d2["dialogue_id"] = 1;
    d2["actions"] = {action({"iron", "summit"})};
    json d3 = d1;
    d3["dialogue_id"] = 2;
    d3["actions"] = {action({"neon", "tides"})};  // repeat of the first title

    Catalog derived;
    Corpus corpus = parse_corpus_jsonl(d1.dump() + "\n" + d2.dump() + "\n" + d3.dump() + "\n",
                                       &derived);
    REQUIRE(derived.size() == 2);
    CHECK(derived.at(0).title_tokens == Tokens{"neon", "tides"});
    CHECK(derived.at(1).title_tokens == Tokens{"iron", "summit"});
    CHECK(corpus.dialogues[0].actions[0].item_id == 0);
    CHECK(corpus.dialogues[1].actions[0].item_id == 1);
    CHECK(corpus.dialogues[2].actions[0].item_id == 0);
}

TEST_CASE("policy and reward checkpoints round-trip bit-exactly") {
    TempDir dir("ckpt");
    RngStream rng(5);
    PolicyParams p = PolicyParams::init(34, 16, 20, 6, rng);
    std::string ppath = (dir.path / "policy.json").string();
    save_policy(p, ppath, 77);
    PolicyParams q = load_policy(ppath);
    CHECK(q.input_dim == p.input_dim);
    CHECK(q.encoder_w == p.encoder_w);
    CHECK(q.item_w == p.item_w);
    CHECK(q.template_b == p.template_b);
    CHECK(q.value_w == p.value_w);
    CHECK(q.value_b == p.value_b);

    RewardModel m = RewardModel::init(8, rng);
    std::string rpath = (dir.path / "reward.json").string();
    save_reward_model(m, rpath, 78);
    RewardModel n = load_reward_model(rpath);
    CHECK(n.hidden_dim == m.hidden_dim);
    CHECK(n.w1 == m.w1);
    CHECK(n.b1 == m.b1);
    CHECK(n.w2 == m.w2);
    CHECK(n.b2 == m.b2);

    // kind mismatch is refused
    CHECK_THROWS(load_reward_model(ppath));
    CHECK_THROWS(load_policy(rpath));
    CHECK_THROWS(load_policy((dir.path / "absent.json").string()));
}

TEST_CASE("file_checksum depends only on the bytes") {
    TempDir dir("sum");
    fs::path a = dir.path / "a.txt";
    fs::path b = dir.path / "b.txt";
    fs::path c = dir.path / "c.txt";
    std::ofstream(a) << "same content";
    std::ofstream(b) << "same content";
    std::ofstream(c) << "other content";
    CHECK(file_checksum(a) == file_checksum(b));
    CHECK(file_checksum(a) != file_checksum(c));
    CHECK(file_checksum(a).size() == 16);
    CHECK_THROWS(file_checksum(dir.path / "missing.txt"));
}

TEST_CASE("gen-corpus writes reproducible artifacts and a manifest") {
    TempDir dir("gen");
    RunConfig c1 = tiny_config(dir.path, "r1");
    RunConfig c2 = tiny_config(dir.path, "r2");
    cmd_gen_corpus(c1);
    cmd_gen_corpus(c2);

    RunPaths p1 = run_paths(c1);
    RunPaths p2 = run_paths(c2);
    CHECK(fs::exists(p1.corpus));
    CHECK(fs::exists(p1.catalog));
    CHECK(fs::exists(p1.manifest));
    // same config and seed, different run dirs: byte-identical corpus
    CHECK(slurp(p1.corpus) == slurp(p2.corpus));
    CHECK(file_checksum(p1.catalog) == file_checksum(p2.catalog));

    json manifest = json::parse(slurp(p1.manifest));
    REQUIRE(manifest.is_array());
    REQUIRE(manifest.size() == 1);
    CHECK(manifest[0]["subcommand"] == "gen-corpus");
    CHECK(manifest[0]["seed"] == 11);
    CHECK(!manifest[0]["outputs"].empty());

    // re-running appends a manifest record but reproduces identical bytes
    std::string before = slurp(p1.corpus);
    cmd_gen_corpus(c1);
    CHECK(slurp(p1.corpus) == before);
    manifest = json::parse(slurp(p1.manifest));
    CHECK(manifest.size() == 2);
}

TEST_CASE("pretrain requires the corpus stage first") {
    TempDir dir("order");
    RunConfig cfg = tiny_config(dir.path, "r");
    std::string msg = thrown_message([&] { cmd_pretrain(cfg); });
    CHECK(msg.find("gen-corpus") != std::string::npos);
}

TEST_CASE("report on a missing run fails without creating the run directory") {
    TempDir dir("rep");
    RunConfig cfg = tiny_config(dir.path, "ghost");
    CHECK_THROWS(cmd_report(cfg));
    CHECK(!fs::exists(run_paths(cfg).root));
}

TEST_CASE("the pipeline stages chain end to end on a tiny run") {
    TempDir dir("pipe");
    RunConfig cfg = tiny_config(dir.path, "full");
    cfg.reward.mode = RewardMode::Linear;  // no reward checkpoint needed

    cmd_gen_corpus(cfg);
    cmd_pretrain(cfg);
    cmd_train_ppo(cfg);
    cmd_evaluate(cfg);

    RunPaths paths = run_paths(cfg);
    CHECK(fs::exists(paths.checkpoints / "pretrained.json"));
    CHECK(fs::exists(paths.checkpoints / "tuned.json"));
    CHECK(fs::exists(paths.reports / "table1.json"));
    CHECK(fs::exists(paths.reports / "table1.txt"));

    json t1 = json::parse(slurp(paths.reports / "table1.json"));
    CHECK(t1.contains("baseline"));
    CHECK(t1.contains("tuned"));

    cmd_report(cfg);  // prints the stored tables, must not throw
}
