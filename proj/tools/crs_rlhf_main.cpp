#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crs/config.hpp"
#include "crs/run.hpp"

namespace {

struct Cli {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

crs::RunConfig resolve_config(const Cli& cli) {
    crs::RunConfig cfg;
    if (!cli.config_path.empty()) cfg = crs::load_config(cli.config_path);
    if (!cli.preset.empty()) crs::apply_preset(cfg, cli.preset);
    if (!cli.out_dir.empty()) cfg.output_dir = cli.out_dir;
    if (cli.seed_set) {
        cfg.seed = cli.seed;
        cfg.ppo.seed = cli.seed;
    }
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale RLHF pipeline for conversational recommendation"};
    app.require_subcommand(1);

    Cli cli;
    using Handler = void (*)(const crs::RunConfig&);
    struct Sub {
        const char* name;
        const char* desc;
        Handler handler;
    };
    const Sub subs[] = {
        {"gen-corpus", "Generate the simulated dialogue corpus", crs::cmd_gen_corpus},
        {"pretrain", "Supervised pretraining of the policy on the corpus", crs::cmd_pretrain},
        {"train-reward", "Fit the reward model on weak labels", crs::cmd_train_reward},
        {"train-ppo", "PPO fine-tuning against the simulator", crs::cmd_train_ppo},
        {"evaluate", "Evaluate pretrained and tuned checkpoints", crs::cmd_evaluate},
        {"ablate", "Reward-signal ablation study", crs::cmd_ablate},
        {"report", "Print the stored report tables", crs::cmd_report},
    };

    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.desc);
        sub->add_option("--config", cli.config_path, "JSON config file");
        sub->add_option("--seed", cli.seed, "Override the run seed")
            ->each([&cli](const std::string&) { cli.seed_set = true; });
        sub->add_option("--out", cli.out_dir, "Override the output directory");
        sub->add_option("--preset", cli.preset, "Hyperparameter preset")
            ->check(CLI::IsMember({"desk", "paper"}));
        Handler handler = s.handler;
        sub->callback([&cli, handler]() { handler(resolve_config(cli)); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
