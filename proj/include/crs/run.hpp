#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crs/config.hpp"

namespace crs {

struct RunPaths {
    std::filesystem::path root;        // output_dir / run_id
    std::filesystem::path config_echo; // config.json
    std::filesystem::path manifest;    // manifest.json (append-only record list)
    std::filesystem::path corpus;      // corpus.jsonl
    std::filesystem::path catalog;     // catalog.json
    std::filesystem::path checkpoints; // checkpoints/
    std::filesystem::path reports;     // reports/
};

RunPaths run_paths(const RunConfig& cfg);

// FNV-1a over the file bytes, hex encoded.
std::string file_checksum(const std::filesystem::path& path);

// Subcommand bodies; throw on any module error, the CLI maps that to a
// nonzero exit with a one-line cause.
void cmd_gen_corpus(const RunConfig& cfg);
void cmd_pretrain(const RunConfig& cfg);
void cmd_train_reward(const RunConfig& cfg);
void cmd_train_ppo(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_ablate(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

}  // namespace crs
