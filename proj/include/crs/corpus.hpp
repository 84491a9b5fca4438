#pragma once

#include <string>
#include <vector>

#include "crs/dialogue.hpp"
#include "crs/types.hpp"

namespace crs {

constexpr int kDialogueLogSchemaVersion = 1;

struct LoggedAction {
    int turn_index = 0;
    int item_id = 0;
    int template_id = 0;
};

// One logged dialogue; feedback[i] belongs to actions[i].
struct DialogueLog {
    int dialogue_id = 0;
    int user_profile_id = 0;
    std::vector<Utterance> turns;
    std::vector<LoggedAction> actions;
    std::vector<FeedbackEvent> feedback;
};

struct Corpus {
    std::vector<DialogueLog> dialogues;
};

// JSONL: one dialogue per line, field names fixed by docs/dialogue-log-schema.md.
std::string dialogue_to_jsonl_line(const DialogueLog& log);
std::string corpus_to_jsonl(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::string& path);

// Parse and validate a JSONL dialogue log. Schema violations are reported
// with their 1-based line number. External logs may identify items by
// "item_title" instead of "item_id"; unmapped titles are assigned dense
// catalog indices in order of first appearance and returned in
// *derived_catalog when non-null.
Corpus ingest_external_corpus(const std::string& path, Catalog* derived_catalog = nullptr);

Corpus parse_corpus_jsonl(const std::string& text, Catalog* derived_catalog = nullptr);

}  // namespace crs
