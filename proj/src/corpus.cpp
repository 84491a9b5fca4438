#include "crs/corpus.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace crs {

using nlohmann::json;

namespace {

json utterance_to_json(const Utterance& u) {
    return json{{"speaker", speaker_name(u.speaker)},
                {"tokens", u.tokens},
                {"turn_index", u.turn_index}};
}

json feedback_to_json(const FeedbackEvent& f) {
    return json{{"dwell_time", f.dwell_time},
                {"sentiment_pre", f.sentiment_pre},
                {"sentiment_post", f.sentiment_post},
                {"accepted", f.accepted}};
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("corpus line " + std::to_string(line_no) + ": " + what);
}

const json& require(const json& obj, const char* key, std::size_t line_no) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(line_no, std::string("missing field \"") + key + "\"");
    return *it;
}

}  // namespace

std::string dialogue_to_jsonl_line(const DialogueLog& log) {
    json j;
    j["schema_version"] = kDialogueLogSchemaVersion;
    j["dialogue_id"] = log.dialogue_id;
    j["user_profile_id"] = log.user_profile_id;
    j["turns"] = json::array();
    for (const auto& u : log.turns) j["turns"].push_back(utterance_to_json(u));
    j["actions"] = json::array();
    for (const auto& a : log.actions)
        j["actions"].push_back(json{{"turn_index", a.turn_index},
                                    {"item_id", a.item_id},
                                    {"template_id", a.template_id}});
    j["feedback"] = json::array();
    for (const auto& f : log.feedback) j["feedback"].push_back(feedback_to_json(f));
    return j.dump();
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::ostringstream os;
    for (const auto& d : corpus.dialogues) os << dialogue_to_jsonl_line(d) << "\n";
    return os.str();
}

void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_corpus: cannot open " + path);
    out << corpus_to_jsonl(corpus);
}

Corpus parse_corpus_jsonl(const std::string& text, Catalog* derived_catalog) {
    Corpus corpus;
    std::map<Tokens, int> title_index;  // first-appearance order, external logs only
    std::vector<Tokens> titles;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) fail(line_no, "expected a JSON object");
        int version = require(j, "schema_version", line_no).get<int>();
        if (version != kDialogueLogSchemaVersion)
            fail(line_no, "unsupported schema_version " + std::to_string(version));

        DialogueLog log;
        log.dialogue_id = require(j, "dialogue_id", line_no).get<int>();
        log.user_profile_id = require(j, "user_profile_id", line_no).get<int>();

        int prev_turn = -1;
        for (const auto& tj : require(j, "turns", line_no)) {
            Utterance u;
            std::string sp = require(tj, "speaker", line_no).get<std::string>();
            if (sp == "user") u.speaker = Speaker::User;
            else if (sp == "agent") u.speaker = Speaker::Agent;
            else fail(line_no, "unknown speaker \"" + sp + "\"");
            u.tokens = require(tj, "tokens", line_no).get<Tokens>();
            if (u.tokens.empty()) fail(line_no, "utterance with empty tokens");
            u.turn_index = require(tj, "turn_index", line_no).get<int>();
            if (u.turn_index <= prev_turn) fail(line_no, "turn_index not strictly increasing");
            prev_turn = u.turn_index;
            log.turns.push_back(std::move(u));
        }

        for (const auto& aj : require(j, "actions", line_no)) {
            LoggedAction a;
            a.turn_index = require(aj, "turn_index", line_no).get<int>();
            a.template_id = require(aj, "template_id", line_no).get<int>();
            if (aj.contains("item_id")) {
                a.item_id = aj.at("item_id").get<int>();
                if (a.item_id < 0) fail(line_no, "negative item_id");
            } else if (aj.contains("item_title")) {
                Tokens title = aj.at("item_title").get<Tokens>();
                if (title.empty()) fail(line_no, "empty item_title");
                auto it = title_index.find(title);
                if (it == title_index.end()) {
                    int id = static_cast<int>(titles.size());
                    title_index.emplace(title, id);
                    titles.push_back(title);
                    a.item_id = id;
                } else {
                    a.item_id = it->second;
                }
            } else {
                fail(line_no, "action needs \"item_id\" or \"item_title\"");
            }
            log.actions.push_back(a);
        }

        for (const auto& fj : require(j, "feedback", line_no)) {
            FeedbackEvent f;
            f.dwell_time = require(fj, "dwell_time", line_no).get<double>();
            f.sentiment_pre = require(fj, "sentiment_pre", line_no).get<double>();
            f.sentiment_post = require(fj, "sentiment_post", line_no).get<double>();
            f.accepted = require(fj, "accepted", line_no).get<bool>();
            log.feedback.push_back(f);
        }
        if (log.feedback.size() != log.actions.size())
            fail(line_no, "feedback count does not match action count");

        corpus.dialogues.push_back(std::move(log));
    }

    if (derived_catalog) {
        derived_catalog->items.clear();
        for (std::size_t i = 0; i < titles.size(); ++i) {
            Item item;
            item.id = static_cast<int>(i);
            item.embedding_id = item.id;
            item.title_tokens = titles[i];
            derived_catalog->items.push_back(std::move(item));
        }
    }
    return corpus;
}

Corpus ingest_external_corpus(const std::string& path, Catalog* derived_catalog) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ingest: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus_jsonl(buf.str(), derived_catalog);
}

}  // namespace crs
