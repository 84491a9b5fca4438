#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace crs {

using Token = std::string;
using Tokens = std::vector<Token>;

enum class Speaker { User, Agent };

inline const char* speaker_name(Speaker s) {
    return s == Speaker::User ? "user" : "agent";
}

struct Item {
    int id = 0;                 // dense 0..catalog_size-1
    Tokens title_tokens;
    std::vector<std::string> tags;
    int embedding_id = 0;
};

struct Utterance {
    Speaker speaker = Speaker::User;
    Tokens tokens;
    int turn_index = 0;
};

// The conversational context: a bounded window of recent utterances.
struct DialogueState {
    std::vector<Utterance> window;
    int turn_index = 0;
    Tokens active_query_tokens;  // tokens of the latest user utterance
    int k_window = 4;
};

struct Action {
    int item_id = 0;
    int template_id = 0;
};

// Implicit feedback observed after one recommendation.
struct FeedbackEvent {
    double dwell_time = 0.0;       // emulated seconds in [0, dwell_max]
    double sentiment_pre = 0.0;    // [-1, 1]
    double sentiment_post = 0.0;   // [-1, 1]
    bool accepted = false;
};

// One transition s_t -> a_t -> s_{t+1} with everything the trainer needs.
struct StepRecord {
    DialogueState state;
    Action action;
    FeedbackEvent feedback;
    double raw_reward = 0.0;
    double normalized_reward = 0.0;
    double log_prob = 0.0;   // <= 0
    double value = 0.0;      // V(s_t)
    double advantage = 0.0;  // filled by the trainer
};

struct Trajectory {
    std::vector<StepRecord> steps;
    int user_profile_id = 0;
    bool done = true;
};

}  // namespace crs
