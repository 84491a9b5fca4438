#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "crs/dialogue.hpp"
#include "crs/rng.hpp"
#include "crs/user_sim.hpp"

using namespace crs;

namespace {

Utterance utt(Speaker s, int turn, Tokens toks) {
    Utterance u;
    u.speaker = s;
    u.turn_index = turn;
    u.tokens = std::move(toks);
    return u;
}

}  // namespace

TEST_CASE("initial_state starts empty or with the opening utterance") {
    DialogueState s = initial_state(4);
    CHECK(s.window.empty());
    CHECK(s.turn_index == 0);
    CHECK(s.k_window == 4);

    Utterance opening = utt(Speaker::User, 0, {"hello"});
    DialogueState s2 = initial_state(4, opening);
    REQUIRE(s2.window.size() == 1);
    CHECK(s2.window[0].tokens == Tokens{"hello"});
    CHECK(s2.active_query_tokens == Tokens{"hello"});
    CHECK(s2.turn_index == 0);
}

TEST_CASE("advance_state appends the exchange and advances by two turns") {
    DialogueState s = initial_state(4, utt(Speaker::User, 0, {"hi"}));
    Utterance agent = utt(Speaker::Agent, 1, {"have", "you", "seen", "solar", "drift"});
    Utterance reply = utt(Speaker::User, 2, {"yes"});
    DialogueState next = advance_state(s, Action{0, 0}, agent, reply);

    REQUIRE(next.window.size() == 3);
    CHECK(next.turn_index == 2);
    CHECK(next.active_query_tokens == Tokens{"yes"});
    CHECK(next.window[1].tokens == agent.tokens);
    CHECK(next.window[2].tokens == reply.tokens);

    // purity: the input state is untouched
    CHECK(s.window.size() == 1);
    CHECK(s.turn_index == 0);
    CHECK(s.active_query_tokens == Tokens{"hi"});
}

TEST_CASE("advance_state evicts the oldest utterances past k_window") {
    DialogueState s = initial_state(3, utt(Speaker::User, 0, {"u0"}));
    s = advance_state(s, Action{}, utt(Speaker::Agent, 1, {"a1"}), utt(Speaker::User, 2, {"u2"}));
    REQUIRE(s.window.size() == 3);
    s = advance_state(s, Action{}, utt(Speaker::Agent, 3, {"a3"}), utt(Speaker::User, 4, {"u4"}));
    REQUIRE(s.window.size() == 3);
    CHECK(s.window[0].tokens == Tokens{"u2"});
    CHECK(s.window[1].tokens == Tokens{"a3"});
    CHECK(s.window[2].tokens == Tokens{"u4"});
    CHECK(s.turn_index == 4);
}

TEST_CASE("window always equals the suffix of the full history") {
    // brute-force oracle: keep all utterances, slice the last k
    for (int k : {1, 2, 3, 4, 6, 9}) {
        std::vector<Utterance> history;
        history.push_back(utt(Speaker::User, 0, {"u0"}));
        DialogueState s = initial_state(k, history[0]);
        for (int step = 0; step < 12; ++step) {
            Utterance agent = utt(Speaker::Agent, s.turn_index + 1,
                                  {"a" + std::to_string(s.turn_index + 1)});
            Utterance reply = utt(Speaker::User, s.turn_index + 2,
                                  {"u" + std::to_string(s.turn_index + 2)});
            history.push_back(agent);
            history.push_back(reply);
            s = advance_state(s, Action{}, agent, reply);

            std::size_t expect = std::min<std::size_t>(history.size(), static_cast<std::size_t>(k));
            REQUIRE(s.window.size() == expect);
            for (std::size_t i = 0; i < expect; ++i)
                CHECK(s.window[i].tokens == history[history.size() - expect + i].tokens);
            CHECK(s.active_query_tokens == history.back().tokens);
        }
    }
}

TEST_CASE("advance_state rejects non-consecutive turn indices") {
    DialogueState s = initial_state(4, utt(Speaker::User, 0, {"hi"}));
    // agent turn skips ahead
    CHECK_THROWS_AS(advance_state(s, Action{}, utt(Speaker::Agent, 2, {"a"}),
                                  utt(Speaker::User, 3, {"u"})),
                    std::invalid_argument);
    // user turn regresses
    CHECK_THROWS_AS(advance_state(s, Action{}, utt(Speaker::Agent, 1, {"a"}),
                                  utt(Speaker::User, 1, {"u"})),
                    std::invalid_argument);
}

TEST_CASE("render_utterance substitutes the item title into the template") {
    Catalog cat;
    Item it;
    it.id = 0;
    it.title_tokens = {"silent", "harbor"};
    cat.items.push_back(it);
    TemplateTable templates = default_templates();

    Utterance u = render_utterance(Action{0, 0}, cat, templates, 1);
    CHECK(u.speaker == Speaker::Agent);
    CHECK(u.turn_index == 1);
    CHECK(u.tokens == Tokens{"have", "you", "seen", "silent", "harbor"});
}

TEST_CASE("render_utterance covers the full item x template grid") {
    Catalog cat = make_catalog(5, 99);
    TemplateTable templates = default_templates();
    for (int item = 0; item < 5; ++item) {
        for (int tpl = 0; tpl < static_cast<int>(templates.size()); ++tpl) {
            Utterance u = render_utterance(Action{item, tpl}, cat, templates, 1);
            const Tokens& title = cat.at(item).title_tokens;
            // every title token must appear, the placeholder must not
            for (const auto& t : title)
                CHECK(std::count(u.tokens.begin(), u.tokens.end(), t) >= 1);
            CHECK(std::count(u.tokens.begin(), u.tokens.end(), kItemPlaceholder) == 0);
            CHECK(u.tokens.size() == templates[static_cast<std::size_t>(tpl)].tokens.size() - 1 + title.size());
        }
    }
}

TEST_CASE("render_utterance rejects out-of-range ids and bad templates") {
    Catalog cat = make_catalog(3, 99);
    TemplateTable templates = default_templates();
    CHECK_THROWS_AS(render_utterance(Action{3, 0}, cat, templates, 1), std::out_of_range);
    CHECK_THROWS_AS(render_utterance(Action{-1, 0}, cat, templates, 1), std::out_of_range);
    CHECK_THROWS_AS(render_utterance(Action{0, 6}, cat, templates, 1), std::out_of_range);

    TemplateTable broken = {{Tokens{"no", "placeholder", "here"}, false}};
    CHECK_THROWS_AS(render_utterance(Action{0, 0}, cat, broken, 1), std::invalid_argument);
}

TEST_CASE("substitute_item replaces every placeholder occurrence") {
    Tokens out = substitute_item({"<ITEM>", "or", "<ITEM>"}, {"neon", "tides"});
    CHECK(out == Tokens{"neon", "tides", "or", "neon", "tides"});
}

TEST_CASE("default templates all contain the placeholder and four references") {
    TemplateTable templates = default_templates();
    REQUIRE(templates.size() == 6);
    int refs = 0;
    for (const auto& t : templates) {
        CHECK(std::count(t.tokens.begin(), t.tokens.end(), kItemPlaceholder) == 1);
        if (t.reference) ++refs;
    }
    CHECK(refs == 4);
}
