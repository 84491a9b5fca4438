#include "crs/dialogue.hpp"

#include <algorithm>
#include <stdexcept>

namespace crs {

const Item& Catalog::at(int id) const {
    if (id < 0 || id >= size()) throw std::out_of_range("catalog: item id out of range");
    return items[static_cast<std::size_t>(id)];
}

TemplateTable default_templates() {
    auto split = [](std::initializer_list<const char*> words) {
        Tokens t;
        for (const char* w : words) t.emplace_back(w);
        return t;
    };
    return {
        {split({"have", "you", "seen", "<ITEM>"}), true},
        {split({"i", "think", "you", "would", "really", "enjoy", "<ITEM>"}), true},
        {split({"you", "could", "try", "<ITEM>", "tonight"}), true},
        {split({"maybe", "check", "out", "<ITEM>", "sometime"}), true},
        {split({"another", "option", "would", "be", "<ITEM>"}), false},
        {split({"people", "with", "similar", "taste", "often", "pick", "<ITEM>"}), false},
    };
}

ItemEmbeddings ItemEmbeddings::build(const Catalog& catalog, const EmbeddingTable& table) {
    ItemEmbeddings out;
    out.vectors.reserve(catalog.items.size());
    for (const auto& item : catalog.items)
        out.vectors.push_back(embed_tokens(item.title_tokens, table));
    return out;
}

DialogueState initial_state(int k_window) {
    DialogueState s;
    s.k_window = k_window;
    s.turn_index = 0;
    return s;
}

DialogueState initial_state(int k_window, const Utterance& opening) {
    DialogueState s = initial_state(k_window);
    s.window.push_back(opening);
    s.active_query_tokens = opening.tokens;
    return s;
}

DialogueState advance_state(const DialogueState& state, const Action& /*agent_action*/,
                            const Utterance& agent_utterance, const Utterance& user_reply) {
    if (agent_utterance.turn_index != state.turn_index + 1 ||
        user_reply.turn_index != state.turn_index + 2) {
        throw std::invalid_argument("advance_state: invalid transition, turn indices must be consecutive");
    }
    DialogueState next = state;
    next.window.push_back(agent_utterance);
    next.window.push_back(user_reply);
    if (static_cast<int>(next.window.size()) > next.k_window) {
        next.window.erase(next.window.begin(),
                          next.window.begin() + (static_cast<long>(next.window.size()) - next.k_window));
    }
    next.turn_index = state.turn_index + 2;
    next.active_query_tokens = user_reply.tokens;
    return next;
}

Tokens substitute_item(const Tokens& template_tokens, const Tokens& title_tokens) {
    Tokens out;
    bool substituted = false;
    for (const auto& tok : template_tokens) {
        if (tok == kItemPlaceholder) {
            out.insert(out.end(), title_tokens.begin(), title_tokens.end());
            substituted = true;
        } else {
            out.push_back(tok);
        }
    }
    if (!substituted) throw std::invalid_argument("render_utterance: malformed template, missing item placeholder");
    return out;
}

Utterance render_utterance(const Action& action, const Catalog& catalog,
                           const TemplateTable& templates, int turn_index) {
    if (action.template_id < 0 || action.template_id >= static_cast<int>(templates.size()))
        throw std::out_of_range("render_utterance: template id out of range");
    const Item& item = catalog.at(action.item_id);
    const ResponseTemplate& tpl = templates[static_cast<std::size_t>(action.template_id)];
    Utterance u;
    u.speaker = Speaker::Agent;
    u.turn_index = turn_index;
    u.tokens = substitute_item(tpl.tokens, item.title_tokens);
    return u;
}

}  // namespace crs
