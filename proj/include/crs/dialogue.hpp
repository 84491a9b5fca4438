#pragma once

#include <string>
#include <vector>

#include "crs/embedding.hpp"
#include "crs/types.hpp"

namespace crs {

// Placeholder token substituted with the item title when rendering.
inline const Token kItemPlaceholder = "<ITEM>";

struct ResponseTemplate {
    Tokens tokens;         // must contain kItemPlaceholder
    bool reference = false;  // member of the BLEU reference set
};

struct Catalog {
    std::vector<Item> items;

    int size() const { return static_cast<int>(items.size()); }
    const Item& at(int id) const;
};

using TemplateTable = std::vector<ResponseTemplate>;

// The fixed agent-side response templates.
TemplateTable default_templates();

// Precomputed item embeddings (mean of title-token vectors).
struct ItemEmbeddings {
    std::vector<Vec> vectors;

    static ItemEmbeddings build(const Catalog& catalog, const EmbeddingTable& table);
    const Vec& of(int item_id) const { return vectors.at(static_cast<std::size_t>(item_id)); }
};

DialogueState initial_state(int k_window);
// Dialogue that opens with a user utterance at turn 0.
DialogueState initial_state(int k_window, const Utterance& opening);

// Append one agent/user exchange, trim the window to k_window, advance the
// turn counter by two. Pure: the input state is untouched.
DialogueState advance_state(const DialogueState& state, const Action& agent_action,
                            const Utterance& agent_utterance, const Utterance& user_reply);

// Deterministic surface realization of an action.
Utterance render_utterance(const Action& action, const Catalog& catalog,
                           const TemplateTable& templates, int turn_index);

// Substitute the placeholder in an arbitrary token sequence.
Tokens substitute_item(const Tokens& template_tokens, const Tokens& title_tokens);

}  // namespace crs
