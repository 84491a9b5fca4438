#include "crs/signals.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crs {

namespace {
double clamp1(double x) { return std::clamp(x, -1.0, 1.0); }
}

Lexicon Lexicon::builtin() {
    Lexicon lex;
    for (const char* w : {"love", "great", "like", "wonderful", "amazing", "enjoy",
                          "yes", "fantastic", "good", "awesome", "fun", "favorite"})
        lex.positive.insert(w);
    for (const char* w : {"hated", "hate", "boring", "awful", "terrible", "dislike",
                          "dull", "bad", "no", "worse", "skip", "annoying"})
        lex.negative.insert(w);
    return lex;
}

Lexicon Lexicon::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("lexicon: cannot open " + path);
    Lexicon lex;
    std::set<Token>* section = nullptr;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line == "[positive]") { section = &lex.positive; continue; }
        if (line == "[negative]") { section = &lex.negative; continue; }
        if (!section) throw std::runtime_error("lexicon: token before any section header: " + line);
        section->insert(line);
    }
    return lex;
}

std::string Lexicon::to_text() const {
    std::ostringstream os;
    os << "[positive]\n";
    for (const auto& t : positive) os << t << "\n";
    os << "[negative]\n";
    for (const auto& t : negative) os << t << "\n";
    return os.str();
}

double engagement_score(const FeedbackEvent& event, double dwell_max) {
    if (dwell_max <= 0.0) throw std::invalid_argument("engagement_score: dwell_max must be positive");
    return std::clamp(event.dwell_time / dwell_max, 0.0, 1.0);
}

double sentiment_shift(const FeedbackEvent& event) {
    return clamp1((event.sentiment_post - event.sentiment_pre) / 2.0);
}

double relevance_score(const Tokens& query_tokens, const Vec& item_vector,
                       const EmbeddingTable& table) {
    if (query_tokens.empty()) return 0.0;
    Vec q = embed_tokens(query_tokens, table);
    if (norm(q) == 0.0 || norm(item_vector) == 0.0) return 0.0;
    return cosine(q, item_vector);
}

double lexicon_sentiment(const Utterance& utterance, const Lexicon& lexicon) {
    if (utterance.tokens.empty()) throw std::invalid_argument("lexicon_sentiment: empty utterance");
    int pos = 0, neg = 0;
    for (const auto& tok : utterance.tokens) {
        if (lexicon.positive.count(tok)) ++pos;
        if (lexicon.negative.count(tok)) ++neg;
    }
    return clamp1(static_cast<double>(pos - neg) / static_cast<double>(utterance.tokens.size()));
}

WeakLabel weak_label(const FeatureVector& f, bool accepted) {
    double s = 0.4 * f.engagement + 0.3 * (f.sentiment_shift + 1.0) / 2.0 +
               0.2 * (f.relevance + 1.0) / 2.0 + (accepted ? 0.1 : 0.0);
    return WeakLabel{std::clamp(s, 0.0, 1.0)};
}

}  // namespace crs
