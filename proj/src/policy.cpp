#include "crs/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crs {

namespace {

void init_layer(std::vector<double>& w, std::vector<double>& b, int out_dim, int in_dim,
                double scale, RngStream& rng) {
    w.resize(static_cast<std::size_t>(out_dim) * static_cast<std::size_t>(in_dim));
    b.assign(static_cast<std::size_t>(out_dim), 0.0);
    for (auto& x : w) x = rng.uniform(-scale, scale);
}

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& x : p) x /= sum;
    return p;
}

}  // namespace

PolicyParams PolicyParams::init(int input_dim, int hidden_dim, int catalog_size,
                                int template_count, RngStream& rng) {
    PolicyParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    p.catalog_size = catalog_size;
    p.template_count = template_count;
    init_layer(p.encoder_w, p.encoder_b, hidden_dim, input_dim,
               1.0 / std::sqrt(static_cast<double>(input_dim)), rng);
    // heads start small so the initial policy is near uniform
    init_layer(p.item_w, p.item_b, catalog_size, hidden_dim, 0.01, rng);
    init_layer(p.template_w, p.template_b, template_count, hidden_dim, 0.01, rng);
    p.value_w.resize(static_cast<std::size_t>(hidden_dim));
    for (auto& x : p.value_w) x = rng.uniform(-0.01, 0.01);
    p.value_b = 0.0;
    return p;
}

PolicyParams PolicyParams::zeros_like(const PolicyParams& p) {
    PolicyParams z = p;
    auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    zero(z.encoder_w); zero(z.encoder_b);
    zero(z.item_w); zero(z.item_b);
    zero(z.template_w); zero(z.template_b);
    zero(z.value_w);
    z.value_b = 0.0;
    return z;
}

std::size_t PolicyParams::parameter_count() const {
    return encoder_w.size() + encoder_b.size() + item_w.size() + item_b.size() +
           template_w.size() + template_b.size() + value_w.size() + 1;
}

std::vector<double*> PolicyParams::flat() {
    std::vector<double*> out;
    out.reserve(parameter_count());
    for (auto* v : {&encoder_w, &encoder_b, &item_w, &item_b, &template_w, &template_b, &value_w})
        for (auto& x : *v) out.push_back(&x);
    out.push_back(&value_b);
    return out;
}

std::vector<const double*> PolicyParams::flat() const {
    std::vector<const double*> out;
    out.reserve(parameter_count());
    for (auto* v : {&encoder_w, &encoder_b, &item_w, &item_b, &template_w, &template_b, &value_w})
        for (const auto& x : *v) out.push_back(&x);
    out.push_back(&value_b);
    return out;
}

void PolicyParams::axpy(double a, const PolicyParams& g) {
    auto add = [a](std::vector<double>& dst, const std::vector<double>& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
    };
    add(encoder_w, g.encoder_w); add(encoder_b, g.encoder_b);
    add(item_w, g.item_w); add(item_b, g.item_b);
    add(template_w, g.template_w); add(template_b, g.template_b);
    add(value_w, g.value_w);
    value_b += a * g.value_b;
}

void PolicyParams::scale(double a) {
    for (double* p : flat()) *p *= a;
}

void PolicyParams::check_finite() const {
    for (const double* p : flat())
        if (!std::isfinite(*p)) throw std::runtime_error("policy params: non-finite weight");
}

std::vector<double> encode_state(const DialogueState& state, const EmbeddingTable& table,
                                 int max_turns) {
    std::vector<double> out(static_cast<std::size_t>(table.dim) + 2, 0.0);
    if (!state.window.empty()) {
        for (const auto& u : state.window) {
            Vec v = embed_tokens(u.tokens, table);
            for (int i = 0; i < table.dim; ++i) out[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
        }
        const double inv = 1.0 / static_cast<double>(state.window.size());
        for (int i = 0; i < table.dim; ++i) out[static_cast<std::size_t>(i)] *= inv;
    }
    out[static_cast<std::size_t>(table.dim)] =
        static_cast<double>(state.turn_index) / static_cast<double>(max_turns);
    out[static_cast<std::size_t>(table.dim) + 1] =
        static_cast<double>(state.window.size()) / static_cast<double>(state.k_window);
    return out;
}

PolicyOutput forward(const PolicyParams& p, const std::vector<double>& x, ForwardCache* cache) {
    if (static_cast<int>(x.size()) != p.input_dim)
        throw std::invalid_argument("forward: state vector size mismatch");

    std::vector<double> h(static_cast<std::size_t>(p.hidden_dim));
    for (int j = 0; j < p.hidden_dim; ++j) {
        const double* row = &p.encoder_w[static_cast<std::size_t>(j) * static_cast<std::size_t>(p.input_dim)];
        double z = p.encoder_b[static_cast<std::size_t>(j)];
        for (int i = 0; i < p.input_dim; ++i) z += row[i] * x[static_cast<std::size_t>(i)];
        h[static_cast<std::size_t>(j)] = std::tanh(z);
    }

    auto head = [&](const std::vector<double>& w, const std::vector<double>& b, int out_dim) {
        std::vector<double> logits(static_cast<std::size_t>(out_dim));
        for (int k = 0; k < out_dim; ++k) {
            const double* row = &w[static_cast<std::size_t>(k) * static_cast<std::size_t>(p.hidden_dim)];
            double z = b[static_cast<std::size_t>(k)];
            for (int j = 0; j < p.hidden_dim; ++j) z += row[j] * h[static_cast<std::size_t>(j)];
            logits[static_cast<std::size_t>(k)] = z;
        }
        return logits;
    };

    PolicyOutput out;
    out.item_probs = softmax(head(p.item_w, p.item_b, p.catalog_size));
    out.template_probs = softmax(head(p.template_w, p.template_b, p.template_count));
    out.value = p.value_b;
    for (int j = 0; j < p.hidden_dim; ++j)
        out.value += p.value_w[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];

    for (double v : out.item_probs)
        if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite output");
    if (!std::isfinite(out.value)) throw std::runtime_error("forward: non-finite value");

    if (cache) {
        cache->input = x;
        cache->hidden = std::move(h);
        cache->output = out;
    }
    return out;
}

double log_prob(const PolicyOutput& output, const Action& action) {
    return std::log(output.item_probs.at(static_cast<std::size_t>(action.item_id))) +
           std::log(output.template_probs.at(static_cast<std::size_t>(action.template_id)));
}

std::pair<Action, double> sample_action(const PolicyOutput& output, RngStream& rng) {
    auto draw = [&rng](const std::vector<double>& probs) {
        double u = rng.uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;  // guard against rounding
    };
    Action a;
    a.item_id = draw(output.item_probs);
    a.template_id = draw(output.template_probs);
    return {a, log_prob(output, a)};
}

void backward(const PolicyParams& p, const ForwardCache& cache, const LossGrads& g,
              PolicyParams& grad) {
    if (static_cast<int>(g.item_logits.size()) != p.catalog_size ||
        static_cast<int>(g.template_logits.size()) != p.template_count)
        throw std::invalid_argument("backward: loss gradient shape mismatch");

    const auto& h = cache.hidden;
    const auto& x = cache.input;
    std::vector<double> dh(static_cast<std::size_t>(p.hidden_dim), 0.0);

    auto head_backward = [&](const std::vector<double>& w, std::vector<double>& gw,
                             std::vector<double>& gb, const std::vector<double>& gl) {
        for (std::size_t k = 0; k < gl.size(); ++k) {
            gb[k] += gl[k];
            const double* row = &w[k * static_cast<std::size_t>(p.hidden_dim)];
            double* grow = &gw[k * static_cast<std::size_t>(p.hidden_dim)];
            for (int j = 0; j < p.hidden_dim; ++j) {
                grow[j] += gl[k] * h[static_cast<std::size_t>(j)];
                dh[static_cast<std::size_t>(j)] += gl[k] * row[j];
            }
        }
    };
    head_backward(p.item_w, grad.item_w, grad.item_b, g.item_logits);
    head_backward(p.template_w, grad.template_w, grad.template_b, g.template_logits);

    for (int j = 0; j < p.hidden_dim; ++j) {
        grad.value_w[static_cast<std::size_t>(j)] += g.value * h[static_cast<std::size_t>(j)];
        dh[static_cast<std::size_t>(j)] += g.value * p.value_w[static_cast<std::size_t>(j)];
    }
    grad.value_b += g.value;

    for (int j = 0; j < p.hidden_dim; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        double dz = dh[sj] * (1.0 - h[sj] * h[sj]);
        grad.encoder_b[sj] += dz;
        double* grow = &grad.encoder_w[sj * static_cast<std::size_t>(p.input_dim)];
        for (int i = 0; i < p.input_dim; ++i) grow[i] += dz * x[static_cast<std::size_t>(i)];
    }
}

void SgdMomentum::step(PolicyParams& params, const PolicyParams& grad) {
    if (!initialized_) {
        velocity_ = PolicyParams::zeros_like(params);
        initialized_ = true;
    }
    velocity_.scale(momentum_);
    velocity_.axpy(-lr_, grad);
    params.axpy(1.0, velocity_);
}

std::vector<PretrainExample> extract_pretrain_examples(const Corpus& corpus,
                                                       const EmbeddingTable& table,
                                                       int k_window, int max_turns) {
    std::vector<PretrainExample> out;
    for (const auto& log : corpus.dialogues) {
        DialogueState state = initial_state(k_window);
        std::size_t action_idx = 0;
        std::size_t t = 0;
        // leading user turns seed the context
        while (t < log.turns.size() && log.turns[t].speaker == Speaker::User) {
            state.window.push_back(log.turns[t]);
            state.active_query_tokens = log.turns[t].tokens;
            ++t;
        }
        while (t < log.turns.size() && action_idx < log.actions.size()) {
            const Utterance& agent = log.turns[t];
            if (agent.speaker != Speaker::Agent || agent.turn_index != log.actions[action_idx].turn_index) {
                ++t;
                continue;
            }
            PretrainExample ex;
            ex.state_vec = encode_state(state, table, max_turns);
            ex.action = {log.actions[action_idx].item_id, log.actions[action_idx].template_id};
            out.push_back(std::move(ex));
            ++action_idx;

            state.window.push_back(agent);
            if (t + 1 < log.turns.size() && log.turns[t + 1].speaker == Speaker::User) {
                state.window.push_back(log.turns[t + 1]);
                state.active_query_tokens = log.turns[t + 1].tokens;
                ++t;
            }
            ++t;
            if (static_cast<int>(state.window.size()) > k_window)
                state.window.erase(state.window.begin(),
                                   state.window.begin() + (static_cast<long>(state.window.size()) - k_window));
            state.turn_index = state.window.back().turn_index;
        }
    }
    return out;
}

std::vector<double> pretrain(PolicyParams& params, const Corpus& corpus,
                             const EmbeddingTable& table, const PretrainConfig& cfg,
                             std::uint64_t seed) {
    if (corpus.dialogues.empty()) throw std::invalid_argument("pretrain: empty corpus");
    auto examples = extract_pretrain_examples(corpus, table, cfg.k_window, cfg.max_turns);
    if (examples.empty()) throw std::invalid_argument("pretrain: corpus has no agent turns");

    RngStream rng(seed);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    SgdMomentum opt(cfg.learning_rate);
    std::vector<double> epoch_losses;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double total_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.minibatch_size)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch_size));
            PolicyParams grad = PolicyParams::zeros_like(params);
            const double invn = 1.0 / static_cast<double>(end - start);
            for (std::size_t k = start; k < end; ++k) {
                const auto& ex = examples[order[k]];
                ForwardCache cache;
                PolicyOutput outp = forward(params, ex.state_vec, &cache);
                total_loss -= log_prob(outp, ex.action);

                LossGrads g;
                g.item_logits = outp.item_probs;
                g.item_logits[static_cast<std::size_t>(ex.action.item_id)] -= 1.0;
                g.template_logits = outp.template_probs;
                g.template_logits[static_cast<std::size_t>(ex.action.template_id)] -= 1.0;
                for (auto& v : g.item_logits) v *= invn;
                for (auto& v : g.template_logits) v *= invn;
                g.value = 0.0;
                backward(params, cache, g, grad);
            }
            opt.step(params, grad);
        }
        epoch_losses.push_back(total_loss / static_cast<double>(examples.size()));
    }
    params.check_finite();
    return epoch_losses;
}

}  // namespace crs
