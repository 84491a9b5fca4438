#pragma once

#include <cstdint>
#include <vector>

#include "crs/corpus.hpp"
#include "crs/dialogue.hpp"
#include "crs/embedding.hpp"
#include "crs/rng.hpp"
#include "crs/types.hpp"

namespace crs {

// Dense layers flattened row-major: w[out][in] at w[out * in_dim + in].
struct PolicyParams {
    int input_dim = 34;      // embedding_dim + 2
    int hidden_dim = 64;
    int catalog_size = 100;
    int template_count = 6;

    std::vector<double> encoder_w, encoder_b;
    std::vector<double> item_w, item_b;
    std::vector<double> template_w, template_b;
    std::vector<double> value_w;
    double value_b = 0.0;

    static PolicyParams init(int input_dim, int hidden_dim, int catalog_size,
                             int template_count, RngStream& rng);
    static PolicyParams zeros_like(const PolicyParams& p);

    std::size_t parameter_count() const;
    // Flat views used by the optimizer and the finite-difference tests.
    std::vector<double*> flat();
    std::vector<const double*> flat() const;

    void axpy(double a, const PolicyParams& g);  // this += a * g
    void scale(double a);
    void check_finite() const;
};

struct PolicyOutput {
    std::vector<double> item_probs;
    std::vector<double> template_probs;
    double value = 0.0;
};

struct ForwardCache {
    std::vector<double> input;
    std::vector<double> hidden;  // tanh activations
    PolicyOutput output;
};

// Mean utterance embedding over the window plus two scalar features:
// turn_index / max_turns and window fill fraction.
std::vector<double> encode_state(const DialogueState& state, const EmbeddingTable& table,
                                 int max_turns = 20);

PolicyOutput forward(const PolicyParams& params, const std::vector<double>& state_vec,
                     ForwardCache* cache = nullptr);

double log_prob(const PolicyOutput& output, const Action& action);

std::pair<Action, double> sample_action(const PolicyOutput& output, RngStream& rng);

// Upstream gradients of a scalar loss with respect to the head logits and
// the value output.
struct LossGrads {
    std::vector<double> item_logits;
    std::vector<double> template_logits;
    double value = 0.0;
};

// Exact reverse-mode gradients; accumulates into grad.
void backward(const PolicyParams& params, const ForwardCache& cache,
              const LossGrads& loss_grads, PolicyParams& grad);

// SGD with momentum; the single optimizer used for both pretraining and PPO.
class SgdMomentum {
public:
    SgdMomentum(double learning_rate, double momentum = 0.9)
        : lr_(learning_rate), momentum_(momentum) {}

    void step(PolicyParams& params, const PolicyParams& grad);
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    double lr_;
    double momentum_;
    PolicyParams velocity_;
    bool initialized_ = false;
};

struct PretrainConfig {
    int epochs = 30;
    double learning_rate = 1e-2;
    int minibatch_size = 64;
    int max_turns = 20;
    int k_window = 4;
};

// Supervised next-action prediction on logged dialogues: cross-entropy of
// the logged (item, template) pair at each agent turn.
std::vector<double> pretrain(PolicyParams& params, const Corpus& corpus,
                             const EmbeddingTable& table, const PretrainConfig& cfg,
                             std::uint64_t seed);

// (state_vec, item, template) triples extracted by replaying a corpus.
struct PretrainExample {
    std::vector<double> state_vec;
    Action action;
};
std::vector<PretrainExample> extract_pretrain_examples(const Corpus& corpus,
                                                       const EmbeddingTable& table,
                                                       int k_window, int max_turns);

}  // namespace crs
