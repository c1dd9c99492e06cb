#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dicr/ad/ops.hpp"
#include "dicr/ad/parameter.hpp"
#include "dicr/util/rng.hpp"

namespace dicr::converse {

using ad::Parameter;
using ad::Tape;
using ad::Var;

inline constexpr double kMimEpsilon = 1e-6;
inline constexpr double kPriorFloor = 1e-10;
inline constexpr double kNllFloor = 1e-12;

enum class Mode { kTraining, kInference };

struct ConverseShape {
  int vocab_size = 0;
  int word_dim = 300;
  // Per direction; encoder states are 2 * hidden wide.
  int hidden = 400;
  int layers = 2;
  int attention_dim = 400;
  int mlp_hidden = 800;
  // Width of the context-attention input to the fusion gate.
  int max_context_len = 128;
  int state_dim() const { return 2 * hidden; }
};

struct GruLayer {
  Parameter* wx = nullptr;
  Parameter* wh = nullptr;
  Parameter* bx = nullptr;
  Parameter* bh = nullptr;
};

// Stacked bidirectional GRU.
struct BiGru {
  std::vector<GruLayer> forward;
  std::vector<GruLayer> backward;
};

struct Attention {
  Parameter* wk = nullptr;  // attention_dim x key width
  Parameter* wq = nullptr;  // attention_dim x query width
  Parameter* v = nullptr;   // attention_dim x 1
};

class ConverseModel {
 public:
  explicit ConverseModel(const ConverseShape& shape);
  void init(Rng& rng);

  const ConverseShape& shape() const { return shape_; }
  ad::ParameterStore& store() { return store_; }
  const ad::ParameterStore& store() const { return store_; }

  Parameter* embedding;
  BiGru context_encoder;
  BiGru knowledge_encoder;
  BiGru semantic_encoder;
  Parameter* w_kc;       // prior query
  Parameter* w_ky;       // posterior query
  Parameter* w_bow;      // vocab x state
  Parameter* w_sp;       // semantic aggregation query
  Attention semantic_attention;
  Parameter* w_mim;      // bilinear discriminator
  Parameter* merge_w;
  Parameter* merge_b;
  GruLayer decoder;
  Attention context_attention;
  Parameter* gate_w;     // 1 x (max_context_len + state)
  Parameter* gate_b;
  Parameter* out1_w;
  Parameter* out1_b;
  Parameter* out2_w;
  Parameter* out2_b;
  Parameter* gen_w;      // 1 x (word + hidden + state)
  Parameter* gen_b;
  Attention path_attention;

 private:
  BiGru make_bigru(const std::string& name, int input);
  GruLayer make_gru(const std::string& name, int input, int hidden);
  Attention make_attention(const std::string& name, int key, int query);

  ConverseShape shape_;
  ad::ParameterStore store_;
};

struct SequenceEncoding {
  Var states;   // n x 2H
  Var summary;  // [h_n forward ; h_1 backward]
};

// Throws PreconditionError on an empty sequence.
SequenceEncoding encode_sequence(Tape& tape, ConverseModel& model, const BiGru& encoder, std::span<const int> ids);

struct PathDistribution {
  Var prior;
  std::optional<Var> posterior;
};

// prior_i = softmax(o_P,i . tanh(W_KC o_C)); posterior likewise with W_KY o_Y.
// Training mode requires o_Y (ModeError otherwise); inference returns the prior only.
PathDistribution path_distributions(Tape& tape, ConverseModel& model, Var o_c, std::optional<Var> o_y,
                                    Var o_paths, Mode mode);

// sum_i post_i log(post_i / max(prior_i, floor))
Var kl_loss(Var posterior, Var prior);
// -mean_t log softmax(W_bow sum_i post_i o_P,i)[y_t]; zero without targets.
Var bow_loss(Tape& tape, ConverseModel& model, Var posterior, Var o_paths, std::span<const int> targets);

// Additive attention over path summaries with query tanh(W_SP o_C).
Var semantic_aggregate(Tape& tape, ConverseModel& model, Var o_paths, Var o_c);

// sigma(x^T W y) clamped to [eps, 1 - eps].
Var mim_score(Tape& tape, ConverseModel& model, Var x, Var y);

struct MimPair {
  Var aggregate;
  Var statement;
};
Var mim_loss(Tape& tape, ConverseModel& model, std::span<const MimPair> positives,
             std::span<const MimPair> negatives);
// Shuffled in-batch pairing with no fixed points; needs at least 2 items.
std::vector<std::size_t> negative_pairing(std::size_t n, Rng& rng);

// tanh(W [o_S ; o_C] + b)
Var merge_semantic(Tape& tape, ConverseModel& model, Var o_s, Var o_c);

// Everything the decoder attends to for one example.
struct DecoderMemory {
  Var context_states;               // n_c x 2H
  Var context_keys;                 // projected, n_c x A
  std::vector<Var> path_states;     // per path, n_i x 2H
  std::vector<Var> path_keys;       // projected
  std::vector<std::vector<int>> path_ext_ids;
  Var mu;                           // path weights
  int extended_size = 0;            // vocab + out-of-vocab path tokens
};

DecoderMemory make_memory(Tape& tape, ConverseModel& model, Var context_states, std::vector<Var> path_states,
                          std::vector<std::vector<int>> path_ext_ids, Var mu, int extended_size);

struct DecodeStep {
  Var distribution;  // over the extended vocabulary
  Var p_vocab;
  Var p_copy;
  Var xi;
  Var gate;
  Var v;
  Var context_attention;
};

// Output distribution at the current state h_t given the previous token.
DecodeStep decode_step(Tape& tape, ConverseModel& model, const DecoderMemory& memory, Var h, int prev_token,
                       std::optional<double> force_xi = std::nullopt, std::optional<double> force_gate = std::nullopt);
// h_{t+1} = GRU(h_t, [emb(y_t) ; v_t])
Var advance(Tape& tape, ConverseModel& model, Var h, int token, Var v);

// -(1/|Y|) sum_t log max(P_t(y_t), floor)
Var nll_loss(std::span<const Var> distributions, std::span<const int> targets);

}  // namespace dicr::converse
