#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dicr/ad/adam.hpp"
#include "dicr/converse/model.hpp"
#include "dicr/corpus/example.hpp"
#include "dicr/corpus/vocab.hpp"

namespace dicr::converse {

// Token ids for one example.  Path tokens missing from the vocabulary get
// extended ids >= vocab size so they can still be copied.
struct PreparedExample {
  std::vector<int> context;
  std::vector<int> response;     // Y, vocabulary ids
  std::vector<int> targets;      // Y + <eos>, extended ids
  std::vector<int> bow_targets;  // content tokens of Y
  std::vector<int> statement;    // gold U; empty when unknown
  std::vector<std::vector<int>> paths;      // vocabulary ids
  std::vector<std::vector<int>> path_ext;   // extended ids
  std::vector<std::string> ext_tokens;      // spelling of ids >= vocab size
  int extended_size = 0;
};

// Lower-cased statement of a path; a zero-hop path is its start label.
std::vector<std::string> path_statement(const kg::ReasonPath& path, const kg::KnowledgeGraph& kg,
                                        const corpus::RelationTemplates& templates = {});

PreparedExample prepare_example(const corpus::Vocab& vocab, std::span<const std::string> context,
                                std::span<const std::string> response, std::span<const std::string> statement,
                                const std::vector<std::vector<std::string>>& paths);

// Placeholder when no candidate path exists.
std::vector<std::vector<std::string>> fallback_paths();

struct ForwardResult {
  Var kl;
  Var bow;
  Var nll;
  Var aggregate;                 // o_S,P
  std::optional<Var> statement;  // o_U
  PathDistribution distribution;
  std::vector<Var> xi;
  std::vector<Var> gates;
  std::vector<Var> distributions;
};

struct ForwardOptions {
  bool knowledge = true;   // KL + BOW
  bool decoder = true;     // NLL
};

// Training-mode forward pass: posterior mu, o_S = o_U when U is known.
ForwardResult forward_training(Tape& tape, ConverseModel& model, const PreparedExample& ex,
                               const ForwardOptions& options = {});

struct GenerationOptions {
  int max_tokens = 40;
  int beam_width = 1;
};

std::vector<std::string> generate_response(ConverseModel& model, const corpus::Vocab& vocab,
                                           const PreparedExample& ex, const GenerationOptions& options = {});

enum class ConverseStage { kImitation, kGeneration };

struct ConverseTrainConfig {
  int epochs = 5;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double grad_clip = 5.0;
  std::uint64_t seed = 7;
};

struct LossLog {
  int epoch = 0;
  double kl = 0.0;
  double bow = 0.0;
  double bce = 0.0;
  double nll = 0.0;
  double total = 0.0;
};

struct BatchLoss {
  double kl = 0.0;
  double bow = 0.0;
  double bce = 0.0;
  double nll = 0.0;
  double total = 0.0;
};

// One Adam step on a batch (>= 2 examples).  Imitation trains BOW + BCE,
// generation trains KL + BOW + BCE + NLL.
BatchLoss converse_update(ConverseModel& model, ad::Adam& adam, std::span<const PreparedExample* const> batch,
                          ConverseStage stage, double grad_clip, Rng& rng);

using LossCallback = std::function<void(const LossLog&)>;

std::vector<LossLog> train_converse(ConverseModel& model, std::span<const PreparedExample> train,
                                    ConverseStage stage, const ConverseTrainConfig& config,
                                    const LossCallback& on_epoch = {});

void write_loss_csv(std::ostream& os, std::span<const LossLog> log);

// Semantic-encoder summary of a token sequence.
std::vector<double> semantic_summary(ConverseModel& model, std::span<const int> ids);
// Posterior path weights for a prepared example.
std::vector<double> posterior_weights(ConverseModel& model, const PreparedExample& ex);
double mim_probability(ConverseModel& model, std::span<const double> x, std::span<const double> y);

// Pretrained vectors, one "token v1 ... vd" line each; returns how many rows were set.
std::size_t load_pretrained_embeddings(const std::string& path, const corpus::Vocab& vocab, ConverseModel& model);

}  // namespace dicr::converse
