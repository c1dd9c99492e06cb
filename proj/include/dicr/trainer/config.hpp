#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dicr/converse/pipeline.hpp"
#include "dicr/kg/embedding.hpp"
#include "dicr/reasoner/training.hpp"

namespace dicr::trainer {

enum class Stage { kRec, kImitation, kGeneration, kJoint, kAll };

// "rec", "imitation", "gen", "joint", "all"
std::string stage_name(Stage stage);
Stage parse_stage(const std::string& name);

enum class RewardTransform { kLogit, kAsWritten };

std::string transform_name(RewardTransform t);
RewardTransform parse_transform(const std::string& name);

struct TrainConfig {
  Stage stage = Stage::kAll;
  std::uint64_t seed = 7;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double grad_clip = 5.0;

  int epochs_rec = 10;
  int epochs_imitation = 5;
  int epochs_gen = 5;
  int epochs_joint = 2;

  double alpha = 0.006;
  double beta = 0.001;
  double gamma = 0.006;
  RewardTransform reward_transform = RewardTransform::kLogit;

  int n_paths = 10;
  int history = 1;
  int max_path_len = 3;
  int action_cap = 250;
  int beam_width = 25;

  // TransE
  int embedding_dim = 128;
  int transe_epochs = 100;
  double transe_margin = 1.0;
  double transe_learning_rate = 0.01;

  // reasoner networks
  int actor_hidden = 256;
  int critic_hidden = 256;
  int disc_hidden = 128;
  double entropy_weight = 0.01;
  double discount = 1.0;

  // conversation model
  int word_dim = 300;
  int hidden = 400;
  int layers = 2;
  int attention_dim = 400;
  int mlp_hidden = 800;
  int max_context_len = 128;
  int max_response_tokens = 40;
  int min_freq = 2;

  // corpus split, train:valid:test
  double split_train = 7.0;
  double split_valid = 1.5;
  double split_test = 1.5;

  // Optional files; empty means unused.
  std::string templates;
  std::string aliases;
  std::string word_vectors;

  // Throws ConfigError on the first violated constraint.
  void validate() const;

  // Sets one field from its text form; ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  // Every field, one "key = value" per line, in declaration order.
  void write(std::ostream& os) const;
  void save(const std::string& path) const;

  static std::vector<std::string> keys();

  bool operator==(const TrainConfig&) const = default;
};

// Flat key=value text; '#' starts a comment.  Values not mentioned keep
// their defaults.
TrainConfig parse_config(std::istream& is, TrainConfig base = {});
TrainConfig load_config(const std::string& path, TrainConfig base = {});

reasoner::NetworkShape network_shape(const TrainConfig& config, std::int32_t num_entities,
                                     std::int32_t num_relations);
converse::ConverseShape converse_shape(const TrainConfig& config, int vocab_size);
reasoner::SearchLimits search_limits(const TrainConfig& config);
reasoner::RecTrainConfig rec_config(const TrainConfig& config);
converse::ConverseTrainConfig converse_config(const TrainConfig& config, converse::ConverseStage stage);
kg::TransEConfig transe_config(const TrainConfig& config);

}  // namespace dicr::trainer
