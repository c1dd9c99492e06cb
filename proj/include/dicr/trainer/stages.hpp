#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dicr/converse/pipeline.hpp"
#include "dicr/error.hpp"
#include "dicr/eval/evaluate.hpp"
#include "dicr/trainer/workspace.hpp"

namespace dicr::trainer {

// A stop request was honoured; the partial state was checkpointed.
class InterruptedError : public Error {
 public:
  using Error::Error;
};

using ProgressFn = std::function<void(const std::string&)>;

struct StageContext {
  RunLayout layout;
  TrainConfig config;
  ProgressFn progress;
  // Polled between epochs.
  const std::atomic<bool>* stop = nullptr;
};

// TransE embeddings -> embeddings.bin and embeddings.csv.
kg::TransEResult run_embeddings(const StageContext& ctx);

// rec -> rec.ckpt, imitation -> imitation.ckpt, gen -> gen.ckpt,
// joint -> joint.ckpt; `all` runs the four in order (training embeddings
// first if they are missing).  OrderingError names the missing stage.
void run_stage(Stage stage, const StageContext& ctx);

// Stage whose checkpoint `stage` starts from; empty for rec.
std::optional<Stage> prerequisite(Stage stage);

eval::InferenceSetup inference_setup(const RunData& data, const kg::EmbeddingTable& emb, Models& models,
                                     const TrainConfig& config);

// Conversation examples for `examples` with candidate paths from the current
// reasoner; responses and gold statements are kept.
std::vector<converse::PreparedExample> prepare_with_beams(const RunData& data, const kg::EmbeddingTable& emb,
                                                          const reasoner::PolicyNetworks& nets,
                                                          std::span<const corpus::TrainingExample> examples,
                                                          const TrainConfig& config,
                                                          std::vector<std::vector<kg::ReasonPath>>* beams = nullptr);

// Hit of greedy generation on `examples`; empty when no example has gold items.
std::optional<double> generation_hit(const RunData& data, const kg::EmbeddingTable& emb, Models& models,
                                     std::span<const corpus::TrainingExample> examples, const TrainConfig& config);

struct JointEpochLog {
  int epoch = 0;
  double reward = 0.0;
  double disc_loss = 0.0;
  double converse_loss = 0.0;
  double hit = 0.0;
  // Semantic rewards skipped for lack of a gold statement.
  std::size_t missing_statement = 0;
};

struct JointResult {
  double hit_before = 0.0;
  double hit_after = 0.0;
  std::vector<JointEpochLog> epochs;
};

inline constexpr double kDivergenceLimit = 1e3;

// Alternates one reasoner epoch under the joint reward with one
// conversation epoch on refreshed beam paths, config.epochs_joint times.
// Hit is measured on the validation split.  NumericError when the mean
// |reward| of a batch exceeds kDivergenceLimit.
JointResult joint_train(Models& models, const RunData& data, const kg::EmbeddingTable& emb, const TrainConfig& config,
                        const ProgressFn& progress = {}, const std::atomic<bool>* stop = nullptr);

}  // namespace dicr::trainer
