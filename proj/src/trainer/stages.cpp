#include "dicr/trainer/stages.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "dicr/corpus/templates.hpp"
#include "dicr/trainer/bridge.hpp"
#include "dicr/util/rng.hpp"
#include "dicr/util/text.hpp"

namespace dicr::trainer {

namespace {

void say(const ProgressFn& progress, const std::string& line) {
  if (progress) progress(line);
}

void check_stop(const std::atomic<bool>* stop) {
  if (stop != nullptr && stop->load()) throw InterruptedError("interrupted");
}

std::ofstream open_log(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

void require_checkpoint(const RunLayout& layout, Stage needed, Stage requested) {
  if (!std::filesystem::exists(layout.checkpoint(needed))) {
    throw OrderingError(stage_name(needed), "stage '" + stage_name(requested) + "' needs the '" +
                                                stage_name(needed) + "' checkpoint " +
                                                layout.checkpoint(needed).string());
  }
}

kg::EmbeddingTable require_embeddings(const RunLayout& layout, Stage requested) {
  if (!std::filesystem::exists(layout.embeddings())) {
    throw OrderingError("embeddings", "stage '" + stage_name(requested) + "' needs " + layout.embeddings().string() +
                                          " (run `dicr train-embeddings` first)");
  }
  return kg::EmbeddingTable::load(layout.embeddings().string());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << v;
  return os.str();
}

// Runs `body`; on interruption writes the partial models next to the
// stage checkpoint before rethrowing.
template <class Body>
void with_interrupt_checkpoint(const RunLayout& layout, Stage stage, Models& models, bool with_converse, Body body) {
  try {
    body();
  } catch (const InterruptedError&) {
    auto partial = layout.checkpoint(stage);
    partial += ".partial";
    save_models(partial, models, with_converse);
    throw InterruptedError("interrupted during stage '" + stage_name(stage) + "', partial state in " +
                           partial.string());
  }
}

void run_rec(const StageContext& ctx, const RunData& data, const kg::EmbeddingTable& emb) {
  auto models = make_models(data, ctx.config);
  const auto rc = rec_config(ctx.config);
  std::vector<reasoner::EpochStats> curve;
  with_interrupt_checkpoint(ctx.layout, Stage::kRec, models, false, [&] {
    curve = reasoner::train_rec(models.nets, data.kg, emb, data.train_examples, data.valid_examples, rc, nullptr,
                                [&](const reasoner::EpochStats& e) {
                                  say(ctx.progress, "rec epoch " + std::to_string(e.epoch) + " reward " +
                                                        fmt(e.reward) + " disc " + fmt(e.disc_loss) +
                                                        " recall@1 " + fmt(e.recall1));
                                  check_stop(ctx.stop);
                                });
  });
  auto os = open_log(ctx.layout.log("rec"));
  reasoner::write_curve_csv(os, curve);
  save_models(ctx.layout.checkpoint(Stage::kRec), models, false);
}

void run_converse(const StageContext& ctx, const RunData& data, const kg::EmbeddingTable& emb, Stage stage) {
  auto models = make_models(data, ctx.config);
  if (stage == Stage::kImitation) {
    load_models(ctx.layout.checkpoint(Stage::kRec), models, false);
    if (!ctx.config.word_vectors.empty()) {
      const auto n = converse::load_pretrained_embeddings(ctx.config.word_vectors, data.vocab, models.converse);
      say(ctx.progress, "loaded " + std::to_string(n) + " pretrained word vectors");
    }
  } else {
    load_models(ctx.layout.checkpoint(Stage::kImitation), models, true);
  }
  const auto prepared = prepare_with_beams(data, emb, models.nets, data.train_examples, ctx.config);
  const auto cstage =
      stage == Stage::kImitation ? converse::ConverseStage::kImitation : converse::ConverseStage::kGeneration;
  std::vector<converse::LossLog> log;
  with_interrupt_checkpoint(ctx.layout, stage, models, true, [&] {
    log = converse::train_converse(models.converse, prepared, cstage, converse_config(ctx.config, cstage),
                                   [&](const converse::LossLog& l) {
                                     say(ctx.progress, stage_name(stage) + " epoch " + std::to_string(l.epoch) +
                                                           " kl " + fmt(l.kl) + " bow " + fmt(l.bow) + " bce " +
                                                           fmt(l.bce) + " nll " + fmt(l.nll));
                                     check_stop(ctx.stop);
                                   });
  });
  auto os = open_log(ctx.layout.log(stage_name(stage)));
  converse::write_loss_csv(os, log);
  save_models(ctx.layout.checkpoint(stage), models, true);
}

void run_joint(const StageContext& ctx, const RunData& data, const kg::EmbeddingTable& emb) {
  auto models = make_models(data, ctx.config);
  load_models(ctx.layout.checkpoint(Stage::kGeneration), models, true);
  JointResult result;
  with_interrupt_checkpoint(ctx.layout, Stage::kJoint, models, true,
                            [&] { result = joint_train(models, data, emb, ctx.config, ctx.progress, ctx.stop); });
  auto os = open_log(ctx.layout.log("joint"));
  os << "epoch,reward,disc_loss,converse_loss,hit\n";
  os << "0,,,," << result.hit_before << '\n';
  for (const auto& e : result.epochs) {
    os << e.epoch << ',' << e.reward << ',' << e.disc_loss << ',' << e.converse_loss << ',' << e.hit << '\n';
  }
  save_models(ctx.layout.checkpoint(Stage::kJoint), models, true);
}

}  // namespace

kg::TransEResult run_embeddings(const StageContext& ctx) {
  ctx.config.validate();
  const std::string hint = "run `dicr prepare` or `dicr toygen` first";
  if (!std::filesystem::exists(ctx.layout.kg())) throw IoError("missing " + ctx.layout.kg().string() + " (" + hint + ")");
  const auto kg = kg::KnowledgeGraph::load_tsv(ctx.layout.kg().string());
  auto result = kg::train_embeddings(kg, transe_config(ctx.config));
  result.table.save(ctx.layout.embeddings().string());
  auto os = open_log(ctx.layout.log("embeddings"));
  os << "epoch,loss\n";
  for (std::size_t i = 0; i < result.epoch_loss.size(); ++i) os << i + 1 << ',' << result.epoch_loss[i] << '\n';
  if (!result.epoch_loss.empty()) say(ctx.progress, "embeddings final loss " + fmt(result.epoch_loss.back()));
  return result;
}

std::optional<Stage> prerequisite(Stage stage) {
  switch (stage) {
    case Stage::kImitation: return Stage::kRec;
    case Stage::kGeneration: return Stage::kImitation;
    case Stage::kJoint: return Stage::kGeneration;
    default: return std::nullopt;
  }
}

void run_stage(Stage stage, const StageContext& ctx) {
  ctx.config.validate();
  if (stage == Stage::kAll) {
    if (!std::filesystem::exists(ctx.layout.embeddings())) run_embeddings(ctx);
    for (auto s : {Stage::kRec, Stage::kImitation, Stage::kGeneration, Stage::kJoint}) run_stage(s, ctx);
    return;
  }
  if (const auto pre = prerequisite(stage)) require_checkpoint(ctx.layout, *pre, stage);
  const auto emb = require_embeddings(ctx.layout, stage);
  const auto data = load_run(ctx.layout, ctx.config);
  ctx.config.save(ctx.layout.config().string());
  say(ctx.progress, "stage " + stage_name(stage));
  switch (stage) {
    case Stage::kRec: run_rec(ctx, data, emb); break;
    case Stage::kImitation:
    case Stage::kGeneration: run_converse(ctx, data, emb, stage); break;
    case Stage::kJoint: run_joint(ctx, data, emb); break;
    case Stage::kAll: break;
  }
}

eval::InferenceSetup inference_setup(const RunData& data, const kg::EmbeddingTable& emb, Models& models,
                                     const TrainConfig& config) {
  eval::InferenceSetup s;
  s.kg = &data.kg;
  s.embeddings = &emb;
  s.nets = &models.nets;
  s.model = &models.converse;
  s.vocab = &data.vocab;
  s.templates = &data.templates;
  s.aliases = &data.aliases;
  s.limits = search_limits(config);
  s.beam_width = static_cast<std::size_t>(config.beam_width);
  s.n_paths = static_cast<std::size_t>(config.n_paths);
  s.n_ranked = std::max<std::size_t>(25, s.n_paths);
  s.generation.max_tokens = config.max_response_tokens;
  return s;
}

std::vector<converse::PreparedExample> prepare_with_beams(const RunData& data, const kg::EmbeddingTable& emb,
                                                          const reasoner::PolicyNetworks& nets,
                                                          std::span<const corpus::TrainingExample> examples,
                                                          const TrainConfig& config,
                                                          std::vector<std::vector<kg::ReasonPath>>* beams) {
  const auto limits = search_limits(config);
  std::vector<converse::PreparedExample> out;
  out.reserve(examples.size());
  if (beams != nullptr) beams->assign(examples.size(), {});
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    std::vector<kg::ReasonPath> beam;
    if (const auto start = reasoner::episode_start(ex, emb)) {
      beam = reasoner::beam_search(nets, data.kg, emb, *start, limits, static_cast<std::size_t>(config.beam_width),
                                   static_cast<std::size_t>(config.n_paths));
    }
    std::vector<std::vector<std::string>> statements;
    for (const auto& p : beam) statements.push_back(converse::path_statement(p, data.kg, data.templates));
    if (statements.empty()) statements = converse::fallback_paths();
    out.push_back(converse::prepare_example(data.vocab, ex.context, ex.response, gold_statement(ex), statements));
    if (beams != nullptr) (*beams)[i] = std::move(beam);
  }
  return out;
}

std::optional<double> generation_hit(const RunData& data, const kg::EmbeddingTable& emb, Models& models,
                                     std::span<const corpus::TrainingExample> examples, const TrainConfig& config) {
  const auto setup = inference_setup(data, emb, models, config);
  const auto records = eval::evaluate_examples(setup, examples);
  return eval::hit_rate(records, data.kg);
}

JointResult joint_train(Models& models, const RunData& data, const kg::EmbeddingTable& emb, const TrainConfig& config,
                        const ProgressFn& progress, const std::atomic<bool>* stop) {
  const auto hash_before = content_hash(data);
  const auto rc = rec_config(config);
  const auto items = reasoner::make_rec_items(data.train_examples, emb, rc.limits);
  if (items.empty()) throw ConfigError("no training example has a gold path and a start entity");
  const auto& valid = data.valid_examples.empty() ? data.train_examples : data.valid_examples;

  JointResult result;
  result.hit_before = generation_hit(data, emb, models, valid, config).value_or(0.0);
  say(progress, "joint hit before " + fmt(result.hit_before));

  ad::AdamConfig ac;
  ac.learning_rate = config.learning_rate;
  ad::Adam rec_adam(models.nets.store(), ac);
  ad::Adam conv_adam(models.converse.store(), ac);
  Rng rng(config.seed);
  const auto bs = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs_joint; ++epoch) {
    JointEpochLog log;
    log.epoch = epoch;

    // Beam refresh and the conversation-side quantities the rewards read.
    std::vector<std::vector<kg::ReasonPath>> beams;
    const auto prepared = prepare_with_beams(data, emb, models.nets, data.train_examples, config, &beams);
    std::vector<std::vector<double>> mu(prepared.size()), o_u(prepared.size());
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      if (!beams[i].empty()) mu[i] = converse::posterior_weights(models.converse, prepared[i]);
      if (!prepared[i].statement.empty()) o_u[i] = converse::semantic_summary(models.converse, prepared[i].statement);
    }
    std::map<std::tuple<kg::EntityId, kg::RelationId, kg::EntityId>, std::vector<double>> segments;

    reasoner::BridgeHooks hooks;
    hooks.knowledge = [&](std::size_t i, const kg::ReasonPath& path) {
      if (beams[i].empty()) return 0.0;
      return bridge_knowledge_reward(path, beams[i], mu[i], config.reward_transform);
    };
    hooks.semantic = [&](std::size_t i, kg::EntityId h, kg::RelationId r, kg::EntityId t) {
      if (o_u[i].empty()) {
        ++log.missing_statement;
        return 0.0;
      }
      auto key = std::make_tuple(h, r, t);
      auto it = segments.find(key);
      if (it == segments.end()) {
        std::vector<std::string> tokens;
        for (const auto& tok : corpus::tokenize_hop(h, r, t, data.kg, data.templates)) tokens.push_back(text::casefold(tok));
        it = segments.emplace(key, converse::semantic_summary(models.converse, data.vocab.encode(tokens))).first;
      }
      return bridge_semantic_reward_encoded(models.converse, it->second, o_u[i], config.reward_transform);
    };

    // (a) reasoner epoch under the joint reward.
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += bs) {
      std::vector<reasoner::RecItem> batch;
      for (std::size_t k = b; k < std::min(order.size(), b + bs); ++k) batch.push_back(items[order[k]]);
      const auto s = reasoner::rec_update(models.nets, rec_adam, data.kg, emb, batch, rc, &hooks, rng);
      if (!std::isfinite(s.reward) || std::abs(s.reward) > kDivergenceLimit) {
        throw NumericError("joint training diverged: mean reward " + std::to_string(s.reward));
      }
      log.reward += s.reward;
      log.disc_loss += s.disc_loss;
      ++batches;
    }
    log.reward /= static_cast<double>(batches);
    log.disc_loss /= static_cast<double>(batches);

    // (b) conversation epoch on the refreshed paths.
    if (prepared.size() >= 2) {
      std::vector<std::size_t> corder(prepared.size());
      std::iota(corder.begin(), corder.end(), 0);
      rng.shuffle(corder);
      std::size_t cbatches = 0;
      for (std::size_t b = 0; b < corder.size();) {
        std::size_t end = std::min(corder.size(), b + std::max<std::size_t>(bs, 2));
        if (corder.size() - end == 1) end = corder.size();
        std::vector<const converse::PreparedExample*> batch;
        for (std::size_t k = b; k < end; ++k) batch.push_back(&prepared[corder[k]]);
        const auto s = converse::converse_update(models.converse, conv_adam, batch,
                                                 converse::ConverseStage::kGeneration, config.grad_clip, rng);
        log.converse_loss += s.total;
        ++cbatches;
        b = end;
      }
      log.converse_loss /= static_cast<double>(cbatches);
    }

    log.hit = generation_hit(data, emb, models, valid, config).value_or(0.0);
    say(progress, "joint epoch " + std::to_string(epoch) + " reward " + fmt(log.reward) + " disc " +
                      fmt(log.disc_loss) + " conv " + fmt(log.converse_loss) + " hit " + fmt(log.hit));
    result.epochs.push_back(log);
    check_stop(stop);
  }
  result.hit_after = result.epochs.empty() ? result.hit_before : result.epochs.back().hit;
  say(progress, "joint hit after " + fmt(result.hit_after));
  if (content_hash(data) != hash_before) throw Error("joint training modified the KG or corpus");
  return result;
}

}  // namespace dicr::trainer
