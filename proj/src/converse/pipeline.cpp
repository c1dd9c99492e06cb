#include "dicr/converse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "dicr/ad/adam.hpp"
#include "dicr/error.hpp"
#include "dicr/util/text.hpp"

namespace dicr::converse {
namespace {

using corpus::Vocab;

bool is_content(const std::string& token, int id) {
  return id >= static_cast<int>(Vocab::specials().size()) && !text::is_punctuation_token(token);
}

std::vector<int> or_placeholder(std::span<const int> ids, int placeholder) {
  if (ids.empty()) return {placeholder};
  return {ids.begin(), ids.end()};
}

struct Encoded {
  SequenceEncoding context;
  std::vector<Var> path_states;
  Var o_paths;
  Var o_paths_semantic;
};

Encoded encode_inputs(Tape& tape, ConverseModel& model, const PreparedExample& ex) {
  if (ex.paths.empty()) throw PreconditionError("example has no candidate paths");
  Encoded e;
  e.context = encode_sequence(tape, model, model.context_encoder, or_placeholder(ex.context, Vocab::kPad));
  std::vector<Var> summaries;
  std::vector<Var> semantic;
  for (const auto& p : ex.paths) {
    auto enc = encode_sequence(tape, model, model.knowledge_encoder, p);
    e.path_states.push_back(enc.states);
    summaries.push_back(enc.summary);
    semantic.push_back(encode_sequence(tape, model, model.semantic_encoder, p).summary);
  }
  e.o_paths = ad::stack(summaries);
  e.o_paths_semantic = ad::stack(semantic);
  return e;
}

}  // namespace

std::vector<std::string> path_statement(const kg::ReasonPath& path, const kg::KnowledgeGraph& kg,
                                        const corpus::RelationTemplates& templates) {
  std::vector<std::string> out;
  if (path.length() == 0) {
    out = text::split_words(kg.entity_label(path.start()));
  } else {
    out = corpus::tokenize_path(path, kg, templates);
  }
  for (auto& t : out) t = text::casefold(t);
  return out;
}

std::vector<std::vector<std::string>> fallback_paths() { return {{"<unk>"}}; }

PreparedExample prepare_example(const Vocab& vocab, std::span<const std::string> context,
                                std::span<const std::string> response, std::span<const std::string> statement,
                                const std::vector<std::vector<std::string>>& paths) {
  PreparedExample ex;
  ex.context = vocab.encode(context);
  ex.response = vocab.encode(response);
  ex.statement = vocab.encode(statement);
  std::unordered_map<std::string, int> ext;
  auto ext_id = [&](const std::string& tok) {
    if (vocab.contains(tok)) return vocab.id(tok);
    auto it = ext.find(tok);
    if (it != ext.end()) return it->second;
    const int id = vocab.size() + static_cast<int>(ex.ext_tokens.size());
    ext.emplace(tok, id);
    ex.ext_tokens.push_back(tok);
    return id;
  };
  for (const auto& p : paths.empty() ? fallback_paths() : paths) {
    if (p.empty()) throw PreconditionError("candidate path without tokens");
    ex.paths.push_back(vocab.encode(p));
    std::vector<int> ids;
    for (const auto& t : p) ids.push_back(ext_id(t));
    ex.path_ext.push_back(std::move(ids));
  }
  for (std::size_t i = 0; i < response.size(); ++i) {
    const std::string& tok = response[i];
    int id = vocab.id(tok);
    if (id == Vocab::kUnk) {
      if (auto it = ext.find(tok); it != ext.end()) id = it->second;
    }
    ex.targets.push_back(id);
    if (is_content(tok, ex.response[i])) ex.bow_targets.push_back(ex.response[i]);
  }
  ex.targets.push_back(Vocab::kEos);
  ex.extended_size = vocab.size() + static_cast<int>(ex.ext_tokens.size());
  return ex;
}

ForwardResult forward_training(Tape& tape, ConverseModel& model, const PreparedExample& ex,
                               const ForwardOptions& options) {
  ForwardResult r;
  auto enc = encode_inputs(tape, model, ex);
  const Var o_c = enc.context.summary;
  auto o_y = encode_sequence(tape, model, model.knowledge_encoder, or_placeholder(ex.response, Vocab::kEos)).summary;
  r.distribution = path_distributions(tape, model, o_c, o_y, enc.o_paths, Mode::kTraining);
  const Var post = *r.distribution.posterior;
  r.kl = kl_loss(post, r.distribution.prior);
  r.bow = options.knowledge ? bow_loss(tape, model, post, enc.o_paths, ex.bow_targets) : tape.scalar(0.0);
  r.aggregate = semantic_aggregate(tape, model, enc.o_paths_semantic, o_c);
  if (!ex.statement.empty()) {
    r.statement = encode_sequence(tape, model, model.semantic_encoder, ex.statement).summary;
  }
  if (!options.decoder) {
    r.nll = tape.scalar(0.0);
    return r;
  }
  auto memory = make_memory(tape, model, enc.context.states, enc.path_states, ex.path_ext, post, ex.extended_size);
  Var h = merge_semantic(tape, model, r.statement ? *r.statement : r.aggregate, o_c);
  int prev = Vocab::kBos;
  for (int target : ex.targets) {
    auto step = decode_step(tape, model, memory, h, prev);
    r.distributions.push_back(step.distribution);
    r.xi.push_back(step.xi);
    r.gates.push_back(step.gate);
    h = advance(tape, model, h, target, step.v);
    prev = target;
  }
  r.nll = nll_loss(r.distributions, ex.targets);
  return r;
}

std::vector<std::string> generate_response(ConverseModel& model, const Vocab& vocab, const PreparedExample& ex,
                                           const GenerationOptions& options) {
  if (options.max_tokens < 1 || options.beam_width < 1) throw ConfigError("invalid generation options");
  Tape tape;
  auto enc = encode_inputs(tape, model, ex);
  const Var o_c = enc.context.summary;
  auto dist = path_distributions(tape, model, o_c, std::nullopt, enc.o_paths, Mode::kInference);
  auto o_sp = semantic_aggregate(tape, model, enc.o_paths_semantic, o_c);
  auto memory = make_memory(tape, model, enc.context.states, enc.path_states, ex.path_ext, dist.prior,
                            ex.extended_size);
  struct Hyp {
    std::vector<int> tokens;
    Var h;
    double score = 0.0;
    bool done = false;
  };
  std::vector<Hyp> beams{Hyp{{}, merge_semantic(tape, model, o_sp, o_c), 0.0, false}};
  const auto width = static_cast<std::size_t>(options.beam_width);
  for (int step = 0; step < options.max_tokens; ++step) {
    std::vector<Hyp> next;
    for (const auto& b : beams) {
      if (b.done) {
        next.push_back(b);
        continue;
      }
      const int prev = b.tokens.empty() ? Vocab::kBos : b.tokens.back();
      auto s = decode_step(tape, model, memory, b.h, prev);
      const auto p = s.distribution.value();
      std::vector<int> order(p.size());
      std::iota(order.begin(), order.end(), 0);
      // Never emit padding or a second <bos>.
      order.erase(std::remove_if(order.begin(), order.end(),
                                 [](int id) { return id == Vocab::kPad || id == Vocab::kBos; }),
                  order.end());
      const std::size_t k = std::min(width, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(), [&](int a, int c) {
        return p[static_cast<std::size_t>(a)] != p[static_cast<std::size_t>(c)]
                   ? p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(c)]
                   : a < c;
      });
      for (std::size_t j = 0; j < k; ++j) {
        const int tok = order[j];
        Hyp h2;
        h2.tokens = b.tokens;
        h2.score = b.score + std::log(std::max(p[static_cast<std::size_t>(tok)], kNllFloor));
        if (tok == Vocab::kEos) {
          h2.done = true;
          h2.h = b.h;
        } else {
          h2.tokens.push_back(tok);
          h2.h = advance(tape, model, b.h, tok, s.v);
        }
        next.push_back(std::move(h2));
      }
    }
    std::stable_sort(next.begin(), next.end(), [](const Hyp& a, const Hyp& b) { return a.score > b.score; });
    if (next.size() > width) next.resize(width);
    beams = std::move(next);
    if (std::all_of(beams.begin(), beams.end(), [](const Hyp& h) { return h.done; })) break;
  }
  std::vector<std::string> out;
  for (int id : beams.front().tokens) {
    out.push_back(id < vocab.size() ? vocab.token(id) : ex.ext_tokens[static_cast<std::size_t>(id - vocab.size())]);
  }
  return out;
}

BatchLoss converse_update(ConverseModel& model, ad::Adam& adam, std::span<const PreparedExample* const> batch,
                          ConverseStage stage, double grad_clip, Rng& rng) {
  if (batch.empty()) throw PreconditionError("empty batch");
  const bool gen = stage == ConverseStage::kGeneration;
  Tape tape;
  std::vector<Var> kls, bows, nlls;
  std::vector<Var> aggregates, statements;
  ForwardOptions fo;
  fo.decoder = gen;
  for (const PreparedExample* ex : batch) {
    auto r = forward_training(tape, model, *ex, fo);
    kls.push_back(r.kl);
    bows.push_back(r.bow);
    nlls.push_back(r.nll);
    if (r.statement) {
      aggregates.push_back(r.aggregate);
      statements.push_back(*r.statement);
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  BatchLoss out;
  std::vector<Var> terms;
  auto bow = ad::scale(ad::add_all(bows), inv);
  terms.push_back(bow);
  out.bow = bow.item();
  if (gen) {
    auto kl = ad::scale(ad::add_all(kls), inv);
    auto nll = ad::scale(ad::add_all(nlls), inv);
    terms.push_back(kl);
    terms.push_back(nll);
    out.kl = kl.item();
    out.nll = nll.item();
  }
  if (aggregates.size() >= 2) {
    const auto pairing = negative_pairing(aggregates.size(), rng);
    std::vector<MimPair> pos, neg;
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
      pos.push_back({aggregates[i], statements[i]});
      neg.push_back({aggregates[pairing[i]], statements[i]});
    }
    auto bce = mim_loss(tape, model, pos, neg);
    terms.push_back(bce);
    out.bce = bce.item();
  }
  auto total = ad::add_all(terms);
  out.total = total.item();
  if (!std::isfinite(out.total)) throw NumericError("non-finite conversation loss");
  model.store().zero_grad();
  tape.backward(total);
  if (grad_clip > 0.0) model.store().clip_grad_norm(grad_clip);
  adam.step();
  return out;
}

std::vector<LossLog> train_converse(ConverseModel& model, std::span<const PreparedExample> train,
                                    ConverseStage stage, const ConverseTrainConfig& config,
                                    const LossCallback& on_epoch) {
  if (train.size() < 2) throw ConfigError("conversation training needs at least 2 examples");
  if (config.epochs < 1 || config.batch_size < 2) throw ConfigError("epochs >= 1 and batch size >= 2 required");
  ad::AdamConfig ac;
  ac.learning_rate = config.learning_rate;
  ad::Adam adam(model.store(), ac);
  Rng rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto bs = static_cast<std::size_t>(config.batch_size);
  std::vector<LossLog> log;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    LossLog e;
    e.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size();) {
      std::size_t end = std::min(order.size(), b + bs);
      // A trailing single example joins the previous batch.
      if (order.size() - end == 1) end = order.size();
      std::vector<const PreparedExample*> batch;
      for (std::size_t k = b; k < end; ++k) batch.push_back(&train[order[k]]);
      const auto s = converse_update(model, adam, batch, stage, config.grad_clip, rng);
      e.kl += s.kl;
      e.bow += s.bow;
      e.bce += s.bce;
      e.nll += s.nll;
      e.total += s.total;
      ++batches;
      b = end;
    }
    const double inv = 1.0 / static_cast<double>(batches);
    e.kl *= inv;
    e.bow *= inv;
    e.bce *= inv;
    e.nll *= inv;
    e.total *= inv;
    log.push_back(e);
    if (on_epoch) on_epoch(e);
  }
  return log;
}

void write_loss_csv(std::ostream& os, std::span<const LossLog> log) {
  os << "epoch,kl,bow,bce,nll,total\n";
  for (const auto& e : log) {
    os << e.epoch << ',' << e.kl << ',' << e.bow << ',' << e.bce << ',' << e.nll << ',' << e.total << '\n';
  }
}

std::vector<double> semantic_summary(ConverseModel& model, std::span<const int> ids) {
  Tape tape;
  auto enc = encode_sequence(tape, model, model.semantic_encoder, ids);
  const auto v = enc.summary.value();
  return {v.begin(), v.end()};
}

std::vector<double> posterior_weights(ConverseModel& model, const PreparedExample& ex) {
  Tape tape;
  auto enc = encode_inputs(tape, model, ex);
  auto o_y = encode_sequence(tape, model, model.knowledge_encoder, or_placeholder(ex.response, Vocab::kEos)).summary;
  auto d = path_distributions(tape, model, enc.context.summary, o_y, enc.o_paths, Mode::kTraining);
  const auto v = d.posterior->value();
  return {v.begin(), v.end()};
}

double mim_probability(ConverseModel& model, std::span<const double> x, std::span<const double> y) {
  Tape tape;
  return mim_score(tape, model, tape.constant({x.begin(), x.end()}), tape.constant({y.begin(), y.end()})).item();
}

std::size_t load_pretrained_embeddings(const std::string& path, const Vocab& vocab, ConverseModel& model) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open embedding file " + path);
  const int dim = model.shape().word_dim;
  std::size_t set = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    if (static_cast<int>(v.size()) != dim) {
      throw ParseError("expected " + std::to_string(dim) + " values for '" + token + "'", lineno);
    }
    if (!vocab.contains(token)) continue;
    auto row = model.embedding->row(vocab.id(token));
    std::copy(v.begin(), v.end(), row.begin());
    ++set;
  }
  return set;
}

}  // namespace dicr::converse
