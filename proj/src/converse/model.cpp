#include "dicr/converse/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dicr/corpus/vocab.hpp"
#include "dicr/error.hpp"

namespace dicr::converse {
namespace {

Var embed(Tape& tape, ConverseModel& model, int id) {
  const int v = model.shape().vocab_size;
  return tape.row(*model.embedding, id >= 0 && id < v ? id : corpus::Vocab::kUnk);
}

Var gru_step(Tape& tape, const GruLayer& g, Var x, Var h) {
  return ad::gru_cell(x, h, tape.param(*g.wx), tape.param(*g.wh), tape.param(*g.bx), tape.param(*g.bh));
}

Var attention_scores(Tape& tape, const Attention& att, Var keys, Var query) {
  return ad::additive_scores(keys, ad::matvec(tape.param(*att.wq), query), tape.param(*att.v));
}

}  // namespace

ConverseModel::ConverseModel(const ConverseShape& s) : shape_(s) {
  if (s.vocab_size < static_cast<int>(corpus::Vocab::specials().size()) || s.word_dim < 1 || s.hidden < 1 ||
      s.layers < 1 || s.attention_dim < 1 || s.mlp_hidden < 1 || s.max_context_len < 1) {
    throw ConfigError("invalid conversation model shape");
  }
  const int sd = s.state_dim();
  embedding = &store_.add("embedding", s.vocab_size, s.word_dim);
  context_encoder = make_bigru("context_encoder", s.word_dim);
  knowledge_encoder = make_bigru("knowledge_encoder", s.word_dim);
  semantic_encoder = make_bigru("semantic_encoder", s.word_dim);
  w_kc = &store_.add("knowledge.w_kc", sd, sd);
  w_ky = &store_.add("knowledge.w_ky", sd, sd);
  w_bow = &store_.add("knowledge.w_bow", s.vocab_size, sd);
  w_sp = &store_.add("semantic.w_sp", sd, sd);
  semantic_attention = make_attention("semantic.attention", sd, sd);
  w_mim = &store_.add("semantic.w_mim", sd, sd);
  merge_w = &store_.add("merge.w", sd, 2 * sd);
  merge_b = &store_.add("merge.b", sd, 1);
  decoder = make_gru("decoder.gru", s.word_dim + sd, sd);
  context_attention = make_attention("decoder.context_attention", sd, sd);
  path_attention = make_attention("decoder.path_attention", sd, sd);
  gate_w = &store_.add("decoder.gate_w", 1, s.max_context_len + sd);
  gate_b = &store_.add("decoder.gate_b", 1, 1);
  out1_w = &store_.add("decoder.out1_w", s.mlp_hidden, 2 * sd);
  out1_b = &store_.add("decoder.out1_b", s.mlp_hidden, 1);
  out2_w = &store_.add("decoder.out2_w", s.vocab_size, s.mlp_hidden);
  out2_b = &store_.add("decoder.out2_b", s.vocab_size, 1);
  gen_w = &store_.add("decoder.gen_w", 1, s.word_dim + 2 * sd);
  gen_b = &store_.add("decoder.gen_b", 1, 1);
}

GruLayer ConverseModel::make_gru(const std::string& name, int input, int hidden) {
  GruLayer g;
  g.wx = &store_.add(name + ".wx", 3 * hidden, input);
  g.wh = &store_.add(name + ".wh", 3 * hidden, hidden);
  g.bx = &store_.add(name + ".bx", 3 * hidden, 1);
  g.bh = &store_.add(name + ".bh", 3 * hidden, 1);
  return g;
}

BiGru ConverseModel::make_bigru(const std::string& name, int input) {
  BiGru b;
  for (int l = 0; l < shape_.layers; ++l) {
    const int in = l == 0 ? input : shape_.state_dim();
    b.forward.push_back(make_gru(name + ".l" + std::to_string(l) + ".fw", in, shape_.hidden));
    b.backward.push_back(make_gru(name + ".l" + std::to_string(l) + ".bw", in, shape_.hidden));
  }
  return b;
}

Attention ConverseModel::make_attention(const std::string& name, int key, int query) {
  Attention a;
  a.wk = &store_.add(name + ".wk", shape_.attention_dim, key);
  a.wq = &store_.add(name + ".wq", shape_.attention_dim, query);
  a.v = &store_.add(name + ".v", shape_.attention_dim, 1);
  return a;
}

void ConverseModel::init(Rng& rng) {
  for (std::size_t i = 0; i < store_.size(); ++i) {
    auto& p = store_.at(i);
    if (p.name() == "embedding") {
      p.init_uniform(rng, 0.1);
    } else if (p.cols() == 1) {
      p.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(shape_.hidden)));
    } else {
      p.init_uniform(rng);
    }
  }
}

SequenceEncoding encode_sequence(Tape& tape, ConverseModel& model, const BiGru& encoder, std::span<const int> ids) {
  if (ids.empty()) throw PreconditionError("cannot encode an empty sequence");
  const std::size_t n = ids.size();
  const int hs = model.shape().hidden;
  std::vector<Var> inputs;
  inputs.reserve(n);
  for (int id : ids) inputs.push_back(embed(tape, model, id));
  Var last_forward;
  Var first_backward;
  for (std::size_t l = 0; l < encoder.forward.size(); ++l) {
    std::vector<Var> fw(n), bw(n);
    Var h = tape.zeros(hs);
    for (std::size_t j = 0; j < n; ++j) fw[j] = h = gru_step(tape, encoder.forward[l], inputs[j], h);
    h = tape.zeros(hs);
    for (std::size_t j = n; j-- > 0;) bw[j] = h = gru_step(tape, encoder.backward[l], inputs[j], h);
    for (std::size_t j = 0; j < n; ++j) {
      Var parts[] = {fw[j], bw[j]};
      inputs[j] = ad::concat(parts);
    }
    last_forward = fw[n - 1];
    first_backward = bw[0];
  }
  Var summary_parts[] = {last_forward, first_backward};
  return {ad::stack(inputs), ad::concat(summary_parts)};
}

PathDistribution path_distributions(Tape& tape, ConverseModel& model, Var o_c, std::optional<Var> o_y, Var o_paths,
                                    Mode mode) {
  if (o_paths.rows() < 1) throw PreconditionError("need at least one path encoding");
  PathDistribution out;
  out.prior = ad::softmax(ad::rows_dot(o_paths, ad::tanh(ad::matvec(tape.param(*model.w_kc), o_c))));
  if (mode == Mode::kTraining) {
    if (!o_y) throw ModeError("training mode needs the response encoding");
    out.posterior = ad::softmax(ad::rows_dot(o_paths, ad::tanh(ad::matvec(tape.param(*model.w_ky), *o_y))));
  }
  return out;
}

Var kl_loss(Var posterior, Var prior) {
  auto log_ratio = ad::sub(ad::log_floor(posterior, kPriorFloor), ad::log_floor(prior, kPriorFloor));
  return ad::dot(posterior, log_ratio);
}

Var bow_loss(Tape& tape, ConverseModel& model, Var posterior, Var o_paths, std::span<const int> targets) {
  if (targets.empty()) return tape.scalar(0.0);
  auto agg = ad::weighted_rows(o_paths, posterior);
  auto logp = ad::log_softmax(ad::matvec(tape.param(*model.w_bow), agg));
  std::vector<double> counts(logp.size(), 0.0);
  for (int t : targets) {
    if (t < 0 || t >= static_cast<int>(counts.size())) throw LookupError("bag-of-words target out of range");
    counts[static_cast<std::size_t>(t)] += 1.0;
  }
  return ad::scale(ad::dot(tape.constant(std::move(counts)), logp), -1.0 / static_cast<double>(targets.size()));
}

Var semantic_aggregate(Tape& tape, ConverseModel& model, Var o_paths, Var o_c) {
  if (o_paths.rows() < 1) throw PreconditionError("need at least one path encoding");
  auto query = ad::tanh(ad::matvec(tape.param(*model.w_sp), o_c));
  auto keys = ad::matmul_rows(o_paths, tape.param(*model.semantic_attention.wk));
  auto weights = ad::softmax(attention_scores(tape, model.semantic_attention, keys, query));
  return ad::weighted_rows(o_paths, weights);
}

Var mim_score(Tape& tape, ConverseModel& model, Var x, Var y) {
  const int sd = model.shape().state_dim();
  if (static_cast<int>(x.size()) != sd || static_cast<int>(y.size()) != sd) {
    throw ConfigError("mim_score: vectors must have the encoder state width");
  }
  auto logit = ad::dot(x, ad::matvec(tape.param(*model.w_mim), y));
  return ad::clamp(ad::sigmoid(logit), kMimEpsilon, 1.0 - kMimEpsilon);
}

Var mim_loss(Tape& tape, ConverseModel& model, std::span<const MimPair> positives,
             std::span<const MimPair> negatives) {
  if (positives.empty() || negatives.empty()) {
    throw PreconditionError("MIM loss needs at least one positive and one negative pair");
  }
  std::vector<Var> terms;
  for (const auto& p : positives) terms.push_back(ad::log(mim_score(tape, model, p.aggregate, p.statement)));
  for (const auto& n : negatives) {
    terms.push_back(ad::log(ad::one_minus(mim_score(tape, model, n.aggregate, n.statement))));
  }
  return ad::scale(ad::add_all(terms), -1.0 / static_cast<double>(positives.size() + negatives.size()));
}

std::vector<std::size_t> negative_pairing(std::size_t n, Rng& rng) {
  if (n < 2) throw PreconditionError("negative sampling needs a batch of at least 2");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  // Rotate the shuffled order by one: a derangement.
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[perm[i]] = perm[(i + 1) % n];
  return out;
}

Var merge_semantic(Tape& tape, ConverseModel& model, Var o_s, Var o_c) {
  Var parts[] = {o_s, o_c};
  return ad::tanh(ad::add(ad::matvec(tape.param(*model.merge_w), ad::concat(parts)), tape.param(*model.merge_b)));
}

DecoderMemory make_memory(Tape& tape, ConverseModel& model, Var context_states, std::vector<Var> path_states,
                          std::vector<std::vector<int>> path_ext_ids, Var mu, int extended_size) {
  if (path_states.empty() || path_states.size() != path_ext_ids.size() || mu.size() != path_states.size()) {
    throw PreconditionError("decoder memory needs aligned paths, token ids and weights");
  }
  DecoderMemory m;
  m.context_states = context_states;
  m.context_keys = ad::matmul_rows(context_states, tape.param(*model.context_attention.wk));
  for (Var s : path_states) m.path_keys.push_back(ad::matmul_rows(s, tape.param(*model.path_attention.wk)));
  m.path_states = std::move(path_states);
  m.path_ext_ids = std::move(path_ext_ids);
  m.mu = mu;
  m.extended_size = std::max(extended_size, model.shape().vocab_size);
  for (const auto& ids : m.path_ext_ids) {
    for (int id : ids) {
      if (id < 0 || id >= m.extended_size) throw LookupError("path token id outside the extended vocabulary");
    }
  }
  return m;
}

DecodeStep decode_step(Tape& tape, ConverseModel& model, const DecoderMemory& memory, Var h, int prev_token,
                       std::optional<double> force_xi, std::optional<double> force_gate) {
  DecodeStep out;
  out.context_attention = ad::softmax(attention_scores(tape, model.context_attention, memory.context_keys, h));
  auto v_c = ad::weighted_rows(memory.context_states, out.context_attention);

  std::vector<Var> path_vs;
  std::vector<Var> copy_parts;
  std::vector<int> copy_index;
  for (std::size_t i = 0; i < memory.path_states.size(); ++i) {
    auto d = ad::softmax(attention_scores(tape, model.path_attention, memory.path_keys[i], h));
    auto mu_i = ad::pick(memory.mu, static_cast<int>(i));
    path_vs.push_back(ad::mul_scalar(mu_i, ad::weighted_rows(memory.path_states[i], d)));
    copy_parts.push_back(ad::mul_scalar(mu_i, d));
    copy_index.insert(copy_index.end(), memory.path_ext_ids[i].begin(), memory.path_ext_ids[i].end());
  }
  auto v_p = ad::add_all(path_vs);

  Var gate_in[] = {ad::pad_or_truncate(out.context_attention, model.shape().max_context_len), v_p};
  out.gate = force_gate ? tape.scalar(*force_gate)
                        : ad::sigmoid(ad::add(ad::matvec(tape.param(*model.gate_w), ad::concat(gate_in)),
                                              tape.param(*model.gate_b)));
  out.v = ad::add(ad::mul_scalar(out.gate, v_c), ad::mul_scalar(ad::one_minus(out.gate), v_p));

  Var hv[] = {h, out.v};
  auto hidden = ad::tanh(ad::add(ad::matvec(tape.param(*model.out1_w), ad::concat(hv)), tape.param(*model.out1_b)));
  out.p_vocab = ad::softmax(ad::add(ad::matvec(tape.param(*model.out2_w), hidden), tape.param(*model.out2_b)));
  out.p_copy = ad::scatter_add(ad::concat(copy_parts), copy_index, memory.extended_size);

  Var gen_in[] = {embed(tape, model, prev_token), h, out.v};
  out.xi = force_xi ? tape.scalar(*force_xi)
                    : ad::sigmoid(ad::add(ad::matvec(tape.param(*model.gen_w), ad::concat(gen_in)),
                                          tape.param(*model.gen_b)));
  out.distribution = ad::add(ad::mul_scalar(out.xi, ad::pad_or_truncate(out.p_vocab, memory.extended_size)),
                             ad::mul_scalar(ad::one_minus(out.xi), out.p_copy));
  return out;
}

Var advance(Tape& tape, ConverseModel& model, Var h, int token, Var v) {
  Var parts[] = {embed(tape, model, token), v};
  return gru_step(tape, model.decoder, ad::concat(parts), h);
}

Var nll_loss(std::span<const Var> distributions, std::span<const int> targets) {
  if (distributions.empty() || distributions.size() != targets.size()) {
    throw PreconditionError("one distribution per gold token required");
  }
  std::vector<Var> terms;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    terms.push_back(ad::log_floor(ad::pick(distributions[t], targets[t]), kNllFloor));
  }
  return ad::scale(ad::add_all(terms), -1.0 / static_cast<double>(targets.size()));
}

}  // namespace dicr::converse
