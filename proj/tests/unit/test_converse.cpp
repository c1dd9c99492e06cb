#include <doctest.h>

#include <cmath>
#include <set>

#include "dicr/converse/model.hpp"
#include "dicr/converse/pipeline.hpp"
#include "dicr/corpus/vocab.hpp"
#include "dicr/error.hpp"
#include "dicr/util/text.hpp"
#include "support/grad_check.hpp"

using namespace dicr;
using namespace dicr::converse;

namespace {

struct Tiny {
  corpus::Vocab vocab;
  ConverseModel model;
  PreparedExample ex;
  PreparedExample other;
};

std::vector<std::string> w(const std::string& s) { return text::split(s, ' '); }

Tiny make_tiny(std::uint64_t seed) {
  const std::vector<std::vector<std::string>> seqs = {w("<usr> i like alien"), w("try aliens it has ripley"),
                                                      w("alien stars ripley .")};
  auto vocab = corpus::Vocab::build(seqs, 1);
  ConverseShape shape;
  shape.vocab_size = vocab.size();
  shape.word_dim = 4;
  shape.hidden = 3;
  shape.layers = 1;
  shape.attention_dim = 4;
  shape.mlp_hidden = 5;
  shape.max_context_len = 8;
  ConverseModel model(shape);
  Rng rng(seed);
  model.init(rng);
  const std::vector<std::vector<std::string>> paths = {w("alien stars ripley ."), w("alien is directed by scott .")};
  auto ex = prepare_example(vocab, w("<usr> i like alien"), w("try aliens it has ripley"), w("alien stars ripley ."),
                            paths);
  auto other = prepare_example(vocab, w("<usr> alien"), w("ripley"), w("alien is directed by scott ."), paths);
  return Tiny{std::move(vocab), std::move(model), std::move(ex), std::move(other)};
}

double total(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void expect_grad(ConverseModel& model, const std::function<Var(Tape&)>& loss) {
  const auto r = testing::grad_check(model.store(), loss, [](const std::string&) { return true; }, 1e-5);
  INFO(r.worst);
  CHECK(r.checked > 0);
  CHECK(r.max_rel_error < 1e-4);
}

}  // namespace

TEST_CASE("prepared examples give out-of-vocabulary path tokens extended ids") {
  auto t = make_tiny(1);
  const int v = t.vocab.size();
  CHECK(t.ex.targets.back() == corpus::Vocab::kEos);
  CHECK(t.ex.extended_size > v);
  std::set<int> ext;
  for (const auto& p : t.ex.path_ext) {
    for (int id : p) {
      CHECK(id < t.ex.extended_size);
      if (id >= v) ext.insert(id);
    }
  }
  CHECK(ext.size() == t.ex.ext_tokens.size());
  CHECK(t.ex.paths.size() == 2);
}

TEST_CASE("training mode requires the response encoding") {
  auto t = make_tiny(2);
  Tape tape;
  const int d = t.model.shape().state_dim();
  auto o_c = tape.constant(std::vector<double>(static_cast<std::size_t>(d), 0.1));
  auto o_p = tape.constant(std::vector<double>(static_cast<std::size_t>(2 * d), 0.2), 2, d);
  CHECK_THROWS_AS(path_distributions(tape, t.model, o_c, std::nullopt, o_p, Mode::kTraining), ModeError);
  const auto inf = path_distributions(tape, t.model, o_c, std::nullopt, o_p, Mode::kInference);
  CHECK_FALSE(inf.posterior.has_value());
}

TEST_CASE("fallback paths are a single placeholder") {
  const auto f = fallback_paths();
  CHECK(f.size() == 1);
  CHECK(!f[0].empty());
}

TEST_SUITE("invariants") {
  TEST_CASE("prior and posterior are normalized and KL is non-negative with KL(p, p) = 0") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      auto t = make_tiny(static_cast<std::uint64_t>(trial + 10));
      const int d = t.model.shape().state_dim();
      const int k = 1 + static_cast<int>(rng.index(6));
      std::vector<double> c(static_cast<std::size_t>(d)), y(c.size()), p(static_cast<std::size_t>(k * d));
      for (auto* v : {&c, &y, &p}) {
        for (auto& x : *v) x = rng.uniform(-3.0, 3.0);
      }
      Tape tape;
      const auto dist = path_distributions(tape, t.model, tape.constant(c), tape.constant(y),
                                           tape.constant(p, k, d), Mode::kTraining);
      CHECK(std::abs(total(dist.prior.value()) - 1.0) <= 1e-6);
      CHECK(std::abs(total(dist.posterior->value()) - 1.0) <= 1e-6);
      CHECK(kl_loss(*dist.posterior, dist.prior).item() >= -1e-12);
      CHECK(std::abs(kl_loss(dist.prior, dist.prior).item()) <= 1e-12);
    }
  }

  TEST_CASE("decoder output mixes into a distribution over the extended vocabulary") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto t = make_tiny(seed);
      Tape tape;
      const auto r = forward_training(tape, t.model, t.ex);
      REQUIRE(r.distributions.size() == t.ex.targets.size());
      for (std::size_t i = 0; i < r.distributions.size(); ++i) {
        const auto p = r.distributions[i].value();
        CHECK(p.size() == static_cast<std::size_t>(t.ex.extended_size));
        CHECK(std::abs(total(p) - 1.0) <= 1e-6);
        for (double x : p) CHECK(x >= 0.0);
        const double xi = r.xi[i].item(), g = r.gates[i].item();
        CHECK((xi >= 0.0 && xi <= 1.0));
        CHECK((g >= 0.0 && g <= 1.0));
      }
      // Forced switches isolate the vocabulary and copy distributions.
      const auto mem = make_memory(tape, t.model, encode_sequence(tape, t.model, t.model.context_encoder, t.ex.context).states,
                                   {encode_sequence(tape, t.model, t.model.knowledge_encoder, t.ex.path_ext[0]).states},
                                   {t.ex.path_ext[0]}, tape.constant({1.0}), t.ex.extended_size);
      auto h = tape.constant(std::vector<double>(static_cast<std::size_t>(t.model.shape().state_dim()), 0.0));
      const auto s = decode_step(tape, t.model, mem, h, corpus::Vocab::kBos, 1.0, 0.0);
      CHECK(std::abs(total(s.distribution.value()) - 1.0) <= 1e-6);
      for (int id = t.vocab.size(); id < t.ex.extended_size; ++id) {
        CHECK(s.distribution.value()[static_cast<std::size_t>(id)] == 0.0);
      }
    }
  }

  TEST_CASE("negative pairing is a derangement") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 + rng.index(40);
      const auto pairing = negative_pairing(n, rng);
      std::set<std::size_t> seen(pairing.begin(), pairing.end());
      CHECK(seen.size() == n);
      for (std::size_t i = 0; i < n; ++i) CHECK(pairing[i] != i);
    }
    CHECK_THROWS_AS(negative_pairing(1, rng), PreconditionError);
  }
}

TEST_SUITE("gradients") {
  TEST_CASE("KL between posterior and prior") {
    auto t = make_tiny(21);
    expect_grad(t.model, [&](Tape& tape) {
      ForwardOptions o;
      o.knowledge = false;
      o.decoder = false;
      return forward_training(tape, t.model, t.ex, o).kl;
    });
  }

  TEST_CASE("bag-of-words loss") {
    auto t = make_tiny(22);
    REQUIRE(!t.ex.bow_targets.empty());
    expect_grad(t.model, [&](Tape& tape) {
      ForwardOptions o;
      o.decoder = false;
      return forward_training(tape, t.model, t.ex, o).bow;
    });
  }

  TEST_CASE("mutual-information discriminator loss") {
    auto t = make_tiny(23);
    expect_grad(t.model, [&](Tape& tape) {
      ForwardOptions o;
      o.knowledge = false;
      o.decoder = false;
      const auto a = forward_training(tape, t.model, t.ex, o);
      const auto b = forward_training(tape, t.model, t.other, o);
      const MimPair pos[] = {{a.aggregate, *a.statement}, {b.aggregate, *b.statement}};
      const MimPair neg[] = {{a.aggregate, *b.statement}, {b.aggregate, *a.statement}};
      return mim_loss(tape, t.model, pos, neg);
    });
  }

  TEST_CASE("decoder negative log-likelihood") {
    auto t = make_tiny(24);
    expect_grad(t.model, [&](Tape& tape) { return forward_training(tape, t.model, t.ex).nll; });
  }
}
