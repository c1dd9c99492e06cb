#include "dicr/trainer/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "dicr/error.hpp"
#include "dicr/util/text.hpp"

namespace dicr::trainer {

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::kRec: return "rec";
    case Stage::kImitation: return "imitation";
    case Stage::kGeneration: return "gen";
    case Stage::kJoint: return "joint";
    case Stage::kAll: return "all";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  if (name == "rec") return Stage::kRec;
  if (name == "imitation") return Stage::kImitation;
  if (name == "gen") return Stage::kGeneration;
  if (name == "joint") return Stage::kJoint;
  if (name == "all") return Stage::kAll;
  throw ConfigError("unknown stage '" + name + "' (expected rec, imitation, gen, joint or all)");
}

std::string transform_name(RewardTransform t) { return t == RewardTransform::kLogit ? "logit" : "as-written"; }

RewardTransform parse_transform(const std::string& name) {
  if (name == "logit") return RewardTransform::kLogit;
  if (name == "as-written") return RewardTransform::kAsWritten;
  throw ConfigError("unknown reward_transform '" + name + "' (expected logit or as-written)");
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

struct Field {
  const char* key;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define DICR_INT_FIELD(name)                                                                     \
  Field {                                                                                        \
    #name, [](TrainConfig& c, const std::string& v) { c.name = parse_number<int>(#name, v); },   \
        [](const TrainConfig& c) { return std::to_string(c.name); }                              \
  }
#define DICR_DOUBLE_FIELD(name)                                                                      \
  Field {                                                                                            \
    #name, [](TrainConfig& c, const std::string& v) { c.name = parse_number<double>(#name, v); },    \
        [](const TrainConfig& c) { return format_double(c.name); }                                   \
  }
#define DICR_STRING_FIELD(name) \
  Field { #name, [](TrainConfig& c, const std::string& v) { c.name = v; }, [](const TrainConfig& c) { return c.name; } }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"stage", [](TrainConfig& c, const std::string& v) { c.stage = parse_stage(v); },
            [](const TrainConfig& c) { return stage_name(c.stage); }},
      Field{"seed", [](TrainConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); },
            [](const TrainConfig& c) { return std::to_string(c.seed); }},
      DICR_INT_FIELD(batch_size),
      DICR_DOUBLE_FIELD(learning_rate),
      DICR_DOUBLE_FIELD(grad_clip),
      DICR_INT_FIELD(epochs_rec),
      DICR_INT_FIELD(epochs_imitation),
      DICR_INT_FIELD(epochs_gen),
      DICR_INT_FIELD(epochs_joint),
      DICR_DOUBLE_FIELD(alpha),
      DICR_DOUBLE_FIELD(beta),
      DICR_DOUBLE_FIELD(gamma),
      Field{"reward_transform",
            [](TrainConfig& c, const std::string& v) { c.reward_transform = parse_transform(v); },
            [](const TrainConfig& c) { return transform_name(c.reward_transform); }},
      DICR_INT_FIELD(n_paths),
      DICR_INT_FIELD(history),
      DICR_INT_FIELD(max_path_len),
      DICR_INT_FIELD(action_cap),
      DICR_INT_FIELD(beam_width),
      DICR_INT_FIELD(embedding_dim),
      DICR_INT_FIELD(transe_epochs),
      DICR_DOUBLE_FIELD(transe_margin),
      DICR_DOUBLE_FIELD(transe_learning_rate),
      DICR_INT_FIELD(actor_hidden),
      DICR_INT_FIELD(critic_hidden),
      DICR_INT_FIELD(disc_hidden),
      DICR_DOUBLE_FIELD(entropy_weight),
      DICR_DOUBLE_FIELD(discount),
      DICR_INT_FIELD(word_dim),
      DICR_INT_FIELD(hidden),
      DICR_INT_FIELD(layers),
      DICR_INT_FIELD(attention_dim),
      DICR_INT_FIELD(mlp_hidden),
      DICR_INT_FIELD(max_context_len),
      DICR_INT_FIELD(max_response_tokens),
      DICR_INT_FIELD(min_freq),
      DICR_DOUBLE_FIELD(split_train),
      DICR_DOUBLE_FIELD(split_valid),
      DICR_DOUBLE_FIELD(split_test),
      DICR_STRING_FIELD(templates),
      DICR_STRING_FIELD(aliases),
      DICR_STRING_FIELD(word_vectors),
  };
  return table;
}

#undef DICR_INT_FIELD
#undef DICR_DOUBLE_FIELD
#undef DICR_STRING_FIELD

}  // namespace

void TrainConfig::validate() const {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive");
  };
  positive("batch_size", batch_size);
  positive("learning_rate", learning_rate);
  positive("grad_clip", grad_clip);
  positive("epochs_rec", epochs_rec);
  positive("epochs_imitation", epochs_imitation);
  positive("epochs_gen", epochs_gen);
  positive("epochs_joint", epochs_joint);
  positive("n_paths", n_paths);
  positive("history", history);
  positive("max_path_len", max_path_len);
  positive("action_cap", action_cap);
  positive("beam_width", beam_width);
  positive("embedding_dim", embedding_dim);
  positive("transe_epochs", transe_epochs);
  positive("transe_margin", transe_margin);
  positive("transe_learning_rate", transe_learning_rate);
  positive("actor_hidden", actor_hidden);
  positive("critic_hidden", critic_hidden);
  positive("disc_hidden", disc_hidden);
  positive("word_dim", word_dim);
  positive("hidden", hidden);
  positive("layers", layers);
  positive("attention_dim", attention_dim);
  positive("mlp_hidden", mlp_hidden);
  positive("max_context_len", max_context_len);
  positive("max_response_tokens", max_response_tokens);
  positive("min_freq", min_freq);
  positive("split_train", split_train);
  positive("split_valid", split_valid);
  positive("split_test", split_test);
  if (embedding_dim < 2) throw ConfigError("embedding_dim must be at least 2");
  if (action_cap < 2) throw ConfigError("action_cap must leave room for the self-loop");
  if (entropy_weight < 0.0) throw ConfigError("entropy_weight must be non-negative");
  if (discount < 0.0 || discount > 1.0) throw ConfigError("discount must lie in [0, 1]");
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) throw ConfigError("reward weights must be non-negative");
  if (alpha + beta + gamma > 1.0) throw ConfigError("alpha + beta + gamma must not exceed 1");
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void TrainConfig::write(std::ostream& os) const {
  for (const auto& f : fields()) os << f.key << " = " << f.get(*this) << '\n';
}

void TrainConfig::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write(os);
}

std::vector<std::string> TrainConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

TrainConfig parse_config(std::istream& is, TrainConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = text::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    const std::string key(text::trim(body.substr(0, eq)));
    const std::string value(text::trim(body.substr(eq + 1)));
    try {
      base.set(key, value);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return base;
}

TrainConfig load_config(const std::string& path, TrainConfig base) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config " + path);
  return parse_config(is, std::move(base));
}

reasoner::NetworkShape network_shape(const TrainConfig& c, std::int32_t num_entities, std::int32_t num_relations) {
  reasoner::NetworkShape s;
  s.dim = c.embedding_dim;
  s.history = c.history;
  s.actor_hidden = c.actor_hidden;
  s.critic_hidden = c.critic_hidden;
  s.disc_hidden = c.disc_hidden;
  s.num_entities = num_entities;
  s.num_relations = num_relations;
  return s;
}

converse::ConverseShape converse_shape(const TrainConfig& c, int vocab_size) {
  converse::ConverseShape s;
  s.vocab_size = vocab_size;
  s.word_dim = c.word_dim;
  s.hidden = c.hidden;
  s.layers = c.layers;
  s.attention_dim = c.attention_dim;
  s.mlp_hidden = c.mlp_hidden;
  s.max_context_len = c.max_context_len;
  return s;
}

reasoner::SearchLimits search_limits(const TrainConfig& c) {
  reasoner::SearchLimits l;
  l.history = c.history;
  l.max_len = static_cast<std::size_t>(c.max_path_len);
  l.action_cap = static_cast<std::size_t>(c.action_cap);
  return l;
}

reasoner::RecTrainConfig rec_config(const TrainConfig& c) {
  reasoner::RecTrainConfig r;
  r.limits = search_limits(c);
  r.weights = {c.alpha, c.beta, c.gamma};
  r.actor_critic.entropy_weight = c.entropy_weight;
  r.actor_critic.discount = c.discount;
  r.epochs = c.epochs_rec;
  r.batch_size = c.batch_size;
  r.learning_rate = c.learning_rate;
  r.grad_clip = c.grad_clip;
  r.seed = c.seed;
  return r;
}

converse::ConverseTrainConfig converse_config(const TrainConfig& c, converse::ConverseStage stage) {
  converse::ConverseTrainConfig out;
  out.epochs = stage == converse::ConverseStage::kImitation ? c.epochs_imitation : c.epochs_gen;
  out.batch_size = c.batch_size;
  out.learning_rate = c.learning_rate;
  out.grad_clip = c.grad_clip;
  out.seed = c.seed;
  return out;
}

kg::TransEConfig transe_config(const TrainConfig& c) {
  kg::TransEConfig t;
  t.dim = c.embedding_dim;
  t.epochs = c.transe_epochs;
  t.margin = c.transe_margin;
  t.learning_rate = c.transe_learning_rate;
  t.seed = c.seed;
  return t;
}

}  // namespace dicr::trainer
