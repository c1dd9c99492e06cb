#include "dicr/trainer/workspace.hpp"

#include <sstream>

#include "dicr/ad/parameter.hpp"
#include "dicr/corpus/split.hpp"
#include "dicr/error.hpp"
#include "dicr/util/rng.hpp"
#include "dicr/util/text.hpp"

namespace dicr::trainer {

namespace {

void require_file(const std::filesystem::path& p, const std::string& hint) {
  if (!std::filesystem::exists(p)) throw IoError("missing " + p.string() + " (" + hint + ")");
}

corpus::RelationTemplates load_templates(const TrainConfig& config) {
  return config.templates.empty() ? corpus::RelationTemplates{} : corpus::RelationTemplates::load_tsv(config.templates);
}

void fnv(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

PrepareSummary prepare_run(const kg::KnowledgeGraph& kg, const corpus::LoadedCorpus& corpus, const RunLayout& layout,
                           const TrainConfig& config) {
  config.validate();
  std::filesystem::create_directories(layout.dir);
  const auto split = corpus::split_corpus(corpus.dialogs, {config.split_train, config.split_valid, config.split_test},
                                          config.seed);
  const auto templates = load_templates(config);
  const auto examples = corpus::build_examples(split.train, kg, templates, config.max_path_len);
  std::vector<std::vector<std::string>> sequences;
  for (const auto& ex : examples) {
    sequences.push_back(ex.context);
    sequences.push_back(ex.response);
  }
  const auto vocab = corpus::Vocab::build(sequences, config.min_freq);

  kg.save_tsv(layout.kg().string());
  corpus::save_corpus(layout.split("train").string(), split.train, kg);
  corpus::save_corpus(layout.split("valid").string(), split.valid, kg);
  corpus::save_corpus(layout.split("test").string(), split.test, kg);
  vocab.save(layout.vocab().string());

  PrepareSummary s;
  s.dialogs = corpus.dialogs.size();
  s.train = split.train.size();
  s.valid = split.valid.size();
  s.test = split.test.size();
  s.dropped_mentions = corpus.dropped_mentions;
  s.dropped_items = corpus.dropped_items;
  s.train_examples = examples.size();
  for (const auto& ex : examples) s.train_gold_paths += ex.gold_path.has_value() ? 1 : 0;
  s.vocab_size = vocab.size();
  return s;
}

PrepareSummary prepare_run(const std::string& kg_path, const std::string& corpus_path, const RunLayout& layout,
                           const TrainConfig& config) {
  require_file(kg_path, "knowledge graph");
  require_file(corpus_path, "corpus");
  const auto kg = kg::KnowledgeGraph::load_tsv(kg_path);
  const auto corpus = corpus::load_corpus(corpus_path, kg);
  return prepare_run(kg, corpus, layout, config);
}

std::string format_summary(const PrepareSummary& s) {
  std::ostringstream os;
  os << "dialogs " << s.dialogs << " (train " << s.train << ", valid " << s.valid << ", test " << s.test << ")\n"
     << "dropped mentions " << s.dropped_mentions << ", dropped items " << s.dropped_items << '\n'
     << "train examples " << s.train_examples << ", with gold path " << s.train_gold_paths << '\n'
     << "vocabulary " << s.vocab_size << '\n';
  return os.str();
}

const std::vector<corpus::TrainingExample>& RunData::examples(const std::string& split) const {
  if (split == "train") return train_examples;
  if (split == "valid") return valid_examples;
  if (split == "test") return test_examples;
  throw ConfigError("unknown split '" + split + "' (expected train, valid or test)");
}

RunData load_run(const RunLayout& layout, const TrainConfig& config) {
  const std::string hint = "run `dicr prepare` or `dicr toygen` first";
  require_file(layout.kg(), hint);
  for (const char* name : {"train", "valid", "test"}) require_file(layout.split(name), hint);
  require_file(layout.vocab(), hint);

  RunData d;
  d.kg = kg::KnowledgeGraph::load_tsv(layout.kg().string());
  d.train = corpus::load_corpus(layout.split("train").string(), d.kg).dialogs;
  d.valid = corpus::load_corpus(layout.split("valid").string(), d.kg).dialogs;
  d.test = corpus::load_corpus(layout.split("test").string(), d.kg).dialogs;
  d.vocab = corpus::Vocab::load(layout.vocab().string());
  d.templates = load_templates(config);
  if (!config.aliases.empty()) d.aliases = kg::load_alias_tsv(config.aliases);
  d.train_examples = corpus::build_examples(d.train, d.kg, d.templates, config.max_path_len);
  d.valid_examples = corpus::build_examples(d.valid, d.kg, d.templates, config.max_path_len);
  d.test_examples = corpus::build_examples(d.test, d.kg, d.templates, config.max_path_len);
  return d;
}

std::uint64_t content_hash(const RunData& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : data.kg.triplets()) {
    fnv(h, data.kg.entity_label(t.head));
    fnv(h, "\t");
    fnv(h, data.kg.relation_label(t.relation));
    fnv(h, "\t");
    fnv(h, data.kg.entity_label(t.tail));
    fnv(h, "\n");
  }
  for (const auto* part : {&data.train, &data.valid, &data.test}) {
    std::ostringstream os;
    corpus::write_corpus(os, *part, data.kg);
    fnv(h, os.str());
  }
  return h;
}

Models make_models(const RunData& data, const TrainConfig& config) {
  Models m{reasoner::PolicyNetworks(network_shape(config, data.kg.num_entities(), data.kg.num_relations())),
           converse::ConverseModel(converse_shape(config, data.vocab.size()))};
  Rng rng(config.seed);
  m.nets.init(rng);
  m.converse.init(rng);
  return m;
}

void save_models(const std::filesystem::path& path, Models& models, bool with_converse) {
  std::vector<ad::NamedStore> stores{{"reasoner", &models.nets.store()}};
  if (with_converse) stores.push_back({"converse", &models.converse.store()});
  ad::save_checkpoint(path.string(), stores);
}

void load_models(const std::filesystem::path& path, Models& models, bool with_converse) {
  if (!std::filesystem::exists(path)) throw IoError("missing checkpoint " + path.string());
  std::vector<ad::NamedStore> stores{{"reasoner", &models.nets.store()}};
  if (with_converse) stores.push_back({"converse", &models.converse.store()});
  ad::load_checkpoint(path.string(), stores);
}

std::vector<std::string> gold_statement(const corpus::TrainingExample& example) {
  std::vector<std::string> out;
  if (example.gold_path) {
    for (const auto& t : example.gold_path->statement) out.push_back(text::casefold(t));
  }
  return out;
}

}  // namespace dicr::trainer
