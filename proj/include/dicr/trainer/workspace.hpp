#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dicr/converse/model.hpp"
#include "dicr/corpus/dialog.hpp"
#include "dicr/corpus/example.hpp"
#include "dicr/corpus/templates.hpp"
#include "dicr/corpus/vocab.hpp"
#include "dicr/kg/embedding.hpp"
#include "dicr/kg/linker.hpp"
#include "dicr/reasoner/networks.hpp"
#include "dicr/trainer/config.hpp"

namespace dicr::trainer {

// File names inside a run directory.
struct RunLayout {
  std::filesystem::path dir;

  std::filesystem::path kg() const { return dir / "kg.tsv"; }
  std::filesystem::path split(const std::string& name) const { return dir / (name + ".jsonl"); }
  std::filesystem::path vocab() const { return dir / "vocab.txt"; }
  std::filesystem::path config() const { return dir / "config.txt"; }
  std::filesystem::path embeddings() const { return dir / "embeddings.bin"; }
  std::filesystem::path checkpoint(Stage stage) const { return dir / (stage_name(stage) + ".ckpt"); }
  std::filesystem::path log(const std::string& name) const { return dir / (name + ".csv"); }
};

struct PrepareSummary {
  std::size_t dialogs = 0;
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
  std::size_t dropped_mentions = 0;
  std::size_t dropped_items = 0;
  std::size_t train_examples = 0;
  std::size_t train_gold_paths = 0;
  int vocab_size = 0;
};

// Splits the corpus and writes kg.tsv, {train,valid,test}.jsonl and
// vocab.txt into the run directory.
PrepareSummary prepare_run(const kg::KnowledgeGraph& kg, const corpus::LoadedCorpus& corpus, const RunLayout& layout,
                           const TrainConfig& config);
PrepareSummary prepare_run(const std::string& kg_path, const std::string& corpus_path, const RunLayout& layout,
                           const TrainConfig& config);

std::string format_summary(const PrepareSummary& s);

// Prepared data of a run directory.
struct RunData {
  kg::KnowledgeGraph kg;
  std::vector<corpus::Dialog> train;
  std::vector<corpus::Dialog> valid;
  std::vector<corpus::Dialog> test;
  corpus::Vocab vocab;
  corpus::RelationTemplates templates;
  kg::AliasTable aliases;
  std::vector<corpus::TrainingExample> train_examples;
  std::vector<corpus::TrainingExample> valid_examples;
  std::vector<corpus::TrainingExample> test_examples;

  const std::vector<corpus::TrainingExample>& examples(const std::string& split) const;
};

// IoError naming the missing file when the directory is not prepared.
RunData load_run(const RunLayout& layout, const TrainConfig& config);

// FNV-1a over the KG triplets and the serialized splits.
std::uint64_t content_hash(const RunData& data);

struct Models {
  reasoner::PolicyNetworks nets;
  converse::ConverseModel converse;
};

// Freshly initialized from config.seed.
Models make_models(const RunData& data, const TrainConfig& config);

void save_models(const std::filesystem::path& path, Models& models, bool with_converse);
void load_models(const std::filesystem::path& path, Models& models, bool with_converse);

// Lower-cased gold statement of an example; empty without a gold path.
std::vector<std::string> gold_statement(const corpus::TrainingExample& example);

}  // namespace dicr::trainer
