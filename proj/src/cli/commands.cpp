#include "dicr/cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <unistd.h>

#include "dicr/cli/chat.hpp"
#include "dicr/corpus/toy_world.hpp"
#include "dicr/error.hpp"
#include "dicr/eval/evaluate.hpp"
#include "dicr/eval/report.hpp"
#include "dicr/trainer/stages.hpp"

namespace dicr::cli {

namespace {

namespace fs = std::filesystem;
using trainer::TrainConfig;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_out) {
  cmd->add_option("--config", f.config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--set", f.set, "override one config key (key=value), repeatable");
  if (with_out) cmd->add_option("--out", f.out, "run directory (default $DICR_DATA_DIR or ./dicr-data)");
}

fs::path default_root() {
  if (const char* env = std::getenv("DICR_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "dicr-data";
}

fs::path run_dir(const CommonFlags& f) { return f.out.empty() ? default_root() : fs::path(f.out); }

// Defaults, then `base_file` if it exists, then --config, then --seed and --set.
TrainConfig resolve_config(const CommonFlags& f, const fs::path& base_file) {
  TrainConfig c;
  if (f.config.empty() && !base_file.empty() && fs::exists(base_file)) c = trainer::load_config(base_file.string());
  if (!f.config.empty()) c = trainer::load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  c.validate();
  return c;
}

std::vector<int> parse_np_list(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--np expects a comma-separated list of positive integers, got '" + list + "'");
    }
  }
  if (out.empty()) throw ConfigError("--np list is empty");
  return out;
}

// Everything needed to run the trained modules of a checkpoint.
struct LoadedRun {
  trainer::RunLayout layout;
  TrainConfig config;
  trainer::RunData data;
  kg::EmbeddingTable embeddings;
  trainer::Models models;
};

LoadedRun load_checkpoint_run(const std::string& checkpoint, const CommonFlags& f) {
  if (!fs::exists(checkpoint)) throw IoError("missing checkpoint " + checkpoint);
  trainer::RunLayout layout{fs::path(checkpoint).parent_path()};
  if (layout.dir.empty()) layout.dir = ".";
  auto config = resolve_config(f, layout.config());
  auto data = trainer::load_run(layout, config);
  if (!fs::exists(layout.embeddings())) throw IoError("missing " + layout.embeddings().string());
  auto emb = kg::EmbeddingTable::load(layout.embeddings().string());
  auto models = trainer::make_models(data, config);
  trainer::load_models(checkpoint, models, true);
  return LoadedRun{std::move(layout), std::move(config), std::move(data), std::move(emb), std::move(models)};
}

eval::MetricsReport evaluate_split(LoadedRun& run, const std::string& split) {
  const auto& examples = run.data.examples(split);
  const auto setup = trainer::inference_setup(run.data, run.embeddings, run.models, run.config);
  const auto records = eval::evaluate_examples(setup, examples);
  return eval::summarize(records, run.data.kg, run.config.n_paths);
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* stop) {
  CLI::App app{"Dual-imitation conversational recommender", "dicr"};
  app.require_subcommand(1);

  CommonFlags prep_f;
  std::string prep_kg, prep_corpus;
  auto* prepare = app.add_subcommand("prepare", "validate and split a corpus + KG into a run directory");
  prepare->add_option("--kg", prep_kg, "triplet TSV (head<TAB>relation<TAB>tail)")->required();
  prepare->add_option("--corpus", prep_corpus, "dialog JSONL")->required();
  add_common(prepare, prep_f, true);

  CommonFlags toy_f;
  corpus::ToyWorldConfig toy;
  auto* toygen = app.add_subcommand("toygen", "generate and prepare the synthetic toy world");
  add_common(toygen, toy_f, true);
  toygen->add_option("--entities", toy.n_entities, "number of entities")->capture_default_str();
  toygen->add_option("--relations", toy.n_relations, "number of relations")->capture_default_str();
  toygen->add_option("--dialogs", toy.n_dialogs, "number of dialogs")->capture_default_str();

  CommonFlags emb_f;
  auto* embed = app.add_subcommand("train-embeddings", "train TransE entity and relation embeddings");
  add_common(embed, emb_f, true);

  CommonFlags train_f;
  std::string stage_arg = "all", train_kg, train_corpus;
  auto* train = app.add_subcommand("train", "run a training stage");
  add_common(train, train_f, true);
  train->add_option("--stage", stage_arg, "rec, imitation, gen, joint or all")->capture_default_str();
  train->add_option("--kg", train_kg, "prepare from this KG first (with --corpus)");
  train->add_option("--corpus", train_corpus, "prepare from this corpus first (with --kg)");

  CommonFlags eval_f;
  std::string eval_ckpt, eval_split = "test", eval_report;
  std::optional<int> eval_np;
  auto* evaluate = app.add_subcommand("eval", "evaluate a checkpoint and write a metrics report");
  add_common(evaluate, eval_f, false);
  evaluate->add_option("--checkpoint", eval_ckpt, "checkpoint with both modules (gen.ckpt or joint.ckpt)")->required();
  evaluate->add_option("--split", eval_split, "train, valid or test")->capture_default_str();
  evaluate->add_option("--report", eval_report, "report path (default: print only)");
  evaluate->add_option("--np", eval_np, "candidate paths per turn");

  CommonFlags sweep_f;
  std::string sweep_ckpt, sweep_np = "1,3,5,10", sweep_split = "test";
  auto* sweep = app.add_subcommand("sweep", "evaluate over several candidate path counts and plot the trend");
  add_common(sweep, sweep_f, true);
  sweep->add_option("--checkpoint", sweep_ckpt, "checkpoint with both modules")->required();
  sweep->add_option("--np", sweep_np, "comma-separated path counts")->capture_default_str();
  sweep->add_option("--split", sweep_split, "train, valid or test")->capture_default_str();

  CommonFlags chat_f;
  std::string chat_ckpt;
  auto* chat = app.add_subcommand("chat", "interactive recommendation dialog");
  add_common(chat, chat_f, false);
  chat->add_option("--checkpoint", chat_ckpt, "checkpoint with both modules")->required();

  std::vector<std::string> plot_reports;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "render sweep plots from report files");
  plot->add_option("--report", plot_reports, "report files, repeatable")->required();
  plot->add_option("--out", plot_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto progress = [&err](const std::string& line) { err << line << std::endl; };

  try {
    if (*prepare) {
      const auto dir = run_dir(prep_f);
      const auto config = resolve_config(prep_f, {});
      const auto summary = trainer::prepare_run(prep_kg, prep_corpus, trainer::RunLayout{dir}, config);
      out << trainer::format_summary(summary);
    } else if (*toygen) {
      const auto dir = run_dir(toy_f);
      const auto config = resolve_config(toy_f, {});
      toy.seed = config.seed;
      const auto world = corpus::generate_toy_world(toy);
      fs::create_directories(dir);
      world.kg.save_tsv((dir / "toy_kg.tsv").string());
      corpus::save_corpus((dir / "toy_corpus.jsonl").string(), world.dialogs, world.kg);
      corpus::LoadedCorpus loaded{world.dialogs, 0, 0};
      const auto summary = trainer::prepare_run(world.kg, loaded, trainer::RunLayout{dir}, config);
      out << "toy world in " << dir.string() << '\n' << trainer::format_summary(summary);
    } else if (*embed) {
      const trainer::RunLayout layout{run_dir(emb_f)};
      const auto config = resolve_config(emb_f, layout.config());
      trainer::run_embeddings({layout, config, progress, stop});
      out << "wrote " << layout.embeddings().string() << '\n';
    } else if (*train) {
      const trainer::RunLayout layout{run_dir(train_f)};
      auto config = resolve_config(train_f, layout.config());
      config.stage = trainer::parse_stage(stage_arg);
      if (train_kg.empty() != train_corpus.empty()) throw ConfigError("--kg and --corpus go together");
      if (!train_kg.empty()) err << trainer::format_summary(trainer::prepare_run(train_kg, train_corpus, layout, config));
      trainer::run_stage(config.stage, {layout, config, progress, stop});
      out << "stage " << trainer::stage_name(config.stage) << " done in " << layout.dir.string() << '\n';
    } else if (*evaluate) {
      auto run = load_checkpoint_run(eval_ckpt, eval_f);
      if (eval_np) {
        run.config.n_paths = *eval_np;
        run.config.validate();
      }
      const auto report = evaluate_split(run, eval_split);
      eval::write_report(out, report);
      if (!eval_report.empty()) {
        if (const auto parent = fs::path(eval_report).parent_path(); !parent.empty()) fs::create_directories(parent);
        eval::save_report(eval_report, report);
      }
    } else if (*sweep) {
      const auto nps = parse_np_list(sweep_np);
      auto run = load_checkpoint_run(sweep_ckpt, sweep_f);
      const fs::path dir = sweep_f.out.empty() ? run.layout.dir / "sweep" : fs::path(sweep_f.out);
      fs::create_directories(dir);
      std::vector<eval::MetricsReport> reports;
      for (int np : nps) {
        run.config.n_paths = np;
        reports.push_back(evaluate_split(run, sweep_split));
        const auto path = dir / ("report_np" + std::to_string(np) + ".txt");
        eval::save_report(path.string(), reports.back());
        out << "N_p=" << np << " hit " << (reports.back().hit ? std::to_string(*reports.back().hit) : "null")
            << " p_inter " << reports.back().p_inter << " p_inner " << reports.back().p_inner << " -> "
            << path.string() << '\n';
      }
      const auto files = eval::emit_plots(reports, dir.string());
      for (const auto& img : files.images) out << "plot " << img << '\n';
      out << "table " << files.csv << '\n';
    } else if (*chat) {
      auto run = load_checkpoint_run(chat_ckpt, chat_f);
      const auto setup = trainer::inference_setup(run.data, run.embeddings, run.models, run.config);
      ChatSession session(setup);
      run_repl(session, in, out, &in == &std::cin && isatty(0) != 0);
    } else if (*plot) {
      std::vector<eval::MetricsReport> reports;
      for (const auto& p : plot_reports) reports.push_back(eval::load_report(p));
      const auto files = eval::emit_plots(reports, plot_out);
      for (const auto& img : files.images) out << "plot " << img << '\n';
      out << "table " << files.csv << '\n';
    }
  } catch (const trainer::InterruptedError& e) {
    err << "dicr: " << e.what() << '\n';
    return kExitInterrupted;
  } catch (const OrderingError& e) {
    err << "dicr: missing stage '" << e.missing_stage() << "': " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "dicr: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}

}  // namespace dicr::cli
