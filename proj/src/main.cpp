#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "tacsearch/pipeline.hpp"

using tacsearch::RunConfig;

namespace {

void add_common(CLI::App* sub, RunConfig& cfg, std::string& config_path) {
  sub->add_option("--config", config_path, "flat key=value config file");
  sub->add_option("--seed", cfg.seed, "root RNG seed");
  sub->add_option("--corpus", cfg.corpus_dir, "corpus directory");
  sub->add_option("--split", cfg.split, "train fraction of the file-level split");
  sub->add_option("--epochs", cfg.epochs, "training epochs");
  sub->add_option("--batch", cfg.batch, "SGD batch size");
  sub->add_option("--width", cfg.width, "search width");
  sub->add_option("--depth", cfg.depth, "search depth");
  sub->add_option("--budget", cfg.budget, "search node budget");
  sub->add_flag("--disable-transform", cfg.disable_transform,
                "skip tactical desugaring; filter non-first-order proofs");
  sub->add_option("--out", cfg.out_dir, "output directory");
}

int load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    std::fprintf(stderr, "error: cannot read %s\n", path.c_str());
    return 1;
  }
  std::ostringstream os;
  os << is.rdbuf();
  try {
    cfg = tacsearch::config_from_string(os.str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s: %s\n", path.c_str(), e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tactic-prediction proof search"};
  app.require_subcommand(1);

  struct SubState {
    RunConfig cfg;
    std::string config_path;
  };
  std::map<std::string, SubState> st;
  for (auto name : {"gen", "train", "prove", "eval", "report"}) st[name] = SubState{};

  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  add_common(gen, st["gen"].cfg, st["gen"].config_path);
  gen->add_option("--files", st["gen"].cfg.n_files, "number of corpus files");
  gen->add_option("--theorems", st["gen"].cfg.thms_per_file, "theorems per file");

  auto* train = app.add_subcommand("train", "train both predictors");
  add_common(train, st["train"].cfg, st["train"].config_path);

  auto* prove = app.add_subcommand("prove", "search one theorem");
  add_common(prove, st["prove"].cfg, st["prove"].config_path);
  prove->add_option("--weights", st["prove"].cfg.weights, "trained weights file")->required();
  prove->add_option("--theorem", st["prove"].cfg.theorem, "target as file:name")->required();

  auto* eval = app.add_subcommand("eval", "train (or load weights) and evaluate the test split");
  add_common(eval, st["eval"].cfg, st["eval"].config_path);
  eval->add_option("--weights", st["eval"].cfg.weights, "skip training, load these weights");

  auto* report = app.add_subcommand("report", "render histogram CSV from report.json");
  add_common(report, st["report"].cfg, st["report"].config_path);

  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  auto& s = st[sub->get_name()];
  if (!s.config_path.empty()) {
    // Config file supplies defaults; explicit flags win.
    RunConfig file_cfg;
    if (int rc = load_config_file(s.config_path, file_cfg)) return rc;
    RunConfig merged = file_cfg;
    RunConfig defaults;
    auto keep = [&](auto RunConfig::* f) {
      if (s.cfg.*f != defaults.*f) merged.*f = s.cfg.*f;
    };
    keep(&RunConfig::seed);
    keep(&RunConfig::corpus_dir);
    keep(&RunConfig::n_files);
    keep(&RunConfig::thms_per_file);
    keep(&RunConfig::split);
    keep(&RunConfig::epochs);
    keep(&RunConfig::batch);
    keep(&RunConfig::lr);
    keep(&RunConfig::decay);
    keep(&RunConfig::inject_n);
    keep(&RunConfig::hidden);
    keep(&RunConfig::width);
    keep(&RunConfig::depth);
    keep(&RunConfig::budget);
    keep(&RunConfig::disable_transform);
    keep(&RunConfig::out_dir);
    keep(&RunConfig::weights);
    keep(&RunConfig::theorem);
    s.cfg = merged;
  }

  if (sub == gen) return tacsearch::cmd_gen(s.cfg);
  if (sub == train) return tacsearch::cmd_train(s.cfg);
  if (sub == prove) return tacsearch::cmd_prove(s.cfg);
  if (sub == eval) return tacsearch::cmd_eval(s.cfg);
  return tacsearch::cmd_report(s.cfg);
}
