#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tacsearch/search.hpp"

namespace tacsearch {

struct RunConfig {
  uint64_t seed = 0;
  std::string corpus_dir = "corpus";
  int n_files = 40;
  int thms_per_file = 30;
  double split = 0.9;
  int epochs = 20;
  int batch = 32;
  double lr = 1.0;
  double decay = 0.8;
  int inject_n = 3;
  int hidden = 128;
  int width = 3;
  int depth = 6;
  int budget = 512;
  bool disable_transform = false;
  std::string out_dir = "out";
  std::string weights;  // optional pre-trained weights (prove/eval)
  std::string theorem;  // "file:name" target for prove
};

// Flat key=value serialization; unknown keys are an error.
std::string config_to_string(const RunConfig& c);
RunConfig config_from_string(const std::string& text);

std::vector<CorpusFile> load_corpus_dir(const std::string& dir);

struct TrainedModel {
  neural::ModelWeights weights;
  TacticRegistry reg;
  std::vector<TrainingSample> train_samples;
  size_t dropped = 0;
  std::vector<double> tactic_losses;
  std::vector<double> argument_losses;
};

// Extract samples, build vocabularies, train both predictors.
TrainedModel train_pipeline(const std::vector<CorpusFile>& train_files, const RunConfig& cfg);

struct EvalRow {
  std::string theorem;  // "<file>:<name>"
  int orig_len = 0;     // linearized reference proof length
  std::string outcome;  // solved / depth-limited / exhausted
  int proof_len = 0;    // 0 unless solved
  int expanded = 0;
  int pruned = 0;
  bool in_domain = true;
};

struct HistBin {
  std::string label;  // "1".."10", then "11-20", ...
  int total = 0;
  int solved = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // sorted by theorem name
  double completion_rate = 0;
  double in_domain_completion_rate = 0;
  double top1 = 0, top3 = 0, top5 = 0;
  double arg_conditional = 0;
  size_t n_train_samples = 0;
  size_t n_test_samples = 0;
  size_t n_dropped = 0;
  std::vector<HistBin> histogram;
};

std::string histogram_label(int length);

// Searches every theorem of the test files with a NeuralCommandPredictor and
// measures test-set prediction accuracy. Prune traces of every search are
// appended to *traces when it is non-null.
EvalReport run_eval(const TrainedModel& model, const std::vector<CorpusFile>& test_files,
                    const RunConfig& cfg, std::vector<PruneRecord>* traces = nullptr);

std::string eval_report_json(const EvalReport& r);
std::string eval_report_csv(const EvalReport& r);
std::string histogram_csv(const EvalReport& r);
std::string loss_curve_csv(const std::vector<double>& tactic, const std::vector<double>& argument);

// Subcommand bodies; return a process exit code and report errors on stderr.
int cmd_gen(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_prove(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

}  // namespace tacsearch
