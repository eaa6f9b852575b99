#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tacsearch/corpus.hpp"
#include "tacsearch/features.hpp"
#include "tacsearch/neural.hpp"

namespace tacsearch {

using LemmaPool = std::vector<std::pair<std::string, PropPtr>>;

struct TrainingSample {
  PredictionContext ctx;
  ProofCommand label;
  LemmaPool lemma_pool;  // lemmas proved earlier in the sample's file
};

// One sample per command of every linearized proof of `file`. With
// transform=false the tactical desugaring is disabled and proofs that are
// not already first-order are filtered out instead. `dropped` counts the
// filtered proofs either way.
std::vector<TrainingSample> extract_samples(const CorpusFile& file, TacticRegistry& reg,
                                            bool transform, size_t* dropped);

// Vocabulary of every token seen in training goals, hypotheses and lemma
// statements; index 0 is the UNK token.
std::vector<std::string> build_token_vocab(const std::vector<TrainingSample>& samples);

// Freshly initialized weights for both predictors (uniform +-1/sqrt(fan_in)).
neural::ModelWeights init_weights(const FeatureVocab& fv,
                                  const std::vector<std::string>& tactic_vocab,
                                  const std::vector<std::string>& token_vocab, uint64_t seed,
                                  int hidden = 128);

struct ScoredTactic {
  std::string name;
  int index;     // tactic vocab index (tie-break key)
  double score;  // softmax probability
};

struct ScoredArg {
  Argument arg;
  double logit;  // unnormalized log-score, comparable across tactics
};

struct ScoredCommand {
  ProofCommand cmd;
  double score;  // tac_score * exp(arg_logit - shift); shift shared per context
  int tactic_index;
  int arg_order;
};

// P_tac: top-n tactics by softmax probability; ties broken by vocab index.
std::vector<ScoredTactic> predict_tactics(const neural::ModelWeights& w,
                                          const PredictionContext& ctx, int n);

// P_arg: one logit per candidate in canonical order — unique goal tokens by
// first occurrence, then hypotheses, then pool lemmas, then None (logit 0).
// Zero-arity tactics short-circuit to {None: 0}.
std::vector<ScoredArg> score_arguments(const neural::ModelWeights& w, const TacticRegistry& reg,
                                       const std::string& tactic, const PredictionContext& ctx,
                                       const LemmaPool& pool);

// combine (x): multiplies tactic scores with unnormalized argument scores and
// ranks descending; ties broken by (tactic vocab index, argument order).
// Considers the top-n_tactics tactics; arity-invalid pairs are dropped.
std::vector<ScoredCommand> predict_commands(const neural::ModelWeights& w,
                                            const TacticRegistry& reg,
                                            const PredictionContext& ctx, const LemmaPool& pool,
                                            int n_tactics, size_t keep);

struct TrainConfig {
  int epochs = 20;
  int batch = 32;
  double lr = 1.0;
  double decay = 0.8;  // per-epoch multiplicative lr decay
  int inject_n = 3;    // predicted tactics injected during argument training
  uint64_t seed = 0;
};

// Both return the mean training loss per epoch.
std::vector<double> train_tactic_model(neural::ModelWeights& w,
                                       const std::vector<TrainingSample>& samples,
                                       const TrainConfig& cfg);
// The tactic model is frozen: its probabilities enter the loss as constants.
std::vector<double> train_argument_model(neural::ModelWeights& w, const TacticRegistry& reg,
                                         const std::vector<TrainingSample>& samples,
                                         const TrainConfig& cfg);

// Loss graphs exposed for the finite-difference gradient check.
neural::Tape::Id tactic_loss_graph(neural::Tape& t, const neural::ModelWeights& w,
                                   const TrainingSample& s);
neural::Tape::Id argument_loss_graph(neural::Tape& t, const neural::ModelWeights& w,
                                     const TacticRegistry& reg, const TrainingSample& s,
                                     const std::vector<int>& injected_tactics);

bool in_prediction_domain(const ProofCommand& cmd);

struct AccuracyReport {
  double top1 = 0, top3 = 0, top5 = 0;
  double arg_conditional = 0;  // P(argument correct | tactic correct at top-1)
  size_t n_samples = 0;
  size_t n_tactic_top1 = 0;  // denominator of arg_conditional
};

// Full enumeration: every tactic crossed with every candidate argument.
AccuracyReport evaluate_accuracy(const neural::ModelWeights& w, const TacticRegistry& reg,
                                 const std::vector<TrainingSample>& samples);

}  // namespace tacsearch
