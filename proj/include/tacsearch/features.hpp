#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tacsearch/kernel.hpp"

namespace tacsearch {

// Marker used as the "previous tactic" of the first command of a proof.
inline const char* kStartMarker = "<start>";
inline const char* kUnkToken = "<unk>";

struct PredictionContext {
  std::string prev_tactic;  // tactic name or kStartMarker
  Obligation obligation;
  std::optional<Hypothesis> relevant_hyp;  // argmax-similarity hypothesis
  double similarity = 0.0;
};

// Token-set Jaccard index; symmetric, in [0,1].
double similarity(const PropPtr& h, const PropPtr& g);

PredictionContext extract_context(const ProofState& state, const std::string& prev_tactic);
PredictionContext extract_context(const Obligation& ob, const std::string& prev_tactic);

struct FeatureVocab {
  std::vector<std::string> prev_tactics;  // index 0 = UNK, then top-50
  std::vector<std::string> head_tokens;   // index 0 = UNK, then top-100
  std::map<std::string, int> prev_index;
  std::map<std::string, int> head_index;

  int prev_id(const std::string& t) const;
  int head_id(const std::string& t) const;
  void rebuild_index();
};

struct EncodedFeatures {
  int prev_id;
  int goal_head_id;
  int hyp_head_id;  // UNK when no relevant hypothesis
  double similarity;
};

// Builds the capped vocabularies from training contexts only.
FeatureVocab build_feature_vocab(const std::vector<PredictionContext>& train_contexts,
                                 size_t max_prev = 50, size_t max_heads = 100);

EncodedFeatures encode_features(const PredictionContext& ctx, const FeatureVocab& vocab);

}  // namespace tacsearch
