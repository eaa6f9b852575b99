#include "tacsearch/features.hpp"

#include <algorithm>
#include <set>

namespace tacsearch {

double similarity(const PropPtr& h, const PropPtr& g) {
  auto ht = tokenize(h);
  auto gt = tokenize(g);
  std::set<std::string> hs(ht.begin(), ht.end());
  std::set<std::string> gs(gt.begin(), gt.end());
  if (hs.empty() && gs.empty()) return 1.0;
  size_t inter = 0;
  for (auto& t : hs)
    if (gs.count(t)) ++inter;
  size_t uni = hs.size() + gs.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

PredictionContext extract_context(const Obligation& ob, const std::string& prev_tactic) {
  PredictionContext ctx;
  ctx.prev_tactic = prev_tactic;
  ctx.obligation = ob;
  double best = -1.0;
  for (auto& h : ob.hyps) {
    double s = similarity(h.prop, ob.goal);
    if (s > best) {  // strict: ties keep the earliest hypothesis
      best = s;
      ctx.relevant_hyp = h;
    }
  }
  ctx.similarity = ctx.relevant_hyp ? best : 0.0;
  return ctx;
}

PredictionContext extract_context(const ProofState& state, const std::string& prev_tactic) {
  return extract_context(state.obligations.front().first, prev_tactic);
}

int FeatureVocab::prev_id(const std::string& t) const {
  auto it = prev_index.find(t);
  return it == prev_index.end() ? 0 : it->second;
}

int FeatureVocab::head_id(const std::string& t) const {
  auto it = head_index.find(t);
  return it == head_index.end() ? 0 : it->second;
}

void FeatureVocab::rebuild_index() {
  prev_index.clear();
  head_index.clear();
  for (size_t i = 0; i < prev_tactics.size(); ++i) prev_index[prev_tactics[i]] = (int)i;
  for (size_t i = 0; i < head_tokens.size(); ++i) head_index[head_tokens[i]] = (int)i;
}

static std::vector<std::string> top_by_count(const std::map<std::string, size_t>& counts,
                                             size_t cap) {
  std::vector<std::pair<std::string, size_t>> items(counts.begin(), counts.end());
  // Frequency descending, then lexicographic for determinism.
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (items.size() > cap) items.resize(cap);
  std::vector<std::string> out;
  for (auto& [name, _] : items) out.push_back(name);
  return out;
}

FeatureVocab build_feature_vocab(const std::vector<PredictionContext>& train_contexts,
                                 size_t max_prev, size_t max_heads) {
  std::map<std::string, size_t> prev_counts, head_counts;
  for (auto& ctx : train_contexts) {
    prev_counts[ctx.prev_tactic]++;
    head_counts[head_token(ctx.obligation.goal)]++;
    if (ctx.relevant_hyp) head_counts[head_token(ctx.relevant_hyp->prop)]++;
  }
  FeatureVocab v;
  v.prev_tactics.push_back(kUnkToken);
  for (auto& t : top_by_count(prev_counts, max_prev)) v.prev_tactics.push_back(t);
  v.head_tokens.push_back(kUnkToken);
  for (auto& t : top_by_count(head_counts, max_heads)) v.head_tokens.push_back(t);
  v.rebuild_index();
  return v;
}

EncodedFeatures encode_features(const PredictionContext& ctx, const FeatureVocab& vocab) {
  EncodedFeatures e;
  e.prev_id = vocab.prev_id(ctx.prev_tactic);
  e.goal_head_id = vocab.head_id(head_token(ctx.obligation.goal));
  e.hyp_head_id = ctx.relevant_hyp ? vocab.head_id(head_token(ctx.relevant_hyp->prop)) : 0;
  e.similarity = ctx.relevant_hyp ? ctx.similarity : 0.0;
  return e;
}

}  // namespace tacsearch
