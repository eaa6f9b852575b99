#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tacsearch/predictor.hpp"

namespace tacsearch {

// o1 >=o o2: o1 is at least as hard — every hypothesis of o1 occurs among
// o2's hypotheses (alpha-equality of propositions, ids ignored) and the goals
// are alpha-equal.
bool harder_eq_obligation(const Obligation& o1, const Obligation& o2);

// s1 >= s2: for every obligation O2 of s2 there is an O1 in s1 with O1 >=o O2.
bool harder_eq_state(const std::vector<Obligation>& s1, const std::vector<Obligation>& s2);

struct SearchConfig {
  int width = 3;        // predictions tried per node
  int depth = 6;        // max per-obligation ancestor chain length
  int node_budget = 512;  // total command applications
};

enum class NodeStatus { Solved, Pruned, Exhausted, Unexplored };

struct SearchNode {
  ProofCommand command;  // command that produced this node (root: empty name)
  NodeStatus status = NodeStatus::Unexplored;
  double score = 0.0;
  std::string detail;  // prune reason / tactic error text
  std::vector<std::unique_ptr<SearchNode>> children;
};

// Serialized obligation for the independent prune-trace checker: canonical
// hypothesis prints (sort decls included) followed by the canonical goal.
struct ObligationRepr {
  std::vector<std::string> hyps;
  std::string goal;
};

struct PruneRecord {
  std::vector<ObligationRepr> state;                            // the pruned state
  std::vector<std::vector<ObligationRepr>> history;             // ancestor states
};

struct SearchStats {
  int expanded = 0;  // command applications attempted
  int pruned = 0;
  bool budget_exhausted = false;
};

enum class SearchOutcome { Proof, DepthLimited, ExhaustedSpace };

struct SearchResult {
  SearchOutcome outcome = SearchOutcome::ExhaustedSpace;
  std::vector<ProofCommand> proof;  // nonempty iff outcome == Proof
  std::unique_ptr<SearchNode> tree;
  SearchStats stats;
  std::vector<PruneRecord> prune_trace;
};

// Ranked command proposals for one obligation; best first.
class CommandPredictor {
 public:
  virtual ~CommandPredictor() = default;
  virtual std::vector<ScoredCommand> propose(const PredictionContext& ctx, int width) = 0;
};

class NeuralCommandPredictor : public CommandPredictor {
 public:
  NeuralCommandPredictor(const neural::ModelWeights& w, const TacticRegistry& reg,
                         LemmaPool pool)
      : w_(w), reg_(reg), pool_(std::move(pool)) {}
  std::vector<ScoredCommand> propose(const PredictionContext& ctx, int width) override;

 private:
  const neural::ModelWeights& w_;
  const TacticRegistry& reg_;
  LemmaPool pool_;
};

// Uniform-random baseline: same candidate commands, random scores.
class RandomCommandPredictor : public CommandPredictor {
 public:
  RandomCommandPredictor(const TacticRegistry& reg, LemmaPool pool, uint64_t seed)
      : reg_(reg), pool_(std::move(pool)), rng_(seed) {}
  std::vector<ScoredCommand> propose(const PredictionContext& ctx, int width) override;

 private:
  const TacticRegistry& reg_;
  LemmaPool pool_;
  neural::Rng rng_;
};

// Fixed proposal list for tests; proposals keep the given order.
class ScriptedCommandPredictor : public CommandPredictor {
 public:
  explicit ScriptedCommandPredictor(std::vector<ProofCommand> cmds) : cmds_(std::move(cmds)) {}
  std::vector<ScoredCommand> propose(const PredictionContext& ctx, int width) override;

 private:
  std::vector<ProofCommand> cmds_;
};

SearchResult search_state(const Env& env, const TacticRegistry& reg, const ProofState& initial,
                          CommandPredictor& pred, const SearchConfig& cfg);

SearchResult search(const Env& env, const TacticRegistry& reg, const PropPtr& theorem,
                    CommandPredictor& pred, const SearchConfig& cfg);

// DOT ("dot") or JSON ("json") rendering; solved-path nodes green, pruned orange.
std::string emit_tree(const SearchNode& tree, const std::string& format);

}  // namespace tacsearch
