#include "tacsearch/search.hpp"

#include <json.hpp>
#include <sstream>

namespace tacsearch {

bool harder_eq_obligation(const Obligation& o1, const Obligation& o2) {
  if (!alpha_eq(o1.goal, o2.goal)) return false;
  for (auto& h1 : o1.hyps) {
    bool found = false;
    for (auto& h2 : o2.hyps)
      if (alpha_eq(h1.prop, h2.prop)) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

bool harder_eq_state(const std::vector<Obligation>& s1, const std::vector<Obligation>& s2) {
  for (auto& o2 : s2) {
    bool found = false;
    for (auto& o1 : s1)
      if (harder_eq_obligation(o1, o2)) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Predictors

std::vector<ScoredCommand> NeuralCommandPredictor::propose(const PredictionContext& ctx,
                                                           int width) {
  return predict_commands(w_, reg_, ctx, pool_, width, (size_t)width);
}

namespace {

// Candidate command universe shared by the random baseline: every known
// tactic crossed with every argument its arity admits.
std::vector<ProofCommand> command_universe(const TacticRegistry& reg, const PredictionContext& ctx,
                                           const LemmaPool& pool) {
  std::vector<Argument> args;
  std::vector<std::string> seen_tokens;
  for (auto& tok : tokenize(ctx.obligation.goal)) {
    if (std::find(seen_tokens.begin(), seen_tokens.end(), tok) == seen_tokens.end()) {
      seen_tokens.push_back(tok);
      args.push_back({Argument::Kind::GoalToken, tok});
    }
  }
  for (auto& h : ctx.obligation.hyps) args.push_back({Argument::Kind::HypIdent, h.id});
  for (auto& [name, stmt] : pool) args.push_back({Argument::Kind::LemmaIdent, name});
  std::vector<ProofCommand> out;
  for (auto& name : reg.names_sorted()) {
    if (reg.arity(name) == 0) {
      out.push_back({name, {}});
    } else {
      for (auto& a : args) out.push_back({name, a});
    }
  }
  return out;
}

}  // namespace

std::vector<ScoredCommand> RandomCommandPredictor::propose(const PredictionContext& ctx,
                                                           int width) {
  auto universe = command_universe(reg_, ctx, pool_);
  std::vector<ScoredCommand> scored;
  for (size_t i = 0; i < universe.size(); ++i)
    scored.push_back({universe[i], rng_.uniform(), 0, (int)i});
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredCommand& a, const ScoredCommand& b) { return a.score > b.score; });
  if (scored.size() > (size_t)width) scored.resize((size_t)width);
  return scored;
}

std::vector<ScoredCommand> ScriptedCommandPredictor::propose(const PredictionContext&, int width) {
  std::vector<ScoredCommand> out;
  for (size_t i = 0; i < cmds_.size() && i < (size_t)width; ++i)
    out.push_back({cmds_[i], 1.0 / (double)(i + 1), 0, (int)i});
  return out;
}

// ---------------------------------------------------------------------------
// Depth-first committed search

namespace {

ObligationRepr repr_of(const Obligation& ob) {
  ObligationRepr r;
  for (auto& h : ob.hyps) r.hyps.push_back(canonical_print(h.prop));
  r.goal = canonical_print(ob.goal);
  return r;
}

std::vector<ObligationRepr> repr_state(const std::vector<Obligation>& s) {
  std::vector<ObligationRepr> out;
  for (auto& ob : s) out.push_back(repr_of(ob));
  return out;
}

struct Searcher {
  const Env& env;
  const TacticRegistry& reg;
  CommandPredictor& pred;
  SearchConfig cfg;
  SearchStats stats;
  bool depth_cut = false;
  std::vector<std::vector<Obligation>> history;
  std::vector<PruneRecord> trace;

  // Solves one obligation, appending its sub-proof to `out`. `depth` is the
  // length of this obligation's ancestor command chain (subtlety 3).
  bool solve(const Obligation& ob, int depth, const std::string& prev, SearchNode* parent,
             std::vector<ProofCommand>& out) {
    if (depth >= cfg.depth) {
      depth_cut = true;
      return false;
    }
    history.push_back({ob});
    auto ctx = extract_context(ob, prev);
    auto proposals = pred.propose(ctx, cfg.width);
    bool ok = false;
    for (auto& p : proposals) {
      if (stats.budget_exhausted) break;
      auto* node = parent->children.emplace_back(std::make_unique<SearchNode>()).get();
      node->command = p.cmd;
      node->score = p.score;
      if (stats.expanded >= cfg.node_budget) {
        stats.budget_exhausted = true;
        break;
      }
      ++stats.expanded;
      ProofState st;
      st.obligations.push_back({ob, {}});
      auto res = apply_tactic(env, reg, st, p.cmd);
      if (auto* err = std::get_if<TacticError>(&res)) {
        node->status = NodeStatus::Exhausted;
        node->detail = err->message;
        continue;
      }
      std::vector<Obligation> children;
      for (auto& [o, h] : std::get<ProofState>(res).obligations) children.push_back(o);
      bool pruned = false;
      for (auto& h : history)
        if (harder_eq_state(children, h)) {
          pruned = true;
          break;
        }
      if (pruned) {
        node->status = NodeStatus::Pruned;
        node->detail = "at least as hard as a state in the history";
        ++stats.pruned;
        trace.push_back(PruneRecord{repr_state(children), {}});
        for (auto& h : history) trace.back().history.push_back(repr_state(h));
        continue;
      }
      history.push_back(children);
      std::vector<ProofCommand> acc{p.cmd};
      bool all = true;
      for (auto& child : children) {
        // Once a sub-obligation is proven it stays proven: a failure on a
        // later sibling abandons the whole command (subtlety 2).
        if (!solve(child, depth + 1, acc.back().tactic, node, acc)) {
          all = false;
          break;
        }
      }
      history.pop_back();
      if (all) {
        node->status = NodeStatus::Solved;
        out.insert(out.end(), acc.begin(), acc.end());
        ok = true;
        break;
      }
      node->status = NodeStatus::Exhausted;
    }
    history.pop_back();
    return ok;
  }
};

}  // namespace

SearchResult search_state(const Env& env, const TacticRegistry& reg, const ProofState& initial,
                          CommandPredictor& pred, const SearchConfig& cfg) {
  Searcher s{env, reg, pred, cfg};
  SearchResult result;
  result.tree = std::make_unique<SearchNode>();
  std::vector<ProofCommand> proof;
  bool ok = true;
  std::string prev = kStartMarker;
  for (auto& [ob, hist] : initial.obligations) {
    if (!proof.empty()) prev = proof.back().tactic;
    if (!s.solve(ob, (int)hist.size(), prev, result.tree.get(), proof)) {
      ok = false;
      break;
    }
  }
  result.stats = s.stats;
  result.prune_trace = std::move(s.trace);
  if (ok && !initial.obligations.empty()) {
    result.outcome = SearchOutcome::Proof;
    result.proof = std::move(proof);
    result.tree->status = NodeStatus::Solved;
  } else if (s.stats.budget_exhausted) {
    result.outcome = SearchOutcome::ExhaustedSpace;
  } else if (s.depth_cut) {
    result.outcome = SearchOutcome::DepthLimited;
  } else {
    result.outcome = SearchOutcome::ExhaustedSpace;
  }
  return result;
}

SearchResult search(const Env& env, const TacticRegistry& reg, const PropPtr& theorem,
                    CommandPredictor& pred, const SearchConfig& cfg) {
  return search_state(env, reg, ProofState::initial(theorem), pred, cfg);
}

// ---------------------------------------------------------------------------
// Tree rendering

namespace {

const char* status_name(NodeStatus s) {
  switch (s) {
    case NodeStatus::Solved: return "solved";
    case NodeStatus::Pruned: return "pruned";
    case NodeStatus::Exhausted: return "exhausted";
    case NodeStatus::Unexplored: return "unexplored";
  }
  return "?";
}

const char* status_color(NodeStatus s) {
  switch (s) {
    case NodeStatus::Solved: return "green";
    case NodeStatus::Pruned: return "orange";
    case NodeStatus::Exhausted: return "gray";
    case NodeStatus::Unexplored: return "white";
  }
  return "white";
}

int dot_node(const SearchNode& n, std::ostringstream& os, int& counter) {
  int id = counter++;
  std::string label = n.command.tactic.empty() ? "root" : command_to_string(n.command);
  os << "  n" << id << " [label=\"" << label << "\", style=filled, fillcolor="
     << status_color(n.status) << "];\n";
  for (auto& c : n.children) {
    int cid = dot_node(*c, os, counter);
    os << "  n" << id << " -> n" << cid << ";\n";
  }
  return id;
}

nlohmann::ordered_json json_node(const SearchNode& n) {
  nlohmann::ordered_json j;
  j["command"] = n.command.tactic.empty() ? "root" : command_to_string(n.command);
  j["status"] = status_name(n.status);
  j["score"] = n.score;
  if (!n.detail.empty()) j["detail"] = n.detail;
  j["children"] = nlohmann::ordered_json::array();
  for (auto& c : n.children) j["children"].push_back(json_node(*c));
  return j;
}

}  // namespace

std::string emit_tree(const SearchNode& tree, const std::string& format) {
  if (format == "json") return json_node(tree).dump(2) + "\n";
  if (format != "dot") throw std::invalid_argument("unknown tree format: " + format);
  std::ostringstream os;
  os << "digraph search {\n  node [shape=box];\n";
  int counter = 0;
  dot_node(tree, os, counter);
  os << "}\n";
  return os.str();
}

}  // namespace tacsearch
