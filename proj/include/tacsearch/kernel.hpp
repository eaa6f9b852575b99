#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tacsearch/ast.hpp"

namespace tacsearch {

struct Argument {
  enum class Kind { None, GoalToken, HypIdent, LemmaIdent };
  Kind kind = Kind::None;
  std::string value;

  bool operator==(const Argument& o) const { return kind == o.kind && value == o.value; }
};

std::string argument_to_string(const Argument& a);

struct ProofCommand {
  std::string tactic;
  Argument arg;

  bool operator==(const ProofCommand& o) const { return tactic == o.tactic && arg == o.arg; }
};

std::string command_to_string(const ProofCommand& c);

struct Hypothesis {
  std::string id;
  PropPtr prop;
};

// A scoped variable (introduced by intro on a forall) is represented as a
// hypothesis whose proposition is the reserved sort atom (nat/list/bool).
bool is_sort_decl(const PropPtr& p);
std::optional<Sort> decl_sort(const PropPtr& p);

struct Obligation {
  std::vector<Hypothesis> hyps;
  PropPtr goal;

  const Hypothesis* find_hyp(const std::string& id) const;
};

bool obligation_alpha_eq(const Obligation& a, const Obligation& b);

struct ProofState {
  std::vector<std::pair<Obligation, std::vector<ProofCommand>>> obligations;

  bool complete() const { return obligations.empty(); }
  static ProofState initial(const PropPtr& theorem) {
    ProofState s;
    s.obligations.push_back({Obligation{{}, theorem}, {}});
    return s;
  }
};

struct TacticError {
  enum class Kind { NotApplicable, BadArgument, UnknownLemma, UnknownTactic };
  Kind kind;
  std::string message;
};

using ApplyResult = std::variant<ProofState, TacticError>;

// Per-file environment: parameterless proposition definitions (for unfold)
// and lemmas proved earlier in the file (for apply/rewrite).
struct Env {
  std::vector<std::pair<std::string, PropPtr>> definitions;
  std::vector<std::pair<std::string, PropPtr>> lemmas;

  const PropPtr* find_definition(const std::string& name) const;
  const PropPtr* find_lemma(const std::string& name) const;
};

// Tactic vocabulary. Base tactics are always registered; "try <tac>"
// names learned from a corpus are added via register_learned.
class TacticRegistry {
 public:
  TacticRegistry();
  bool known(const std::string& name) const;
  // 0 or 1; -1 if unknown.
  int arity(const std::string& name) const;
  void register_learned(const std::string& name);
  std::vector<std::string> names_sorted() const;
  const std::set<std::string>& learned() const { return learned_; }

  static const std::vector<std::string>& base_names();

 private:
  std::set<std::string> learned_;
};

// Applies cmd to the FIRST obligation of state. Pure: other obligations are
// untouched, children get history = parent history + [cmd].
ApplyResult apply_tactic(const Env& env, const TacticRegistry& reg, const ProofState& state,
                         const ProofCommand& cmd);

struct CheckResult {
  bool pass;
  size_t fail_index = 0;  // first failing or leftover step
};

CheckResult check_proof(const Env& env, const TacticRegistry& reg, const PropPtr& theorem,
                        const std::vector<ProofCommand>& script);

// Full normalization of a term under the computation rules of
// plus/mult/append/length (used by simpl and reflexivity).
TermPtr normalize_term(const TermPtr& t);
PropPtr normalize_prop(const PropPtr& p);

}  // namespace tacsearch
