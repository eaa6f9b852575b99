#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tacsearch {

enum class Sort { Nat, List, Bool };

const char* sort_name(Sort s);
std::optional<Sort> sort_from_name(const std::string& n);

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// First-order terms over a fixed signature (plus, mult, append, length)
// plus the nat/list/bool constructors.
struct Term {
  enum class Kind { Var, Zero, Succ, Nil, Cons, True, False, Fn };
  Kind kind;
  std::string name;            // Var name or Fn head
  std::vector<TermPtr> args;   // Succ:1, Cons:2, Fn:arity
};

struct Prop;
using PropPtr = std::shared_ptr<const Prop>;

struct Prop {
  enum class Kind { Atom, App, Eq, Not, And, Or, Implies, Forall };
  Kind kind;
  std::string name;            // Atom name, App head, Forall binder
  Sort sort = Sort::Nat;       // Forall binder sort
  std::vector<TermPtr> terms;  // App args; Eq lhs/rhs
  std::vector<PropPtr> props;  // Not:1, And/Or/Implies:2, Forall body:1
};

// Term builders.
TermPtr t_var(std::string name);
TermPtr t_zero();
TermPtr t_succ(TermPtr t);
TermPtr t_nil();
TermPtr t_cons(TermPtr h, TermPtr t);
TermPtr t_true();
TermPtr t_false();
TermPtr t_fn(std::string head, std::vector<TermPtr> args);

// Prop builders.
PropPtr p_atom(std::string name);
PropPtr p_app(std::string head, std::vector<TermPtr> args);
PropPtr p_eq(TermPtr l, TermPtr r);
PropPtr p_not(PropPtr p);
PropPtr p_and(PropPtr l, PropPtr r);
PropPtr p_or(PropPtr l, PropPtr r);
PropPtr p_implies(PropPtr l, PropPtr r);
PropPtr p_forall(std::string var, Sort sort, PropPtr body);

// Function signature table: name -> arity. Returns -1 for unknown heads.
int fn_arity(const std::string& head);

bool term_eq(const TermPtr& a, const TermPtr& b);

// Structural equality up to renaming of Forall-bound variables.
bool alpha_eq(const PropPtr& a, const PropPtr& b);

TermPtr subst_term(const TermPtr& t, const std::string& var, const TermPtr& rep);
PropPtr subst_prop(const PropPtr& p, const std::string& var, const TermPtr& rep);

bool term_contains(const TermPtr& t, const TermPtr& sub);
// Replaces every occurrence of `from` in `t` with `to`.
TermPtr replace_term(const TermPtr& t, const TermPtr& from, const TermPtr& to);
PropPtr replace_in_prop(const PropPtr& p, const TermPtr& from, const TermPtr& to);

bool prop_mentions_var(const PropPtr& p, const std::string& var);

// Canonical concrete syntax (parseable by the script-file parser).
std::string print_term(const TermPtr& t);
std::string print_prop(const PropPtr& p);

// Alpha-normalized rendering: binders renamed to _b0, _b1, ... so two
// propositions are alpha-equal iff their canonical strings match.
std::string canonical_print(const PropPtr& p);

// Token sequence of the canonical syntax with parentheses, commas,
// colons and dots dropped.
std::vector<std::string> tokenize(const PropPtr& p);
std::string head_token(const PropPtr& p);

}  // namespace tacsearch
