#include "tacsearch/kernel.hpp"

#include <algorithm>
#include <cassert>

namespace tacsearch {

std::string argument_to_string(const Argument& a) {
  return a.kind == Argument::Kind::None ? std::string() : a.value;
}

std::string command_to_string(const ProofCommand& c) {
  if (c.arg.kind == Argument::Kind::None) return c.tactic;
  return c.tactic + " " + c.arg.value;
}

bool is_sort_decl(const PropPtr& p) {
  return p->kind == Prop::Kind::Atom && sort_from_name(p->name).has_value();
}

std::optional<Sort> decl_sort(const PropPtr& p) {
  if (p->kind != Prop::Kind::Atom) return std::nullopt;
  return sort_from_name(p->name);
}

const Hypothesis* Obligation::find_hyp(const std::string& id) const {
  for (auto& h : hyps)
    if (h.id == id) return &h;
  return nullptr;
}

bool obligation_alpha_eq(const Obligation& a, const Obligation& b) {
  if (a.hyps.size() != b.hyps.size()) return false;
  if (!alpha_eq(a.goal, b.goal)) return false;
  for (size_t i = 0; i < a.hyps.size(); ++i)
    if (!alpha_eq(a.hyps[i].prop, b.hyps[i].prop)) return false;
  return true;
}

const PropPtr* Env::find_definition(const std::string& name) const {
  for (auto& d : definitions)
    if (d.first == name) return &d.second;
  return nullptr;
}

const PropPtr* Env::find_lemma(const std::string& name) const {
  for (auto& l : lemmas)
    if (l.first == name) return &l.second;
  return nullptr;
}

const std::vector<std::string>& TacticRegistry::base_names() {
  static const std::vector<std::string> names = {
      "intro",       "apply",      "rewrite", "unfold",   "destruct",
      "induction",   "reflexivity", "assumption", "split", "left",
      "right",       "simpl",      "easy",    "try_easy", "try_assumption"};
  return names;
}

TacticRegistry::TacticRegistry() = default;

bool TacticRegistry::known(const std::string& name) const {
  auto& base = base_names();
  if (std::find(base.begin(), base.end(), name) != base.end()) return true;
  return learned_.count(name) > 0;
}

static int base_arity(const std::string& name) {
  if (name == "apply" || name == "rewrite" || name == "unfold" || name == "destruct" ||
      name == "induction")
    return 1;
  return 0;
}

int TacticRegistry::arity(const std::string& name) const {
  if (!known(name)) return -1;
  if (name.rfind("try ", 0) == 0) return base_arity(name.substr(4));
  return base_arity(name);
}

void TacticRegistry::register_learned(const std::string& name) { learned_.insert(name); }

std::vector<std::string> TacticRegistry::names_sorted() const {
  std::vector<std::string> out = base_names();
  out.insert(out.end(), learned_.begin(), learned_.end());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Term normalization under the signature's computation rules.

TermPtr normalize_term(const TermPtr& t) {
  TermPtr cur = t;
  if (!cur->args.empty()) {
    std::vector<TermPtr> args;
    bool changed = false;
    for (auto& a : cur->args) {
      auto na = normalize_term(a);
      changed = changed || na != a;
      args.push_back(na);
    }
    if (changed) {
      if (cur->kind == Term::Kind::Succ) cur = t_succ(args[0]);
      else if (cur->kind == Term::Kind::Cons) cur = t_cons(args[0], args[1]);
      else cur = t_fn(cur->name, args);
    }
  }
  if (cur->kind != Term::Kind::Fn) return cur;
  const auto& a = cur->args;
  if (cur->name == "plus") {
    if (a[0]->kind == Term::Kind::Zero) return a[1];
    if (a[0]->kind == Term::Kind::Succ)
      return t_succ(normalize_term(t_fn("plus", {a[0]->args[0], a[1]})));
  } else if (cur->name == "mult") {
    if (a[0]->kind == Term::Kind::Zero) return t_zero();
    if (a[0]->kind == Term::Kind::Succ)
      return normalize_term(t_fn("plus", {a[1], t_fn("mult", {a[0]->args[0], a[1]})}));
  } else if (cur->name == "append") {
    if (a[0]->kind == Term::Kind::Nil) return a[1];
    if (a[0]->kind == Term::Kind::Cons)
      return t_cons(a[0]->args[0], normalize_term(t_fn("append", {a[0]->args[1], a[1]})));
  } else if (cur->name == "length") {
    if (a[0]->kind == Term::Kind::Nil) return t_zero();
    if (a[0]->kind == Term::Kind::Cons)
      return t_succ(normalize_term(t_fn("length", {a[0]->args[1]})));
  }
  return cur;
}

PropPtr normalize_prop(const PropPtr& p) {
  switch (p->kind) {
    case Prop::Kind::Atom:
      return p;
    case Prop::Kind::App: {
      std::vector<TermPtr> terms;
      bool changed = false;
      for (auto& t : p->terms) {
        auto nt = normalize_term(t);
        changed = changed || nt != t;
        terms.push_back(nt);
      }
      return changed ? p_app(p->name, terms) : p;
    }
    case Prop::Kind::Eq: {
      auto l = normalize_term(p->terms[0]);
      auto r = normalize_term(p->terms[1]);
      if (l == p->terms[0] && r == p->terms[1]) return p;
      return p_eq(l, r);
    }
    case Prop::Kind::Not: {
      auto q = normalize_prop(p->props[0]);
      return q == p->props[0] ? p : p_not(q);
    }
    case Prop::Kind::And:
    case Prop::Kind::Or:
    case Prop::Kind::Implies: {
      auto l = normalize_prop(p->props[0]);
      auto r = normalize_prop(p->props[1]);
      if (l == p->props[0] && r == p->props[1]) return p;
      if (p->kind == Prop::Kind::And) return p_and(l, r);
      if (p->kind == Prop::Kind::Or) return p_or(l, r);
      return p_implies(l, r);
    }
    case Prop::Kind::Forall: {
      auto b = normalize_prop(p->props[0]);
      return b == p->props[0] ? p : p_forall(p->name, p->sort, b);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// First-order matching of forall-bound pattern variables against terms.

namespace {

using Binding = std::map<std::string, TermPtr>;

bool match_term(const TermPtr& pat, const TermPtr& tgt, const std::set<std::string>& vars,
                Binding& theta) {
  if (pat->kind == Term::Kind::Var && vars.count(pat->name)) {
    auto it = theta.find(pat->name);
    if (it != theta.end()) return term_eq(it->second, tgt);
    theta[pat->name] = tgt;
    return true;
  }
  if (pat->kind != tgt->kind || pat->name != tgt->name) return false;
  if (pat->args.size() != tgt->args.size()) return false;
  for (size_t i = 0; i < pat->args.size(); ++i)
    if (!match_term(pat->args[i], tgt->args[i], vars, theta)) return false;
  return true;
}

bool match_prop(const PropPtr& pat, const PropPtr& tgt, const std::set<std::string>& vars,
                Binding& theta) {
  if (pat->kind != tgt->kind) return false;
  switch (pat->kind) {
    case Prop::Kind::Atom:
      return pat->name == tgt->name;
    case Prop::Kind::App: {
      if (pat->name != tgt->name || pat->terms.size() != tgt->terms.size()) return false;
      for (size_t i = 0; i < pat->terms.size(); ++i)
        if (!match_term(pat->terms[i], tgt->terms[i], vars, theta)) return false;
      return true;
    }
    case Prop::Kind::Eq:
      return match_term(pat->terms[0], tgt->terms[0], vars, theta) &&
             match_term(pat->terms[1], tgt->terms[1], vars, theta);
    case Prop::Kind::Not:
      return match_prop(pat->props[0], tgt->props[0], vars, theta);
    case Prop::Kind::And:
    case Prop::Kind::Or:
    case Prop::Kind::Implies:
      return match_prop(pat->props[0], tgt->props[0], vars, theta) &&
             match_prop(pat->props[1], tgt->props[1], vars, theta);
    case Prop::Kind::Forall: {
      if (pat->name != tgt->name || pat->sort != tgt->sort) return false;
      auto inner = vars;
      inner.erase(pat->name);
      return match_prop(pat->props[0], tgt->props[0], inner, theta);
    }
  }
  return false;
}

// Splits a lemma/hypothesis statement into (forall vars, premises, conclusion).
struct Rule {
  std::set<std::string> vars;
  std::vector<PropPtr> premises;
  PropPtr conclusion;
};

Rule split_rule(PropPtr p) {
  Rule r;
  while (p->kind == Prop::Kind::Forall) {
    r.vars.insert(p->name);
    p = p->props[0];
  }
  while (p->kind == Prop::Kind::Implies) {
    r.premises.push_back(p->props[0]);
    p = p->props[1];
  }
  r.conclusion = p;
  return r;
}

PropPtr apply_binding(PropPtr p, const Binding& theta) {
  for (auto& [v, t] : theta) p = subst_prop(p, v, t);
  return p;
}

std::string fresh_hyp_id(const Obligation& ob) {
  for (int k = 0;; ++k) {
    std::string id = "H" + std::to_string(k);
    if (!ob.find_hyp(id)) return id;
  }
}

std::string fresh_var_name(const Obligation& ob, std::string base) {
  while (ob.find_hyp(base)) base += "'";
  return base;
}

// Left-to-right, outside-in search for the first goal subterm matching pat.
bool find_match_in_term(const TermPtr& t, const PropPtr&, const TermPtr& pat,
                        const std::set<std::string>& vars, Binding& out) {
  Binding theta;
  if (match_term(pat, t, vars, theta) && theta.size() == vars.size()) {
    out = theta;
    return true;
  }
  for (auto& a : t->args)
    if (find_match_in_term(a, nullptr, pat, vars, out)) return true;
  return false;
}

bool find_match_in_prop(const PropPtr& p, const TermPtr& pat, const std::set<std::string>& vars,
                        Binding& out) {
  for (auto& t : p->terms)
    if (find_match_in_term(t, nullptr, pat, vars, out)) return true;
  for (auto& q : p->props)
    if (find_match_in_prop(q, pat, vars, out)) return true;
  return false;
}

PropPtr replace_atom(const PropPtr& p, const std::string& name, const PropPtr& body) {
  switch (p->kind) {
    case Prop::Kind::Atom:
      return p->name == name ? body : p;
    case Prop::Kind::App:
    case Prop::Kind::Eq:
      return p;
    case Prop::Kind::Forall: {
      auto b = replace_atom(p->props[0], name, body);
      return b == p->props[0] ? p : p_forall(p->name, p->sort, b);
    }
    default: {
      std::vector<PropPtr> props;
      bool changed = false;
      for (auto& q : p->props) {
        auto nq = replace_atom(q, name, body);
        changed = changed || nq != q;
        props.push_back(nq);
      }
      if (!changed) return p;
      if (p->kind == Prop::Kind::Not) return p_not(props[0]);
      if (p->kind == Prop::Kind::And) return p_and(props[0], props[1]);
      if (p->kind == Prop::Kind::Or) return p_or(props[0], props[1]);
      return p_implies(props[0], props[1]);
    }
  }
}

using ExecResult = std::variant<std::vector<Obligation>, TacticError>;

ExecResult fail(TacticError::Kind k, std::string msg) {
  return TacticError{k, std::move(msg)};
}

ExecResult exec_reflexivity(const Obligation& ob) {
  if (ob.goal->kind != Prop::Kind::Eq)
    return fail(TacticError::Kind::NotApplicable, "goal is not an equality");
  auto l = normalize_term(ob.goal->terms[0]);
  auto r = normalize_term(ob.goal->terms[1]);
  if (!term_eq(l, r)) return fail(TacticError::Kind::NotApplicable, "sides differ");
  return std::vector<Obligation>{};
}

ExecResult exec_assumption(const Obligation& ob) {
  for (auto& h : ob.hyps)
    if (!is_sort_decl(h.prop) && alpha_eq(h.prop, ob.goal)) return std::vector<Obligation>{};
  return fail(TacticError::Kind::NotApplicable, "no matching hypothesis");
}

// Resolves a hypothesis-or-variable argument: HypIdent directly, GoalToken by
// name when the token names a scoped variable or hypothesis.
const Hypothesis* resolve_hyp_arg(const Obligation& ob, const Argument& arg) {
  return ob.find_hyp(arg.value);
}

ExecResult exec_tactic(const Env& env, const Obligation& ob, const std::string& name,
                       const Argument& arg);

ExecResult exec_try(const Env& env, const Obligation& ob, const std::string& inner,
                    const Argument& arg) {
  auto res = exec_tactic(env, ob, inner, arg);
  if (std::holds_alternative<std::vector<Obligation>>(res)) return res;
  return std::vector<Obligation>{ob};  // failed: keep the obligation unchanged
}

ExecResult exec_tactic(const Env& env, const Obligation& ob, const std::string& name,
                       const Argument& arg) {
  if (name == "try_easy") return exec_try(env, ob, "easy", Argument{});
  if (name == "try_assumption") return exec_try(env, ob, "assumption", Argument{});
  if (name.rfind("try ", 0) == 0) return exec_try(env, ob, name.substr(4), arg);

  if (name == "intro") {
    if (ob.goal->kind == Prop::Kind::Implies) {
      Obligation child = ob;
      child.hyps.push_back({fresh_hyp_id(ob), ob.goal->props[0]});
      child.goal = ob.goal->props[1];
      return std::vector<Obligation>{child};
    }
    if (ob.goal->kind == Prop::Kind::Forall) {
      std::string v = fresh_var_name(ob, ob.goal->name);
      PropPtr body = ob.goal->props[0];
      if (v != ob.goal->name) body = subst_prop(body, ob.goal->name, t_var(v));
      Obligation child = ob;
      child.hyps.push_back({v, p_atom(sort_name(ob.goal->sort))});
      child.goal = body;
      return std::vector<Obligation>{child};
    }
    return fail(TacticError::Kind::NotApplicable, "goal is not an implication or forall");
  }

  if (name == "apply") {
    PropPtr stmt;
    if (arg.kind == Argument::Kind::LemmaIdent) {
      stmt = *env.find_lemma(arg.value);
    } else {
      const Hypothesis* h = resolve_hyp_arg(ob, arg);
      if (!h || is_sort_decl(h->prop))
        return fail(TacticError::Kind::BadArgument, "not an applicable hypothesis");
      stmt = h->prop;
    }
    Rule rule = split_rule(stmt);
    Binding theta;
    if (!match_prop(rule.conclusion, ob.goal, rule.vars, theta))
      return fail(TacticError::Kind::NotApplicable, "conclusion does not match goal");
    if (theta.size() != rule.vars.size())
      return fail(TacticError::Kind::NotApplicable, "unbound universal variable");
    std::vector<Obligation> children;
    for (auto& prem : rule.premises) {
      Obligation child = ob;
      child.goal = apply_binding(prem, theta);
      children.push_back(std::move(child));
    }
    return children;
  }

  if (name == "rewrite") {
    PropPtr stmt;
    if (arg.kind == Argument::Kind::LemmaIdent) {
      stmt = *env.find_lemma(arg.value);
    } else {
      const Hypothesis* h = resolve_hyp_arg(ob, arg);
      if (!h || is_sort_decl(h->prop))
        return fail(TacticError::Kind::BadArgument, "not a rewritable hypothesis");
      stmt = h->prop;
    }
    Rule rule = split_rule(stmt);
    if (!rule.premises.empty() || rule.conclusion->kind != Prop::Kind::Eq)
      return fail(TacticError::Kind::NotApplicable, "not an equation");
    TermPtr lhs = rule.conclusion->terms[0];
    TermPtr rhs = rule.conclusion->terms[1];
    Binding theta;
    if (rule.vars.empty()) {
      // ground equation: rewrite only if the lhs occurs
      theta.clear();
    } else if (!find_match_in_prop(ob.goal, lhs, rule.vars, theta)) {
      return fail(TacticError::Kind::NotApplicable, "no instance of the lhs in the goal");
    }
    TermPtr from = lhs, to = rhs;
    for (auto& [v, t] : theta) {
      from = subst_term(from, v, t);
      to = subst_term(to, v, t);
    }
    PropPtr goal2 = replace_in_prop(ob.goal, from, to);
    if (goal2 == ob.goal && alpha_eq(goal2, ob.goal))
      return fail(TacticError::Kind::NotApplicable, "no occurrence to rewrite");
    Obligation child = ob;
    child.goal = goal2;
    return std::vector<Obligation>{child};
  }

  if (name == "unfold") {
    const PropPtr* def = env.find_definition(arg.value);
    if (!def) return fail(TacticError::Kind::BadArgument, "not a defined name: " + arg.value);
    PropPtr goal2 = replace_atom(ob.goal, arg.value, *def);
    if (goal2 == ob.goal)
      return fail(TacticError::Kind::NotApplicable, "name does not occur in goal");
    Obligation child = ob;
    child.goal = goal2;
    return std::vector<Obligation>{child};
  }

  if (name == "destruct" || name == "induction") {
    const Hypothesis* h = resolve_hyp_arg(ob, arg);
    if (!h) return fail(TacticError::Kind::BadArgument, "unknown hypothesis " + arg.value);
    if (!is_sort_decl(h->prop)) {
      if (name == "induction")
        return fail(TacticError::Kind::NotApplicable, "induction needs a scoped variable");
      // destruct on a logical hypothesis
      if (h->prop->kind == Prop::Kind::And) {
        Obligation child;
        child.goal = ob.goal;
        for (auto& hh : ob.hyps)
          if (hh.id != h->id) child.hyps.push_back(hh);
        std::string a = fresh_hyp_id(child);
        child.hyps.push_back({a, h->prop->props[0]});
        std::string b = fresh_hyp_id(child);
        child.hyps.push_back({b, h->prop->props[1]});
        return std::vector<Obligation>{child};
      }
      if (h->prop->kind == Prop::Kind::Or) {
        std::vector<Obligation> children;
        for (int side = 0; side < 2; ++side) {
          Obligation child;
          child.goal = ob.goal;
          for (auto& hh : ob.hyps)
            if (hh.id != h->id) child.hyps.push_back(hh);
          child.hyps.push_back({fresh_hyp_id(child), h->prop->props[side]});
          children.push_back(std::move(child));
        }
        return children;
      }
      return fail(TacticError::Kind::NotApplicable, "hypothesis is not a conjunction/disjunction");
    }
    // case split / induction on a scoped variable
    Sort s = *decl_sort(h->prop);
    const std::string& v = h->id;
    for (auto& hh : ob.hyps)
      if (hh.id != v && !is_sort_decl(hh.prop) && prop_mentions_var(hh.prop, v))
        return fail(TacticError::Kind::NotApplicable, "variable occurs in another hypothesis");
    auto without_v = [&]() {
      Obligation o;
      o.goal = ob.goal;
      for (auto& hh : ob.hyps)
        if (hh.id != v) o.hyps.push_back(hh);
      return o;
    };
    if (s == Sort::Bool) {
      if (name == "induction")
        return fail(TacticError::Kind::NotApplicable, "no induction on bool");
      Obligation t = without_v();
      t.goal = subst_prop(t.goal, v, t_true());
      Obligation f = without_v();
      f.goal = subst_prop(f.goal, v, t_false());
      return std::vector<Obligation>{t, f};
    }
    TermPtr base_val = s == Sort::Nat ? t_zero() : t_nil();
    Obligation base = without_v();
    base.goal = subst_prop(base.goal, v, base_val);

    Obligation step = ob;
    if (name == "induction") step.hyps.push_back({"IH" + v, ob.goal});
    if (s == Sort::Nat) {
      step.goal = subst_prop(ob.goal, v, t_succ(t_var(v)));
    } else {
      std::string elem = fresh_var_name(step, "x");
      step.hyps.insert(step.hyps.end() - (name == "induction" ? 1 : 0),
                       Hypothesis{elem, p_atom("nat")});
      step.goal = subst_prop(ob.goal, v, t_cons(t_var(elem), t_var(v)));
    }
    return std::vector<Obligation>{base, step};
  }

  if (name == "reflexivity") return exec_reflexivity(ob);
  if (name == "assumption") return exec_assumption(ob);

  if (name == "split") {
    if (ob.goal->kind != Prop::Kind::And)
      return fail(TacticError::Kind::NotApplicable, "goal is not a conjunction");
    Obligation l = ob, r = ob;
    l.goal = ob.goal->props[0];
    r.goal = ob.goal->props[1];
    return std::vector<Obligation>{l, r};
  }
  if (name == "left" || name == "right") {
    if (ob.goal->kind != Prop::Kind::Or)
      return fail(TacticError::Kind::NotApplicable, "goal is not a disjunction");
    Obligation child = ob;
    child.goal = ob.goal->props[name == "left" ? 0 : 1];
    return std::vector<Obligation>{child};
  }
  if (name == "simpl") {
    Obligation child = ob;
    child.goal = normalize_prop(ob.goal);
    return std::vector<Obligation>{child};
  }
  if (name == "easy") {
    auto r = exec_reflexivity(ob);
    if (std::holds_alternative<std::vector<Obligation>>(r)) return r;
    auto a = exec_assumption(ob);
    if (std::holds_alternative<std::vector<Obligation>>(a)) return a;
    return fail(TacticError::Kind::NotApplicable, "easy could not close the goal");
  }
  return fail(TacticError::Kind::UnknownTactic, "unknown tactic " + name);
}

}  // namespace

ApplyResult apply_tactic(const Env& env, const TacticRegistry& reg, const ProofState& state,
                         const ProofCommand& cmd) {
  if (state.obligations.empty())
    return TacticError{TacticError::Kind::NotApplicable, "no open obligations"};
  if (!reg.known(cmd.tactic))
    return TacticError{TacticError::Kind::UnknownTactic, "unknown tactic " + cmd.tactic};
  int ar = reg.arity(cmd.tactic);
  bool has_arg = cmd.arg.kind != Argument::Kind::None;
  if ((ar == 0) == has_arg)
    return TacticError{TacticError::Kind::BadArgument,
                       "tactic " + cmd.tactic + " takes " + std::to_string(ar) + " argument(s)"};

  const Obligation& ob = state.obligations.front().first;
  switch (cmd.arg.kind) {
    case Argument::Kind::HypIdent:
      if (!ob.find_hyp(cmd.arg.value))
        return TacticError{TacticError::Kind::BadArgument, "no hypothesis " + cmd.arg.value};
      break;
    case Argument::Kind::LemmaIdent:
      if (!env.find_lemma(cmd.arg.value))
        return TacticError{TacticError::Kind::UnknownLemma, "no lemma " + cmd.arg.value};
      break;
    case Argument::Kind::GoalToken: {
      auto toks = tokenize(ob.goal);
      if (std::find(toks.begin(), toks.end(), cmd.arg.value) == toks.end())
        return TacticError{TacticError::Kind::BadArgument,
                           "token " + cmd.arg.value + " does not occur in the goal"};
      break;
    }
    case Argument::Kind::None:
      break;
  }

  auto res = exec_tactic(env, ob, cmd.tactic, cmd.arg);
  if (auto* err = std::get_if<TacticError>(&res)) return *err;

  auto& children = std::get<std::vector<Obligation>>(res);
  ProofState next;
  auto hist = state.obligations.front().second;
  hist.push_back(cmd);
  for (auto& child : children) next.obligations.push_back({std::move(child), hist});
  for (size_t i = 1; i < state.obligations.size(); ++i)
    next.obligations.push_back(state.obligations[i]);
  return next;
}

CheckResult check_proof(const Env& env, const TacticRegistry& reg, const PropPtr& theorem,
                        const std::vector<ProofCommand>& script) {
  ProofState state = ProofState::initial(theorem);
  for (size_t i = 0; i < script.size(); ++i) {
    if (state.complete()) return {false, i};
    auto res = apply_tactic(env, reg, state, script[i]);
    if (std::holds_alternative<TacticError>(res)) return {false, i};
    state = std::get<ProofState>(std::move(res));
  }
  if (!state.complete()) return {false, script.size()};
  return {true, 0};
}

}  // namespace tacsearch
