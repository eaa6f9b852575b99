#include "tacsearch/ast.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tacsearch {

const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Nat: return "nat";
    case Sort::List: return "list";
    case Sort::Bool: return "bool";
  }
  return "?";
}

std::optional<Sort> sort_from_name(const std::string& n) {
  if (n == "nat") return Sort::Nat;
  if (n == "list") return Sort::List;
  if (n == "bool") return Sort::Bool;
  return std::nullopt;
}

static TermPtr mk_term(Term::Kind k, std::string name, std::vector<TermPtr> args) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  t->name = std::move(name);
  t->args = std::move(args);
  return t;
}

TermPtr t_var(std::string name) { return mk_term(Term::Kind::Var, std::move(name), {}); }
TermPtr t_zero() { return mk_term(Term::Kind::Zero, "", {}); }
TermPtr t_succ(TermPtr t) { return mk_term(Term::Kind::Succ, "", {std::move(t)}); }
TermPtr t_nil() { return mk_term(Term::Kind::Nil, "", {}); }
TermPtr t_cons(TermPtr h, TermPtr t) {
  return mk_term(Term::Kind::Cons, "", {std::move(h), std::move(t)});
}
TermPtr t_true() { return mk_term(Term::Kind::True, "", {}); }
TermPtr t_false() { return mk_term(Term::Kind::False, "", {}); }
TermPtr t_fn(std::string head, std::vector<TermPtr> args) {
  return mk_term(Term::Kind::Fn, std::move(head), std::move(args));
}

static PropPtr mk_prop(Prop::Kind k, std::string name, std::vector<TermPtr> terms,
                       std::vector<PropPtr> props, Sort sort = Sort::Nat) {
  auto p = std::make_shared<Prop>();
  p->kind = k;
  p->name = std::move(name);
  p->sort = sort;
  p->terms = std::move(terms);
  p->props = std::move(props);
  return p;
}

PropPtr p_atom(std::string name) { return mk_prop(Prop::Kind::Atom, std::move(name), {}, {}); }
PropPtr p_app(std::string head, std::vector<TermPtr> args) {
  return mk_prop(Prop::Kind::App, std::move(head), std::move(args), {});
}
PropPtr p_eq(TermPtr l, TermPtr r) {
  return mk_prop(Prop::Kind::Eq, "", {std::move(l), std::move(r)}, {});
}
PropPtr p_not(PropPtr p) { return mk_prop(Prop::Kind::Not, "", {}, {std::move(p)}); }
PropPtr p_and(PropPtr l, PropPtr r) {
  return mk_prop(Prop::Kind::And, "", {}, {std::move(l), std::move(r)});
}
PropPtr p_or(PropPtr l, PropPtr r) {
  return mk_prop(Prop::Kind::Or, "", {}, {std::move(l), std::move(r)});
}
PropPtr p_implies(PropPtr l, PropPtr r) {
  return mk_prop(Prop::Kind::Implies, "", {}, {std::move(l), std::move(r)});
}
PropPtr p_forall(std::string var, Sort sort, PropPtr body) {
  return mk_prop(Prop::Kind::Forall, std::move(var), {}, {std::move(body)}, sort);
}

int fn_arity(const std::string& head) {
  static const std::map<std::string, int> table = {
      {"plus", 2}, {"mult", 2}, {"append", 2}, {"length", 1}};
  auto it = table.find(head);
  return it == table.end() ? -1 : it->second;
}

bool term_eq(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name) return false;
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!term_eq(a->args[i], b->args[i])) return false;
  return true;
}

namespace {

// Bound-variable renaming environment for alpha comparison.
struct AlphaEnv {
  std::vector<std::pair<std::string, std::string>> pairs;  // (left, right)
  std::optional<std::string> left_to_right(const std::string& l) const {
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it)
      if (it->first == l) return it->second;
    return std::nullopt;
  }
  bool right_is_bound(const std::string& r) const {
    for (auto& pr : pairs)
      if (pr.second == r) return true;
    return false;
  }
};

bool alpha_eq_term(const TermPtr& a, const TermPtr& b, const AlphaEnv& env) {
  if (a->kind != b->kind) return false;
  if (a->kind == Term::Kind::Var) {
    auto mapped = env.left_to_right(a->name);
    if (mapped) return *mapped == b->name;
    // Free variable: names must match and must not capture a bound one.
    return a->name == b->name && !env.right_is_bound(b->name);
  }
  if (a->name != b->name || a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!alpha_eq_term(a->args[i], b->args[i], env)) return false;
  return true;
}

bool alpha_eq_rec(const PropPtr& a, const PropPtr& b, AlphaEnv& env) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Prop::Kind::Atom:
      return a->name == b->name;
    case Prop::Kind::App: {
      if (a->name != b->name || a->terms.size() != b->terms.size()) return false;
      for (size_t i = 0; i < a->terms.size(); ++i)
        if (!alpha_eq_term(a->terms[i], b->terms[i], env)) return false;
      return true;
    }
    case Prop::Kind::Eq:
      return alpha_eq_term(a->terms[0], b->terms[0], env) &&
             alpha_eq_term(a->terms[1], b->terms[1], env);
    case Prop::Kind::Not:
      return alpha_eq_rec(a->props[0], b->props[0], env);
    case Prop::Kind::And:
    case Prop::Kind::Or:
    case Prop::Kind::Implies:
      return alpha_eq_rec(a->props[0], b->props[0], env) &&
             alpha_eq_rec(a->props[1], b->props[1], env);
    case Prop::Kind::Forall: {
      if (a->sort != b->sort) return false;
      env.pairs.emplace_back(a->name, b->name);
      bool ok = alpha_eq_rec(a->props[0], b->props[0], env);
      env.pairs.pop_back();
      return ok;
    }
  }
  return false;
}

}  // namespace

bool alpha_eq(const PropPtr& a, const PropPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  AlphaEnv env;
  return alpha_eq_rec(a, b, env);
}

TermPtr subst_term(const TermPtr& t, const std::string& var, const TermPtr& rep) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name == var ? rep : t;
    case Term::Kind::Zero:
    case Term::Kind::Nil:
    case Term::Kind::True:
    case Term::Kind::False:
      return t;
    default: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      bool changed = false;
      for (auto& a : t->args) {
        auto na = subst_term(a, var, rep);
        changed = changed || na != a;
        args.push_back(na);
      }
      if (!changed) return t;
      return mk_term(t->kind, t->name, std::move(args));
    }
  }
}

PropPtr subst_prop(const PropPtr& p, const std::string& var, const TermPtr& rep) {
  switch (p->kind) {
    case Prop::Kind::Atom:
      return p;
    case Prop::Kind::App:
    case Prop::Kind::Eq: {
      std::vector<TermPtr> terms;
      terms.reserve(p->terms.size());
      bool changed = false;
      for (auto& t : p->terms) {
        auto nt = subst_term(t, var, rep);
        changed = changed || nt != t;
        terms.push_back(nt);
      }
      if (!changed) return p;
      return mk_prop(p->kind, p->name, std::move(terms), {});
    }
    case Prop::Kind::Forall: {
      if (p->name == var) return p;  // shadowed
      auto body = subst_prop(p->props[0], var, rep);
      if (body == p->props[0]) return p;
      return p_forall(p->name, p->sort, body);
    }
    default: {
      std::vector<PropPtr> props;
      props.reserve(p->props.size());
      bool changed = false;
      for (auto& q : p->props) {
        auto nq = subst_prop(q, var, rep);
        changed = changed || nq != q;
        props.push_back(nq);
      }
      if (!changed) return p;
      return mk_prop(p->kind, p->name, {}, std::move(props), p->sort);
    }
  }
}

bool term_contains(const TermPtr& t, const TermPtr& sub) {
  if (term_eq(t, sub)) return true;
  for (auto& a : t->args)
    if (term_contains(a, sub)) return true;
  return false;
}

TermPtr replace_term(const TermPtr& t, const TermPtr& from, const TermPtr& to) {
  if (term_eq(t, from)) return to;
  if (t->args.empty()) return t;
  std::vector<TermPtr> args;
  args.reserve(t->args.size());
  bool changed = false;
  for (auto& a : t->args) {
    auto na = replace_term(a, from, to);
    changed = changed || na != a;
    args.push_back(na);
  }
  if (!changed) return t;
  return mk_term(t->kind, t->name, std::move(args));
}

PropPtr replace_in_prop(const PropPtr& p, const TermPtr& from, const TermPtr& to) {
  switch (p->kind) {
    case Prop::Kind::Atom:
      return p;
    case Prop::Kind::App:
    case Prop::Kind::Eq: {
      std::vector<TermPtr> terms;
      bool changed = false;
      for (auto& t : p->terms) {
        auto nt = replace_term(t, from, to);
        changed = changed || nt != t;
        terms.push_back(nt);
      }
      if (!changed) return p;
      return mk_prop(p->kind, p->name, std::move(terms), {});
    }
    default: {
      std::vector<PropPtr> props;
      bool changed = false;
      for (auto& q : p->props) {
        auto nq = replace_in_prop(q, from, to);
        changed = changed || nq != q;
        props.push_back(nq);
      }
      if (!changed) return p;
      return mk_prop(p->kind, p->name, {}, std::move(props), p->sort);
    }
  }
}

static bool term_mentions_var(const TermPtr& t, const std::string& var) {
  if (t->kind == Term::Kind::Var) return t->name == var;
  for (auto& a : t->args)
    if (term_mentions_var(a, var)) return true;
  return false;
}

bool prop_mentions_var(const PropPtr& p, const std::string& var) {
  if (p->kind == Prop::Kind::Forall && p->name == var) return false;
  for (auto& t : p->terms)
    if (term_mentions_var(t, var)) return true;
  for (auto& q : p->props)
    if (prop_mentions_var(q, var)) return true;
  return false;
}

namespace {

void print_term_rec(std::ostringstream& os, const TermPtr& t, bool parens) {
  switch (t->kind) {
    case Term::Kind::Var: os << t->name; return;
    case Term::Kind::Zero: os << "0"; return;
    case Term::Kind::Nil: os << "nil"; return;
    case Term::Kind::True: os << "true"; return;
    case Term::Kind::False: os << "false"; return;
    case Term::Kind::Succ:
      if (parens) os << "(";
      os << "S ";
      print_term_rec(os, t->args[0], true);
      if (parens) os << ")";
      return;
    case Term::Kind::Cons:
      if (parens) os << "(";
      os << "cons ";
      print_term_rec(os, t->args[0], true);
      os << " ";
      print_term_rec(os, t->args[1], true);
      if (parens) os << ")";
      return;
    case Term::Kind::Fn:
      if (parens) os << "(";
      os << t->name;
      for (auto& a : t->args) {
        os << " ";
        print_term_rec(os, a, true);
      }
      if (parens) os << ")";
      return;
  }
}

struct Renamer {
  // When active, binder names are replaced with _b<k>.
  bool active = false;
  int next = 0;
  std::vector<std::pair<std::string, std::string>> map;
  std::string lookup(const std::string& v) const {
    for (auto it = map.rbegin(); it != map.rend(); ++it)
      if (it->first == v) return it->second;
    return v;
  }
};

TermPtr rename_term(const TermPtr& t, const Renamer& rn) {
  if (t->kind == Term::Kind::Var) {
    auto n = rn.lookup(t->name);
    return n == t->name ? t : t_var(n);
  }
  if (t->args.empty()) return t;
  std::vector<TermPtr> args;
  for (auto& a : t->args) args.push_back(rename_term(a, rn));
  return mk_term(t->kind, t->name, std::move(args));
}

void print_prop_rec(std::ostringstream& os, const PropPtr& p, bool parens, Renamer& rn) {
  auto sub = [&](const PropPtr& q) {
    print_prop_rec(os, q, true, rn);
  };
  switch (p->kind) {
    case Prop::Kind::Atom:
      os << p->name;
      return;
    case Prop::Kind::App:
      if (parens) os << "(";
      os << p->name;
      for (auto& t : p->terms) {
        os << " ";
        print_term_rec(os, rn.active ? rename_term(t, rn) : t, true);
      }
      if (parens) os << ")";
      return;
    case Prop::Kind::Eq:
      if (parens) os << "(";
      os << "eq ";
      print_term_rec(os, rn.active ? rename_term(p->terms[0], rn) : p->terms[0], true);
      os << " ";
      print_term_rec(os, rn.active ? rename_term(p->terms[1], rn) : p->terms[1], true);
      if (parens) os << ")";
      return;
    case Prop::Kind::Not:
      if (parens) os << "(";
      os << "not ";
      sub(p->props[0]);
      if (parens) os << ")";
      return;
    case Prop::Kind::And:
    case Prop::Kind::Or:
    case Prop::Kind::Implies:
      if (parens) os << "(";
      os << (p->kind == Prop::Kind::And ? "and "
             : p->kind == Prop::Kind::Or ? "or "
                                         : "imp ");
      sub(p->props[0]);
      os << " ";
      sub(p->props[1]);
      if (parens) os << ")";
      return;
    case Prop::Kind::Forall: {
      std::string binder = p->name;
      if (rn.active) {
        binder = "_b" + std::to_string(rn.next++);
        rn.map.emplace_back(p->name, binder);
      }
      if (parens) os << "(";
      os << "forall " << binder << " : " << sort_name(p->sort) << ", ";
      print_prop_rec(os, p->props[0], false, rn);
      if (parens) os << ")";
      if (rn.active) rn.map.pop_back();
      return;
    }
  }
}

}  // namespace

std::string print_term(const TermPtr& t) {
  std::ostringstream os;
  print_term_rec(os, t, false);
  return os.str();
}

std::string print_prop(const PropPtr& p) {
  std::ostringstream os;
  Renamer rn;
  print_prop_rec(os, p, false, rn);
  return os.str();
}

std::string canonical_print(const PropPtr& p) {
  std::ostringstream os;
  Renamer rn;
  rn.active = true;
  print_prop_rec(os, p, false, rn);
  return os.str();
}

std::vector<std::string> tokenize(const PropPtr& p) {
  std::string s = print_prop(p);
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    bool ident = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    if (ident) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string head_token(const PropPtr& p) {
  auto toks = tokenize(p);
  if (toks.empty()) throw std::runtime_error("empty tokenization");
  return toks.front();
}

}  // namespace tacsearch
