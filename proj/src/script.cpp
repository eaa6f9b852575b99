#include "tacsearch/script.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace tacsearch {

namespace {

struct Token {
  enum class Kind { Ident, Dot, Semi, Comma, Colon, ColonEq, LParen, RParen, End };
  Kind kind;
  std::string text;
  int line, col;
};

struct Lexer {
  std::string src;
  size_t pos = 0;
  int line = 1, col = 1;
  std::vector<Token> tokens;
  std::optional<ParseError> error;

  void push(Token::Kind k, std::string t, int l, int c) {
    tokens.push_back({k, std::move(t), l, c});
  }

  void run() {
    while (pos < src.size()) {
      char c = src[pos];
      int l = line, co = col;
      auto adv = [&](size_t n = 1) {
        for (size_t i = 0; i < n; ++i) {
          if (src[pos] == '\n') {
            ++line;
            col = 1;
          } else {
            ++col;
          }
          ++pos;
        }
      };
      if (std::isspace(static_cast<unsigned char>(c))) {
        adv();
        continue;
      }
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'') {
        std::string id;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' ||
                src[pos] == '\'')) {
          id.push_back(src[pos]);
          adv();
        }
        push(Token::Kind::Ident, id, l, co);
        continue;
      }
      switch (c) {
        case '.': push(Token::Kind::Dot, ".", l, co); adv(); break;
        case ';': push(Token::Kind::Semi, ";", l, co); adv(); break;
        case ',': push(Token::Kind::Comma, ",", l, co); adv(); break;
        case '(': push(Token::Kind::LParen, "(", l, co); adv(); break;
        case ')': push(Token::Kind::RParen, ")", l, co); adv(); break;
        case ':':
          if (pos + 1 < src.size() && src[pos + 1] == '=') {
            push(Token::Kind::ColonEq, ":=", l, co);
            adv(2);
          } else {
            push(Token::Kind::Colon, ":", l, co);
            adv();
          }
          break;
        default:
          error = ParseError{l, co, std::string("unexpected character '") + c + "'"};
          return;
      }
    }
    push(Token::Kind::End, "", line, col);
  }
};

struct Parser {
  std::vector<Token> toks;
  size_t i = 0;
  std::optional<ParseError> error;

  const Token& peek(size_t k = 0) const { return toks[std::min(i + k, toks.size() - 1)]; }
  const Token& next() { return toks[i < toks.size() - 1 ? i++ : i]; }
  bool at_ident(const std::string& s) const {
    return peek().kind == Token::Kind::Ident && peek().text == s;
  }
  void fail(const std::string& msg) {
    if (!error) error = ParseError{peek().line, peek().col, msg};
  }
  bool expect(Token::Kind k, const std::string& what) {
    if (peek().kind != k) {
      fail("expected " + what);
      return false;
    }
    next();
    return true;
  }

  // ---- terms / props -------------------------------------------------

  TermPtr parse_term_atom() {
    const Token& t = peek();
    if (t.kind == Token::Kind::LParen) {
      next();
      auto inner = parse_term();
      if (!inner) return nullptr;
      if (!expect(Token::Kind::RParen, "')'")) return nullptr;
      return inner;
    }
    if (t.kind != Token::Kind::Ident) {
      fail("expected a term");
      return nullptr;
    }
    next();
    if (t.text == "0") return t_zero();
    if (t.text == "nil") return t_nil();
    if (t.text == "true") return t_true();
    if (t.text == "false") return t_false();
    return t_var(t.text);
  }

  TermPtr parse_term() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Ident) {
      if (t.text == "S") {
        next();
        auto a = parse_term_atom();
        return a ? t_succ(a) : nullptr;
      }
      if (t.text == "cons") {
        next();
        auto a = parse_term_atom();
        auto b = a ? parse_term_atom() : nullptr;
        return b ? t_cons(a, b) : nullptr;
      }
      int ar = fn_arity(t.text);
      if (ar > 0) {
        std::string head = t.text;
        next();
        std::vector<TermPtr> args;
        for (int k = 0; k < ar; ++k) {
          auto a = parse_term_atom();
          if (!a) return nullptr;
          args.push_back(a);
        }
        return t_fn(head, std::move(args));
      }
    }
    return parse_term_atom();
  }

  bool starts_term() const {
    return peek().kind == Token::Kind::Ident || peek().kind == Token::Kind::LParen;
  }

  PropPtr parse_prop_atom() {
    if (peek().kind == Token::Kind::LParen) {
      next();
      auto p = parse_prop();
      if (!p) return nullptr;
      if (!expect(Token::Kind::RParen, "')'")) return nullptr;
      return p;
    }
    if (peek().kind != Token::Kind::Ident) {
      fail("expected a proposition");
      return nullptr;
    }
    return p_atom(next().text);
  }

  PropPtr parse_prop() {
    const Token& t = peek();
    if (t.kind == Token::Kind::LParen) return parse_prop_atom();
    if (t.kind != Token::Kind::Ident) {
      fail("expected a proposition");
      return nullptr;
    }
    if (t.text == "forall") {
      next();
      if (peek().kind != Token::Kind::Ident) {
        fail("expected a binder name");
        return nullptr;
      }
      std::string var = next().text;
      if (!expect(Token::Kind::Colon, "':'")) return nullptr;
      if (peek().kind != Token::Kind::Ident) {
        fail("expected a sort");
        return nullptr;
      }
      auto sort = sort_from_name(peek().text);
      if (!sort) {
        fail("unknown sort " + peek().text);
        return nullptr;
      }
      next();
      if (!expect(Token::Kind::Comma, "','")) return nullptr;
      auto body = parse_prop();
      return body ? p_forall(var, *sort, body) : nullptr;
    }
    if (t.text == "not") {
      next();
      auto p = parse_prop_atom();
      return p ? p_not(p) : nullptr;
    }
    if (t.text == "and" || t.text == "or" || t.text == "imp") {
      std::string op = next().text;
      auto l = parse_prop_atom();
      auto r = l ? parse_prop_atom() : nullptr;
      if (!r) return nullptr;
      if (op == "and") return p_and(l, r);
      if (op == "or") return p_or(l, r);
      return p_implies(l, r);
    }
    if (t.text == "eq") {
      next();
      auto l = parse_term_atom();
      auto r = l ? parse_term_atom() : nullptr;
      return r ? p_eq(l, r) : nullptr;
    }
    // Atom or App: collect argument terms greedily.
    std::string head = next().text;
    std::vector<TermPtr> args;
    while (starts_term()) {
      auto a = parse_term_atom();
      if (!a) return nullptr;
      args.push_back(a);
    }
    if (args.empty()) return p_atom(head);
    return p_app(head, std::move(args));
  }

  // ---- scripts -------------------------------------------------------

  ScriptPtr parse_expr() { return parse_seq(); }

  ScriptPtr parse_base() {
    if (peek().kind == Token::Kind::LParen) {
      next();
      auto e = parse_expr();
      if (!e) return nullptr;
      if (!expect(Token::Kind::RParen, "')'")) return nullptr;
      return e;
    }
    if (peek().kind != Token::Kind::Ident) {
      fail("expected a tactic name");
      return nullptr;
    }
    std::string name = next().text;
    if (name == "repeat") {
      fail("unsupported tactical 'repeat'");
      return nullptr;
    }
    std::vector<std::string> args;
    while (peek().kind == Token::Kind::Ident && peek().text != "by") {
      args.push_back(next().text);
      if (peek().kind == Token::Kind::Comma) {
        next();
        continue;
      }
      break;
    }
    if (at_ident("by")) {
      if (args.size() != 1) {
        fail("'by' requires exactly one preceding argument");
        return nullptr;
      }
      next();
      auto tac = parse_expr();
      if (!tac) return nullptr;
      return s_tacby(name, args[0], tac);
    }
    if (args.size() > 1) return s_multi(name, std::move(args));
    if (args.size() == 1) return s_atomic(name, args[0]);
    return s_atomic(name);
  }

  ScriptPtr parse_prefix() {
    if (at_ident("try")) {
      next();
      auto b = parse_base();
      return b ? s_try(b) : nullptr;
    }
    if (at_ident("now")) {
      next();
      auto b = parse_base();
      return b ? s_now(b) : nullptr;
    }
    return parse_base();
  }

  ScriptPtr parse_seq() {
    auto l = parse_prefix();
    if (!l) return nullptr;
    while (peek().kind == Token::Kind::Semi) {
      next();
      auto r = parse_prefix();
      if (!r) return nullptr;
      l = s_seq(l, r);
    }
    return l;
  }

  ScriptPtr parse_script_block(bool stop_at_qed) {
    std::vector<ScriptPtr> stmts;
    while (true) {
      if (peek().kind == Token::Kind::End) break;
      if (stop_at_qed && at_ident("Qed")) break;
      auto e = parse_seq();
      if (!e) return nullptr;
      if (!expect(Token::Kind::Dot, "'.'")) return nullptr;
      stmts.push_back(e);
    }
    if (stmts.empty()) {
      fail("empty script");
      return nullptr;
    }
    return s_block(std::move(stmts));
  }

  std::optional<CorpusFile> parse_corpus(const std::string& name) {
    CorpusFile f;
    f.name = name;
    while (peek().kind != Token::Kind::End) {
      if (at_ident("Definition")) {
        next();
        if (peek().kind != Token::Kind::Ident) {
          fail("expected a definition name");
          return std::nullopt;
        }
        std::string dname = next().text;
        if (!expect(Token::Kind::ColonEq, "':='")) return std::nullopt;
        auto p = parse_prop();
        if (!p) return std::nullopt;
        if (!expect(Token::Kind::Dot, "'.'")) return std::nullopt;
        f.definitions.emplace_back(dname, p);
        continue;
      }
      if (at_ident("Theorem")) {
        next();
        if (peek().kind != Token::Kind::Ident) {
          fail("expected a theorem name");
          return std::nullopt;
        }
        Theorem thm;
        thm.name = next().text;
        if (!expect(Token::Kind::Colon, "':'")) return std::nullopt;
        thm.statement = parse_prop();
        if (!thm.statement) return std::nullopt;
        if (!expect(Token::Kind::Dot, "'.'")) return std::nullopt;
        if (!at_ident("Proof")) {
          fail("expected 'Proof'");
          return std::nullopt;
        }
        next();
        if (!expect(Token::Kind::Dot, "'.'")) return std::nullopt;
        thm.script = parse_script_block(/*stop_at_qed=*/true);
        if (!thm.script) return std::nullopt;
        if (!at_ident("Qed")) {
          fail("expected 'Qed'");
          return std::nullopt;
        }
        next();
        if (!expect(Token::Kind::Dot, "'.'")) return std::nullopt;
        f.theorems.push_back(std::move(thm));
        continue;
      }
      fail("expected 'Definition' or 'Theorem'");
      return std::nullopt;
    }
    return f;
  }
};

std::optional<Parser> make_parser(const std::string& text, std::optional<ParseError>& err) {
  Lexer lex;
  lex.src = text;
  lex.run();
  if (lex.error) {
    err = lex.error;
    return std::nullopt;
  }
  Parser p;
  p.toks = std::move(lex.tokens);
  return p;
}

ScriptPtr mk(ScriptAst a) { return std::make_shared<ScriptAst>(std::move(a)); }

}  // namespace

ScriptPtr s_atomic(std::string tactic, std::optional<std::string> arg) {
  ScriptAst a;
  a.kind = ScriptAst::Kind::Atomic;
  a.tactic = std::move(tactic);
  a.raw_arg = std::move(arg);
  return mk(std::move(a));
}
ScriptPtr s_seq(ScriptPtr l, ScriptPtr r) {
  ScriptAst a;
  a.kind = ScriptAst::Kind::Seq;
  a.left = std::move(l);
  a.right = std::move(r);
  return mk(std::move(a));
}
ScriptPtr s_now(ScriptPtr t) {
  ScriptAst a;
  a.kind = ScriptAst::Kind::Now;
  a.left = std::move(t);
  return mk(std::move(a));
}
ScriptPtr s_try(ScriptPtr t) {
  ScriptAst a;
  a.kind = ScriptAst::Kind::Try;
  a.left = std::move(t);
  return mk(std::move(a));
}
ScriptPtr s_tacby(std::string tactic, std::string term, ScriptPtr tac) {
  ScriptAst a;
  a.kind = ScriptAst::Kind::TacBy;
  a.tactic = std::move(tactic);
  a.raw_arg = std::move(term);
  a.left = std::move(tac);
  return mk(std::move(a));
}
ScriptPtr s_multi(std::string tactic, std::vector<std::string> args) {
  ScriptAst a;
  a.kind = ScriptAst::Kind::MultiArg;
  a.tactic = std::move(tactic);
  a.raw_args = std::move(args);
  return mk(std::move(a));
}
ScriptPtr s_block(std::vector<ScriptPtr> stmts) {
  ScriptAst a;
  a.kind = ScriptAst::Kind::Block;
  a.stmts = std::move(stmts);
  return mk(std::move(a));
}

static void script_str(const ScriptPtr& s, std::ostringstream& os, bool parens) {
  switch (s->kind) {
    case ScriptAst::Kind::Atomic:
      os << s->tactic;
      if (s->raw_arg) os << " " << *s->raw_arg;
      return;
    case ScriptAst::Kind::Seq:
      if (parens) os << "(";
      script_str(s->left, os, true);
      os << "; ";
      script_str(s->right, os, true);
      if (parens) os << ")";
      return;
    case ScriptAst::Kind::Now:
      os << "now ";
      script_str(s->left, os, true);
      return;
    case ScriptAst::Kind::Try:
      os << "try ";
      script_str(s->left, os, true);
      return;
    case ScriptAst::Kind::TacBy:
      os << s->tactic << " " << *s->raw_arg << " by ";
      script_str(s->left, os, true);
      return;
    case ScriptAst::Kind::MultiArg: {
      os << s->tactic << " ";
      for (size_t i = 0; i < s->raw_args.size(); ++i) {
        if (i) os << ", ";
        os << s->raw_args[i];
      }
      return;
    }
    case ScriptAst::Kind::Block:
      for (size_t i = 0; i < s->stmts.size(); ++i) {
        if (i) os << " ";
        script_str(s->stmts[i], os, false);
        os << ".";
      }
      return;
  }
}

std::string script_to_string(const ScriptPtr& s) {
  std::ostringstream os;
  script_str(s, os, false);
  return os.str();
}

std::variant<ScriptPtr, ParseError> parse_script(const std::string& text) {
  std::optional<ParseError> err;
  auto p = make_parser(text, err);
  if (!p) return *err;
  auto s = p->parse_script_block(false);
  if (!s) return *p->error;
  if (p->peek().kind != Token::Kind::End) return ParseError{p->peek().line, p->peek().col, "trailing input"};
  return s;
}

std::variant<PropPtr, ParseError> parse_prop(const std::string& text) {
  std::optional<ParseError> err;
  auto p = make_parser(text, err);
  if (!p) return *err;
  auto prop = p->parse_prop();
  if (!prop) return *p->error;
  if (p->peek().kind != Token::Kind::End)
    return ParseError{p->peek().line, p->peek().col, "trailing input"};
  return prop;
}

std::variant<CorpusFile, ParseError> parse_file(const std::string& name, const std::string& text) {
  std::optional<ParseError> err;
  auto p = make_parser(text, err);
  if (!p) return *err;
  auto f = p->parse_corpus(name);
  if (!f) return *p->error;
  return *f;
}

std::string file_to_string(const CorpusFile& f) {
  std::ostringstream os;
  for (auto& [n, d] : f.definitions) os << "Definition " << n << " := " << print_prop(d) << ".\n";
  if (!f.definitions.empty()) os << "\n";
  for (auto& t : f.theorems) {
    os << "Theorem " << t.name << " : " << print_prop(t.statement) << ".\n";
    os << "Proof. " << script_to_string(t.script) << " Qed.\n\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Desugaring

static ScriptPtr desugar_expr(const ScriptPtr& s, TacticRegistry& reg) {
  switch (s->kind) {
    case ScriptAst::Kind::Atomic:
      return s;
    case ScriptAst::Kind::Seq: {
      auto l = desugar_expr(s->left, reg);
      auto r = desugar_expr(s->right, reg);
      return (l == s->left && r == s->right) ? s : s_seq(l, r);
    }
    case ScriptAst::Kind::Now:
      return s_seq(desugar_expr(s->left, reg), s_atomic("easy"));
    case ScriptAst::Kind::TacBy:
      // The kernel's rewrite produces no side conditions, so the "by" branch
      // could never receive an obligation; it desugars away.
      return s_atomic(s->tactic, s->raw_arg);
    case ScriptAst::Kind::MultiArg: {
      // In expression position "unfold a, b" chains through ";": each step
      // leaves exactly one obligation.
      ScriptPtr acc = s_atomic(s->tactic, s->raw_args.back());
      for (size_t i = s->raw_args.size() - 1; i-- > 0;)
        acc = s_seq(s_atomic(s->tactic, s->raw_args[i]), acc);
      return acc;
    }
    case ScriptAst::Kind::Try: {
      auto inner = desugar_expr(s->left, reg);
      if (inner->kind != ScriptAst::Kind::Atomic) return s_try(inner);
      if (inner->tactic == "easy") return s_atomic("try_easy");
      if (inner->tactic == "assumption") return s_atomic("try_assumption");
      std::string learned = "try " + inner->tactic;
      reg.register_learned(learned);
      return s_atomic(learned, inner->raw_arg);
    }
    case ScriptAst::Kind::Block:
      return s;  // handled by desugar()
  }
  return s;
}

ScriptPtr desugar(const ScriptPtr& ast, TacticRegistry& reg) {
  if (ast->kind != ScriptAst::Kind::Block) return desugar_expr(ast, reg);
  std::vector<ScriptPtr> stmts;
  for (auto& st : ast->stmts) {
    if (st->kind == ScriptAst::Kind::MultiArg) {
      // "unfold a, b." becomes "unfold a. unfold b."
      for (auto& a : st->raw_args) stmts.push_back(s_atomic(st->tactic, a));
    } else {
      stmts.push_back(desugar_expr(st, reg));
    }
  }
  return s_block(std::move(stmts));
}

// ---------------------------------------------------------------------------
// Replay and linearization

namespace {

std::optional<Argument> classify_arg(const Env& env, const Obligation& ob,
                                     const std::string& raw) {
  if (ob.find_hyp(raw)) return Argument{Argument::Kind::HypIdent, raw};
  if (env.find_lemma(raw)) return Argument{Argument::Kind::LemmaIdent, raw};
  auto toks = tokenize(ob.goal);
  if (std::find(toks.begin(), toks.end(), raw) != toks.end())
    return Argument{Argument::Kind::GoalToken, raw};
  return std::nullopt;
}

// One open obligation plus the ";"-continuations still queued for it. A
// Seq(l, r) expands into pending [l, r]; every child produced by l inherits
// the remaining queue, which is exactly "run r on every sub-obligation".
struct WorkItem {
  Obligation ob;
  std::vector<ScriptPtr> pending;  // front = next expression to run
};

// Replays the whole dot-sequence, always acting on the first open obligation,
// so the emitted command order replays through check_proof by construction.
std::optional<std::vector<ProofCommand>> run_block(const Env& env, const TacticRegistry& reg,
                                                   const PropPtr& theorem, const ScriptPtr& block) {
  if (block->kind != ScriptAst::Kind::Block) return std::nullopt;
  std::vector<WorkItem> open{WorkItem{Obligation{{}, theorem}, {}}};
  std::vector<ProofCommand> commands;
  size_t next_stmt = 0;
  while (!open.empty()) {
    WorkItem& front = open.front();
    if (front.pending.empty()) {
      if (next_stmt == block->stmts.size()) return std::nullopt;  // proof ends with open goals
      front.pending.push_back(block->stmts[next_stmt++]);
    }
    ScriptPtr e = front.pending.front();
    front.pending.erase(front.pending.begin());
    if (e->kind == ScriptAst::Kind::Seq) {
      front.pending.insert(front.pending.begin(), {e->left, e->right});
      continue;
    }
    if (e->kind != ScriptAst::Kind::Atomic) return std::nullopt;  // undesugared node
    ProofCommand cmd;
    cmd.tactic = e->tactic;
    if (e->raw_arg) {
      auto a = classify_arg(env, front.ob, *e->raw_arg);
      if (!a) return std::nullopt;
      cmd.arg = *a;
    }
    ProofState st;
    st.obligations.push_back({front.ob, {}});
    auto res = apply_tactic(env, reg, st, cmd);
    if (std::holds_alternative<TacticError>(res)) return std::nullopt;
    commands.push_back(cmd);
    std::vector<WorkItem> children;
    for (auto& [o, h] : std::get<ProofState>(res).obligations)
      children.push_back(WorkItem{o, front.pending});
    open.erase(open.begin());
    open.insert(open.begin(), children.begin(), children.end());
  }
  if (next_stmt != block->stmts.size()) return std::nullopt;  // commands after the QED point
  return commands;
}

}  // namespace

bool tactical_replay(const Env& env, const TacticRegistry& reg, const PropPtr& theorem,
                     const ScriptPtr& desugared) {
  return run_block(env, reg, theorem, desugared).has_value();
}

LinearScript linearize(const Env& env, const TacticRegistry& reg, const ScriptPtr& desugared,
                       const PropPtr& theorem) {
  LinearScript out;
  auto cmds = run_block(env, reg, theorem, desugared);
  if (!cmds) return out;
  out.commands = std::move(*cmds);
  out.ok = true;
  return out;
}

bool is_first_order(const ScriptPtr& ast) {
  if (ast->kind == ScriptAst::Kind::Atomic) return true;
  if (ast->kind != ScriptAst::Kind::Block) return false;
  for (auto& s : ast->stmts)
    if (s->kind != ScriptAst::Kind::Atomic) return false;
  return true;
}

}  // namespace tacsearch
