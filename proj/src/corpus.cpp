#include "tacsearch/corpus.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

#include "tacsearch/neural.hpp"

namespace tacsearch {

namespace {

using neural::Rng;

PropPtr prop(const std::string& text) {
  auto r = parse_prop(text);
  if (auto* e = std::get_if<ParseError>(&r))
    throw std::logic_error("corpusgen: bad statement '" + text + "': " + e->message);
  return std::get<PropPtr>(r);
}

ScriptPtr script(const std::string& text) {
  auto r = parse_script(text);
  if (auto* e = std::get_if<ParseError>(&r))
    throw std::logic_error("corpusgen: bad script '" + text + "': " + e->message);
  return std::get<ScriptPtr>(r);
}

std::string num(int k) {
  std::string s = "0";
  for (int i = 0; i < k; ++i) s = "(S " + s + ")";
  return s;
}

size_t pick(Rng& rng, size_t n) { return static_cast<size_t>(rng.next_u64() % n); }

const char* kAtoms[] = {"A", "B", "C", "D", "E"};

// Per-file generation context: names of already-proved helper lemmas that
// later templates chain on.
struct FileCtx {
  CorpusFile file;
  std::string plusz;                 // forall n : nat, eq (plus 0 n) n
  std::string appnil;                // forall l : list, eq (append nil l) l
  // and-projection lemmas: (name, X, Y) proved as  imp (and X Y) X
  std::vector<std::array<std::string, 3>> projs;
  int def_counter = 0;
};

void add_theorem(FileCtx& ctx, const std::string& name, const std::string& stmt,
                 const std::string& scr) {
  Theorem t;
  t.name = name;
  t.statement = prop(stmt);
  t.script = script(scr);
  // Replay oracle: the generator refuses to emit a proof it cannot replay.
  Env env = env_for_theorem(ctx.file, ctx.file.theorems.size());
  TacticRegistry reg;
  auto de = desugar(t.script, reg);
  if (!tactical_replay(env, reg, t.statement, de))
    throw std::logic_error("corpusgen: template proof fails to replay: " + name + " [" + scr + "]");
  auto lin = linearize(env, reg, de, t.statement);
  if (!lin.ok || !check_proof(env, reg, t.statement, lin.commands).pass)
    throw std::logic_error("corpusgen: linearized proof fails: " + name + " [" + scr + "]");
  ctx.file.theorems.push_back(std::move(t));
}

std::string atom(Rng& rng) { return kAtoms[pick(rng, 5)]; }

// Distinct pair of atoms.
void atom2(Rng& rng, std::string& x, std::string& y) {
  x = atom(rng);
  do { y = atom(rng); } while (y == x);
}

void gen_taut_id(FileCtx& ctx, Rng& rng, int idx) {
  std::string x = atom(rng);
  std::string stmt;
  switch (pick(rng, 3)) {
    case 0: stmt = "imp " + x + " " + x; break;
    case 1: stmt = "imp (not " + x + ") (not " + x + ")"; break;
    default: {
      std::string y = atom(rng);
      stmt = "imp (and " + x + " " + y + ") (and " + x + " " + y + ")";
    }
  }
  add_theorem(ctx, "taut" + std::to_string(idx), stmt,
              pick(rng, 2) ? "now intro." : "intro. assumption.");
}

void gen_taut_const(FileCtx& ctx, Rng& rng, int idx) {
  std::string x, y;
  atom2(rng, x, y);
  std::string stmt = "imp " + x + " (imp " + y + " " + x + ")";
  add_theorem(ctx, "konst" + std::to_string(idx), stmt,
              pick(rng, 3) == 0 ? "intro; intro; assumption." : "intro. intro. assumption.");
}

void gen_and_proj(FileCtx& ctx, Rng& rng, int idx) {
  std::string x, y;
  atom2(rng, x, y);
  bool left = pick(rng, 2) == 0;
  std::string name = "proj" + std::to_string(idx);
  std::string stmt = "imp (and " + x + " " + y + ") " + (left ? x : y);
  add_theorem(ctx, name, stmt, "intro. destruct H0. assumption.");
  if (left) ctx.projs.push_back({name, x, y});
}

void gen_and_swap(FileCtx& ctx, Rng& rng, int idx) {
  std::string x, y;
  atom2(rng, x, y);
  add_theorem(ctx, "swap" + std::to_string(idx),
              "imp (and " + x + " " + y + ") (and " + y + " " + x + ")",
              "intro. destruct H0. split; assumption.");
}

void gen_or_intro(FileCtx& ctx, Rng& rng, int idx) {
  std::string x, y;
  atom2(rng, x, y);
  bool left = pick(rng, 2) == 0;
  std::string stmt = "imp " + (left ? x : y) + " (or " + x + " " + y + ")";
  std::string side = left ? "left" : "right";
  std::string scr;
  switch (pick(rng, 3)) {
    case 0: scr = "intro. now " + side + "."; break;
    case 1: scr = "intro. try " + side + ". assumption."; break;
    default: scr = "intro. " + side + ". assumption.";
  }
  add_theorem(ctx, "disj" + std::to_string(idx), stmt, scr);
}

void gen_or_elim(FileCtx& ctx, Rng& rng, int idx) {
  std::string x = atom(rng);
  add_theorem(ctx, "cases" + std::to_string(idx), "imp (or " + x + " " + x + ") " + x,
              "intro. destruct H0; assumption.");
}

void gen_unfold1(FileCtx& ctx, Rng& rng, int idx) {
  std::string x, y;
  atom2(rng, x, y);
  std::string body;
  switch (pick(rng, 4)) {
    case 0: body = "and " + x + " " + y; break;
    case 1: body = "or " + x + " " + y; break;
    case 2: body = "not " + x; break;
    default: body = "imp " + x + " " + y;
  }
  std::string def = "w" + std::to_string(idx);
  ctx.file.definitions.emplace_back(def, prop(body));
  add_theorem(ctx, "open" + std::to_string(idx), "imp (" + body + ") " + def,
              "intro. unfold " + def + ". assumption.");
}

void gen_unfold2(FileCtx& ctx, Rng& rng, int idx) {
  std::string x, y;
  atom2(rng, x, y);
  std::string dm = "w" + std::to_string(idx) + "a";
  std::string dn = "w" + std::to_string(idx) + "b";
  ctx.file.definitions.emplace_back(dm, prop(x));
  ctx.file.definitions.emplace_back(dn, prop(y));
  add_theorem(ctx, "open2" + std::to_string(idx),
              "imp (and " + x + " " + y + ") (and " + dm + " " + dn + ")",
              "intro. unfold " + dm + ", " + dn + ". destruct H0. split; assumption.");
}

void gen_arith_easy(FileCtx& ctx, Rng& rng, int idx) {
  std::string name = "calc" + std::to_string(idx);
  switch (pick(rng, 5)) {
    case 0: {
      int k = 1 + (int)pick(rng, 3);
      std::string rhs = "n";
      for (int i = 0; i < k; ++i) rhs = "(S " + rhs + ")";
      add_theorem(ctx, name, "forall n : nat, eq (plus " + num(k) + " n) " + rhs, "now intro.");
      break;
    }
    case 1:
      add_theorem(ctx, name, "forall n : nat, eq (mult 0 n) 0", "now intro.");
      break;
    case 2:
      add_theorem(ctx, name, "forall l : list, eq (length (cons 0 l)) (S (length l))",
                  "now intro.");
      break;
    case 3: {
      int a = (int)pick(rng, 4), b = (int)pick(rng, 4);
      add_theorem(ctx, name, "eq (plus " + num(a) + " " + num(b) + ") " + num(a + b),
                  "reflexivity.");
      break;
    }
    default: {
      int a = 1 + (int)pick(rng, 3);
      add_theorem(ctx, name, "eq (mult " + num(a) + " 0) 0", pick(rng, 2) ? "now simpl." : "easy.");
      break;
    }
  }
}

void gen_induction(FileCtx& ctx, Rng& rng, int idx) {
  std::string name = "ind" + std::to_string(idx);
  if (pick(rng, 2)) {
    add_theorem(ctx, name, "forall n : nat, eq (plus n 0) n",
                "intro. induction n; simpl. easy. now rewrite IHn.");
  } else {
    add_theorem(ctx, name, "forall n : nat, eq (mult n 0) 0",
                "intro. induction n; simpl. easy. easy.");
  }
}

void gen_apply_chain(FileCtx& ctx, Rng& rng, int idx) {
  if (pick(rng, 2) == 0) {
    int k = (int)pick(rng, 4);
    add_theorem(ctx, "inst" + std::to_string(idx),
                "eq (plus 0 " + num(k) + ") " + num(k), "apply " + ctx.plusz + ".");
    return;
  }
  if (ctx.projs.empty()) {
    gen_and_proj(ctx, rng, idx);
    return;
  }
  auto& [lname, x, y] = ctx.projs[pick(rng, ctx.projs.size())];
  std::string z = atom(rng);
  add_theorem(ctx, "chain" + std::to_string(idx),
              "imp (and " + x + " " + y + ") (or " + x + " " + z + ")",
              "intro. left. apply " + lname + ". assumption.");
}

void gen_rewrite_chain(FileCtx& ctx, Rng& rng, int idx) {
  std::string name = "rw" + std::to_string(idx);
  switch (pick(rng, 3)) {
    case 0:
      add_theorem(ctx, name, "forall m : nat, eq (plus 0 (plus 0 m)) m",
                  "intro. now rewrite " + ctx.plusz + ".");
      break;
    case 1:
      add_theorem(ctx, name, "forall m : nat, eq (plus 0 (plus m 0)) (plus m 0)",
                  "intro. now rewrite " + ctx.plusz + ".");
      break;
    default:
      add_theorem(ctx, name, "forall l : list, eq (append nil (append nil l)) l",
                  "intro. now rewrite " + ctx.appnil + ".");
      break;
  }
}

CorpusFile generate_file(uint64_t seed, int file_idx, int thms) {
  Rng rng(seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull * (uint64_t)(file_idx + 1));
  FileCtx ctx;
  char buf[32];
  std::snprintf(buf, sizeof buf, "file%03d", file_idx);
  ctx.file.name = buf;

  ctx.plusz = "plusz";
  add_theorem(ctx, ctx.plusz, "forall n : nat, eq (plus 0 n) n", "now intro.");
  if (thms >= 2) {
    ctx.appnil = "appnil";
    add_theorem(ctx, ctx.appnil, "forall l : list, eq (append nil l) l", "now intro.");
  }

  // Template mixture; weights tuned so every Argument kind clears the 5% floor.
  struct Entry {
    int weight;
    void (*gen)(FileCtx&, Rng&, int);
  };
  static const Entry entries[] = {
      {8, gen_taut_id},    {7, gen_taut_const}, {10, gen_and_proj},   {6, gen_and_swap},
      {9, gen_or_intro},   {6, gen_or_elim},    {12, gen_unfold1},    {5, gen_unfold2},
      {8, gen_arith_easy}, {4, gen_induction},  {14, gen_apply_chain}, {13, gen_rewrite_chain},
  };
  int total = 0;
  for (auto& e : entries) total += e.weight;
  for (int i = (int)ctx.file.theorems.size(); i < thms; ++i) {
    int r = (int)pick(rng, (size_t)total);
    for (auto& e : entries) {
      r -= e.weight;
      if (r < 0) {
        e.gen(ctx, rng, i);
        break;
      }
    }
  }
  return ctx.file;
}

}  // namespace

Env env_for_theorem(const CorpusFile& file, size_t index) {
  Env env;
  env.definitions = file.definitions;
  for (size_t i = 0; i < index && i < file.theorems.size(); ++i)
    env.lemmas.emplace_back(file.theorems[i].name, file.theorems[i].statement);
  return env;
}

std::vector<CorpusFile> generate_corpus(uint64_t seed, int n_files, int thms_per_file) {
  if (n_files < 1) throw std::invalid_argument("n_files must be >= 1");
  std::vector<CorpusFile> out;
  out.reserve((size_t)n_files);
  for (int i = 0; i < n_files; ++i) out.push_back(generate_file(seed, i, thms_per_file));
  return out;
}

Split split_corpus(const std::vector<CorpusFile>& corpus, double ratio, uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ratio must be in (0,1)");
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed ^ 0xA5A5A5A55A5A5A5Aull);
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[pick(rng, i)]);
  size_t n_train = (size_t)((double)corpus.size() * ratio + 0.5);
  if (n_train == corpus.size() && corpus.size() > 1) n_train--;
  if (n_train == 0) n_train = corpus.size() > 1 ? 1 : 0;
  Split s;
  for (size_t k = 0; k < order.size(); ++k) {
    const CorpusFile& f = corpus[order[k]];
    if (k < n_train)
      s.train.push_back(f);
    else if (!f.theorems.empty())  // test files without proofs are dropped
      s.test.push_back(f);
  }
  return s;
}

std::string corpus_manifest_json(const std::vector<CorpusFile>& corpus) {
  nlohmann::ordered_json j;
  j["files"] = nlohmann::ordered_json::array();
  size_t thms = 0, defs = 0;
  for (auto& f : corpus) {
    j["files"].push_back({{"name", f.name + ".vs"},
                          {"definitions", f.definitions.size()},
                          {"theorems", f.theorems.size()}});
    thms += f.theorems.size();
    defs += f.definitions.size();
  }
  j["total_files"] = corpus.size();
  j["total_definitions"] = defs;
  j["total_theorems"] = thms;
  return j.dump(2) + "\n";
}

}  // namespace tacsearch
