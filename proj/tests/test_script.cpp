#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tacsearch/corpus.hpp"
#include "tacsearch/script.hpp"

using namespace tacsearch;

namespace {

PropPtr prop(const std::string& s) {
  auto r = parse_prop(s);
  REQUIRE(std::holds_alternative<PropPtr>(r));
  return std::get<PropPtr>(r);
}

ScriptPtr script(const std::string& s) {
  auto r = parse_script(s);
  if (auto* err = std::get_if<ParseError>(&r))
    FAIL("parse error at " << err->line << ":" << err->column << ": " << err->message);
  return std::get<ScriptPtr>(r);
}

}  // namespace

TEST_CASE("script parser round-trips the tactical forms") {
  CHECK(script_to_string(script("intro. assumption.")) == "intro. assumption.");
  CHECK(script_to_string(script("intro; assumption.")) == "intro; assumption.");
  CHECK(script_to_string(script("now intro.")) == "now intro.");
  CHECK(script_to_string(script("try left. assumption.")) == "try left. assumption.");
  CHECK(script_to_string(script("unfold a, b.")) == "unfold a, b.");
  CHECK(script_to_string(script("destruct H0; assumption.")) == "destruct H0; assumption.");
  CHECK(script_to_string(script("rewrite plusz by easy.")) == "rewrite plusz by easy.");
}

TEST_CASE("parse errors carry a position") {
  auto r = parse_script("intro")  /* missing dot */;
  REQUIRE(std::holds_alternative<ParseError>(r));
  CHECK(std::get<ParseError>(r).line >= 1);
  CHECK(std::holds_alternative<ParseError>(parse_script("intro;. easy.")));
  CHECK(std::holds_alternative<ParseError>(parse_prop("imp (and A) B")));
}

TEST_CASE("desugar eliminates now, try, by, and multi-arg forms") {
  TacticRegistry reg;
  auto d1 = desugar(script("now intro."), reg);
  CHECK(script_to_string(d1) == "intro; easy.");
  auto d2 = desugar(script("try left. assumption."), reg);
  CHECK(script_to_string(d2) == "try left. assumption.");
  CHECK(reg.known("try left"));
  auto d3 = desugar(script("unfold a, b."), reg);
  CHECK(script_to_string(d3) == "unfold a. unfold b.");
  auto d4 = desugar(script("rewrite plusz by easy."), reg);
  CHECK(script_to_string(d4) == "rewrite plusz.");
  // multi-arg in expression position becomes a seq chain
  auto d5 = desugar(script("intro; unfold a, b."), reg);
  CHECK(script_to_string(d5) == "intro; (unfold a; unfold b).");
}

TEST_CASE("desugar is idempotent") {
  TacticRegistry reg;
  for (auto* s : {"now intro.", "try left. assumption.", "unfold a, b.",
                  "intro. destruct H0; assumption.", "rewrite x by easy."}) {
    auto once = desugar(script(s), reg);
    auto twice = desugar(once, reg);
    CHECK(script_to_string(once) == script_to_string(twice));
  }
}

TEST_CASE("tactical replay runs ; on every child") {
  Env env;
  TacticRegistry reg;
  auto thm = prop("imp (and A B) (and B A)");
  auto d = desugar(script("intro. destruct H0. split; assumption."), reg);
  CHECK(tactical_replay(env, reg, thm, d));
  auto wrong = desugar(script("intro. split; assumption."), reg);
  CHECK_FALSE(tactical_replay(env, reg, thm, wrong));
}

TEST_CASE("linearize expands ; into a flat command list that replays") {
  Env env;
  TacticRegistry reg;
  auto thm = prop("imp (and A B) (and B A)");
  auto lin = linearize(env, reg, desugar(script("intro. destruct H0. split; assumption."), reg), thm);
  REQUIRE(lin.ok);
  REQUIRE(lin.commands.size() == 5);
  CHECK(lin.commands[2].tactic == "split");
  CHECK(lin.commands[3].tactic == "assumption");
  CHECK(lin.commands[4].tactic == "assumption");
  CHECK(check_proof(env, reg, thm, lin.commands).pass);
}

TEST_CASE("linearize emits commands in kernel first-obligation order") {
  // after `induction n; simpl`, the base obligation must be closed before the
  // step obligation's commands appear
  Env env;
  TacticRegistry reg;
  auto thm = prop("forall n : nat, eq (mult n 0) 0");
  auto d = desugar(script("intro. induction n; simpl. easy. easy."), reg);
  auto lin = linearize(env, reg, d, thm);
  REQUIRE(lin.ok);
  std::vector<std::string> names;
  for (auto& c : lin.commands) names.push_back(c.tactic);
  CHECK(names == std::vector<std::string>{"intro", "induction", "simpl", "easy", "simpl", "easy"});
  CHECK(check_proof(env, reg, thm, lin.commands).pass);
}

TEST_CASE("linearize fails on incomplete or stuck scripts") {
  Env env;
  TacticRegistry reg;
  auto thm = prop("imp (and A B) (and B A)");
  CHECK_FALSE(linearize(env, reg, desugar(script("intro."), reg), thm).ok);
  CHECK_FALSE(linearize(env, reg, desugar(script("split; assumption."), reg), thm).ok);
}

TEST_CASE("is_first_order recognizes plain dot sequences only") {
  CHECK(is_first_order(script("intro. destruct H0. assumption.")));
  CHECK_FALSE(is_first_order(script("intro; assumption.")));
  CHECK_FALSE(is_first_order(script("now intro.")));
  CHECK_FALSE(is_first_order(script("try left. assumption.")));
  CHECK_FALSE(is_first_order(script("unfold a, b.")));
}

TEST_CASE("corpus files parse and print through a stable round-trip") {
  auto corpus = generate_corpus(7, 2, 6);
  for (auto& f : corpus) {
    auto text = file_to_string(f);
    auto parsed = parse_file(f.name, text);
    REQUIRE(std::holds_alternative<CorpusFile>(parsed));
    auto& g = std::get<CorpusFile>(parsed);
    CHECK(g.definitions.size() == f.definitions.size());
    REQUIRE(g.theorems.size() == f.theorems.size());
    for (size_t i = 0; i < g.theorems.size(); ++i) {
      CHECK(g.theorems[i].name == f.theorems[i].name);
      CHECK(alpha_eq(g.theorems[i].statement, f.theorems[i].statement));
      CHECK(script_to_string(g.theorems[i].script) == script_to_string(f.theorems[i].script));
    }
    CHECK(file_to_string(g) == text);
  }
}
