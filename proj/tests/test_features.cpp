#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tacsearch/features.hpp"
#include "tacsearch/script.hpp"

using namespace tacsearch;

namespace {

PropPtr prop(const std::string& s) { return std::get<PropPtr>(parse_prop(s)); }

}  // namespace

TEST_CASE("similarity is token-set Jaccard") {
  // {and A B} vs {or A B}: intersection {A, B}, union {and, or, A, B}
  CHECK(similarity(prop("and A B"), prop("or A B")) == doctest::Approx(2.0 / 4.0));
  CHECK(similarity(prop("A"), prop("A")) == doctest::Approx(1.0));
  CHECK(similarity(prop("A"), prop("B")) == doctest::Approx(0.0));
  // duplicates collapse: tokens are a set
  CHECK(similarity(prop("and A A"), prop("A")) == doctest::Approx(1.0 / 2.0));
  CHECK(similarity(prop("and A B"), prop("imp B A")) == doctest::Approx(2.0 / 4.0));
}

TEST_CASE("extract_context picks the strictly most similar hypothesis, earliest on ties") {
  Obligation ob;
  ob.goal = prop("and A B");
  ob.hyps.push_back({"H0", prop("or C D")});
  ob.hyps.push_back({"H1", prop("and A B")});
  auto ctx = extract_context(ob, "intro");
  CHECK(ctx.prev_tactic == "intro");
  REQUIRE(ctx.relevant_hyp.has_value());
  CHECK(ctx.relevant_hyp->id == "H1");
  CHECK(ctx.similarity == doctest::Approx(1.0));

  // tie: two hypotheses with equal similarity -> the earlier one wins
  Obligation tie;
  tie.goal = prop("and A B");
  tie.hyps.push_back({"H0", prop("A")});
  tie.hyps.push_back({"H1", prop("B")});
  auto ctx2 = extract_context(tie, "intro");
  CHECK(ctx2.relevant_hyp->id == "H0");

  Obligation none;
  none.goal = prop("A");
  auto ctx3 = extract_context(none, kStartMarker);
  CHECK_FALSE(ctx3.relevant_hyp.has_value());
  CHECK(ctx3.similarity == doctest::Approx(0.0));
}

TEST_CASE("sort declarations are eligible relevant hypotheses but score by their token") {
  Obligation ob;
  ob.goal = prop("eq (plus n 0) n");
  ob.hyps.push_back({"n", prop("nat")});
  auto ctx = extract_context(ob, "intro");
  REQUIRE(ctx.relevant_hyp.has_value());
  CHECK(ctx.relevant_hyp->id == "n");
}

TEST_CASE("build_feature_vocab caps by frequency with lexicographic ties and UNK at 0") {
  std::vector<PredictionContext> ctxs;
  auto add = [&](const std::string& prev, const std::string& goal) {
    PredictionContext c;
    c.prev_tactic = prev;
    c.obligation.goal = prop(goal);
    ctxs.push_back(c);
  };
  add("intro", "and A B");
  add("intro", "and A B");
  add("split", "or A B");
  add("easy", "imp A B");
  auto v = build_feature_vocab(ctxs, 2, 2);
  REQUIRE(v.prev_tactics.size() == 3);  // UNK + 2
  CHECK(v.prev_tactics[0] == kUnkToken);
  CHECK(v.prev_tactics[1] == "intro");
  CHECK(v.prev_tactics[2] == "easy");  // count 1 tie vs "split": lexicographic
  CHECK(v.head_tokens[1] == "and");
  CHECK(v.head_tokens[2] == "imp");
  CHECK(v.prev_id("intro") == 1);
  CHECK(v.prev_id("unknown") == 0);
  CHECK(v.head_id("or") == 0);  // fell off the cap
}

TEST_CASE("encode_features maps unknowns to UNK") {
  std::vector<PredictionContext> ctxs;
  PredictionContext c;
  c.prev_tactic = "intro";
  c.obligation.goal = prop("and A B");
  c.obligation.hyps.push_back({"H0", prop("or A B")});
  c = extract_context(c.obligation, "intro");
  ctxs.push_back(c);
  auto v = build_feature_vocab(ctxs);
  auto e = encode_features(c, v);
  CHECK(e.prev_id == v.prev_id("intro"));
  CHECK(e.goal_head_id == v.head_id("and"));
  CHECK(e.hyp_head_id == v.head_id("or"));
  CHECK(e.similarity == doctest::Approx(c.similarity));

  PredictionContext other;
  other.prev_tactic = "zzz";
  other.obligation.goal = prop("eq 0 0");
  auto e2 = encode_features(other, v);
  CHECK(e2.prev_id == 0);
  CHECK(e2.goal_head_id == 0);
  CHECK(e2.hyp_head_id == 0);
}
