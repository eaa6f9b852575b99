#include "tacsearch/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace tacsearch {

using neural::Mat;
using neural::Rng;
using neural::Tape;

// ---------------------------------------------------------------------------
// Sample extraction

std::vector<TrainingSample> extract_samples(const CorpusFile& file, TacticRegistry& reg,
                                            bool transform, size_t* dropped) {
  std::vector<TrainingSample> out;
  for (size_t i = 0; i < file.theorems.size(); ++i) {
    const Theorem& thm = file.theorems[i];
    Env env = env_for_theorem(file, i);
    LinearScript lin;
    if (transform) {
      auto de = desugar(thm.script, reg);
      lin = linearize(env, reg, de, thm.statement);
    } else if (is_first_order(thm.script)) {
      // No tactical transformation: only proofs already free of tacticals
      // are kept (desugar is the identity on them).
      lin = linearize(env, reg, thm.script, thm.statement);
    }
    if (!lin.ok) {
      if (dropped) ++*dropped;
      continue;
    }
    ProofState state = ProofState::initial(thm.statement);
    std::string prev = kStartMarker;
    for (auto& cmd : lin.commands) {
      TrainingSample s;
      s.ctx = extract_context(state, prev);
      s.label = cmd;
      s.lemma_pool = env.lemmas;
      out.push_back(std::move(s));
      auto res = apply_tactic(env, reg, state, cmd);
      state = std::get<ProofState>(std::move(res));  // linearized: cannot fail
      prev = cmd.tactic;
    }
  }
  return out;
}

std::vector<std::string> build_token_vocab(const std::vector<TrainingSample>& samples) {
  std::set<std::string> toks;
  for (auto& s : samples) {
    for (auto& t : tokenize(s.ctx.obligation.goal)) toks.insert(t);
    for (auto& h : s.ctx.obligation.hyps)
      for (auto& t : tokenize(h.prop)) toks.insert(t);
    for (auto& [name, stmt] : s.lemma_pool)
      for (auto& t : tokenize(stmt)) toks.insert(t);
  }
  std::vector<std::string> vocab{kUnkToken};
  vocab.insert(vocab.end(), toks.begin(), toks.end());
  return vocab;
}

// ---------------------------------------------------------------------------
// Weight initialization

neural::ModelWeights init_weights(const FeatureVocab& fv,
                                  const std::vector<std::string>& tactic_vocab,
                                  const std::vector<std::string>& token_vocab, uint64_t seed,
                                  int hidden) {
  neural::ModelWeights w;
  w.feat_vocab = fv;
  w.feat_vocab.rebuild_index();
  w.tactic_vocab = tactic_vocab;
  w.token_vocab = token_vocab;
  w.hidden = hidden;
  w.rebuild_index();
  Rng rng(seed ^ 0x5EEDF00Dull);
  const int H = hidden;
  auto emb = [&](int vocab) { return neural::init_matrix(H, vocab, H, rng); };
  w.params["tac.prev_emb"] = emb((int)fv.prev_tactics.size());
  w.params["tac.goal_emb"] = emb((int)fv.head_tokens.size());
  w.params["tac.hyp_emb"] = emb((int)fv.head_tokens.size());
  neural::FfnParams ffn;
  ffn.init(w.params, 3 * H + 1, H, (int)tactic_vocab.size(), rng, "tac.ffn");

  w.params["arg.tok_emb"] = emb((int)token_vocab.size());
  w.params["arg.tac_emb"] = emb((int)tactic_vocab.size());
  neural::GruParams gru;
  gru.init(w.params, H, H, rng, "arg.enc");
  gru.init(w.params, H, H, rng, "arg.goal_rnn");
  gru.init(w.params, H, H, rng, "arg.hyp_rnn");
  ffn.init(w.params, 2 * H + 1, H, H, rng, "arg.init");
  w.params["arg.goal_out.W"] = neural::init_matrix(1, H, H, rng);
  w.params["arg.goal_out.b"] = neural::init_matrix(1, 1, H, rng);
  w.params["arg.hyp_out.W"] = neural::init_matrix(1, H, H, rng);
  w.params["arg.hyp_out.b"] = neural::init_matrix(1, 1, H, rng);
  return w;
}

// ---------------------------------------------------------------------------
// Tactic model forward

namespace {

Tape::Id tactic_logits_graph(Tape& t, const neural::ModelWeights& w, const PredictionContext& ctx) {
  EncodedFeatures e = encode_features(ctx, w.feat_vocab);
  Mat sim(1, 1);
  sim(0, 0) = e.similarity;
  auto x = t.vcat({t.gather_cols(t.leaf("tac.prev_emb", &w.params.at("tac.prev_emb")), {e.prev_id}),
                   t.gather_cols(t.leaf("tac.goal_emb", &w.params.at("tac.goal_emb")),
                                 {e.goal_head_id}),
                   t.gather_cols(t.leaf("tac.hyp_emb", &w.params.at("tac.hyp_emb")), {e.hyp_head_id}),
                   t.input(sim)});
  return ffn_forward(t, w.params, "tac.ffn", x);
}

std::vector<double> tactic_probs(const neural::ModelWeights& w, const PredictionContext& ctx) {
  Tape t;
  auto logits = tactic_logits_graph(t, w, ctx);
  Mat p = neural::softmax(t.value(logits));
  return std::vector<double>(p.data(), p.data() + p.size());
}

}  // namespace

Tape::Id tactic_loss_graph(Tape& t, const neural::ModelWeights& w, const TrainingSample& s) {
  auto logits = tactic_logits_graph(t, w, s.ctx);
  int target = w.tactic_id(s.label.tactic);
  if (target < 0) throw std::runtime_error("label tactic not in vocab: " + s.label.tactic);
  return t.nll_from_logits(logits, target);
}

std::vector<ScoredTactic> predict_tactics(const neural::ModelWeights& w,
                                          const PredictionContext& ctx, int n) {
  auto p = tactic_probs(w, ctx);
  std::vector<ScoredTactic> out;
  for (size_t i = 0; i < p.size(); ++i)
    out.push_back({w.tactic_vocab[i], (int)i, p[i]});
  std::stable_sort(out.begin(), out.end(), [](const ScoredTactic& a, const ScoredTactic& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  if ((size_t)n < out.size()) out.resize((size_t)n);
  return out;
}

// ---------------------------------------------------------------------------
// Argument model forward

namespace {

struct ArgCandidates {
  std::vector<Argument> args;                 // canonical order; None last
  std::vector<std::vector<int>> goal_groups;  // goal positions per unique token
  std::vector<int> goal_pos_ids;              // token id at each goal position
  std::vector<std::vector<int>> seq_ids;      // hyp/lemma candidates as token ids
};

ArgCandidates build_candidates(const neural::ModelWeights& w, const Obligation& ob,
                               const LemmaPool& pool) {
  ArgCandidates c;
  auto toks = tokenize(ob.goal);
  std::map<std::string, size_t> seen;
  for (size_t i = 0; i < toks.size(); ++i) {
    c.goal_pos_ids.push_back(w.token_id(toks[i]));
    auto it = seen.find(toks[i]);
    if (it == seen.end()) {
      seen.emplace(toks[i], c.goal_groups.size());
      c.args.push_back({Argument::Kind::GoalToken, toks[i]});
      c.goal_groups.push_back({(int)i});
    } else {
      c.goal_groups[it->second].push_back((int)i);
    }
  }
  auto ids_of = [&](const PropPtr& p) {
    std::vector<int> ids;
    for (auto& t : tokenize(p)) ids.push_back(w.token_id(t));
    return ids;
  };
  for (auto& h : ob.hyps) {
    c.args.push_back({Argument::Kind::HypIdent, h.id});
    c.seq_ids.push_back(ids_of(h.prop));
  }
  for (auto& [name, stmt] : pool) {
    c.args.push_back({Argument::Kind::LemmaIdent, name});
    c.seq_ids.push_back(ids_of(stmt));
  }
  c.args.push_back({Argument::Kind::None, ""});
  return c;
}

// Logit rows (1 x |candidates|) for every injected tactic, batched: the three
// GRUs run with one column per (tactic, candidate) pair.
std::vector<Tape::Id> arg_logit_rows(Tape& t, const neural::ModelWeights& w,
                                     const ArgCandidates& c, double similarity,
                                     const std::vector<int>& tactic_ids) {
  const auto& P = w.params;
  auto emb = t.leaf("arg.tok_emb", &P.at("arg.tok_emb"));
  const int H = w.hidden;
  const int T = (int)tactic_ids.size();
  const int U = (int)c.goal_groups.size();
  const int K = (int)c.seq_ids.size();

  // Goal encoding, initial state 0.
  auto h = t.input(Mat::Zero(H, 1));
  for (int id : c.goal_pos_ids)
    h = gru_step(t, P, "arg.enc", t.gather_cols(emb, {id}), h);
  auto g = h;

  // Per-tactic initial scorer state: FFN(tactic embedding, goal encoding, sim).
  Mat simrow = Mat::Constant(1, T, similarity);
  auto init_in = t.vcat({t.gather_cols(t.leaf("arg.tac_emb", &P.at("arg.tac_emb")), tactic_ids),
                         t.broadcast_col(g, T), t.input(simrow)});
  auto init = ffn_forward(t, P, "arg.init", init_in);  // H x T

  // Goal-token scores: one per goal position, per tactic.
  std::vector<Tape::Id> pos_scores;
  auto gw = t.leaf("arg.goal_out.W", &P.at("arg.goal_out.W"));
  auto gb = t.leaf("arg.goal_out.b", &P.at("arg.goal_out.b"));
  auto hs = init;
  for (int id : c.goal_pos_ids) {
    hs = gru_step(t, P, "arg.goal_rnn", t.gather_cols(emb, std::vector<int>((size_t)T, id)), hs);
    pos_scores.push_back(t.add_bias(t.matmul(gw, hs), gb));  // 1 x T
  }

  // Hypothesis / lemma scores: final GRU state over the statement's tokens.
  Tape::Id seq_scores = -1;  // 1 x (T*K), tactic-major
  if (K > 0) {
    size_t maxlen = 1;
    for (auto& s : c.seq_ids) maxlen = std::max(maxlen, s.size());
    std::vector<Tape::Id> h0s;
    for (int ti = 0; ti < T; ++ti)
      h0s.push_back(t.broadcast_col(t.slice_cols(init, ti, 1), K));
    auto hh = t.hcat(h0s);  // H x (T*K)
    for (size_t j = 0; j < maxlen; ++j) {
      std::vector<int> ids((size_t)T * K);
      Eigen::RowVectorXd mask(T * K);
      for (int ti = 0; ti < T; ++ti)
        for (int ci = 0; ci < K; ++ci) {
          bool live = j < c.seq_ids[ci].size();
          ids[(size_t)ti * K + ci] = live ? c.seq_ids[ci][j] : 0;
          mask(ti * K + ci) = live ? 1.0 : 0.0;
        }
      auto hn = gru_step(t, P, "arg.hyp_rnn", t.gather_cols(emb, ids), hh);
      hh = t.mask_mix(hn, hh, mask);  // finished sequences hold their state
    }
    seq_scores = t.add_bias(t.matmul(t.leaf("arg.hyp_out.W", &P.at("arg.hyp_out.W")), hh),
                            t.leaf("arg.hyp_out.b", &P.at("arg.hyp_out.b")));
  }

  std::vector<Tape::Id> rows;
  for (int ti = 0; ti < T; ++ti) {
    std::vector<Tape::Id> parts;
    if (U > 0) {
      std::vector<Tape::Id> cols;
      for (auto ps : pos_scores) cols.push_back(t.slice_cols(ps, ti, 1));
      parts.push_back(t.max_merge(t.hcat(cols), c.goal_groups));
    }
    if (K > 0) parts.push_back(t.slice_cols(seq_scores, ti * K, K));
    parts.push_back(t.input(Mat::Zero(1, 1)));  // None candidate, fixed logit 0
    rows.push_back(t.hcat(parts));
  }
  return rows;
}

int candidate_index(const ArgCandidates& c, const Argument& a) {
  for (size_t i = 0; i < c.args.size(); ++i)
    if (c.args[i] == a) return (int)i;
  return -1;
}

}  // namespace

std::vector<ScoredArg> score_arguments(const neural::ModelWeights& w, const TacticRegistry& reg,
                                       const std::string& tactic, const PredictionContext& ctx,
                                       const LemmaPool& pool) {
  if (reg.arity(tactic) == 0) return {{Argument{Argument::Kind::None, ""}, 0.0}};
  int tid = w.tactic_id(tactic);
  if (tid < 0) throw std::runtime_error("tactic not in vocab: " + tactic);
  ArgCandidates c = build_candidates(w, ctx.obligation, pool);
  Tape t;
  auto rows = arg_logit_rows(t, w, c, ctx.similarity, {tid});
  const Mat& row = t.value(rows[0]);
  std::vector<ScoredArg> out;
  for (size_t i = 0; i < c.args.size(); ++i) out.push_back({c.args[i], row(0, (Eigen::Index)i)});
  return out;
}

std::vector<ScoredCommand> predict_commands(const neural::ModelWeights& w,
                                            const TacticRegistry& reg,
                                            const PredictionContext& ctx, const LemmaPool& pool,
                                            int n_tactics, size_t keep) {
  auto tacs = predict_tactics(w, ctx, n_tactics);
  std::vector<int> unary_ids;
  std::vector<const ScoredTactic*> unary;
  std::vector<ScoredCommand> out;
  for (auto& st : tacs) {
    if (reg.arity(st.name) == 0) {
      out.push_back({ProofCommand{st.name, {}}, st.score, st.index, 0});
    } else {
      unary_ids.push_back(st.index);
      unary.push_back(&st);
    }
  }
  double shift = 0.0;  // common rescaling keeps argument scores comparable
  std::vector<std::pair<const ScoredTactic*, std::vector<double>>> scored;
  ArgCandidates c;
  if (!unary.empty()) {
    c = build_candidates(w, ctx.obligation, pool);
    Tape t;
    auto rows = arg_logit_rows(t, w, c, ctx.similarity, unary_ids);
    for (size_t ti = 0; ti < unary.size(); ++ti) {
      const Mat& row = t.value(rows[ti]);
      std::vector<double> logits(row.data(), row.data() + row.size());
      for (double v : logits) shift = std::max(shift, v);
      scored.emplace_back(unary[ti], std::move(logits));
    }
  }
  for (auto& [st, logits] : scored) {
    for (size_t i = 0; i < c.args.size(); ++i) {
      if (c.args[i].kind == Argument::Kind::None) continue;  // arity mismatch
      out.push_back({ProofCommand{st->name, c.args[i]}, st->score * std::exp(logits[i] - shift),
                     st->index, (int)i});
    }
  }
  for (auto& sc : out)
    if (sc.cmd.arg.kind == Argument::Kind::None) sc.score *= std::exp(0.0 - shift);
  std::stable_sort(out.begin(), out.end(), [](const ScoredCommand& a, const ScoredCommand& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tactic_index != b.tactic_index) return a.tactic_index < b.tactic_index;
    return a.arg_order < b.arg_order;
  });
  if (out.size() > keep) out.resize(keep);
  return out;
}

// ---------------------------------------------------------------------------
// Training

neural::Tape::Id argument_loss_graph(Tape& t, const neural::ModelWeights& w,
                                     const TacticRegistry& reg, const TrainingSample& s,
                                     const std::vector<int>& injected_tactics) {
  auto probs = tactic_probs(w, s.ctx);  // frozen: enters the loss as a constant
  ArgCandidates c = build_candidates(w, s.ctx.obligation, s.lemma_pool);
  std::vector<int> unary;
  for (int tid : injected_tactics)
    if (reg.arity(w.tactic_vocab[(size_t)tid]) != 0) unary.push_back(tid);
  std::vector<Tape::Id> unary_rows;
  if (!unary.empty()) unary_rows = arg_logit_rows(t, w, c, s.ctx.similarity, unary);

  int label_tid = w.tactic_id(s.label.tactic);
  std::vector<Tape::Id> segments;
  int target = -1, offset = 0;
  size_t next_unary = 0;
  for (int tid : injected_tactics) {
    bool is_unary = reg.arity(w.tactic_vocab[(size_t)tid]) != 0;
    int width;
    Tape::Id seg;
    double logp = std::log(std::max(probs[(size_t)tid], 1e-300));
    if (is_unary) {
      width = (int)c.args.size();
      seg = t.add(unary_rows[next_unary++], t.input(Mat::Constant(1, width, logp)));
    } else {
      width = 1;  // single None candidate at logit 0
      seg = t.input(Mat::Constant(1, 1, logp));
    }
    if (tid == label_tid) {
      int ci = is_unary ? candidate_index(c, s.label.arg) : 0;
      if (ci < 0) throw std::runtime_error("label argument not a candidate");
      target = offset + ci;
    }
    segments.push_back(seg);
    offset += width;
  }
  if (target < 0) throw std::runtime_error("label tactic missing from injected set");
  return t.nll_from_logits(t.hcat(segments), target);
}

namespace {

template <class LossFn>
std::vector<double> run_training(neural::ModelWeights& w,
                                 const std::vector<TrainingSample>& samples,
                                 const TrainConfig& cfg, LossFn&& loss_graph) {
  if (samples.empty()) throw std::invalid_argument("no training samples");
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(cfg.seed ^ 0x7261696Eull);
  double lr = cfg.lr;
  std::vector<double> epoch_losses;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.next_u64() % i]);
    double total = 0.0;
    size_t done = 0;
    while (done < order.size()) {
      size_t bsz = std::min((size_t)cfg.batch, order.size() - done);
      std::map<std::string, Mat> grads;
      for (size_t k = 0; k < bsz; ++k) {
        Tape t;
        auto loss = loss_graph(t, samples[order[done + k]]);
        total += t.value(loss)(0, 0);
        t.backward(loss);
        t.add_param_grads(grads);
      }
      neural::sgd_step(w.params, grads, lr / (double)bsz);
      done += bsz;
    }
    epoch_losses.push_back(total / (double)order.size());
    lr *= cfg.decay;
  }
  return epoch_losses;
}

}  // namespace

std::vector<double> train_tactic_model(neural::ModelWeights& w,
                                       const std::vector<TrainingSample>& samples,
                                       const TrainConfig& cfg) {
  return run_training(w, samples, cfg, [&w](Tape& t, const TrainingSample& s) {
    return tactic_loss_graph(t, w, s);
  });
}

std::vector<double> train_argument_model(neural::ModelWeights& w, const TacticRegistry& reg,
                                         const std::vector<TrainingSample>& samples,
                                         const TrainConfig& cfg) {
  // The tactic model is frozen, so the injected prediction sets are fixed:
  // compute them once, not per epoch.
  std::vector<std::vector<int>> injected(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    auto top = predict_tactics(w, samples[i].ctx, cfg.inject_n);
    int label = w.tactic_id(samples[i].label.tactic);
    bool have = false;
    for (auto& st : top) {
      injected[i].push_back(st.index);
      have = have || st.index == label;
    }
    if (!have) injected[i].push_back(label);  // union with the correct tactic
  }
  const TrainingSample* base = samples.data();
  return run_training(w, samples, cfg, [&, base](Tape& t, const TrainingSample& s) {
    return argument_loss_graph(t, w, reg, s, injected[(size_t)(&s - base)]);
  });
}

// ---------------------------------------------------------------------------
// Metrics

bool in_prediction_domain(const ProofCommand& cmd) {
  switch (cmd.arg.kind) {
    case Argument::Kind::None:
    case Argument::Kind::GoalToken:
    case Argument::Kind::HypIdent:
    case Argument::Kind::LemmaIdent:
      return true;
  }
  return false;
}

AccuracyReport evaluate_accuracy(const neural::ModelWeights& w, const TacticRegistry& reg,
                                 const std::vector<TrainingSample>& samples) {
  AccuracyReport r;
  r.n_samples = samples.size();
  size_t hit1 = 0, hit3 = 0, hit5 = 0, tac1 = 0, argok = 0;
  for (auto& s : samples) {
    auto ranked = predict_commands(w, reg, s.ctx, s.lemma_pool, (int)w.tactic_vocab.size(),
                                   (size_t)-1);
    for (size_t k = 0; k < ranked.size() && k < 5; ++k) {
      if (ranked[k].cmd == s.label) {
        if (k < 1) ++hit1;
        if (k < 3) ++hit3;
        ++hit5;
        break;
      }
    }
    auto top = predict_tactics(w, s.ctx, 1);
    if (!top.empty() && top[0].name == s.label.tactic) {
      ++tac1;
      auto args = score_arguments(w, reg, s.label.tactic, s.ctx, s.lemma_pool);
      size_t best = 0;
      for (size_t i = 1; i < args.size(); ++i)
        if (args[i].logit > args[best].logit) best = i;
      if (args[best].arg == s.label.arg) ++argok;
    }
  }
  r.top1 = r.n_samples ? (double)hit1 / (double)r.n_samples : 0.0;
  r.top3 = r.n_samples ? (double)hit3 / (double)r.n_samples : 0.0;
  r.top5 = r.n_samples ? (double)hit5 / (double)r.n_samples : 0.0;
  r.n_tactic_top1 = tac1;
  r.arg_conditional = tac1 ? (double)argok / (double)tac1 : 0.0;
  return r;
}

}  // namespace tacsearch
