#include "tacsearch/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace tacsearch {

// ---------------------------------------------------------------------------
// Config

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

std::string config_to_string(const RunConfig& c) {
  std::ostringstream os;
  os << "seed=" << c.seed << "\n"
     << "corpus_dir=" << c.corpus_dir << "\n"
     << "n_files=" << c.n_files << "\n"
     << "thms_per_file=" << c.thms_per_file << "\n"
     << "split=" << c.split << "\n"
     << "epochs=" << c.epochs << "\n"
     << "batch=" << c.batch << "\n"
     << "lr=" << c.lr << "\n"
     << "decay=" << c.decay << "\n"
     << "inject_n=" << c.inject_n << "\n"
     << "hidden=" << c.hidden << "\n"
     << "width=" << c.width << "\n"
     << "depth=" << c.depth << "\n"
     << "budget=" << c.budget << "\n"
     << "disable_transform=" << (c.disable_transform ? 1 : 0) << "\n"
     << "out_dir=" << c.out_dir << "\n"
     << "weights=" << c.weights << "\n"
     << "theorem=" << c.theorem << "\n";
  return os.str();
}

RunConfig config_from_string(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "seed") c.seed = std::stoull(val);
    else if (key == "corpus_dir") c.corpus_dir = val;
    else if (key == "n_files") c.n_files = std::stoi(val);
    else if (key == "thms_per_file") c.thms_per_file = std::stoi(val);
    else if (key == "split") c.split = std::stod(val);
    else if (key == "epochs") c.epochs = std::stoi(val);
    else if (key == "batch") c.batch = std::stoi(val);
    else if (key == "lr") c.lr = std::stod(val);
    else if (key == "decay") c.decay = std::stod(val);
    else if (key == "inject_n") c.inject_n = std::stoi(val);
    else if (key == "hidden") c.hidden = std::stoi(val);
    else if (key == "width") c.width = std::stoi(val);
    else if (key == "depth") c.depth = std::stoi(val);
    else if (key == "budget") c.budget = std::stoi(val);
    else if (key == "disable_transform") c.disable_transform = std::stoi(val) != 0;
    else if (key == "out_dir") c.out_dir = val;
    else if (key == "weights") c.weights = val;
    else if (key == "theorem") c.theorem = val;
    else throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key " + key);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Corpus I/O

std::vector<CorpusFile> load_corpus_dir(const std::string& dir) {
  std::vector<fs::path> paths;
  for (auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".vs") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw std::runtime_error("no .vs files in " + dir);
  std::vector<CorpusFile> out;
  for (auto& p : paths) {
    auto parsed = parse_file(p.stem().string(), read_text(p));
    if (auto* err = std::get_if<ParseError>(&parsed))
      throw std::runtime_error(p.string() + ":" + std::to_string(err->line) + ": " + err->message);
    out.push_back(std::get<CorpusFile>(parsed));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

TrainedModel train_pipeline(const std::vector<CorpusFile>& train_files, const RunConfig& cfg) {
  TrainedModel m;
  for (auto& f : train_files) {
    auto ss = extract_samples(f, m.reg, !cfg.disable_transform, &m.dropped);
    m.train_samples.insert(m.train_samples.end(), ss.begin(), ss.end());
  }
  if (m.train_samples.empty()) throw std::runtime_error("no training samples extracted");
  std::vector<PredictionContext> ctxs;
  for (auto& s : m.train_samples) ctxs.push_back(s.ctx);
  auto fv = build_feature_vocab(ctxs);
  auto tok = build_token_vocab(m.train_samples);
  m.weights = init_weights(fv, m.reg.names_sorted(), tok, cfg.seed, cfg.hidden);
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch = cfg.batch;
  tc.lr = cfg.lr;
  tc.decay = cfg.decay;
  tc.inject_n = cfg.inject_n;
  tc.seed = cfg.seed;
  m.tactic_losses = train_tactic_model(m.weights, m.train_samples, tc);
  m.argument_losses = train_argument_model(m.weights, m.reg, m.train_samples, tc);
  return m;
}

// ---------------------------------------------------------------------------
// Evaluation

std::string histogram_label(int length) {
  if (length <= 10) return std::to_string(length);
  int lo = (length - 1) / 10 * 10 + 1;
  return std::to_string(lo) + "-" + std::to_string(lo + 9);
}

namespace {

int histogram_key(int length) { return length <= 10 ? length : (length - 1) / 10 * 10 + 1; }

std::vector<HistBin> build_histogram(const std::vector<EvalRow>& rows) {
  std::map<int, HistBin> bins;
  for (auto& r : rows) {
    auto& b = bins[histogram_key(r.orig_len)];
    b.label = histogram_label(r.orig_len);
    ++b.total;
    if (r.outcome == "solved") ++b.solved;
  }
  std::vector<HistBin> out;
  for (auto& [k, b] : bins) out.push_back(b);
  return out;
}

}  // namespace

EvalReport run_eval(const TrainedModel& model, const std::vector<CorpusFile>& test_files,
                    const RunConfig& cfg, std::vector<PruneRecord>* traces) {
  EvalReport rep;
  rep.n_train_samples = model.train_samples.size();
  rep.n_dropped = model.dropped;

  TacticRegistry reg = model.reg;  // test files may register new learned names
  std::vector<TrainingSample> test_samples;
  size_t test_dropped = 0;
  for (auto& f : test_files) {
    auto ss = extract_samples(f, reg, !cfg.disable_transform, &test_dropped);
    test_samples.insert(test_samples.end(), ss.begin(), ss.end());
  }
  rep.n_test_samples = test_samples.size();
  if (!test_samples.empty()) {
    auto acc = evaluate_accuracy(model.weights, reg, test_samples);
    rep.top1 = acc.top1;
    rep.top3 = acc.top3;
    rep.top5 = acc.top5;
    rep.arg_conditional = acc.arg_conditional;
  }

  SearchConfig sc;
  sc.width = cfg.width;
  sc.depth = cfg.depth;
  sc.node_budget = cfg.budget;
  for (auto& f : test_files) {
    for (size_t i = 0; i < f.theorems.size(); ++i) {
      auto& thm = f.theorems[i];
      Env env = env_for_theorem(f, i);
      EvalRow row;
      row.theorem = f.name + ":" + thm.name;
      TacticRegistry lreg = reg;
      auto lin = linearize(env, lreg, desugar(thm.script, lreg), thm.statement);
      row.orig_len = (int)lin.commands.size();
      row.in_domain = lin.ok;
      if (cfg.disable_transform && !is_first_order(thm.script)) row.in_domain = false;
      for (auto& c : lin.commands)
        if (!in_prediction_domain(c)) row.in_domain = false;
      NeuralCommandPredictor pred(model.weights, reg,
                                  LemmaPool(env.lemmas.begin(), env.lemmas.end()));
      auto res = search(env, reg, thm.statement, pred, sc);
      switch (res.outcome) {
        case SearchOutcome::Proof: row.outcome = "solved"; break;
        case SearchOutcome::DepthLimited: row.outcome = "depth-limited"; break;
        case SearchOutcome::ExhaustedSpace: row.outcome = "exhausted"; break;
      }
      row.proof_len = (int)res.proof.size();
      row.expanded = res.stats.expanded;
      row.pruned = res.stats.pruned;
      if (traces)
        traces->insert(traces->end(), res.prune_trace.begin(), res.prune_trace.end());
      rep.rows.push_back(row);
    }
  }
  std::sort(rep.rows.begin(), rep.rows.end(),
            [](const EvalRow& a, const EvalRow& b) { return a.theorem < b.theorem; });

  size_t solved = 0, in_dom = 0, in_dom_solved = 0;
  for (auto& r : rep.rows) {
    if (r.outcome == "solved") ++solved;
    if (r.in_domain) {
      ++in_dom;
      if (r.outcome == "solved") ++in_dom_solved;
    }
  }
  rep.completion_rate = rep.rows.empty() ? 0.0 : (double)solved / rep.rows.size();
  rep.in_domain_completion_rate = in_dom == 0 ? 0.0 : (double)in_dom_solved / in_dom;
  rep.histogram = build_histogram(rep.rows);
  return rep;
}

// ---------------------------------------------------------------------------
// Rendering

std::string eval_report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["theorem"] = row.theorem;
    o["orig_len"] = row.orig_len;
    o["outcome"] = row.outcome;
    o["proof_len"] = row.proof_len;
    o["expanded"] = row.expanded;
    o["pruned"] = row.pruned;
    o["in_domain"] = row.in_domain;
    j["rows"].push_back(o);
  }
  j["completion_rate"] = r.completion_rate;
  j["in_domain_completion_rate"] = r.in_domain_completion_rate;
  j["top1"] = r.top1;
  j["top3"] = r.top3;
  j["top5"] = r.top5;
  j["arg_conditional"] = r.arg_conditional;
  j["n_train_samples"] = r.n_train_samples;
  j["n_test_samples"] = r.n_test_samples;
  j["n_dropped"] = r.n_dropped;
  j["histogram"] = nlohmann::ordered_json::array();
  for (auto& b : r.histogram) {
    nlohmann::ordered_json o;
    o["bin"] = b.label;
    o["total"] = b.total;
    o["solved"] = b.solved;
    j["histogram"].push_back(o);
  }
  return j.dump(2) + "\n";
}

std::string eval_report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "theorem,orig_len,outcome,proof_len,expanded,pruned,in_domain\n";
  for (auto& row : r.rows)
    os << row.theorem << ',' << row.orig_len << ',' << row.outcome << ',' << row.proof_len << ','
       << row.expanded << ',' << row.pruned << ',' << (row.in_domain ? 1 : 0) << "\n";
  return os.str();
}

std::string histogram_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "bin,total,solved\n";
  for (auto& b : r.histogram) os << b.label << ',' << b.total << ',' << b.solved << "\n";
  return os.str();
}

std::string loss_curve_csv(const std::vector<double>& tactic, const std::vector<double>& argument) {
  std::ostringstream os;
  os << "epoch,tactic_loss,argument_loss\n";
  size_t n = std::max(tactic.size(), argument.size());
  for (size_t i = 0; i < n; ++i) {
    os << (i + 1) << ',';
    if (i < tactic.size()) os << tactic[i];
    os << ',';
    if (i < argument.size()) os << argument[i];
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Subcommands

namespace {

// Reconstructs the registry implied by a saved tactic vocabulary.
TacticRegistry registry_from_weights(const neural::ModelWeights& w) {
  TacticRegistry reg;
  for (auto& name : w.tactic_vocab)
    if (!reg.known(name) && name != kUnkToken) reg.register_learned(name);
  return reg;
}

int fail(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 1;
}

}  // namespace

int cmd_gen(const RunConfig& cfg) {
  try {
    auto corpus = generate_corpus(cfg.seed, cfg.n_files, cfg.thms_per_file);
    fs::create_directories(cfg.corpus_dir);
    for (auto& f : corpus) write_text(fs::path(cfg.corpus_dir) / (f.name + ".vs"), file_to_string(f));
    write_text(fs::path(cfg.corpus_dir) / "manifest.json", corpus_manifest_json(corpus));
    write_text(fs::path(cfg.corpus_dir) / "config.txt", config_to_string(cfg));
    size_t thms = 0;
    for (auto& f : corpus) thms += f.theorems.size();
    std::cout << "wrote " << corpus.size() << " files, " << thms << " theorems to "
              << cfg.corpus_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

int cmd_train(const RunConfig& cfg) {
  try {
    auto corpus = load_corpus_dir(cfg.corpus_dir);
    auto split = split_corpus(corpus, cfg.split, cfg.seed);
    auto model = train_pipeline(split.train, cfg);
    fs::create_directories(cfg.out_dir);
    neural::save_weights(model.weights, (fs::path(cfg.out_dir) / "weights.bin").string());
    write_text(fs::path(cfg.out_dir) / "loss_curve.csv",
               loss_curve_csv(model.tactic_losses, model.argument_losses));
    write_text(fs::path(cfg.out_dir) / "config.txt", config_to_string(cfg));
    std::cout << "trained on " << model.train_samples.size() << " samples ("
              << model.dropped << " proofs dropped); final losses: tactic "
              << model.tactic_losses.back() << ", argument " << model.argument_losses.back()
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

int cmd_prove(const RunConfig& cfg) {
  try {
    if (cfg.weights.empty()) return fail("prove requires --weights");
    if (cfg.theorem.empty()) return fail("prove requires --theorem file:name");
    auto w = neural::load_weights(cfg.weights);
    auto reg = registry_from_weights(w);
    auto corpus = load_corpus_dir(cfg.corpus_dir);
    auto colon = cfg.theorem.find(':');
    if (colon == std::string::npos) return fail("--theorem must be file:name");
    std::string fname = cfg.theorem.substr(0, colon);
    std::string tname = cfg.theorem.substr(colon + 1);
    for (auto& f : corpus) {
      if (f.name != fname) continue;
      for (size_t i = 0; i < f.theorems.size(); ++i) {
        if (f.theorems[i].name != tname) continue;
        Env env = env_for_theorem(f, i);
        NeuralCommandPredictor pred(w, reg, LemmaPool(env.lemmas.begin(), env.lemmas.end()));
        SearchConfig sc{cfg.width, cfg.depth, cfg.budget};
        auto res = search(env, reg, f.theorems[i].statement, pred, sc);
        fs::create_directories(cfg.out_dir);
        std::ostringstream proof;
        for (auto& c : res.proof) proof << command_to_string(c) << ".\n";
        write_text(fs::path(cfg.out_dir) / "proof.txt", proof.str());
        write_text(fs::path(cfg.out_dir) / "tree.dot", emit_tree(*res.tree, "dot"));
        write_text(fs::path(cfg.out_dir) / "tree.json", emit_tree(*res.tree, "json"));
        write_text(fs::path(cfg.out_dir) / "config.txt", config_to_string(cfg));
        const char* outcome = res.outcome == SearchOutcome::Proof ? "solved"
                              : res.outcome == SearchOutcome::DepthLimited ? "depth-limited"
                                                                           : "exhausted";
        std::cout << cfg.theorem << ": " << outcome << " (expanded " << res.stats.expanded
                  << ", pruned " << res.stats.pruned << ")\n";
        return 0;
      }
    }
    return fail("theorem not found: " + cfg.theorem);
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

int cmd_eval(const RunConfig& cfg) {
  try {
    auto corpus = load_corpus_dir(cfg.corpus_dir);
    auto split = split_corpus(corpus, cfg.split, cfg.seed);
    TrainedModel model;
    if (cfg.weights.empty()) {
      model = train_pipeline(split.train, cfg);
    } else {
      model.weights = neural::load_weights(cfg.weights);
      model.reg = registry_from_weights(model.weights);
      for (auto& f : split.train) {
        auto ss = extract_samples(f, model.reg, !cfg.disable_transform, &model.dropped);
        model.train_samples.insert(model.train_samples.end(), ss.begin(), ss.end());
      }
    }
    auto rep = run_eval(model, split.test, cfg);
    fs::create_directories(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / "report.json", eval_report_json(rep));
    write_text(fs::path(cfg.out_dir) / "report.csv", eval_report_csv(rep));
    write_text(fs::path(cfg.out_dir) / "histogram.csv", histogram_csv(rep));
    if (cfg.weights.empty())
      write_text(fs::path(cfg.out_dir) / "loss_curve.csv",
                 loss_curve_csv(model.tactic_losses, model.argument_losses));
    write_text(fs::path(cfg.out_dir) / "config.txt", config_to_string(cfg));
    std::cout << "completion " << rep.completion_rate << " (in-domain "
              << rep.in_domain_completion_rate << "), top1 " << rep.top1 << ", top3 " << rep.top3
              << ", top5 " << rep.top5 << ", arg|tac " << rep.arg_conditional << ", "
              << rep.rows.size() << " theorems\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

int cmd_report(const RunConfig& cfg) {
  try {
    auto j = nlohmann::json::parse(read_text(fs::path(cfg.out_dir) / "report.json"));
    EvalReport rep;
    for (auto& o : j.at("rows")) {
      EvalRow row;
      row.theorem = o.at("theorem");
      row.orig_len = o.at("orig_len");
      row.outcome = o.at("outcome");
      rep.rows.push_back(row);
    }
    rep.histogram = build_histogram(rep.rows);
    write_text(fs::path(cfg.out_dir) / "histogram.csv", histogram_csv(rep));
    std::cout << "wrote histogram over " << rep.rows.size() << " theorems\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

}  // namespace tacsearch
