#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "tacsearch/corpus.hpp"
#include "tacsearch/pipeline.hpp"

using namespace tacsearch;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_cfg() {
  RunConfig c;
  c.n_files = 4;
  c.thms_per_file = 6;
  c.split = 0.75;
  c.epochs = 2;
  c.hidden = 16;
  c.budget = 128;
  return c;
}

}  // namespace

TEST_CASE("config round-trips through key=value text") {
  RunConfig c;
  c.seed = 7;
  c.split = 0.8;
  c.lr = 0.25;
  c.disable_transform = true;
  c.out_dir = "elsewhere";
  c.theorem = "file001:swap3";
  auto text = config_to_string(c);
  auto r = config_from_string(text);
  CHECK(config_to_string(r) == text);
  CHECK(r.seed == 7);
  CHECK(r.split == 0.8);
  CHECK(r.lr == 0.25);
  CHECK(r.disable_transform);
  CHECK(r.out_dir == "elsewhere");
  CHECK(r.theorem == "file001:swap3");
  CHECK_THROWS(config_from_string("no_such_key=1\n"));
}

TEST_CASE("load_corpus_dir reads .vs files in sorted order") {
  fs::path dir = fs::temp_directory_path() / "tacsearch_test_corpus_dir";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto corpus = generate_corpus(0, 3, 4);
  // write out of order; loader must sort by filename
  for (int i : {2, 0, 1}) {
    std::ofstream out(dir / (corpus[i].name + ".vs"));
    out << file_to_string(corpus[i]);
  }
  std::ofstream(dir / "notes.txt") << "ignored";
  auto loaded = load_corpus_dir(dir.string());
  REQUIRE(loaded.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(loaded[i].name == corpus[i].name);
    CHECK(file_to_string(loaded[i]) == file_to_string(corpus[i]));
  }
  fs::remove_all(dir);
  CHECK_THROWS(load_corpus_dir(dir.string()));
}

TEST_CASE("histogram_label buckets singletons up to 10 then ranges of 10") {
  CHECK(histogram_label(1) == "1");
  CHECK(histogram_label(10) == "10");
  CHECK(histogram_label(11) == "11-20");
  CHECK(histogram_label(20) == "11-20");
  CHECK(histogram_label(21) == "21-30");
  CHECK(histogram_label(35) == "31-40");
}

TEST_CASE("train + eval produce a consistent, deterministic report") {
  auto cfg = tiny_cfg();
  auto corpus = generate_corpus(cfg.seed, cfg.n_files, cfg.thms_per_file);
  auto split = split_corpus(corpus, cfg.split, cfg.seed);
  auto model = train_pipeline(split.train, cfg);
  CHECK(model.tactic_losses.size() == (size_t)cfg.epochs);
  CHECK(model.argument_losses.size() == (size_t)cfg.epochs);
  CHECK(!model.train_samples.empty());

  auto report = run_eval(model, split.test, cfg);
  size_t n_thms = 0;
  for (auto& f : split.test) n_thms += f.theorems.size();
  REQUIRE(report.rows.size() == n_thms);
  for (size_t i = 1; i < report.rows.size(); ++i)
    CHECK(report.rows[i - 1].theorem < report.rows[i].theorem);

  // aggregate rates equal a recount over the rows
  int solved = 0, in_dom = 0, in_dom_solved = 0;
  for (auto& r : report.rows) {
    CHECK((r.outcome == "solved" || r.outcome == "depth-limited" || r.outcome == "exhausted"));
    CHECK((r.outcome == "solved") == (r.proof_len > 0));
    if (r.outcome == "solved") ++solved;
    if (r.in_domain) {
      ++in_dom;
      if (r.outcome == "solved") ++in_dom_solved;
    }
  }
  CHECK(report.completion_rate == doctest::Approx((double)solved / (double)n_thms));
  if (in_dom > 0)
    CHECK(report.in_domain_completion_rate == doctest::Approx((double)in_dom_solved / in_dom));

  // histogram totals match the rows
  std::map<std::string, std::pair<int, int>> bins;
  for (auto& r : report.rows) {
    auto& b = bins[histogram_label(r.orig_len)];
    ++b.first;
    if (r.outcome == "solved") ++b.second;
  }
  REQUIRE(report.histogram.size() == bins.size());
  for (auto& h : report.histogram) {
    CHECK(h.total == bins[h.label].first);
    CHECK(h.solved == bins[h.label].second);
  }

  // a second identical run is byte-identical
  auto model2 = train_pipeline(split.train, cfg);
  auto report2 = run_eval(model2, split.test, cfg);
  CHECK(eval_report_json(report2) == eval_report_json(report));
  CHECK(eval_report_csv(report2) == eval_report_csv(report));
  CHECK(histogram_csv(report2) == histogram_csv(report));
}

TEST_CASE("report renderers have the documented shape") {
  EvalReport r;
  r.rows.push_back({"file000:thm0", 3, "solved", 3, 7, 1, true});
  r.rows.push_back({"file000:thm1", 12, "exhausted", 0, 50, 4, false});
  r.completion_rate = 0.5;
  r.in_domain_completion_rate = 1.0;
  r.top1 = 0.9;
  r.top3 = 0.95;
  r.top5 = 1.0;
  r.arg_conditional = 0.8;
  r.n_train_samples = 100;
  r.n_test_samples = 10;
  r.histogram.push_back({"3", 1, 1});
  r.histogram.push_back({"11-20", 1, 0});

  auto csv = eval_report_csv(r);
  auto lines = [&] {
    std::vector<std::string> out;
    std::istringstream in(csv);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }();
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "theorem,orig_len,outcome,proof_len,expanded,pruned,in_domain");
  CHECK(lines[1] == "file000:thm0,3,solved,3,7,1,1");
  CHECK(lines[2] == "file000:thm1,12,exhausted,0,50,4,0");

  auto hist = histogram_csv(r);
  CHECK(hist.find("bin,total,solved") == 0);
  CHECK(hist.find("11-20,1,0") != std::string::npos);

  auto js = nlohmann::json::parse(eval_report_json(r));
  CHECK(js["completion_rate"] == 0.5);
  CHECK(js["rows"].size() == 2);
  CHECK(js["rows"][0]["theorem"] == "file000:thm0");
  CHECK(js["histogram"][1]["bin"] == "11-20");

  auto curve = loss_curve_csv({0.5, 0.25}, {1.5, 0.75});
  std::istringstream in(curve);
  std::string l0, l1, l2;
  std::getline(in, l0);
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(l0 == "epoch,tactic_loss,argument_loss");
  CHECK(l1.substr(0, 2) == "1,");
  CHECK(l2.substr(0, 2) == "2,");
}

TEST_CASE("cmd_gen writes the corpus, manifest, and config") {
  fs::path dir = fs::temp_directory_path() / "tacsearch_test_gen";
  fs::remove_all(dir);
  auto cfg = tiny_cfg();
  cfg.corpus_dir = (dir / "corpus").string();
  cfg.out_dir = dir.string();
  REQUIRE(cmd_gen(cfg) == 0);
  auto loaded = load_corpus_dir(cfg.corpus_dir);
  CHECK(loaded.size() == (size_t)cfg.n_files);
  CHECK(fs::exists(dir / "corpus" / "manifest.json"));
  CHECK(fs::exists(dir / "corpus" / "config.txt"));
  auto reread = config_from_string([&] {
    std::ifstream in(dir / "corpus" / "config.txt");
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }());
  CHECK(reread.n_files == cfg.n_files);
  fs::remove_all(dir);
}
