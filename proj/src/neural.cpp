#include "tacsearch/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace tacsearch::neural {

Mat init_matrix(int rows, int cols, int fan_in, Rng& rng) {
  double bound = 1.0 / std::sqrt(std::max(1, fan_in));
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

// ---------------------------------------------------------------------------
// Tape

Tape::Id Tape::push(Mat val, std::function<void(Tape&, Id)> back) {
  Node n;
  n.val = std::move(val);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Mat& Tape::grad(Id id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    const Mat& v = value(id);
    n.grad = Mat::Zero(v.rows(), v.cols());
    n.has_grad = true;
  }
  return n.grad;
}

Tape::Id Tape::leaf(const std::string& name, const Mat* value) {
  auto it = leaf_cache_.find(name);
  if (it != leaf_cache_.end()) return it->second;
  Id id = push({}, nullptr);
  nodes_[id].ref = value;
  nodes_[id].param_name = name;
  leaf_cache_[name] = id;
  return id;
}

Tape::Id Tape::input(Mat value) { return push(std::move(value), nullptr); }

Tape::Id Tape::matmul(Id a, Id b) {
  Mat v = value(a) * value(b);
  return push(std::move(v), [a, b](Tape& t, Id self) {
    const Mat& g = t.nodes_[self].grad;
    t.grad(a).noalias() += g * t.value(b).transpose();
    t.grad(b).noalias() += t.value(a).transpose() * g;
  });
}

Tape::Id Tape::add(Id a, Id b) {
  Mat v = value(a) + value(b);
  return push(std::move(v), [a, b](Tape& t, Id self) {
    const Mat& g = t.nodes_[self].grad;
    t.grad(a) += g;
    t.grad(b) += g;
  });
}

Tape::Id Tape::add_bias(Id a, Id bias) {
  Mat v = value(a).colwise() + Eigen::VectorXd(value(bias).col(0));
  return push(std::move(v), [a, bias](Tape& t, Id self) {
    const Mat& g = t.nodes_[self].grad;
    t.grad(a) += g;
    t.grad(bias).col(0) += g.rowwise().sum();
  });
}

Tape::Id Tape::mul(Id a, Id b) {
  Mat v = value(a).cwiseProduct(value(b));
  return push(std::move(v), [a, b](Tape& t, Id self) {
    const Mat& g = t.nodes_[self].grad;
    t.grad(a) += g.cwiseProduct(t.value(b));
    t.grad(b) += g.cwiseProduct(t.value(a));
  });
}

Tape::Id Tape::scale(Id a, double s) {
  Mat v = value(a) * s;
  return push(std::move(v), [a, s](Tape& t, Id self) { t.grad(a) += t.nodes_[self].grad * s; });
}

Tape::Id Tape::sigmoid(Id a) {
  Mat v = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
  return push(std::move(v), [a](Tape& t, Id self) {
    const Mat& y = t.nodes_[self].val;
    t.grad(a).array() += t.nodes_[self].grad.array() * y.array() * (1.0 - y.array());
  });
}

Tape::Id Tape::tanh_(Id a) {
  Mat v = value(a).array().tanh().matrix();
  return push(std::move(v), [a](Tape& t, Id self) {
    const Mat& y = t.nodes_[self].val;
    t.grad(a).array() += t.nodes_[self].grad.array() * (1.0 - y.array().square());
  });
}

Tape::Id Tape::relu(Id a) {
  Mat v = value(a).cwiseMax(0.0);
  return push(std::move(v), [a](Tape& t, Id self) {
    const Mat& x = t.value(a);
    t.grad(a).array() += t.nodes_[self].grad.array() * (x.array() > 0.0).cast<double>();
  });
}

Tape::Id Tape::one_minus(Id a) {
  Mat v = (1.0 - value(a).array()).matrix();
  return push(std::move(v), [a](Tape& t, Id self) { t.grad(a) -= t.nodes_[self].grad; });
}

Tape::Id Tape::vcat(const std::vector<Id>& parts) {
  Eigen::Index rows = 0, cols = value(parts[0]).cols();
  for (Id p : parts) rows += value(p).rows();
  Mat v(rows, cols);
  Eigen::Index r = 0;
  for (Id p : parts) {
    v.middleRows(r, value(p).rows()) = value(p);
    r += value(p).rows();
  }
  return push(std::move(v), [parts](Tape& t, Id self) {
    const Mat& g = t.nodes_[self].grad;
    Eigen::Index r = 0;
    for (Id p : parts) {
      t.grad(p) += g.middleRows(r, t.value(p).rows());
      r += t.value(p).rows();
    }
  });
}

Tape::Id Tape::hcat(const std::vector<Id>& parts) {
  Eigen::Index cols = 0, rows = value(parts[0]).rows();
  for (Id p : parts) cols += value(p).cols();
  Mat v(rows, cols);
  Eigen::Index c = 0;
  for (Id p : parts) {
    v.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
  }
  return push(std::move(v), [parts](Tape& t, Id self) {
    const Mat& g = t.nodes_[self].grad;
    Eigen::Index c = 0;
    for (Id p : parts) {
      t.grad(p) += g.middleCols(c, t.value(p).cols());
      c += t.value(p).cols();
    }
  });
}

Tape::Id Tape::gather_cols(Id table, const std::vector<int>& indices) {
  const Mat& tab = value(table);
  Mat v(tab.rows(), static_cast<Eigen::Index>(indices.size()));
  for (size_t j = 0; j < indices.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = tab.col(indices[j]);
  return push(std::move(v), [table, indices](Tape& t, Id self) {
    const Mat& g = t.nodes_[self].grad;
    Mat& tg = t.grad(table);
    for (size_t j = 0; j < indices.size(); ++j)
      tg.col(indices[j]) += g.col(static_cast<Eigen::Index>(j));
  });
}

Tape::Id Tape::broadcast_col(Id v, int n) {
  Mat out = value(v).col(0).replicate(1, n);
  return push(std::move(out), [v](Tape& t, Id self) {
    t.grad(v).col(0) += t.nodes_[self].grad.rowwise().sum();
  });
}

Tape::Id Tape::slice_cols(Id a, int start, int len) {
  Mat v = value(a).middleCols(start, len);
  return push(std::move(v), [a, start, len](Tape& t, Id self) {
    t.grad(a).middleCols(start, len) += t.nodes_[self].grad;
  });
}

Tape::Id Tape::mask_mix(Id fresh, Id held, const Eigen::RowVectorXd& mask) {
  const Mat& f = value(fresh);
  const Mat& h = value(held);
  Mat v = (f.array().rowwise() * mask.array()) + (h.array().rowwise() * (1.0 - mask.array()));
  return push(std::move(v), [fresh, held, mask](Tape& t, Id self) {
    const Mat& g = t.nodes_[self].grad;
    t.grad(fresh).array() += g.array().rowwise() * mask.array();
    t.grad(held).array() += g.array().rowwise() * (1.0 - mask.array());
  });
}

Tape::Id Tape::max_merge(Id row, const std::vector<std::vector<int>>& groups) {
  const Mat& r = value(row);
  Mat v(1, static_cast<Eigen::Index>(groups.size()));
  std::vector<int> argmax(groups.size());
  for (size_t g = 0; g < groups.size(); ++g) {
    double best = -std::numeric_limits<double>::infinity();
    int bi = groups[g][0];
    for (int idx : groups[g]) {
      if (r(0, idx) > best) {
        best = r(0, idx);
        bi = idx;
      }
    }
    v(0, static_cast<Eigen::Index>(g)) = best;
    argmax[g] = bi;
  }
  return push(std::move(v), [row, argmax](Tape& t, Id self) {
    const Mat& g = t.nodes_[self].grad;
    Mat& rg = t.grad(row);
    for (size_t k = 0; k < argmax.size(); ++k)
      rg(0, argmax[k]) += g(0, static_cast<Eigen::Index>(k));
  });
}

Tape::Id Tape::nll_from_logits(Id logits, int target) {
  const Mat& m = value(logits);
  Eigen::Map<const Eigen::VectorXd> flat(m.data(), m.size());
  double mx = flat.maxCoeff();
  double lse = mx + std::log((flat.array() - mx).exp().sum());
  Mat v(1, 1);
  v(0, 0) = lse - flat(target);
  return push(std::move(v), [logits, target, lse](Tape& t, Id self) {
    double g = t.nodes_[self].grad(0, 0);
    const Mat& m = t.value(logits);
    Mat& lg = t.grad(logits);
    Eigen::Map<const Eigen::VectorXd> flat(m.data(), m.size());
    Eigen::Map<Eigen::VectorXd> gflat(lg.data(), lg.size());
    gflat += g * (flat.array() - lse).exp().matrix();
    gflat(target) -= g;
  });
}

void Tape::backward(Id loss) {
  if (value(loss).size() != 1) throw std::runtime_error("backward: loss must be scalar");
  grad(loss)(0, 0) = 1.0;
  for (Id id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.back && n.has_grad) n.back(*this, id);
  }
}

void Tape::add_param_grads(std::map<std::string, Mat>& acc) const {
  for (const Node& n : nodes_) {
    if (n.param_name.empty() || !n.has_grad) continue;
    auto it = acc.find(n.param_name);
    if (it == acc.end())
      acc.emplace(n.param_name, n.grad);
    else
      it->second += n.grad;
  }
}

Mat softmax(const Mat& logits) {
  Eigen::Map<const Eigen::VectorXd> flat(logits.data(), logits.size());
  double mx = flat.maxCoeff();
  Eigen::VectorXd e = (flat.array() - mx).exp();
  e /= e.sum();
  Mat out(logits.rows(), logits.cols());
  Eigen::Map<Eigen::VectorXd>(out.data(), out.size()) = e;
  return out;
}

double nll_loss(const Mat& probabilities, int target) {
  Eigen::Map<const Eigen::VectorXd> flat(probabilities.data(), probabilities.size());
  return -std::log(std::max(flat(target), 1e-300));
}

// ---------------------------------------------------------------------------
// GRU / FFN parameter groups

std::vector<std::string> GruParams::tensor_names(const std::string& prefix) {
  std::vector<std::string> out;
  for (const char* n : {"W_iz", "W_hz", "b_z", "W_ir", "W_hr", "b_r", "W_in", "b_in", "W_hn", "b_hn"})
    out.push_back(prefix + "." + n);
  return out;
}

void GruParams::init(std::map<std::string, Mat>& params, int in_size, int hidden_size, Rng& rng,
                     const std::string& pfx) {
  prefix = pfx;
  in = in_size;
  hidden = hidden_size;
  params[pfx + ".W_iz"] = init_matrix(hidden, in, in, rng);
  params[pfx + ".W_hz"] = init_matrix(hidden, hidden, hidden, rng);
  params[pfx + ".b_z"] = init_matrix(hidden, 1, hidden, rng);
  params[pfx + ".W_ir"] = init_matrix(hidden, in, in, rng);
  params[pfx + ".W_hr"] = init_matrix(hidden, hidden, hidden, rng);
  params[pfx + ".b_r"] = init_matrix(hidden, 1, hidden, rng);
  params[pfx + ".W_in"] = init_matrix(hidden, in, in, rng);
  params[pfx + ".b_in"] = init_matrix(hidden, 1, hidden, rng);
  params[pfx + ".W_hn"] = init_matrix(hidden, hidden, hidden, rng);
  params[pfx + ".b_hn"] = init_matrix(hidden, 1, hidden, rng);
}

Tape::Id gru_step(Tape& t, const std::map<std::string, Mat>& params, const std::string& pfx,
                  Tape::Id x, Tape::Id h) {
  auto P = [&](const char* n) { return t.leaf(pfx + "." + n, &params.at(pfx + "." + n)); };
  auto W_iz = P("W_iz"), W_hz = P("W_hz"), b_z = P("b_z");
  auto W_ir = P("W_ir"), W_hr = P("W_hr"), b_r = P("b_r");
  auto W_in = P("W_in"), b_in = P("b_in"), W_hn = P("W_hn"), b_hn = P("b_hn");

  auto z = t.sigmoid(t.add_bias(t.add(t.matmul(W_iz, x), t.matmul(W_hz, h)), b_z));
  auto r = t.sigmoid(t.add_bias(t.add(t.matmul(W_ir, x), t.matmul(W_hr, h)), b_r));
  auto n = t.tanh_(t.add(t.add_bias(t.matmul(W_in, x), b_in),
                         t.mul(r, t.add_bias(t.matmul(W_hn, h), b_hn))));
  // h' = (1-z)*n + z*h
  return t.add(t.mul(t.one_minus(z), n), t.mul(z, h));
}

std::vector<std::string> FfnParams::tensor_names(const std::string& prefix) {
  std::vector<std::string> out;
  for (const char* n : {"W1", "b1", "W2", "b2", "W3", "b3"}) out.push_back(prefix + "." + n);
  return out;
}

void FfnParams::init(std::map<std::string, Mat>& params, int in_size, int width, int out_size,
                     Rng& rng, const std::string& pfx) {
  params[pfx + ".W1"] = init_matrix(width, in_size, in_size, rng);
  params[pfx + ".b1"] = init_matrix(width, 1, in_size, rng);
  params[pfx + ".W2"] = init_matrix(width, width, width, rng);
  params[pfx + ".b2"] = init_matrix(width, 1, width, rng);
  params[pfx + ".W3"] = init_matrix(out_size, width, width, rng);
  params[pfx + ".b3"] = init_matrix(out_size, 1, width, rng);
}

Tape::Id ffn_forward(Tape& t, const std::map<std::string, Mat>& params, const std::string& pfx,
                     Tape::Id x) {
  auto P = [&](const char* n) { return t.leaf(pfx + "." + n, &params.at(pfx + "." + n)); };
  auto h1 = t.relu(t.add_bias(t.matmul(P("W1"), x), P("b1")));
  auto h2 = t.relu(t.add_bias(t.matmul(P("W2"), h1), P("b2")));
  return t.add_bias(t.matmul(P("W3"), h2), P("b3"));
}

// ---------------------------------------------------------------------------
// ModelWeights

int ModelWeights::tactic_id(const std::string& name) const {
  auto it = tactic_index_.find(name);
  return it == tactic_index_.end() ? -1 : it->second;
}

int ModelWeights::token_id(const std::string& tok) const {
  auto it = token_index_.find(tok);
  return it == token_index_.end() ? 0 : it->second;
}

void ModelWeights::rebuild_index() {
  tactic_index_.clear();
  token_index_.clear();
  for (size_t i = 0; i < tactic_vocab.size(); ++i) tactic_index_[tactic_vocab[i]] = (int)i;
  for (size_t i = 0; i < token_vocab.size(); ++i) token_index_[token_vocab[i]] = (int)i;
}

bool ModelWeights::operator==(const ModelWeights& o) const {
  if (version != o.version || hidden != o.hidden) return false;
  if (feat_vocab.prev_tactics != o.feat_vocab.prev_tactics) return false;
  if (feat_vocab.head_tokens != o.feat_vocab.head_tokens) return false;
  if (tactic_vocab != o.tactic_vocab || token_vocab != o.token_vocab) return false;
  if (params.size() != o.params.size()) return false;
  for (auto it = params.begin(), jt = o.params.begin(); it != params.end(); ++it, ++jt) {
    if (it->first != jt->first) return false;
    if (it->second.rows() != jt->second.rows() || it->second.cols() != jt->second.cols())
      return false;
    if (memcmp(it->second.data(), jt->second.data(), sizeof(double) * it->second.size()) != 0)
      return false;
  }
  return true;
}

namespace {

constexpr char kMagic[4] = {'T', 'S', 'C', 'T'};

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); }
void write_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<char*>(&v), 8); }
void write_str(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_strings(std::ostream& os, const std::vector<std::string>& v) {
  write_u64(os, v.size());
  for (auto& s : v) write_str(os, s);
}

uint32_t read_u32(std::istream& is) {
  uint32_t v;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw std::runtime_error("weights file truncated");
  return v;
}
uint64_t read_u64(std::istream& is) {
  uint64_t v;
  is.read(reinterpret_cast<char*>(&v), 8);
  if (!is) throw std::runtime_error("weights file truncated");
  return v;
}
std::string read_str(std::istream& is) {
  uint64_t n = read_u64(is);
  if (n > (1ull << 32)) throw std::runtime_error("weights file corrupt");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw std::runtime_error("weights file truncated");
  return s;
}
std::vector<std::string> read_strings(std::istream& is) {
  uint64_t n = read_u64(is);
  if (n > (1ull << 24)) throw std::runtime_error("weights file corrupt");
  std::vector<std::string> out(n);
  for (auto& s : out) s = read_str(is);
  return out;
}

}  // namespace

void save_weights(const ModelWeights& w, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kMagic, 4);
  write_u32(os, w.version);
  write_u32(os, static_cast<uint32_t>(w.hidden));
  write_strings(os, w.feat_vocab.prev_tactics);
  write_strings(os, w.feat_vocab.head_tokens);
  write_strings(os, w.tactic_vocab);
  write_strings(os, w.token_vocab);
  write_u64(os, w.params.size());
  for (auto& [name, m] : w.params) {
    write_str(os, name);
    write_u64(os, static_cast<uint64_t>(m.rows()));
    write_u64(os, static_cast<uint64_t>(m.cols()));
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(sizeof(double) * m.size()));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

ModelWeights load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("not a weights file");
  ModelWeights w;
  w.version = read_u32(is);
  if (w.version != kWeightsFormatVersion)
    throw std::runtime_error("weights format version mismatch: file has version " +
                             std::to_string(w.version) + ", expected " +
                             std::to_string(kWeightsFormatVersion));
  w.hidden = static_cast<int>(read_u32(is));
  w.feat_vocab.prev_tactics = read_strings(is);
  w.feat_vocab.head_tokens = read_strings(is);
  w.tactic_vocab = read_strings(is);
  w.token_vocab = read_strings(is);
  uint64_t n = read_u64(is);
  for (uint64_t i = 0; i < n; ++i) {
    std::string name = read_str(is);
    uint64_t rows = read_u64(is), cols = read_u64(is);
    if (rows > (1u << 24) || cols > (1u << 24)) throw std::runtime_error("weights file corrupt");
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!is) throw std::runtime_error("weights file truncated");
    w.params.emplace(std::move(name), std::move(m));
  }
  w.feat_vocab.rebuild_index();
  w.rebuild_index();
  return w;
}

void sgd_step(std::map<std::string, Mat>& params, const std::map<std::string, Mat>& grads,
              double lr) {
  for (auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) continue;
    it->second.noalias() -= lr * g;
  }
}

}  // namespace tacsearch::neural
