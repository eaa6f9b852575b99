#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tacsearch/features.hpp"

namespace tacsearch::neural {

using Mat = Eigen::MatrixXd;

// Deterministic RNG independent of library distribution implementations.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(uint64_t seed) : gen(seed) {}
  double uniform() {  // in [0, 1)
    return (gen() >> 11) * (1.0 / 9007199254740992.0);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  uint64_t next_u64() { return gen(); }
};

// Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
Mat init_matrix(int rows, int cols, int fan_in, Rng& rng);

// ---------------------------------------------------------------------------
// Reverse-mode tape. Values are matrices; column batching is used to score
// many candidates in one GEMM.

class Tape {
 public:
  using Id = int;

  Id leaf(const std::string& name, const Mat* value);  // tracked parameter
  Id input(Mat value);                                 // constant input

  Id matmul(Id a, Id b);
  Id add(Id a, Id b);              // same shape
  Id add_bias(Id a, Id bias);      // bias: r x 1, broadcast over columns
  Id mul(Id a, Id b);              // elementwise
  Id scale(Id a, double s);
  Id sigmoid(Id a);
  Id tanh_(Id a);
  Id relu(Id a);
  Id one_minus(Id a);              // 1 - x elementwise
  Id vcat(const std::vector<Id>& parts);
  Id hcat(const std::vector<Id>& parts);
  // Picks columns of an embedding table (cols of `table`); duplicates allowed.
  Id gather_cols(Id table, const std::vector<int>& indices);
  Id broadcast_col(Id v, int n);   // replicate an r x 1 column n times
  Id slice_cols(Id a, int start, int len);
  // out = fresh*diag(mask) + held*diag(1-mask); mask is a constant row.
  Id mask_mix(Id fresh, Id held, const Eigen::RowVectorXd& mask);
  // Per-group column-max over a 1 x N row; groups index into columns.
  Id max_merge(Id row, const std::vector<std::vector<int>>& groups);
  // Negative log-likelihood of `target` under softmax of the flattened values.
  Id nll_from_logits(Id logits, int target);

  const Mat& value(Id id) const {
    const Node& n = nodes_[id];
    return n.ref ? *n.ref : n.val;
  }
  void backward(Id loss);
  // Accumulates leaf gradients (sums into existing entries).
  void add_param_grads(std::map<std::string, Mat>& acc) const;

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat val;               // owned value (non-leaf nodes)
    const Mat* ref = nullptr;  // parameter leaves reference external storage
    Mat grad;
    bool has_grad = false;
    std::function<void(Tape&, Id)> back;  // nullptr for leaves/inputs
    std::string param_name;               // nonempty for parameter leaves
  };
  Mat& grad(Id id);
  Id push(Mat val, std::function<void(Tape&, Id)> back);
  std::vector<Node> nodes_;
  std::map<std::string, Id> leaf_cache_;
};

// Standalone forward helpers (used by tests as well as inference paths).
Mat softmax(const Mat& logits);
double nll_loss(const Mat& probabilities, int target);

// ---------------------------------------------------------------------------
// Parameter groups

struct GruParams {
  std::string prefix;
  int in = 0, hidden = 0;
  // Parameter names: <prefix>.W_iz, W_hz, b_z, W_ir, W_hr, b_r, W_in, b_in, W_hn, b_hn
  static std::vector<std::string> tensor_names(const std::string& prefix);
  void init(std::map<std::string, Mat>& params, int in_size, int hidden_size, Rng& rng,
            const std::string& prefix);
};

// One GRU recurrence step on the tape; x: in x C, h: hidden x C.
Tape::Id gru_step(Tape& t, const std::map<std::string, Mat>& params, const std::string& prefix,
                  Tape::Id x, Tape::Id h);

struct FfnParams {
  // <prefix>.W1,b1,W2,b2,W3,b3 ; 3 affine layers with relu between.
  static std::vector<std::string> tensor_names(const std::string& prefix);
  void init(std::map<std::string, Mat>& params, int in_size, int width, int out_size, Rng& rng,
            const std::string& prefix);
};

Tape::Id ffn_forward(Tape& t, const std::map<std::string, Mat>& params, const std::string& prefix,
                     Tape::Id x);

// ---------------------------------------------------------------------------
// Serializable bundle of everything both predictors need.

inline constexpr uint32_t kWeightsFormatVersion = 1;

struct ModelWeights {
  uint32_t version = kWeightsFormatVersion;
  FeatureVocab feat_vocab;
  std::vector<std::string> tactic_vocab;  // classifier classes; sorted registry order
  std::vector<std::string> token_vocab;   // argument-model tokens; [0] = UNK
  int hidden = 128;
  std::map<std::string, Mat> params;

  int tactic_id(const std::string& name) const;  // -1 if absent
  int token_id(const std::string& tok) const;    // 0 (UNK) if absent
  void rebuild_index();

  bool operator==(const ModelWeights& o) const;

 private:
  std::map<std::string, int> tactic_index_;
  std::map<std::string, int> token_index_;
};

void save_weights(const ModelWeights& w, const std::string& path);
ModelWeights load_weights(const std::string& path);  // throws on error/version mismatch

// SGD update: p -= lr * g for every named gradient.
void sgd_step(std::map<std::string, Mat>& params, const std::map<std::string, Mat>& grads,
              double lr);

}  // namespace tacsearch::neural
