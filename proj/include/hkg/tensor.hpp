#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <random>
#include <string>
#include <vector>

namespace hkg::ad {

// Dense row-major matrix of doubles. Rank 0/1 values are represented as
// [1,1] and [1,n]; every op checks shapes explicitly (no broadcasting).
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const { return data.size(); }
  std::string shape_str() const {
    return "[" + std::to_string(rows) + "," + std::to_string(cols) + "]";
  }
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using VarId = int;

// Reverse-mode tape. Every op appends a node holding its output value and a
// closure that routes the output gradient to the parents. Gradients
// accumulate additively across fan-out.
class Tape {
 public:
  VarId input(Tensor value);              // leaf, gradient not requested
  VarId param(Tensor value);              // leaf, gradient requested

  VarId matmul(VarId a, VarId b);         // [m,k]x[k,n]
  VarId matmul_nt(VarId a, VarId b);      // a * b^T : [m,k]x[n,k]
  VarId add(VarId a, VarId b);
  VarId sub(VarId a, VarId b);
  VarId mul(VarId a, VarId b);            // elementwise
  VarId scale(VarId a, double c);
  VarId relu(VarId a);
  VarId sqrt_elem(VarId a);               // requires strictly positive input
  VarId row_sum(VarId a);                 // [m,n] -> [m,1]
  VarId sum(VarId a);                     // [m,n] -> [1,1]
  VarId scale_rows(VarId a, VarId s);     // a[m,n] * s[m,1] per row
  VarId add_rowvec(VarId a, VarId b);     // a[m,n] + b[1,n] per row
  VarId concat_rows(const std::vector<VarId>& parts);
  VarId concat_cols(const std::vector<VarId>& parts);
  VarId slice_cols(VarId a, int start, int len);
  VarId gather_rows(VarId table, std::vector<int> indices);
  VarId segment_mean(VarId data, std::vector<int> segments, int n_segments);
  VarId softmax_rows(VarId a);
  VarId log_softmax_rows(VarId a);
  VarId layer_norm_rows(VarId x, VarId gain, VarId shift, double eps = 1e-5);
  VarId dropout(VarId a, const Tensor& mask);  // elementwise mul by fixed mask

  const Tensor& value(VarId v) const { return nodes_.at(v).value; }
  const Tensor& grad(VarId v) const { return nodes_.at(v).grad; }

  // Reverse pass from a scalar loss. Leaves unreachable from the loss keep
  // zero gradients.
  void backward(VarId loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<VarId> parents;
    std::function<void(Tape&, const Node&)> backprop;  // empty for leaves
  };

  VarId emit(Tensor value, std::vector<VarId> parents,
             std::function<void(Tape&, const Node&)> backprop);
  Tensor& grad_mut(VarId v) { return nodes_[v].grad; }

  std::vector<Node> nodes_;
};

// Named parameter collection shared by models, the optimizer, and
// checkpoints.
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Tensor> values;

  int add(const std::string& name, Tensor value);
  int index(const std::string& name) const;  // -1 when absent
  Tensor& operator[](int i) { return values[i]; }
  const Tensor& operator[](int i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

// All parameters of a ParamSet registered on one tape, in order.
struct BoundParams {
  std::vector<VarId> vars;
  VarId operator[](int i) const { return vars[i]; }
};

BoundParams bind(Tape& tape, const ParamSet& params);

// Central finite-difference check of d loss / d params[param_index] at
// `n_coords` random coordinates. Returns the maximum relative error.
double finite_difference_check(
    const std::function<double(const ParamSet&)>& loss_fn, ParamSet params,
    int param_index, const Tensor& analytic_grad, int n_coords,
    std::mt19937_64& rng, double step = 1e-5);

}  // namespace hkg::ad
