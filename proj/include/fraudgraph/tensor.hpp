#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <vector>

#include "fraudgraph/error.hpp"
#include "fraudgraph/rng.hpp"

namespace fraudgraph {

struct TensorNode {
  int rows = 0;
  int cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // sized lazily, same length as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backfn;  // reads this->grad, accumulates into parents

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Value-semantics handle onto a shared node. Copies alias the same storage;
// ops create fresh nodes that remember their parents for reverse replay.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, double fill = 0.0);
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor from_data(int rows, int cols, std::vector<double> data);

  bool defined() const { return node_ != nullptr; }
  int rows() const { return node_->rows; }
  int cols() const { return node_->cols; }
  int size() const { return node_->rows * node_->cols; }

  double operator()(int r, int c) const { return node_->value[static_cast<size_t>(r) * node_->cols + c]; }
  double& at(int r, int c) { return node_->value[static_cast<size_t>(r) * node_->cols + c]; }

  const std::vector<double>& values() const { return node_->value; }
  std::vector<double>& values() { return node_->value; }
  std::vector<double>& grad() { node_->ensure_grad(); return node_->grad; }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool on) {
    node_->requires_grad = on;
    if (on) node_->ensure_grad();
    return *this;
  }
  void zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

  // deep copy of values; never carries history
  Tensor clone() const;

  const std::shared_ptr<TensorNode>& node() const { return node_; }

 private:
  std::shared_ptr<TensorNode> node_;
};

// Gradient recording is on by default; scoped off for inference paths.
bool grad_enabled();
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// core ops, each with a recorded backward rule
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_rowvec(const Tensor& a, const Tensor& row);  // row is 1 x cols
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor mean_rows(const Tensor& a);  // column means, 1 x cols
Tensor sum(const Tensor& a);       // 1 x 1
Tensor mean_all(const Tensor& a);  // 1 x 1
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& a, int lo, int hi);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor gather_rows(const Tensor& a, const std::vector<int>& idx);
Tensor scatter_add_rows(const Tensor& a, const std::vector<int>& idx, int n_rows);
Tensor rows_dot(const Tensor& a, const Tensor& b);  // per-row dot, n x 1
Tensor mul_col(const Tensor& a, const Tensor& col);  // scale row i by col(i,0)
Tensor segment_softmax(const Tensor& scores, const std::vector<int>& segment, int n_segments);
Tensor dropout(const Tensor& a, double rate, bool training, Rng& rng);

// Reverse replay from a scalar loss; fills grad on every requires_grad tensor
// reachable from it.
void backward(const Tensor& loss);

}  // namespace fraudgraph
