#include "fraudgraph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace fraudgraph {

namespace {

thread_local bool g_grad_enabled = true;

std::shared_ptr<TensorNode> new_node(int rows, int cols) {
  auto n = std::make_shared<TensorNode>();
  n->rows = rows;
  n->cols = cols;
  n->value.assign(static_cast<size_t>(rows) * cols, 0.0);
  return n;
}

bool any_requires(std::initializer_list<const Tensor*> ts) {
  for (const Tensor* t : ts)
    if (t->requires_grad()) return true;
  return false;
}

Tensor make_result(int rows, int cols,
                   std::initializer_list<const Tensor*> inputs,
                   std::function<void(TensorNode&)> backfn) {
  auto n = new_node(rows, cols);
  if (g_grad_enabled && any_requires(inputs)) {
    n->requires_grad = true;
    for (const Tensor* t : inputs) n->parents.push_back(t->node());
    n->backfn = std::move(backfn);
  }
  return Tensor(n);
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail("ShapeMismatch", std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                              "x" + std::to_string(b.cols()));
}

void accumulate(TensorNode& dst, const std::vector<double>& g) {
  dst.ensure_grad();
  for (size_t i = 0; i < g.size(); ++i) dst.grad[i] += g[i];
}

}  // namespace

Tensor::Tensor(int rows, int cols, double fill) : node_(new_node(rows, cols)) {
  if (fill != 0.0) std::fill(node_->value.begin(), node_->value.end(), fill);
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
  Tensor t(r, c);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) fail("ShapeMismatch", "ragged initializer");
    int j = 0;
    for (double v : row) t.at(i, j++) = v;
    ++i;
  }
  return t;
}

Tensor Tensor::from_data(int rows, int cols, std::vector<double> data) {
  if (static_cast<size_t>(rows) * cols != data.size())
    fail("ShapeMismatch", "from_data: length mismatch");
  auto n = new_node(rows, cols);
  n->value = std::move(data);
  return Tensor(n);
}

Tensor Tensor::clone() const {
  auto n = new_node(node_->rows, node_->cols);
  n->value = node_->value;
  return Tensor(n);
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    fail("ShapeMismatch", "matmul: " + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()));
  const int m = a.rows(), k = a.cols(), n = b.cols();
  auto an = a.node();
  auto bn = b.node();
  Tensor out = make_result(m, n, {&a, &b}, [an, bn, m, k, n](TensorNode& self) {
    const auto& g = self.grad;
    if (an->requires_grad) {
      an->ensure_grad();
      // gA += g * B^T
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const double gij = g[static_cast<size_t>(i) * n + j];
          if (gij == 0.0) continue;
          for (int p = 0; p < k; ++p)
            an->grad[static_cast<size_t>(i) * k + p] += gij * bn->value[static_cast<size_t>(p) * n + j];
        }
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      // gB += A^T * g
      for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
          const double aip = an->value[static_cast<size_t>(i) * k + p];
          if (aip == 0.0) continue;
          for (int j = 0; j < n; ++j)
            bn->grad[static_cast<size_t>(p) * n + j] += aip * g[static_cast<size_t>(i) * n + j];
        }
    }
  });
  auto& ov = out.values();
  const auto& av = a.values();
  const auto& bv = b.values();
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double aip = av[static_cast<size_t>(i) * k + p];
      if (aip == 0.0) continue;
      const size_t brow = static_cast<size_t>(p) * n, orow = static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) ov[orow + j] += aip * bv[brow + j];
    }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  auto an = a.node();
  auto bn = b.node();
  Tensor out = make_result(a.rows(), a.cols(), {&a, &b}, [an, bn](TensorNode& self) {
    if (an->requires_grad) accumulate(*an, self.grad);
    if (bn->requires_grad) accumulate(*bn, self.grad);
  });
  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  auto an = a.node();
  auto bn = b.node();
  Tensor out = make_result(a.rows(), a.cols(), {&a, &b}, [an, bn](TensorNode& self) {
    if (an->requires_grad) accumulate(*an, self.grad);
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] -= self.grad[i];
    }
  });
  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  auto an = a.node();
  auto bn = b.node();
  Tensor out = make_result(a.rows(), a.cols(), {&a, &b}, [an, bn](TensorNode& self) {
    if (an->requires_grad) {
      an->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * bn->value[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] += self.grad[i] * an->value[i];
    }
  });
  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  auto an = a.node();
  Tensor out = make_result(a.rows(), a.cols(), {&a}, [an, s](TensorNode& self) {
    an->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += s * self.grad[i];
  });
  const auto& av = a.values();
  auto& ov = out.values();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = s * av[i];
  return out;
}

Tensor add_rowvec(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) fail("ShapeMismatch", "add_rowvec");
  auto an = a.node();
  auto rn = row.node();
  const int cols = a.cols();
  Tensor out = make_result(a.rows(), cols, {&a, &row}, [an, rn, cols](TensorNode& self) {
    if (an->requires_grad) accumulate(*an, self.grad);
    if (rn->requires_grad) {
      rn->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) rn->grad[i % cols] += self.grad[i];
    }
  });
  const auto& av = a.values();
  const auto& rv = row.values();
  auto& ov = out.values();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + rv[i % cols];
  return out;
}

Tensor exp(const Tensor& a) {
  auto an = a.node();
  Tensor out = make_result(a.rows(), a.cols(), {&a}, [an](TensorNode& self) {
    an->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * self.value[i];
  });
  const auto& av = a.values();
  auto& ov = out.values();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = std::exp(av[i]);
  return out;
}

Tensor log(const Tensor& a) {
  const auto& av = a.values();
  for (double v : av)
    if (v <= 0.0) fail("DomainError", "log of non-positive value");
  auto an = a.node();
  Tensor out = make_result(a.rows(), a.cols(), {&a}, [an](TensorNode& self) {
    an->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] / an->value[i];
  });
  auto& ov = out.values();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = std::log(av[i]);
  return out;
}

Tensor relu(const Tensor& a) {
  auto an = a.node();
  Tensor out = make_result(a.rows(), a.cols(), {&a}, [an](TensorNode& self) {
    an->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i)
      if (an->value[i] > 0.0) an->grad[i] += self.grad[i];
  });
  const auto& av = a.values();
  auto& ov = out.values();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] > 0.0 ? av[i] : 0.0;
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  const int rows = a.rows(), cols = a.cols();
  auto an = a.node();
  Tensor out = make_result(rows, cols, {&a}, [an, rows, cols](TensorNode& self) {
    an->ensure_grad();
    for (int i = 0; i < rows; ++i) {
      const size_t off = static_cast<size_t>(i) * cols;
      double dot = 0.0;
      for (int j = 0; j < cols; ++j) dot += self.grad[off + j] * self.value[off + j];
      for (int j = 0; j < cols; ++j)
        an->grad[off + j] += self.value[off + j] * (self.grad[off + j] - dot);
    }
  });
  const auto& av = a.values();
  auto& ov = out.values();
  for (int i = 0; i < rows; ++i) {
    const size_t off = static_cast<size_t>(i) * cols;
    double mx = av[off];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, av[off + j]);
    double denom = 0.0;
    for (int j = 0; j < cols; ++j) denom += (ov[off + j] = std::exp(av[off + j] - mx));
    for (int j = 0; j < cols; ++j) ov[off + j] /= denom;
  }
  return out;
}

Tensor mean_rows(const Tensor& a) {
  const int rows = a.rows(), cols = a.cols();
  auto an = a.node();
  Tensor out = make_result(1, cols, {&a}, [an, rows, cols](TensorNode& self) {
    an->ensure_grad();
    const double inv = 1.0 / rows;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) an->grad[static_cast<size_t>(i) * cols + j] += inv * self.grad[j];
  });
  const auto& av = a.values();
  auto& ov = out.values();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) ov[j] += av[static_cast<size_t>(i) * cols + j];
  for (int j = 0; j < cols; ++j) ov[j] /= rows;
  return out;
}

Tensor sum(const Tensor& a) {
  auto an = a.node();
  Tensor out = make_result(1, 1, {&a}, [an](TensorNode& self) {
    an->ensure_grad();
    for (double& g : an->grad) g += self.grad[0];
  });
  double s = 0.0;
  for (double v : a.values()) s += v;
  out.values()[0] = s;
  return out;
}

Tensor mean_all(const Tensor& a) {
  const double inv = 1.0 / a.size();
  auto an = a.node();
  Tensor out = make_result(1, 1, {&a}, [an, inv](TensorNode& self) {
    an->ensure_grad();
    for (double& g : an->grad) g += inv * self.grad[0];
  });
  double s = 0.0;
  for (double v : a.values()) s += v;
  out.values()[0] = s * inv;
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) fail("ShapeMismatch", "concat_cols: row count differs");
  const int rows = a.rows(), ca = a.cols(), cb = b.cols();
  auto an = a.node();
  auto bn = b.node();
  Tensor out = make_result(rows, ca + cb, {&a, &b}, [an, bn, rows, ca, cb](TensorNode& self) {
    for (int i = 0; i < rows; ++i) {
      const size_t off = static_cast<size_t>(i) * (ca + cb);
      if (an->requires_grad) {
        an->ensure_grad();
        for (int j = 0; j < ca; ++j) an->grad[static_cast<size_t>(i) * ca + j] += self.grad[off + j];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int j = 0; j < cb; ++j) bn->grad[static_cast<size_t>(i) * cb + j] += self.grad[off + ca + j];
      }
    }
  });
  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values();
  for (int i = 0; i < rows; ++i) {
    const size_t off = static_cast<size_t>(i) * (ca + cb);
    for (int j = 0; j < ca; ++j) ov[off + j] = av[static_cast<size_t>(i) * ca + j];
    for (int j = 0; j < cb; ++j) ov[off + ca + j] = bv[static_cast<size_t>(i) * cb + j];
  }
  return out;
}

Tensor slice_cols(const Tensor& a, int lo, int hi) {
  if (lo < 0 || hi > a.cols() || lo >= hi) fail("ShapeMismatch", "slice_cols: bad range");
  const int rows = a.rows(), cols = a.cols(), w = hi - lo;
  auto an = a.node();
  Tensor out = make_result(rows, w, {&a}, [an, rows, cols, lo, w](TensorNode& self) {
    an->ensure_grad();
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < w; ++j)
        an->grad[static_cast<size_t>(i) * cols + lo + j] += self.grad[static_cast<size_t>(i) * w + j];
  });
  const auto& av = a.values();
  auto& ov = out.values();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < w; ++j) ov[static_cast<size_t>(i) * w + j] = av[static_cast<size_t>(i) * cols + lo + j];
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) fail("ShapeMismatch", "concat_rows: empty input");
  const int cols = parts[0].cols();
  int rows = 0;
  for (const Tensor& p : parts) {
    if (p.cols() != cols) fail("ShapeMismatch", "concat_rows: column count differs");
    rows += p.rows();
  }
  auto n = new_node(rows, cols);
  bool req = false;
  for (const Tensor& p : parts) req = req || p.requires_grad();
  std::vector<std::shared_ptr<TensorNode>> pnodes;
  for (const Tensor& p : parts) pnodes.push_back(p.node());
  if (g_grad_enabled && req) {
    n->requires_grad = true;
    n->parents = pnodes;
    n->backfn = [pnodes, cols](TensorNode& self) {
      size_t off = 0;
      for (const auto& pn : pnodes) {
        const size_t len = pn->value.size();
        if (pn->requires_grad) {
          pn->ensure_grad();
          for (size_t i = 0; i < len; ++i) pn->grad[i] += self.grad[off + i];
        }
        off += len;
      }
    };
  }
  Tensor out(n);
  auto& ov = out.values();
  size_t off = 0;
  for (const Tensor& p : parts) {
    const auto& pv = p.values();
    std::copy(pv.begin(), pv.end(), ov.begin() + off);
    off += pv.size();
  }
  return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& idx) {
  const int cols = a.cols();
  for (int i : idx)
    if (i < 0 || i >= a.rows()) fail("ShapeMismatch", "gather_rows: index out of range");
  auto an = a.node();
  auto indices = idx;
  Tensor out = make_result(static_cast<int>(idx.size()), cols, {&a},
                           [an, indices, cols](TensorNode& self) {
                             an->ensure_grad();
                             for (size_t i = 0; i < indices.size(); ++i)
                               for (int j = 0; j < cols; ++j)
                                 an->grad[static_cast<size_t>(indices[i]) * cols + j] +=
                                     self.grad[i * cols + j];
                           });
  const auto& av = a.values();
  auto& ov = out.values();
  for (size_t i = 0; i < idx.size(); ++i)
    for (int j = 0; j < cols; ++j) ov[i * cols + j] = av[static_cast<size_t>(idx[i]) * cols + j];
  return out;
}

Tensor scatter_add_rows(const Tensor& a, const std::vector<int>& idx, int n_rows) {
  if (static_cast<int>(idx.size()) != a.rows()) fail("ShapeMismatch", "scatter_add_rows: index count");
  const int cols = a.cols();
  for (int i : idx)
    if (i < 0 || i >= n_rows) fail("ShapeMismatch", "scatter_add_rows: index out of range");
  auto an = a.node();
  auto indices = idx;
  Tensor out = make_result(n_rows, cols, {&a}, [an, indices, cols](TensorNode& self) {
    an->ensure_grad();
    for (size_t i = 0; i < indices.size(); ++i)
      for (int j = 0; j < cols; ++j)
        an->grad[i * cols + j] += self.grad[static_cast<size_t>(indices[i]) * cols + j];
  });
  const auto& av = a.values();
  auto& ov = out.values();
  for (size_t i = 0; i < idx.size(); ++i)
    for (int j = 0; j < cols; ++j) ov[static_cast<size_t>(idx[i]) * cols + j] += av[i * cols + j];
  return out;
}

Tensor rows_dot(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "rows_dot");
  const int rows = a.rows(), cols = a.cols();
  auto an = a.node();
  auto bn = b.node();
  Tensor out = make_result(rows, 1, {&a, &b}, [an, bn, rows, cols](TensorNode& self) {
    for (int i = 0; i < rows; ++i) {
      const double g = self.grad[i];
      const size_t off = static_cast<size_t>(i) * cols;
      if (an->requires_grad) {
        an->ensure_grad();
        for (int j = 0; j < cols; ++j) an->grad[off + j] += g * bn->value[off + j];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int j = 0; j < cols; ++j) bn->grad[off + j] += g * an->value[off + j];
      }
    }
  });
  const auto& av = a.values();
  const auto& bv = b.values();
  auto& ov = out.values();
  for (int i = 0; i < rows; ++i) {
    const size_t off = static_cast<size_t>(i) * cols;
    double s = 0.0;
    for (int j = 0; j < cols; ++j) s += av[off + j] * bv[off + j];
    ov[i] = s;
  }
  return out;
}

Tensor mul_col(const Tensor& a, const Tensor& col) {
  if (col.rows() != a.rows() || col.cols() != 1) fail("ShapeMismatch", "mul_col");
  const int rows = a.rows(), cols = a.cols();
  auto an = a.node();
  auto cn = col.node();
  Tensor out = make_result(rows, cols, {&a, &col}, [an, cn, rows, cols](TensorNode& self) {
    for (int i = 0; i < rows; ++i) {
      const size_t off = static_cast<size_t>(i) * cols;
      if (an->requires_grad) {
        an->ensure_grad();
        for (int j = 0; j < cols; ++j) an->grad[off + j] += self.grad[off + j] * cn->value[i];
      }
      if (cn->requires_grad) {
        cn->ensure_grad();
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += self.grad[off + j] * an->value[off + j];
        cn->grad[i] += s;
      }
    }
  });
  const auto& av = a.values();
  const auto& cv = col.values();
  auto& ov = out.values();
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      ov[static_cast<size_t>(i) * cols + j] = av[static_cast<size_t>(i) * cols + j] * cv[i];
  return out;
}

Tensor segment_softmax(const Tensor& scores, const std::vector<int>& segment, int n_segments) {
  if (scores.cols() != 1 || static_cast<int>(segment.size()) != scores.rows())
    fail("ShapeMismatch", "segment_softmax");
  for (int s : segment)
    if (s < 0 || s >= n_segments) fail("ShapeMismatch", "segment_softmax: segment id out of range");
  const int n = scores.rows();
  auto sn = scores.node();
  auto seg = segment;
  Tensor out = make_result(n, 1, {&scores}, [sn, seg, n_segments, n](TensorNode& self) {
    sn->ensure_grad();
    std::vector<double> dot(n_segments, 0.0);
    for (int i = 0; i < n; ++i) dot[seg[i]] += self.grad[i] * self.value[i];
    for (int i = 0; i < n; ++i) sn->grad[i] += self.value[i] * (self.grad[i] - dot[seg[i]]);
  });
  const auto& sv = scores.values();
  auto& ov = out.values();
  std::vector<double> mx(n_segments, -1e300), denom(n_segments, 0.0);
  for (int i = 0; i < n; ++i) mx[seg[i]] = std::max(mx[seg[i]], sv[i]);
  for (int i = 0; i < n; ++i) denom[seg[i]] += (ov[i] = std::exp(sv[i] - mx[seg[i]]));
  for (int i = 0; i < n; ++i) ov[i] /= denom[seg[i]];
  return out;
}

Tensor dropout(const Tensor& a, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) fail("InvalidRate", "dropout rate must be in [0,1)");
  if (!training || rate == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(a.values().size());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  auto an = a.node();
  auto shared_mask = std::make_shared<std::vector<double>>(std::move(mask));
  Tensor out = make_result(a.rows(), a.cols(), {&a}, [an, shared_mask](TensorNode& self) {
    an->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * (*shared_mask)[i];
  });
  const auto& av = a.values();
  auto& ov = out.values();
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * (*shared_mask)[i];
  return out;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1)
    fail("NotScalarLoss", "backward requires a 1x1 loss tensor");
  // iterative post-order DFS for a topological order
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<TensorNode*, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* p = node->parents[next++].get();
      if (!visited.count(p) && (p->requires_grad || !p->parents.empty())) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (TensorNode* n : order)
    if (n != loss.node().get()) n->ensure_grad();
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backfn) (*it)->backfn(**it);
}

}  // namespace fraudgraph
