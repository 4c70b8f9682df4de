#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fraudgraph/tensor.hpp"

namespace fraudgraph {

// Bias-corrected adaptive-moment optimizer with decoupled weight decay.
class AdamW {
 public:
  AdamW(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
        double eps = 1e-8)
      : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  std::int64_t step_count() const { return step_; }

  void step(std::vector<Tensor>& params) {
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (size_t p = 0; p < params.size(); ++p) {
        m_[p].assign(params[p].values().size(), 0.0);
        v_[p].assign(params[p].values().size(), 0.0);
      }
    }
    if (m_.size() != params.size()) fail("ShapeMismatch", "optimizer state / parameter count");
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (size_t p = 0; p < params.size(); ++p) {
      auto& value = params[p].values();
      auto& g = params[p].grad();
      if (m_[p].size() != value.size()) fail("ShapeMismatch", "optimizer state / parameter shape");
      for (size_t i = 0; i < value.size(); ++i) {
        m_[p][i] = beta1_ * m_[p][i] + (1.0 - beta1_) * g[i];
        v_[p][i] = beta2_ * v_[p][i] + (1.0 - beta2_) * g[i] * g[i];
        const double mhat = m_[p][i] / bc1;
        const double vhat = v_[p][i] / bc2;
        value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        value[i] *= 1.0 - lr_ * weight_decay_;
      }
    }
  }

 private:
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace fraudgraph
