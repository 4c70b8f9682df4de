#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "fraudgraph/tensor.hpp"

namespace testutil {

// Central-difference gradient check: analytic grads from one backward pass
// against numeric derivatives of the scalar-valued forward.
struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
};

inline GradCheckResult grad_check(std::vector<fraudgraph::Tensor>& params,
                                  const std::function<double()>& forward_value,
                                  const std::function<fraudgraph::Tensor()>& forward_tape,
                                  double h = 1e-5, int max_entries_per_param = 1 << 30) {
  using fraudgraph::Tensor;
  for (auto& p : params) p.zero_grad();
  Tensor loss = forward_tape();
  fraudgraph::backward(loss);

  GradCheckResult result;
  for (auto& p : params) {
    auto& value = p.values();
    auto& grad = p.grad();
    const int n = static_cast<int>(value.size());
    const int step = n <= max_entries_per_param ? 1 : n / max_entries_per_param;
    for (int i = 0; i < n; i += step) {
      const double saved = value[i];
      value[i] = saved + h;
      const double up = forward_value();
      value[i] = saved - h;
      const double down = forward_value();
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
      result.max_rel_error = std::max(result.max_rel_error, std::abs(numeric - grad[i]) / denom);
      ++result.checked;
    }
  }
  return result;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fraudgraph_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
