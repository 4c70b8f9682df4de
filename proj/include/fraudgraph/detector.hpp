#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraudgraph/hetgraph.hpp"
#include "fraudgraph/metrics.hpp"
#include "fraudgraph/model.hpp"

namespace fraudgraph {

struct TrainConfig {
  int dim = 64;
  int heads = 16;
  int encoder_depth = 2;
  int decoder_width = 64;
  double dropout = 0.4;
  double weight_decay = 0.01;
  double learning_rate = 1e-3;
  double kl_beta = 0.0;
  int epochs = 100;
  int patience = 20;
  std::uint64_t seed = 1;

  ModelConfig model_config() const {
    return {dim, heads, encoder_depth, decoder_width, dropout, kl_beta};
  }
};

struct EpochStats {
  double train_loss = 0.0;
  double val_genuine = 0.0;
  double val_fraud = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
  double best_val_loss = 0.0;
};

// Full-batch training on a genuine-only graph; per-epoch validation scores
// drive early stopping and the returned snapshot is the best-validation one.
TrainResult train(const HeteroGraph& graph_train, const HeteroGraph& graph_val,
                  const std::vector<bool>& val_labels, const TrainConfig& config);

// Deterministic inference scores: per-transaction MSE between input features
// and their reconstruction.
std::vector<double> score_transactions(ModelParams& params, const ModelConfig& config,
                                       const HeteroGraph& graph);

struct TransactionVerdict {
  std::string trans_id;
  double loss = 0.0;
  bool label = false;
  bool verdict = false;
};

struct ScoreReport {
  std::vector<TransactionVerdict> transactions;
  double threshold = 0.0;
  ConfusionRates rates;
  Curve roc;
  Curve pr;
};

ScoreReport build_report(const HeteroGraph& graph, const std::vector<double>& scores,
                         const std::vector<bool>& labels, double threshold);

}  // namespace fraudgraph
