#include "fraudgraph/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fraudgraph/optim.hpp"

namespace fraudgraph {

namespace {

std::array<int, kNodeTypeCount> feature_dims(const HeteroGraph& g) {
  return {g.feature_dim(NodeType::Customer), g.feature_dim(NodeType::Merchant),
          g.feature_dim(NodeType::Transaction)};
}

}  // namespace

TrainResult train(const HeteroGraph& graph_train, const HeteroGraph& graph_val,
                  const std::vector<bool>& val_labels, const TrainConfig& config) {
  const ModelConfig model_cfg = config.model_config();
  model_cfg.check();
  if (graph_train.node_count(NodeType::Transaction) == 0) fail("EmptyGraph", "no transactions to train on");
  if (static_cast<int>(val_labels.size()) != graph_val.node_count(NodeType::Transaction))
    fail("LengthMismatch", "validation labels must cover every validation transaction");

  Rng init_rng(config.seed);
  Rng train_rng(config.seed + 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  result.params = ModelParams::init(feature_dims(graph_train), model_cfg, init_rng);
  result.best_val_loss = std::numeric_limits<double>::infinity();
  if (config.epochs <= 0) return result;

  auto params_vec = result.params.all_parameters();
  AdamW optimizer(config.learning_rate, config.weight_decay);
  ModelParams best = result.params.clone();
  int stale_epochs = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (auto& p : params_vec) p.zero_grad();
    LatentState latent = encode(result.params, graph_train, model_cfg, true, train_rng);
    auto recon = decode(result.params, latent.h);
    Tensor loss = reconstruction_loss(graph_train, recon, latent, config.kl_beta);
    const double train_loss = loss.values()[0];
    if (!std::isfinite(train_loss))
      fail("NonFiniteLoss", "training loss diverged at epoch " + std::to_string(epoch + 1));
    backward(loss);
    optimizer.step(params_vec);

    EpochStats stats;
    stats.train_loss = train_loss;
    const auto val_scores = score_transactions(result.params, model_cfg, graph_val);
    double genuine_sum = 0.0, fraud_sum = 0.0;
    long genuine_n = 0, fraud_n = 0;
    for (size_t i = 0; i < val_scores.size(); ++i) {
      if (val_labels[i]) {
        fraud_sum += val_scores[i];
        ++fraud_n;
      } else {
        genuine_sum += val_scores[i];
        ++genuine_n;
      }
    }
    stats.val_genuine = genuine_n > 0 ? genuine_sum / genuine_n : 0.0;
    stats.val_fraud = fraud_n > 0 ? fraud_sum / fraud_n : 0.0;
    result.history.push_back(stats);

    if (stats.val_genuine < result.best_val_loss) {
      result.best_val_loss = stats.val_genuine;
      best = result.params.clone();
      stale_epochs = 0;
    } else if (++stale_epochs >= config.patience) {
      break;
    }
  }
  result.params = std::move(best);
  return result;
}

std::vector<double> score_transactions(ModelParams& params, const ModelConfig& config,
                                       const HeteroGraph& graph) {
  NoGradGuard guard;
  Rng unused(0);
  LatentState latent = encode(params, graph, config, false, unused);
  auto recon = decode(params, latent.h);
  return per_node_losses(graph, recon, NodeType::Transaction);
}

ScoreReport build_report(const HeteroGraph& graph, const std::vector<double>& scores,
                         const std::vector<bool>& labels, double threshold) {
  const auto& ids = graph.keys[static_cast<int>(NodeType::Transaction)];
  if (scores.size() != ids.size() || labels.size() != ids.size())
    fail("LengthMismatch", "scores/labels must cover every transaction node");
  ScoreReport report;
  report.threshold = threshold;
  const auto verdicts = classify(scores, threshold);
  report.transactions.reserve(ids.size());
  for (size_t i = 0; i < ids.size(); ++i)
    report.transactions.push_back({ids[i], scores[i], labels[i], static_cast<bool>(verdicts[i])});
  report.rates = confusion_and_rates(verdicts, labels);
  const long pos = static_cast<long>(std::count(labels.begin(), labels.end(), true));
  if (pos > 0 && pos < static_cast<long>(labels.size())) {
    report.roc = roc_curve_auc(scores, labels);
    report.pr = pr_curve_auc(scores, labels);
  }
  return report;
}

}  // namespace fraudgraph
