#include "fraudgraph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "fraudgraph/svg.hpp"

namespace fraudgraph {

namespace {

namespace fs = std::filesystem;

struct PreparedGraph {
  HeteroGraph graph;
  std::vector<bool> labels;  // per transaction node
};

PreparedGraph prepare_graph(const std::vector<TransactionRecord>& records,
                            const FeatureSpec& spec) {
  PreparedGraph out;
  out.graph = build_graph(records, encode_features(records, spec));
  std::unordered_map<std::string, bool> label_by_id;
  for (const auto& r : records) label_by_id[r.trans_id] = r.is_fraud;
  for (const auto& id : out.graph.keys[static_cast<int>(NodeType::Transaction)])
    out.labels.push_back(label_by_id.at(id));
  return out;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  if (!out) fail("IoError", "cannot write " + path);
  out << "epoch,train_loss,val_genuine_loss,val_fraud_loss\n";
  for (size_t i = 0; i < history.size(); ++i)
    out << i + 1 << ',' << history[i].train_loss << ',' << history[i].val_genuine << ','
        << history[i].val_fraud << '\n';
}

void write_report_csv(const std::string& path, const ScoreReport& report) {
  std::ofstream out(path);
  if (!out) fail("IoError", "cannot write " + path);
  out << "trans_id,loss,label,verdict\n";
  char buf[32];
  for (const auto& t : report.transactions) {
    std::snprintf(buf, sizeof(buf), "%.12g", t.loss);
    out << t.trans_id << ',' << buf << ',' << (t.label ? 1 : 0) << ','
        << (t.verdict ? "Fraud" : "NonFraud") << '\n';
  }
}

void write_curves_csv(const std::string& path, const Curve& roc, const Curve& pr,
                      const std::vector<ThresholdPoint>& f1_curve) {
  std::ofstream out(path);
  if (!out) fail("IoError", "cannot write " + path);
  out << "curve,x,y\n";
  for (const auto& p : roc.points) out << "roc," << p.x << ',' << p.y << '\n';
  for (const auto& p : pr.points) out << "pr," << p.x << ',' << p.y << '\n';
  for (const auto& p : f1_curve) out << "f1," << p.threshold << ',' << p.f1 << '\n';
}

double fallback_threshold(const std::vector<double>& genuine_scores) {
  // no labeled fraud available: flag scores far outside the genuine bulk
  double mean = 0.0;
  for (double s : genuine_scores) mean += s;
  mean /= std::max<size_t>(1, genuine_scores.size());
  double var = 0.0;
  for (double s : genuine_scores) var += (s - mean) * (s - mean);
  var /= std::max<size_t>(1, genuine_scores.size());
  return mean + 3.0 * std::sqrt(var);
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) fail("ConfigError", "unknown key '" + key + "' in " + where);
}

}  // namespace

GeneratorConfig RunConfig::generator() const {
  GeneratorConfig g;
  g.n_customers = n_customers > 0 ? n_customers
                                  : std::max(2, static_cast<int>(std::lround(1000 * scale)));
  g.n_merchants = n_merchants > 0 ? n_merchants
                                  : std::max(2, static_cast<int>(std::lround(800 * scale)));
  g.n_days = n_days > 0 ? n_days : 730;
  g.fraud_rate = fraud_rate;
  g.seed = train.seed;
  return g;
}

void apply_config_file(RunConfig& run, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("ConfigError", "cannot open config file " + path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) fail("ConfigError", "config file " + path + " is not valid JSON");
  reject_unknown_keys(j, {"input", "output", "model", "out_dir", "columns", "train", "generator",
                          "split", "threshold", "seed", "scale"},
                      path);
  if (j.contains("input")) run.input = j["input"];
  if (j.contains("output")) run.output = j["output"];
  if (j.contains("model")) run.model_path = j["model"];
  if (j.contains("out_dir")) run.out_dir = j["out_dir"];
  if (j.contains("seed")) {
    run.train.seed = j["seed"].get<std::uint64_t>();
    run.seed_set = true;
  }
  if (j.contains("scale")) run.scale = j["scale"];
  if (j.contains("threshold")) run.threshold_override = j["threshold"];
  if (j.contains("columns")) {
    const auto& c = j["columns"];
    reject_unknown_keys(
        c, {"trans_id", "timestamp", "cc_num", "merchant", "category", "amount", "is_fraud"},
        path + ":columns");
    if (c.contains("trans_id")) run.columns.trans_id = c["trans_id"];
    if (c.contains("timestamp")) run.columns.timestamp = c["timestamp"];
    if (c.contains("cc_num")) run.columns.cc_num = c["cc_num"];
    if (c.contains("merchant")) run.columns.merchant = c["merchant"];
    if (c.contains("category")) run.columns.category = c["category"];
    if (c.contains("amount")) run.columns.amount = c["amount"];
    if (c.contains("is_fraud")) run.columns.is_fraud = c["is_fraud"];
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    reject_unknown_keys(t,
                        {"dim", "heads", "encoder_depth", "decoder_width", "dropout",
                         "weight_decay", "learning_rate", "kl_beta", "epochs", "patience"},
                        path + ":train");
    if (t.contains("dim")) run.train.dim = t["dim"];
    if (t.contains("heads")) run.train.heads = t["heads"];
    if (t.contains("encoder_depth")) run.train.encoder_depth = t["encoder_depth"];
    if (t.contains("decoder_width")) run.train.decoder_width = t["decoder_width"];
    if (t.contains("dropout")) run.train.dropout = t["dropout"];
    if (t.contains("weight_decay")) run.train.weight_decay = t["weight_decay"];
    if (t.contains("learning_rate")) run.train.learning_rate = t["learning_rate"];
    if (t.contains("kl_beta")) run.train.kl_beta = t["kl_beta"];
    if (t.contains("epochs")) run.train.epochs = t["epochs"];
    if (t.contains("patience")) run.train.patience = t["patience"];
  }
  if (j.contains("generator")) {
    const auto& g = j["generator"];
    reject_unknown_keys(g, {"n_customers", "n_merchants", "n_days", "fraud_rate"},
                        path + ":generator");
    if (g.contains("n_customers")) run.n_customers = g["n_customers"];
    if (g.contains("n_merchants")) run.n_merchants = g["n_merchants"];
    if (g.contains("n_days")) run.n_days = g["n_days"];
    if (g.contains("fraud_rate")) run.fraud_rate = g["fraud_rate"];
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    reject_unknown_keys(s, {"val_fraction", "test_fraction"}, path + ":split");
    if (s.contains("val_fraction")) run.val_fraction = s["val_fraction"];
    if (s.contains("test_fraction")) run.test_fraction = s["test_fraction"];
  }
}

int cmd_generate(const RunConfig& run) {
  if (!run.seed_set) fail("ConfigError", "generate requires an explicit --seed");
  if (run.output.empty()) fail("ConfigError", "generate requires --output");
  const auto records = generate_synthetic(run.generator());
  write_csv(run.output, records, run.columns);
  std::size_t fraud = 0;
  for (const auto& r : records) fraud += r.is_fraud;
  std::cout << "wrote " << records.size() << " records to " << run.output << " ("
            << records.size() - fraud << " genuine, " << fraud << " fraud)\n";
  return 0;
}

int cmd_build_graph(const RunConfig& run) {
  if (run.input.empty() || run.output.empty())
    fail("ConfigError", "build-graph requires --input and --output");
  const auto records = parse_csv(run.input, run.columns);
  if (records.empty()) fail("EmptyInput", run.input + " has no data rows");
  const auto spec = FeatureSpec::from_records(records);
  const auto graph = build_graph(records, encode_features(records, spec));
  const auto issues = validate(graph);
  for (const auto& d : issues) std::cerr << d.kind << ": " << d.message << '\n';
  if (!issues.empty()) fail("ConfigError", "graph failed validation");
  save_graph(run.output, graph);
  std::cout << "graph: " << graph.node_count(NodeType::Customer) << " customers, "
            << graph.node_count(NodeType::Merchant) << " merchants, "
            << graph.node_count(NodeType::Transaction) << " transactions, " << graph.edge_count()
            << " edges -> " << run.output << '\n';
  return 0;
}

int cmd_train(const RunConfig& run) {
  if (!run.seed_set) fail("ConfigError", "train requires an explicit --seed");
  if (run.input.empty() || run.model_path.empty())
    fail("ConfigError", "train requires --input and --model");
  const auto records = parse_csv(run.input, run.columns);
  const auto split = split_records(records, run.val_fraction, run.test_fraction, run.train.seed);
  if (split.train.empty()) fail("EmptyGraph", "no genuine training records after fraud purge");

  const auto spec = FeatureSpec::from_records(split.train);
  auto train_graph = prepare_graph(split.train, spec);
  auto val_graph = prepare_graph(split.validation, spec);

  auto result = train(train_graph.graph, val_graph.graph, val_graph.labels, run.train);

  const auto val_scores =
      score_transactions(result.params, run.train.model_config(), val_graph.graph);
  double threshold;
  const long val_fraud =
      std::count(val_graph.labels.begin(), val_graph.labels.end(), true);
  if (val_fraud > 0 && val_fraud < static_cast<long>(val_graph.labels.size()))
    threshold = best_threshold(val_scores, val_graph.labels).threshold;
  else
    threshold = fallback_threshold(val_scores);

  fs::create_directories(run.out_dir);
  ModelFile model;
  model.config = run.train;
  model.feature_spec = spec;
  model.params = std::move(result.params);
  model.threshold = threshold;
  model.fingerprint = {split.train.size(), fingerprint_records(split.train)};
  save_model(run.model_path, model);
  write_history_csv((fs::path(run.out_dir) / "history.csv").string(), result.history);
  if (!result.history.empty()) {
    Series tr{"train", {}}, vg{"val genuine", {}}, vf{"val fraud", {}};
    for (size_t i = 0; i < result.history.size(); ++i) {
      tr.points.emplace_back(i + 1.0, result.history[i].train_loss);
      vg.points.emplace_back(i + 1.0, result.history[i].val_genuine);
      vf.points.emplace_back(i + 1.0, result.history[i].val_fraud);
    }
    write_line_plot((fs::path(run.out_dir) / "history.svg").string(), "Training history", "epoch",
                    "loss", {tr, vg, vf});
  }
  std::cout << "trained " << result.history.size() << " epochs on " << split.train.size()
            << " genuine records; threshold " << threshold << "; model -> " << run.model_path
            << '\n';
  return 0;
}

int cmd_score(const RunConfig& run) {
  if (run.input.empty() || run.model_path.empty())
    fail("ConfigError", "score requires --input and --model");
  ModelFile model = load_model(run.model_path);
  const auto records = parse_csv(run.input, run.columns);
  fs::create_directories(run.out_dir);
  const auto report_path = (fs::path(run.out_dir) / "report.csv").string();
  if (records.empty()) {
    write_report_csv(report_path, ScoreReport{});
    std::cout << "0 transactions scored\n";
    return 0;
  }
  auto prepared = prepare_graph(records, model.feature_spec);
  const auto scores =
      score_transactions(model.params, model.config.model_config(), prepared.graph);
  const double threshold =
      std::isnan(run.threshold_override) ? model.threshold : run.threshold_override;
  const auto report = build_report(prepared.graph, scores, prepared.labels, threshold);
  write_report_csv(report_path, report);
  std::cout << report.transactions.size() << " transactions scored, threshold " << threshold
            << ", " << report.rates.tp + report.rates.fp << " flagged -> " << report_path << '\n';
  return 0;
}

int cmd_evaluate(const RunConfig& run) {
  if (run.input.empty() || run.model_path.empty())
    fail("ConfigError", "evaluate requires --input and --model");
  ModelFile model = load_model(run.model_path);
  const auto records = parse_csv(run.input, run.columns);
  const auto split = split_records(records, run.val_fraction, run.test_fraction, model.config.seed);

  auto val = prepare_graph(split.validation, model.feature_spec);
  auto test = prepare_graph(split.test, model.feature_spec);
  const auto cfg = model.config.model_config();
  const auto val_scores = score_transactions(model.params, cfg, val.graph);
  const auto test_scores = score_transactions(model.params, cfg, test.graph);

  const auto best = best_threshold(val_scores, val.labels);
  const double threshold =
      std::isnan(run.threshold_override) ? best.threshold : run.threshold_override;
  const auto report = build_report(test.graph, test_scores, test.labels, threshold);

  fs::create_directories(run.out_dir);
  write_report_csv((fs::path(run.out_dir) / "report.csv").string(), report);
  write_curves_csv((fs::path(run.out_dir) / "curves.csv").string(), report.roc, report.pr,
                   best.curve);

  Series f1s{"F1", {}};
  for (const auto& p : best.curve) f1s.points.emplace_back(p.threshold, p.f1);
  write_line_plot((fs::path(run.out_dir) / "f1_threshold.svg").string(), "F1 vs threshold",
                  "threshold", "F1", {f1s});
  Series rocs{"ROC", {}};
  for (const auto& p : report.roc.points) rocs.points.emplace_back(p.x, p.y);
  write_line_plot((fs::path(run.out_dir) / "roc.svg").string(), "ROC curve",
                  "false positive rate", "true positive rate", {rocs});
  Series prs{"PR", {}};
  for (const auto& p : report.pr.points) prs.points.emplace_back(p.x, p.y);
  write_line_plot((fs::path(run.out_dir) / "pr.svg").string(), "Precision-Recall curve", "recall",
                  "precision", {prs});
  std::vector<double> genuine_losses, fraud_losses;
  for (const auto& t : report.transactions)
    (t.label ? fraud_losses : genuine_losses).push_back(t.loss);
  write_histogram((fs::path(run.out_dir) / "loss_hist.svg").string(),
                  "Distribution of reconstruction loss", "loss",
                  {{"genuine", genuine_losses}, {"fraud", fraud_losses}});

  std::cout << "threshold " << threshold << " (fit on validation, F1 " << best.f1 << ")\n"
            << "test: PR " << report.rates.precision << ", RR " << report.rates.recall << ", F1 "
            << report.rates.f1 << ", ROC-AUC " << report.roc.auc << ", AUC-PR " << report.pr.auc
            << '\n';
  return 0;
}

int exit_code_for(const Error& error) {
  static const std::set<std::string> input_errors = {
      "MissingColumn", "ParseError",   "EmptyFile",      "EmptyInput",  "InvalidRate",
      "InsufficientData", "VersionMismatch", "ConfigError", "MissingFeature",
      "DegenerateLabels", "LengthMismatch", "DimMismatch", "NoPositives"};
  return input_errors.count(error.code()) ? 2 : 1;
}

}  // namespace fraudgraph
