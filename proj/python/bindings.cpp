#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fraudgraph/pipeline.hpp"

namespace py = pybind11;
using namespace fraudgraph;

namespace {

RunConfig make_run(const std::string& input, const std::string& model, const std::string& out_dir,
                   std::uint64_t seed, bool seed_set) {
  RunConfig run;
  run.input = input;
  run.model_path = model;
  run.out_dir = out_dir;
  run.train.seed = seed;
  run.seed_set = seed_set;
  return run;
}

py::dict rates_dict(const ConfusionRates& r) {
  py::dict d;
  d["tp"] = r.tp;
  d["fp"] = r.fp;
  d["tn"] = r.tn;
  d["fn"] = r.fn;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "graph auto-encoder fraud detector";

  py::register_exception<Error>(m, "FraudGraphError");

  m.def(
      "generate",
      [](const std::string& output, int n_customers, int n_merchants, int n_days,
         double fraud_rate, std::uint64_t seed) {
        RunConfig run = make_run("", "", ".", seed, true);
        run.output = output;
        run.n_customers = n_customers;
        run.n_merchants = n_merchants;
        run.n_days = n_days;
        run.fraud_rate = fraud_rate;
        cmd_generate(run);
        return static_cast<std::size_t>(parse_csv(output).size());
      },
      py::arg("output"), py::arg("n_customers") = 10, py::arg("n_merchants") = 8,
      py::arg("n_days") = 30, py::arg("fraud_rate") = 0.005, py::arg("seed") = 1,
      "Write a synthetic labeled transaction CSV; returns the record count.");

  m.def(
      "train",
      [](const std::string& input, const std::string& model, const std::string& out_dir,
         std::uint64_t seed, int dim, int heads, int encoder_depth, int decoder_width,
         double dropout, double learning_rate, double weight_decay, int epochs, int patience) {
        RunConfig run = make_run(input, model, out_dir, seed, true);
        run.train.dim = dim;
        run.train.heads = heads;
        run.train.encoder_depth = encoder_depth;
        run.train.decoder_width = decoder_width;
        run.train.dropout = dropout;
        run.train.learning_rate = learning_rate;
        run.train.weight_decay = weight_decay;
        run.train.epochs = epochs;
        run.train.patience = patience;
        cmd_train(run);
        return load_model(model).threshold;
      },
      py::arg("input"), py::arg("model"), py::arg("out_dir") = ".", py::arg("seed") = 1,
      py::arg("dim") = 64, py::arg("heads") = 16, py::arg("encoder_depth") = 2,
      py::arg("decoder_width") = 64, py::arg("dropout") = 0.4, py::arg("learning_rate") = 1e-3,
      py::arg("weight_decay") = 0.01, py::arg("epochs") = 100, py::arg("patience") = 20,
      "Train on the genuine split of a labeled CSV; returns the fitted threshold.");

  m.def(
      "score",
      [](const std::string& input, const std::string& model) {
        ModelFile mf = load_model(model);
        const auto records = parse_csv(input);
        if (records.empty()) return py::list();
        auto graph = build_graph(records, encode_features(records, mf.feature_spec));
        auto scores = score_transactions(mf.params, mf.config.model_config(), graph);
        auto report = build_report(graph, scores, std::vector<bool>(scores.size(), false),
                                   mf.threshold);
        py::list out;
        for (const auto& t : report.transactions) {
          py::dict d;
          d["trans_id"] = t.trans_id;
          d["loss"] = t.loss;
          d["verdict"] = t.verdict ? "Fraud" : "NonFraud";
          out.append(d);
        }
        return out;
      },
      py::arg("input"), py::arg("model"),
      "Score every transaction in a CSV against a trained model.");

  m.def(
      "evaluate",
      [](const std::string& input, const std::string& model, const std::string& out_dir) {
        RunConfig run = make_run(input, model, out_dir, 0, false);
        cmd_evaluate(run);
        // recompute the headline numbers for the caller
        ModelFile mf = load_model(model);
        const auto records = parse_csv(input);
        const auto split = split_records(records, run.val_fraction, run.test_fraction,
                                         mf.config.seed);
        auto graph = build_graph(split.test, encode_features(split.test, mf.feature_spec));
        auto scores = score_transactions(mf.params, mf.config.model_config(), graph);
        std::unordered_map<std::string, bool> by_id;
        for (const auto& r : split.test) by_id[r.trans_id] = r.is_fraud;
        std::vector<bool> labels;
        for (const auto& id : graph.keys[static_cast<int>(NodeType::Transaction)])
          labels.push_back(by_id.at(id));
        py::dict out;
        out["roc_auc"] = roc_curve_auc(scores, labels).auc;
        out["auc_pr"] = pr_curve_auc(scores, labels).auc;
        out["rates"] = rates_dict(
            confusion_and_rates(classify(scores, mf.threshold), labels));
        return out;
      },
      py::arg("input"), py::arg("model"), py::arg("out_dir") = ".",
      "Evaluate a trained model on the test split; writes reports and plots to out_dir.");

  m.def(
      "classify",
      [](const std::vector<double>& scores, double threshold) {
        return classify(scores, threshold);
      },
      py::arg("scores"), py::arg("threshold"));

  m.def(
      "confusion",
      [](const std::vector<bool>& verdicts, const std::vector<bool>& labels) {
        return rates_dict(confusion_and_rates(verdicts, labels));
      },
      py::arg("verdicts"), py::arg("labels"));

  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        return roc_curve_auc(scores, labels).auc;
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "average_precision",
      [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        return pr_curve_auc(scores, labels).auc;
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "best_threshold",
      [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        auto best = best_threshold(scores, labels);
        return py::make_tuple(best.threshold, best.f1);
      },
      py::arg("scores"), py::arg("labels"),
      "F1-maximizing threshold; returns (threshold, f1).");
}
