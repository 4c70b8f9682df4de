#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fraudgraph/pipeline.hpp"

using fraudgraph::RunConfig;

namespace {

void add_column_flags(CLI::App* cmd, RunConfig& run) {
  cmd->add_option("--col-id", run.columns.trans_id, "transaction id column name");
  cmd->add_option("--col-time", run.columns.timestamp, "timestamp column name");
  cmd->add_option("--col-cc", run.columns.cc_num, "card number column name");
  cmd->add_option("--col-merchant", run.columns.merchant, "merchant column name");
  cmd->add_option("--col-category", run.columns.category, "category column name");
  cmd->add_option("--col-amount", run.columns.amount, "amount column name");
  cmd->add_option("--col-fraud", run.columns.is_fraud, "fraud label column name");
}

void add_train_flags(CLI::App* cmd, RunConfig& run) {
  cmd->add_option("--epochs", run.train.epochs, "training epochs");
  cmd->add_option("--dim", run.train.dim, "hidden dimension");
  cmd->add_option("--heads", run.train.heads, "attention heads");
  cmd->add_option("--depth", run.train.encoder_depth, "encoder layers");
  cmd->add_option("--decoder-width", run.train.decoder_width, "decoder hidden width");
  cmd->add_option("--dropout", run.train.dropout, "dropout rate");
  cmd->add_option("--lr", run.train.learning_rate, "learning rate");
  cmd->add_option("--weight-decay", run.train.weight_decay, "decoupled weight decay");
  cmd->add_option("--kl-beta", run.train.kl_beta, "divergence weight");
  cmd->add_option("--patience", run.train.patience, "early-stop patience in epochs");
}

void add_split_flags(CLI::App* cmd, RunConfig& run) {
  cmd->add_option("--val-frac", run.val_fraction, "validation fraction");
  cmd->add_option("--test-frac", run.test_fraction, "test fraction");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous-graph fraud detector"};
  app.require_subcommand(1);

  RunConfig run;
  std::string config_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON config file (flags take precedence)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--out-dir", run.out_dir, "output directory");

  auto* generate = app.add_subcommand("generate", "write a synthetic transaction CSV");
  generate->add_option("--output,-o", run.output, "output CSV path");
  generate->add_option("--scale", run.scale, "dataset scale factor (1.0 = full reference size)");
  generate->add_option("--customers", run.n_customers, "customer count (overrides --scale)");
  generate->add_option("--merchants", run.n_merchants, "merchant count (overrides --scale)");
  generate->add_option("--days", run.n_days, "simulated days");
  generate->add_option("--fraud-rate", run.fraud_rate, "overall fraud label rate");
  add_column_flags(generate, run);

  auto* build = app.add_subcommand("build-graph", "build and save the transaction graph");
  build->add_option("--input,-i", run.input, "input CSV path");
  build->add_option("--output,-o", run.output, "output graph container path");
  add_column_flags(build, run);

  auto* train_cmd = app.add_subcommand("train", "train a model on genuine transactions");
  train_cmd->add_option("--input,-i", run.input, "input CSV path");
  train_cmd->add_option("--model,-m", run.model_path, "model file to write");
  add_train_flags(train_cmd, run);
  add_split_flags(train_cmd, run);
  add_column_flags(train_cmd, run);

  auto* score = app.add_subcommand("score", "score transactions with a trained model");
  score->add_option("--input,-i", run.input, "input CSV path");
  score->add_option("--model,-m", run.model_path, "model file to load");
  score->add_option("--threshold", run.threshold_override, "override the stored threshold");
  add_column_flags(score, run);

  auto* evaluate = app.add_subcommand("evaluate", "fit threshold on validation, report test metrics");
  evaluate->add_option("--input,-i", run.input, "labeled input CSV path");
  evaluate->add_option("--model,-m", run.model_path, "model file to load");
  evaluate->add_option("--threshold", run.threshold_override, "override the fitted threshold");
  add_split_flags(evaluate, run);
  add_column_flags(evaluate, run);

  CLI11_PARSE(app, argc, argv);

  try {
    // precedence: defaults < config file < flags; reparse applies flags on top
    if (!config_path.empty()) {
      RunConfig from_file;
      fraudgraph::apply_config_file(from_file, config_path);
      from_file.out_dir = run.out_dir == "." ? from_file.out_dir : run.out_dir;
      std::swap(run, from_file);
      app.clear();
      CLI11_PARSE(app, argc, argv);
    }
    if (seed_opt->count() > 0) {
      run.train.seed = seed;
      run.seed_set = true;
    }
    if (generate->parsed()) return fraudgraph::cmd_generate(run);
    if (build->parsed()) return fraudgraph::cmd_build_graph(run);
    if (train_cmd->parsed()) return fraudgraph::cmd_train(run);
    if (score->parsed()) return fraudgraph::cmd_score(run);
    if (evaluate->parsed()) return fraudgraph::cmd_evaluate(run);
  } catch (const fraudgraph::Error& e) {
    std::cerr << "E:" << e.what() << '\n';
    return fraudgraph::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "E:Internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
