#pragma once

#include <cmath>
#include <string>

#include "fraudgraph/dataio.hpp"
#include "fraudgraph/detector.hpp"
#include "fraudgraph/modelfile.hpp"

namespace fraudgraph {

// Resolved settings for one command invocation. Populated from an optional
// JSON config file, then overridden by flags; unknown config keys are
// rejected.
struct RunConfig {
  std::string input;
  std::string output;
  std::string model_path;
  std::string out_dir = ".";
  ColumnMap columns;
  TrainConfig train;
  double scale = 1.0;
  int n_customers = -1;  // -1: derived from scale
  int n_merchants = -1;
  int n_days = -1;
  double fraud_rate = GeneratorConfig{}.fraud_rate;
  double val_fraction = 0.15;
  double test_fraction = 0.2;
  double threshold_override = std::nan("");
  bool seed_set = false;

  GeneratorConfig generator() const;
};

void apply_config_file(RunConfig& run, const std::string& path);

int cmd_generate(const RunConfig& run);
int cmd_build_graph(const RunConfig& run);
int cmd_train(const RunConfig& run);
int cmd_score(const RunConfig& run);
int cmd_evaluate(const RunConfig& run);

// exit code for a thrown Error: 2 for input/config problems, 1 otherwise
int exit_code_for(const Error& error);

}  // namespace fraudgraph
