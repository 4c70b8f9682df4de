#pragma once

#include <cstdint>
#include <string>

#include "fraudgraph/dataio.hpp"
#include "fraudgraph/detector.hpp"
#include "fraudgraph/model.hpp"

namespace fraudgraph {

struct DataFingerprint {
  std::uint64_t record_count = 0;
  std::uint64_t checksum = 0;
};

// Versioned model container: JSON header (config, feature spec, threshold,
// fingerprint, matrix manifest) followed by raw little-endian f64 blocks.
struct ModelFile {
  TrainConfig config;
  FeatureSpec feature_spec;
  ModelParams params;
  double threshold = 0.0;
  DataFingerprint fingerprint;
};

std::uint64_t fingerprint_records(const std::vector<TransactionRecord>& records);

void save_model(const std::string& path, ModelFile& model);
ModelFile load_model(const std::string& path);

}  // namespace fraudgraph
