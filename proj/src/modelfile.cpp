#include "fraudgraph/modelfile.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace fraudgraph {

namespace {

constexpr char kModelMagic[8] = {'F', 'G', 'M', 'O', 'D', 'L', '0', '1'};
constexpr int kVersion = 1;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"dim", c.dim},
          {"heads", c.heads},
          {"encoder_depth", c.encoder_depth},
          {"decoder_width", c.decoder_width},
          {"dropout", c.dropout},
          {"weight_decay", c.weight_decay},
          {"learning_rate", c.learning_rate},
          {"kl_beta", c.kl_beta},
          {"epochs", c.epochs},
          {"patience", c.patience},
          {"seed", c.seed}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.dim = j.at("dim");
  c.heads = j.at("heads");
  c.encoder_depth = j.at("encoder_depth");
  c.decoder_width = j.at("decoder_width");
  c.dropout = j.at("dropout");
  c.weight_decay = j.at("weight_decay");
  c.learning_rate = j.at("learning_rate");
  c.kl_beta = j.at("kl_beta");
  c.epochs = j.at("epochs");
  c.patience = j.at("patience");
  c.seed = j.at("seed");
  return c;
}

}  // namespace

std::uint64_t fingerprint_records(const std::vector<TransactionRecord>& records) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& r : records) {
    h = fnv1a(h, r.trans_id.data(), r.trans_id.size());
    h = fnv1a(h, &r.timestamp, sizeof(r.timestamp));
    h = fnv1a(h, &r.amount, sizeof(r.amount));
    const char f = r.is_fraud ? 1 : 0;
    h = fnv1a(h, &f, 1);
  }
  return h;
}

void save_model(const std::string& path, ModelFile& model) {
  auto named = model.params.named_parameters();
  nlohmann::json header;
  header["version"] = kVersion;
  header["train_config"] = config_to_json(model.config);
  header["feature_spec"] = {{"category_vocabulary", model.feature_spec.category_vocabulary},
                            {"feature_dim_transaction", model.feature_spec.feature_dim_transaction},
                            {"feature_dim_customer", model.feature_spec.feature_dim_customer},
                            {"feature_dim_merchant", model.feature_spec.feature_dim_merchant}};
  header["threshold"] = model.threshold;
  header["fingerprint"] = {{"record_count", model.fingerprint.record_count},
                           {"checksum", model.fingerprint.checksum}};
  nlohmann::json manifest = nlohmann::json::array();
  for (auto& [name, tensor] : named)
    manifest.push_back({{"name", name}, {"rows", tensor.rows()}, {"cols", tensor.cols()}});
  header["matrices"] = manifest;
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot write " + path);
  out.write(kModelMagic, sizeof(kModelMagic));
  const std::uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (auto& [name, tensor] : named)
    out.write(reinterpret_cast<const char*>(tensor.values().data()),
              static_cast<std::streamsize>(tensor.values().size() * sizeof(double)));
  if (!out) fail("IoError", "write failed: " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("IoError", "cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    fail("VersionMismatch", path + " is not a model file");
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) fail("IoError", "truncated model header in " + path);
  const auto header = nlohmann::json::parse(htext, nullptr, false);
  if (header.is_discarded() || header.value("version", 0) != kVersion)
    fail("VersionMismatch", "unsupported model file version in " + path);

  ModelFile model;
  model.config = config_from_json(header.at("train_config"));
  const auto& fs = header.at("feature_spec");
  model.feature_spec.category_vocabulary =
      fs.at("category_vocabulary").get<std::vector<std::string>>();
  model.feature_spec.feature_dim_transaction = fs.at("feature_dim_transaction");
  model.feature_spec.feature_dim_customer = fs.at("feature_dim_customer");
  model.feature_spec.feature_dim_merchant = fs.at("feature_dim_merchant");
  model.threshold = header.at("threshold");
  model.fingerprint.record_count = header.at("fingerprint").at("record_count");
  model.fingerprint.checksum = header.at("fingerprint").at("checksum");

  const std::array<int, kNodeTypeCount> dims = {model.feature_spec.feature_dim_customer,
                                                model.feature_spec.feature_dim_merchant,
                                                model.feature_spec.feature_dim_transaction};
  Rng rng(0);
  model.params = ModelParams::init(dims, model.config.model_config(), rng);
  auto named = model.params.named_parameters();
  const auto& manifest = header.at("matrices");
  if (manifest.size() != named.size())
    fail("VersionMismatch", "matrix manifest does not match model structure");
  for (size_t i = 0; i < named.size(); ++i) {
    const auto& entry = manifest.at(i);
    auto& [name, tensor] = named[i];
    if (entry.at("name") != name || entry.at("rows") != tensor.rows() ||
        entry.at("cols") != tensor.cols())
      fail("VersionMismatch", "matrix '" + std::string(entry.at("name")) +
                                  "' does not match the expected model structure");
    in.read(reinterpret_cast<char*>(tensor.values().data()),
            static_cast<std::streamsize>(tensor.values().size() * sizeof(double)));
  }
  if (!in) fail("IoError", "truncated model data in " + path);
  return model;
}

}  // namespace fraudgraph
