#include "fraudgraph/model.hpp"

#include <algorithm>
#include <cmath>

namespace fraudgraph {

void ModelConfig::check() const {
  if (dim <= 0 || heads <= 0 || dim % heads != 0)
    fail("ShapeMismatch", "hidden dim must be a positive multiple of the head count");
  if (encoder_depth < 1) fail("ShapeMismatch", "encoder depth must be at least 1");
  if (dropout < 0.0 || dropout >= 1.0) fail("InvalidRate", "dropout must lie in [0,1)");
}

namespace {

Tensor xavier(int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  const double limit = std::sqrt(6.0 / (rows + cols));
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
  t.set_requires_grad(true);
  return t;
}

std::vector<double> matvec_left(const std::vector<double>& x, const Tensor& w) {
  // x (1 x rows) . w (rows x cols)
  std::vector<double> out(w.cols(), 0.0);
  for (int i = 0; i < w.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (int j = 0; j < w.cols(); ++j) out[j] += xi * w(i, j);
  }
  return out;
}

}  // namespace

ModelParams ModelParams::init(const std::array<int, kNodeTypeCount>& feature_dims,
                              const ModelConfig& config, Rng& rng) {
  config.check();
  const int dim = config.dim, dh = config.head_dim();
  ModelParams p;
  for (int t = 0; t < kNodeTypeCount; ++t) p.input_proj[t] = xavier(feature_dims[t], dim, rng);
  p.layers.resize(config.encoder_depth);
  for (auto& layer : p.layers) {
    for (int t = 0; t < kNodeTypeCount; ++t) {
      for (int k = 0; k < config.heads; ++k) {
        layer.linear_s[t].push_back(xavier(dim, dh, rng));
        layer.linear_d[t].push_back(xavier(dim, dh, rng));
        layer.linear_m[t].push_back(xavier(dim, dh, rng));
      }
      layer.proj[t] = xavier(dim, dim, rng);
      layer.mean_head[t] = xavier(dim, dim, rng);
      layer.logvar_head[t] = xavier(dim, dim, rng);
      // moment heads start small so early latents stay near-deterministic
      for (double& v : layer.logvar_head[t].values()) v *= 0.1;
    }
    for (int e = 0; e < kEdgeTypeCount; ++e) {
      layer.w_att[e] = xavier(dh, dh, rng);
      layer.w_mssg[e] = xavier(dh, dh, rng);
    }
  }
  for (int t = 0; t < kNodeTypeCount; ++t) {
    auto& dec = p.decoder[t];
    dec.w1 = xavier(dim, config.decoder_width, rng);
    dec.b1 = Tensor(1, config.decoder_width);
    dec.b1.set_requires_grad(true);
    dec.w2 = xavier(config.decoder_width, feature_dims[t], rng);
    dec.b2 = Tensor(1, feature_dims[t]);
    dec.b2.set_requires_grad(true);
  }
  return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named_parameters() {
  std::vector<std::pair<std::string, Tensor>> out;
  for (int t = 0; t < kNodeTypeCount; ++t)
    out.emplace_back("input_proj." + std::to_string(t), input_proj[t]);
  for (size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer." + std::to_string(l) + ".";
    auto& layer = layers[l];
    for (int t = 0; t < kNodeTypeCount; ++t) {
      const std::string tp = prefix + "t" + std::to_string(t) + ".";
      for (size_t k = 0; k < layer.linear_s[t].size(); ++k) {
        out.emplace_back(tp + "linear_s." + std::to_string(k), layer.linear_s[t][k]);
        out.emplace_back(tp + "linear_d." + std::to_string(k), layer.linear_d[t][k]);
        out.emplace_back(tp + "linear_m." + std::to_string(k), layer.linear_m[t][k]);
      }
      out.emplace_back(tp + "proj", layer.proj[t]);
      out.emplace_back(tp + "mean_head", layer.mean_head[t]);
      out.emplace_back(tp + "logvar_head", layer.logvar_head[t]);
    }
    for (int e = 0; e < kEdgeTypeCount; ++e) {
      out.emplace_back(prefix + "w_att." + std::to_string(e), layer.w_att[e]);
      out.emplace_back(prefix + "w_mssg." + std::to_string(e), layer.w_mssg[e]);
    }
  }
  for (int t = 0; t < kNodeTypeCount; ++t) {
    const std::string dp = "decoder." + std::to_string(t) + ".";
    out.emplace_back(dp + "w1", decoder[t].w1);
    out.emplace_back(dp + "b1", decoder[t].b1);
    out.emplace_back(dp + "w2", decoder[t].w2);
    out.emplace_back(dp + "b2", decoder[t].b2);
  }
  return out;
}

std::vector<Tensor> ModelParams::all_parameters() {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

ModelParams ModelParams::clone() const {
  ModelParams c;
  auto copy = [](const Tensor& t) {
    Tensor out = t.clone();
    out.set_requires_grad(t.requires_grad());
    return out;
  };
  for (int t = 0; t < kNodeTypeCount; ++t) c.input_proj[t] = copy(input_proj[t]);
  c.layers.resize(layers.size());
  for (size_t l = 0; l < layers.size(); ++l) {
    for (int t = 0; t < kNodeTypeCount; ++t) {
      for (const auto& m : layers[l].linear_s[t]) c.layers[l].linear_s[t].push_back(copy(m));
      for (const auto& m : layers[l].linear_d[t]) c.layers[l].linear_d[t].push_back(copy(m));
      for (const auto& m : layers[l].linear_m[t]) c.layers[l].linear_m[t].push_back(copy(m));
      c.layers[l].proj[t] = copy(layers[l].proj[t]);
      c.layers[l].mean_head[t] = copy(layers[l].mean_head[t]);
      c.layers[l].logvar_head[t] = copy(layers[l].logvar_head[t]);
    }
    for (int e = 0; e < kEdgeTypeCount; ++e) {
      c.layers[l].w_att[e] = copy(layers[l].w_att[e]);
      c.layers[l].w_mssg[e] = copy(layers[l].w_mssg[e]);
    }
  }
  for (int t = 0; t < kNodeTypeCount; ++t) {
    c.decoder[t].w1 = copy(decoder[t].w1);
    c.decoder[t].b1 = copy(decoder[t].b1);
    c.decoder[t].w2 = copy(decoder[t].w2);
    c.decoder[t].b2 = copy(decoder[t].b2);
  }
  return c;
}

double attention_score(const EncoderLayerParams& layer, int head, EdgeType edge,
                       const std::vector<double>& h_src, const std::vector<double>& h_dst,
                       const ModelConfig& config) {
  const int st = static_cast<int>(edge_source_type(edge));
  const int dt = static_cast<int>(edge_dest_type(edge));
  const auto a = matvec_left(h_src, layer.linear_s[st][head]);
  const auto b = matvec_left(h_dst, layer.linear_d[dt][head]);
  const auto aw = matvec_left(a, layer.w_att[static_cast<int>(edge)]);
  double s = 0.0;
  for (size_t i = 0; i < aw.size(); ++i) s += aw[i] * b[i];
  return s / std::sqrt(static_cast<double>(config.head_dim()));
}

std::vector<double> attention_weights(const std::vector<double>& scores) {
  std::vector<double> w(scores.size());
  if (scores.empty()) return w;
  const double mx = *std::max_element(scores.begin(), scores.end());
  double denom = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) denom += (w[i] = std::exp(scores[i] - mx));
  for (double& x : w) x /= denom;
  return w;
}

std::vector<double> message_vector(const EncoderLayerParams& layer, int head, EdgeType edge,
                                   const std::vector<double>& h_src, const ModelConfig& config) {
  (void)config;
  const int st = static_cast<int>(edge_source_type(edge));
  const auto m = matvec_left(h_src, layer.linear_m[st][head]);
  return matvec_left(m, layer.w_mssg[static_cast<int>(edge)]);
}

std::vector<double> aggregate_node(
    const EncoderLayerParams& layer,
    const std::vector<std::pair<std::vector<double>, EdgeType>>& neighbors,
    const std::vector<double>& h_dst, const ModelConfig& config) {
  const int dh = config.head_dim();
  std::vector<double> out(static_cast<size_t>(config.dim), 0.0);
  if (neighbors.empty()) return out;
  for (int k = 0; k < config.heads; ++k) {
    std::vector<double> scores;
    scores.reserve(neighbors.size());
    for (const auto& [h_src, edge] : neighbors)
      scores.push_back(attention_score(layer, k, edge, h_src, h_dst, config));
    const auto weights = attention_weights(scores);
    for (size_t i = 0; i < neighbors.size(); ++i) {
      const auto msg = message_vector(layer, k, neighbors[i].second, neighbors[i].first, config);
      for (int j = 0; j < dh; ++j) out[static_cast<size_t>(k) * dh + j] += weights[i] * msg[j];
    }
  }
  return out;
}

std::array<Tensor, kNodeTypeCount> input_projection(ModelParams& params, const HeteroGraph& graph) {
  std::array<Tensor, kNodeTypeCount> h0;
  for (int t = 0; t < kNodeTypeCount; ++t) {
    if (graph.features[t].cols() != params.input_proj[t].rows())
      fail("DimMismatch", std::string(node_type_name(static_cast<NodeType>(t))) +
                              " feature dim " + std::to_string(graph.features[t].cols()) +
                              " vs model " + std::to_string(params.input_proj[t].rows()));
    h0[t] = matmul(graph.features[t], params.input_proj[t]);
  }
  return h0;
}

Tensor reparameterize_with_noise(const Tensor& mu, const Tensor& logvar, const Tensor& noise) {
  return add(mu, mul(noise, exp(scale(logvar, 0.5))));
}

Tensor reparameterize(const Tensor& mu, const Tensor& logvar, Rng& rng) {
  Tensor noise(mu.rows(), mu.cols());
  for (double& v : noise.values()) v = rng.normal();
  return reparameterize_with_noise(mu, logvar, noise);
}

LatentState encoder_layer(const EncoderLayerParams& layer, const HeteroGraph& graph,
                          const std::array<Tensor, kNodeTypeCount>& prev,
                          const std::array<Tensor, kNodeTypeCount>& h0,
                          const ModelConfig& config, bool training, Rng& rng) {
  const int dh = config.head_dim();
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  // per-type per-head projections of the previous embeddings
  std::array<std::vector<Tensor>, kNodeTypeCount> proj_s, proj_d, proj_m;
  for (int t = 0; t < kNodeTypeCount; ++t) {
    if (graph.node_count(static_cast<NodeType>(t)) == 0) continue;
    for (int k = 0; k < config.heads; ++k) {
      proj_s[t].push_back(matmul(prev[t], layer.linear_s[t][k]));
      proj_d[t].push_back(matmul(prev[t], layer.linear_d[t][k]));
      proj_m[t].push_back(matmul(prev[t], layer.linear_m[t][k]));
    }
  }

  // edge index vectors grouped by destination type
  struct Group {
    EdgeType edge;
    std::vector<int> src, dst;
  };
  std::array<std::vector<Group>, kNodeTypeCount> groups;
  for (int e = 0; e < kEdgeTypeCount; ++e) {
    const auto type = static_cast<EdgeType>(e);
    if (graph.edges[e].empty()) continue;
    Group g;
    g.edge = type;
    g.src.reserve(graph.edges[e].size());
    g.dst.reserve(graph.edges[e].size());
    for (const auto& [src, dst] : graph.edges[e]) {
      g.src.push_back(src);
      g.dst.push_back(dst);
    }
    groups[static_cast<int>(edge_dest_type(type))].push_back(std::move(g));
  }

  LatentState state;
  for (int t = 0; t < kNodeTypeCount; ++t) {
    const int n = graph.node_count(static_cast<NodeType>(t));
    if (n == 0) {
      state.mu[t] = state.logvar[t] = state.h[t] = Tensor(0, config.dim);
      continue;
    }
    Tensor agg;
    if (!groups[t].empty()) {
      std::vector<int> segment;
      for (const auto& g : groups[t]) segment.insert(segment.end(), g.dst.begin(), g.dst.end());
      for (int k = 0; k < config.heads; ++k) {
        std::vector<Tensor> score_parts, msg_parts;
        for (const auto& g : groups[t]) {
          const int st = static_cast<int>(edge_source_type(g.edge));
          const int e = static_cast<int>(g.edge);
          Tensor src_s = gather_rows(proj_s[st][k], g.src);
          Tensor dst_d = gather_rows(proj_d[t][k], g.dst);
          score_parts.push_back(
              scale(rows_dot(matmul(src_s, layer.w_att[e]), dst_d), inv_sqrt_dh));
          msg_parts.push_back(matmul(gather_rows(proj_m[st][k], g.src), layer.w_mssg[e]));
        }
        Tensor scores = score_parts.size() == 1 ? score_parts[0] : concat_rows(score_parts);
        Tensor msgs = msg_parts.size() == 1 ? msg_parts[0] : concat_rows(msg_parts);
        Tensor weights = segment_softmax(scores, segment, n);
        Tensor head_agg = scatter_add_rows(mul_col(msgs, weights), segment, n);
        agg = k == 0 ? head_agg : concat_cols(agg, head_agg);
      }
    } else {
      agg = Tensor(n, config.dim);  // no incoming edges: zero aggregate
    }
    Tensor z = add(matmul(agg, layer.proj[t]), h0[t]);
    if (training) z = dropout(z, config.dropout, true, rng);
    state.mu[t] = matmul(z, layer.mean_head[t]);
    state.logvar[t] = matmul(z, layer.logvar_head[t]);
    state.h[t] = training ? reparameterize(state.mu[t], state.logvar[t], rng) : state.mu[t];
  }
  return state;
}

LatentState encode(ModelParams& params, const HeteroGraph& graph, const ModelConfig& config,
                   bool training, Rng& rng) {
  config.check();
  if (static_cast<int>(params.layers.size()) != config.encoder_depth)
    fail("DimMismatch", "encoder depth does not match parameter layer count");
  const auto h0 = input_projection(params, graph);
  std::array<Tensor, kNodeTypeCount> prev = h0;
  LatentState state;
  for (auto& layer : params.layers) {
    state = encoder_layer(layer, graph, prev, h0, config, training, rng);
    prev = state.h;
  }
  return state;
}

std::array<Tensor, kNodeTypeCount> decode(ModelParams& params,
                                          const std::array<Tensor, kNodeTypeCount>& latent) {
  std::array<Tensor, kNodeTypeCount> out;
  for (int t = 0; t < kNodeTypeCount; ++t) {
    if (!latent[t].defined() || latent[t].rows() == 0) {
      out[t] = Tensor(0, params.decoder[t].w2.cols());
      continue;
    }
    if (latent[t].cols() != params.decoder[t].w1.rows())
      fail("ShapeMismatch", "decoder input dim");
    auto& dec = params.decoder[t];
    Tensor hidden = relu(add_rowvec(matmul(latent[t], dec.w1), dec.b1));
    out[t] = add_rowvec(matmul(hidden, dec.w2), dec.b2);
  }
  return out;
}

Tensor reconstruction_loss(const HeteroGraph& graph,
                           const std::array<Tensor, kNodeTypeCount>& reconstructed,
                           const LatentState& latent, double kl_beta) {
  Tensor total;
  std::int64_t n_nodes = 0;
  for (int t = 0; t < kNodeTypeCount; ++t) {
    const int n = graph.node_count(static_cast<NodeType>(t));
    if (n == 0) continue;
    if (!reconstructed[t].defined() || reconstructed[t].rows() != n ||
        reconstructed[t].cols() != graph.features[t].cols())
      fail("CoverageGap", std::string(node_type_name(static_cast<NodeType>(t))) +
                              " reconstruction does not cover the graph");
    n_nodes += n;
    Tensor diff = sub(reconstructed[t], graph.features[t]);
    Tensor per_node = scale(rows_dot(diff, diff), 1.0 / graph.features[t].cols());
    Tensor type_sum = sum(per_node);
    total = total.defined() ? add(total, type_sum) : type_sum;
  }
  if (!total.defined()) fail("CoverageGap", "empty graph");
  Tensor loss = scale(total, 1.0 / static_cast<double>(n_nodes));
  if (kl_beta > 0.0) {
    Tensor kl_total;
    for (int t = 0; t < kNodeTypeCount; ++t) {
      if (!latent.mu[t].defined() || latent.mu[t].rows() == 0) continue;
      const Tensor& mu = latent.mu[t];
      const Tensor& lv = latent.logvar[t];
      Tensor ones(mu.rows(), mu.cols(), 1.0);
      // -0.5 * sum(1 + logvar - mu^2 - exp(logvar))
      Tensor inner = sub(add(ones, lv), add(mul(mu, mu), exp(lv)));
      Tensor kl = scale(sum(inner), -0.5);
      kl_total = kl_total.defined() ? add(kl_total, kl) : kl;
    }
    if (kl_total.defined())
      loss = add(loss, scale(kl_total, kl_beta / static_cast<double>(n_nodes)));
  }
  return loss;
}

std::vector<double> per_node_losses(const HeteroGraph& graph,
                                    const std::array<Tensor, kNodeTypeCount>& reconstructed,
                                    NodeType type) {
  const int t = static_cast<int>(type);
  const int n = graph.node_count(type);
  const int cols = graph.features[t].cols();
  if (!reconstructed[t].defined() || reconstructed[t].rows() != n || reconstructed[t].cols() != cols)
    fail("CoverageGap", "reconstruction does not cover the requested node type");
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols; ++j) {
      const double d = reconstructed[t](i, j) - graph.features[t](i, j);
      s += d * d;
    }
    out[i] = s / cols;
  }
  return out;
}

}  // namespace fraudgraph
