#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fraudgraph/model.hpp"
#include "helpers.hpp"

using namespace fraudgraph;

namespace {

Tensor identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor random_matrix(int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// A fully-populated single layer with random weights, small dims.
EncoderLayerParams random_layer(const ModelConfig& cfg, Rng& rng) {
  EncoderLayerParams layer;
  const int dh = cfg.head_dim();
  for (int t = 0; t < kNodeTypeCount; ++t) {
    for (int k = 0; k < cfg.heads; ++k) {
      layer.linear_s[t].push_back(random_matrix(cfg.dim, dh, rng));
      layer.linear_d[t].push_back(random_matrix(cfg.dim, dh, rng));
      layer.linear_m[t].push_back(random_matrix(cfg.dim, dh, rng));
    }
    layer.proj[t] = random_matrix(cfg.dim, cfg.dim, rng);
    layer.mean_head[t] = random_matrix(cfg.dim, cfg.dim, rng);
    layer.logvar_head[t] = random_matrix(cfg.dim, cfg.dim, rng);
  }
  for (int e = 0; e < kEdgeTypeCount; ++e) {
    layer.w_att[e] = random_matrix(dh, dh, rng);
    layer.w_mssg[e] = random_matrix(dh, dh, rng);
  }
  return layer;
}

std::vector<double> matvec(const std::vector<double>& x, const Tensor& w) {
  std::vector<double> out(w.cols(), 0.0);
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) out[j] += x[i] * w(i, j);
  return out;
}

std::vector<double> tensor_row(const Tensor& t, int r) {
  std::vector<double> out(t.cols());
  for (int c = 0; c < t.cols(); ++c) out[c] = t(r, c);
  return out;
}

std::vector<TransactionRecord> small_records() {
  Rng rng(77);
  GeneratorConfig gc;
  gc.n_customers = 4;
  gc.n_merchants = 5;
  gc.n_days = 10;
  gc.fraud_rate = 0.0;
  gc.seed = 77;
  return generate_synthetic(gc);
}

HeteroGraph small_graph() {
  auto records = small_records();
  auto spec = FeatureSpec::from_records(records);
  return build_graph(records, encode_features(records, spec));
}

// single customer node with no edges at all
HeteroGraph isolated_graph(int feat_dim) {
  HeteroGraph g;
  g.keys[0] = {"c0"};
  Tensor f(1, feat_dim);
  for (int j = 0; j < feat_dim; ++j) f.at(0, j) = 0.25 * (j + 1);
  g.features[0] = f;
  g.features[1] = Tensor(0, feat_dim);
  g.features[2] = Tensor(0, feat_dim);
  g.in_adj[0].resize(1);
  return g;
}

}  // namespace

TEST_CASE("attention score closed forms") {
  ModelConfig cfg;
  cfg.dim = 4;
  cfg.heads = 1;
  Rng rng(1);
  auto layer = random_layer(cfg, rng);

  SUBCASE("zero embeddings give zero score") {
    std::vector<double> z(4, 0.0);
    for (int e = 0; e < kEdgeTypeCount; ++e)
      CHECK(attention_score(layer, 0, static_cast<EdgeType>(e), z, z, cfg) == 0.0);
  }

  SUBCASE("identity projections on a unit vector") {
    // with every matrix the identity the bilinear form is e1.e1 = 1,
    // scaled by 1/sqrt(4)
    for (int t = 0; t < kNodeTypeCount; ++t) {
      layer.linear_s[t][0] = identity(4);
      layer.linear_d[t][0] = identity(4);
    }
    layer.w_att[0] = identity(4);
    std::vector<double> e1 = {1.0, 0.0, 0.0, 0.0};
    CHECK(attention_score(layer, 0, EdgeType::CustomerToTxn, e1, e1, cfg) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("score is linear in the source embedding") {
    std::vector<double> h_src = {0.3, -1.2, 0.5, 2.0};
    std::vector<double> h_dst = {1.0, 0.4, -0.7, 0.1};
    std::vector<double> doubled = h_src;
    for (double& v : doubled) v *= 2.0;
    const double s = attention_score(layer, 0, EdgeType::TxnToMerchant, h_src, h_dst, cfg);
    const double s2 = attention_score(layer, 0, EdgeType::TxnToMerchant, doubled, h_dst, cfg);
    CHECK(s2 == doctest::Approx(2.0 * s).epsilon(1e-12));
  }
}

TEST_CASE("attention weights are a softmax over neighbors") {
  CHECK(attention_weights({3.7}) == std::vector<double>{1.0});

  auto equal = attention_weights({1.25, 1.25});
  CHECK(equal[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(equal[1] == doctest::Approx(0.5).epsilon(1e-12));

  auto skew = attention_weights({0.0, std::log(3.0)});
  CHECK(skew[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(skew[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("message vectors") {
  ModelConfig cfg;
  cfg.dim = 4;
  cfg.heads = 1;
  Rng rng(2);
  auto layer = random_layer(cfg, rng);

  SUBCASE("zero embedding gives zero message") {
    std::vector<double> z(4, 0.0);
    auto msg = message_vector(layer, 0, EdgeType::CustomerToTxn, z, cfg);
    for (double v : msg) CHECK(v == 0.0);
  }

  SUBCASE("identity projection with doubled mixing matrix") {
    layer.linear_m[0][0] = identity(4);
    Tensor two_i = identity(4);
    for (double& v : two_i.values()) v *= 2.0;
    layer.w_mssg[0] = two_i;
    std::vector<double> h = {0.5, -1.0, 2.0, 0.0};
    auto msg = message_vector(layer, 0, EdgeType::CustomerToTxn, h, cfg);
    REQUIRE(msg.size() == 4);
    for (int j = 0; j < 4; ++j) CHECK(msg[j] == doctest::Approx(2.0 * h[j]).epsilon(1e-12));
  }

  SUBCASE("random case matches a direct recomputation") {
    std::vector<double> h = {0.9, -0.2, 0.4, 1.1};
    auto expected = matvec(matvec(h, layer.linear_m[2][0]), layer.w_mssg[1]);
    auto msg = message_vector(layer, 0, EdgeType::TxnToMerchant, h, cfg);
    REQUIRE(msg.size() == expected.size());
    for (size_t j = 0; j < msg.size(); ++j)
      CHECK(msg[j] == doctest::Approx(expected[j]).epsilon(1e-12));
  }
}

TEST_CASE("attention-weighted aggregation") {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.heads = 2;
  Rng rng(3);
  auto layer = random_layer(cfg, rng);
  std::vector<double> h_dst(8);
  for (double& v : h_dst) v = rng.uniform(-1.0, 1.0);

  SUBCASE("single neighbor passes its message through unchanged") {
    std::vector<double> h_src(8);
    for (double& v : h_src) v = rng.uniform(-1.0, 1.0);
    auto agg = aggregate_node(layer, {{h_src, EdgeType::CustomerToTxn}}, h_dst, cfg);
    const int dh = cfg.head_dim();
    for (int k = 0; k < cfg.heads; ++k) {
      auto msg = message_vector(layer, k, EdgeType::CustomerToTxn, h_src, cfg);
      for (int j = 0; j < dh; ++j) CHECK(agg[k * dh + j] == doctest::Approx(msg[j]).epsilon(1e-12));
    }
  }

  SUBCASE("opposite messages at equal weights cancel") {
    // zero out the source projections so every score is 0 and weights are equal
    for (int t = 0; t < kNodeTypeCount; ++t)
      for (int k = 0; k < cfg.heads; ++k) layer.linear_s[t][k] = Tensor(8, cfg.head_dim());
    std::vector<double> h(8), neg(8);
    for (int i = 0; i < 8; ++i) {
      h[i] = rng.uniform(-1.0, 1.0);
      neg[i] = -h[i];
    }
    auto agg = aggregate_node(
        layer, {{h, EdgeType::CustomerToTxn}, {neg, EdgeType::CustomerToTxn}}, h_dst, cfg);
    for (double v : agg) CHECK(std::abs(v) < 1e-12);
  }

  SUBCASE("three random neighbors match a brute-force oracle") {
    std::vector<std::pair<std::vector<double>, EdgeType>> neighbors;
    const EdgeType kinds[3] = {EdgeType::CustomerToTxn, EdgeType::MerchantToTxn,
                               EdgeType::CustomerToTxn};
    for (int i = 0; i < 3; ++i) {
      std::vector<double> h(8);
      for (double& v : h) v = rng.uniform(-1.0, 1.0);
      neighbors.emplace_back(h, kinds[i]);
    }
    auto agg = aggregate_node(layer, neighbors, h_dst, cfg);

    // independent recomputation straight from the matrices
    const int dh = cfg.head_dim();
    std::vector<double> expected(cfg.dim, 0.0);
    for (int k = 0; k < cfg.heads; ++k) {
      std::vector<double> scores;
      for (const auto& [h_src, edge] : neighbors) {
        const int st = static_cast<int>(edge_source_type(edge));
        const int dt = static_cast<int>(edge_dest_type(edge));
        auto a = matvec(matvec(h_src, layer.linear_s[st][k]), layer.w_att[static_cast<int>(edge)]);
        auto b = matvec(h_dst, layer.linear_d[dt][k]);
        double s = 0.0;
        for (int j = 0; j < dh; ++j) s += a[j] * b[j];
        scores.push_back(s / std::sqrt(static_cast<double>(dh)));
      }
      double denom = 0.0;
      for (double s : scores) denom += std::exp(s);
      for (size_t i = 0; i < neighbors.size(); ++i) {
        const auto& [h_src, edge] = neighbors[i];
        const int st = static_cast<int>(edge_source_type(edge));
        auto msg =
            matvec(matvec(h_src, layer.linear_m[st][k]), layer.w_mssg[static_cast<int>(edge)]);
        const double w = std::exp(scores[i]) / denom;
        for (int j = 0; j < dh; ++j) expected[k * dh + j] += w * msg[j];
      }
    }
    for (int j = 0; j < cfg.dim; ++j) CHECK(agg[j] == doctest::Approx(expected[j]).epsilon(1e-12));
  }

  SUBCASE("aggregation is invariant to neighbor order") {
    std::vector<std::pair<std::vector<double>, EdgeType>> neighbors;
    for (int i = 0; i < 4; ++i) {
      std::vector<double> h(8);
      for (double& v : h) v = rng.uniform(-1.0, 1.0);
      neighbors.emplace_back(h, i % 2 == 0 ? EdgeType::CustomerToTxn : EdgeType::MerchantToTxn);
    }
    auto agg = aggregate_node(layer, neighbors, h_dst, cfg);
    std::reverse(neighbors.begin(), neighbors.end());
    auto rev = aggregate_node(layer, neighbors, h_dst, cfg);
    for (int j = 0; j < cfg.dim; ++j) CHECK(std::abs(agg[j] - rev[j]) < 1e-12);
  }

  SUBCASE("empty neighborhood aggregates to the zero vector") {
    auto agg = aggregate_node(layer, {}, h_dst, cfg);
    for (double v : agg) CHECK(v == 0.0);
  }
}

TEST_CASE("attention weights per destination and head sum to one") {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.heads = 4;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    auto layer = random_layer(cfg, rng);
    GeneratorConfig gc;
    gc.n_customers = 3;
    gc.n_merchants = 4;
    gc.n_days = 6;
    gc.seed = seed;
    auto records = generate_synthetic(gc);
    auto spec = FeatureSpec::from_records(records);
    auto graph = build_graph(records, encode_features(records, spec));

    // stand-in embeddings at the model dimension
    std::array<std::vector<std::vector<double>>, kNodeTypeCount> h;
    for (int t = 0; t < kNodeTypeCount; ++t)
      for (int i = 0; i < graph.node_count(static_cast<NodeType>(t)); ++i) {
        std::vector<double> v(cfg.dim);
        for (double& x : v) x = rng.uniform(-2.0, 2.0);
        h[t].push_back(std::move(v));
      }

    for (int t = 0; t < kNodeTypeCount; ++t)
      for (int d = 0; d < graph.node_count(static_cast<NodeType>(t)); ++d) {
        const auto& incoming = neighbors_in(graph, static_cast<NodeType>(t), d);
        if (incoming.empty()) continue;
        for (int k = 0; k < cfg.heads; ++k) {
          std::vector<double> scores;
          for (const auto& [src, edge] : incoming) {
            const int st = static_cast<int>(edge_source_type(edge));
            scores.push_back(attention_score(layer, k, edge, h[st][src], h[t][d], cfg));
          }
          auto weights = attention_weights(scores);
          double total = 0.0;
          for (double w : weights) total += w;
          CHECK(std::abs(total - 1.0) <= 1e-9);
        }
      }
  }
}

TEST_CASE("reparameterization") {
  SUBCASE("zero noise returns the mean exactly") {
    Tensor mu = Tensor::from_rows({{0.5, -1.5, 2.0}});
    Tensor logvar = Tensor::from_rows({{3.0, -2.0, 0.7}});
    Tensor noise(1, 3);
    Tensor h = reparameterize_with_noise(mu, logvar, noise);
    for (int j = 0; j < 3; ++j) CHECK(h(0, j) == mu(0, j));
  }

  SUBCASE("unit log-variance draws have unit sample variance") {
    const int n = 100000;
    Tensor mu(n, 1);
    Tensor logvar(n, 1);
    Rng rng(9);
    Tensor h = reparameterize(mu, logvar, rng);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += h(i, 0);
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (h(i, 0) - mean) * (h(i, 0) - mean);
    var /= n;
    CHECK(var > 0.97);
    CHECK(var < 1.03);
  }

  SUBCASE("log-variance ln 4 doubles the spread") {
    const int n = 100000;
    Tensor mu(n, 1);
    Tensor logvar(n, 1, std::log(4.0));
    Rng rng(10);
    Tensor h = reparameterize(mu, logvar, rng);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += h(i, 0);
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (h(i, 0) - mean) * (h(i, 0) - mean);
    const double sd = std::sqrt(var / n);
    CHECK(sd > 2.0 * 0.97);
    CHECK(sd < 2.0 * 1.03);
  }
}

TEST_CASE("encoder layer") {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.heads = 2;
  cfg.encoder_depth = 1;
  cfg.decoder_width = 8;
  cfg.dropout = 0.0;

  SUBCASE("isolated node reduces to the residual path") {
    HeteroGraph g = isolated_graph(3);
    Rng rng(21);
    ModelParams params = ModelParams::init({3, 3, 3}, cfg, rng);
    auto h0 = input_projection(params, g);
    Rng unused(0);
    LatentState state = encoder_layer(params.layers[0], g, h0, h0, cfg, false, unused);

    // aggregate is zero, so mu = mean_head(h0 row)
    auto expected = matvec(tensor_row(h0[0], 0), params.layers[0].mean_head[0]);
    for (int j = 0; j < cfg.dim; ++j)
      CHECK(state.mu[0](0, j) == doctest::Approx(expected[j]).epsilon(1e-12));
  }

  SUBCASE("inference embeddings equal the mean bit for bit") {
    HeteroGraph g = small_graph();
    Rng rng(22);
    ModelParams params = ModelParams::init(
        {g.feature_dim(NodeType::Customer), g.feature_dim(NodeType::Merchant),
         g.feature_dim(NodeType::Transaction)},
        cfg, rng);
    Rng unused(0);
    LatentState state = encode(params, g, cfg, false, unused);
    for (int t = 0; t < kNodeTypeCount; ++t) CHECK(state.h[t].values() == state.mu[t].values());
  }

  SUBCASE("full forward matches the per-destination reference path") {
    HeteroGraph g = small_graph();
    Rng rng(23);
    ModelParams params = ModelParams::init(
        {g.feature_dim(NodeType::Customer), g.feature_dim(NodeType::Merchant),
         g.feature_dim(NodeType::Transaction)},
        cfg, rng);
    auto h0 = input_projection(params, g);
    Rng unused(0);
    LatentState state = encoder_layer(params.layers[0], g, h0, h0, cfg, false, unused);

    for (int t = 0; t < kNodeTypeCount; ++t) {
      for (int d = 0; d < g.node_count(static_cast<NodeType>(t)); ++d) {
        std::vector<std::pair<std::vector<double>, EdgeType>> neighbors;
        for (const auto& [src, edge] : neighbors_in(g, static_cast<NodeType>(t), d)) {
          const int st = static_cast<int>(edge_source_type(edge));
          neighbors.emplace_back(tensor_row(h0[st], src), edge);
        }
        auto agg = aggregate_node(params.layers[0], neighbors, tensor_row(h0[t], d), cfg);
        auto z = matvec(agg, params.layers[0].proj[t]);
        for (int j = 0; j < cfg.dim; ++j) z[j] += h0[t](d, j);
        auto mu = matvec(z, params.layers[0].mean_head[t]);
        auto lv = matvec(z, params.layers[0].logvar_head[t]);
        for (int j = 0; j < cfg.dim; ++j) {
          CHECK(state.mu[t](d, j) == doctest::Approx(mu[j]).epsilon(1e-12));
          CHECK(state.logvar[t](d, j) == doctest::Approx(lv[j]).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("encode composes layers in sequence") {
  ModelConfig cfg;
  cfg.dim = 8;
  cfg.heads = 2;
  cfg.encoder_depth = 2;
  cfg.decoder_width = 8;
  HeteroGraph g = small_graph();
  const std::array<int, kNodeTypeCount> dims = {g.feature_dim(NodeType::Customer),
                                                g.feature_dim(NodeType::Merchant),
                                                g.feature_dim(NodeType::Transaction)};
  Rng rng(31);
  ModelParams params = ModelParams::init(dims, cfg, rng);

  Rng unused(0);
  LatentState direct = encode(params, g, cfg, false, unused);

  auto h0 = input_projection(params, g);
  LatentState first = encoder_layer(params.layers[0], g, h0, h0, cfg, false, unused);
  LatentState second = encoder_layer(params.layers[1], g, first.h, h0, cfg, false, unused);
  for (int t = 0; t < kNodeTypeCount; ++t) {
    CHECK(direct.mu[t].values() == second.mu[t].values());
    CHECK(direct.logvar[t].values() == second.logvar[t].values());
  }

  LatentState again = encode(params, g, cfg, false, unused);
  for (int t = 0; t < kNodeTypeCount; ++t) CHECK(direct.h[t].values() == again.h[t].values());
}

TEST_CASE("decoder") {
  ModelConfig cfg;
  cfg.dim = 4;
  cfg.heads = 1;
  cfg.encoder_depth = 1;
  cfg.decoder_width = 4;
  Rng rng(41);
  ModelParams params = ModelParams::init({4, 4, 4}, cfg, rng);

  SUBCASE("zero latent with zero biases reconstructs zero") {
    std::array<Tensor, kNodeTypeCount> latent;
    for (int t = 0; t < kNodeTypeCount; ++t) latent[t] = Tensor(2, 4);
    auto out = decode(params, latent);
    for (int t = 0; t < kNodeTypeCount; ++t)
      for (double v : out[t].values()) CHECK(v == 0.0);
  }

  SUBCASE("identity weights pass a nonnegative latent through") {
    for (int t = 0; t < kNodeTypeCount; ++t) {
      params.decoder[t].w1 = identity(4);
      params.decoder[t].w2 = identity(4);
      params.decoder[t].b1 = Tensor(1, 4);
      params.decoder[t].b2 = Tensor(1, 4);
    }
    std::array<Tensor, kNodeTypeCount> latent;
    for (int t = 0; t < kNodeTypeCount; ++t)
      latent[t] = Tensor::from_rows({{0.5, 0.0, 2.0, 1.25}});
    auto out = decode(params, latent);
    for (int t = 0; t < kNodeTypeCount; ++t) CHECK(out[t].values() == latent[t].values());
  }

  SUBCASE("random latent matches a direct recomputation") {
    std::array<Tensor, kNodeTypeCount> latent;
    for (int t = 0; t < kNodeTypeCount; ++t) latent[t] = random_matrix(3, 4, rng);
    auto out = decode(params, latent);
    for (int t = 0; t < kNodeTypeCount; ++t) {
      for (int i = 0; i < 3; ++i) {
        auto hidden = matvec(tensor_row(latent[t], i), params.decoder[t].w1);
        for (int j = 0; j < 4; ++j) hidden[j] = std::max(0.0, hidden[j] + params.decoder[t].b1(0, j));
        auto rec = matvec(hidden, params.decoder[t].w2);
        for (int j = 0; j < 4; ++j) rec[j] += params.decoder[t].b2(0, j);
        for (int j = 0; j < 4; ++j)
          CHECK(out[t](i, j) == doctest::Approx(rec[j]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("reconstruction loss") {
  HeteroGraph g = isolated_graph(2);
  g.features[0] = Tensor::from_rows({{1.0, 0.0}});
  LatentState latent;

  SUBCASE("perfect reconstruction scores zero") {
    std::array<Tensor, kNodeTypeCount> rec;
    rec[0] = g.features[0].clone();
    rec[1] = Tensor(0, 2);
    rec[2] = Tensor(0, 2);
    Tensor loss = reconstruction_loss(g, rec, latent, 0.0);
    CHECK(loss(0, 0) == 0.0);
    auto per_node = per_node_losses(g, rec, NodeType::Customer);
    CHECK(per_node == std::vector<double>{0.0});
  }

  SUBCASE("per-node loss is the feature-wise mean squared error") {
    std::array<Tensor, kNodeTypeCount> rec;
    rec[0] = Tensor(1, 2);  // reconstruction [0, 0] against input [1, 0]
    rec[1] = Tensor(0, 2);
    rec[2] = Tensor(0, 2);
    Tensor loss = reconstruction_loss(g, rec, latent, 0.0);
    CHECK(loss(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    auto per_node = per_node_losses(g, rec, NodeType::Customer);
    CHECK(per_node[0] == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("mismatched coverage is rejected") {
    std::array<Tensor, kNodeTypeCount> rec;
    rec[0] = Tensor(2, 2);
    rec[1] = Tensor(0, 2);
    rec[2] = Tensor(0, 2);
    try {
      reconstruction_loss(g, rec, latent, 0.0);
      FAIL("expected a coverage error");
    } catch (const Error& e) {
      CHECK(e.code() == "CoverageGap");
    }
  }

  SUBCASE("divergence weight adds a positive penalty for non-unit latents") {
    std::array<Tensor, kNodeTypeCount> rec;
    rec[0] = g.features[0].clone();
    rec[1] = Tensor(0, 2);
    rec[2] = Tensor(0, 2);
    latent.mu[0] = Tensor::from_rows({{2.0, -1.0}});
    latent.logvar[0] = Tensor(1, 2);
    Tensor plain = reconstruction_loss(g, rec, latent, 0.0);
    Tensor weighted = reconstruction_loss(g, rec, latent, 0.5);
    // KL of N(mu, 1) vs N(0, 1) is mu^2 / 2 per coordinate: (4 + 1) / 2
    CHECK(plain(0, 0) == 0.0);
    CHECK(weighted(0, 0) == doctest::Approx(0.5 * 2.5).epsilon(1e-12));
  }
}

TEST_CASE("gradients of the full model agree with central differences") {
  ModelConfig cfg;
  cfg.dim = 4;
  cfg.heads = 2;
  cfg.encoder_depth = 2;
  cfg.decoder_width = 4;
  cfg.dropout = 0.0;
  HeteroGraph g = small_graph();
  const std::array<int, kNodeTypeCount> dims = {g.feature_dim(NodeType::Customer),
                                                g.feature_dim(NodeType::Merchant),
                                                g.feature_dim(NodeType::Transaction)};
  Rng rng(51);
  ModelParams params = ModelParams::init(dims, cfg, rng);
  auto all = params.all_parameters();

  auto forward_tape = [&]() {
    Rng unused(0);
    LatentState state = encode(params, g, cfg, false, unused);
    auto rec = decode(params, state.h);
    return reconstruction_loss(g, rec, state, 0.0);
  };
  auto forward_value = [&]() {
    NoGradGuard guard;
    return forward_tape()(0, 0);
  };

  auto result = testutil::grad_check(all, forward_value, forward_tape, 1e-5, 8);
  CHECK(result.checked > 100);
  CHECK(result.max_rel_error < 1e-4);
}
