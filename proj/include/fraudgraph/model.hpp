#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "fraudgraph/hetgraph.hpp"
#include "fraudgraph/rng.hpp"
#include "fraudgraph/tensor.hpp"

namespace fraudgraph {

struct ModelConfig {
  int dim = 64;
  int heads = 16;
  int encoder_depth = 2;
  int decoder_width = 64;
  double dropout = 0.4;
  double kl_beta = 0.0;

  int head_dim() const { return dim / heads; }
  void check() const;
};

// One encoder layer: per-(type, head) source/destination/message projections,
// per-edge-type attention and message matrices, per-type post-aggregation
// projection and the two moment heads.
struct EncoderLayerParams {
  std::array<std::vector<Tensor>, kNodeTypeCount> linear_s, linear_d, linear_m;  // dim x dh
  std::array<Tensor, kEdgeTypeCount> w_att, w_mssg;                              // dh x dh
  std::array<Tensor, kNodeTypeCount> proj, mean_head, logvar_head;               // dim x dim
};

struct DecoderParams {
  Tensor w1, b1;  // dim x width, 1 x width
  Tensor w2, b2;  // width x feat_dim, 1 x feat_dim
};

struct ModelParams {
  std::array<Tensor, kNodeTypeCount> input_proj;  // feat_dim_t x dim
  std::vector<EncoderLayerParams> layers;
  std::array<DecoderParams, kNodeTypeCount> decoder;

  static ModelParams init(const std::array<int, kNodeTypeCount>& feature_dims,
                          const ModelConfig& config, Rng& rng);
  std::vector<Tensor> all_parameters();
  std::vector<std::pair<std::string, Tensor>> named_parameters();
  ModelParams clone() const;
};

struct LatentState {
  std::array<Tensor, kNodeTypeCount> mu, logvar, h;
};

// --- per-destination reference path (plain vectors, no recording) ---

// Eq-style per-edge score: [LinearS(h_src)] . W_att . [LinearD(h_dst)]^T / sqrt(dh)
double attention_score(const EncoderLayerParams& layer, int head, EdgeType edge,
                       const std::vector<double>& h_src, const std::vector<double>& h_dst,
                       const ModelConfig& config);

// softmax over the neighbor axis for one head's scores
std::vector<double> attention_weights(const std::vector<double>& scores);

// LinearM(h_src) . W_mssg, length dh
std::vector<double> message_vector(const EncoderLayerParams& layer, int head, EdgeType edge,
                                   const std::vector<double>& h_src, const ModelConfig& config);

// attention-weighted sum of messages per head, heads concatenated to dim;
// empty neighborhood yields the zero vector
std::vector<double> aggregate_node(
    const EncoderLayerParams& layer,
    const std::vector<std::pair<std::vector<double>, EdgeType>>& neighbors,
    const std::vector<double>& h_dst, const ModelConfig& config);

// --- recorded (differentiable) path ---

std::array<Tensor, kNodeTypeCount> input_projection(ModelParams& params, const HeteroGraph& graph);

Tensor reparameterize_with_noise(const Tensor& mu, const Tensor& logvar, const Tensor& noise);
Tensor reparameterize(const Tensor& mu, const Tensor& logvar, Rng& rng);

LatentState encoder_layer(const EncoderLayerParams& layer, const HeteroGraph& graph,
                          const std::array<Tensor, kNodeTypeCount>& prev,
                          const std::array<Tensor, kNodeTypeCount>& h0,
                          const ModelConfig& config, bool training, Rng& rng);

LatentState encode(ModelParams& params, const HeteroGraph& graph, const ModelConfig& config,
                   bool training, Rng& rng);

std::array<Tensor, kNodeTypeCount> decode(ModelParams& params,
                                          const std::array<Tensor, kNodeTypeCount>& latent);

// Mean over nodes of per-node feature MSE, all types, plus optional
// beta-weighted divergence from the unit Gaussian.
Tensor reconstruction_loss(const HeteroGraph& graph,
                           const std::array<Tensor, kNodeTypeCount>& reconstructed,
                           const LatentState& latent, double kl_beta);

// per-node MSE against the raw encoded features, one value per node of `type`
std::vector<double> per_node_losses(const HeteroGraph& graph,
                                    const std::array<Tensor, kNodeTypeCount>& reconstructed,
                                    NodeType type);

}  // namespace fraudgraph
