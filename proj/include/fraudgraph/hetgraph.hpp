#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fraudgraph/dataio.hpp"
#include "fraudgraph/tensor.hpp"

namespace fraudgraph {

enum class NodeType : int { Customer = 0, Merchant = 1, Transaction = 2 };
inline constexpr int kNodeTypeCount = 3;

// Forward relations from the schema plus auto-generated reverses so every
// node can receive messages from both sides of a transaction.
enum class EdgeType : int {
  CustomerToTxn = 0,   // customer initiates transaction
  TxnToMerchant = 1,   // transaction settles at merchant
  TxnToCustomer = 2,   // reverse of CustomerToTxn
  MerchantToTxn = 3,   // reverse of TxnToMerchant
};
inline constexpr int kEdgeTypeCount = 4;

NodeType edge_source_type(EdgeType e);
NodeType edge_dest_type(EdgeType e);
EdgeType edge_reverse(EdgeType e);
const char* node_type_name(NodeType t);
const char* edge_type_name(EdgeType e);

struct HeteroGraph {
  std::array<std::vector<std::string>, kNodeTypeCount> keys;  // first-appearance order
  std::array<Tensor, kNodeTypeCount> features;                // rows follow keys
  std::array<std::vector<std::pair<int, int>>, kEdgeTypeCount> edges;  // (src, dst)
  // per destination node: incoming (source, edge type), insertion order
  std::array<std::vector<std::vector<std::pair<int, EdgeType>>>, kNodeTypeCount> in_adj;

  int node_count(NodeType t) const { return static_cast<int>(keys[static_cast<int>(t)].size()); }
  int feature_dim(NodeType t) const { return features[static_cast<int>(t)].cols(); }
  std::size_t edge_count() const;
};

HeteroGraph build_graph(const std::vector<TransactionRecord>& records,
                        const FeatureTable& features);

const std::vector<std::pair<int, EdgeType>>& neighbors_in(const HeteroGraph& graph,
                                                          NodeType type, int index);

struct Diagnostic {
  std::string kind;  // DanglingEdge, DegreeViolation, TypeMismatch, DimMismatch
  std::string message;
};

std::vector<Diagnostic> validate(const HeteroGraph& graph);

void save_graph(const std::string& path, const HeteroGraph& graph);
HeteroGraph load_graph(const std::string& path);

}  // namespace fraudgraph
