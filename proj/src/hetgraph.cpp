#include "fraudgraph/hetgraph.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace fraudgraph {

NodeType edge_source_type(EdgeType e) {
  switch (e) {
    case EdgeType::CustomerToTxn: return NodeType::Customer;
    case EdgeType::TxnToMerchant: return NodeType::Transaction;
    case EdgeType::TxnToCustomer: return NodeType::Transaction;
    case EdgeType::MerchantToTxn: return NodeType::Merchant;
  }
  fail("TypeMismatch", "unknown edge type");
}

NodeType edge_dest_type(EdgeType e) {
  switch (e) {
    case EdgeType::CustomerToTxn: return NodeType::Transaction;
    case EdgeType::TxnToMerchant: return NodeType::Merchant;
    case EdgeType::TxnToCustomer: return NodeType::Customer;
    case EdgeType::MerchantToTxn: return NodeType::Transaction;
  }
  fail("TypeMismatch", "unknown edge type");
}

EdgeType edge_reverse(EdgeType e) {
  switch (e) {
    case EdgeType::CustomerToTxn: return EdgeType::TxnToCustomer;
    case EdgeType::TxnToMerchant: return EdgeType::MerchantToTxn;
    case EdgeType::TxnToCustomer: return EdgeType::CustomerToTxn;
    case EdgeType::MerchantToTxn: return EdgeType::TxnToMerchant;
  }
  fail("TypeMismatch", "unknown edge type");
}

const char* node_type_name(NodeType t) {
  switch (t) {
    case NodeType::Customer: return "customer";
    case NodeType::Merchant: return "merchant";
    case NodeType::Transaction: return "transaction";
  }
  return "?";
}

const char* edge_type_name(EdgeType e) {
  switch (e) {
    case EdgeType::CustomerToTxn: return "customer->txn";
    case EdgeType::TxnToMerchant: return "txn->merchant";
    case EdgeType::TxnToCustomer: return "txn->customer";
    case EdgeType::MerchantToTxn: return "merchant->txn";
  }
  return "?";
}

std::size_t HeteroGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

HeteroGraph build_graph(const std::vector<TransactionRecord>& records,
                        const FeatureTable& features) {
  HeteroGraph g;
  std::array<std::unordered_map<std::string, int>, kNodeTypeCount> index;
  auto intern = [&](NodeType type, const std::string& key) {
    auto& idx = index[static_cast<int>(type)];
    const auto [it, inserted] = idx.try_emplace(key, static_cast<int>(idx.size()));
    if (inserted) g.keys[static_cast<int>(type)].push_back(key);
    return it->second;
  };
  auto add_edge = [&](EdgeType type, int src, int dst) {
    g.edges[static_cast<int>(type)].emplace_back(src, dst);
  };
  for (const auto& r : records) {
    const int c = intern(NodeType::Customer, r.cc_num);
    const int m = intern(NodeType::Merchant, r.merchant);
    const int t = intern(NodeType::Transaction, r.trans_id);
    add_edge(EdgeType::CustomerToTxn, c, t);
    add_edge(EdgeType::TxnToMerchant, t, m);
    add_edge(EdgeType::TxnToCustomer, t, c);
    add_edge(EdgeType::MerchantToTxn, m, t);
  }

  const std::unordered_map<std::string, std::vector<double>>* tables[kNodeTypeCount] = {
      &features.customer, &features.merchant, &features.transaction};
  const int dims[kNodeTypeCount] = {features.spec.feature_dim_customer,
                                    features.spec.feature_dim_merchant,
                                    features.spec.feature_dim_transaction};
  for (int t = 0; t < kNodeTypeCount; ++t) {
    const auto& keys = g.keys[t];
    Tensor mat(static_cast<int>(keys.size()), dims[t]);
    for (size_t i = 0; i < keys.size(); ++i) {
      const auto it = tables[t]->find(keys[i]);
      if (it == tables[t]->end())
        fail("MissingFeature", std::string(node_type_name(static_cast<NodeType>(t))) + " '" +
                                   keys[i] + "'");
      if (static_cast<int>(it->second.size()) != dims[t])
        fail("ShapeMismatch", "feature dim for '" + keys[i] + "'");
      for (int j = 0; j < dims[t]; ++j) mat.at(static_cast<int>(i), j) = it->second[j];
    }
    g.features[t] = mat;
  }

  for (int t = 0; t < kNodeTypeCount; ++t) g.in_adj[t].resize(g.keys[t].size());
  for (int e = 0; e < kEdgeTypeCount; ++e) {
    const auto type = static_cast<EdgeType>(e);
    const int dt = static_cast<int>(edge_dest_type(type));
    for (const auto& [src, dst] : g.edges[e]) g.in_adj[dt][dst].emplace_back(src, type);
  }
  return g;
}

const std::vector<std::pair<int, EdgeType>>& neighbors_in(const HeteroGraph& graph,
                                                          NodeType type, int index) {
  const auto& adj = graph.in_adj[static_cast<int>(type)];
  if (index < 0 || index >= static_cast<int>(adj.size()))
    fail("NodeOutOfRange", std::string(node_type_name(type)) + " index " + std::to_string(index));
  return adj[index];
}

std::vector<Diagnostic> validate(const HeteroGraph& graph) {
  std::vector<Diagnostic> out;
  for (int t = 0; t < kNodeTypeCount; ++t) {
    if (graph.features[t].defined() &&
        graph.features[t].rows() != static_cast<int>(graph.keys[t].size()))
      out.push_back({"DimMismatch",
                     std::string(node_type_name(static_cast<NodeType>(t))) + ": " +
                         std::to_string(graph.features[t].rows()) + " feature rows for " +
                         std::to_string(graph.keys[t].size()) + " nodes"});
  }
  std::vector<int> forward_degree(graph.keys[static_cast<int>(NodeType::Transaction)].size(), 0);
  for (int e = 0; e < kEdgeTypeCount; ++e) {
    const auto type = static_cast<EdgeType>(e);
    const int n_src = static_cast<int>(graph.keys[static_cast<int>(edge_source_type(type))].size());
    const int n_dst = static_cast<int>(graph.keys[static_cast<int>(edge_dest_type(type))].size());
    for (size_t i = 0; i < graph.edges[e].size(); ++i) {
      const auto [src, dst] = graph.edges[e][i];
      if (src < 0 || src >= n_src || dst < 0 || dst >= n_dst) {
        out.push_back({"DanglingEdge", std::string(edge_type_name(type)) + " #" +
                                           std::to_string(i) + ": (" + std::to_string(src) + "," +
                                           std::to_string(dst) + ")"});
        continue;
      }
      if (type == EdgeType::CustomerToTxn) ++forward_degree[dst];
      if (type == EdgeType::TxnToMerchant) ++forward_degree[src];
    }
  }
  for (size_t i = 0; i < forward_degree.size(); ++i)
    if (forward_degree[i] != 2)
      out.push_back({"DegreeViolation", "transaction #" + std::to_string(i) + " has " +
                                            std::to_string(forward_degree[i]) +
                                            " forward edges (expected 2)"});
  return out;
}

namespace {
constexpr char kGraphMagic[8] = {'F', 'G', 'G', 'R', 'P', 'H', '0', '1'};
}

void save_graph(const std::string& path, const HeteroGraph& graph) {
  nlohmann::json header;
  header["version"] = 1;
  for (int t = 0; t < kNodeTypeCount; ++t) {
    nlohmann::json jt;
    jt["type_code"] = t;
    jt["keys"] = graph.keys[t];
    jt["feature_dim"] = graph.features[t].defined() ? graph.features[t].cols() : 0;
    header["nodes"][node_type_name(static_cast<NodeType>(t))] = jt;
  }
  for (int e = 0; e < kEdgeTypeCount; ++e)
    header["edge_counts"][std::to_string(e)] = graph.edges[e].size();
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot write " + path);
  out.write(kGraphMagic, sizeof(kGraphMagic));
  const std::uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (int t = 0; t < kNodeTypeCount; ++t) {
    const auto& v = graph.features[t].values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  for (int e = 0; e < kEdgeTypeCount; ++e)
    for (const auto& [src, dst] : graph.edges[e]) {
      const std::int64_t pair[2] = {src, dst};
      out.write(reinterpret_cast<const char*>(pair), sizeof(pair));
    }
  if (!out) fail("IoError", "write failed: " + path);
}

HeteroGraph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("IoError", "cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kGraphMagic, sizeof(magic)) != 0)
    fail("VersionMismatch", path + " is not a graph container file");
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) fail("IoError", "truncated header in " + path);
  const auto header = nlohmann::json::parse(htext, nullptr, false);
  if (header.is_discarded() || header.value("version", 0) != 1)
    fail("VersionMismatch", "unsupported graph file version in " + path);

  HeteroGraph g;
  std::array<int, kNodeTypeCount> dims{};
  for (int t = 0; t < kNodeTypeCount; ++t) {
    const auto& jt = header.at("nodes").at(node_type_name(static_cast<NodeType>(t)));
    g.keys[t] = jt.at("keys").get<std::vector<std::string>>();
    dims[t] = jt.at("feature_dim").get<int>();
  }
  for (int t = 0; t < kNodeTypeCount; ++t) {
    Tensor mat(static_cast<int>(g.keys[t].size()), dims[t]);
    in.read(reinterpret_cast<char*>(mat.values().data()),
            static_cast<std::streamsize>(mat.values().size() * sizeof(double)));
    g.features[t] = mat;
  }
  for (int e = 0; e < kEdgeTypeCount; ++e) {
    const auto count = header.at("edge_counts").at(std::to_string(e)).get<std::uint64_t>();
    g.edges[e].reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      std::int64_t pair[2];
      in.read(reinterpret_cast<char*>(pair), sizeof(pair));
      g.edges[e].emplace_back(static_cast<int>(pair[0]), static_cast<int>(pair[1]));
    }
  }
  if (!in) fail("IoError", "truncated data in " + path);
  for (int t = 0; t < kNodeTypeCount; ++t) g.in_adj[t].resize(g.keys[t].size());
  for (int e = 0; e < kEdgeTypeCount; ++e) {
    const auto type = static_cast<EdgeType>(e);
    const int dt = static_cast<int>(edge_dest_type(type));
    for (const auto& [src, dst] : g.edges[e]) g.in_adj[dt][dst].emplace_back(src, type);
  }
  return g;
}

}  // namespace fraudgraph
