#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fraudgraph/error.hpp"

namespace fraudgraph {

struct TransactionRecord {
  std::string trans_id;
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  std::string cc_num;
  std::string merchant;
  std::string category;
  double amount = 0.0;
  bool is_fraud = false;

  bool operator==(const TransactionRecord&) const = default;
};

// Column-name mapping for CSV ingestion; defaults match the Sparkov schema.
struct ColumnMap {
  std::string trans_id = "trans_num";
  std::string timestamp = "trans_date_trans_time";
  std::string cc_num = "cc_num";
  std::string merchant = "merchant";
  std::string category = "category";
  std::string amount = "amt";
  std::string is_fraud = "is_fraud";
};

struct FeatureSpec {
  std::vector<std::string> category_vocabulary;  // ordered, last slot reserved for OTHER
  int feature_dim_transaction = 0;               // 5 + |vocabulary|
  int feature_dim_customer = 3;
  int feature_dim_merchant = 3;

  int category_index(const std::string& category) const;
  static FeatureSpec from_records(const std::vector<TransactionRecord>& records);
};

inline constexpr const char* kOtherCategory = "__other__";

struct FeatureTable {
  FeatureSpec spec;
  std::unordered_map<std::string, std::vector<double>> transaction;
  std::unordered_map<std::string, std::vector<double>> customer;
  std::unordered_map<std::string, std::vector<double>> merchant;
};

struct SplitTable {
  std::vector<TransactionRecord> train;       // genuine only
  std::vector<TransactionRecord> validation;  // mixed, labeled
  std::vector<TransactionRecord> test;        // mixed, labeled
};

std::int64_t parse_datetime(const std::string& text);  // "YYYY-MM-DD HH:MM:SS"
std::string format_datetime(std::int64_t timestamp);

std::vector<TransactionRecord> parse_csv(const std::string& path, const ColumnMap& columns = {});
void write_csv(const std::string& path, const std::vector<TransactionRecord>& records,
               const ColumnMap& columns = {});

FeatureTable encode_features(const std::vector<TransactionRecord>& records,
                             const FeatureSpec& spec);

SplitTable split_records(const std::vector<TransactionRecord>& records, double val_fraction,
                         double test_fraction, std::uint64_t seed);

struct GeneratorConfig {
  int n_customers = 1000;
  int n_merchants = 800;
  int n_days = 730;
  double fraud_rate = 0.0048985;  // overall mean label rate
  std::uint64_t seed = 1;
};

std::vector<TransactionRecord> generate_synthetic(const GeneratorConfig& config);

}  // namespace fraudgraph
