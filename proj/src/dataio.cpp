#include "fraudgraph/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fraudgraph/rng.hpp"

namespace fraudgraph {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// days since 1970-01-01 for a proleptic Gregorian date
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yoe + era * 400) + (m <= 2);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

std::int64_t parse_datetime(const std::string& text) {
  int y, mo, d, h, mi, s;
  if (std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6)
    fail("ParseError", "bad datetime '" + text + "' (expected YYYY-MM-DD HH:MM:SS)");
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
    fail("ParseError", "datetime fields out of range in '" + text + "'");
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_datetime(std::int64_t timestamp) {
  std::int64_t days = timestamp / 86400;
  std::int64_t sod = timestamp % 86400;
  if (sod < 0) {
    sod += 86400;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", y, m, d,
                static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                static_cast<int>(sod % 60));
  return buf;
}

std::vector<TransactionRecord> parse_csv(const std::string& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) fail("IoError", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail("EmptyFile", path + " has no header row");
  const auto header = split_csv_line(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail("MissingColumn", name);
    return static_cast<int>(it - header.begin());
  };
  const int c_id = col(columns.trans_id), c_ts = col(columns.timestamp),
            c_cc = col(columns.cc_num), c_m = col(columns.merchant),
            c_cat = col(columns.category), c_amt = col(columns.amount),
            c_fraud = col(columns.is_fraud);
  const int needed = 1 + std::max({c_id, c_ts, c_cc, c_m, c_cat, c_amt, c_fraud});

  std::vector<TransactionRecord> records;
  std::set<std::string> seen_ids;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) < needed)
      fail("ParseError", "row " + std::to_string(row) + ": expected at least " +
                             std::to_string(needed) + " fields, got " + std::to_string(fields.size()));
    TransactionRecord r;
    r.trans_id = fields[c_id];
    if (!seen_ids.insert(r.trans_id).second)
      fail("ParseError", "row " + std::to_string(row) + " field " + columns.trans_id +
                             ": duplicate id '" + r.trans_id + "'");
    try {
      r.timestamp = parse_datetime(fields[c_ts]);
    } catch (const Error& e) {
      fail("ParseError", "row " + std::to_string(row) + " field " + columns.timestamp + ": " + e.what());
    }
    r.cc_num = fields[c_cc];
    r.merchant = fields[c_m];
    r.category = fields[c_cat];
    char* end = nullptr;
    r.amount = std::strtod(fields[c_amt].c_str(), &end);
    if (end == fields[c_amt].c_str() || !std::isfinite(r.amount))
      fail("ParseError", "row " + std::to_string(row) + " field " + columns.amount +
                             ": not a number '" + fields[c_amt] + "'");
    if (r.amount <= 0.0)
      fail("ParseError", "row " + std::to_string(row) + " field " + columns.amount +
                             ": non-positive amount " + fields[c_amt]);
    const std::string& fv = fields[c_fraud];
    if (fv == "0" || fv == "false")
      r.is_fraud = false;
    else if (fv == "1" || fv == "true")
      r.is_fraud = true;
    else
      fail("ParseError", "row " + std::to_string(row) + " field " + columns.is_fraud +
                             ": expected 0/1, got '" + fv + "'");
    records.push_back(std::move(r));
  }
  return records;
}

void write_csv(const std::string& path, const std::vector<TransactionRecord>& records,
               const ColumnMap& columns) {
  std::ofstream out(path);
  if (!out) fail("IoError", "cannot write " + path);
  out << columns.timestamp << ',' << columns.cc_num << ',' << columns.merchant << ','
      << columns.category << ',' << columns.amount << ',' << columns.is_fraud << ','
      << columns.trans_id << '\n';
  char amt[32];
  for (const auto& r : records) {
    std::snprintf(amt, sizeof(amt), "%.2f", r.amount);
    out << format_datetime(r.timestamp) << ',' << r.cc_num << ',' << r.merchant << ','
        << r.category << ',' << amt << ',' << (r.is_fraud ? 1 : 0) << ',' << r.trans_id << '\n';
  }
  if (!out) fail("IoError", "write failed: " + path);
}

int FeatureSpec::category_index(const std::string& category) const {
  const auto it = std::find(category_vocabulary.begin(), category_vocabulary.end(), category);
  if (it != category_vocabulary.end())
    return static_cast<int>(it - category_vocabulary.begin());
  // unseen categories share the reserved OTHER slot
  return static_cast<int>(category_vocabulary.size()) - 1;
}

FeatureSpec FeatureSpec::from_records(const std::vector<TransactionRecord>& records) {
  std::set<std::string> cats;
  for (const auto& r : records) cats.insert(r.category);
  cats.erase(kOtherCategory);
  FeatureSpec spec;
  spec.category_vocabulary.assign(cats.begin(), cats.end());
  spec.category_vocabulary.push_back(kOtherCategory);
  spec.feature_dim_transaction = 5 + static_cast<int>(spec.category_vocabulary.size());
  return spec;
}

FeatureTable encode_features(const std::vector<TransactionRecord>& records,
                             const FeatureSpec& spec) {
  if (records.empty()) fail("EmptyInput", "no records to encode");
  FeatureTable table;
  table.spec = spec;
  struct Agg {
    std::int64_t count = 0;
    double sum = 0.0, sumsq = 0.0;
  };
  std::unordered_map<std::string, Agg> cust, merch;
  for (const auto& r : records) {
    const double la = std::log1p(r.amount);
    const double hour = static_cast<double>(((r.timestamp % 86400) + 86400) % 86400) / 3600.0;
    const std::int64_t day = r.timestamp >= 0 ? r.timestamp / 86400 : (r.timestamp - 86399) / 86400;
    const double dow = static_cast<double>(((day + 4) % 7 + 7) % 7);  // 0 = Sunday
    std::vector<double> f(spec.feature_dim_transaction, 0.0);
    f[0] = la;
    f[1] = std::sin(kTwoPi * hour / 24.0);
    f[2] = std::cos(kTwoPi * hour / 24.0);
    f[3] = std::sin(kTwoPi * dow / 7.0);
    f[4] = std::cos(kTwoPi * dow / 7.0);
    f[5 + spec.category_index(r.category)] = 1.0;
    table.transaction[r.trans_id] = std::move(f);
    for (auto* agg : {&cust[r.cc_num], &merch[r.merchant]}) {
      agg->count += 1;
      agg->sum += la;
      agg->sumsq += la * la;
    }
  }
  auto summarize = [](const Agg& a) {
    const double mean = a.sum / a.count;
    const double var = std::max(0.0, a.sumsq / a.count - mean * mean);
    return std::vector<double>{std::log1p(1.0 + static_cast<double>(a.count)), mean, std::sqrt(var)};
  };
  for (const auto& [key, agg] : cust) table.customer[key] = summarize(agg);
  for (const auto& [key, agg] : merch) table.merchant[key] = summarize(agg);
  return table;
}

SplitTable split_records(const std::vector<TransactionRecord>& records, double val_fraction,
                         double test_fraction, std::uint64_t /*seed*/) {
  if (val_fraction <= 0.0 || val_fraction >= 1.0 || test_fraction <= 0.0 ||
      test_fraction >= 1.0 || val_fraction + test_fraction >= 1.0)
    fail("InvalidRate", "split fractions must lie in (0,1) and sum below 1");
  std::vector<TransactionRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.trans_id < b.trans_id;
  });
  const auto n = static_cast<std::int64_t>(sorted.size());
  const auto n_val = static_cast<std::int64_t>(std::llround(n * val_fraction));
  const auto n_test = static_cast<std::int64_t>(std::llround(n * test_fraction));
  const auto n_train = n - n_val - n_test;
  if (n_train < 10 || n_val < 10 || n_test < 10)
    fail("InsufficientData", "each split needs at least 10 records (got " +
                                 std::to_string(n_train) + "/" + std::to_string(n_val) + "/" +
                                 std::to_string(n_test) + ")");
  SplitTable split;
  for (std::int64_t i = 0; i < n; ++i) {
    auto& r = sorted[i];
    if (i < n_train) {
      // fraud inside the training window moves to validation
      (r.is_fraud ? split.validation : split.train).push_back(std::move(r));
    } else if (i < n_train + n_val) {
      split.validation.push_back(std::move(r));
    } else {
      split.test.push_back(std::move(r));
    }
  }
  std::stable_sort(split.validation.begin(), split.validation.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return split;
}

namespace {

const char* kCategories[] = {"grocery_pos", "gas_transport", "home",          "shopping_pos",
                             "kids_pets",   "shopping_net",  "entertainment", "food_dining",
                             "personal_care", "health_fitness", "misc_pos",   "travel"};

// Mean transactions per customer per day, sized so the 1000x800x730 default
// lands on the reference corpus volume.
constexpr double kDailyRate = 3.2988;

// Fraud pressure declines over the simulated window: the first ~77% of the
// timeline carries ~1.35x the late-period rate.
constexpr double kEarlyWindowFrac = 0.7692;
constexpr double kEarlyLateRatio = 1.35;

constexpr std::int64_t kWindowStart = 17897LL * 86400;  // 2019-01-01 00:00:00 UTC

}  // namespace

std::vector<TransactionRecord> generate_synthetic(const GeneratorConfig& config) {
  if (config.fraud_rate < 0.0 || config.fraud_rate > 0.5)
    fail("InvalidRate", "fraud_rate must lie in [0, 0.5]");
  if (config.n_customers < 2 || config.n_merchants < 2 || config.n_days < 1)
    fail("InvalidRate", "need at least 2 customers, 2 merchants, 1 day");
  Rng rng(config.seed);

  const int n_cat = static_cast<int>(std::size(kCategories));
  std::vector<std::string> merchants(config.n_merchants);
  std::vector<int> merchant_cat(config.n_merchants);
  for (int m = 0; m < config.n_merchants; ++m) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "m_%05d", m);
    merchants[m] = buf;
    merchant_cat[m] = rng.uniform_int(0, n_cat - 1);
  }

  struct Customer {
    std::string cc;
    std::vector<int> preferred;
    double activity, spend_mu, spend_sigma, peak_hour;
  };
  std::vector<Customer> customers(config.n_customers);
  for (int c = 0; c < config.n_customers; ++c) {
    auto& cu = customers[c];
    char buf[24];
    std::snprintf(buf, sizeof(buf), "cc_%05d", c);
    cu.cc = buf;
    const int n_pref = std::min(config.n_merchants, 5 + rng.uniform_int(0, 10));
    std::set<int> pref;
    while (static_cast<int>(pref.size()) < n_pref)
      pref.insert(rng.uniform_int(0, config.n_merchants - 1));
    cu.preferred.assign(pref.begin(), pref.end());
    cu.activity = rng.lognormal(-0.045, 0.3);  // mean ~1
    cu.spend_mu = rng.normal(std::log(50.0), 0.4);
    cu.spend_sigma = rng.uniform(0.3, 0.6);
    cu.peak_hour = rng.uniform(11.0, 18.0);
  }

  const double w = kEarlyWindowFrac;
  const double early_rate =
      std::min(1.0, config.fraud_rate * kEarlyLateRatio / (w * kEarlyLateRatio + (1.0 - w)));
  const double late_rate = early_rate / kEarlyLateRatio;
  const int early_days = static_cast<int>(std::lround(config.n_days * w));

  std::vector<TransactionRecord> records;
  records.reserve(static_cast<size_t>(config.n_customers * config.n_days * kDailyRate * 1.05));
  for (const auto& cu : customers) {
    for (int day = 0; day < config.n_days; ++day) {
      const double p_fraud = day < early_days ? early_rate : late_rate;
      const int k = rng.poisson(kDailyRate * cu.activity);
      for (int t = 0; t < k; ++t) {
        TransactionRecord r;
        r.cc_num = cu.cc;
        r.is_fraud = rng.uniform() < p_fraud;
        double amount = rng.lognormal(cu.spend_mu, cu.spend_sigma);
        double hour;
        int merchant_idx;
        if (r.is_fraud) {
          amount *= rng.uniform(5.0, 20.0);
          hour = rng.uniform(1.0, 4.0);
          do {
            merchant_idx = rng.uniform_int(0, config.n_merchants - 1);
          } while (std::binary_search(cu.preferred.begin(), cu.preferred.end(), merchant_idx) &&
                   static_cast<int>(cu.preferred.size()) < config.n_merchants);
        } else {
          hour = std::fmod(std::fmod(rng.normal(cu.peak_hour, 4.5), 24.0) + 24.0, 24.0);
          merchant_idx = cu.preferred[rng.uniform_int(0, static_cast<int>(cu.preferred.size()) - 1)];
        }
        r.amount = std::max(0.01, std::round(amount * 100.0) / 100.0);
        r.merchant = merchants[merchant_idx];
        r.category = kCategories[merchant_cat[merchant_idx]];
        r.timestamp = kWindowStart + static_cast<std::int64_t>(day) * 86400 +
                      static_cast<std::int64_t>(hour * 3600.0);
        records.push_back(std::move(r));
      }
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.cc_num < b.cc_num;
  });
  for (size_t i = 0; i < records.size(); ++i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "t_%09zu", i);
    records[i].trans_id = buf;
  }
  return records;
}

}  // namespace fraudgraph
