#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fraudgraph/dataio.hpp"
#include "helpers.hpp"

using namespace fraudgraph;

namespace {

const char* kHeader = "trans_date_trans_time,cc_num,merchant,category,amt,is_fraud,trans_num\n";

std::vector<TransactionRecord> parse_text(const testutil::TempDir& dir, const std::string& body) {
  const auto path = dir.file("data.csv");
  testutil::write_file(path, std::string(kHeader) + body);
  return parse_csv(path);
}

}  // namespace

TEST_CASE("parse_csv maps fields") {
  testutil::TempDir dir;
  const auto records = parse_text(dir, "2019-01-01 00:00:44,cc1,m1,grocery,107.23,0,t1\n");
  REQUIRE(records.size() == 1);
  CHECK(records[0].trans_id == "t1");
  CHECK(records[0].cc_num == "cc1");
  CHECK(records[0].merchant == "m1");
  CHECK(records[0].category == "grocery");
  CHECK(records[0].amount == doctest::Approx(107.23));
  CHECK_FALSE(records[0].is_fraud);
  CHECK(records[0].timestamp % 60 == 44);
  CHECK(format_datetime(records[0].timestamp) == "2019-01-01 00:00:44");
}

TEST_CASE("parse_csv header only gives empty list") {
  testutil::TempDir dir;
  CHECK(parse_text(dir, "").empty());
}

TEST_CASE("parse_csv error paths") {
  testutil::TempDir dir;
  CHECK_THROWS_WITH_AS(parse_text(dir, "2019-01-01 00:00:44,cc1,m1,grocery,-5.00,0,t1\n"),
                       doctest::Contains("ParseError"), Error);
  CHECK_THROWS_WITH_AS(parse_text(dir, "not-a-date,cc1,m1,grocery,5.00,0,t1\n"),
                       doctest::Contains("ParseError"), Error);
  CHECK_THROWS_WITH_AS(
      parse_text(dir, "2019-01-01 00:00:44,cc1,m1,grocery,5.00,0,t1\n"
                      "2019-01-01 00:00:45,cc1,m1,grocery,5.00,0,t1\n"),
      doctest::Contains("row 3"), Error);

  const auto missing = dir.file("missing.csv");
  testutil::write_file(missing, "a,b,c\n1,2,3\n");
  CHECK_THROWS_WITH_AS(parse_csv(missing), doctest::Contains("MissingColumn"), Error);

  const auto empty = dir.file("empty.csv");
  testutil::write_file(empty, "");
  CHECK_THROWS_WITH_AS(parse_csv(empty), doctest::Contains("EmptyFile"), Error);
}

TEST_CASE("csv round trip is field exact") {
  testutil::TempDir dir;
  const auto records = generate_synthetic({.n_customers = 5, .n_merchants = 4, .n_days = 10,
                                           .fraud_rate = 0.1, .seed = 3});
  REQUIRE(!records.empty());
  const auto path = dir.file("round.csv");
  write_csv(path, records);
  CHECK(parse_csv(path) == records);
}

TEST_CASE("encode_features transaction encoding") {
  TransactionRecord r{"t1", parse_datetime("2019-01-06 00:00:00"), "cc1", "m1", "grocery", 10.0,
                      false};
  const auto spec = FeatureSpec::from_records({r});
  CHECK(spec.feature_dim_transaction == 5 + 2);  // grocery + reserved OTHER
  const auto table = encode_features({r}, spec);
  const auto& f = table.transaction.at("t1");
  CHECK(f[0] == doctest::Approx(std::log1p(10.0)));
  CHECK(f[1] == doctest::Approx(0.0).epsilon(1e-12));  // midnight: sin 0
  CHECK(f[2] == doctest::Approx(1.0));                 // cos 1
  // 2019-01-06 is a Sunday: day-of-week terms (sin 0, cos 1)
  CHECK(f[3] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f[4] == doctest::Approx(1.0));
  CHECK(f[5 + spec.category_index("grocery")] == 1.0);
}

TEST_CASE("unknown category maps to the reserved slot") {
  TransactionRecord r{"t1", 0, "cc1", "m1", "grocery", 10.0, false};
  const auto spec = FeatureSpec::from_records({r});
  CHECK(spec.category_index("never_seen") ==
        static_cast<int>(spec.category_vocabulary.size()) - 1);
  CHECK(spec.category_vocabulary.back() == kOtherCategory);
}

TEST_CASE("customer aggregates from constant amounts") {
  std::vector<TransactionRecord> records;
  for (int i = 0; i < 3; ++i)
    records.push_back({"t" + std::to_string(i), i * 3600, "cc1", "m" + std::to_string(i),
                       "grocery", 10.0, false});
  const auto table = encode_features(records, FeatureSpec::from_records(records));
  const auto& f = table.customer.at("cc1");
  CHECK(f[0] == doctest::Approx(std::log1p(4.0)));  // log1p(1 + count)
  CHECK(f[1] == doctest::Approx(std::log1p(10.0)).epsilon(1e-12));
  CHECK(f[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(encode_features({}, FeatureSpec::from_records(records)),
                       doctest::Contains("EmptyInput"), Error);
}

TEST_CASE("split is chronological with fraud purge") {
  std::vector<TransactionRecord> records;
  for (int i = 0; i < 100; ++i)
    records.push_back({"t" + std::to_string(i), i * 1000, "cc1", "m1", "grocery", 10.0, false});

  SUBCASE("pure arithmetic split") {
    const auto split = split_records(records, 0.2, 0.2, 1);
    CHECK(split.train.size() == 60);
    CHECK(split.validation.size() == 20);
    CHECK(split.test.size() == 20);
    // chronological: every train timestamp precedes every test timestamp
    CHECK(split.train.back().timestamp < split.test.front().timestamp);
  }

  SUBCASE("train fraud moves to validation") {
    for (int i : {5, 17, 23, 40, 59}) records[i].is_fraud = true;
    const auto split = split_records(records, 0.2, 0.2, 1);
    CHECK(split.train.size() == 55);
    CHECK(split.validation.size() == 25);
    CHECK(split.test.size() == 20);
    for (const auto& r : split.train) CHECK_FALSE(r.is_fraud);
  }

  SUBCASE("no id in two splits") {
    const auto split = split_records(records, 0.3, 0.3, 1);
    std::set<std::string> ids;
    for (const auto* part : {&split.train, &split.validation, &split.test})
      for (const auto& r : *part) CHECK(ids.insert(r.trans_id).second);
    CHECK(ids.size() == records.size());
  }

  CHECK_THROWS_WITH_AS(split_records({records.begin(), records.begin() + 20}, 0.2, 0.2, 1),
                       doctest::Contains("InsufficientData"), Error);
  CHECK_THROWS_WITH_AS(split_records(records, 0.7, 0.5, 1), doctest::Contains("InvalidRate"),
                       Error);
}

TEST_CASE("aggregate features never read other splits") {
  auto records = generate_synthetic({.n_customers = 8, .n_merchants = 6, .n_days = 30,
                                     .fraud_rate = 0.05, .seed = 9});
  auto split = split_records(records, 0.2, 0.2, 1);
  const auto spec = FeatureSpec::from_records(split.train);
  const auto before = encode_features(split.train, spec);
  // poison validation/test amounts; train features must not move
  for (auto& r : split.validation) r.amount *= 1000.0;
  for (auto& r : split.test) r.amount *= 1000.0;
  const auto after = encode_features(split.train, spec);
  CHECK(before.customer == after.customer);
  CHECK(before.merchant == after.merchant);
}

TEST_CASE("generator determinism and degenerate rate") {
  const GeneratorConfig cfg{.n_customers = 10, .n_merchants = 8, .n_days = 20,
                            .fraud_rate = 0.0, .seed = 42};
  const auto a = generate_synthetic(cfg);
  const auto b = generate_synthetic(cfg);
  CHECK(a == b);
  for (const auto& r : a) CHECK_FALSE(r.is_fraud);
  CHECK(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) {
    return x.timestamp < y.timestamp;
  }));
  CHECK_THROWS_WITH_AS(generate_synthetic({.fraud_rate = 0.9}), doctest::Contains("InvalidRate"),
                       Error);
}

TEST_CASE("generator label rate converges") {
  const double rate = 0.01;
  const auto records = generate_synthetic({.n_customers = 60, .n_merchants = 40, .n_days = 60,
                                           .fraud_rate = rate, .seed = 7});
  REQUIRE(records.size() >= 10000);
  double fraud = 0;
  for (const auto& r : records) fraud += r.is_fraud;
  const double observed = fraud / records.size();
  const double sigma = std::sqrt(rate * (1 - rate) / records.size());
  CHECK(std::abs(observed - rate) < 3.0 * sigma);
}

TEST_CASE("fraud perturbs amount, hour and merchant") {
  const auto records = generate_synthetic({.n_customers = 40, .n_merchants = 30, .n_days = 40,
                                           .fraud_rate = 0.05, .seed = 13});
  double genuine_sum = 0, fraud_sum = 0;
  long genuine_n = 0, fraud_n = 0;
  for (const auto& r : records) {
    const long hour = ((r.timestamp % 86400) + 86400) % 86400 / 3600;
    if (r.is_fraud) {
      fraud_sum += r.amount;
      ++fraud_n;
      CHECK(hour >= 1);
      CHECK(hour < 4);
    } else {
      genuine_sum += r.amount;
      ++genuine_n;
    }
  }
  REQUIRE(fraud_n > 20);
  CHECK(fraud_sum / fraud_n > 4.0 * genuine_sum / genuine_n);
}
