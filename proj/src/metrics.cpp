#include "fraudgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fraudgraph/error.hpp"

namespace fraudgraph {

namespace {

void check_lengths(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) fail("LengthMismatch", "scores and labels differ in length");
  if (scores.empty()) fail("LengthMismatch", "empty inputs");
}

long count_positives(const std::vector<bool>& labels) {
  return std::count(labels.begin(), labels.end(), true);
}

// indices sorted by score descending, stable
std::vector<size_t> order_desc(const std::vector<double>& scores) {
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

std::vector<bool> classify(const std::vector<double>& scores, double threshold) {
  if (!std::isfinite(threshold)) fail("InvalidRate", "threshold must be finite");
  std::vector<bool> verdicts(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) verdicts[i] = scores[i] >= threshold;
  return verdicts;
}

ConfusionRates confusion_and_rates(const std::vector<bool>& verdicts,
                                   const std::vector<bool>& labels) {
  if (verdicts.size() != labels.size()) fail("LengthMismatch", "verdicts and labels differ");
  ConfusionRates r;
  for (size_t i = 0; i < verdicts.size(); ++i) {
    if (verdicts[i] && labels[i]) ++r.tp;
    else if (verdicts[i]) ++r.fp;
    else if (labels[i]) ++r.fn;
    else ++r.tn;
  }
  r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

BestThreshold best_threshold(const std::vector<double>& scores, const std::vector<bool>& labels) {
  check_lengths(scores, labels);
  const long pos = count_positives(labels);
  if (pos == 0 || pos == static_cast<long>(labels.size()))
    fail("DegenerateLabels", "need at least one positive and one negative label");

  std::vector<double> distinct = scores;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> candidates;
  candidates.push_back(distinct.front() - 1.0);  // classify everything Fraud
  for (size_t i = 0; i + 1 < distinct.size(); ++i)
    candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  candidates.push_back(distinct.back() + 1.0);  // classify everything NonFraud

  BestThreshold best;
  best.f1 = -1.0;
  for (double thr : candidates) {
    const auto rates = confusion_and_rates(classify(scores, thr), labels);
    best.curve.push_back({thr, rates.f1});
    if (rates.f1 > best.f1 || (rates.f1 == best.f1 && thr > best.threshold)) {
      best.f1 = rates.f1;
      best.threshold = thr;
    }
  }
  return best;
}

Curve roc_curve_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  check_lengths(scores, labels);
  const long pos = count_positives(labels);
  const long neg = static_cast<long>(labels.size()) - pos;
  if (pos == 0 || neg == 0) fail("DegenerateLabels", "both classes required for a ROC curve");

  const auto idx = order_desc(scores);
  Curve curve;
  curve.points.push_back({0.0, 0.0});
  long tp = 0, fp = 0;
  double auc = 0.0;
  size_t i = 0;
  while (i < idx.size()) {
    // process ties as one block so tied scores contribute a single segment
    const double s = scores[idx[i]];
    long dtp = 0, dfp = 0;
    while (i < idx.size() && scores[idx[i]] == s) {
      (labels[idx[i]] ? dtp : dfp) += 1;
      ++i;
    }
    const double fpr0 = static_cast<double>(fp) / neg, tpr0 = static_cast<double>(tp) / pos;
    tp += dtp;
    fp += dfp;
    const double fpr1 = static_cast<double>(fp) / neg, tpr1 = static_cast<double>(tp) / pos;
    auc += (fpr1 - fpr0) * 0.5 * (tpr0 + tpr1);  // trapezoid
    curve.points.push_back({fpr1, tpr1});
  }
  curve.auc = auc;
  return curve;
}

Curve pr_curve_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  check_lengths(scores, labels);
  const long pos = count_positives(labels);
  if (pos == 0) fail("NoPositives", "at least one positive label required");

  const auto idx = order_desc(scores);
  Curve curve;
  long tp = 0, fp = 0;
  double ap = 0.0;
  double prev_recall = 0.0;
  size_t i = 0;
  while (i < idx.size()) {
    const double s = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == s) {
      (labels[idx[i]] ? tp : fp) += 1;
      ++i;
    }
    const double recall = static_cast<double>(tp) / pos;
    const double precision = static_cast<double>(tp) / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    curve.points.push_back({recall, precision});
  }
  curve.auc = ap;
  return curve;
}

}  // namespace fraudgraph
