#pragma once

#include <vector>

namespace fraudgraph {

struct ConfusionRates {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct ThresholdPoint {
  double threshold, f1;
};

struct BestThreshold {
  double threshold = 0.0;
  double f1 = 0.0;
  std::vector<ThresholdPoint> curve;
};

struct CurvePoint {
  double x, y;  // ROC: (FPR, TPR); PR: (recall, precision)
};

struct Curve {
  std::vector<CurvePoint> points;
  double auc = 0.0;
};

// score >= threshold means Fraud
std::vector<bool> classify(const std::vector<double>& scores, double threshold);

ConfusionRates confusion_and_rates(const std::vector<bool>& verdicts,
                                   const std::vector<bool>& labels);

// F1-maximizing threshold over midpoints of consecutive distinct scores plus
// extremes; ties break toward the larger threshold.
BestThreshold best_threshold(const std::vector<double>& scores, const std::vector<bool>& labels);

Curve roc_curve_auc(const std::vector<double>& scores, const std::vector<bool>& labels);

// AUC-PR as average precision (step-wise sum), swept from the highest score
Curve pr_curve_auc(const std::vector<double>& scores, const std::vector<bool>& labels);

}  // namespace fraudgraph
