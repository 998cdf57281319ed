#pragma once

#include <cstdint>
#include <vector>

namespace ses::eval {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct ROCCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1), both axes non-decreasing
  double auc = 0.0;              // trapezoidal area, equals the rank-statistic AUC
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool degenerate = false;  // a zero-denominator metric was defined as 0
};

struct ConfusionSummary {
  ClassMetrics low;   // class 0
  ClassMetrics high;  // class 1
};

struct AgreementStats {
  double percent_agreement = 0.0;
  double kappa = 0.0;
  bool degenerate = false;  // expected agreement is 1, kappa defined as 0
};

// Mann-Whitney rank AUC; tied scores contribute 1/2. Throws
// std::invalid_argument unless both classes are present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Threshold sweep over distinct score values.
ROCCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

ConfusionSummary precision_recall_f1(const std::vector<int>& pred_labels,
                                     const std::vector<int>& true_labels);

AgreementStats agreement(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace ses::eval
