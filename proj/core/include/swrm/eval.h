#ifndef SWRM_EVAL_H_
#define SWRM_EVAL_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace swrm {

struct MetricsReport {
  double has0_acc = 0.0;
  double has0_f1 = 0.0;
  double non0_acc = 0.0;
  double non0_f1 = 0.0;
  double mae_x100 = 0.0;
  double corr = 0.0;
  // Raw mean absolute error and sample counts, kept for logs.
  double mae = 0.0;
  std::size_t has0_count = 0;
  std::size_t non0_count = 0;
};

// Has0: every sample, negative (< 0) vs non-negative. Non0: zero labels
// dropped, negative vs positive, with a zero prediction counted as positive.
// F1 is averaged over the two classes weighted by label support. Throws
// MetricError on a length mismatch, empty input or non-finite values.
MetricsReport compute_metrics(std::span<const double> preds, std::span<const double> labels);

// Weighted F1 of binary predictions (true = positive class).
double weighted_f1(const std::vector<bool>& pred_positive,
                   const std::vector<bool>& gold_positive);

// Pearson correlation; 0 with a logged warning when either side is constant.
double pearson(std::span<const double> a, std::span<const double> b);

struct StratifiedRates {
  std::optional<double> with_error;
  std::optional<double> without_error;
};

// Non0 misclassification rate inside each stratum; nullopt for a stratum
// with no non-zero labels.
StratifiedRates stratified_misclassification(std::span<const double> preds,
                                             std::span<const double> labels,
                                             const std::vector<bool>& has_sub_error);

// Field-wise mean; throws MetricError for an empty list.
MetricsReport average(std::span<const MetricsReport> reports);

std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);

struct NamedReport {
  std::string name;
  MetricsReport report;
};

// Aligned table, columns Has0-Acc, Has0-F1, Non0-Acc, Non0-F1, MAE, Corr.
// Accuracies and F1 are printed as percentages.
std::string format_metrics_table(std::span<const NamedReport> rows);

}  // namespace swrm

#endif  // SWRM_EVAL_H_
