#include "swrm/eval.h"

#include <glog/logging.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "swrm/errors.h"

namespace swrm {
namespace {

void check_pair(std::span<const double> preds, std::span<const double> labels) {
  if (preds.size() != labels.size()) {
    throw MetricError("predictions and labels differ in length (" +
                      std::to_string(preds.size()) + " vs " + std::to_string(labels.size()) +
                      ")");
  }
  if (preds.empty()) throw MetricError("no samples to evaluate");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!std::isfinite(preds[i]) || !std::isfinite(labels[i])) {
      throw MetricError("non-finite value at sample " + std::to_string(i));
    }
  }
}

double f1_of(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

double weighted_f1(const std::vector<bool>& pred, const std::vector<bool>& gold) {
  if (pred.size() != gold.size()) throw MetricError("weighted_f1: length mismatch");
  if (gold.empty()) throw MetricError("weighted_f1: no samples");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] && pred[i]) ++tp;
    else if (!gold[i] && pred[i]) ++fp;
    else if (gold[i] && !pred[i]) ++fn;
    else ++tn;
  }
  const double pos_support = static_cast<double>(tp + fn);
  const double neg_support = static_cast<double>(tn + fp);
  // The negative class swaps the roles of fp and fn.
  return (pos_support * f1_of(tp, fp, fn) + neg_support * f1_of(tn, fn, fp)) /
         static_cast<double>(gold.size());
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw MetricError("pearson: length mismatch");
  if (a.empty()) throw MetricError("pearson: no samples");
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) {
    LOG(WARNING) << "correlation undefined for a constant sequence; reporting 0";
    return 0.0;
  }
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

MetricsReport compute_metrics(std::span<const double> preds, std::span<const double> labels) {
  check_pair(preds, labels);
  MetricsReport r;
  const std::size_t n = preds.size();

  std::vector<bool> p_has0(n), g_has0(n);
  std::vector<bool> p_non0, g_non0;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p_has0[i] = preds[i] >= 0.0;
    g_has0[i] = labels[i] >= 0.0;
    if (labels[i] != 0.0) {
      p_non0.push_back(preds[i] >= 0.0);
      g_non0.push_back(labels[i] > 0.0);
    }
    abs_sum += std::abs(preds[i] - labels[i]);
  }

  auto accuracy = [](const std::vector<bool>& p, const std::vector<bool>& g) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < g.size(); ++i) hit += p[i] == g[i] ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(g.size());
  };

  r.has0_count = n;
  r.has0_acc = accuracy(p_has0, g_has0);
  r.has0_f1 = weighted_f1(p_has0, g_has0);
  r.non0_count = g_non0.size();
  if (g_non0.empty()) {
    LOG(WARNING) << "every label is zero; Non0 metrics reported as 0";
  } else {
    r.non0_acc = accuracy(p_non0, g_non0);
    r.non0_f1 = weighted_f1(p_non0, g_non0);
  }
  r.mae = abs_sum / static_cast<double>(n);
  r.mae_x100 = 100.0 * r.mae;
  r.corr = pearson(preds, labels);
  return r;
}

StratifiedRates stratified_misclassification(std::span<const double> preds,
                                             std::span<const double> labels,
                                             const std::vector<bool>& has_sub_error) {
  check_pair(preds, labels);
  if (has_sub_error.size() != preds.size()) {
    throw MetricError("stratified_misclassification: stratum flags differ in length");
  }
  std::size_t wrong[2] = {0, 0}, total[2] = {0, 0};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] == 0.0) continue;
    const int s = has_sub_error[i] ? 1 : 0;
    ++total[s];
    if ((preds[i] >= 0.0) != (labels[i] > 0.0)) ++wrong[s];
  }
  auto rate = [&](int s) -> std::optional<double> {
    if (total[s] == 0) return std::nullopt;
    return static_cast<double>(wrong[s]) / static_cast<double>(total[s]);
  };
  return {rate(1), rate(0)};
}

MetricsReport average(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw MetricError("average: no reports");
  MetricsReport m;
  for (const MetricsReport& r : reports) {
    m.has0_acc += r.has0_acc;
    m.has0_f1 += r.has0_f1;
    m.non0_acc += r.non0_acc;
    m.non0_f1 += r.non0_f1;
    m.mae_x100 += r.mae_x100;
    m.corr += r.corr;
    m.mae += r.mae;
  }
  const double n = static_cast<double>(reports.size());
  m.has0_acc /= n;
  m.has0_f1 /= n;
  m.non0_acc /= n;
  m.non0_f1 /= n;
  m.mae_x100 /= n;
  m.corr /= n;
  m.mae /= n;
  m.has0_count = reports.front().has0_count;
  m.non0_count = reports.front().non0_count;
  return m;
}

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["has0_acc"] = r.has0_acc;
  j["has0_f1"] = r.has0_f1;
  j["non0_acc"] = r.non0_acc;
  j["non0_f1"] = r.non0_f1;
  j["mae_x100"] = r.mae_x100;
  j["corr"] = r.corr;
  j["mae"] = r.mae;
  j["has0_count"] = r.has0_count;
  j["non0_count"] = r.non0_count;
  return j.dump();
}

MetricsReport metrics_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.has0_acc = j.at("has0_acc").get<double>();
    r.has0_f1 = j.at("has0_f1").get<double>();
    r.non0_acc = j.at("non0_acc").get<double>();
    r.non0_f1 = j.at("non0_f1").get<double>();
    r.mae_x100 = j.at("mae_x100").get<double>();
    r.corr = j.at("corr").get<double>();
    r.mae = j.value("mae", r.mae_x100 / 100.0);
    r.has0_count = j.value("has0_count", std::size_t{0});
    r.non0_count = j.value("non0_count", std::size_t{0});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw MetricError(std::string("metrics report: ") + e.what());
  }
}

std::string format_metrics_table(std::span<const NamedReport> rows) {
  std::size_t width = 5;
  for (const NamedReport& r : rows) width = std::max(width, r.name.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s  %8s  %8s  %8s  %8s  %8s  %8s\n", static_cast<int>(width),
                "Model", "Has0-Acc", "Has0-F1", "Non0-Acc", "Non0-F1", "MAE", "Corr");
  out << buf;
  for (const NamedReport& r : rows) {
    const MetricsReport& m = r.report;
    std::snprintf(buf, sizeof(buf), "%-*s  %8.2f  %8.2f  %8.2f  %8.2f  %8.2f  %8.2f\n",
                  static_cast<int>(width), r.name.c_str(), 100.0 * m.has0_acc, 100.0 * m.has0_f1,
                  100.0 * m.non0_acc, 100.0 * m.non0_f1, m.mae_x100, 100.0 * m.corr);
    out << buf;
  }
  return out.str();
}

}  // namespace swrm
