#include "dacdr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dacdr/errors.hpp"
#include "dacdr/training.hpp"

namespace dacdr {

double auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size())
    throw ArgumentError("auc: scores and labels must align");
  std::size_t pos = 0, neg = 0;
  for (double y : labels) {
    if (y == 1.0)
      ++pos;
    else if (y == 0.0)
      ++neg;
    else
      throw ArgumentError("auc: labels must be 0 or 1");
  }
  if (pos == 0 || neg == 0)
    throw MetricError("auc is undefined when only one class is present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // ranks are 1-based; tied scores share the average rank of their run
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1.0) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  const double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

RatingErrors mae_rmse(const std::vector<double>& pred,
                      const std::vector<double>& target) {
  if (pred.size() != target.size())
    throw ArgumentError("mae_rmse: predictions and targets must align");
  if (pred.empty()) throw MetricError("rating metrics need at least one sample");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    abs_sum += std::fabs(d);
    sq_sum += d * d;
  }
  RatingErrors e;
  e.mae = abs_sum / static_cast<double>(pred.size());
  e.rmse = std::sqrt(sq_sum / static_cast<double>(pred.size()));
  return e;
}

std::vector<double> predict(Model& model, const std::vector<SampleInput>& samples) {
  const bool rating = model.config().output_mode == OutputMode::rating;
  std::vector<double> out;
  out.reserve(samples.size());
  for (const SampleInput& s : samples) {
    const ForwardTrace t = model.forward_sample(s);
    out.push_back(rating ? std::min(5.0, std::max(1.0, t.score)) : t.y_hat);
  }
  return out;
}

EvalReport report_from_predictions(const std::string& task,
                                   const std::vector<double>& preds,
                                   const std::vector<double>& labels) {
  if (preds.empty()) throw MetricError("evaluate: no samples");
  if (task != "logit" && task != "rating")
    throw ArgumentError("report_from_predictions: unknown task '" + task + "'");
  EvalReport r;
  r.task = task;
  r.samples = preds.size();
  if (task == "rating") {
    const RatingErrors e = mae_rmse(preds, labels);
    r.mae = e.mae;
    r.rmse = e.rmse;
  } else {
    r.auc = auc(preds, labels);
    r.log_loss = bce_loss(preds, labels);
  }
  return r;
}

EvalReport evaluate(Model& model, const std::vector<SampleInput>& samples) {
  if (samples.empty()) throw MetricError("evaluate: no samples");
  std::vector<double> labels;
  labels.reserve(samples.size());
  for (const SampleInput& s : samples) labels.push_back(s.label);
  const bool rating = model.config().output_mode == OutputMode::rating;
  return report_from_predictions(rating ? "rating" : "logit",
                                 predict(model, samples), labels);
}

std::string format_table(const EvalReport& r) {
  char line[96];
  std::string out;
  auto add_num = [&out, &line](const char* name, double v) {
    std::snprintf(line, sizeof line, "  %-10s %12.6f\n", name, v);
    out += line;
  };
  std::snprintf(line, sizeof line, "  %-10s %12s\n", "metric", "value");
  out += line;
  std::snprintf(line, sizeof line, "  %-10s %12s\n", "task", r.task.c_str());
  out += line;
  std::snprintf(line, sizeof line, "  %-10s %12zu\n", "samples", r.samples);
  out += line;
  if (r.task == "rating") {
    add_num("mae", r.mae);
    add_num("rmse", r.rmse);
  } else {
    add_num("auc", r.auc);
    add_num("log_loss", r.log_loss);
  }
  return out;
}

}  // namespace dacdr
