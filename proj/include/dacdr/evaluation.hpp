#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dacdr/model.hpp"

namespace dacdr {

// Rank-based AUC with ties sharing their average rank. Throws MetricError
// unless both classes are present.
double auc(const std::vector<double>& scores, const std::vector<double>& labels);

struct RatingErrors {
  double mae = 0.0;
  double rmse = 0.0;
};

// Throws MetricError on empty input.
RatingErrors mae_rmse(const std::vector<double>& pred, const std::vector<double>& target);

struct EvalReport {
  std::string task;  // "logit" or "rating"
  std::size_t samples = 0;
  double auc = 0.0;       // logit task
  double log_loss = 0.0;  // logit task
  double mae = 0.0;       // rating task
  double rmse = 0.0;      // rating task
};

// Per-sample predictions: sigmoid scores for the logit task, ratings clamped
// into [1, 5] for the rating task.
std::vector<double> predict(Model& model, const std::vector<SampleInput>& samples);

// Metric bundle for already computed predictions; task is "logit" or "rating".
EvalReport report_from_predictions(const std::string& task,
                                   const std::vector<double>& preds,
                                   const std::vector<double>& labels);

EvalReport evaluate(Model& model, const std::vector<SampleInput>& samples);

// Fixed-width text block for terminal output.
std::string format_table(const EvalReport& r);

}  // namespace dacdr
