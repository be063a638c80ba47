#pragma once

#include "screenclean/cleaner.hpp"
#include "screenclean/core.hpp"
#include "screenclean/screeners.hpp"
#include "screenclean/selection.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace screenclean {

enum class SplitScheme {
  /// Screen on D1, select by held-out CV on D2, clean on D3 with z_{alpha/(2m)}.
  TriSplit,
  /// Screen on D1, select and clean on D2 with the conservative constant.
  TwoSplitEq13,
  /// Screen and select by leave-one-out on D1, clean on D2 with z_{alpha/(2m)}.
  TwoSplitLOO,
};

enum class ModelSizeRule { SqrtN, ALogN };

std::string to_string(SplitScheme scheme);
SplitScheme parse_split_scheme(const std::string& name);
std::string to_string(ModelSizeRule rule);
ModelSizeRule parse_model_size_rule(const std::string& name);

struct PipelineConfig {
  ScreenMethod screener = ScreenMethod::Lasso;
  SplitScheme splits = SplitScheme::TriSplit;
  double alpha = 0.05;
  ModelSizeRule kn_rule = ModelSizeRule::SqrtN;
  /// A in k_n = A log n.
  double kn_constant = 5.0;
  std::uint64_t seed = 0;
  int lasso_grid = 100;
  QuantileFamily family = QuantileFamily::Normal;
  LooScreening loo_screening = LooScreening::Rescreen;
};

/// k_n from the total sample size, capped so every stage can still fit
/// least squares with at least one residual degree of freedom.
Index model_size_cap(const PipelineConfig& cfg, Index n_total, Index p, Index smallest_split);

struct PipelineResult {
  CleanResult clean;
  SplitPlan plan;
  Index k_n = 0;
  ScreenPath path;
  std::vector<CvPoint> cv_curve;
  Index chosen_index = 0;
  double chosen_lambda = 0;
  std::vector<std::string> warnings;
};

/// Full screen-select-clean run. `data` is raw; each split is standardized on
/// its own. Deterministic in (data, cfg).
PipelineResult run_screen_and_clean(const Dataset& data, const PipelineConfig& cfg);

struct CompetitorConfig {
  std::uint64_t seed = 0;
  int lasso_grid = 100;
};

struct AdaptiveLassoResult {
  IndexSet selected;
  IndexSet pilot_support;
  double lambda_stage1 = 0;
  double lambda_stage2 = 0;
  bool empty_pilot = false;
  SplitPlan plan;
};

/// Two-stage adaptive lasso: LOO-tuned lasso on half 1 gives the pilot; the
/// LOO-tuned adaptive lasso with weights 1/|pilot_j| on half 2 selects.
AdaptiveLassoResult run_adaptive_lasso(const Dataset& data, const CompetitorConfig& cfg);

}  // namespace screenclean
