#include "screenclean/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace screenclean {

std::string to_string(SplitScheme scheme) {
  switch (scheme) {
    case SplitScheme::TriSplit: return "trisplit";
    case SplitScheme::TwoSplitEq13: return "twosplit-conservative";
    case SplitScheme::TwoSplitLOO: return "twosplit-loo";
  }
  return "unknown";
}

SplitScheme parse_split_scheme(const std::string& name) {
  if (name == "trisplit" || name == "3") return SplitScheme::TriSplit;
  if (name == "twosplit-conservative" || name == "eq13") return SplitScheme::TwoSplitEq13;
  if (name == "twosplit-loo" || name == "loo" || name == "2") return SplitScheme::TwoSplitLOO;
  throw Error(ErrorKind::InvalidArgument, "unknown split scheme '" + name + "'");
}

std::string to_string(ModelSizeRule rule) { return rule == ModelSizeRule::SqrtN ? "sqrt" : "alog"; }

ModelSizeRule parse_model_size_rule(const std::string& name) {
  if (name == "sqrt") return ModelSizeRule::SqrtN;
  if (name == "alog") return ModelSizeRule::ALogN;
  throw Error(ErrorKind::InvalidArgument, "unknown k_n rule '" + name + "'");
}

Index model_size_cap(const PipelineConfig& cfg, Index n_total, Index p, Index smallest_split) {
  if (!(cfg.kn_constant > 0)) throw Error(ErrorKind::InvalidArgument, "k_n constant must be > 0");
  const double raw = cfg.kn_rule == ModelSizeRule::SqrtN
                         ? std::sqrt(static_cast<double>(n_total))
                         : cfg.kn_constant * std::log(static_cast<double>(n_total));
  Index k = std::max<Index>(1, static_cast<Index>(std::floor(raw)));
  k = std::min({k, p, smallest_split - 2});
  if (k < 1) {
    throw Error(ErrorKind::TooFewRows,
                "splits of " + std::to_string(smallest_split) + " rows cannot support any model");
  }
  return k;
}

namespace {

template <typename F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.detail());
  }
}

void check_stage_isolation(const SplitPlan& plan, Index n_total) {
  std::vector<char> seen(static_cast<std::size_t>(n_total), 0);
  for (const auto& group : plan.groups) {
    for (Index row : group) {
      if (seen[static_cast<std::size_t>(row)]) {
        throw Error(ErrorKind::InvalidArgument, "row " + std::to_string(row) + " shared by two stages");
      }
      seen[static_cast<std::size_t>(row)] = 1;
    }
  }
}

Index smallest(const SplitPlan& plan) {
  Index m = plan.groups.front().size();
  for (const auto& g : plan.groups) m = std::min<Index>(m, static_cast<Index>(g.size()));
  return m;
}

}  // namespace

PipelineResult run_screen_and_clean(const Dataset& data, const PipelineConfig& cfg) {
  if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw Error(ErrorKind::InvalidArgument, "alpha must be in (0, 1)");
  const Index n = data.n();
  const Index p = data.p();
  PipelineResult out;
  const SplitMode mode = cfg.splits == SplitScheme::TriSplit ? SplitMode::TriSplit : SplitMode::TwoSplit;
  out.plan = in_stage("split", [&] { return split(n, mode, cfg.seed); });
  check_stage_isolation(out.plan, n);
  out.k_n = in_stage("split", [&] { return model_size_cap(cfg, n, p, smallest(out.plan)); });

  std::vector<Dataset> parts;
  for (std::size_t g = 0; g < out.plan.groups.size(); ++g) {
    const std::string stage = "standardize split " + std::to_string(g + 1);
    parts.push_back(in_stage(stage.c_str(), [&] { return standardize(data.rows(out.plan.groups[g])); }));
  }

  CleanOptions clean_opts;
  clean_opts.alpha = cfg.alpha;
  clean_opts.family = cfg.family;
  clean_opts.n = n;
  clean_opts.k_n = out.k_n;
  clean_opts.p_n = p;

  IndexSet chosen;
  const Dataset* cleaning = nullptr;
  if (cfg.splits == SplitScheme::TwoSplitLOO) {
    LooOptions loo;
    loo.grid_size = cfg.lasso_grid;
    loo.screening = cfg.loo_screening;
    auto sel = in_stage("stage I/II (leave-one-out screen and select)",
                        [&] { return loo_cv_select(parts[0], cfg.screener, out.k_n, loo); });
    out.path = std::move(sel.path);
    out.cv_curve = std::move(sel.curve);
    out.chosen_index = sel.best.path_index;
    out.chosen_lambda = sel.best.lambda;
    chosen = sel.best.support;
    cleaning = &parts[1];
    clean_opts.mode = SplitMode::TriSplit;
  } else {
    out.path = in_stage("stage I (screen)",
                        [&] { return screen(parts[0], cfg.screener, out.k_n, cfg.lasso_grid); });
    const auto& holdout = parts[1];
    auto sel = in_stage("stage II (select)", [&] {
      const auto fits = refit_on_path(parts[0], out.path);
      for (const auto& [index, reason] : fits.warnings) {
        out.warnings.push_back("path entry " + std::to_string(index) + " dropped: " + reason);
      }
      return cv_select(fits, holdout);
    });
    out.cv_curve = std::move(sel.curve);
    out.chosen_index = sel.best.path_index;
    out.chosen_lambda = sel.best.lambda;
    chosen = sel.best.support;
    if (cfg.splits == SplitScheme::TriSplit) {
      cleaning = &parts[2];
      clean_opts.mode = SplitMode::TriSplit;
    } else {
      cleaning = &parts[1];
      clean_opts.mode = SplitMode::TwoSplit;
    }
  }

  out.clean = in_stage("stage III (clean)", [&] { return clean(ols_fit(*cleaning, chosen), clean_opts); });
  if (out.clean.perfect_fit) {
    out.warnings.push_back("zero residual variance on the cleaning split; all screened variables kept");
  }
  return out;
}

AdaptiveLassoResult run_adaptive_lasso(const Dataset& data, const CompetitorConfig& cfg) {
  if (data.n() < 4) throw Error(ErrorKind::TooFewRows, "adaptive lasso competitor needs n >= 4");
  AdaptiveLassoResult out;
  out.plan = in_stage("split", [&] { return split(data.n(), SplitMode::TwoSplit, cfg.seed); });
  const Dataset first = in_stage("standardize split 1", [&] { return standardize(data.rows(out.plan.groups[0])); });
  const Dataset second = in_stage("standardize split 2", [&] { return standardize(data.rows(out.plan.groups[1])); });

  const auto stage1 = in_stage("stage 1 (leave-one-out lasso)",
                               [&] { return loo_lasso_cv(first.x(), first.y(), cfg.lasso_grid); });
  out.lambda_stage1 = stage1.lambda;
  out.pilot_support = stage1.solution.active;
  if (out.pilot_support.empty()) {
    out.empty_pilot = true;
    return out;
  }

  in_stage("stage 2 (adaptive lasso)", [&] {
    const AdaptiveDesign<double> design(second.x(), stage1.solution.beta);
    const auto stage2 = loo_lasso_cv(design.x, second.y(), cfg.lasso_grid);
    out.lambda_stage2 = stage2.lambda;
    for (Index c : stage2.solution.active) out.selected.push_back(design.support[static_cast<std::size_t>(c)]);
    return 0;
  });
  return out;
}

}  // namespace screenclean
