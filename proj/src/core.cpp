#include "screenclean/core.hpp"

#include <algorithm>

namespace screenclean {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ConstantColumn: return "ConstantColumn";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::ModelTooLarge: return "ModelTooLarge";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::ZeroResidualVariance: return "ZeroResidualVariance";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::TooManySubsets: return "TooManySubsets";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::EmptyPilot: return "EmptyPilot";
    case ErrorKind::EmptyModel: return "EmptyModel";
    case ErrorKind::EmptyPath: return "EmptyPath";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

bool is_data_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::ConstantColumn:
    case ErrorKind::TooFewRows:
    case ErrorKind::MissingColumn:
    case ErrorKind::Parse:
    case ErrorKind::Io:
      return true;
    default:
      return false;
  }
}

std::string to_string(SplitMode mode) {
  return mode == SplitMode::TriSplit ? "trisplit" : "twosplit";
}

std::string to_string(ScreenMethod method) {
  switch (method) {
    case ScreenMethod::Lasso: return "lasso";
    case ScreenMethod::Stepwise: return "stepwise";
    case ScreenMethod::Marginal: return "marginal";
  }
  return "unknown";
}

ScreenMethod parse_screen_method(const std::string& name) {
  if (name == "lasso") return ScreenMethod::Lasso;
  if (name == "stepwise" || name == "step") return ScreenMethod::Stepwise;
  if (name == "marginal" || name == "marg") return ScreenMethod::Marginal;
  throw Error(ErrorKind::InvalidArgument, "unknown screener '" + name + "'");
}

bool is_subset(const IndexSet& inner, const IndexSet& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet normalized(IndexSet set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

SplitPlan split(Index n_total, SplitMode mode, std::uint64_t seed) {
  const Index groups = mode == SplitMode::TriSplit ? 3 : 2;
  if (n_total < groups) {
    throw Error(ErrorKind::TooFewRows, "need at least " + std::to_string(groups) +
                                          " rows to split, got " + std::to_string(n_total));
  }
  std::vector<Index> perm(static_cast<std::size_t>(n_total));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  for (Index i = n_total - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }

  SplitPlan plan;
  plan.mode = mode;
  plan.seed = seed;
  const Index base = n_total / groups;
  const Index extra = n_total % groups;
  auto cursor = perm.begin();
  for (Index g = 0; g < groups; ++g) {
    const Index size = base + (g < extra ? 1 : 0);
    IndexSet group(cursor, cursor + size);
    std::sort(group.begin(), group.end());
    plan.groups.push_back(std::move(group));
    cursor += size;
  }
  return plan;
}

std::uint64_t binomial_capped(Index n, Index k, std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  // result stays an exact integer at every step: C(n-k+i, i)
  unsigned __int128 result = 1;
  for (Index i = 1; i <= k; ++i) {
    result = result * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (result > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(result);
}

}  // namespace screenclean
