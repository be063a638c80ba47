#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace screenclean {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Sorted, duplicate-free, zero-based column indices.
using IndexSet = std::vector<Index>;

enum class SplitMode { TriSplit, TwoSplit };

enum class ScreenMethod { Lasso, Stepwise, Marginal };

std::string to_string(SplitMode mode);
std::string to_string(ScreenMethod method);
ScreenMethod parse_screen_method(const std::string& name);

/// True when `inner` is a subset of `outer` (both sorted).
bool is_subset(const IndexSet& inner, const IndexSet& outer);

/// Elements of `a` not in `b` (both sorted).
IndexSet set_difference(const IndexSet& a, const IndexSet& b);

/// Sorts and removes duplicates.
IndexSet normalized(IndexSet set);

}  // namespace screenclean
