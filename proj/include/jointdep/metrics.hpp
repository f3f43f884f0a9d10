#pragma once

#include "jointdep/centering.hpp"

#include <string>
#include <vector>

namespace jointdep {

/// Partition of {0..d-1} into disjoint nonempty blocks.
struct SetPartition {
    std::vector<std::vector<int>> blocks;
    int block_count() const { return static_cast<int>(blocks.size()); }
};

/// All set partitions of {0..d-1} in restricted-growth-string lexicographic
/// order. 1 <= d <= 10 (Bell(10) = 115975).
std::vector<SetPartition> enumerate_set_partitions(int d);

/// Bell number for 0 <= d <= 10.
long long bell_number(int d);

enum class MetricKind { kDcov, kDvar, kJdcov, kJdcovScaled, kJdcovRank, kCumulant, kTmt };

std::string metric_kind_name(MetricKind kind);

struct MetricValue {
    double value = 0.0;
    MetricKind kind = MetricKind::kDcov;
    Estimator estimator = Estimator::kVStat;
    double c = 0.0;  // meaningful only for the jdcov family
};

/// d-th order squared distance covariance. V form: n^-2 sum_{k,l} prod_i U_i(k,l);
/// U form: (n(n-3))^-1 sum_{k!=l} prod_i U~_i(k,l). All matrices must share n
/// and a centering kind matching the estimator.
MetricValue dcov_sq_high_order(const std::vector<CenteredMatrix>& mats, Estimator estimator);

/// Squared distance variance of one group (the metric of a group with itself).
MetricValue dvar(const CenteredMatrix& mat);

/// Joint squared distance covariance with weight parameter c >= 0.
MetricValue jdcov_sq(const std::vector<CenteredMatrix>& mats, double c, Estimator estimator);

/// Scale-invariant variant: each centered matrix is divided by the group's
/// sample distance standard deviation before combining. Degenerate groups
/// (distance variance ~ 0) are rejected.
MetricValue jdcov_sq_scaled(const std::vector<CenteredMatrix>& mats, double c, Estimator estimator);

/// Rank-based variant: empirical-CDF transform of every column, then jdcov_sq.
MetricValue jdcov_sq_rank(const Dataset& ds, double c, Estimator estimator);

/// Joint distance cumulant (V-centered matrices only): signed sum over all set
/// partitions of products of block moments. 2 <= d <= 10.
MetricValue distance_cumulant(const std::vector<CenteredMatrix>& mats);

/// Chained pairwise baseline: sum over i of dCov^2(group i, concatenation of
/// groups i+1..d). Sensitive to group order by construction.
MetricValue t_mt(const Dataset& ds, Estimator estimator);

/// Centered matrices for every group of the dataset under one estimator.
std::vector<CenteredMatrix> centered_group_matrices(const Dataset& ds, Estimator estimator);

/// A fully specified statistic: which metric plus its configuration.
/// The jdcov family reads all of MetricConfig; kDcov/kTmt/kCumulant ignore c
/// (and kCumulant always uses the V form).
struct StatisticSpec {
    MetricKind kind = MetricKind::kJdcov;
    MetricConfig config;
};

/// Squared-metric value of the configured statistic on a dataset.
double compute_statistic(const Dataset& ds, const StatisticSpec& spec);

}  // namespace jointdep
