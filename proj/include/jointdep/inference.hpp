#pragma once

#include "jointdep/metrics.hpp"
#include "jointdep/rng.hpp"

#include <cstdint>

namespace jointdep {

enum class PValueRule { kPaper, kAddOne };

/// Configuration of the marginal-bootstrap joint independence test.
struct BootstrapConfig {
    int B = 500;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    StatisticSpec statistic;
    PValueRule rule = PValueRule::kPaper;
    int threads = 0;  // <= 0: hardware concurrency
};

/// Configuration of the energy-distance normality test.
struct NormalityTestConfig {
    int bootstrap_replicates = 200;
    int mc_draws = 2000;  // Monte Carlo sample for multivariate expected distances
    std::uint64_t seed = 0;
};

/// k-th order statistic quantile: the ceil(q*B)-th smallest value.
double empirical_quantile(std::vector<double> values, double q);

/// Resamples each group's rows independently with replacement (one index draw
/// per group per observation), emulating the mutual-independence null.
Dataset resample_groups_independently(const Dataset& ds, RngStream& stream);

/// Marginal-bootstrap test of mutual independence of the dataset's groups.
/// The observed statistic is n times the configured squared metric; each
/// replicate recomputes it on an independently resampled dataset.
TestResult bootstrap_joint_test(const Dataset& ds, const BootstrapConfig& cfg);

/// Energy-distance statistic for joint normality of standardized data
/// (n rows, p columns), exposed for testing.
double energy_normality_statistic(const Eigen::MatrixXd& standardized, const Eigen::MatrixXd& reference_draws);

/// E|a - Z| for scalar standard normal Z (closed form).
double expected_abs_normal(double a);

/// E|Z - Z'| for independent standard normal vectors in dimension p.
double expected_normal_pair_distance(int p);

/// Center columns and whiten by the inverse Cholesky factor of the sample
/// covariance. Throws if the covariance is numerically singular.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x);

/// p-value of the energy-distance test for joint normality, calibrated by a
/// parametric bootstrap of standard normal samples of the same shape.
double energy_normality_pvalue(const Eigen::MatrixXd& pooled, const NormalityTestConfig& cfg);

/// Heuristic weight parameter mapped from the joint-normality p-value:
/// c = 1 + sign(p - alpha) * |p - alpha|^(1/4), always in (0,2).
double c_from_normality_pvalue(double p, double alpha);

/// Runs the normality test on the pooled data and maps its p-value to c.
double choose_c_data_driven(const Dataset& ds, double alpha, const NormalityTestConfig& cfg);

}  // namespace jointdep
