#include "jointdep/inference.hpp"

#include "jointdep/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jointdep {

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("empirical_quantile: q must lie in (0,1)");
    std::sort(values.begin(), values.end());
    const auto b = static_cast<double>(values.size());
    auto k = static_cast<std::size_t>(std::ceil(q * b));
    k = std::min(std::max<std::size_t>(k, 1), values.size());
    return values[k - 1];
}

Dataset resample_groups_independently(const Dataset& ds, RngStream& stream) {
    Dataset out;
    out.groups = ds.groups;
    out.values.resize(ds.values.rows(), ds.values.cols());
    const auto n = static_cast<std::uint64_t>(ds.n());
    for (int g = 0; g < ds.d(); ++g) {
        const auto [first, last] = ds.groups.columns(g);
        const int width = last - first + 1;
        for (Eigen::Index i = 0; i < ds.values.rows(); ++i) {
            const auto src = static_cast<Eigen::Index>(stream.next_below(n));
            out.values.block(i, first, 1, width) = ds.values.block(src, first, 1, width);
        }
    }
    return out;
}

namespace {

double p_value_from_replicates(const std::vector<double>& replicates, double observed, PValueRule rule) {
    std::size_t greater = 0, greater_equal = 0;
    for (double r : replicates) {
        if (r > observed) ++greater;
        if (r >= observed) ++greater_equal;
    }
    const auto b = static_cast<double>(replicates.size());
    if (rule == PValueRule::kPaper) return static_cast<double>(greater) / b;
    return (1.0 + static_cast<double>(greater_equal)) / (b + 1.0);
}

}  // namespace

TestResult bootstrap_joint_test(const Dataset& ds, const BootstrapConfig& cfg) {
    validate(ds, true);
    if (cfg.B < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("bootstrap: alpha must lie in (0,1)");
    if (cfg.statistic.config.estimator == Estimator::kUCentered && ds.n() < 4) {
        throw std::invalid_argument("bootstrap: U-centered statistics require n >= 4");
    }

    TestResult result;
    result.seed = cfg.seed;
    result.B = cfg.B;
    result.alpha = cfg.alpha;
    const double n = static_cast<double>(ds.n());
    result.statistic = n * compute_statistic(ds, cfg.statistic);

    result.replicates.assign(static_cast<std::size_t>(cfg.B), 0.0);
    const RngStream root(cfg.seed);
    parallel_for(static_cast<std::size_t>(cfg.B), cfg.threads, [&](std::size_t b) {
        RngStream stream = root.child(b);
        const Dataset resampled = resample_groups_independently(ds, stream);
        result.replicates[b] = n * compute_statistic(resampled, cfg.statistic);
    });

    result.p_value = p_value_from_replicates(result.replicates, result.statistic, cfg.rule);
    result.reject = result.statistic > empirical_quantile(result.replicates, 1.0 - cfg.alpha);
    return result;
}

double expected_abs_normal(double a) { return 2.0 * normal_pdf(a) + a * (2.0 * normal_cdf(a) - 1.0); }

double expected_normal_pair_distance(int p) {
    if (p < 1) throw std::invalid_argument("dimension must be >= 1");
    // E|Z - Z'| = 2 Gamma((p+1)/2) / Gamma(p/2).
    return 2.0 * std::exp(std::lgamma((p + 1) / 2.0) - std::lgamma(p / 2.0));
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (n <= p) throw std::invalid_argument("normality test: need n > number of pooled columns");
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("normality test: sample covariance is numerically singular; "
                                    "drop collinear columns or reduce dimensionality");
    }
    // y = centered * L^-T, so sample covariance of y is the identity.
    return llt.matrixL().solve(centered.transpose()).transpose();
}

double energy_normality_statistic(const Eigen::MatrixXd& standardized, const Eigen::MatrixXd& reference_draws) {
    const Eigen::Index n = standardized.rows();
    const Eigen::Index p = standardized.cols();

    double mean_to_normal = 0.0;
    if (p == 1) {
        for (Eigen::Index j = 0; j < n; ++j) mean_to_normal += expected_abs_normal(standardized(j, 0));
    } else {
        if (reference_draws.cols() != p || reference_draws.rows() < 1) {
            throw std::invalid_argument("normality test: reference draws have wrong shape");
        }
        const auto m = static_cast<double>(reference_draws.rows());
        for (Eigen::Index j = 0; j < n; ++j) {
            double acc = 0.0;
            for (Eigen::Index r = 0; r < reference_draws.rows(); ++r) {
                acc += (standardized.row(j) - reference_draws.row(r)).norm();
            }
            mean_to_normal += acc / m;
        }
    }
    mean_to_normal /= static_cast<double>(n);

    double mean_within = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (j != k) mean_within += (standardized.row(j) - standardized.row(k)).norm();
        }
    }
    mean_within /= static_cast<double>(n) * static_cast<double>(n);

    return static_cast<double>(n) *
           (2.0 * mean_to_normal - expected_normal_pair_distance(static_cast<int>(p)) - mean_within);
}

double energy_normality_pvalue(const Eigen::MatrixXd& pooled, const NormalityTestConfig& cfg) {
    if (cfg.bootstrap_replicates < 1 || cfg.mc_draws < 1) {
        throw std::invalid_argument("normality test: replicate and draw counts must be positive");
    }
    const Eigen::Index n = pooled.rows();
    const Eigen::Index p = pooled.cols();
    const RngStream root(cfg.seed);

    // One reference sample shared by the observed statistic and every
    // bootstrap replicate (common random numbers).
    Eigen::MatrixXd reference(0, p);
    if (p > 1) {
        RngStream ref_stream = root.child(0);
        reference.resize(cfg.mc_draws, p);
        for (Eigen::Index r = 0; r < reference.rows(); ++r) {
            for (Eigen::Index c = 0; c < p; ++c) reference(r, c) = ref_stream.next_normal();
        }
    }

    const double observed = energy_normality_statistic(standardize_columns(pooled), reference);

    std::vector<double> replicates(static_cast<std::size_t>(cfg.bootstrap_replicates), 0.0);
    parallel_for(replicates.size(), 0, [&](std::size_t b) {
        RngStream stream = root.child(b + 1);
        Eigen::MatrixXd draw(n, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index c = 0; c < p; ++c) draw(i, c) = stream.next_normal();
        }
        replicates[b] = energy_normality_statistic(standardize_columns(draw), reference);
    });

    std::size_t count = 0;
    for (double r : replicates) {
        if (r >= observed) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(replicates.size());
}

double c_from_normality_pvalue(double p, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p-value must lie in [0,1]");
    const double diff = p - alpha;
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    return 1.0 + sign * std::pow(std::fabs(diff), 0.25);
}

double choose_c_data_driven(const Dataset& ds, double alpha, const NormalityTestConfig& cfg) {
    return c_from_normality_pvalue(energy_normality_pvalue(ds.values, cfg), alpha);
}

}  // namespace jointdep
