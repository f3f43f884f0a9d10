#pragma once

#include "jointdep/inference.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace jointdep {

/// d mutually independent univariate coordinates: raw standard normals,
/// their cube roots, or their cubes.
Dataset gen_gaussian_copula(int n, int d, int variant, std::uint64_t seed);

enum class CovKind { kAr1, kBanded, kBlock };

/// Covariance matrix for the correlated-Gaussian generator.
///   ar1:    sigma_ij = rho^|i-j|
///   banded: sigma_ij = rho for 1 <= |i-j| <= 2, else 0 off-diagonal
///   block:  identity Kronecker a 5x5 equicorrelation block (d % 5 == 0)
Eigen::MatrixXd make_covariance(int d, CovKind kind, double rho);

/// One N(0, Sigma) draw per row via the lower Cholesky factor; d univariate groups.
Dataset gen_mvn(int n, int d, CovKind kind, double rho, std::uint64_t seed);

/// Pairwise-independent but jointly dependent scalar triplets:
///   variant 1: X,Y ~ N(0,1), Z = sign(XY) * W with W exponential (mean sqrt 2)
///   variant 2: X,Y ~ Bernoulli(1/2), Z = 1{X = Y}
Dataset gen_triplet(int n, int variant, std::uint64_t seed);

/// Vector version on R^p x R^p x R^p; dependence enters only through the
/// first coordinates (p >= 2).
Dataset gen_vector_triplet(int n, int p, int variant, std::uint64_t seed);

/// Parameters of one simulated-data scenario.
struct GeneratorSpec {
    std::string example;  // "5.1", "5.2", "5.3", "5.4"
    int variant = 1;
    int n = 50;
    int d = 5;            // group count for 5.1 / 5.2
    int p = 5;            // vector dimension for 5.4
    double rho = 0.25;    // 5.2 only
    std::uint64_t seed = 0;
};

Dataset generate(const GeneratorSpec& spec);

/// One statistic entry of an experiment.
struct ExperimentTest {
    MetricKind kind = MetricKind::kJdcov;
    Estimator estimator = Estimator::kUCentered;
    Variant variant = Variant::kPlain;
    double c = 1.0;
    bool c_auto = false;
    std::string label;
};

struct ExperimentConfig {
    GeneratorSpec scenario;
    std::vector<ExperimentTest> tests;
    std::vector<double> levels{0.10, 0.05};
    int reps = 500;
    int B = 500;
    std::uint64_t seed = 0;
    int threads = 0;
    PValueRule rule = PValueRule::kPaper;
    NormalityTestConfig normality;  // used only by c = auto entries
    std::string out_prefix;         // optional; CSV/JSON written when nonempty
};

/// Rejection proportions per (test, level) over `reps` simulated datasets.
struct ExperimentReport {
    ExperimentConfig config;
    std::vector<std::vector<double>> rejection_rates;  // [test][level]
    std::vector<double> mean_c;                        // resolved c per test (averaged over reps)
    double wall_seconds = 0.0;                         // not serialized; logged to stderr
};

/// `key = value` config file, '#' comments. See README for the schema.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentTest parse_experiment_test(const std::string& text);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::string report_csv(const ExperimentReport& report);
std::string report_json(const ExperimentReport& report);

}  // namespace jointdep
