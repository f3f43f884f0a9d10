#include "jointdep/simulate.hpp"

#include "jointdep/jsonout.hpp"
#include "jointdep/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jointdep {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

GroupSpec univariate_groups(int d) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(d));
    for (int i = 1; i <= d; ++i) names.push_back("x" + std::to_string(i));
    return GroupSpec::univariate(names);
}

GroupSpec vector_groups(int p) {
    std::vector<GroupSpec::Range> ranges;
    const std::vector<std::string> names{"x", "y", "z"};
    for (int g = 0; g < 3; ++g) ranges.push_back({names[static_cast<std::size_t>(g)], g * p, (g + 1) * p - 1});
    return GroupSpec(std::move(ranges));
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Dataset gen_gaussian_copula(int n, int d, int variant, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("gen_gaussian_copula: n and d must be >= 1");
    if (variant < 1 || variant > 3) throw std::invalid_argument("gen_gaussian_copula: variant must be 1, 2 or 3");
    Dataset ds;
    ds.groups = univariate_groups(d);
    ds.values.resize(n, d);
    RngStream stream(seed);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) {
            const double z = stream.next_normal();
            ds.values(i, j) = variant == 1 ? z : (variant == 2 ? std::cbrt(z) : z * z * z);
        }
    }
    return ds;
}

Eigen::MatrixXd make_covariance(int d, CovKind kind, double rho) {
    if (d < 1) throw std::invalid_argument("make_covariance: d must be >= 1");
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(d, d);
    switch (kind) {
        case CovKind::kAr1:
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
            }
            break;
        case CovKind::kBanded:
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) {
                    const int gap = std::abs(i - j);
                    if (gap >= 1 && gap <= 2) sigma(i, j) = rho;
                }
            }
            break;
        case CovKind::kBlock: {
            if (d % 5 != 0) throw std::invalid_argument("block covariance requires d to be a multiple of 5");
            for (int b = 0; b < d / 5; ++b) {
                for (int i = 0; i < 5; ++i) {
                    for (int j = 0; j < 5; ++j) {
                        if (i != j) sigma(5 * b + i, 5 * b + j) = rho;
                    }
                }
            }
            break;
        }
    }
    return sigma;
}

Dataset gen_mvn(int n, int d, CovKind kind, double rho, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_mvn: n must be >= 1");
    const Eigen::MatrixXd sigma = make_covariance(d, kind, rho);
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("gen_mvn: covariance is not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();
    Dataset ds;
    ds.groups = univariate_groups(d);
    ds.values.resize(n, d);
    RngStream stream(seed);
    Eigen::VectorXd z(d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) z(j) = stream.next_normal();
        ds.values.row(i) = (chol * z).transpose();
    }
    return ds;
}

Dataset gen_triplet(int n, int variant, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_triplet: n must be >= 1");
    if (variant < 1 || variant > 2) throw std::invalid_argument("gen_triplet: variant must be 1 or 2");
    Dataset ds;
    ds.groups = GroupSpec::univariate({"x", "y", "z"});
    ds.values.resize(n, 3);
    RngStream stream(seed);
    for (int i = 0; i < n; ++i) {
        if (variant == 1) {
            const double x = stream.next_normal();
            const double y = stream.next_normal();
            const double w = stream.next_exponential(std::sqrt(2.0));
            ds.values(i, 0) = x;
            ds.values(i, 1) = y;
            ds.values(i, 2) = sign_of(x * y) * w;
        } else {
            const double x = stream.next_uniform() < 0.5 ? 0.0 : 1.0;
            const double y = stream.next_uniform() < 0.5 ? 0.0 : 1.0;
            ds.values(i, 0) = x;
            ds.values(i, 1) = y;
            ds.values(i, 2) = (x == y) ? 1.0 : 0.0;
        }
    }
    return ds;
}

Dataset gen_vector_triplet(int n, int p, int variant, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_vector_triplet: n must be >= 1");
    if (p < 2) throw std::invalid_argument("gen_vector_triplet: p must be >= 2");
    if (variant < 1 || variant > 2) throw std::invalid_argument("gen_vector_triplet: variant must be 1 or 2");
    Dataset ds;
    ds.groups = vector_groups(p);
    ds.values.resize(n, 3 * p);
    RngStream stream(seed);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) ds.values(i, j) = stream.next_normal();          // X
        for (int j = 0; j < p; ++j) ds.values(i, p + j) = stream.next_normal();      // Y
        const double x1 = ds.values(i, 0);
        const double y1 = ds.values(i, p);
        double z1;
        if (variant == 1) {
            z1 = sign_of(x1 * y1) * stream.next_exponential(std::sqrt(2.0));
        } else {
            const double pick = stream.next_uniform();
            const double eps = 2.0 * stream.next_uniform() - 1.0;
            if (pick < 1.0 / 3.0) {
                z1 = x1 * x1 + eps;
            } else if (pick < 2.0 / 3.0) {
                z1 = y1 * y1 + eps;
            } else {
                z1 = x1 * y1 + eps;
            }
        }
        ds.values(i, 2 * p) = z1;
        for (int j = 1; j < p; ++j) ds.values(i, 2 * p + j) = stream.next_normal();   // Z_{2:p}
    }
    return ds;
}

Dataset generate(const GeneratorSpec& spec) {
    if (spec.example == "5.1") return gen_gaussian_copula(spec.n, spec.d, spec.variant, spec.seed);
    if (spec.example == "5.2") {
        CovKind kind;
        switch (spec.variant) {
            case 1: kind = CovKind::kAr1; break;
            case 2: kind = CovKind::kBanded; break;
            case 3: kind = CovKind::kBlock; break;
            default: throw std::invalid_argument("example 5.2: variant must be 1 (ar1), 2 (banded) or 3 (block)");
        }
        return gen_mvn(spec.n, spec.d, kind, spec.rho, spec.seed);
    }
    if (spec.example == "5.3") return gen_triplet(spec.n, spec.variant, spec.seed);
    if (spec.example == "5.4") return gen_vector_triplet(spec.n, spec.p, spec.variant, spec.seed);
    throw std::invalid_argument("unknown example '" + spec.example + "' (expected 5.1, 5.2, 5.3 or 5.4)");
}

ExperimentTest parse_experiment_test(const std::string& text) {
    // metric[:estimator[:c]], e.g. "jdcov:u:1", "jdcov-s:v:0.5", "jdcov:u:auto", "tmt:u".
    ExperimentTest test;
    test.label = trim(text);
    std::vector<std::string> parts;
    std::stringstream ss(test.label);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trim(part));
    if (parts.empty() || parts[0].empty()) throw std::invalid_argument("empty test entry");

    const std::string& metric = parts[0];
    if (metric == "jdcov") {
        test.kind = MetricKind::kJdcov;
        test.variant = Variant::kPlain;
    } else if (metric == "jdcov-s") {
        test.kind = MetricKind::kJdcovScaled;
        test.variant = Variant::kScaled;
    } else if (metric == "jdcov-r") {
        test.kind = MetricKind::kJdcovRank;
        test.variant = Variant::kRank;
    } else if (metric == "dcov") {
        test.kind = MetricKind::kDcov;
    } else if (metric == "tmt") {
        test.kind = MetricKind::kTmt;
    } else {
        throw std::invalid_argument("unknown test metric '" + metric + "'");
    }
    if (parts.size() > 1 && !parts[1].empty()) {
        if (parts[1] == "u") {
            test.estimator = Estimator::kUCentered;
        } else if (parts[1] == "v") {
            test.estimator = Estimator::kVStat;
        } else {
            throw std::invalid_argument("unknown estimator '" + parts[1] + "' (expected u or v)");
        }
    }
    if (parts.size() > 2 && !parts[2].empty()) {
        if (parts[2] == "auto") {
            test.c_auto = true;
        } else {
            test.c = std::stod(parts[2]);
            if (test.c < 0.0) throw std::invalid_argument("test entry '" + text + "': c must be >= 0");
        }
    }
    if (parts.size() > 3) throw std::invalid_argument("test entry '" + text + "' has too many fields");
    return test;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    bool have_tests = false, have_levels = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "example") {
                cfg.scenario.example = value;
            } else if (key == "variant") {
                cfg.scenario.variant = std::stoi(value);
            } else if (key == "n") {
                cfg.scenario.n = std::stoi(value);
            } else if (key == "d") {
                cfg.scenario.d = std::stoi(value);
            } else if (key == "p") {
                cfg.scenario.p = std::stoi(value);
            } else if (key == "rho") {
                cfg.scenario.rho = std::stod(value);
            } else if (key == "reps") {
                cfg.reps = std::stoi(value);
            } else if (key == "B") {
                cfg.B = std::stoi(value);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "threads") {
                cfg.threads = std::stoi(value);
            } else if (key == "rule") {
                if (value == "paper") {
                    cfg.rule = PValueRule::kPaper;
                } else if (value == "add-one") {
                    cfg.rule = PValueRule::kAddOne;
                } else {
                    throw std::invalid_argument("rule must be 'paper' or 'add-one'");
                }
            } else if (key == "levels") {
                cfg.levels.clear();
                std::stringstream ls(value);
                std::string lv;
                while (std::getline(ls, lv, ',')) cfg.levels.push_back(std::stod(trim(lv)));
                have_levels = true;
            } else if (key == "tests") {
                cfg.tests.clear();
                std::stringstream ts(value);
                std::string tv;
                while (std::getline(ts, tv, ',')) cfg.tests.push_back(parse_experiment_test(tv));
                have_tests = true;
            } else if (key == "normality_replicates") {
                cfg.normality.bootstrap_replicates = std::stoi(value);
            } else if (key == "normality_draws") {
                cfg.normality.mc_draws = std::stoi(value);
            } else if (key == "out") {
                cfg.out_prefix = value;
            } else {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value '" + value + "' for '" +
                                        key + "'");
        }
    }
    if (cfg.scenario.example.empty()) throw std::invalid_argument("config: missing 'example'");
    if (!have_tests || cfg.tests.empty()) throw std::invalid_argument("config: missing 'tests'");
    if (!have_levels && cfg.levels.empty()) throw std::invalid_argument("config: missing 'levels'");
    if (cfg.reps < 1 || cfg.B < 1) throw std::invalid_argument("config: reps and B must be >= 1");
    for (double level : cfg.levels) {
        if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("config: levels must lie in (0,1)");
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    return parse_experiment_config(in);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t ntests = cfg.tests.size();
    const std::size_t nlevels = cfg.levels.size();

    // rejected[rep][test][level], c_used[rep][test]
    std::vector<std::vector<std::vector<char>>> rejected(
        static_cast<std::size_t>(cfg.reps),
        std::vector<std::vector<char>>(ntests, std::vector<char>(nlevels, 0)));
    std::vector<std::vector<double>> c_used(static_cast<std::size_t>(cfg.reps), std::vector<double>(ntests, 0.0));

    const RngStream root(cfg.seed);
    parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t rep) {
        GeneratorSpec scenario = cfg.scenario;
        scenario.seed = root.fork_seed(2 * rep);
        const Dataset data = generate(scenario);
        const RngStream test_root = root.child(2 * rep + 1);
        for (std::size_t t = 0; t < ntests; ++t) {
            const ExperimentTest& test = cfg.tests[t];
            StatisticSpec spec;
            spec.kind = test.kind;
            spec.config.estimator = test.estimator;
            spec.config.variant = test.variant;
            spec.config.c = test.c;
            if (test.c_auto) {
                NormalityTestConfig ncfg = cfg.normality;
                ncfg.seed = test_root.fork_seed(1000 + t);
                spec.config.c = choose_c_data_driven(data, 0.05, ncfg);
            }
            c_used[rep][t] = spec.config.c;

            BootstrapConfig boot;
            boot.B = cfg.B;
            boot.seed = test_root.fork_seed(t);
            boot.rule = cfg.rule;
            boot.statistic = spec;
            boot.threads = 1;  // parallelism lives at the replication level
            boot.alpha = cfg.levels.front();
            const TestResult result = bootstrap_joint_test(data, boot);
            for (std::size_t lv = 0; lv < nlevels; ++lv) {
                const double threshold = empirical_quantile(result.replicates, 1.0 - cfg.levels[lv]);
                rejected[rep][t][lv] = result.statistic > threshold ? 1 : 0;
            }
        }
    });

    ExperimentReport report;
    report.config = cfg;
    report.rejection_rates.assign(ntests, std::vector<double>(nlevels, 0.0));
    report.mean_c.assign(ntests, 0.0);
    for (std::size_t t = 0; t < ntests; ++t) {
        for (std::size_t lv = 0; lv < nlevels; ++lv) {
            double count = 0.0;
            for (int rep = 0; rep < cfg.reps; ++rep) count += rejected[static_cast<std::size_t>(rep)][t][lv];
            report.rejection_rates[t][lv] = count / static_cast<double>(cfg.reps);
        }
        double csum = 0.0;
        for (int rep = 0; rep < cfg.reps; ++rep) csum += c_used[static_cast<std::size_t>(rep)][t];
        report.mean_c[t] = csum / static_cast<double>(cfg.reps);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string report_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "example,variant,n,dim,test,c,level,rejection_rate,reps,B,seed\n";
    const auto& cfg = report.config;
    const int dim = cfg.scenario.example == "5.4" ? cfg.scenario.p : (cfg.scenario.example == "5.3" ? 3 : cfg.scenario.d);
    for (std::size_t t = 0; t < cfg.tests.size(); ++t) {
        for (std::size_t lv = 0; lv < cfg.levels.size(); ++lv) {
            out << cfg.scenario.example << ',' << cfg.scenario.variant << ',' << cfg.scenario.n << ',' << dim << ','
                << cfg.tests[t].label << ',' << format_double(report.mean_c[t]) << ','
                << format_double(cfg.levels[lv]) << ',' << format_double(report.rejection_rates[t][lv]) << ','
                << cfg.reps << ',' << cfg.B << ',' << cfg.seed << '\n';
        }
    }
    return out.str();
}

std::string report_json(const ExperimentReport& report) {
    const auto& cfg = report.config;
    JsonWriter w;
    w.begin_object();
    w.key("schema").value(1);
    w.key("example").value(cfg.scenario.example);
    w.key("variant").value(cfg.scenario.variant);
    w.key("n").value(cfg.scenario.n);
    if (cfg.scenario.example == "5.4") {
        w.key("p").value(cfg.scenario.p);
    } else if (cfg.scenario.example != "5.3") {
        w.key("d").value(cfg.scenario.d);
    }
    if (cfg.scenario.example == "5.2") w.key("rho").value(cfg.scenario.rho);
    w.key("reps").value(cfg.reps);
    w.key("B").value(cfg.B);
    w.key("seed").value(cfg.seed);
    w.key("rule").value(cfg.rule == PValueRule::kPaper ? "paper" : "add-one");
    w.key("levels").begin_array();
    for (double level : cfg.levels) w.value(level);
    w.end_array();
    w.key("results").begin_array();
    for (std::size_t t = 0; t < cfg.tests.size(); ++t) {
        w.begin_object();
        w.key("test").value(cfg.tests[t].label);
        w.key("c").value(report.mean_c[t]);
        w.key("rejection_rates").begin_array();
        for (double rate : report.rejection_rates[t]) w.value(rate);
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

}  // namespace jointdep
