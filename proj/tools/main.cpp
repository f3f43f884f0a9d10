// jointdep: joint-dependence statistics, bootstrap independence tests, and
// DAG goodness-of-fit ranking for additive structural equation models.
//
// Machine-readable JSON goes to stdout; progress and logs go to stderr.
// Exit codes: 0 success, 2 usage error, 1 runtime failure.

#include "jointdep/causal.hpp"
#include "jointdep/jsonout.hpp"
#include "jointdep/simulate.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace jointdep;

namespace {

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed) {
    if (flag_seed) return *flag_seed;
    if (const char* env = std::getenv("JOINTDEP_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

Estimator parse_estimator(const std::string& text) {
    if (text == "u") return Estimator::kUCentered;
    if (text == "v") return Estimator::kVStat;
    throw CLI::ValidationError("--estimator", "must be 'u' or 'v'");
}

StatisticSpec make_statistic(const std::string& metric, double c, Estimator estimator) {
    StatisticSpec spec;
    spec.config.c = c;
    spec.config.estimator = estimator;
    if (metric == "jdcov") {
        spec.kind = MetricKind::kJdcov;
        spec.config.variant = Variant::kPlain;
    } else if (metric == "jdcov-s") {
        spec.kind = MetricKind::kJdcovScaled;
        spec.config.variant = Variant::kScaled;
    } else if (metric == "jdcov-r") {
        spec.kind = MetricKind::kJdcovRank;
        spec.config.variant = Variant::kRank;
    } else if (metric == "dcov") {
        spec.kind = MetricKind::kDcov;
    } else if (metric == "cumulant") {
        spec.kind = MetricKind::kCumulant;
    } else if (metric == "tmt") {
        spec.kind = MetricKind::kTmt;
    } else {
        throw CLI::ValidationError("--metric", "unknown metric '" + metric + "'");
    }
    return spec;
}

// "--c auto" resolves through the normality heuristic; otherwise a number >= 0.
double resolve_c(const std::string& text, const Dataset& ds, double alpha, const NormalityTestConfig& ncfg,
                 bool* was_auto = nullptr) {
    if (was_auto) *was_auto = false;
    if (text == "auto") {
        if (was_auto) *was_auto = true;
        const double c = choose_c_data_driven(ds, alpha, ncfg);
        std::cerr << "resolved c = " << format_double(c) << " (data-driven)\n";
        return c;
    }
    std::size_t used = 0;
    double c = 0.0;
    try {
        c = std::stod(text, &used);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--c", "expected a number or 'auto'");
    }
    if (used != text.size()) throw CLI::ValidationError("--c", "expected a number or 'auto'");
    if (c < 0.0) throw CLI::ValidationError("--c", "must be >= 0");
    return c;
}

void emit(const JsonWriter& w) { std::cout << w.str() << '\n'; }

int run_compute(const std::string& csv, const std::string& groups_text, const std::string& metric,
                const std::string& c_text, const std::string& estimator_text, bool verbose,
                std::optional<std::uint64_t> seed_flag) {
    const Dataset ds = load_csv(csv, GroupSpec::parse(groups_text));
    validate(ds, true);
    const Estimator estimator = parse_estimator(estimator_text);
    NormalityTestConfig ncfg;
    ncfg.seed = resolve_seed(seed_flag);
    bool was_auto = false;
    const double c = resolve_c(c_text, ds, 0.05, ncfg, &was_auto);
    const StatisticSpec spec = make_statistic(metric, c, estimator);
    if (verbose && spec.kind == MetricKind::kCumulant) {
        std::cerr << "cumulant over " << bell_number(ds.d()) << " set partitions of " << ds.d() << " groups\n";
    }
    const double value = compute_statistic(ds, spec);

    JsonWriter w;
    w.begin_object();
    w.key("schema").value(1);
    w.key("command").value("compute");
    w.key("metric").value(metric);
    w.key("value").value(value);
    if (spec.kind == MetricKind::kJdcov || spec.kind == MetricKind::kJdcovScaled || spec.kind == MetricKind::kJdcovRank) {
        w.key("c").value(c);
        w.key("c_auto").value(was_auto);
    }
    w.key("estimator").value(spec.kind == MetricKind::kCumulant ? "v" : estimator_text);
    w.key("n").value(ds.n());
    w.key("d").value(ds.d());
    w.end_object();
    emit(w);
    return 0;
}

void write_test_result(JsonWriter& w, const TestResult& result, const std::string& metric, double c, bool c_auto,
                       const std::string& estimator, const std::string& rule, bool emit_replicates) {
    w.key("metric").value(metric);
    w.key("c").value(c);
    w.key("c_auto").value(c_auto);
    w.key("estimator").value(estimator);
    w.key("rule").value(rule);
    w.key("statistic").value(result.statistic);
    w.key("p_value").value(result.p_value);
    w.key("alpha").value(result.alpha);
    w.key("reject").value(result.reject);
    w.key("B").value(result.B);
    w.key("seed").value(result.seed);
    if (emit_replicates) {
        w.key("replicates").begin_array();
        for (double r : result.replicates) w.value(r);
        w.end_array();
    }
}

int run_test(const std::string& csv, const std::string& groups_text, const std::string& metric,
             const std::string& c_text, const std::string& estimator_text, int B, double alpha,
             std::optional<std::uint64_t> seed_flag, const std::string& rule_text, int threads, bool emit_replicates,
             int normality_replicates, int normality_draws) {
    const Dataset ds = load_csv(csv, GroupSpec::parse(groups_text));
    validate(ds, true);
    const std::uint64_t seed = resolve_seed(seed_flag);
    std::cerr << "seed = " << seed << "\n";

    NormalityTestConfig ncfg;
    ncfg.bootstrap_replicates = normality_replicates;
    ncfg.mc_draws = normality_draws;
    ncfg.seed = RngStream(seed).fork_seed(0xC0FFEE);
    bool was_auto = false;
    const double c = resolve_c(c_text, ds, alpha, ncfg, &was_auto);

    BootstrapConfig cfg;
    cfg.B = B;
    cfg.seed = seed;
    cfg.alpha = alpha;
    cfg.threads = threads;
    cfg.statistic = make_statistic(metric, c, parse_estimator(estimator_text));
    if (rule_text == "paper") {
        cfg.rule = PValueRule::kPaper;
    } else if (rule_text == "add-one") {
        cfg.rule = PValueRule::kAddOne;
    } else {
        throw CLI::ValidationError("--rule", "must be 'paper' or 'add-one'");
    }

    const TestResult result = bootstrap_joint_test(ds, cfg);
    JsonWriter w;
    w.begin_object();
    w.key("schema").value(1);
    w.key("command").value("test");
    write_test_result(w, result, metric, c, was_auto, estimator_text, rule_text, emit_replicates);
    w.key("n").value(ds.n());
    w.key("d").value(ds.d());
    w.end_object();
    emit(w);
    return 0;
}

int run_dag_select(const std::string& csv, const std::string& groups_text, bool enumerate,
                   const std::string& candidates_path, const std::string& metric, const std::string& c_text,
                   const std::string& estimator_text, int B, double alpha, std::optional<std::uint64_t> seed_flag,
                   const std::string& rule_text, int threads, bool no_refit, bool scale, int degree, int knots,
                   double ridge) {
    Dataset ds = load_csv(csv, GroupSpec::parse(groups_text));
    validate(ds, true);
    if (scale) ds = center_and_scale(ds);
    const std::uint64_t seed = resolve_seed(seed_flag);
    std::cerr << "seed = " << seed << "\n";

    std::vector<DagModel> candidates;
    if (enumerate) {
        candidates = enumerate_dags(ds.d());
    } else {
        candidates = load_dag_candidates(candidates_path, ds.groups);
    }
    std::cerr << "testing " << candidates.size() << " candidate models\n";

    NormalityTestConfig ncfg;
    ncfg.seed = RngStream(seed).fork_seed(0xC0FFEE);
    bool was_auto = false;
    const double c = resolve_c(c_text, ds, alpha, ncfg, &was_auto);

    StatisticSpec stat = make_statistic(metric, c, parse_estimator(estimator_text));
    BootstrapConfig boot;
    boot.B = B;
    boot.seed = seed;
    boot.alpha = alpha;
    boot.threads = threads;
    boot.rule = rule_text == "add-one" ? PValueRule::kAddOne : PValueRule::kPaper;

    SplineConfig scfg;
    scfg.degree = degree;
    scfg.interior_knots = knots;
    scfg.ridge = ridge;

    const auto ranked = select_dag(ds, candidates, stat, boot, scfg, !no_refit);

    JsonWriter w;
    w.begin_object();
    w.key("schema").value(1);
    w.key("command").value("dag-select");
    w.key("metric").value(metric);
    w.key("c").value(c);
    w.key("c_auto").value(was_auto);
    w.key("estimator").value(estimator_text);
    w.key("B").value(B);
    w.key("seed").value(seed);
    w.key("no_refit").value(no_refit);
    w.key("scaled_inputs").value(scale);
    w.key("models").begin_array();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        w.begin_object();
        w.key("rank").value(static_cast<long long>(i + 1));
        w.key("dag").value(ranked[i].encoding);
        w.key("p_value").value(ranked[i].p_value);
        w.key("edges").value(ranked[i].model.edge_count());
        w.end_object();
    }
    w.end_array();
    w.end_object();
    emit(w);
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_override, int threads_override,
                 std::optional<std::uint64_t> seed_flag) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (!out_override.empty()) cfg.out_prefix = out_override;
    if (threads_override > 0) cfg.threads = threads_override;
    if (seed_flag) cfg.seed = *seed_flag;
    std::cerr << "seed = " << cfg.seed << ", reps = " << cfg.reps << ", B = " << cfg.B << "\n";

    const ExperimentReport report = run_experiment(cfg);
    std::cerr << "finished in " << report.wall_seconds << " s\n";

    const std::string json = report_json(report);
    if (!cfg.out_prefix.empty()) {
        const std::string csv_path = cfg.out_prefix + ".csv";
        const std::string json_path = cfg.out_prefix + ".json";
        std::ofstream csv(csv_path);
        csv << report_csv(report);
        std::ofstream js(json_path);
        js << json << '\n';
        if (!csv || !js) throw std::runtime_error("failed to write report files under '" + cfg.out_prefix + "'");
        std::cerr << "wrote " << csv_path << " and " << json_path << "\n";
    }
    std::cout << json << '\n';
    return 0;
}

int run_normality(const std::string& csv, const std::string& groups_text, int replicates, int draws,
                  std::optional<std::uint64_t> seed_flag, double alpha) {
    Dataset ds;
    if (groups_text.empty()) {
        // treat the whole file as one pooled block
        std::ifstream probe(csv);
        std::string header;
        if (!probe || !std::getline(probe, header)) throw std::runtime_error("cannot read '" + csv + "'");
        int cols = 1;
        for (char ch : header) {
            if (ch == ',') ++cols;
        }
        std::vector<GroupSpec::Range> ranges{{"pooled", 0, cols - 1}};
        ds = load_csv(csv, GroupSpec(std::move(ranges)));
    } else {
        ds = load_csv(csv, GroupSpec::parse(groups_text));
    }
    validate(ds, false);

    NormalityTestConfig ncfg;
    ncfg.bootstrap_replicates = replicates;
    ncfg.mc_draws = draws;
    ncfg.seed = resolve_seed(seed_flag);
    std::cerr << "seed = " << ncfg.seed << "\n";

    const double p = energy_normality_pvalue(ds.values, ncfg);
    JsonWriter w;
    w.begin_object();
    w.key("schema").value(1);
    w.key("command").value("normality");
    w.key("p_value").value(p);
    w.key("suggested_c").value(c_from_normality_pvalue(p, alpha));
    w.key("alpha").value(alpha);
    w.key("B_param").value(replicates);
    w.key("mc_draws").value(draws);
    w.key("seed").value(ncfg.seed);
    w.key("n").value(ds.n());
    w.key("columns").value(static_cast<int>(ds.values.cols()));
    w.end_object();
    emit(w);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint dependence metrics, bootstrap independence tests, and DAG diagnostics"};
    app.require_subcommand(1);

    std::string csv, groups_text, candidates_path, config_path, out_prefix;
    std::string metric = "jdcov", c_text = "1", estimator_text = "u", rule_text = "paper";
    int B = 500, threads = 0, normality_replicates = 200, normality_draws = 2000;
    int degree = 3, knots = 10;
    double alpha = 0.05, ridge = 1e-8;
    bool verbose = false, emit_replicates = false, enumerate = false, no_refit = false, scale = false;
    std::optional<std::uint64_t> seed_flag;

    auto add_data_flags = [&](CLI::App* cmd) {
        cmd->add_option("--csv", csv, "input CSV file (header row, comma separated)")->required();
        cmd->add_option("--groups", groups_text, "group spec, e.g. 'x:1-3,y:4,z:5-6' (1-based columns)")->required();
    };
    auto add_metric_flags = [&](CLI::App* cmd, bool with_cumulant) {
        const std::string metrics =
            with_cumulant ? "dcov|jdcov|jdcov-s|jdcov-r|cumulant|tmt" : "dcov|jdcov|jdcov-s|jdcov-r|tmt";
        cmd->add_option("--metric", metric, "statistic: " + metrics)->capture_default_str();
        cmd->add_option("--c", c_text, "weight parameter (number >= 0, or 'auto')")->capture_default_str();
        cmd->add_option("--estimator", estimator_text, "u (bias corrected) or v (plug-in)")->capture_default_str();
    };

    CLI::App* compute = app.add_subcommand("compute", "print one dependence statistic for a dataset");
    add_data_flags(compute);
    add_metric_flags(compute, true);
    compute->add_option("--seed", seed_flag, "seed for the 'auto' c heuristic");
    compute->add_flag("--verbose", verbose, "extra logging on stderr");

    CLI::App* test = app.add_subcommand("test", "bootstrap test of mutual independence of the groups");
    add_data_flags(test);
    add_metric_flags(test, false);
    test->add_option("--B", B, "bootstrap replicates")->check(CLI::PositiveNumber)->capture_default_str();
    test->add_option("--alpha", alpha, "test level in (0,1)")->check(CLI::Range(1e-9, 1.0 - 1e-9))->capture_default_str();
    test->add_option("--seed", seed_flag, "RNG seed (fallback: JOINTDEP_SEED, then 0)");
    test->add_option("--rule", rule_text, "p-value rule: paper | add-one")->capture_default_str();
    test->add_option("--threads", threads, "worker cap (0 = all cores)");
    test->add_flag("--emit-replicates", emit_replicates, "include all bootstrap statistics in the JSON");
    test->add_option("--normality-replicates", normality_replicates, "bootstrap size of the 'auto' normality test");
    test->add_option("--normality-draws", normality_draws, "Monte Carlo draws of the 'auto' normality test");

    CLI::App* dag = app.add_subcommand("dag-select", "rank candidate DAGs by residual-bootstrap p-value");
    add_data_flags(dag);
    add_metric_flags(dag, false);
    auto* enum_flag = dag->add_flag("--enumerate", enumerate, "test all labeled DAGs (d <= 4)");
    dag->add_option("--candidates", candidates_path, "candidate file: one 'child<-parent,parent;...' per line")
        ->excludes(enum_flag);
    dag->add_option("--B", B, "bootstrap replicates")->check(CLI::PositiveNumber)->capture_default_str();
    dag->add_option("--alpha", alpha, "level used for the reject flag")->capture_default_str();
    dag->add_option("--seed", seed_flag, "RNG seed");
    dag->add_option("--rule", rule_text, "p-value rule: paper | add-one")->capture_default_str();
    dag->add_option("--threads", threads, "worker cap (0 = all cores)");
    dag->add_flag("--no-refit", no_refit, "diagnostic: skip re-estimation inside replicates");
    dag->add_flag("--scale", scale, "center and scale every column to norm sqrt(n) first");
    dag->add_option("--degree", degree, "B-spline degree")->capture_default_str();
    dag->add_option("--knots", knots, "interior knots per parent")->capture_default_str();
    dag->add_option("--ridge", ridge, "ridge penalty")->capture_default_str();

    CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo size/power experiment from a config file");
    simulate->add_option("--config", config_path, "experiment config file (key = value lines)")->required();
    simulate->add_option("--out", out_prefix, "report path prefix (writes <prefix>.csv and <prefix>.json)");
    simulate->add_option("--threads", threads, "worker cap (0 = all cores)");
    simulate->add_option("--seed", seed_flag, "override the config seed");

    CLI::App* normality = app.add_subcommand("normality", "energy-distance test of joint normality");
    normality->add_option("--csv", csv, "input CSV file")->required();
    normality->add_option("--groups", groups_text, "optional group spec (all columns pooled either way)");
    normality->add_option("--B-param", normality_replicates, "parametric bootstrap replicates")->capture_default_str();
    normality->add_option("--mc-draws", normality_draws, "Monte Carlo draws for expected distances")->capture_default_str();
    normality->add_option("--seed", seed_flag, "RNG seed");
    normality->add_option("--alpha", alpha, "level for the suggested c")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(compute)) {
            return run_compute(csv, groups_text, metric, c_text, estimator_text, verbose, seed_flag);
        }
        if (app.got_subcommand(test)) {
            return run_test(csv, groups_text, metric, c_text, estimator_text, B, alpha, seed_flag, rule_text, threads,
                            emit_replicates, normality_replicates, normality_draws);
        }
        if (app.got_subcommand(dag)) {
            if (!enumerate && candidates_path.empty()) {
                std::cerr << "dag-select: need --enumerate or --candidates\n";
                return 2;
            }
            return run_dag_select(csv, groups_text, enumerate, candidates_path, metric, c_text, estimator_text, B,
                                  alpha, seed_flag, rule_text, threads, no_refit, scale, degree, knots, ridge);
        }
        if (app.got_subcommand(simulate)) {
            return run_simulate(config_path, out_prefix, threads, seed_flag);
        }
        if (app.got_subcommand(normality)) {
            return run_normality(csv, groups_text, normality_replicates, normality_draws, seed_flag, alpha);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
