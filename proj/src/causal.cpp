#include "jointdep/causal.hpp"

#include "jointdep/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
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

std::vector<int> topological_order_or_throw(int d, const std::vector<std::vector<int>>& parents) {
    std::vector<int> remaining_parents(static_cast<std::size_t>(d), 0);
    std::vector<std::vector<int>> children(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        for (int k : parents[static_cast<std::size_t>(j)]) {
            if (k == j) throw std::invalid_argument("DAG: node " + std::to_string(j + 1) + " lists itself as parent");
            if (k < 0 || k >= d) throw std::invalid_argument("DAG: parent index out of range");
            remaining_parents[static_cast<std::size_t>(j)]++;
            children[static_cast<std::size_t>(k)].push_back(j);
        }
    }
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(d));
    std::vector<int> ready;
    for (int j = d - 1; j >= 0; --j) {
        if (remaining_parents[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
    }
    while (!ready.empty()) {
        const int j = ready.back();
        ready.pop_back();
        order.push_back(j);
        for (int ch : children[static_cast<std::size_t>(j)]) {
            if (--remaining_parents[static_cast<std::size_t>(ch)] == 0) ready.push_back(ch);
        }
    }
    if (static_cast<int>(order.size()) != d) throw std::invalid_argument("DAG: parent sets contain a cycle");
    return order;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

DagModel::DagModel(int node_count, std::vector<std::vector<int>> parents)
    : node_count_(node_count), parents_(std::move(parents)) {
    if (node_count_ < 1) throw std::invalid_argument("DAG: need at least one node");
    if (static_cast<int>(parents_.size()) != node_count_) throw std::invalid_argument("DAG: parent list size mismatch");
    for (auto& pset : parents_) {
        std::sort(pset.begin(), pset.end());
        if (std::adjacent_find(pset.begin(), pset.end()) != pset.end()) {
            throw std::invalid_argument("DAG: duplicate parent entry");
        }
    }
    topo_order_ = topological_order_or_throw(node_count_, parents_);
}

int DagModel::edge_count() const {
    int edges = 0;
    for (const auto& pset : parents_) edges += static_cast<int>(pset.size());
    return edges;
}

std::string DagModel::encode(const std::vector<std::string>& names) const {
    auto label = [&](int j) {
        if (j < static_cast<int>(names.size())) return names[static_cast<std::size_t>(j)];
        return "v" + std::to_string(j + 1);
    };
    std::string out;
    for (int j = 0; j < node_count_; ++j) {
        if (j > 0) out += ';';
        out += label(j) + "<-";
        for (std::size_t i = 0; i < parents_[static_cast<std::size_t>(j)].size(); ++i) {
            if (i > 0) out += ',';
            out += label(parents_[static_cast<std::size_t>(j)][i]);
        }
    }
    return out;
}

std::vector<DagModel> enumerate_dags(int d) {
    if (d < 1) throw std::invalid_argument("enumerate_dags: d must be >= 1");
    if (d > 4) {
        throw std::invalid_argument("enumerate_dags: exhaustive enumeration limited to d <= 4; "
                                    "supply an explicit candidate list for larger graphs");
    }
    // Ordered node pairs (i -> j), row-major; one bit per possible edge.
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i != j) slots.emplace_back(i, j);
        }
    }
    std::vector<DagModel> out;
    const std::uint64_t limit = 1ull << slots.size();
    for (std::uint64_t mask = 0; mask < limit; ++mask) {
        std::vector<std::vector<int>> parents(static_cast<std::size_t>(d));
        for (std::size_t bit = 0; bit < slots.size(); ++bit) {
            if (mask & (1ull << bit)) parents[static_cast<std::size_t>(slots[bit].second)].push_back(slots[bit].first);
        }
        try {
            out.emplace_back(d, std::move(parents));
        } catch (const std::invalid_argument&) {
            // cyclic mask, skip
        }
    }
    return out;
}

DagModel parse_dag(const std::string& line, const GroupSpec& groups) {
    const int d = groups.group_count();
    std::vector<std::vector<int>> parents(static_cast<std::size_t>(d));
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    std::stringstream ss(line);
    std::string clause;
    while (std::getline(ss, clause, ';')) {
        clause = trim(clause);
        if (clause.empty()) continue;
        const std::size_t arrow = clause.find("<-");
        if (arrow == std::string::npos) throw std::invalid_argument("candidate '" + clause + "': missing '<-'");
        const std::string child_name = trim(clause.substr(0, arrow));
        const int child = groups.index_of(child_name);
        if (child < 0) throw std::invalid_argument("candidate references unknown group '" + child_name + "'");
        if (seen[static_cast<std::size_t>(child)]) {
            throw std::invalid_argument("candidate lists group '" + child_name + "' twice");
        }
        seen[static_cast<std::size_t>(child)] = true;
        std::stringstream ps(trim(clause.substr(arrow + 2)));
        std::string parent_name;
        while (std::getline(ps, parent_name, ',')) {
            parent_name = trim(parent_name);
            if (parent_name.empty()) continue;
            const int parent = groups.index_of(parent_name);
            if (parent < 0) throw std::invalid_argument("candidate references unknown group '" + parent_name + "'");
            parents[static_cast<std::size_t>(child)].push_back(parent);
        }
    }
    return DagModel(d, std::move(parents));
}

std::vector<DagModel> load_dag_candidates(const std::string& path, const GroupSpec& groups) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open candidate file '" + path + "'");
    std::vector<DagModel> out;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        out.push_back(parse_dag(t, groups));
    }
    if (out.empty()) throw std::runtime_error("candidate file '" + path + "' contains no models");
    return out;
}

SemFit fit_additive_sem(const Dataset& ds, const DagModel& dag, const SplineConfig& scfg) {
    validate(ds, false);
    const int d = ds.d();
    if (dag.node_count() != d) throw std::invalid_argument("fit: DAG node count differs from group count");
    for (int g = 0; g < d; ++g) {
        if (ds.groups.dim(g) != 1) {
            throw std::invalid_argument("fit: group '" + ds.groups.name(g) + "' is not univariate");
        }
    }
    if (scfg.ridge < 0.0) throw std::invalid_argument("fit: ridge penalty must be >= 0");
    const Eigen::Index n = ds.values.rows();

    SemFit fit;
    fit.nodes.resize(static_cast<std::size_t>(d));
    fit.fitted.resize(n, d);
    fit.residuals.resize(n, d);

    for (int j = 0; j < d; ++j) {
        auto& node = fit.nodes[static_cast<std::size_t>(j)];
        const Eigen::VectorXd y = ds.values.col(ds.groups.columns(j).first);
        node.intercept = y.mean();
        const auto& parents = dag.parents(j);
        if (parents.empty()) {
            fit.fitted.col(j).setConstant(node.intercept);
            fit.residuals.col(j) = y.array() - node.intercept;
            continue;
        }
        const int per_parent = scfg.interior_knots + scfg.degree + 1;
        const Eigen::Index cols = static_cast<Eigen::Index>(parents.size()) * per_parent;
        if (n <= cols + 1) {
            throw std::invalid_argument("fit: node '" + ds.groups.name(j) + "' needs n > " + std::to_string(cols + 1) +
                                        " observations for its basis");
        }
        Eigen::MatrixXd design(n, cols);
        for (std::size_t pi = 0; pi < parents.size(); ++pi) {
            const Eigen::VectorXd x = ds.values.col(ds.groups.columns(parents[pi]).first);
            node.bases.emplace_back(x, scfg.degree, scfg.interior_knots);
            Eigen::MatrixXd g = node.bases.back().design(x);
            node.basis_means.emplace_back(g.colwise().mean());
            g.rowwise() -= node.basis_means.back();
            design.middleCols(static_cast<Eigen::Index>(pi) * per_parent, per_parent) = g;
        }
        const Eigen::VectorXd yc = y.array() - node.intercept;
        Eigen::MatrixXd gram = design.transpose() * design;
        gram.diagonal().array() += scfg.ridge;
        const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
        node.coef = solver.solve(design.transpose() * yc);
        if (solver.info() != Eigen::Success || !node.coef.allFinite()) {
            throw std::runtime_error("fit: normal equations for node '" + ds.groups.name(j) +
                                     "' are rank deficient even after ridge regularization");
        }
        fit.fitted.col(j) = design * node.coef;
        fit.fitted.col(j).array() += node.intercept;
        fit.residuals.col(j) = y - fit.fitted.col(j);
    }
    return fit;
}

Eigen::VectorXd SemFit::predict(int node_index, const std::vector<Eigen::VectorXd>& parent_columns) const {
    const auto& node = nodes[static_cast<std::size_t>(node_index)];
    if (parent_columns.size() != node.bases.size()) throw std::invalid_argument("predict: parent column count mismatch");
    Eigen::Index n = 0;
    if (!parent_columns.empty()) n = parent_columns.front().size();
    Eigen::VectorXd out = Eigen::VectorXd::Constant(n == 0 ? fitted.rows() : n, node.intercept);
    Eigen::Index offset = 0;
    for (std::size_t pi = 0; pi < node.bases.size(); ++pi) {
        Eigen::MatrixXd g = node.bases[pi].design(parent_columns[pi]);
        g.rowwise() -= node.basis_means[pi];
        const Eigen::Index width = g.cols();
        out += g * node.coef.segment(offset, width);
        offset += width;
    }
    return out;
}

TestResult residual_bootstrap_test(const Dataset& ds, const DagModel& dag, const StatisticSpec& stat,
                                   const BootstrapConfig& boot, const SplineConfig& scfg, bool refit) {
    if (boot.B < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
    if (!(boot.alpha > 0.0 && boot.alpha < 1.0)) throw std::invalid_argument("bootstrap: alpha must lie in (0,1)");
    const SemFit fit = fit_additive_sem(ds, dag, scfg);
    const Eigen::Index n = ds.values.rows();
    const int d = ds.d();

    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(d));
    for (int g = 0; g < d; ++g) names.push_back(ds.groups.name(g));
    const GroupSpec residual_groups = GroupSpec::univariate(names);

    Dataset residual_ds;
    residual_ds.groups = residual_groups;
    residual_ds.values = fit.residuals;

    TestResult result;
    result.seed = boot.seed;
    result.B = boot.B;
    result.alpha = boot.alpha;
    result.statistic = static_cast<double>(n) * compute_statistic(residual_ds, stat);

    result.replicates.assign(static_cast<std::size_t>(boot.B), 0.0);
    const RngStream root(boot.seed);
    parallel_for(static_cast<std::size_t>(boot.B), boot.threads, [&](std::size_t b) {
        RngStream stream = root.child(b);
        // Resample residuals per node, then rebuild each node from its fitted
        // equation evaluated at the original covariates.
        Dataset boot_ds;
        boot_ds.groups = residual_groups;
        boot_ds.values.resize(n, d);
        for (int j : dag.topological_order()) {
            Eigen::VectorXd eps(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                eps(i) = fit.residuals(static_cast<Eigen::Index>(stream.next_below(static_cast<std::uint64_t>(n))), j);
            }
            boot_ds.values.col(j) = fit.fitted.col(j) + eps;
        }
        Dataset replicate_residuals;
        replicate_residuals.groups = residual_groups;
        if (refit) {
            replicate_residuals.values = fit_additive_sem(boot_ds, dag, scfg).residuals;
        } else {
            // Diagnostic mode: test the resampled residuals without re-estimation.
            replicate_residuals.values = boot_ds.values - fit.fitted;
        }
        result.replicates[b] = static_cast<double>(n) * compute_statistic(replicate_residuals, stat);
    });

    std::size_t greater = 0, greater_equal = 0;
    for (double r : result.replicates) {
        if (r > result.statistic) ++greater;
        if (r >= result.statistic) ++greater_equal;
    }
    const auto bcount = static_cast<double>(boot.B);
    result.p_value = boot.rule == PValueRule::kPaper ? static_cast<double>(greater) / bcount
                                                     : (1.0 + static_cast<double>(greater_equal)) / (bcount + 1.0);
    result.reject = result.statistic > empirical_quantile(result.replicates, 1.0 - boot.alpha);
    return result;
}

std::vector<RankedModel> select_dag(const Dataset& ds, const std::vector<DagModel>& candidates,
                                    const StatisticSpec& stat, const BootstrapConfig& boot, const SplineConfig& scfg,
                                    bool refit) {
    if (candidates.empty()) throw std::invalid_argument("select_dag: empty candidate list");
    std::vector<std::string> names;
    for (int g = 0; g < ds.d(); ++g) names.push_back(ds.groups.name(g));

    std::vector<RankedModel> ranked;
    ranked.reserve(candidates.size());
    for (const auto& model : candidates) ranked.push_back({model, 0.0, model.encode(names)});

    const RngStream root(boot.seed);
    parallel_for(candidates.size(), boot.threads, [&](std::size_t m) {
        BootstrapConfig candidate_boot = boot;
        // Stream keyed to the model itself: duplicates get identical results.
        candidate_boot.seed = root.fork_seed(fnv1a(ranked[m].encoding));
        candidate_boot.threads = 1;
        ranked[m].p_value = residual_bootstrap_test(ds, ranked[m].model, stat, candidate_boot, scfg, refit).p_value;
    });

    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedModel& a, const RankedModel& b) {
        if (a.p_value != b.p_value) return a.p_value > b.p_value;
        if (a.model.edge_count() != b.model.edge_count()) return a.model.edge_count() < b.model.edge_count();
        return a.encoding < b.encoding;
    });
    return ranked;
}

Dataset center_and_scale(const Dataset& ds) {
    Dataset out;
    out.groups = ds.groups;
    out.values = ds.values;
    const auto n = static_cast<double>(ds.values.rows());
    for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
        out.values.col(j).array() -= out.values.col(j).mean();
        const double norm = out.values.col(j).norm();
        if (norm == 0.0) throw std::invalid_argument("center_and_scale: column " + std::to_string(j + 1) + " is constant");
        out.values.col(j) *= std::sqrt(n) / norm;
    }
    return out;
}

}  // namespace jointdep
