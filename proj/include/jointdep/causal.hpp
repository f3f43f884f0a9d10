#pragma once

#include "jointdep/bspline.hpp"
#include "jointdep/inference.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jointdep {

/// Labeled DAG given by per-node parent sets. Construction enforces
/// acyclicity and rejects self-parents.
class DagModel {
  public:
    DagModel(int node_count, std::vector<std::vector<int>> parents);

    int node_count() const { return node_count_; }
    const std::vector<int>& parents(int node) const { return parents_[static_cast<std::size_t>(node)]; }
    int edge_count() const;
    const std::vector<int>& topological_order() const { return topo_order_; }

    /// Canonical text form, e.g. "x1<-;x2<-x1;x3<-x1,x2".
    std::string encode(const std::vector<std::string>& names) const;

  private:
    int node_count_;
    std::vector<std::vector<int>> parents_;  // each sorted ascending
    std::vector<int> topo_order_;
};

/// All labeled DAGs on d nodes in deterministic (edge-mask) order.
/// Guarded to d <= 4; larger problems must supply an explicit candidate list.
std::vector<DagModel> enumerate_dags(int d);

/// Parses one candidate line, `child<-parent,parent;child<-...`, with nodes
/// referenced by group name. Unmentioned nodes are parentless.
DagModel parse_dag(const std::string& line, const GroupSpec& groups);

/// Loads a candidate file: one model per line, '#' comments and blank lines skipped.
std::vector<DagModel> load_dag_candidates(const std::string& path, const GroupSpec& groups);

struct SplineConfig {
    int degree = 3;
    int interior_knots = 10;  // at empirical quantiles of the parent variable
    double ridge = 1e-8;
};

/// Additive structural-equation fit of every node on its parents.
struct SemFit {
    struct Node {
        std::vector<BSplineBasis> bases;        // one per parent, parent order
        std::vector<Eigen::RowVectorXd> basis_means;  // per-parent design column means
        Eigen::VectorXd coef;                   // concatenated per-parent coefficients
        double intercept = 0.0;
    };
    std::vector<Node> nodes;
    Eigen::MatrixXd fitted;     // n x d
    Eigen::MatrixXd residuals;  // n x d, fitted + residuals == data per node

    /// Fitted value of one node from given parent columns (n-vector per parent).
    Eigen::VectorXd predict(int node, const std::vector<Eigen::VectorXd>& parent_columns) const;
};

/// Least-squares additive fit: each parent contributes a mean-centered
/// B-spline expansion; a tiny ridge keeps the normal equations well posed.
/// All groups must be univariate and n must exceed each node's basis size.
SemFit fit_additive_sem(const Dataset& ds, const DagModel& dag, const SplineConfig& scfg);

/// Goodness-of-fit test of a candidate DAG: fit, then bootstrap-resample the
/// residuals per node, rebuild data from the fitted equations, refit, and
/// recompute the joint-independence statistic of the residuals. With
/// refit = false the resampled residuals are tested directly (diagnostic
/// mode; known to be miscalibrated).
TestResult residual_bootstrap_test(const Dataset& ds, const DagModel& dag, const StatisticSpec& stat,
                                   const BootstrapConfig& boot, const SplineConfig& scfg, bool refit = true);

struct RankedModel {
    DagModel model;
    double p_value = 0.0;
    std::string encoding;
};

/// Tests every candidate and ranks by p-value (desc), then edge count (asc),
/// then canonical encoding. Per-candidate RNG streams derive from the model
/// encoding, so duplicate candidates obtain identical p-values.
std::vector<RankedModel> select_dag(const Dataset& ds, const std::vector<DagModel>& candidates,
                                    const StatisticSpec& stat, const BootstrapConfig& boot, const SplineConfig& scfg,
                                    bool refit = true);

/// Center each column and rescale it to Euclidean norm sqrt(n).
Dataset center_and_scale(const Dataset& ds);

}  // namespace jointdep
