#pragma once

#include "jointdep/dataset.hpp"

namespace jointdep {

/// Pairwise Euclidean distances within one variable group.
struct DistanceMatrix {
    Eigen::MatrixXd d;        // n x n, symmetric, zero diagonal
    int group = -1;           // index into the owning dataset's groups, -1 if detached
    std::string label;        // group name when known
};

enum class Centering { kV, kU };

/// Doubly-centered transform of a distance matrix.
///   kV: row mean + column mean - entry - grand mean (all row/column sums 0)
///   kU: divisors (n-2) and (n-1)(n-2), zero diagonal, off-diagonal row sums 0
struct CenteredMatrix {
    Eigen::MatrixXd m;
    Centering kind = Centering::kV;
    int group = -1;
    std::string label;
};

Eigen::MatrixXd pairwise_distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& block);

DistanceMatrix pairwise_distances(const Dataset& ds, int group);

Eigen::MatrixXd v_center_matrix(const Eigen::MatrixXd& d);
Eigen::MatrixXd u_center_matrix(const Eigen::MatrixXd& d);  // requires n >= 4

CenteredMatrix v_center(const DistanceMatrix& d);
CenteredMatrix u_center(const DistanceMatrix& d);

/// Replaces every column by its empirical CDF value (#{x_j <= x} / n), in (0,1].
Dataset rank_transform(const Dataset& ds);
Eigen::VectorXd rank_transform_column(const Eigen::Ref<const Eigen::VectorXd>& col);

}  // namespace jointdep
