#include "jointdep/centering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jointdep {

Eigen::MatrixXd pairwise_distance_matrix(const Eigen::Ref<const Eigen::MatrixXd>& block) {
    const Eigen::Index n = block.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = k + 1; l < n; ++l) {
            double sq = 0.0;
            for (Eigen::Index j = 0; j < block.cols(); ++j) {
                const double diff = block(k, j) - block(l, j);
                sq += diff * diff;
            }
            const double dist = std::sqrt(sq);
            d(k, l) = dist;
            d(l, k) = dist;
        }
    }
    return d;
}

DistanceMatrix pairwise_distances(const Dataset& ds, int group) {
    if (group < 0 || group >= ds.d()) throw std::invalid_argument("pairwise_distances: no such group");
    DistanceMatrix out;
    out.d = pairwise_distance_matrix(ds.group_block(group));
    out.group = group;
    out.label = ds.groups.name(group);
    return out;
}

Eigen::MatrixXd v_center_matrix(const Eigen::MatrixXd& d) {
    const Eigen::Index n = d.rows();
    const Eigen::VectorXd row_means = d.rowwise().mean();
    const Eigen::VectorXd col_means = d.colwise().mean();
    const double grand_mean = d.mean();
    Eigen::MatrixXd u(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
        for (Eigen::Index k = 0; k < n; ++k) {
            u(k, l) = row_means(k) + col_means(l) - d(k, l) - grand_mean;
        }
    }
    return u;
}

Eigen::MatrixXd u_center_matrix(const Eigen::MatrixXd& d) {
    const Eigen::Index n = d.rows();
    if (n < 4) throw std::invalid_argument("U-centering requires n >= 4");
    const Eigen::VectorXd row_sums = d.rowwise().sum();
    const Eigen::VectorXd col_sums = d.colwise().sum();
    const double total = d.sum();
    const double inv_nm2 = 1.0 / static_cast<double>(n - 2);
    const double grand = total / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
    Eigen::MatrixXd u(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
        for (Eigen::Index k = 0; k < n; ++k) {
            u(k, l) = (k == l) ? 0.0 : col_sums(l) * inv_nm2 + row_sums(k) * inv_nm2 - d(k, l) - grand;
        }
    }
    return u;
}

CenteredMatrix v_center(const DistanceMatrix& d) {
    return {v_center_matrix(d.d), Centering::kV, d.group, d.label};
}

CenteredMatrix u_center(const DistanceMatrix& d) {
    return {u_center_matrix(d.d), Centering::kU, d.group, d.label};
}

Eigen::VectorXd rank_transform_column(const Eigen::Ref<const Eigen::VectorXd>& col) {
    const Eigen::Index n = col.size();
    std::vector<double> sorted(col.data(), col.data() + n);
    std::sort(sorted.begin(), sorted.end());
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto le = std::upper_bound(sorted.begin(), sorted.end(), col(i)) - sorted.begin();
        out(i) = static_cast<double>(le) / static_cast<double>(n);
    }
    return out;
}

Dataset rank_transform(const Dataset& ds) {
    Dataset out;
    out.groups = ds.groups;
    out.values.resize(ds.values.rows(), ds.values.cols());
    for (Eigen::Index j = 0; j < ds.values.cols(); ++j) {
        out.values.col(j) = rank_transform_column(ds.values.col(j));
    }
    return out;
}

}  // namespace jointdep
