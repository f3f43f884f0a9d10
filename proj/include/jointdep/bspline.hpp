#pragma once

#include <Eigen/Dense>

#include <vector>

namespace jointdep {

/// Clamped B-spline basis with interior knots at empirical quantiles of a
/// training sample. Evaluation points are clamped to the training range, so
/// extrapolation is constant beyond the boundary knots.
class BSplineBasis {
  public:
    BSplineBasis(const Eigen::Ref<const Eigen::VectorXd>& sample, int degree, int interior_knots);

    int size() const { return basis_count_; }
    int degree() const { return degree_; }

    /// Values of all basis functions at x (one row of the design matrix).
    /// out is resized to size().
    void evaluate(double x, Eigen::VectorXd& out) const;

    /// n x size() design matrix for a vector of evaluation points.
    Eigen::MatrixXd design(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    const std::vector<double>& knots() const { return knots_; }

  private:
    int degree_;
    int basis_count_;
    std::vector<double> knots_;  // (degree+1) boundary copies on both ends
};

}  // namespace jointdep
