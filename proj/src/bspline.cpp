#include "jointdep/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jointdep {

namespace {

// Linear-interpolation empirical quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double prob) {
    const double h = prob * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

BSplineBasis::BSplineBasis(const Eigen::Ref<const Eigen::VectorXd>& sample, int degree, int interior_knots) {
    if (degree < 1) throw std::invalid_argument("B-spline degree must be >= 1");
    if (interior_knots < 0) throw std::invalid_argument("interior knot count must be >= 0");
    if (sample.size() < 2) throw std::invalid_argument("B-spline basis needs at least 2 sample points");
    degree_ = degree;
    basis_count_ = interior_knots + degree + 1;

    std::vector<double> sorted(sample.data(), sample.data() + sample.size());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    if (!(hi > lo)) throw std::invalid_argument("B-spline basis needs a non-degenerate sample range");

    knots_.reserve(static_cast<std::size_t>(interior_knots + 2 * (degree + 1)));
    for (int i = 0; i <= degree; ++i) knots_.push_back(lo);
    for (int i = 1; i <= interior_knots; ++i) {
        knots_.push_back(quantile_sorted(sorted, static_cast<double>(i) / static_cast<double>(interior_knots + 1)));
    }
    for (int i = 0; i <= degree; ++i) knots_.push_back(hi);
}

void BSplineBasis::evaluate(double x, Eigen::VectorXd& out) const {
    const double lo = knots_.front();
    const double hi = knots_.back();
    x = std::clamp(x, lo, hi);
    out.setZero(basis_count_);

    // Knot span containing x: largest i with knots[i] <= x < knots[i+1],
    // except x == hi which belongs to the last nonempty span.
    int span;
    if (x >= hi) {
        span = basis_count_ - 1;
        while (span > degree_ && knots_[static_cast<std::size_t>(span)] == knots_[static_cast<std::size_t>(span) + 1]) --span;
    } else {
        span = static_cast<int>(std::upper_bound(knots_.begin() + degree_, knots_.begin() + basis_count_ + 1, x) -
                                knots_.begin()) - 1;
    }

    // Cox-de Boor triangle for the degree+1 basis functions alive on the span.
    std::vector<double> left(static_cast<std::size_t>(degree_) + 1);
    std::vector<double> right(static_cast<std::size_t>(degree_) + 1);
    std::vector<double> values(static_cast<std::size_t>(degree_) + 1);
    values[0] = 1.0;
    for (int j = 1; j <= degree_; ++j) {
        left[static_cast<std::size_t>(j)] = x - knots_[static_cast<std::size_t>(span + 1 - j)];
        right[static_cast<std::size_t>(j)] = knots_[static_cast<std::size_t>(span + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
            const double temp = denom == 0.0 ? 0.0 : values[static_cast<std::size_t>(r)] / denom;
            values[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        values[static_cast<std::size_t>(j)] = saved;
    }
    for (int j = 0; j <= degree_; ++j) {
        const int idx = span - degree_ + j;
        if (idx >= 0 && idx < basis_count_) out(idx) = values[static_cast<std::size_t>(j)];
    }
}

Eigen::MatrixXd BSplineBasis::design(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::MatrixXd g(x.size(), basis_count_);
    Eigen::VectorXd row;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        evaluate(x(i), row);
        g.row(i) = row.transpose();
    }
    return g;
}

}  // namespace jointdep
