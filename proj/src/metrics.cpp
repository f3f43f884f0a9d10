#include "jointdep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace jointdep {

namespace {

void check_consistent(const std::vector<CenteredMatrix>& mats, Estimator estimator, int min_d) {
    if (static_cast<int>(mats.size()) < min_d) {
        throw std::invalid_argument("need at least " + std::to_string(min_d) + " groups");
    }
    const Centering want = estimator == Estimator::kVStat ? Centering::kV : Centering::kU;
    const Eigen::Index n = mats.front().m.rows();
    for (const auto& mat : mats) {
        if (mat.kind != want) throw std::invalid_argument("centering kind does not match the requested estimator");
        if (mat.m.rows() != n || mat.m.cols() != n) throw std::invalid_argument("centered matrices differ in size");
    }
    if (estimator == Estimator::kUCentered && n < 4) throw std::invalid_argument("U-centered estimators require n >= 4");
}

// Multiplication order that depends only on the multiset of matrices, not on
// the order the caller listed them in. Keeps group-permutation invariance
// bit-exact despite floating-point non-associativity.
std::vector<int> canonical_order(const std::vector<const Eigen::MatrixXd*>& mats) {
    std::vector<int> order(mats.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto* ma = mats[static_cast<std::size_t>(a)];
        const auto* mb = mats[static_cast<std::size_t>(b)];
        return std::lexicographical_compare(ma->data(), ma->data() + ma->size(), mb->data(), mb->data() + mb->size());
    });
    return order;
}

// sum_{k,l} prod_i (mats[i](k,l) + shift), multiplied in canonical order.
double product_sum(const std::vector<const Eigen::MatrixXd*>& mats, double shift) {
    const std::vector<int> order = canonical_order(mats);
    const Eigen::Index n = mats.front()->rows();
    double total = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
        for (Eigen::Index k = 0; k < n; ++k) {
            double prod = 1.0;
            for (int idx : order) prod *= (*mats[static_cast<std::size_t>(idx)])(k, l) + shift;
            total += prod;
        }
    }
    return total;
}

std::vector<const Eigen::MatrixXd*> matrix_pointers(const std::vector<CenteredMatrix>& mats) {
    std::vector<const Eigen::MatrixXd*> ptrs;
    ptrs.reserve(mats.size());
    for (const auto& m : mats) ptrs.push_back(&m.m);
    return ptrs;
}

double dcov_sq_from_pointers(const std::vector<const Eigen::MatrixXd*>& ptrs, Estimator estimator) {
    const double n = static_cast<double>(ptrs.front()->rows());
    const double sum = product_sum(ptrs, 0.0);
    // The U-centered diagonal is exactly zero, so the all-pairs sum already
    // equals the k != l sum.
    return estimator == Estimator::kVStat ? sum / (n * n) : sum / (n * (n - 3.0));
}

double jdcov_from_pointers(const std::vector<const Eigen::MatrixXd*>& ptrs, double c, Estimator estimator) {
    if (c < 0.0) throw std::invalid_argument("jdcov: c must be nonnegative");
    const double n = static_cast<double>(ptrs.front()->rows());
    const double d = static_cast<double>(ptrs.size());
    const double sum = product_sum(ptrs, c);
    if (estimator == Estimator::kVStat) return sum / (n * n) - std::pow(c, d);
    return sum / (n * (n - 3.0)) - n / (n - 3.0) * std::pow(c, d);
}

double dvar_sq_matrix(const Eigen::MatrixXd& m, Estimator estimator) {
    const double n = static_cast<double>(m.rows());
    const double sum = m.array().square().sum();
    return estimator == Estimator::kVStat ? sum / (n * n) : sum / (n * (n - 3.0));
}

}  // namespace

std::vector<SetPartition> enumerate_set_partitions(int d) {
    if (d < 1 || d > 10) throw std::invalid_argument("set partitions supported for 1 <= d <= 10");
    std::vector<SetPartition> out;
    std::vector<int> rgs(static_cast<std::size_t>(d), 0);
    // Lexicographic enumeration of restricted growth strings:
    // rgs[0] = 0 and rgs[i] <= 1 + max(rgs[0..i-1]).
    auto emit = [&]() {
        SetPartition p;
        const int blocks = 1 + *std::max_element(rgs.begin(), rgs.end());
        p.blocks.assign(static_cast<std::size_t>(blocks), {});
        for (int i = 0; i < d; ++i) p.blocks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(i)])].push_back(i);
        out.push_back(std::move(p));
    };
    auto recurse = [&](auto&& self, int pos, int max_so_far) -> void {
        if (pos == d) {
            emit();
            return;
        }
        for (int v = 0; v <= max_so_far + 1; ++v) {
            rgs[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, std::max(max_so_far, v));
        }
    };
    recurse(recurse, 1, 0);
    return out;
}

long long bell_number(int d) {
    static const long long kBell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975};
    if (d < 0 || d > 10) throw std::invalid_argument("bell_number supported for 0 <= d <= 10");
    return kBell[d];
}

std::string metric_kind_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::kDcov: return "dcov";
        case MetricKind::kDvar: return "dvar";
        case MetricKind::kJdcov: return "jdcov";
        case MetricKind::kJdcovScaled: return "jdcov-s";
        case MetricKind::kJdcovRank: return "jdcov-r";
        case MetricKind::kCumulant: return "cumulant";
        case MetricKind::kTmt: return "tmt";
    }
    return "?";
}

MetricValue dcov_sq_high_order(const std::vector<CenteredMatrix>& mats, Estimator estimator) {
    check_consistent(mats, estimator, 1);
    return {dcov_sq_from_pointers(matrix_pointers(mats), estimator), MetricKind::kDcov, estimator, 0.0};
}

MetricValue dvar(const CenteredMatrix& mat) {
    const Estimator estimator = mat.kind == Centering::kV ? Estimator::kVStat : Estimator::kUCentered;
    check_consistent({mat}, estimator, 1);
    return {dvar_sq_matrix(mat.m, estimator), MetricKind::kDvar, estimator, 0.0};
}

MetricValue jdcov_sq(const std::vector<CenteredMatrix>& mats, double c, Estimator estimator) {
    check_consistent(mats, estimator, 2);
    return {jdcov_from_pointers(matrix_pointers(mats), c, estimator), MetricKind::kJdcov, estimator, c};
}

MetricValue jdcov_sq_scaled(const std::vector<CenteredMatrix>& mats, double c, Estimator estimator) {
    check_consistent(mats, estimator, 2);
    std::vector<Eigen::MatrixXd> scaled;
    scaled.reserve(mats.size());
    for (std::size_t i = 0; i < mats.size(); ++i) {
        const double dv = dvar_sq_matrix(mats[i].m, estimator);
        const double scale = mats[i].m.array().abs().mean();
        if (!(dv > 1e-12 * scale * scale)) {
            const std::string name = mats[i].label.empty() ? "group " + std::to_string(i + 1) : "group '" + mats[i].label + "'";
            throw std::invalid_argument("jdcov-s: " + name + " has (near-)zero distance variance; scaling undefined");
        }
        scaled.push_back(mats[i].m / std::sqrt(dv));
    }
    std::vector<const Eigen::MatrixXd*> ptrs;
    ptrs.reserve(scaled.size());
    for (const auto& m : scaled) ptrs.push_back(&m);
    return {jdcov_from_pointers(ptrs, c, estimator), MetricKind::kJdcovScaled, estimator, c};
}

MetricValue jdcov_sq_rank(const Dataset& ds, double c, Estimator estimator) {
    const Dataset ranked = rank_transform(ds);
    MetricValue v = jdcov_sq(centered_group_matrices(ranked, estimator), c, estimator);
    v.kind = MetricKind::kJdcovRank;
    return v;
}

MetricValue distance_cumulant(const std::vector<CenteredMatrix>& mats) {
    check_consistent(mats, Estimator::kVStat, 2);
    const int d = static_cast<int>(mats.size());
    if (d > 10) throw std::invalid_argument("distance cumulant limited to d <= 10 (Bell(" + std::to_string(d) + ") partitions would be required)");
    const double n = static_cast<double>(mats.front().m.rows());

    // Moment of one block: n^-2 sum_{k,l} prod_{i in block} U_i(k,l).
    // Each distinct block is shared by many partitions, so cache by bitmask.
    std::vector<double> block_moment(static_cast<std::size_t>(1) << d, 0.0);
    std::vector<bool> have(static_cast<std::size_t>(1) << d, false);
    auto moment = [&](const std::vector<int>& block) {
        std::size_t mask = 0;
        for (int i : block) mask |= static_cast<std::size_t>(1) << i;
        if (!have[mask]) {
            std::vector<const Eigen::MatrixXd*> ptrs;
            for (int i : block) ptrs.push_back(&mats[static_cast<std::size_t>(i)].m);
            block_moment[mask] = product_sum(ptrs, 0.0) / (n * n);
            have[mask] = true;
        }
        return block_moment[mask];
    };

    double total = 0.0;
    for (const SetPartition& partition : enumerate_set_partitions(d)) {
        const int blocks = partition.block_count();
        double coeff = (blocks % 2 == 1) ? 1.0 : -1.0;
        for (int f = 2; f < blocks; ++f) coeff *= static_cast<double>(f);  // (|pi|-1)!
        double prod = coeff;
        for (const auto& block : partition.blocks) prod *= moment(block);
        total += prod;
    }
    return {total, MetricKind::kCumulant, Estimator::kVStat, 0.0};
}

MetricValue t_mt(const Dataset& ds, Estimator estimator) {
    validate(ds, true);
    const int d = ds.d();
    double total = 0.0;
    for (int i = 0; i + 1 < d; ++i) {
        const Eigen::MatrixXd di = pairwise_distance_matrix(ds.group_block(i));
        // Distances of the concatenated tail (groups i+1..d), one Euclidean
        // norm over all of its columns.
        const int first = ds.groups.columns(i + 1).first;
        const Eigen::Index tail_cols = ds.values.cols() - first;
        const Eigen::MatrixXd dtail = pairwise_distance_matrix(ds.values.middleCols(first, tail_cols));
        std::vector<const Eigen::MatrixXd*> ptrs;
        Eigen::MatrixXd ci, ct;
        if (estimator == Estimator::kVStat) {
            ci = v_center_matrix(di);
            ct = v_center_matrix(dtail);
        } else {
            ci = u_center_matrix(di);
            ct = u_center_matrix(dtail);
        }
        ptrs = {&ci, &ct};
        total += dcov_sq_from_pointers(ptrs, estimator);
    }
    return {total, MetricKind::kTmt, estimator, 0.0};
}

std::vector<CenteredMatrix> centered_group_matrices(const Dataset& ds, Estimator estimator) {
    std::vector<CenteredMatrix> mats;
    mats.reserve(static_cast<std::size_t>(ds.d()));
    for (int g = 0; g < ds.d(); ++g) {
        const DistanceMatrix dm = pairwise_distances(ds, g);
        mats.push_back(estimator == Estimator::kVStat ? v_center(dm) : u_center(dm));
    }
    return mats;
}

double compute_statistic(const Dataset& ds, const StatisticSpec& spec) {
    switch (spec.kind) {
        case MetricKind::kDcov:
            return dcov_sq_high_order(centered_group_matrices(ds, spec.config.estimator), spec.config.estimator).value;
        case MetricKind::kDvar:
            if (ds.d() != 1) throw std::invalid_argument("dvar statistic needs exactly one group");
            return dvar(centered_group_matrices(ds, spec.config.estimator).front()).value;
        case MetricKind::kJdcov: {
            switch (spec.config.variant) {
                case Variant::kPlain:
                    return jdcov_sq(centered_group_matrices(ds, spec.config.estimator), spec.config.c, spec.config.estimator).value;
                case Variant::kScaled:
                    return jdcov_sq_scaled(centered_group_matrices(ds, spec.config.estimator), spec.config.c, spec.config.estimator).value;
                case Variant::kRank:
                    return jdcov_sq_rank(ds, spec.config.c, spec.config.estimator).value;
            }
            break;
        }
        case MetricKind::kJdcovScaled:
            return jdcov_sq_scaled(centered_group_matrices(ds, spec.config.estimator), spec.config.c, spec.config.estimator).value;
        case MetricKind::kJdcovRank:
            return jdcov_sq_rank(ds, spec.config.c, spec.config.estimator).value;
        case MetricKind::kCumulant:
            return distance_cumulant(centered_group_matrices(ds, Estimator::kVStat)).value;
        case MetricKind::kTmt:
            return t_mt(ds, spec.config.estimator).value;
    }
    throw std::invalid_argument("unknown statistic");
}

}  // namespace jointdep
