#include "jointdep/metrics.hpp"

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace jointdep;

namespace {

std::vector<Eigen::MatrixXd> oracle_centered(const Dataset& ds, bool v_form) {
    std::vector<Eigen::MatrixXd> mats;
    for (int g = 0; g < ds.d(); ++g) {
        const Eigen::MatrixXd d = oracle::distances(ds.group_block(g));
        mats.push_back(v_form ? oracle::v_centered(d) : oracle::u_centered(d));
    }
    return mats;
}

}  // namespace

TEST_CASE("set partitions: counts, canonical order, block validity") {
    CHECK(enumerate_set_partitions(1).size() == 1);
    CHECK(enumerate_set_partitions(3).size() == 5);
    CHECK(enumerate_set_partitions(4).size() == 15);
    CHECK(enumerate_set_partitions(5).size() == 52);
    for (int d = 1; d <= 6; ++d) {
        CHECK(static_cast<long long>(enumerate_set_partitions(d).size()) == bell_number(d));
    }
    CHECK_THROWS_AS(enumerate_set_partitions(11), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_set_partitions(0), std::invalid_argument);

    // first partition keeps everything together, last is all singletons
    const auto parts = enumerate_set_partitions(3);
    CHECK(parts.front().block_count() == 1);
    CHECK(parts.back().block_count() == 3);
    for (const auto& p : parts) {
        std::vector<int> all;
        for (const auto& b : p.blocks) {
            CHECK(!b.empty());
            all.insert(all.end(), b.begin(), b.end());
        }
        std::sort(all.begin(), all.end());
        CHECK(all == std::vector<int>{0, 1, 2});
    }
}

TEST_CASE("pairwise dcov of two binary points is 1/4") {
    Dataset ds;
    ds.groups = GroupSpec::parse("x:1,y:2");
    ds.values.resize(2, 2);
    ds.values << 0.0, 0.0, 1.0, 1.0;
    const MetricValue v = dcov_sq_high_order(centered_group_matrices(ds, Estimator::kVStat), Estimator::kVStat);
    CHECK(v.value == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("a constant group annihilates the high-order dcov") {
    Dataset ds = testutil::random_univariate(7, 3, 42);
    ds.values.col(1).setConstant(3.3);
    const MetricValue v = dcov_sq_high_order(centered_group_matrices(ds, Estimator::kVStat), Estimator::kVStat);
    CHECK(v.value == 0.0);
}

TEST_CASE("third-order dcov matches the brute-force double sum") {
    const Dataset ds = testutil::random_univariate(6, 3, 7);
    const double got = dcov_sq_high_order(centered_group_matrices(ds, Estimator::kVStat), Estimator::kVStat).value;
    const double want = oracle::v_moment(oracle_centered(ds, true));
    CHECK(got == doctest::Approx(want).epsilon(1e-12));

    const double got_u = dcov_sq_high_order(centered_group_matrices(ds, Estimator::kUCentered), Estimator::kUCentered).value;
    const double want_u = oracle::u_moment(oracle_centered(ds, false));
    CHECK(got_u == doctest::Approx(want_u).epsilon(1e-12));
}

TEST_CASE("estimator/kind mismatches are rejected") {
    const Dataset ds = testutil::random_univariate(8, 2, 3);
    CHECK_THROWS_AS(dcov_sq_high_order(centered_group_matrices(ds, Estimator::kVStat), Estimator::kUCentered),
                    std::invalid_argument);
    auto mats = centered_group_matrices(ds, Estimator::kVStat);
    auto small = centered_group_matrices(testutil::random_univariate(5, 1, 3), Estimator::kVStat);
    mats.push_back(small.front());
    CHECK_THROWS_AS(dcov_sq_high_order(mats, Estimator::kVStat), std::invalid_argument);
}

TEST_CASE("distance variance") {
    Dataset ds;
    ds.groups = GroupSpec::parse("x:1");
    ds.values.resize(2, 1);
    ds.values << 0.0, 1.0;
    CHECK(dvar(centered_group_matrices(ds, Estimator::kVStat).front()).value == doctest::Approx(0.25));

    Dataset flat = ds;
    flat.values.setConstant(1.0);
    CHECK(dvar(centered_group_matrices(flat, Estimator::kVStat).front()).value == 0.0);

    const Dataset big = testutil::random_univariate(8, 1, 11);
    const auto mat = centered_group_matrices(big, Estimator::kUCentered).front();
    const double want = oracle::u_moment({mat.m, mat.m});
    CHECK(dvar(mat).value == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("pairwise v-stat dcov is nonnegative; u-form may go negative") {
    bool saw_negative_u = false;
    for (int trial = 0; trial < 30; ++trial) {
        const Dataset ds = testutil::random_grouped(6 + trial % 7, {1, 2}, 9000 + static_cast<std::uint64_t>(trial));
        const double v = dcov_sq_high_order(centered_group_matrices(ds, Estimator::kVStat), Estimator::kVStat).value;
        CHECK(v >= -1e-12);
        const double u =
            dcov_sq_high_order(centered_group_matrices(ds, Estimator::kUCentered), Estimator::kUCentered).value;
        if (u < 0.0) saw_negative_u = true;
    }
    CHECK(saw_negative_u);
}

TEST_CASE("jdcov with c = 0 collapses to the d-th order dcov") {
    const Dataset ds = testutil::random_univariate(9, 4, 21);
    const auto mats = centered_group_matrices(ds, Estimator::kVStat);
    CHECK(jdcov_sq(mats, 0.0, Estimator::kVStat).value ==
          doctest::Approx(dcov_sq_high_order(mats, Estimator::kVStat).value).epsilon(1e-14));
}

TEST_CASE("u-form pairwise jdcov does not depend on c") {
    const Dataset ds = testutil::random_univariate(8, 2, 5);
    const auto mats = centered_group_matrices(ds, Estimator::kUCentered);
    const double at0 = jdcov_sq(mats, 0.0, Estimator::kUCentered).value;
    const double at05 = jdcov_sq(mats, 0.5, Estimator::kUCentered).value;
    const double at2 = jdcov_sq(mats, 2.0, Estimator::kUCentered).value;
    CHECK(std::fabs(at0 - at05) < 1e-12);
    CHECK(std::fabs(at0 - at2) < 1e-12);
}

TEST_CASE("jdcov rejects negative c") {
    const Dataset ds = testutil::random_univariate(6, 2, 5);
    CHECK_THROWS_AS(jdcov_sq(centered_group_matrices(ds, Estimator::kVStat), -1.0, Estimator::kVStat),
                    std::invalid_argument);
}

TEST_CASE("v-form jdcov expands into c-weighted subset dcov terms") {
    const Dataset ds = testutil::random_univariate(10, 3, 17);
    const auto mats = centered_group_matrices(ds, Estimator::kVStat);
    for (double c : {0.0, 0.5, 1.0, 2.0}) {
        const double lhs = jdcov_sq(mats, c, Estimator::kVStat).value;
        double rhs = dcov_sq_high_order(mats, Estimator::kVStat).value;
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                rhs += c * dcov_sq_high_order({mats[static_cast<std::size_t>(i)], mats[static_cast<std::size_t>(j)]},
                                              Estimator::kVStat)
                               .value;
            }
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("scaled jdcov equals plain jdcov after pre-scaling to unit distance variance") {
    Dataset ds = testutil::random_univariate(9, 3, 31);
    for (int g = 0; g < 3; ++g) {
        const double dv = dvar(centered_group_matrices(ds, Estimator::kVStat)[static_cast<std::size_t>(g)]).value;
        ds.values.col(g) /= std::sqrt(dv);  // squared distance variance scales quadratically
    }
    const auto mats = centered_group_matrices(ds, Estimator::kVStat);
    for (int g = 0; g < 3; ++g) {
        CHECK(dvar(mats[static_cast<std::size_t>(g)]).value == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(jdcov_sq_scaled(mats, 1.0, Estimator::kVStat).value ==
          doctest::Approx(jdcov_sq(mats, 1.0, Estimator::kVStat).value).epsilon(1e-9));
}

TEST_CASE("scaled jdcov is invariant to per-group rescaling") {
    const Dataset ds = testutil::random_grouped(10, {1, 2, 1}, 47);
    const double base =
        jdcov_sq_scaled(centered_group_matrices(ds, Estimator::kUCentered), 1.0, Estimator::kUCentered).value;
    Dataset scaled = ds;
    scaled.values.col(0) *= 7.0;
    scaled.values.middleCols(1, 2) *= 0.01;
    scaled.values.col(3) *= -250.0;
    const double after =
        jdcov_sq_scaled(centered_group_matrices(scaled, Estimator::kUCentered), 1.0, Estimator::kUCentered).value;
    CHECK(after == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("scaled jdcov rejects degenerate groups by name") {
    Dataset ds = testutil::random_univariate(8, 3, 9);
    ds.values.col(2).setConstant(4.0);
    CHECK_THROWS_WITH_AS(
        jdcov_sq_scaled(centered_group_matrices(ds, Estimator::kVStat), 1.0, Estimator::kVStat),
        doctest::Contains("x3"), std::invalid_argument);
}

TEST_CASE("rank jdcov: identity on rank-valued data, exact monotone invariance") {
    // data whose columns already equal their own empirical CDF values
    Dataset ds;
    ds.groups = GroupSpec::parse("x:1,y:2,z:3");
    ds.values.resize(5, 3);
    RngStream stream(3);
    for (int j = 0; j < 3; ++j) {
        std::vector<double> vals{0.2, 0.4, 0.6, 0.8, 1.0};
        for (int i = 4; i > 0; --i) std::swap(vals[static_cast<std::size_t>(i)], vals[stream.next_below(static_cast<std::uint64_t>(i + 1))]);
        for (int i = 0; i < 5; ++i) ds.values(i, j) = vals[static_cast<std::size_t>(i)];
    }
    const double plain = jdcov_sq(centered_group_matrices(ds, Estimator::kVStat), 1.0, Estimator::kVStat).value;
    CHECK(jdcov_sq_rank(ds, 1.0, Estimator::kVStat).value == doctest::Approx(plain).epsilon(1e-13));

    const Dataset raw = testutil::random_univariate(12, 3, 8);
    const double base = jdcov_sq_rank(raw, 0.5, Estimator::kUCentered).value;
    Dataset cubed = raw;
    cubed.values.col(1) = raw.values.col(1).array().cube();
    CHECK(jdcov_sq_rank(cubed, 0.5, Estimator::kUCentered).value == base);
}

TEST_CASE("rank jdcov shrinks toward zero under independence") {
    auto median_stat = [](int n) {
        std::vector<double> vals;
        for (int rep = 0; rep < 11; ++rep) {
            const Dataset ds = testutil::random_univariate(n, 3, 1000 + static_cast<std::uint64_t>(rep));
            vals.push_back(jdcov_sq_rank(ds, 1.0, Estimator::kVStat).value);
        }
        std::sort(vals.begin(), vals.end());
        return vals[vals.size() / 2];
    };
    const double at50 = median_stat(50);
    const double at200 = median_stat(200);
    CHECK(at200 < at50);
    CHECK(at200 < 0.01);
}

TEST_CASE("distance cumulant: pairwise identity and brute-force d=3 enumeration") {
    const Dataset pair = testutil::random_univariate(9, 2, 13);
    const auto pair_mats = centered_group_matrices(pair, Estimator::kVStat);
    CHECK(distance_cumulant(pair_mats).value ==
          doctest::Approx(dcov_sq_high_order(pair_mats, Estimator::kVStat).value).epsilon(1e-12));

    const Dataset triple = testutil::random_univariate(8, 3, 14);
    const auto mats = centered_group_matrices(triple, Estimator::kVStat);
    std::vector<Eigen::MatrixXd> raw;
    for (const auto& m : mats) raw.push_back(m.m);
    CHECK(distance_cumulant(mats).value == doctest::Approx(oracle::cumulant_d3(raw)).epsilon(1e-12));
}

TEST_CASE("distance cumulant requires the v form and bounded d") {
    const Dataset ds = testutil::random_univariate(8, 2, 15);
    CHECK_THROWS_AS(distance_cumulant(centered_group_matrices(ds, Estimator::kUCentered)), std::invalid_argument);
}

TEST_CASE("chained baseline statistic") {
    const Dataset pair = testutil::random_grouped(8, {2, 3}, 16);
    const double direct = dcov_sq_high_order(centered_group_matrices(pair, Estimator::kVStat), Estimator::kVStat).value;
    CHECK(t_mt(pair, Estimator::kVStat).value == doctest::Approx(direct).epsilon(1e-12));

    // d=3: first term couples group 1 with the concatenated (2,3) block
    const Dataset triple = testutil::random_univariate(9, 3, 18);
    const double total = t_mt(triple, Estimator::kUCentered).value;
    Dataset merged;
    merged.groups = GroupSpec::parse("a:1,bc:2-3");
    merged.values = triple.values;
    const double term1 =
        dcov_sq_high_order(centered_group_matrices(merged, Estimator::kUCentered), Estimator::kUCentered).value;
    Dataset tail;
    tail.groups = GroupSpec::parse("b:1,c:2");
    tail.values = triple.values.rightCols(2);
    const double term2 =
        dcov_sq_high_order(centered_group_matrices(tail, Estimator::kUCentered), Estimator::kUCentered).value;
    CHECK(total == doctest::Approx(term1 + term2).epsilon(1e-12));
}

TEST_CASE("chained baseline depends on group order") {
    // dependent data so the asymmetry actually shows
    Dataset ds = testutil::random_univariate(12, 3, 19);
    ds.values.col(2) = ds.values.col(0).array() * ds.values.col(1).array();
    const double fwd = t_mt(ds, Estimator::kVStat).value;
    Dataset reversed = ds;
    reversed.values.col(0) = ds.values.col(2);
    reversed.values.col(2) = ds.values.col(0);
    const double rev = t_mt(reversed, Estimator::kVStat).value;
    CHECK(std::fabs(fwd - rev) > 1e-12);
}

TEST_CASE("group permutations leave dcov and jdcov unchanged bit-for-bit") {
    const Dataset ds = testutil::random_grouped(10, {1, 2, 1, 3}, 23);
    auto mats = centered_group_matrices(ds, Estimator::kVStat);
    const double dcov0 = dcov_sq_high_order(mats, Estimator::kVStat).value;
    const double jd0 = jdcov_sq(mats, 0.7, Estimator::kVStat).value;
    std::vector<std::size_t> perm{2, 0, 3, 1};
    std::vector<CenteredMatrix> shuffled;
    for (std::size_t idx : perm) shuffled.push_back(mats[idx]);
    CHECK(dcov_sq_high_order(shuffled, Estimator::kVStat).value == dcov0);
    CHECK(jdcov_sq(shuffled, 0.7, Estimator::kVStat).value == jd0);
}

TEST_CASE("per-group scaling multiplies order-d dcov by the product of |scales|") {
    const Dataset ds = testutil::random_univariate(10, 3, 29);
    const double base = dcov_sq_high_order(centered_group_matrices(ds, Estimator::kVStat), Estimator::kVStat).value;
    Dataset scaled = ds;
    const double s1 = 2.0, s2 = -0.3, s3 = 5.5;
    scaled.values.col(0) *= s1;
    scaled.values.col(1) *= s2;
    scaled.values.col(2) *= s3;
    const double got = dcov_sq_high_order(centered_group_matrices(scaled, Estimator::kVStat), Estimator::kVStat).value;
    CHECK(got == doctest::Approx(std::fabs(s1 * s2 * s3) * base).epsilon(1e-9));
}

TEST_CASE("common rescaling interacts with c as |c0|^d jdcov(c)") {
    const Dataset ds = testutil::random_univariate(9, 3, 37);
    const double c = 0.8, c0 = -2.5;
    const double base = jdcov_sq(centered_group_matrices(ds, Estimator::kVStat), c, Estimator::kVStat).value;
    Dataset scaled = ds;
    scaled.values *= c0;
    const double got =
        jdcov_sq(centered_group_matrices(scaled, Estimator::kVStat), std::fabs(c0) * c, Estimator::kVStat).value;
    CHECK(got == doctest::Approx(std::pow(std::fabs(c0), 3) * base).epsilon(1e-9));
}

TEST_CASE("u-centered pairwise dcov equals the four-tuple combinatorial estimator") {
    for (int n = 4; n <= 12; n += 2) {
        const Dataset ds = testutil::random_grouped(n, {2, 3}, 500 + static_cast<std::uint64_t>(n));
        const double fast =
            dcov_sq_high_order(centered_group_matrices(ds, Estimator::kUCentered), Estimator::kUCentered).value;
        const double slow = oracle::pairwise_dcov_sq_ustat(oracle::distances(ds.group_block(0)),
                                                           oracle::distances(ds.group_block(1)));
        CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
    }
}

TEST_CASE("v-stat jdcov drifts toward zero as independent samples grow") {
    auto median_stat = [](int n) {
        std::vector<double> vals;
        for (int rep = 0; rep < 11; ++rep) {
            const Dataset ds = testutil::random_univariate(n, 3, 3000 + static_cast<std::uint64_t>(rep));
            vals.push_back(jdcov_sq(centered_group_matrices(ds, Estimator::kVStat), 1.0, Estimator::kVStat).value);
        }
        std::sort(vals.begin(), vals.end());
        return vals[vals.size() / 2];
    };
    CHECK(median_stat(160) < median_stat(40));
}
