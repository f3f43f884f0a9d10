#include "jointdep/centering.hpp"

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace jointdep;

namespace {

Dataset two_point_dataset() {
    Dataset ds;
    ds.groups = GroupSpec::parse("x:1");
    ds.values.resize(2, 1);
    ds.values << 0.0, 1.0;
    return ds;
}

}  // namespace

TEST_CASE("pairwise distances: basic geometry") {
    const Dataset ds = two_point_dataset();
    const DistanceMatrix d = pairwise_distances(ds, 0);
    CHECK(d.d(0, 0) == 0.0);
    CHECK(d.d(0, 1) == 1.0);
    CHECK(d.d(1, 0) == 1.0);

    Dataset planar;
    planar.groups = GroupSpec::parse("x:1-2");
    planar.values.resize(2, 2);
    planar.values << 0.0, 0.0, 3.0, 4.0;
    CHECK(pairwise_distances(planar, 0).d(0, 1) == 5.0);

    Dataset dup;
    dup.groups = GroupSpec::parse("x:1-2");
    dup.values.resize(3, 2);
    dup.values << 1.0, 2.0, 1.0, 2.0, 0.0, 0.0;
    CHECK(pairwise_distances(dup, 0).d(0, 1) == 0.0);
}

TEST_CASE("v-centering of the two-point distance matrix") {
    const DistanceMatrix d = pairwise_distances(two_point_dataset(), 0);
    const CenteredMatrix u = v_center(d);
    CHECK(u.m(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(u.m(0, 1) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(u.m(1, 0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(u.m(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("v-centering: constant group gives the zero matrix") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(5, 5);
    CHECK(v_center_matrix(d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("v-centering kills every row and column sum") {
    const Dataset ds = testutil::random_grouped(6, {2}, 1234);
    const Eigen::MatrixXd u = v_center_matrix(pairwise_distances(ds, 0).d);
    for (int k = 0; k < 6; ++k) {
        CHECK(std::fabs(u.row(k).sum()) < 1e-10);
        CHECK(std::fabs(u.col(k).sum()) < 1e-10);
    }
    CHECK((u - u.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    // agreement with the direct four-term formula
    const Eigen::MatrixXd ref = oracle::v_centered(pairwise_distances(ds, 0).d);
    CHECK((u - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("u-centering matches the direct formula on (0,1,2,4)") {
    Dataset ds;
    ds.groups = GroupSpec::parse("x:1");
    ds.values.resize(4, 1);
    ds.values << 0.0, 1.0, 2.0, 4.0;
    const CenteredMatrix u = u_center(pairwise_distances(ds, 0));
    CHECK(u.m(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    const Eigen::MatrixXd ref = oracle::u_centered(pairwise_distances(ds, 0).d);
    CHECK((u.m - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("u-centering invariants: zero diagonal, zero off-diagonal sums") {
    const Dataset ds = testutil::random_grouped(9, {3}, 77);
    const Eigen::MatrixXd u = u_center_matrix(pairwise_distances(ds, 0).d);
    for (int k = 0; k < 9; ++k) {
        CHECK(u(k, k) == 0.0);
        CHECK(std::fabs(u.row(k).sum()) < 1e-10);  // diagonal is 0, so this is the off-diagonal sum
        CHECK(std::fabs(u.col(k).sum()) < 1e-10);
    }
}

TEST_CASE("u-centering: constant group stays zero, small n rejected") {
    CHECK(u_center_matrix(Eigen::MatrixXd::Zero(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_WITH_AS(u_center_matrix(Eigen::MatrixXd::Zero(3, 3)), doctest::Contains("n >= 4"),
                         std::invalid_argument);
}

TEST_CASE("rank transform: empirical CDF values with ties") {
    Dataset ds;
    ds.groups = GroupSpec::parse("x:1");
    ds.values.resize(3, 1);
    ds.values << 10.0, 20.0, 30.0;
    Eigen::VectorXd r = rank_transform(ds).values.col(0);
    CHECK(r(0) == doctest::Approx(1.0 / 3.0));
    CHECK(r(1) == doctest::Approx(2.0 / 3.0));
    CHECK(r(2) == 1.0);

    ds.values << 5.0, 5.0, 7.0;
    r = rank_transform(ds).values.col(0);
    CHECK(r(0) == doctest::Approx(2.0 / 3.0));
    CHECK(r(1) == doctest::Approx(2.0 / 3.0));
    CHECK(r(2) == 1.0);
}

TEST_CASE("rank transform is invariant to strictly increasing maps") {
    RngStream stream(5);
    for (int trial = 0; trial < 20; ++trial) {
        Dataset ds = testutil::random_univariate(15, 2, 100 + trial);
        const Dataset ranked = rank_transform(ds);
        Dataset mapped = ds;
        // random monotone map: a*x^3 + b*x + c with a,b > 0
        const double a = stream.next_uniform() + 0.1;
        const double b = stream.next_uniform() + 0.1;
        const double c = stream.next_normal();
        mapped.values = (a * ds.values.array().cube() + b * ds.values.array() + c).matrix();
        const Dataset ranked_mapped = rank_transform(mapped);
        CHECK((ranked.values - ranked_mapped.values).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("distance pipeline invariances") {
    const Dataset ds = testutil::random_grouped(8, {3}, 2024);
    const Eigen::MatrixXd d0 = pairwise_distances(ds, 0).d;

    SUBCASE("translation leaves distances unchanged exactly on grid-aligned data") {
        // exactness needs representable sums, hence the dyadic grid
        Dataset grid = testutil::random_univariate_grid(8, 3, 404);
        grid.groups = ds.groups;
        const Eigen::MatrixXd before = pairwise_distances(grid, 0).d;
        Eigen::RowVectorXd shift(3);
        shift << 2.5, -1.0, 4.25;
        grid.values.rowwise() += shift;
        CHECK((pairwise_distances(grid, 0).d - before).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("scaling multiplies distances and both centerings by |s|") {
        Dataset scaled = ds;
        scaled.values *= -3.0;
        const Eigen::MatrixXd d1 = pairwise_distances(scaled, 0).d;
        CHECK((d1 - 3.0 * d0).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((v_center_matrix(d1) - 3.0 * v_center_matrix(d0)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((u_center_matrix(d1) - 3.0 * u_center_matrix(d0)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("orthogonal maps leave distances unchanged") {
        // Householder reflection I - 2vv^T
        Eigen::VectorXd v(3);
        v << 1.0, 2.0, -1.5;
        v.normalize();
        const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(3, 3) - 2.0 * v * v.transpose();
        Dataset rotated = ds;
        rotated.values = ds.values * q.transpose();
        CHECK((pairwise_distances(rotated, 0).d - d0).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("re-centering a centered matrix negates it; twice restores it") {
        const Eigen::MatrixXd u = v_center_matrix(d0);
        const Eigen::MatrixXd once = v_center_matrix(u);
        CHECK((once + u).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((v_center_matrix(once) - u).cwiseAbs().maxCoeff() < 1e-10);
    }
}
