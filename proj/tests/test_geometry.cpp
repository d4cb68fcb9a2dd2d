#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dirac/geometry.hpp"

using namespace dirac;

namespace {

/// max over pairs of quadrature points of the quotient distance on a circle.
double circle_pair_diameter(double length, int points) {
    double best = 0.0;
    for (int i = 0; i < points; ++i)
        for (int j = 0; j < points; ++j) {
            const double d = std::abs(i - j) * length / points;
            best = std::max(best, std::min(d, length - d));
        }
    return best;
}

AffineMappingTorus circle_bundle(double eps) {
    AffineMappingTorus m;
    m.fiber = FlatTorusModel::circle(2.0 * kPi);
    m.fiberScale = eps;
    return m;
}

}  // namespace

TEST_CASE("unit square torus: flat frame and diameter") {
    const FlatTorusModel t = FlatTorusModel::cube(2, 1.0, RVector::Zero(2));
    const GeometricData geo = geometric_data(t);
    for (double w : geo.omega) CHECK(w == 0.0);
    CHECK(geo.normR == 0.0);
    CHECK(geo.diamZ == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("scaled circle fiber diameter matches the pair oracle") {
    const GeometricData geo = geometric_data(circle_bundle(0.1));
    CHECK(geo.diamZ == doctest::Approx(0.1 * kPi).epsilon(1e-14));
    CHECK(geo.diamZ == doctest::Approx(0.1 * circle_pair_diameter(2.0 * kPi, 200)).epsilon(1e-12));
}

TEST_CASE("hexagonal lattice diameter is the covering radius") {
    FlatTorusModel hex;
    hex.n = 2;
    hex.latticeBasis.resize(2, 2);
    hex.latticeBasis << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
    hex.spinShift = RVector::Zero(2);
    // deep hole at lattice coordinates (1/3, 1/3), on the 96-point grid
    CHECK(torus_diameter(hex, 96) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("diameter is scale covariant and omega stays zero") {
    for (double eps : {1.0, 0.5, 0.125}) {
        AffineMappingTorus m = circle_bundle(eps);
        m.fiber = FlatTorusModel::cube(2, 2.0 * kPi, RVector::Zero(2));
        m.holonomyMatrix = Eigen::MatrixXi::Identity(2, 2);
        m.connectionForm = RVector::Zero(2);
        const GeometricData geo = geometric_data(m);
        CHECK(geo.diamZ == doctest::Approx(eps * std::sqrt(2.0) * kPi).epsilon(1e-14));
        for (double w : geo.omega) CHECK(w == 0.0);
        CHECK(geo.normT == 0.0);
        CHECK(geo.normPi == 0.0);
    }
}

TEST_CASE("window bound of the circle fiber is 1/eps") {
    for (double eps : {1.0, 0.5, 0.25, 0.125})
        CHECK(window_bound(geometric_data(circle_bundle(eps))) == doctest::Approx(1.0 / eps).epsilon(1e-14));
    GeometricData curved = geometric_data(circle_bundle(1.0));
    curved.normR = 10.0;
    CHECK(window_bound(curved) == 0.0);
}

TEST_CASE("metric path lengths") {
    const RMatrix g0 = (RMatrix(2, 2) << 2.0, 0.3, 0.3, 1.0).finished();
    SUBCASE("constant family") {
        CHECK(metric_path([&](double) { return g0; }, 11) == doctest::Approx(0.0));
    }
    SUBCASE("conformal scaling e^{2t}") {
        const GramFamily f = [&](double t) { return RMatrix(std::exp(2.0 * t) * g0); };
        CHECK(metric_path(f, 11) == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("linear interpolation G0 -> 2 G0") {
        const GramFamily f = [&](double t) { return RMatrix((1.0 + t) * g0); };
        CHECK(metric_path(f, 201) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    }
    SUBCASE("additive under concatenation") {
        const GramFamily f = [&](double t) {
            RMatrix g = g0;
            g(0, 0) += std::sin(2.0 * t);
            g(1, 1) *= 1.0 + t * t;
            return g;
        };
        const double whole = metric_path(f, 201, 0.0, 1.0);
        const double parts = metric_path(f, 101, 0.0, 0.4) + metric_path(f, 101, 0.4, 1.0);
        CHECK(whole == doctest::Approx(parts).epsilon(1e-7));
    }
    SUBCASE("indefinite family is rejected") {
        const GramFamily f = [&](double t) { return RMatrix((t - 0.5) * g0); };
        CHECK_THROWS_AS(metric_path(f, 11), Error);
    }
}

TEST_CASE("flat torus validation") {
    FlatTorusModel t = FlatTorusModel::cube(2, 1.0, RVector::Zero(2));
    t.latticeBasis(1, 1) = 0.0;
    CHECK_THROWS_AS(t.validate(), Error);
    CHECK_THROWS_AS(FlatTorusModel::circle(1.0, 0.3).validate(), Error);
}

TEST_CASE("mapping torus validation") {
    const CliffordModule cm = spinor_gammas(3);
    AffineMappingTorus m;
    m.fiber = FlatTorusModel::cube(2, 1.0, RVector::Zero(2));
    m.holonomyMatrix = (Eigen::MatrixXi(2, 2) << 0, -1, 1, 0).finished();
    m.connectionForm = RVector::Zero(2);
    // the lift must rotate the fiber gammas by the quarter turn
    CHECK_THROWS_AS(m.validate(cm), Error);
    m.holonomyLift = rotation_lift(cm, 1, 2, kPi / 2.0);
    CHECK_NOTHROW(m.validate(cm));
    CHECK(m.holonomyOrder() == 4);

    AffineMappingTorus bad = m;
    bad.connectionForm = (RVector(2) << 0.1, 0.0).finished();
    CHECK_THROWS_AS(bad.validate(cm), Error);

    bad = m;
    bad.fiber.spinShift = (RVector(2) << 0.5, 0.0).finished();  // phi^T swaps the shift
    CHECK_THROWS_AS(bad.validate(cm), Error);

    bad = m;
    bad.fiber.latticeBasis(0, 0) = 2.0;  // phi no longer an isometry
    CHECK_THROWS_AS(bad.validate(cm), Error);

    bad = m;
    bad.holonomyMatrix = (Eigen::MatrixXi(2, 2) << 2, 1, 1, 1).finished();  // Anosov, infinite order
    bad.fiber.latticeBasis = RMatrix::Identity(2, 2);
    CHECK_THROWS_AS(bad.validate(cm), Error);
}
