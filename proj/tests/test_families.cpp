#include "curvednbody/errors.hpp"
#include "curvednbody/families.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace cnb;
namespace ts = testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

bool has_field(const ValidationError& e, const std::string& f) {
    return std::find(e.fields().begin(), e.fields().end(), f) != e.fields().end();
}

}  // namespace

TEST_CASE("lagrangian family") {
    const OrbitFamily f = lagrangian_elliptic(1.0, 0.5, std::sqrt(3.0) / 2, 0.0);
    const auto& p = std::get<LagrangianParams>(f.params());
    CHECK(lagrangian_omega_squared(1.0, 0.5) == doctest::Approx(6.306585749861893).epsilon(1e-14));
    CHECK(p.omega == doctest::Approx(2.511291649701781).epsilon(1e-14));
    CHECK(f.validation_residual() <= 1e-10);
    CHECK(max_residual(f, check_times(f)) <= 1e-10);

    SUBCASE("mutual distances and inner products are equal and constant") {
        const double d0 = distance(f.state(0)[0].position, f.state(0)[1].position);
        for (double t : linspace(0.0, 5.0, 50)) {
            const SystemState s = f.state(t);
            for (auto [i, j] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}}) {
                CHECK(std::abs(distance(s[i].position, s[j].position) - d0) <= 1e-12);
                CHECK(std::abs(inner(s[i].position.coords(), s[j].position.coords(), Sigma::Sphere) -
                               std::cos(d0)) <= 1e-12);
            }
        }
    }
    SUBCASE("either rotation sense solves the equations") {
        const OrbitFamily g = lagrangian_elliptic(1.0, 0.5, std::sqrt(3.0) / 2, 0.0, -1);
        CHECK(std::get<LagrangianParams>(g.params()).omega == doctest::Approx(-p.omega));
    }
    SUBCASE("10% perturbation of omega squared is caught") {
        LagrangianParams bad = p;
        bad.omega = std::sqrt(1.1 * p.omega * p.omega);
        CHECK(candidate_residual(bad, 0.3) > 1e-3);
        CHECK_THROWS_AS(validate_family(FamilyKind::LagrangianElliptic, bad), FamilyValidationError);
    }
    SUBCASE("interior r only") {
        try {
            (void)lagrangian_elliptic(1.0, 1.0, 0.0, 0.0);
            FAIL("r = 1 accepted");
        } catch (const ValidationError& e) {
            CHECK(has_field(e, "r"));
        }
        CHECK_THROWS_AS(lagrangian_elliptic(1.0, 0.5, 0.5, 0.0), ValidationError);
    }
}

TEST_CASE("eulerian family") {
    const OrbitFamily f = eulerian_hyperbolic(1.0, std::sqrt(2.0));
    const auto& p = std::get<EulerianParams>(f.params());
    CHECK(p.x == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eulerian_beta_squared(std::sqrt(2.0)) == doctest::Approx(0.7954951288348660).epsilon(1e-14));
    CHECK(p.beta * p.beta == doctest::Approx(9.0 / (8.0 * std::sqrt(2.0))).epsilon(1e-14));
    CHECK(f.mass_scaling() == MassScaling::Literal);
    CHECK(max_residual(f, check_times(f)) <= 1e-10);

    SUBCASE("m != 1 needs the mass-scaled beta") {
        const OrbitFamily g = eulerian_hyperbolic(2.0, 1.5);
        CHECK(g.mass_scaling() == MassScaling::MassScaled);
        const auto& q = std::get<EulerianParams>(g.params());
        CHECK(q.beta * q.beta == doctest::Approx(eulerian_beta_squared(1.5, 2.0)).epsilon(1e-14));
        EulerianParams literal = q;
        literal.beta = std::sqrt(eulerian_beta_squared(1.5));
        CHECK(candidate_residual(literal, 0.5) > 1e-3);
    }
    SUBCASE("mutual distances constant and bodies 2, 3 mirror each other") {
        const SystemState s0 = f.state(0);
        const double d12 = distance(s0[0].position, s0[1].position);
        const double d23 = distance(s0[1].position, s0[2].position);
        for (double t : linspace(0.0, 5.0, 51)) {
            const SystemState s = f.state(t);
            CHECK(std::abs(distance(s[0].position, s[1].position) - d12) <= 1e-10);
            CHECK(std::abs(distance(s[0].position, s[2].position) - d12) <= 1e-10);
            CHECK(std::abs(distance(s[1].position, s[2].position) - d23) <= 1e-10);
            const Vec4 a = s[1].position.coords(), b = s[2].position.coords();
            CHECK(a[0] == b[0]);
            CHECK(a[1] == -b[1]);
            CHECK(a[2] == b[2]);
            CHECK(a[3] == b[3]);
        }
    }
    SUBCASE("10% perturbation of beta squared is caught") {
        EulerianParams bad = p;
        bad.beta = std::sqrt(1.1 * p.beta * p.beta);
        CHECK(candidate_residual(bad, 0.5) > 1e-3);
    }
    SUBCASE("eta near the pole is rejected") {
        CHECK_THROWS_AS(eulerian_hyperbolic(1.0, 1.0 + 1e-7), ValidationError);
        CHECK_THROWS_AS(eulerian_hyperbolic(1.0, 0.5), ValidationError);
        CHECK_NOTHROW(eulerian_hyperbolic(1.0, 1.2));
        CHECK_NOTHROW(eulerian_hyperbolic(1.0, 3.0));
    }
}

TEST_CASE("six-body family") {
    const OrbitFamily f = complementary_six_body(1.0, 1.0, std::sqrt(2.0));
    SUBCASE("configuration at t = 0") {
        const double h = std::sqrt(3.0) / 2;
        const std::vector<Vec4> expected{Vec4(1, 0, 0, 0),  Vec4(-0.5, h, 0, 0),  Vec4(-0.5, -h, 0, 0),
                                         Vec4(0, 0, 1, 0),  Vec4(0, 0, -0.5, h),  Vec4(0, 0, -0.5, -h)};
        const SystemState s = f.state(0.0);
        for (std::size_t i = 0; i < 6; ++i)
            CHECK((s[i].position.coords() - expected[i]).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("angular momentum") {
        const auto c = angular_momentum(f.state(0.0));
        CHECK(c[kWX] == doctest::Approx(3.0).epsilon(1e-15));
        CHECK(c[kYZ] == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-15));
        for (int k : {kWY, kWZ, kXY, kXZ}) CHECK(std::abs(c[k]) <= 1e-15);
    }
    SUBCASE("commensurate frequencies give a periodic orbit") {
        const OrbitFamily g = complementary_six_body(1.0, 2.0 / 3.0, 1.0);
        const double period = 6.0 * kPi;
        for (double t : linspace(0.0, 3.0, 7)) {
            const SystemState a = g.state(t), b = g.state(t + period);
            for (std::size_t i = 0; i < 6; ++i)
                CHECK((a[i].position.coords() - b[i].position.coords()).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }
    SUBCASE("residual small at many times") { CHECK(max_residual(f, check_times(f)) <= 1e-10); }
    SUBCASE("zero frequencies are rejected by name") {
        try {
            (void)complementary_six_body(1.0, 0.0, 0.0);
            FAIL("zero frequencies accepted");
        } catch (const ValidationError& e) {
            CHECK(has_field(e, "alpha"));
            CHECK(has_field(e, "beta"));
        }
    }
}

TEST_CASE("polygon pairs") {
    SUBCASE("three and three is the six-body family") {
        const OrbitFamily a = complementary_polygon_pair(PolygonPairParams{3, 3, 1.0, 1.0, std::sqrt(2.0), 0, 0});
        const OrbitFamily b = complementary_six_body(1.0, 1.0, std::sqrt(2.0));
        for (double t : {0.0, 0.7, 3.1}) {
            const SystemState x = a.state(t), y = b.state(t);
            for (std::size_t i = 0; i < 6; ++i) CHECK(x[i].position.coords() == y[i].position.coords());
        }
    }
    SUBCASE("five and three at equal frequencies") {
        const OrbitFamily f = complementary_polygon_pair(PolygonPairParams{5, 3, 1.0, 1.0, 1.0, 0, 0});
        CHECK(max_residual(f, check_times(f, 100)) <= 1e-10);
    }
    SUBCASE("even polygons are refused with the antipodal explanation") {
        try {
            (void)complementary_polygon_pair(PolygonPairParams{4, 3, 1.0, 1.0, 1.0, 0, 0});
            FAIL("even N accepted");
        } catch (const ValidationError& e) {
            CHECK(has_field(e, "N"));
            CHECK(std::string(e.what()).find("antipodal") != std::string::npos);
        }
    }
    SUBCASE("force cancellation against pairwise summation") {
        for (auto [n, m] : {std::pair{3, 3}, std::pair{3, 5}, std::pair{5, 5}, std::pair{7, 3}, std::pair{9, 11}}) {
            CAPTURE(n);
            CAPTURE(m);
            const OrbitFamily f = complementary_polygon_pair(PolygonPairParams{n, m, 1.0, 1.0, 1.7, 0.3, -0.4});
            const SystemState s = f.state(0.9);
            const auto q = ts::positions(s);
            const auto mass = ts::masses(s);
            const auto grav = gravitational_acceleration(s);
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto ref = oracle::field(q[i], q, mass, 1, i);
                CHECK(double(oracle::norm(ref)) <= 1e-12);
                CHECK(grav[i].norm() <= 1e-12);
            }
        }
    }
    SUBCASE("cross-circle pull is the plain vector sum, which vanishes") {
        const auto c2 = oracle::polygon(7, 0, 0.2);
        const std::vector<oracle::R> ones(c2.size(), 1);
        const oracle::P4 body{0, 0, std::cos(0.5L), std::sin(0.5L)};
        oracle::P4 plain{0, 0, 0, 0};
        for (const auto& q : c2) {
            CHECK(double(oracle::denominator(body, q, 1)) == 1.0);
            for (int k = 0; k < 4; ++k) plain[k] += q[k];
        }
        CHECK(double(oracle::norm(plain)) <= 1e-13);
        CHECK(double(oracle::norm(oracle::field(body, c2, ones, 1))) <= 1e-13);
    }
}

TEST_CASE("reserved and singular kinds") {
    CHECK_THROWS_AS(validate_family(FamilyKind::UnequalMassPolygonPair, PolygonPairParams{}), ValidationError);
    // r and (y, z) fine but a collision-free orbit is impossible with y = 1: r must be interior.
    LagrangianParams degenerate{1.0, 1e-9, 1.0, 0.0, 1.0};
    CHECK_THROWS(validate_family(FamilyKind::LagrangianElliptic, degenerate));
}

TEST_CASE("centre-of-mass examples on the fixed circle of the triangle") {
    const double y = std::sqrt(3.0) / 2, z = 0.0;
    const OrbitFamily f = lagrangian_elliptic(1.0, 0.5, y, z);
    const auto points = com_examples_lagrangian(f, 100);
    REQUIRE(points.size() == 100);
    for (const auto& c : points) {
        const double y0 = c.point[2], z0 = c.point[3];
        CHECK(c.equidistant);
        CHECK(std::abs(c.distance - std::acos(y0 * y + z0 * z)) <= 1e-12);
    }
    SUBCASE("the field vanishes where the circle meets the offset axis") {
        CHECK(points[0].field_vanishes);   // (0, 0, 1, 0)
        CHECK(points[50].field_vanishes);  // (0, 0, -1, 0)
    }
    SUBCASE("elsewhere on the circle the pull is 3m(y e_y - (y y0) q0)") {
        const auto& quarter = points[25];  // (0, 0, 0, 1)
        CHECK(std::abs(quarter.point[3] - 1.0) <= 1e-15);
        CHECK(!quarter.field_vanishes);
        const SystemState s = f.state(0.0);
        const auto ref = oracle::field(ts::to_p4(quarter.point.coords()), ts::positions(s), ts::masses(s), 1);
        CHECK(double(oracle::norm(ref)) == doctest::Approx(3.0 * y).epsilon(1e-12));
        CHECK(quarter.field_norm == doctest::Approx(3.0 * y).epsilon(1e-12));
    }
}

TEST_CASE("uniformly moving centre of mass of the hyperbolic family") {
    const OrbitFamily f = eulerian_hyperbolic(1.0, std::sqrt(2.0));
    SUBCASE("w* = 0 rides on body 1") {
        const auto cert = com_example_eulerian(f, 0.0);
        CHECK(cert.track.rho_star() == 1.0);
        for (double t : {0.0, 1.0, 4.0})
            CHECK((cert.track.at(t).coords() - f.state(t)[0].position.coords()).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("w* = 1") {
        const auto cert = com_example_eulerian(f, 1.0);
        CHECK(cert.track.rho_star() == doctest::Approx(std::sqrt(2.0)));
        CHECK(cert.expected_distance_body1 == doctest::Approx(std::acosh(std::sqrt(2.0))).epsilon(1e-15));
        CHECK(cert.expected_distance_others == doctest::Approx(std::acosh(2.0)).epsilon(1e-15));
        CHECK(cert.max_deviation <= 1e-10);
        for (double t : linspace(0.0, 5.0, 11)) {
            const Vec4 q = cert.track.at(t).coords();
            CHECK(std::abs(inner(q, q, Sigma::Hyperbolic) + 1.0) <= 1e-12);
        }
    }
}
