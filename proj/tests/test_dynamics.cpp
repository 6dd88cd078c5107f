#include "curvednbody/dynamics.hpp"
#include "curvednbody/errors.hpp"
#include "curvednbody/families.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace cnb;
namespace ts = testing_support;

namespace {

SystemState six_body_t0() { return complementary_six_body(1.0, 1.0, std::sqrt(2.0)).state(0.0); }

SystemState two_static(const Vec4& a, const Vec4& b) {
    return SystemState(Sigma::Sphere, {Body{1.0, ManifoldPoint(a, Sigma::Sphere), Vec4::Zero()},
                                       Body{1.0, ManifoldPoint(b, Sigma::Sphere), Vec4::Zero()}});
}

SystemState rotate_all(const SystemState& s, const Mat4& A) {
    std::vector<Body> bodies;
    for (const Body& b : s.bodies())
        bodies.push_back(Body{b.mass, ManifoldPoint(A * b.position.coords(), s.sigma()), A * b.velocity});
    return SystemState(s.sigma(), bodies, s.time());
}

}  // namespace

TEST_CASE("pair denominator") {
    CHECK(pair_denominator(Vec4(1, 0, 0, 0), Vec4(0, 0, 1, 0), Sigma::Sphere) == 1.0);
    const Vec4 a(1, 0, 0, 0), b(-0.5, std::sqrt(3.0) / 2, 0, 0);
    CHECK(pair_denominator(a, b, Sigma::Sphere) == doctest::Approx(0.649519052838329).epsilon(1e-14));

    SUBCASE("collision and antipode are told apart") {
        try {
            (void)pair_denominator(a, a, Sigma::Sphere);
            FAIL("expected a singularity");
        } catch (const SingularityError& e) {
            CHECK(e.kind() == SingularityKind::Collision);
        }
        try {
            (void)pair_denominator(a, -a, Sigma::Sphere);
            FAIL("expected a singularity");
        } catch (const SingularityError& e) {
            CHECK(e.kind() == SingularityKind::Antipodal);
        }
    }
    SUBCASE("threshold sits on the bracket") {
        const double eps = 1e-7;  // bracket = sin²(eps) ≈ 1e-14
        CHECK_THROWS_AS((void)pair_denominator(a, Vec4(std::cos(eps), std::sin(eps), 0, 0), Sigma::Sphere),
                        SingularityError);
        const double ok = 1e-6;  // bracket ≈ 1e-12
        CHECK(pair_denominator(a, Vec4(std::cos(ok), std::sin(ok), 0, 0), Sigma::Sphere) > 0.0);
    }
    SUBCASE("state construction rejects singular pairs with indices") {
        try {
            (void)two_static(a, -a);
            FAIL("expected a singularity");
        } catch (const SingularityError& e) {
            CHECK(e.first() == 0u);
            CHECK(e.second() == 1u);
        }
    }
}

TEST_CASE("state validation") {
    const ManifoldPoint p(1, 0, 0, 0);
    CHECK_THROWS_AS(SystemState(Sigma::Sphere, {Body{0.0, p, Vec4::Zero()}}), ValidationError);
    CHECK_THROWS_AS(SystemState(Sigma::Sphere, {Body{1.0, p, Vec4(1, 0, 0, 0)}}), ConstraintViolation);
    CHECK_THROWS_AS(SystemState(Sigma::Hyperbolic, {Body{1.0, p, Vec4::Zero()}}), DomainError);
    const SystemState s(Sigma::Sphere, {Body{2.0, p, Vec4(0, 1, 0, 0)}, Body{3.0, ManifoldPoint(0, 0, 1, 0), Vec4::Zero()}});
    CHECK(s.total_mass() == 5.0);
}

TEST_CASE("acceleration against the brute-force oracle") {
    const SystemState s = six_body_t0();
    const auto a = acceleration(s);
    const auto ref = oracle::acceleration(ts::positions(s), ts::velocities(s), ts::masses(s), 1);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(ts::max_abs_diff(ref[i], a[i]) <= 1e-14);

    SUBCASE("random states on both manifolds") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 30; ++trial) {
            for (Sigma sg : {Sigma::Sphere, Sigma::Hyperbolic}) {
                std::vector<Body> bodies;
                for (int i = 0; i < 4; ++i) {
                    Vec4 g = ts::gaussian4(rng);
                    if (sg == Sigma::Hyperbolic) g[3] = std::abs(g[3]) + g.head<3>().norm() + 0.2;
                    const ManifoldPoint q(g, sg);
                    bodies.push_back(Body{0.5 + i, q, tangent_project(q.coords(), ts::gaussian4(rng), sg)});
                }
                const SystemState st(sg, bodies);
                const auto acc = acceleration(st);
                const auto r = oracle::acceleration(ts::positions(st), ts::velocities(st), ts::masses(st),
                                                    static_cast<int>(sg));
                for (std::size_t i = 0; i < st.size(); ++i) {
                    double scale = 1.0;
                    for (int k = 0; k < 4; ++k) scale = std::max(scale, static_cast<double>(std::abs(r[i][k])));
                    CHECK(ts::max_abs_diff(r[i], acc[i]) <= 1e-12 * scale);
                }
            }
        }
    }
    SUBCASE("gravitational part is tangent") {
        const auto g = gravitational_acceleration(s);
        for (std::size_t i = 0; i < s.size(); ++i)
            CHECK(std::abs(inner(s[i].position.coords(), g[i], Sigma::Sphere)) <= 1e-12);
    }
    SUBCASE("single body on a great circle feels only the constraint") {
        const double w = 1.7;
        const SystemState one(Sigma::Sphere, {Body{1.0, ManifoldPoint(0.6, 0.8, 0, 0), Vec4(-0.8 * w, 0.6 * w, 0, 0)}});
        const Vec4 acc = acceleration(one)[0];
        CHECK((acc + w * w * Vec4(0.6, 0.8, 0, 0)).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("six-body closed form") {
        const auto family = complementary_six_body(1.0, 1.0, std::sqrt(2.0));
        CHECK(residual(family.sample(0.0)) <= 1e-12);
    }
}

TEST_CASE("gravitational field") {
    SUBCASE("single body seen from an orthogonal point") {
        const SystemState one(Sigma::Sphere, {Body{2.5, ManifoldPoint(0, 1, 0, 0), Vec4::Zero()}});
        const TangentVector f = gravitational_field(one, ManifoldPoint(0, 0, 1, 0));
        CHECK((f.coords - Vec4(0, 2.5, 0, 0)).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("triangle on a great circle matches pairwise summation") {
        const auto tri = oracle::polygon(3, 0);
        std::vector<Body> bodies;
        for (const auto& p : tri)
            bodies.push_back(Body{1.0, ManifoldPoint(Vec4(double(p[0]), double(p[1]), 0, 0), Sigma::Sphere), Vec4::Zero()});
        const SystemState s(Sigma::Sphere, bodies);
        const ManifoldPoint test(Vec4(-0.9, 0.1, 0.3, 0.2), Sigma::Sphere);
        const Vec4 f = gravitational_field(s, test).coords;
        const auto ref = oracle::field(ts::to_p4(test.coords()), ts::positions(s), ts::masses(s), 1);
        CHECK(ts::max_abs_diff(ref, f) <= 1e-13);
        CHECK(std::abs(inner(test.coords(), f, Sigma::Sphere)) <= 1e-13);
    }
    SUBCASE("at a body or its antipode it throws") {
        const SystemState s = six_body_t0();
        CHECK_THROWS_AS(gravitational_field(s, s[2].position), SingularityError);
        CHECK_THROWS_AS(gravitational_field(s, ManifoldPoint(-s[4].position.coords(), Sigma::Sphere)),
                        SingularityError);
    }
}

TEST_CASE("energy and angular momentum") {
    const SystemState s = six_body_t0();
    SUBCASE("six-body values") {
        CHECK(force_function(s) == doctest::Approx(-4.618802153517006).epsilon(1e-14));
        CHECK(kinetic_energy(s) == doctest::Approx(4.5).epsilon(1e-14));
        CHECK(energy(s) == doctest::Approx(9.118802153517006).epsilon(1e-14));
        const auto c = angular_momentum(s);
        const AngularMomentum expected{3.0, 0, 0, 0, 0, 3.0 * std::sqrt(2.0)};
        for (int k = 0; k < 6; ++k) CHECK(std::abs(c[k] - expected[k]) <= 1e-12);
    }
    SUBCASE("agree with the oracle") {
        const auto q = ts::positions(s), v = ts::velocities(s);
        const auto m = ts::masses(s);
        CHECK(std::abs(force_function(s) - double(oracle::force_function(q, m, 1))) <= 1e-14);
        CHECK(std::abs(kinetic_energy(s) - double(oracle::kinetic(q, v, m, 1))) <= 1e-14);
        const auto c = angular_momentum(s);
        const auto ref = oracle::wedge(q, v, m);
        for (int k = 0; k < 6; ++k) CHECK(std::abs(c[k] - double(ref[k])) <= 1e-14);
    }
    SUBCASE("trivial cases") {
        const SystemState still = two_static(Vec4(1, 0, 0, 0), Vec4(0, 0, 1, 0));
        CHECK(force_function(still) == 0.0);
        CHECK(kinetic_energy(still) == 0.0);
        CHECK(energy(still) == 0.0);
        for (double c : angular_momentum(still)) CHECK(c == 0.0);
    }
    SUBCASE("time reversal flips angular momentum") {
        std::vector<Body> flipped;
        for (const Body& b : s.bodies()) flipped.push_back(Body{b.mass, b.position, -b.velocity});
        const auto c = angular_momentum(s);
        const auto d = angular_momentum(SystemState(Sigma::Sphere, flipped));
        for (int k = 0; k < 6; ++k) CHECK(d[k] == -c[k]);
    }
    SUBCASE("invariance under rotations") {
        std::mt19937_64 rng(12);
        for (int k = 0; k < 20; ++k) {
            const SystemState r = rotate_all(s, ts::random_rotation(rng));
            CHECK(std::abs(force_function(r) - force_function(s)) <= 1e-10);
            CHECK(std::abs(kinetic_energy(r) - kinetic_energy(s)) <= 1e-10);
        }
    }
    SUBCASE("invariance under Lorentz transformations") {
        const auto fam = eulerian_hyperbolic(1.0, std::sqrt(2.0));
        const SystemState h = fam.state(0.4);
        for (int k = 0; k < 10; ++k) {
            const SystemState r = rotate_all(h, ts::lorentz_transform(0.2 * k - 1.0, 0.5 * k));
            CHECK(std::abs(force_function(r) - force_function(h)) <= 1e-10);
            CHECK(std::abs(kinetic_energy(r) - kinetic_energy(h)) <= 1e-10);
        }
    }
}

TEST_CASE("conserved quantities are constant along closed-form families") {
    const std::vector<OrbitFamily> families{
        complementary_six_body(1.0, 1.0, std::sqrt(2.0)),
        lagrangian_elliptic(1.0, 0.5, std::sqrt(0.75), 0.0),
        eulerian_hyperbolic(1.0, std::sqrt(2.0)),
        complementary_polygon_pair(PolygonPairParams{5, 3, 1.0, 1.0, 1.3, 0.0, 0.0}),
    };
    for (const auto& f : families) {
        CAPTURE(to_string(f.kind()));
        const auto c0 = conserved_quantities(f.state(0.0));
        for (double t : check_times(f, 100)) {
            const auto c = conserved_quantities(f.state(t));
            CHECK(std::abs(c.energy - c0.energy) <= 1e-10);
            for (int k = 0; k < 6; ++k) CHECK(std::abs(c.angular_momentum[k] - c0.angular_momentum[k]) <= 1e-10);
        }
    }
}

TEST_CASE("constraint residual") {
    const SystemState s = six_body_t0();
    CHECK(constraint_residual(s) <= 1e-15);
    const std::vector<Vec4> q{Vec4(1.0 + 1e-6, 0, 0, 0)}, v{Vec4(0.5, 1, 0, 0)};
    // |q.v| / (|q||v|) dominates the 2e-6 position error
    CHECK(constraint_residual(q, v, Sigma::Sphere) == doctest::Approx(0.5 / std::sqrt(1.25)).epsilon(1e-5));
}
