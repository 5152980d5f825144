#include <doctest.h>

#include <random>

#include "oracle_helpers.hpp"
#include "plmdp/norms.hpp"
#include "plmdp/spline.hpp"

using namespace plmdp;

namespace {

Vector spaced_z(std::mt19937_64& gen, Index n) {
    // Jittered grid: strictly increasing with gaps well above the
    // knot-merge tolerance.
    std::uniform_real_distribution<double> ud(0.0, 0.3);
    Vector z(n);
    for (Index i = 0; i < n; ++i)
        z[i] = (static_cast<double>(i) + ud(gen)) / static_cast<double>(n) - 0.5;
    return z;
}

Vector random_vector(std::mt19937_64& gen, Index n) {
    std::normal_distribution<double> nd;
    return Vector::NullaryExpr(n, [&](Index) { return nd(gen); });
}

}  // namespace

TEST_CASE("two knots give a zero curvature matrix") {
    Vector z(2);
    z << 0.0, 1.0;
    const SplineModel m = build_spline_basis(z);
    CHECK(m.num_knots() == 2);
    CHECK(m.omega.cwiseAbs().maxCoeff() == 0.0);
    // L2 gram of the linear interpolant on [0,1].
    CHECK(m.gram(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(m.gram(0, 1) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("affine knot values are in the curvature nullspace") {
    std::mt19937_64 gen(31);
    const Vector z = spaced_z(gen, 9);
    const SplineModel m = build_spline_basis(z);
    const Vector affine = 3.0 * m.knots.array() + 1.0;
    CHECK(std::abs(affine.transpose() * m.omega * affine) < 1e-10);
    CHECK((m.omega * affine).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("curvature quadratic form matches the quadrature oracle") {
    Vector z(5);
    z << 0.0, 0.25, 0.5, 0.75, 1.0;
    const SplineModel m = build_spline_basis(z);
    Vector a(5);
    for (Index i = 0; i < 5; ++i) a[i] = z[i] * z[i];
    const oracle::NatSplineRef ref(m.knots, a);
    const double direct = a.transpose() * m.omega * a;
    CHECK(direct == doctest::Approx(ref.curvature_integral()).epsilon(1e-10));
    // The natural interpolant of t^2 is not t^2 (natural boundary
    // conditions), so the value is near but not equal to 4.
    CHECK(direct > 0.0);
}

TEST_CASE("fewer than 2 distinct z values is a domain error") {
    Vector z(3);
    z << 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(build_spline_basis(z), std::invalid_argument);
    Vector one(1);
    one << 0.1;
    CHECK_THROWS_AS(build_spline_basis(one), std::invalid_argument);
}

TEST_CASE("spline_fit trivial cases") {
    std::mt19937_64 gen(32);
    const Vector z = spaced_z(gen, 8);
    const SplineModel basis = build_spline_basis(z);

    SUBCASE("zero data gives zero coefficients") {
        const SplineModel fit = spline_fit(basis, z, Vector::Zero(8), 0.5, 1e-3);
        CHECK(fit.coeffs.cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("constants are unpenalised when c = 0") {
        const Vector r = Vector::Constant(8, 7.0);
        const SplineModel fit = spline_fit(basis, z, r, 2.0, 0.0);
        CHECK((fit.coeffs.array() - 7.0).abs().maxCoeff() < 1e-9);
        const Vector probe = Vector::LinSpaced(11, -0.6, 0.6);
        CHECK((spline_eval(fit, probe).array() - 7.0).abs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("spline_fit matches an independently assembled dense solve") {
    std::mt19937_64 gen(33);
    const Index n = 6;
    Vector z = spaced_z(gen, n);
    // Duplicate one observation to exercise tie accumulation.
    z[3] = z[2];
    const Vector r = random_vector(gen, n);
    const SplineModel basis = build_spline_basis(z);
    const SplineModel fit = spline_fit(basis, z, r, 0.1, 1e-3);

    const oracle::DenseSplineSystem dense(z, basis.knots);
    const Vector direct = dense.solve(r, 0.1, 1e-3);
    CHECK((fit.coeffs - direct).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("spline_eval on stated examples") {
    SUBCASE("knots reproduce coefficients exactly") {
        std::mt19937_64 gen(34);
        const Vector z = spaced_z(gen, 7);
        const SplineModel basis = build_spline_basis(z);
        const SplineModel fit = spline_fit(basis, z, random_vector(gen, 7), 0.05, 1e-3);
        const Vector at_knots = spline_eval(fit, fit.knots);
        CHECK((at_knots - fit.coeffs).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("constant coefficients evaluate to the constant everywhere") {
        Vector z(4);
        z << -0.4, -0.1, 0.2, 0.45;
        SplineModel m = with_coeffs(build_spline_basis(z), Vector::Constant(4, 5.0));
        Vector probe(5);
        probe << -2.0, -0.3, 0.0, 0.41, 3.0;
        CHECK((spline_eval(m, probe).array() - 5.0).abs().maxCoeff() < 1e-14);
        const SplineEval ev = spline_eval_checked(m, probe);
        CHECK(ev.extrapolated == 2);
    }
    SUBCASE("two knots interpolate linearly") {
        Vector z(2);
        z << 0.0, 1.0;
        Vector a(2);
        a << 0.0, 1.0;
        const SplineModel m = with_coeffs(build_spline_basis(z), a);
        Vector mid(1);
        mid << 0.5;
        CHECK(spline_eval(m, mid)[0] == doctest::Approx(0.5));
    }
}

TEST_CASE("j_squared on stated examples") {
    std::mt19937_64 gen(35);
    Vector z(5);
    z << -0.5, -0.2, 0.1, 0.3, 0.5;
    const SplineModel basis = build_spline_basis(z);

    SUBCASE("zero coefficients") { CHECK(j_squared(basis, 1e-3) == 0.0); }
    SUBCASE("affine coefficients with c = 0") {
        const SplineModel m = with_coeffs(basis, Vector(2.0 * basis.knots.array() - 0.7));
        CHECK(std::abs(j_squared(m, 0.0)) < 1e-12);
    }
    SUBCASE("random coefficients match quadrature") {
        const SplineModel m = with_coeffs(basis, random_vector(gen, 5));
        const oracle::NatSplineRef ref(m.knots, m.coeffs);
        const double c = 1e-3;
        const double expected = ref.curvature_integral() + c * ref.l2_integral();
        CHECK(j_squared(m, c) == doctest::Approx(expected).epsilon(1e-5));
    }
}

TEST_CASE("spline_fit is the minimiser: random perturbations never improve") {
    std::mt19937_64 gen(36);
    const Index n = 10;
    const Vector z = spaced_z(gen, n);
    const Vector r = random_vector(gen, n);
    const double mu_sq = 0.05, c = 1e-3;
    const SplineModel basis = build_spline_basis(z);
    const SplineModel fit = spline_fit(basis, z, r, mu_sq, c);

    auto objective = [&](const Vector& a) {
        const SplineModel m = with_coeffs(basis, a);
        return empirical_norm_sq(Vector(r - fitted_values(m))) + mu_sq * j_squared(m, c);
    };
    const double at_min = objective(fit.coeffs);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        Vector dir = Vector::NullaryExpr(fit.coeffs.size(), [&](Index) { return nd(gen); });
        dir.normalize();
        CHECK(objective(fit.coeffs + 1e-3 * dir) >= at_min - 1e-12);
    }
}

TEST_CASE("curvature decreases monotonically in mu_sq") {
    std::mt19937_64 gen(37);
    const Index n = 12;
    const Vector z = spaced_z(gen, n);
    const Vector r = random_vector(gen, n);
    const SplineModel basis = build_spline_basis(z);
    double previous = std::numeric_limits<double>::infinity();
    for (double mu_sq : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
        const SplineModel fit = spline_fit(basis, z, r, mu_sq, 1e-3);
        const double curvature = fit.coeffs.transpose() * basis.omega * fit.coeffs;
        CHECK(curvature <= previous + 1e-12);
        previous = curvature;
    }
}

TEST_CASE("mu_sq extremes: flattening and interpolation") {
    std::mt19937_64 gen(38);
    const Index n = 9;
    const Vector z = spaced_z(gen, n);
    const Vector r = random_vector(gen, n);
    const SplineModel basis = build_spline_basis(z);

    SUBCASE("huge mu_sq with c > 0 drives g to zero") {
        const SplineModel fit = spline_fit(basis, z, r, 1e8, 1e-3);
        CHECK(empirical_norm(fitted_values(fit)) <= 1e-3 * empirical_norm(r));
    }
    SUBCASE("vanishing mu_sq interpolates the data at the knots") {
        const SplineModel fit = spline_fit(basis, z, r, 1e-15, 1e-3);
        CHECK((fitted_values(fit) - r).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("near-ties merge into one knot") {
    Vector z(5);
    z << 0.0, 1e-9, 0.5, 0.5 + 1e-9, 1.0;
    const SplineModel m = build_spline_basis(z);
    CHECK(m.num_knots() == 3);
    CHECK(m.counts.sum() == doctest::Approx(5.0));
    CHECK(m.counts[0] == doctest::Approx(2.0));
}
