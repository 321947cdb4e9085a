#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nemthsim/ops.hpp"

using namespace nemthsim;

namespace {
constexpr double kTau = 6.283185307179586476925287;
}

TEST_CASE("build_grid computes spacing and validates input") {
    Grid g = build_grid_2d(1.0, 1.0, 8, 8, BcMode::walls);
    CHECK(g.h[0] == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(g.h[1] == doctest::Approx(0.125).epsilon(1e-15));

    Grid gp = build_grid_2d(kTau, kTau, 16, 16, BcMode::periodic);
    CHECK(gp.h[0] == doctest::Approx(kTau / 16).epsilon(1e-15));

    CHECK_THROWS_AS(build_grid_2d(1.0, 1.0, 2, 2, BcMode::walls), std::invalid_argument);
    CHECK_THROWS_AS(build_grid({1, 1, 1}, {8, 8, 8}, 4, BcMode::walls), std::invalid_argument);
    CHECK_THROWS_AS(build_grid_2d(-1.0, 1.0, 8, 8, BcMode::walls), std::invalid_argument);

    // cell centers at (i + 1/2) h
    CHECK(g.center(0, 0) == doctest::Approx(0.0625).epsilon(1e-15));
}

TEST_CASE("laplacian of a linear field vanishes on interior cells") {
    Grid g = build_grid_2d(1.0, 1.0, 12, 12, BcMode::walls);
    ScalarField f = sample_scalar(g, [](double x, double y, double) { return 3.0 * x + 2.0 * y; });
    ScalarField lap = laplacian(f, GhostRule::even);
    for (int y = 1; y < 11; ++y)
        for (int x = 1; x < 11; ++x) CHECK(std::abs(lap(x, y)) < 1e-11);
}

TEST_CASE("central divergence of the rigid rotation (y,-x) vanishes everywhere") {
    Grid g = build_grid_2d(kTau, kTau, 16, 16, BcMode::periodic);
    VectorField u = sample_vector(
        g, [](double, double y, double) { return y; }, [](double x, double, double) { return -x; });
    ScalarField div = divergence_cells(u, GhostRule::odd);
    // u1 is constant along x and u2 along y, so the central differences vanish
    // identically, wrap included
    for (double v : div.values) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("face gradient of sin(x) converges at second order") {
    auto max_err = [](int n) {
        Grid g = build_grid_2d(kTau, kTau, n, 4, BcMode::periodic);
        ScalarField f = sample_scalar(g, [](double x, double, double) { return std::sin(x); });
        VectorField grad = gradient_faces(f, GhostRule::even);
        double err = 0.0;
        for (int y = 0; y < g.res[1]; ++y)
            for (int x = 0; x < g.res[0]; ++x) {
                double xf = g.face_coord(0, x);
                err = std::max(err, std::abs(grad.at(0, x, y) - std::cos(xf)));
            }
        return err;
    };
    double e16 = max_err(16), e32 = max_err(32);
    double ratio = e16 / e32;
    CHECK(ratio > 3.4);
    CHECK(ratio < 4.6);
}

TEST_CASE("central gradient of sin(x) converges at second order") {
    auto max_err = [](int n) {
        Grid g = build_grid_2d(kTau, kTau, n, 4, BcMode::periodic);
        ScalarField f = sample_scalar(g, [](double x, double, double) { return std::sin(x); });
        VectorField grad = gradient_cells(f, GhostRule::even);
        double err = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            double x = g.center(0, int(i % g.res[0]));
            err = std::max(err, std::abs(grad.comp[0][i] - std::cos(x)));
        }
        return err;
    };
    double ratio = max_err(16) / max_err(32);
    CHECK(ratio > 3.4);
    CHECK(ratio < 4.6);
}

TEST_CASE("divergence of face gradient equals the compact laplacian exactly") {
    for (BcMode bc : {BcMode::periodic, BcMode::walls}) {
        Grid g = build_grid_2d(kTau, 1.7, 12, 8, bc);
        ScalarField f = sample_scalar(g, [](double x, double y, double) {
            return std::sin(x) + 0.3 * std::cos(2.0 * y) + 0.1 * x * y;
        });
        ScalarField lhs = divergence_faces(gradient_faces(f, GhostRule::even));
        ScalarField rhs = laplacian(f, GhostRule::even);
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(lhs.values[i] == doctest::Approx(rhs.values[i]).epsilon(1e-13));
    }
}

TEST_CASE("integrate: volume, box, and exact trigonometric quadrature") {
    Grid unit = build_grid_2d(1.0, 1.0, 8, 8, BcMode::walls);
    CHECK(integrate(ScalarField(unit, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));

    Grid box = build_grid_2d(2.0, 3.0, 8, 8, BcMode::walls);
    CHECK(integrate(ScalarField(box, 1.0)) == doctest::Approx(6.0).epsilon(1e-14));

    // midpoint rule is exact for sin^2 on the periodic torus
    Grid per = build_grid_2d(kTau, 1.0, 8, 4, BcMode::periodic);
    ScalarField s2 = sample_scalar(per, [](double x, double, double) {
        return std::sin(x) * std::sin(x);
    });
    CHECK(integrate(s2) == doctest::Approx(kTau / 2.0).epsilon(1e-14));
}

TEST_CASE("inner products: constants, orthogonality, analytic value") {
    Grid unit = build_grid_2d(1.0, 1.0, 32, 32, BcMode::walls);
    CHECK(inner_product(ScalarField(unit, 1.0), ScalarField(unit, 1.0)) ==
          doctest::Approx(1.0).epsilon(1e-14));

    Grid per = build_grid_2d(kTau, 1.0, 16, 4, BcMode::periodic);
    ScalarField s = sample_scalar(per, [](double x, double, double) { return std::sin(x); });
    ScalarField c = sample_scalar(per, [](double x, double, double) { return std::cos(x); });
    CHECK(std::abs(inner_product(s, c)) < 1e-13);

    // <u,u> for u=(y,-x): integral of x^2+y^2 = 2/3, midpoint quadrature has O(h^2) bias
    VectorField u = sample_vector(
        unit, [](double, double y, double) { return y; }, [](double x, double, double) { return -x; });
    double val = inner_product(u, u);
    CHECK(std::abs(val - 2.0 / 3.0) < unit.h[0] * unit.h[0] / 3.0);
}

TEST_CASE("discrete integration by parts is exact") {
    // periodic, staggered pairing
    {
        Grid g = build_grid_2d(kTau, kTau, 12, 12, BcMode::periodic);
        ScalarField f = sample_scalar(g, [](double x, double y, double) {
            return std::sin(x) * std::cos(y) + 0.2 * std::cos(2 * x);
        });
        VectorField v = sample_vector(
            g, [](double x, double y, double) { return std::cos(x + y); },
            [](double x, double y, double) { return std::sin(x - y); });
        // move v to faces for the staggered pairing
        Grid sg = g;
        sg.layout = Layout::staggered;
        VectorField vf = sample_vector(
            sg, [](double x, double y, double) { return std::cos(x + y); },
            [](double x, double y, double) { return std::sin(x - y); });
        double lhs = inner_product(gradient_faces(f, GhostRule::even), vf);
        double rhs = inner_product(f, divergence_faces(vf));
        CHECK(std::abs(lhs + rhs) < 1e-12);
        // central pairing on cells
        double lhs_c = inner_product(gradient_cells(f, GhostRule::even), v);
        double rhs_c = inner_product(f, divergence_cells(v, GhostRule::even));
        CHECK(std::abs(lhs_c + rhs_c) < 1e-12);
    }
    // walls with v.nu = 0 on the boundary, staggered pairing
    {
        Grid g = build_grid_2d(1.0, 1.0, 10, 10, BcMode::walls);
        ScalarField f = sample_scalar(g, [](double x, double y, double) { return x * x - 0.5 * y; });
        Grid sg = g;
        sg.layout = Layout::staggered;
        // v = curl of a stream function that vanishes on the boundary => v.nu = 0 on faces
        VectorField vf = sample_vector(
            sg,
            [](double x, double y, double) {
                return std::sin(M_PI * x) * std::sin(M_PI * x) * std::sin(2 * M_PI * y);
            },
            [](double x, double y, double) {
                return -std::sin(2 * M_PI * x) * std::sin(M_PI * y) * std::sin(M_PI * y);
            });
        // zero the boundary-normal faces exactly
        for (int y = 0; y < g.res[1]; ++y) {
            vf.at(0, 0, y) = 0.0;
            vf.at(0, g.res[0], y) = 0.0;
        }
        for (int x = 0; x < g.res[0]; ++x) {
            vf.at(1, x, 0) = 0.0;
            vf.at(1, x, g.res[1]) = 0.0;
        }
        double lhs = inner_product(gradient_faces(f, GhostRule::even), vf);
        double rhs = inner_product(f, divergence_faces(vf));
        CHECK(std::abs(lhs + rhs) < 1e-12);
    }
}

TEST_CASE("diff_op dispatch enforces ranks") {
    Grid g = build_grid_2d(1.0, 1.0, 8, 8, BcMode::periodic);
    ScalarField f(g, 1.0);
    VectorField v(g);
    DirectorField d(g);
    CHECK_THROWS_AS(diff_op(DiffKind::divergence, f), std::invalid_argument);
    CHECK_THROWS_AS(diff_op(DiffKind::gradient, v), std::invalid_argument);
    CHECK_THROWS_AS(diff_op(DiffKind::laplacian, d), std::invalid_argument);
    CHECK_NOTHROW(diff_op(DiffKind::gradient, f));
    CHECK_NOTHROW(diff_op(DiffKind::divergence, v));
    CHECK_NOTHROW(diff_op(DiffKind::director_gradient_tensor, d));
}

TEST_CASE("inner product rejects grid mismatch") {
    Grid a = build_grid_2d(1.0, 1.0, 8, 8, BcMode::periodic);
    Grid b = build_grid_2d(1.0, 1.0, 16, 16, BcMode::periodic);
    CHECK_THROWS_AS(inner_product(ScalarField(a, 1.0), ScalarField(b, 1.0)), std::invalid_argument);
}
