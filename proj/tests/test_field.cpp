#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "snb/errors.hpp"
#include "snb/field.hpp"
#include "snb/util.hpp"
#include "support.hpp"

using namespace snb;
using namespace snb::field;
constexpr double kPi = 3.14159265358979323846;

namespace {

std::shared_ptr<Grid> small_grid(double L, double h, double boundary_tol = 1e-8) {
    GridSpec spec;
    spec.L1 = spec.L2 = spec.L3 = L;
    spec.h1 = spec.h2 = spec.h3 = h;
    spec.boundary_tol = boundary_tol;
    return Grid::create(spec);
}

Field gaussian_field(std::shared_ptr<const Grid> g, double width = 1.0,
                     std::array<double, 3> c = {0, 0, 0}) {
    auto f = make_field(g);
    for (std::size_t k = 0; k < g->n3; ++k)
        for (std::size_t j = 0; j < g->n2; ++j)
            for (std::size_t i = 0; i < g->n1; ++i) {
                const double x = g->x1(i) - c[0], y = g->x2(j) - c[1],
                             z = g->x3(k) - c[2];
                f[g->idx(i, j, k)] = std::exp(-(x * x + y * y + z * z) / (width * width));
            }
    return f;
}

Field smooth_random(std::shared_ptr<const Grid> g, unsigned seed) {
    util::Rng rng(seed);
    auto f = make_field(g);
    for (int b = 0; b < 6; ++b) {
        const double cx = rng.uniform(-3.0, 3.0), cy = rng.uniform(-3.0, 3.0),
                     cz = rng.uniform(-2.0, 2.0);
        const double amp = rng.uniform(-1.0, 1.0), wid = rng.uniform(1.5, 2.5);
        for (std::size_t k = 0; k < g->n3; ++k)
            for (std::size_t j = 0; j < g->n2; ++j)
                for (std::size_t i = 0; i < g->n1; ++i) {
                    const double x = g->x1(i) - cx, y = g->x2(j) - cy, z = g->x3(k) - cz;
                    f[g->idx(i, j, k)] +=
                        amp * std::exp(-(x * x + y * y + z * z) / (wid * wid));
                }
    }
    return f;
}

} // namespace

TEST_CASE("grid arithmetic and guards") {
    GridSpec spec;
    spec.L1 = spec.L2 = spec.L3 = 20.0;
    spec.h1 = spec.h2 = spec.h3 = 0.3125;
    auto g = Grid::create(spec);
    CHECK(g->n1 == 129);
    CHECK(g->p1 >= 258); // at least the doubled extent (rounded up to a fast size)
    CHECK(g->p1 >= 2 * g->n1);

    // ring of radius 10 with margin 8 needs a half-extent of 18
    GridSpec ok = spec;
    ok.ring_r = 10.0;
    CHECK(Grid::create(ok)->n1 == 129);
    GridSpec bad = ok;
    bad.L1 = bad.L2 = 15.0;
    CHECK_THROWS_AS(Grid::create(bad), RingOutOfGrid);

    GridSpec tiny = spec;
    tiny.memory_budget_gb = 1e-6;
    CHECK_THROWS_AS(Grid::create(tiny), BudgetExceeded);
    GridSpec coarse = spec;
    coarse.L1 = 1.0;
    CHECK_THROWS_AS(Grid::create(coarse), Error);
}

TEST_CASE("symmetrize is a projector onto the symmetry class") {
    auto g = small_grid(6.0, 0.3);
    const auto& gs = test::ground_state_coarse();
    // a radial field is a fixed point up to interpolation error
    auto u = bump_field(gs, g, {0, 0, 0});
    auto su = symmetrize(u, 6);
    double worst = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        worst = std::max(worst, std::abs(su[i] - u[i]));
    CHECK(worst < 1e-2);
    // odd in x3: exactly annihilated (reflections are node maps)
    auto odd = make_field(g);
    for (std::size_t k = 0; k < g->n3; ++k)
        for (std::size_t j = 0; j < g->n2; ++j)
            for (std::size_t i = 0; i < g->n1; ++i)
                odd[g->idx(i, j, k)] = g->x3(k) * std::exp(-0.2 * (g->x1(i) * g->x1(i)));
    auto sodd = symmetrize(odd, 4);
    for (double v : sodd.v) CHECK(std::abs(v) < 1e-15);
    // idempotency within interpolation tolerance on smooth random fields,
    // measured inside the inscribed disk where the rotation average acts
    auto f = smooth_random(g, test::test_seed());
    auto sf = symmetrize(f, 5);
    auto ssf = symmetrize(sf, 5);
    double drift = 0, scale = 0;
    const double rmax = 6.0 - 2 * 0.3;
    for (std::size_t k = 0; k < g->n3; ++k)
        for (std::size_t j = 0; j < g->n2; ++j)
            for (std::size_t i = 0; i < g->n1; ++i) {
                const double x = g->x1(i), y = g->x2(j);
                if (x * x + y * y > rmax * rmax) continue;
                const std::size_t id = g->idx(i, j, k);
                drift = std::max(drift, std::abs(ssf[id] - sf[id]));
                scale = std::max(scale, std::abs(sf[id]));
            }
    // bilinear rotation interpolation is second order: h^2/(8 width^2) here
    CHECK(drift < 1e-12 + 2e-2 * scale);
}

TEST_CASE("adjoint of the symmetrizer") {
    auto g = small_grid(5.0, 0.4);
    auto f = smooth_random(g, test::test_seed());
    auto w = smooth_random(g, test::test_seed() + 7);
    auto sf = symmetrize(f, 5);
    auto stw = symmetrize_adjoint(w, 5);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        a += sf[i] * w[i];
        b += f[i] * stw[i];
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("free-space Newtonian convolution against the Gaussian closed form") {
    auto g = small_grid(8.0, 0.25);
    auto f = gaussian_field(g);
    auto T = t_apply(f);
    double worst = 0;
    for (std::size_t k = 0; k < g->n3; ++k)
        for (std::size_t j = 0; j < g->n2; ++j)
            for (std::size_t i = 0; i < g->n1; ++i) {
                const double x = g->x1(i), y = g->x2(j), z = g->x3(k);
                const double r = std::sqrt(x * x + y * y + z * z);
                if (r > 6.0) continue;
                const double exact =
                    r < 1e-9 ? 0.5 : (std::sqrt(kPi) / 4.0) * std::erf(r) / r;
                worst = std::max(worst, std::abs(T[g->idx(i, j, k)] - exact));
            }
    CHECK(worst < 1e-3);

    // linearity to round-off
    auto f2 = gaussian_field(g, 1.4, {1.0, 0.5, 0.0});
    auto Ta = t_apply(f2);
    auto fsum = make_field(g);
    for (std::size_t i = 0; i < fsum.size(); ++i) fsum[i] = 2.0 * f[i] - 3.0 * f2[i];
    auto Tsum = t_apply(fsum);
    double lin = 0;
    for (std::size_t i = 0; i < fsum.size(); ++i)
        lin = std::max(lin, std::abs(Tsum[i] - 2.0 * T[i] + 3.0 * Ta[i]));
    CHECK(lin < 1e-12);

    // adjointness of T under the node sum
    double tf_g = 0, f_tg = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        tf_g += T[i] * f2[i];
        f_tg += f[i] * Ta[i];
    }
    CHECK(tf_g == doctest::Approx(f_tg).epsilon(1e-12));

    // boundary-mass guard
    auto flat = make_field(g);
    for (auto& v : flat.v) v = 1.0;
    CHECK_THROWS_AS(t_apply(flat), BoundaryMassTooLarge);
}

TEST_CASE("-Delta T[f] = f in the interior at O(h^2)") {
    std::vector<double> sup;
    for (double h : {0.25, 0.125}) {
        auto g = small_grid(6.0, h);
        auto f = gaussian_field(g);
        auto T = t_apply(f);
        std::vector<double> lap(g->n);
        g->laplacian(T.v, lap);
        double worst = 0;
        for (std::size_t k = 2; k + 2 < g->n3; ++k)
            for (std::size_t j = 2; j + 2 < g->n2; ++j)
                for (std::size_t i = 2; i + 2 < g->n1; ++i)
                    worst = std::max(worst,
                                     std::abs(-lap[g->idx(i, j, k)] - f[g->idx(i, j, k)]));
        sup.push_back(worst);
    }
    CHECK(sup[0] / sup[1] == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("radial oracle: T[U^2] equals 2 Psi on the axis") {
    const auto& gs = test::ground_state();
    auto g = small_grid(14.0, 0.25, 1e-4);
    auto u = bump_field(gs, g, {0, 0, 0});
    auto sq = make_field(g);
    for (std::size_t i = 0; i < u.size(); ++i) sq[i] = u[i] * u[i];
    auto T = t_apply(sq);
    double worst = 0;
    for (std::size_t i = 0; i < g->n1; ++i) {
        const double r = std::abs(g->x1(i));
        const double psi = gs.Psi_at(std::max(r, 1e-12));
        worst = std::max(worst, std::abs(0.5 * T[g->idx(i, g->n2 / 2, g->n3 / 2)] - psi) /
                                    psi);
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("ansatz assembly") {
    const auto& gs = test::ground_state();
    GridSpec spec;
    spec.L1 = spec.L2 = 14.0;
    spec.L3 = 7.0;
    spec.h1 = spec.h2 = spec.h3 = 0.25;
    spec.ring_r = 5.0;
    spec.ring_margin = 8.0;
    spec.boundary_tol = 1e-3;
    auto g = Grid::create(spec);

    // single bump at the origin reproduces the radial profile on the axis
    auto u1 = bump_field(gs, g, {0, 0, 0});
    double worst = 0;
    for (std::size_t i = 0; i < g->n1; ++i) {
        const double r = std::abs(g->x1(i));
        worst = std::max(worst,
                         std::abs(u1[g->idx(i, g->n2 / 2, g->n3 / 2)] - gs.U_at(r)));
    }
    CHECK(worst < 1e-9);

    const auto bumps = ring::bump_points(4, 5.0);
    auto ans = assemble_ansatz(gs, bumps, g);
    // the sum of bumps is exact to round-off
    auto direct = make_field(g);
    for (const auto& c : bumps.centers) {
        auto ub = bump_field(gs, g, c);
        for (std::size_t i = 0; i < direct.size(); ++i) direct[i] += ub[i];
    }
    double dsum = 0;
    for (std::size_t i = 0; i < direct.size(); ++i)
        dsum = std::max(dsum, std::abs(direct[i] - ans.Ur[i]));
    CHECK(dsum < 1e-13);
    // peak height at a bump center approaches U(0) as bumps separate
    const std::size_t ic = std::size_t(std::llround(5.0 / 0.25)) + g->n1 / 2;
    const double peak = ans.Ur[g->idx(ic, g->n2 / 2, g->n3 / 2)];
    CHECK(std::abs(peak - gs.U0()) < 50.0 * std::exp(-bumps.min_spacing()));
    // the assembled field is symmetric to interpolation tolerance
    auto sym = symmetrize(ans.Ur, 4);
    double sdrift = 0;
    for (std::size_t i = 0; i < sym.size(); ++i)
        sdrift = std::max(sdrift, std::abs(sym[i] - ans.Ur[i]));
    CHECK(sdrift < 5e-3 * gs.U0());

    // Z field matches a centered difference of the assembly in r
    auto z0 = z_field(gs, bumps, g, 0);
    const double eps = 1e-4;
    auto bp = ring::bump_points(4, 5.0 + eps);
    auto bm = ring::bump_points(4, 5.0 - eps);
    auto up = bump_field(gs, g, bp.centers[0]);
    auto um = bump_field(gs, g, bm.centers[0]);
    double zworst = 0;
    for (std::size_t i = 0; i < z0.size(); ++i)
        zworst = std::max(zworst, std::abs((up[i] - um[i]) / (2 * eps) - z0[i]));
    CHECK(zworst < 1e-6);

    CHECK_THROWS_AS(assemble_ansatz(gs, ring::bump_points(4, 9.0), g), RingOutOfGrid);
}

TEST_CASE("energy and residual") {
    const auto& gs = test::ground_state();
    auto g = small_grid(13.0, 0.25, 1e-4);
    ring::PotentialParams v1;
    v1.a = 1e-300; // V == 1

    auto zero = make_field(g);
    CHECK(energy_J(zero, v1) == 0.0);

    auto u = bump_field(gs, g, {0, 0, 0});
    const double J = energy_J(u, v1);
    CHECK(J == doctest::Approx(gs.A2 / (32 * kPi)).epsilon(1e-2));

    auto rz = residual_strong(zero, v1);
    for (double v : rz.v) CHECK(v == 0.0);

    // cubic homogeneity of the nonlocal term:
    // residual(2u) - 2 residual(u) = -3 T[u^2] u
    auto r1 = residual_strong(u, v1);
    auto u2 = make_field(g);
    for (std::size_t i = 0; i < u.size(); ++i) u2[i] = 2.0 * u[i];
    auto r2 = residual_strong(u2, v1);
    auto sq = make_field(g);
    for (std::size_t i = 0; i < u.size(); ++i) sq[i] = u[i] * u[i];
    auto T = t_apply(sq);
    double worst = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        worst = std::max(worst, std::abs(r2[i] - 2.0 * r1[i] + 3.0 * T[i] * u[i]));
    CHECK(worst < 1e-11);
}

TEST_CASE("single-bump residual refines at O(h^2) in the interior") {
    const auto& gs = test::ground_state();
    ring::PotentialParams v1;
    v1.a = 1e-300;
    std::vector<double> sup;
    for (double h : {0.3, 0.15}) {
        auto g = small_grid(9.0, h, 1e-2);
        auto u = bump_field(gs, g, {0, 0, 0});
        auto r = residual_strong(u, v1);
        double worst = 0;
        for (std::size_t k = 0; k < g->n3; ++k)
            for (std::size_t j = 0; j < g->n2; ++j)
                for (std::size_t i = 0; i < g->n1; ++i) {
                    if (std::abs(g->x1(i)) > 7.0 || std::abs(g->x2(j)) > 7.0 ||
                        std::abs(g->x3(k)) > 7.0)
                        continue; // the Dirichlet faces carry a U(L)/h^2 spike
                    worst = std::max(worst, std::abs(r[g->idx(i, j, k)]));
                }
        sup.push_back(worst);
    }
    CHECK(sup[0] / sup[1] == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("energy is invariant under the symmetry class") {
    const auto& gs = test::ground_state();
    field::GridSpec spec;
    spec.L1 = spec.L2 = 12.0;
    spec.L3 = 7.0;
    spec.h1 = spec.h2 = spec.h3 = 0.3;
    spec.boundary_tol = 1e-2;
    auto g = Grid::create(spec);
    ring::PotentialParams pp;
    pp.a = 0.5;
    pp.m = 0.5;
    // the assembled ring is symmetric as a function; applying the projector
    // changes J only at the interpolation level
    auto ans = assemble_ansatz(gs, ring::bump_points(3, 4.0), g);
    auto su = symmetrize(ans.Ur, 3);
    const double J1 = energy_J(ans.Ur, pp);
    const double J2 = energy_J(su, pp);
    CHECK(J1 == doctest::Approx(J2).epsilon(5e-2));
}
