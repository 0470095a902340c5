#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "snb/errors.hpp"
#include "snb/field.hpp"
#include "snb/reduction.hpp"
#include "snb/ring.hpp"
#include "snb/util.hpp"
#include "support.hpp"

using namespace snb;
constexpr double kPi = 3.14159265358979323846;

namespace {

struct DeskCase {
    ring::PotentialParams params;
    double r_star = 0;
    std::shared_ptr<const field::Grid> grid;
    field::Ansatz ansatz;
};

// small desk-scale configuration shared by the reduction tests
DeskCase make_case(int s, double q, double h, double alpha_extent = 1.05) {
    DeskCase c;
    c.params.m = 0.5;
    const auto& gs = test::ground_state();
    c.r_star = gs.A1 * ring::ring_geometry_sum(s) / (32.0 * kPi * c.params.m * q);
    c.params.a = q * std::pow(c.r_star, c.params.m);
    field::GridSpec spec;
    spec.h1 = spec.h2 = spec.h3 = h;
    spec.L1 = spec.L2 = std::ceil((alpha_extent * c.r_star + 7.5) / h) * h;
    spec.L3 = 7.5;
    spec.ring_r = c.r_star;
    spec.ring_margin = 7.4;
    spec.boundary_tol = 1e-3;
    c.grid = field::Grid::create(spec);
    c.ansatz = field::assemble_ansatz(gs, ring::bump_points(s, c.r_star), c.grid);
    return c;
}

field::Field smooth_symmetric(const DeskCase& c, int s, unsigned seed, double amp) {
    util::Rng rng(seed);
    auto f = field::make_field(c.grid);
    const auto& g = *c.grid;
    for (int b = 0; b < 5; ++b) {
        const double cx = rng.uniform(-0.5, 0.5) * c.r_star * 1.5;
        const double cy = rng.uniform(-0.5, 0.5) * c.r_star * 1.5;
        const double a = rng.uniform(-amp, amp), wid = rng.uniform(1.0, 3.0);
        for (std::size_t k = 0; k < g.n3; ++k)
            for (std::size_t j = 0; j < g.n2; ++j)
                for (std::size_t i = 0; i < g.n1; ++i) {
                    const double x = g.x1(i) - cx, y = g.x2(j) - cy, z = g.x3(k);
                    f[g.idx(i, j, k)] +=
                        a * std::exp(-(x * x + y * y + z * z) / (wid * wid));
                }
    }
    return field::symmetrize(f, s);
}

} // namespace

TEST_CASE("constraint projector") {
    auto c = make_case(4, 0.70, 0.45);
    auto cs = reduce::build_constraint(c.ansatz, c.params);
    CHECK(cs.c_ghat > 0);
    auto v = smooth_symmetric(c, 4, test::test_seed(), 1.0);
    const double gcn = std::sqrt(cs.gc_norm2);
    const double vn = std::sqrt(c.grid->cell_volume() *
                                std::inner_product(v.v.begin(), v.v.end(), v.v.begin(), 0.0));
    auto pv = reduce::project_constraint(v, cs);
    CHECK(std::abs(reduce::constraint_value(pv, cs)) <= 1e-10 * vn * gcn);
    // fixed point on the constrained subspace
    auto ppv = reduce::project_constraint(pv, cs);
    double drift = 0;
    for (std::size_t i = 0; i < pv.size(); ++i)
        drift = std::max(drift, std::abs(ppv[i] - pv[i]));
    CHECK(drift <= 1e-12 * (1.0 + field::max_abs(pv)));
    // g_hat maps to (numerically) nothing along itself
    auto pg = reduce::project_constraint(cs.g_hat, cs);
    CHECK(std::abs(reduce::constraint_value(pg, cs)) <=
          1e-12 * (1.0 + std::abs(reduce::constraint_value(cs.g_hat, cs))));
}

TEST_CASE("Taylor identity of the discrete energy") {
    auto c = make_case(4, 0.70, 0.45);
    auto w = smooth_symmetric(c, 4, test::test_seed() + 1, 0.2);
    const auto rep = reduce::taylor_identity_check(c.ansatz, c.params, w);
    CHECK(std::abs(rep.delta1) <= 1e-10 * (1.0 + std::abs(rep.J_base)));
    // the quadratic-form identity: Q from the exact second variation equals
    // the displayed integral form of L to round-off
    CHECK(std::abs(rep.q_form - rep.l_form) <= 1e-11 * (1.0 + std::abs(rep.q_form)));
    // delta2 is controlled by the discrete residual of the interpolated bump
    ring::PotentialParams v1;
    v1.a = 1e-300;
    auto u1 = field::bump_field(test::ground_state(), c.grid, {0, 0, 0});
    auto res = field::residual_strong(u1, v1);
    double res_l2 = 0;
    for (double v : res.v) res_l2 += v * v;
    res_l2 = std::sqrt(res_l2 * c.grid->cell_volume());
    double w_l2 = 0;
    for (double v : w.v) w_l2 += v * v;
    w_l2 = std::sqrt(w_l2 * c.grid->cell_volume());
    CHECK(std::abs(rep.delta2) <= 10.0 * 2.0 * res_l2 * w_l2);

    // w = 0: both defects vanish identically
    auto zero = field::make_field(c.grid);
    const auto rep0 = reduce::taylor_identity_check(c.ansatz, c.params, zero);
    CHECK(rep0.delta1 == 0.0);
    CHECK(rep0.delta2 == 0.0);
}

TEST_CASE("N' against finite differences of N") {
    auto c = make_case(4, 0.70, 0.45);
    auto w = smooth_symmetric(c, 4, test::test_seed() + 2, 0.3);
    auto phi = smooth_symmetric(c, 4, test::test_seed() + 3, 1.0);
    const double n0 = reduce::N_value(c.ansatz, w);
    auto np = reduce::apply_Nprime(c.ansatz, w);
    double dirn = 0;
    for (std::size_t i = 0; i < w.size(); ++i) dirn += np[i] * phi[i];
    dirn *= c.grid->cell_volume();
    std::vector<double> errs;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        auto wp = w;
        for (std::size_t i = 0; i < wp.size(); ++i) wp[i] += eps * phi[i];
        errs.push_back(std::abs(reduce::N_value(c.ansatz, wp) - n0 - eps * dirn));
    }
    const double order = std::log10(errs[0] / errs[1]);
    CHECK(order >= 1.9);
}

TEST_CASE("linearized operator is symmetric") {
    auto c = make_case(4, 0.70, 0.45);
    auto p1 = smooth_symmetric(c, 4, test::test_seed() + 4, 0.7);
    auto p2 = smooth_symmetric(c, 4, test::test_seed() + 5, 0.7);
    auto lp1 = reduce::apply_L(c.ansatz, c.params, p1);
    auto lp2 = reduce::apply_L(c.ansatz, c.params, p2);
    double a = 0, b = 0, s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        a += lp1[i] * p2[i];
        b += p1[i] * lp2[i];
        s1 += p1[i] * p1[i];
        s2 += p2[i] * p2[i];
    }
    CHECK(std::abs(a - b) <= 1e-11 * std::sqrt(s1 * s2) *
                                 (1.0 + field::max_abs(c.ansatz.Ur)));
    // translation near-kernel: L applied to d(U_1)/dx1 is small
    const auto& gs = test::ground_state();
    ring::PotentialParams v1;
    v1.a = 1e-300;
    auto g1 = field::make_field(c.grid);
    const auto& g = *c.grid;
    for (std::size_t k = 0; k < g.n3; ++k)
        for (std::size_t j = 0; j < g.n2; ++j)
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double x = g.x1(i), y = g.x2(j), z = g.x3(k);
                const double r = std::sqrt(x * x + y * y + z * z);
                g1[g.idx(i, j, k)] = r < 1e-12 ? 0.0 : gs.dU_at(r) * x / r;
            }
    field::Ansatz single;
    single.gs = &gs;
    single.bumps.s = 1;
    single.bumps.r = 1.0;
    single.bumps.centers = {{0.0, 0.0, 0.0}};
    single.Ur = field::bump_field(gs, c.grid, {0, 0, 0});
    single.t_ur_sq = field::make_field(c.grid);
    std::vector<double> sq(g.n);
    for (std::size_t i = 0; i < g.n; ++i) sq[i] = single.Ur[i] * single.Ur[i];
    g.newton_convolve(sq, single.t_ur_sq.v);
    auto lz = reduce::apply_L(single, v1, g1);
    double nl = 0, nz = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
        nl += lz[i] * lz[i];
        nz += g1[i] * g1[i];
    }
    CHECK(std::sqrt(nl / nz) < 20.0 * 0.45 * 0.45);

    // zero maps to zero
    auto zero = field::make_field(c.grid);
    auto lzero = reduce::apply_L(c.ansatz, c.params, zero);
    for (double v : lzero.v) CHECK(v == 0.0);
    // quadratic-form identity against the integral definition is covered by
    // the Taylor identity case (q_form vs l_form)
}

TEST_CASE("polished discrete bump is a fixed point with zero error") {
    const auto& gs = test::ground_state();
    field::GridSpec spec;
    spec.h1 = spec.h2 = spec.h3 = 0.45;
    spec.L1 = spec.L2 = spec.L3 = 9.0;
    spec.boundary_tol = 1e-2;
    auto grid = field::Grid::create(spec);
    auto u = reduce::polish_single_bump(gs, grid, 8);
    ring::PotentialParams v1;
    v1.a = 1e-300;
    auto res = field::residual_strong(u, v1);
    CHECK(field::max_abs(res) < 1e-9);

    // with the exact discrete bump substituted, the error term is at the
    // solver floor and one iteration returns an equally small correction
    field::Ansatz single;
    single.gs = &gs;
    single.bumps.s = 1;
    single.bumps.r = 1.0;
    single.bumps.centers = {{0.0, 0.0, 0.0}};
    single.Ur = u;
    single.t_ur_sq = field::make_field(grid);
    std::vector<double> sq(grid->n);
    for (std::size_t i = 0; i < grid->n; ++i) sq[i] = u[i] * u[i];
    grid->newton_convolve(sq, single.t_ur_sq.v);
    reduce::ConstraintSet free_cs;
    free_cs.g_c = field::make_field(grid);
    free_cs.g_hat = field::make_field(grid);
    free_cs.c_ghat = 1.0;
    free_cs.gc_norm2 = 0.0;
    auto st = reduce::solve_w(single, v1, free_cs, 1e-8, 4);
    CHECK(st.dual_norm < 1e-7);
    CHECK(st.w_norms.back() < 1e-6);
}

TEST_CASE("pure interaction error follows the Coulomb tail law") {
    // with a = 0 the error reduces to the bump-interaction bracket; its
    // size at the bump centers is set by the neighbors' Newtonian tails
    // (A1/(4 pi d) per neighbor), so the sup norm decays like 1/d, not
    // exponentially -- the exponentially small pieces are the overlap
    // integrals, which the dual-norm trend test probes separately
    const auto& gs = test::ground_state();
    ring::PotentialParams v1;
    v1.a = 1e-300;
    std::vector<double> lds, les;
    for (double d : {9.0, 12.0, 15.0}) {
        const double r = d / (2.0 * std::sin(kPi / 4));
        field::GridSpec spec;
        spec.h1 = spec.h2 = spec.h3 = 0.45;
        spec.L1 = spec.L2 = std::ceil((r + 7.5) / 0.45) * 0.45;
        spec.L3 = 7.5;
        spec.ring_margin = 7.4;
        spec.boundary_tol = 1e-2;
        auto grid = field::Grid::create(spec);
        auto ans = field::assemble_ansatz(gs, ring::bump_points(4, r), grid);
        auto et = reduce::error_term(ans, v1);
        lds.push_back(std::log(d));
        les.push_back(std::log(field::max_abs(et.e_strong)));
        // magnitude check: about (1/2) U(0) A1 sum_j 1/(4 pi d_1j)
        const auto bumps = ring::bump_points(4, r);
        double coul = 0;
        for (double dd : bumps.distances) coul += gs.A1 / (4 * kPi * dd);
        CHECK(field::max_abs(et.e_strong) ==
              doctest::Approx(0.5 * gs.U0() * coul).epsilon(0.25));
    }
    const auto fit = util::fit_line(lds, les);
    CHECK(fit.slope < -0.75);
    CHECK(fit.slope > -1.35);
}

TEST_CASE("error dual norm trend across bump counts") {
    // dual_norm / s against the Lemma-3.1-style scale: at m = 1/2 the
    // predicted exponent degenerates to the free beta, so the check is a
    // reported slope with a wide band
    const auto& gs = test::ground_state();
    std::vector<double> xs, ys;
    for (int s : {4, 6, 8}) {
        const double q = reduce::desk_coupling(s);
        auto c = make_case(s, q, 0.5);
        auto et = reduce::error_term(c.ansatz, c.params);
        xs.push_back(std::log(double(s)));
        ys.push_back(std::log(et.dual_norm / double(s)));
        (void)gs;
    }
    const auto fit = util::fit_line(xs, ys);
    MESSAGE("dual/s slope in s: ", fit.slope);
    CHECK(fit.slope < 0.1);
    CHECK(fit.slope > -4.0);
}

TEST_CASE("contraction at a desk configuration") {
    auto c = make_case(4, 0.70, 0.5);
    auto cs = reduce::build_constraint(c.ansatz, c.params);
    const double zeta =
        reduce::zeta_estimate(c.ansatz, c.params, cs, 30, test::test_seed());
    CHECK(zeta > 0.05);
    auto st = reduce::solve_w(c.ansatz, c.params, cs, 1e-6, 20, {}, nullptr, zeta);
    REQUIRE(st.kappas.size() >= 2);
    for (std::size_t k = 1; k < st.kappas.size(); ++k) CHECK(st.kappas[k] <= 0.5);
    // accepted iterates satisfy the constraint
    const double gcn = std::sqrt(cs.gc_norm2);
    CHECK(std::abs(reduce::constraint_value(st.w, cs)) <=
          1e-8 * std::max(st.w_norms.back(), 1e-6) * gcn);
    // the reported invertibility margin does not degrade under refinement
    auto cf = make_case(4, 0.70, 0.5 * 2.0 / 3.0);
    auto csf = reduce::build_constraint(cf.ansatz, cf.params);
    const double zeta_f =
        reduce::zeta_estimate(cf.ansatz, cf.params, csf, 30, test::test_seed());
    MESSAGE("zeta coarse ", zeta, " fine ", zeta_f);
    CHECK(zeta_f > 0.5 * zeta);
}

TEST_CASE("activation gate rejects an over-coupled configuration") {
    auto c = make_case(4, 1.05, 0.5);
    auto cs = reduce::build_constraint(c.ansatz, c.params);
    const double zeta =
        reduce::zeta_estimate(c.ansatz, c.params, cs, 30, test::test_seed());
    reduce::SolverConfig cfg;
    cfg.activation_ratio = 1.0;
    CHECK_THROWS_AS(
        reduce::solve_w(c.ansatz, c.params, cs, 1e-6, 20, cfg, nullptr, zeta),
        ContractionFailed);
}
