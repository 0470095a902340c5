#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "snb/errors.hpp"
#include "snb/ring.hpp"
#include "support.hpp"

using namespace snb;
using namespace snb::ring;
constexpr double kPi = 3.14159265358979323846;

TEST_CASE("bump geometry") {
    const auto b4 = bump_points(4, 1.0);
    CHECK(b4.centers[0][0] == doctest::Approx(1.0));
    CHECK(std::abs(b4.centers[1][0]) < 1e-15);
    CHECK(b4.centers[1][1] == doctest::Approx(1.0));
    CHECK(b4.centers[2][0] == doctest::Approx(-1.0));
    CHECK(b4.centers[3][1] == doctest::Approx(-1.0));
    const auto b2 = bump_points(2, 5.0);
    CHECK(b2.distances[0] == doctest::Approx(10.0));
    // the nearest-neighbor distance is 2 r sin(pi/s) for any configuration
    for (int s : {3, 5, 8, 17}) {
        const auto b = bump_points(s, 2.5);
        double dmin = 1e300;
        for (double d : b.distances) dmin = std::min(dmin, d);
        CHECK(dmin == doctest::Approx(2 * 2.5 * std::sin(kPi / s)).epsilon(1e-12));
    }
}

TEST_CASE("ring sums and their asymptotics") {
    CHECK(ring_sum(2, 5.0, 1.0).value == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(ring_sum(3, 1.0, 1.0).value ==
          doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-14));
    const auto big = ring_sum(1000000, 7.0, 1.0);
    CHECK(big.ratio_to_leading > 0.98);
    CHECK(big.ratio_to_leading < 1.02);
    for (int s : {100, 1000, 10000}) {
        const auto rs = ring_sum(s, 3.0, 1.0);
        CHECK(rs.value >= rs.lower_bound);
        CHECK(rs.value <= rs.upper_bound);
    }
}

TEST_CASE("pair interaction") {
    const auto& gs = test::ground_state();
    PairKernel ker(gs);
    // coincident centers give the A2 double integral
    CHECK(ker.evaluate(0.0) == doctest::Approx(gs.A2).epsilon(1e-3));
    // monopole far field
    const double d10 = ker.evaluate(10.0);
    CHECK(10.0 * d10 / (gs.A1 * gs.A1) > 0.95);
    CHECK(10.0 * d10 / (gs.A1 * gs.A1) < 1.05);
    // strict decrease
    double prev = ker.evaluate(0.0);
    for (double d : {2.0, 4.0, 8.0, 16.0}) {
        const double v = ker.evaluate(d);
        CHECK(v < prev);
        prev = v;
    }
    // the two quadrature routes agree
    for (double d : {6.0, 20.0}) {
        const double cyl = ker.cylindrical(d, 0.025, 30.0);
        const double sph = ker.spherical(d);
        CHECK(cyl == doctest::Approx(sph).epsilon(2e-4));
    }
    // symmetry of the two roles: swap which bump carries the potential
    // (the integrand becomes W(|x|) U^2(|x - d e|))
    {
        const double d = 6.0, dz = 0.05, extent = 30.0;
        const auto nr = std::size_t(std::ceil(extent / dz));
        const auto nz = 2 * nr;
        double total = 0.0;
        for (std::size_t iz = 0; iz <= nz; ++iz) {
            const double z = -extent + double(iz) * dz;
            const double wz = (iz == 0 || iz == nz) ? 0.5 : 1.0;
            double row = 0.0;
            for (std::size_t ir = 0; ir <= nr; ++ir) {
                const double rc = double(ir) * dz;
                const double wr = (ir == 0 || ir == nr) ? 0.5 : 1.0;
                const double ra = std::sqrt(rc * rc + z * z);
                const double rb = std::sqrt(rc * rc + (z - d) * (z - d));
                row += wr * rc * ker.w_pot(ra) * ker.u_sq(rb);
            }
            total += wz * row;
        }
        const double swapped = 2.0 * kPi * total * dz * dz;
        CHECK(swapped == doctest::Approx(ker.cylindrical(d, dz, extent)).epsilon(1e-6));
    }
    CHECK_THROWS_AS(pair_interaction(gs, -1.0), Error);
}

TEST_CASE("interaction sum against the monopole and the paper constant") {
    const auto& gs = test::ground_state();
    const auto rep = interaction_sum_check(gs, 6, 12.0);
    CHECK(rep.sum_exact / rep.sum_monopole == doctest::Approx(1.0).epsilon(0.05));
    // single pair: no logarithm, S = D(2r)/(8 pi)
    const auto rep2 = interaction_sum_check(gs, 2, 8.0);
    PairKernel ker(gs);
    CHECK(rep2.sum_exact == doctest::Approx(ker.evaluate(16.0) / (8 * kPi)).epsilon(1e-9));
    CHECK_THROWS_AS(interaction_sum_check(gs, 64, 8.0), SeparationTooSmall);
}

TEST_CASE("interaction constant adjudication") {
    const auto& gs = test::ground_state();
    const auto fit = fit_interaction_constant(gs, {});
    CHECK(fit.matches == "1/(8 pi^2)");
    CHECK(fit.rel_dev_adjudicated < 0.05);
    CHECK(fit.rel_dev_paper > 1.0);
    // every row's local constant sits near the adjudicated value
    for (const auto& row : fit.rows)
        CHECK(row.fitted_c == doctest::Approx(1.0 / (8 * kPi * kPi)).epsilon(0.05));
}

TEST_CASE("energy expansion terms") {
    const auto& gs = test::ground_state();
    PotentialParams pp;
    pp.m = 0.5;
    pp.a = desk_a(gs, 6, 0.5, 12.0, Convention::paper);
    const auto e = energy_expansion(gs, pp, 6, 12.0);
    CHECK(e.t_const > 0);
    CHECK(e.t_pot > 0);
    CHECK(e.t_int > 0);
    CHECK(e.t_const_paper == doctest::Approx(2 * e.t_const).epsilon(1e-14));
    CHECK(e.t_int == doctest::Approx(4 * e.t_int_paper).epsilon(1e-14));
    // 1/r homogeneity of the interaction term
    const auto e2 = energy_expansion(gs, pp, 6, 24.0);
    CHECK(e2.t_int == doctest::Approx(e.t_int / 2).epsilon(1e-14));

    // stationarity: m T_pot(r_s) = T_int(r_s) at the matching closed form,
    // for both constant conventions
    for (auto conv : {Convention::paper, Convention::adjudicated}) {
        PotentialParams p2;
        p2.m = 0.5;
        p2.a = desk_a(gs, 6, 0.5, 14.0, conv);
        const auto opt = optimal_radius(gs, p2, 6, conv);
        const auto es = energy_expansion(gs, p2, 6, opt.r_closed_form);
        const double t_int = conv == Convention::paper ? es.t_int_paper : es.t_int;
        CHECK(p2.m * es.t_pot == doctest::Approx(t_int).epsilon(1e-6));
    }
}

TEST_CASE("optimal radius") {
    const auto& gs = test::ground_state();
    // plug-in case: A1/(64 a m pi^2) = 1 and m = 1/2 gives r_s = (s log s)^2
    PotentialParams pp;
    pp.m = 0.5;
    pp.a = gs.A1 / (64.0 * 0.5 * kPi * kPi);
    const auto opt = optimal_radius(gs, pp, 5, Convention::paper);
    const double slogs = 5.0 * std::log(5.0);
    CHECK(opt.r_closed_form == doctest::Approx(slogs * slogs).epsilon(1e-12));
    // the golden-section maximizer agrees with the closed form
    CHECK(opt.r_numeric == doctest::Approx(opt.r_closed_form).epsilon(1e-6));
    // g' changes sign across r_s
    auto gp = [&](double r) {
        const double d = 1e-5 * r;
        return (g_reduced(gs, pp, 5, r + d, Convention::paper) -
                g_reduced(gs, pp, 5, r - d, Convention::paper)) / (2 * d);
    };
    CHECK(gp(0.9 * opt.r_closed_form) > 0);
    CHECK(gp(1.1 * opt.r_closed_form) < 0);
    // stationarity of s*g at the closed form
    const double sg = 5.0 * g_reduced(gs, pp, 5, opt.r_closed_form, Convention::paper);
    const double d = 1e-3 * opt.r_closed_form;
    const double diff =
        5.0 * (g_reduced(gs, pp, 5, opt.r_closed_form + d, Convention::paper) -
               g_reduced(gs, pp, 5, opt.r_closed_form - d, Convention::paper));
    CHECK(std::abs(diff) <= 1e-4 * std::abs(sg));

    // degenerate regime m < 1/2: the optimal spacing collapses as s grows
    PotentialParams p3;
    p3.m = 0.3;
    p3.a = 1.0;
    double prev = 1e300;
    for (int s : {1000, 10000, 100000}) {
        const auto o3 = optimal_radius(gs, p3, s);
        CHECK(o3.degenerate_regime);
        CHECK(o3.spacing < prev);
        CHECK(o3.r_bar_numeric == doctest::Approx(o3.r_bar_closed_form).epsilon(1e-6));
        prev = o3.spacing;
    }
}

TEST_CASE("radius window") {
    const auto& gs = test::ground_state();
    PotentialParams pp;
    pp.m = 0.5;
    pp.a = desk_a(gs, 6, 0.5, 12.0);
    const auto w = radius_window(gs, pp, 6, Convention::adjudicated, 0.3);
    CHECK(w.lo > 0);
    const auto opt = optimal_radius(gs, pp, 6, Convention::adjudicated);
    CHECK(opt.r_closed_form > w.lo);
    CHECK(opt.r_closed_form < w.hi);
    // the finite-s corrected window still contains the asymptotic closed form
    const auto wf = radius_window(gs, pp, 6, Convention::adjudicated, 0.3, true);
    CHECK(opt.r_closed_form > wf.lo);
    CHECK(opt.r_closed_form < wf.hi);
}
