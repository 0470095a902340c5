#include "snb/ring.hpp"

#include <algorithm>
#include <cmath>

#include "snb/errors.hpp"
#include "snb/util.hpp"

namespace snb::ring {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void PotentialParams::validate() const {
    if (!(V0 > 0) || !(a > 0) || !(theta > 0))
        throw Error("potential parameters must be positive");
    if (!(m > 0.0 && m < 1.0))
        throw Error("potential exponent m must lie in (0, 1)");
}

BumpConfiguration bump_points(int s, double r) {
    if (s < 2 || !(r > 0)) throw Error("bump_points requires s >= 2 and r > 0");
    BumpConfiguration cfg;
    cfg.s = s;
    cfg.r = r;
    cfg.centers.resize(s);
    for (int i = 0; i < s; ++i) {
        const double th = 2.0 * kPi * double(i) / double(s);
        cfg.centers[i] = {r * std::cos(th), r * std::sin(th), 0.0};
    }
    cfg.distances.resize(s - 1);
    for (int i = 1; i < s; ++i)
        cfg.distances[i - 1] = 2.0 * r * std::sin(kPi * double(i) / double(s));
    return cfg;
}

RingSumResult ring_sum(int s, double r, double p) {
    if (s < 2) throw Error("ring_sum requires s >= 2");
    RingSumResult out;
    double acc = 0.0;
    for (int i = 1; i < s; ++i)
        acc += std::pow(2.0 * r * std::sin(kPi * double(i) / double(s)), -p);
    out.value = acc;
    if (p == 1.0) {
        out.leading = double(s) * std::log(double(s)) / (kPi * r);
        out.ratio_to_leading = out.value / out.leading;
        // int dx / sin(pi x / s) = (s/pi) log tan(pi x / (2s))
        auto ib = [&](double a, double b) {
            return (double(s) / kPi) * (std::log(std::tan(kPi * b / (2.0 * s))) -
                                        std::log(std::tan(kPi * a / (2.0 * s))));
        };
        out.lower_bound = ib(1.5, double(s) - 1.5) / (2.0 * r);
        out.upper_bound = ib(0.5, double(s) - 0.5) / (2.0 * r);
    }
    return out;
}

PairKernel::PairKernel(const radial::GroundState& gs) : gs_(&gs) {
    const auto& g = gs.grid;
    h_ = g.h;
    rmax_ = g.r_max();
    a1_ = gs.A1;
    a2_ = gs.A2;
    const std::size_t n = g.n;
    u2_.resize(n);
    for (std::size_t k = 0; k < n; ++k) u2_[k] = gs.U[k] * gs.U[k];
    const auto k0 = radial::radial_newton_transform(g, u2_, 0);
    w_.resize(n);
    for (std::size_t k = 0; k < n; ++k) w_[k] = 4.0 * kPi * k0[k];
    std::vector<double> tw(n);
    for (std::size_t k = 0; k < n; ++k) tw[k] = g.node(k) * w_[k];
    gamma_.resize(n);
    util::cumtrapz(tw, h_, gamma_);
}

double PairKernel::u_sq(double rho) const {
    if (rho >= rmax_) {
        const double u = gs_->U_at(rho);
        return u * u;
    }
    const double x = rho / h_;
    const auto k = std::min<std::size_t>(std::size_t(x), u2_.size() - 2);
    const double t = x - double(k);
    return (1.0 - t) * u2_[k] + t * u2_[k + 1];
}

double PairKernel::w_pot(double rho) const {
    if (rho >= rmax_) return a1_ / rho;
    const double x = rho / h_;
    const auto k = std::min<std::size_t>(std::size_t(x), w_.size() - 2);
    const double t = x - double(k);
    return (1.0 - t) * w_[k] + t * w_[k + 1];
}

double PairKernel::gamma_at(double sigma) const {
    if (sigma <= 0) return 0.0;
    if (sigma >= rmax_) return gamma_.back() + a1_ * (sigma - rmax_);
    const double x = sigma / h_;
    const auto k = std::min<std::size_t>(std::size_t(x), gamma_.size() - 2);
    const double t = x - double(k);
    return (1.0 - t) * gamma_[k] + t * gamma_[k + 1];
}

double PairKernel::cylindrical(double d, double dz, double extent) const {
    // D = 2 pi int rho_c U^2(|x|) W(|x - d e_z|) drho_c dz, trapezoid in both
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
            row += wr * rc * u_sq(ra) * w_pot(rb);
        }
        total += wz * row;
    }
    return 2.0 * kPi * total * dz * dz;
}

double PairKernel::spherical(double d) const {
    if (d <= 0) {
        // coincident centers: D(0) = int U^2 W = A2 by definition
        std::vector<double> f(u2_.size());
        for (std::size_t k = 0; k < f.size(); ++k) {
            const double r = double(k) * h_;
            f[k] = r * r * u2_[k] * w_[k];
        }
        return 4.0 * kPi * util::trapz(f, h_);
    }
    std::vector<double> f(u2_.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double t = double(k) * h_;
        f[k] = t * u2_[k] * (gamma_at(d + t) - gamma_at(std::abs(d - t)));
    }
    return 2.0 * kPi / d * util::trapz(f, h_);
}

double PairKernel::evaluate(double d) const {
    if (d >= config.switch_d) return spherical(d);
    const double coarse = cylindrical(d, config.dz, config.extent);
    const double fine = cylindrical(d, 0.5 * config.dz, config.extent);
    if (std::abs(coarse - fine) > config.rtol * std::abs(fine))
        throw QuadratureNotConverged("pair interaction quadrature levels disagree at d=" +
                                     std::to_string(d));
    return fine;
}

double pair_interaction(const radial::GroundState& gs, double d) {
    if (d < 0) throw Error("pair interaction requires d >= 0");
    return PairKernel(gs).evaluate(d);
}

InteractionSumReport interaction_sum_check(const radial::GroundState& gs, int s, double r) {
    const auto bumps = bump_points(s, r);
    if (bumps.min_spacing() < 6.0)
        throw SeparationTooSmall("bump spacing below 6 at s=" + std::to_string(s));
    PairKernel kernel(gs);
    InteractionSumReport rep;
    rep.s = s;
    rep.r = r;
    // distances come in mirror pairs (i, s - i); evaluate each once
    double sum_d = 0.0, inv = 0.0;
    for (int i = 1; 2 * i <= s; ++i) {
        const double d = 2.0 * r * std::sin(kPi * double(i) / double(s));
        const double D = kernel.evaluate(d);
        const int mult = (2 * i == s) ? 1 : 2;
        sum_d += mult * D;
        inv += mult / d;
    }
    rep.sum_exact = sum_d / (8.0 * kPi);
    rep.sum_monopole = gs.A1 * gs.A1 / (8.0 * kPi) * inv;
    rep.paper_leading =
        gs.A1 * gs.A1 / (32.0 * kPi * kPi) * double(s) * std::log(double(s)) / r;
    rep.fitted_c = rep.sum_exact * r / (gs.A1 * gs.A1 * double(s) * std::log(double(s)));
    return rep;
}

ConstantFitResult fit_interaction_constant(const radial::GroundState& gs,
                                           const ConstantFitConfig& cfg) {
    ConstantFitResult out;
    PairKernel kernel(gs);
    // the radius rule fixes a so that the spacing at s_lo is spacing_at_lo
    const double r_lo = cfg.spacing_at_lo / (2.0 * std::sin(kPi / double(cfg.s_lo)));
    const double slogs_lo = double(cfg.s_lo) * std::log(double(cfg.s_lo));
    double sxx = 0, sxy = 0;
    for (int s = cfg.s_lo; s <= cfg.s_hi; s *= 2) {
        const double slogs = double(s) * std::log(double(s));
        const double r = r_lo * std::pow(slogs / slogs_lo, 1.0 / (1.0 - cfg.m));
        InteractionSumReport rep;
        rep.s = s;
        rep.r = r;
        double sum_d = 0.0, inv = 0.0;
        // group mirror-symmetric distances: d_i = d_{s-i}
        for (int i = 1; 2 * i <= s; ++i) {
            const double d = 2.0 * r * std::sin(kPi * double(i) / double(s));
            const double D = kernel.spherical(d);
            const int mult = (2 * i == s) ? 1 : 2;
            sum_d += mult * D;
            inv += mult / d;
        }
        rep.sum_exact = sum_d / (8.0 * kPi);
        rep.sum_monopole = gs.A1 * gs.A1 / (8.0 * kPi) * inv;
        rep.paper_leading = gs.A1 * gs.A1 / (32.0 * kPi * kPi) * slogs / r;
        rep.fitted_c = rep.sum_exact * r / (gs.A1 * gs.A1 * slogs);
        out.rows.push_back(rep);
        const double x = gs.A1 * gs.A1 * slogs / r;
        sxy += x * rep.sum_exact;
        sxx += x * x;
    }
    out.fitted_c = sxy / sxx;
    const double c_adj = 1.0 / (8.0 * kPi * kPi);
    const double c_paper = 1.0 / (32.0 * kPi * kPi);
    out.rel_dev_adjudicated = std::abs(out.fitted_c - c_adj) / c_adj;
    out.rel_dev_paper = std::abs(out.fitted_c - c_paper) / c_paper;
    if (out.rel_dev_adjudicated <= cfg.match_tol)
        out.matches = "1/(8 pi^2)";
    else if (out.rel_dev_paper <= cfg.match_tol)
        out.matches = "1/(32 pi^2)";
    else
        out.matches = "neither";
    return out;
}

EnergyExpansion energy_expansion(const radial::GroundState& gs,
                                 const PotentialParams& params, int s, double r) {
    params.validate();
    if (s < 2 || !(r > 0)) throw Error("energy expansion requires s >= 2 and r > 0");
    EnergyExpansion e;
    e.s = s;
    e.r = r;
    const double slogs = double(s) * std::log(double(s));
    e.t_const = gs.A2 / (32.0 * kPi);
    e.t_const_paper = gs.A2 / (16.0 * kPi);
    e.t_pot = params.a * gs.A1 / (2.0 * std::pow(r, params.m));
    e.t_int = gs.A1 * gs.A1 / (32.0 * kPi * kPi) * slogs / r;
    e.t_int_paper = gs.A1 * gs.A1 / (128.0 * kPi * kPi) * slogs / r;
    e.J_pred = double(s) * (e.t_const + e.t_pot - e.t_int);
    e.J_pred_paper = double(s) * (e.t_const_paper + e.t_pot - e.t_int_paper);
    return e;
}

double g_reduced(const radial::GroundState& gs, const PotentialParams& params,
                 int s, double r, Convention conv) {
    const double slogs = double(s) * std::log(double(s));
    const double c_int = (conv == Convention::paper) ? 1.0 / 128.0 : 1.0 / 32.0;
    return params.a * gs.A1 / (2.0 * std::pow(r, params.m)) -
           c_int * gs.A1 * gs.A1 / (kPi * kPi) * slogs / r;
}

namespace {
double closed_form_radius(const radial::GroundState& gs, const PotentialParams& params,
                          int s, Convention conv) {
    const double denom = (conv == Convention::paper) ? 64.0 : 16.0;
    const double slogs = double(s) * std::log(double(s));
    const double base = gs.A1 / (denom * params.a * params.m * kPi * kPi);
    return std::pow(base * slogs, 1.0 / (1.0 - params.m));
}
} // namespace

double ring_geometry_sum(int s) {
    double acc = 0;
    for (int i = 1; i < s; ++i) acc += 1.0 / std::sin(kPi * double(i) / double(s));
    return acc;
}

RadiusWindow radius_window(const radial::GroundState& gs, const PotentialParams& params,
                           int s, Convention conv, double alpha_rel, bool finite_s) {
    RadiusWindow w;
    w.s = s;
    double rs = closed_form_radius(gs, params, s, conv);
    if (finite_s) {
        const double slogs = double(s) * std::log(double(s));
        rs *= std::pow(ring_geometry_sum(s) * kPi / (2.0 * slogs), 1.0 / (1.0 - params.m));
    }
    w.alpha = alpha_rel * rs; // absolute half-width, already times (s log s)^(1/(1-m))
    w.lo = rs - w.alpha;
    w.hi = rs + w.alpha;
    if (!(w.lo > 0)) throw Error("radius window lower endpoint must be positive");
    return w;
}

OptimalRadius optimal_radius(const radial::GroundState& gs, const PotentialParams& params,
                             int s, Convention conv, double alpha_rel, double remainder_c) {
    params.validate();
    if (s < 3) throw Error("optimal radius requires s >= 3");
    OptimalRadius out;
    out.convention = conv;
    out.r_closed_form = closed_form_radius(gs, params, s, conv);
    out.window = radius_window(gs, params, s, conv, alpha_rel);
    auto g = [&](double r) { return g_reduced(gs, params, s, r, conv); };
    out.r_numeric = util::golden_max(g, out.window.lo, out.window.hi,
                                     1e-9 * out.r_closed_form);
    const double edge = 2e-8 * out.r_closed_form;
    if (out.r_numeric - out.window.lo < edge || out.window.hi - out.r_numeric < edge)
        throw NoInteriorMax("numeric maximizer of g sits on the window boundary");

    if (params.m < 0.5) {
        out.degenerate_regime = true;
        const double slogs = double(s) * std::log(double(s));
        const double c_int = (conv == Convention::paper) ? 1.0 / 128.0 : 1.0 / 32.0;
        const double P = c_int * gs.A1 * gs.A1 / (kPi * kPi) * slogs;
        const double Q = remainder_c * double(s);
        // gbar(r) = -P/r + Q/r^(2m) peaks at (P/(2mQ))^(1/(1-2m))
        out.r_bar_closed_form = std::pow(P / (2.0 * params.m * Q), 1.0 / (1.0 - 2.0 * params.m));
        auto gbar = [&](double x) {
            const double r = std::exp(x);
            return -P / r + Q / std::pow(r, 2.0 * params.m);
        };
        const double xc = util::golden_max(gbar, std::log(out.r_bar_closed_form) - 8.0,
                                           std::log(out.r_bar_closed_form) + 8.0, 1e-12);
        out.r_bar_numeric = std::exp(xc);
        out.spacing = 2.0 * out.r_bar_numeric * std::sin(kPi / double(s));
    }
    return out;
}

double desk_a(const radial::GroundState& gs, int s, double m, double r_star,
              Convention conv) {
    if (!(r_star > 0) || s < 2) throw Error("target-radius rule requires r_star > 0, s >= 2");
    const double denom = (conv == Convention::paper) ? 64.0 : 16.0;
    const double slogs = double(s) * std::log(double(s));
    return gs.A1 * slogs / (denom * m * kPi * kPi * std::pow(r_star, 1.0 - m));
}

} // namespace snb::ring
