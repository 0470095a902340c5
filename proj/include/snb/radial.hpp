#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace snb::radial {

/// Uniform grid in the radial variable rho = |x|, node k at k*h.
struct RadialGrid {
    double h = 1e-3;
    std::size_t n = 60001;

    double r_max() const { return h * double(n - 1); }
    double node(std::size_t k) const { return h * double(k); }

    /// Grid covering [0, r_max] with spacing h (r_max rounded up to a node).
    static RadialGrid from_extent(double h, double r_max);
};

struct ShootingConfig {
    double u0 = 1.0;          ///< value of u-hat at the origin
    double rk_tol = 1e-12;    ///< local error tolerance of the embedded RK step
    double min_step = 1e-10;  ///< below this the integrator reports StepTooCoarse
    double rho_stop = 400.0;  ///< hard stop for a single trajectory (scaled units)
    double trust_decades = 9.2; ///< back-off exp(-trust_decades) from the turn point
};

/// Pre-rescaling shooting solution of
///   u'' + (2/rho) u' + phi u = 0,   phi'' + (2/rho) phi' = -u^2/2,
/// with u(0) = u0, u'(0) = phi'(0) = 0 and phi(0) the shooting parameter.
struct ScaledShootingResult {
    RadialGrid grid;
    std::vector<double> u, du;    ///< u-hat and its derivative on the nodes
    std::vector<double> phi, dphi;
    double phi0_star = 0.0;       ///< critical shooting value phi(0)
    double phi_inf = 0.0;         ///< limit of phi at infinity (tail-corrected), < 0
    double bracket_width = 0.0;   ///< final bisection bracket width
    double rho_turn = 0.0;        ///< where the returned trajectory turns upward
    double rho_trust = 0.0;       ///< last radius kept from the integration
    double tail_c = 0.0, tail_sigma = 0.0; ///< u ~ c rho^sigma exp(-k rho) beyond rho_trust
    double u0 = 1.0;
};

ScaledShootingResult shoot_scaled(const RadialGrid& grid, double bracket_lo,
                                  double bracket_hi, double tol,
                                  const ShootingConfig& cfg = {});

struct GroundStateConfig {
    double h = 1e-3;
    double r_max = 60.0;
    double bracket_lo = 0.2, bracket_hi = 3.0;
    double bracket_tol = 1e-13;
    double lambda0_window_lo = 20.0, lambda0_window_hi = 30.0;
    double lambda1_window_lo = 40.0, lambda1_window_hi = 50.0;
    ShootingConfig shooting;
};

/// Ground state (U, Psi) of the V == 1 system with the derived constants.
struct GroundState {
    RadialGrid grid;
    std::vector<double> U, dU, Psi, dPsi;
    double lambda = 0.0;      ///< rescaling factor (-1/phi_inf)^(1/2)
    double phi0_star = 0.0;
    double A1 = 0.0;          ///< integral of U^2 over R^3
    double A2 = 0.0;          ///< double Newtonian integral of U^2 against U^2
    double lambda0 = 0.0;     ///< windowed value of U rho e^rho (see drift)
    double lambda0_drift = 0.0; ///< drift exponent of U rho e^rho over the window
    double lambda1 = 0.0;     ///< limit of Psi rho
    double tail_c = 0.0, tail_sigma = 0.0; ///< U ~ c rho^sigma e^-rho beyond rho_trust
    double rho_trust = 0.0;
    double nehari_residual = 0.0;

    /// Tail-extended profile evaluation (cubic Hermite inside the grid).
    double U_at(double rho) const;
    double dU_at(double rho) const;
    double Psi_at(double rho) const;

    double U0() const { return U.empty() ? 0.0 : U.front(); }
    double Psi_max() const;
};

GroundState rescale_to_ground_state(const ScaledShootingResult& sr,
                                    const GroundStateConfig& cfg = {});

/// Recomputes A1, A2, lambda0/1 and the Nehari residual from the profiles.
void finalize_constants(GroundState& gs, const GroundStateConfig& cfg);

/// Shooting + rescaling driver; the scaled grid is sized so its nodes map
/// exactly onto the ground-state grid.
GroundState compute_ground_state(const GroundStateConfig& cfg = {});

struct TrajectoryPoint {
    double rho, u, du, phi, dphi;
};

/// Single shooting trajectory at a fixed phi(0), sampled on the grid nodes
/// until it crosses zero, turns upward, or reaches the end of the grid.
std::vector<TrajectoryPoint> integrate_trajectory(double phi0, const RadialGrid& grid,
                                                  const ShootingConfig& cfg = {});

/// Multipole Newtonian transform
///   K_l[f](r) = 1/(2l+1) [ r^-(l+1) int_0^r t^(l+2) f dt + r^l int_r^inf t^(1-l) f dt ],
/// computed with cumulative trapezoid sums on the grid; the tail beyond the
/// grid is estimated from the last samples and must pass a convergence check.
std::vector<double> radial_newton_transform(const RadialGrid& grid,
                                            std::span<const double> f, int l,
                                            int l_max = 4);

struct DecayReport {
    std::vector<double> rho;          ///< sample radii in the window
    std::vector<double> u_rho_exp;    ///< U rho e^rho samples
    std::vector<double> dlogu;        ///< U'/U samples
    std::vector<double> psi_rho;      ///< Psi rho samples
    double u_drift_exponent = 0.0;    ///< fitted d log(U rho e^rho) / d log rho
    double u_window_value = 0.0;      ///< fitted value at the window midpoint
    double psi_rho_variation = 0.0;   ///< relative variation of Psi rho over the window
};

DecayReport decay_diagnostics(const GroundState& gs, double window_lo, double window_hi);

} // namespace snb::radial
