#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "snb/radial.hpp"
#include "snb/ring.hpp"

namespace snb::field {

/// Number of threads handed to the FFT transforms (1 by default).
void set_fft_threads(int n);
int fft_threads();

struct GridSpec {
    double L1 = 20, L2 = 20, L3 = 9; ///< half-extents (snapped to the spacing)
    double h1 = 0.3, h2 = 0.3, h3 = 0.3;
    double pad_factor = 2.0;     ///< free-space convolution padding, >= 2
    double ring_r = 0.0;         ///< intended ring radius (0 = unconstrained)
    double ring_margin = 8.0;    ///< decay lengths required around the ring
    double memory_budget_gb = 8.0;
    double boundary_tol = 1e-8;  ///< t_apply boundary decay requirement
};

/// Symmetric Cartesian grid (node at the origin) plus the free-space
/// convolution plans; create once and share.
class Grid {
  public:
    static std::shared_ptr<Grid> create(const GridSpec& spec);
    ~Grid();
    Grid(const Grid&) = delete;
    Grid& operator=(const Grid&) = delete;

    GridSpec spec;
    std::size_t n1 = 0, n2 = 0, n3 = 0, n = 0;
    std::size_t p1 = 0, p2 = 0, p3 = 0; ///< padded dimensions
    double h1 = 0, h2 = 0, h3 = 0;
    double cell_volume() const { return h1 * h2 * h3; }

    double x1(std::size_t i) const { return (double(i) - 0.5 * double(n1 - 1)) * h1; }
    double x2(std::size_t j) const { return (double(j) - 0.5 * double(n2 - 1)) * h2; }
    double x3(std::size_t k) const { return (double(k) - 0.5 * double(n3 - 1)) * h3; }
    std::size_t idx(std::size_t i, std::size_t j, std::size_t k) const {
        return i + n1 * (j + n2 * k);
    }

    /// Newtonian potential T[f] = (1/4pi) int f(y)/|x-y| dy by zero-padded
    /// convolution; the singular cell carries the analytic cell average.
    void newton_convolve(std::span<const double> f, std::span<double> out) const;

    /// (-Delta_h + V0)^-1 on the padded box (periodic FD symbol); SPD, used
    /// as preconditioner and Riesz-solve building block.
    void helmholtz_inverse(std::span<const double> f, std::span<double> out,
                           double V0) const;

    /// (-Delta_h + V0)^power spectrally on the padded box (power = -1/2 gives
    /// the symmetric square root of the preconditioner).
    void helmholtz_power(std::span<const double> f, std::span<double> out, double V0,
                         double power) const;

    /// 7-point Laplacian with zero Dirichlet data outside the box.
    void laplacian(std::span<const double> f, std::span<double> out) const;

  private:
    Grid() = default;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct Field {
    std::shared_ptr<const Grid> grid;
    std::vector<double> v;
    int symmetry_s = 0; ///< 0 = raw; > 0 = member of the class with order s

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

Field make_field(std::shared_ptr<const Grid> grid);

/// Average over the group generated by rotation 2pi/s about x3 and the
/// reflections x2 -> -x2, x3 -> -x3; rotations use bilinear interpolation in
/// the x1x2 plane and act inside the inscribed disk.
Field symmetrize(const Field& f, int s);

/// Adjoint of `symmetrize` with respect to the plain node inner product
/// (scatter form of the interpolating average).
Field symmetrize_adjoint(const Field& f, int s);

/// T[fg] via free-space convolution; checks the boundary decay precondition.
Field t_apply(const Field& fg);

struct Ansatz {
    ring::BumpConfiguration bumps;
    Field Ur;                 ///< sum of bumps, symmetric by construction
    Field t_ur_sq;            ///< T[Ur^2], cached for the linearized operator
    const radial::GroundState* gs = nullptr;
};

/// Sum of ground-state bumps centered on the ring, sampled with the radial
/// interpolant (exponential tail included).
Ansatz assemble_ansatz(const radial::GroundState& gs, const ring::BumpConfiguration& bumps,
                       std::shared_ptr<const Grid> grid);

/// One bump U(
///   |x - xi_i|) as a field.
Field bump_field(const radial::GroundState& gs, std::shared_ptr<const Grid> grid,
                 const std::array<double, 3>& center);

/// Z_i = dU_{xi_i}/dr (derivative with respect to the ring radius).
Field z_field(const radial::GroundState& gs, const ring::BumpConfiguration& bumps,
              std::shared_ptr<const Grid> grid, int i);

/// J(u) = 1/2 int (|grad u|^2 + V u^2) - (1/8) int T[u^2] u^2 with the
/// forward-difference gradient quadrature matching the 7-point Laplacian.
double energy_J(const Field& u, const ring::PotentialParams& params);

/// Strong-form residual -Delta u + V u - (T[u^2]/2) u.
Field residual_strong(const Field& u, const ring::PotentialParams& params);

/// V(|x|) sampled on the grid.
std::vector<double> potential_samples(const Grid& grid, const ring::PotentialParams& params);

/// Discrete H^1_V inner product h^3 * u . (-Delta_h + V) v (order fixed).
double inner_v(const Field& u, const Field& w, std::span<const double> V);

/// Bilinear Dirichlet form sum_links du dw hv (zero data outside the box);
/// dirichlet_form(u, u) is the kinetic part of the energy.
double dirichlet_form(const Field& u, const Field& w);

double max_abs(const Field& u);
double min_value(const Field& u);

} // namespace snb::field
