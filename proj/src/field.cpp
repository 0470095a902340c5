#include "snb/field.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>

#include <fftw3.h>

#include "snb/errors.hpp"
#include "snb/util.hpp"

namespace snb::field {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::atomic<int> g_fft_threads{1};
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

std::size_t next_fast_size(std::size_t target) {
    for (std::size_t n = target;; ++n) {
        std::size_t r = n;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return n;
    }
}

// int_0^a int_0^b int_0^c dx dy dz / |x| (corner box), via the standard
// closed-form antiderivative.
double box_integral_inv_r(double a, double b, double c) {
    const double R = std::sqrt(a * a + b * b + c * c);
    double v = 0.0;
    v += b * c * std::asinh(a / std::sqrt(b * b + c * c));
    v += c * a * std::asinh(b / std::sqrt(c * c + a * a));
    v += a * b * std::asinh(c / std::sqrt(a * a + b * b));
    v -= 0.5 * a * a * std::atan2(b * c, a * R);
    v -= 0.5 * b * b * std::atan2(c * a, b * R);
    v -= 0.5 * c * c * std::atan2(a * b, c * R);
    return v;
}

} // namespace

void set_fft_threads(int n) { g_fft_threads.store(std::max(1, n)); }
int fft_threads() { return g_fft_threads.load(); }

struct Grid::Impl {
    std::size_t pn = 0, pc = 0; // padded real / complex sizes
    double* pr = nullptr;
    fftw_complex* fhat = nullptr;
    fftw_complex* khat = nullptr;
    fftw_complex* scratch = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;
    mutable std::mutex mtx;

    ~Impl() {
        std::lock_guard<std::mutex> lk(plan_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(pr);
        fftw_free(fhat);
        fftw_free(khat);
        fftw_free(scratch);
    }
};

Grid::~Grid() = default;

std::shared_ptr<Grid> Grid::create(const GridSpec& spec) {
    auto g = std::shared_ptr<Grid>(new Grid());
    g->spec = spec;
    g->h1 = spec.h1;
    g->h2 = spec.h2;
    g->h3 = spec.h3;
    auto nodes = [](double L, double h) {
        return 2 * std::size_t(std::llround(L / h)) + 1;
    };
    g->n1 = nodes(spec.L1, spec.h1);
    g->n2 = nodes(spec.L2, spec.h2);
    g->n3 = nodes(spec.L3, spec.h3);
    if (g->n1 < 16 || g->n2 < 16 || g->n3 < 16)
        throw Error("grid needs at least 16 nodes per dimension");
    g->n = g->n1 * g->n2 * g->n3;
    const double L1s = 0.5 * double(g->n1 - 1) * g->h1;
    const double L2s = 0.5 * double(g->n2 - 1) * g->h2;
    if (spec.ring_r > 0 && std::min(L1s, L2s) < spec.ring_r + spec.ring_margin - 1e-9)
        throw RingOutOfGrid("lateral half-extent " + std::to_string(std::min(L1s, L2s)) +
                            " below ring radius plus margin " +
                            std::to_string(spec.ring_r + spec.ring_margin));
    if (spec.pad_factor < 2.0)
        throw Error("free-space convolution requires pad factor >= 2");
    g->p1 = next_fast_size(std::size_t(std::ceil(spec.pad_factor * double(g->n1))));
    g->p2 = next_fast_size(std::size_t(std::ceil(spec.pad_factor * double(g->n2))));
    g->p3 = next_fast_size(std::size_t(std::ceil(spec.pad_factor * double(g->n3))));

    auto impl = std::make_unique<Grid::Impl>();
    impl->pn = g->p1 * g->p2 * g->p3;
    impl->pc = (g->p1 / 2 + 1) * g->p2 * g->p3;
    const double bytes = double(impl->pn) * 8.0 + 3.0 * double(impl->pc) * 16.0 +
                         double(g->n) * 8.0 * 6.0;
    if (bytes > spec.memory_budget_gb * (1ull << 30))
        throw BudgetExceeded("grid memory estimate " + std::to_string(bytes / (1 << 30)) +
                             " GiB above budget");

    {
        std::lock_guard<std::mutex> lk(plan_mutex());
#ifdef SNB_FFTW_THREADS
        static bool threads_ready = (fftw_init_threads(), true);
        (void)threads_ready;
        fftw_plan_with_nthreads(fft_threads());
#endif
        impl->pr = fftw_alloc_real(impl->pn);
        impl->fhat = fftw_alloc_complex(impl->pc);
        impl->khat = fftw_alloc_complex(impl->pc);
        impl->scratch = fftw_alloc_complex(impl->pc);
        if (!impl->pr || !impl->fhat || !impl->khat || !impl->scratch)
            throw BudgetExceeded("fftw allocation failed");
        impl->fwd = fftw_plan_dft_r2c_3d(int(g->p3), int(g->p2), int(g->p1), impl->pr,
                                         impl->fhat, FFTW_MEASURE);
        impl->bwd = fftw_plan_dft_c2r_3d(int(g->p3), int(g->p2), int(g->p1),
                                         impl->scratch, impl->pr, FFTW_MEASURE);
        if (!impl->fwd || !impl->bwd) throw Error("fftw planning failed");
    }

    // kernel 1/(4 pi |x|) sampled over signed displacements; the singular
    // cell takes the analytic average over the cell plus the local midpoint
    // compensation (h^2/24) delta, which cancels the leading quadrature error
    // of the smooth cells
    const double hv = g->h1 * g->h2 * g->h3;
    const double csing =
        8.0 * box_integral_inv_r(0.5 * g->h1, 0.5 * g->h2, 0.5 * g->h3) / (hv * 4.0 * kPi) +
        (g->h1 * g->h1 + g->h2 * g->h2 + g->h3 * g->h3) / (72.0 * hv);
    for (std::size_t k = 0; k < g->p3; ++k) {
        const double d3 = (k <= g->p3 / 2 ? double(k) : double(k) - double(g->p3)) * g->h3;
        for (std::size_t j = 0; j < g->p2; ++j) {
            const double d2 =
                (j <= g->p2 / 2 ? double(j) : double(j) - double(g->p2)) * g->h2;
            double* line = impl->pr + (k * g->p2 + j) * g->p1;
            for (std::size_t i = 0; i < g->p1; ++i) {
                const double d1 =
                    (i <= g->p1 / 2 ? double(i) : double(i) - double(g->p1)) * g->h1;
                const double r = std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
                line[i] = (r == 0.0) ? csing : 1.0 / (4.0 * kPi * r);
            }
        }
    }
    fftw_execute(impl->fwd);
    std::memcpy(impl->khat, impl->fhat, impl->pc * sizeof(fftw_complex));

    g->impl_ = std::move(impl);
    return g;
}

namespace {

void copy_into_padded(const Grid& g, std::span<const double> f, double* pr) {
    std::memset(pr, 0, g.p1 * g.p2 * g.p3 * sizeof(double));
    for (std::size_t k = 0; k < g.n3; ++k)
        for (std::size_t j = 0; j < g.n2; ++j)
            std::memcpy(pr + (k * g.p2 + j) * g.p1, f.data() + g.idx(0, j, k),
                        g.n1 * sizeof(double));
}

void copy_from_padded(const Grid& g, const double* pr, std::span<double> out) {
    for (std::size_t k = 0; k < g.n3; ++k)
        for (std::size_t j = 0; j < g.n2; ++j)
            std::memcpy(out.data() + g.idx(0, j, k), pr + (k * g.p2 + j) * g.p1,
                        g.n1 * sizeof(double));
}

} // namespace

void Grid::newton_convolve(std::span<const double> f, std::span<double> out) const {
    auto& im = *impl_;
    std::lock_guard<std::mutex> lk(im.mtx);
    copy_into_padded(*this, f, im.pr);
    fftw_execute(im.fwd);
    const double scale = cell_volume() / double(im.pn);
    for (std::size_t i = 0; i < im.pc; ++i) {
        const double ar = im.fhat[i][0], ai = im.fhat[i][1];
        const double br = im.khat[i][0], bi = im.khat[i][1];
        im.scratch[i][0] = (ar * br - ai * bi) * scale;
        im.scratch[i][1] = (ar * bi + ai * br) * scale;
    }
    fftw_execute(im.bwd);
    copy_from_padded(*this, im.pr, out);
}

void Grid::helmholtz_inverse(std::span<const double> f, std::span<double> out,
                             double V0) const {
    helmholtz_power(f, out, V0, -1.0);
}

void Grid::helmholtz_power(std::span<const double> f, std::span<double> out, double V0,
                           double power) const {
    auto& im = *impl_;
    std::lock_guard<std::mutex> lk(im.mtx);
    copy_into_padded(*this, f, im.pr);
    fftw_execute(im.fwd);
    const double scale = 1.0 / double(im.pn);
    const std::size_t c1 = p1 / 2 + 1;
    for (std::size_t k = 0; k < p3; ++k) {
        const double s3 = (2.0 - 2.0 * std::cos(2.0 * kPi * double(k) / double(p3))) /
                          (h3 * h3);
        for (std::size_t j = 0; j < p2; ++j) {
            const double s2 = (2.0 - 2.0 * std::cos(2.0 * kPi * double(j) / double(p2))) /
                              (h2 * h2);
            fftw_complex* line = im.scratch + (k * p2 + j) * c1;
            const fftw_complex* src = im.fhat + (k * p2 + j) * c1;
            for (std::size_t i = 0; i < c1; ++i) {
                const double s1 =
                    (2.0 - 2.0 * std::cos(2.0 * kPi * double(i) / double(p1))) / (h1 * h1);
                const double w = scale * std::pow(V0 + s1 + s2 + s3, power);
                line[i][0] = src[i][0] * w;
                line[i][1] = src[i][1] * w;
            }
        }
    }
    fftw_execute(im.bwd);
    copy_from_padded(*this, im.pr, out);
}

void Grid::laplacian(std::span<const double> f, std::span<double> out) const {
    const double c1 = 1.0 / (h1 * h1), c2 = 1.0 / (h2 * h2), c3 = 1.0 / (h3 * h3);
    const double c0 = -2.0 * (c1 + c2 + c3);
    for (std::size_t k = 0; k < n3; ++k)
        for (std::size_t j = 0; j < n2; ++j) {
            const std::size_t base = idx(0, j, k);
            for (std::size_t i = 0; i < n1; ++i) {
                const std::size_t id = base + i;
                double acc = c0 * f[id];
                acc += c1 * ((i > 0 ? f[id - 1] : 0.0) + (i + 1 < n1 ? f[id + 1] : 0.0));
                acc += c2 * ((j > 0 ? f[id - n1] : 0.0) + (j + 1 < n2 ? f[id + n1] : 0.0));
                acc += c3 * ((k > 0 ? f[id - n1 * n2] : 0.0) +
                             (k + 1 < n3 ? f[id + n1 * n2] : 0.0));
                out[id] = acc;
            }
        }
}

Field make_field(std::shared_ptr<const Grid> grid) {
    Field f;
    f.v.assign(grid->n, 0.0);
    f.grid = std::move(grid);
    return f;
}

namespace {

// reflections x2 -> -x2 and x3 -> -x3 map nodes to nodes exactly
Field reflection_average(const Field& f) {
    const auto& g = *f.grid;
    Field half = make_field(f.grid);
    for (std::size_t k = 0; k < g.n3; ++k)
        for (std::size_t j = 0; j < g.n2; ++j)
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double v = 0.25 * (f[g.idx(i, j, k)] +
                                         f[g.idx(i, g.n2 - 1 - j, k)] +
                                         f[g.idx(i, j, g.n3 - 1 - k)] +
                                         f[g.idx(i, g.n2 - 1 - j, g.n3 - 1 - k)]);
                half[g.idx(i, j, k)] = v;
            }
    return half;
}

} // namespace

Field symmetrize(const Field& f, int s) {
    if (s < 1) throw Error("symmetrize requires s >= 1");
    const auto& g = *f.grid;
    Field half = reflection_average(f);
    if (s == 1) {
        half.symmetry_s = 1;
        return half;
    }
    Field out = make_field(f.grid);
    out.symmetry_s = s;
    const double L1s = 0.5 * double(g.n1 - 1) * g.h1;
    const double L2s = 0.5 * double(g.n2 - 1) * g.h2;
    const double rdisk2 = std::min(L1s, L2s) * std::min(L1s, L2s) * (1 + 1e-12);
    const double o1 = 0.5 * double(g.n1 - 1), o2 = 0.5 * double(g.n2 - 1);
    for (std::size_t k = 0; k < g.n3; ++k)
        for (std::size_t j = 0; j < g.n2; ++j) {
            const double y = g.x2(j);
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double x = g.x1(i);
                const std::size_t id = g.idx(i, j, k);
                if (x * x + y * y > rdisk2) {
                    out[id] = half[id]; // corners stay reflection-averaged
                    continue;
                }
                double acc = half[id];
                for (int q = 1; q < s; ++q) {
                    const double th = 2.0 * kPi * double(q) / double(s);
                    const double c = std::cos(th), sn = std::sin(th);
                    const double xr = c * x - sn * y, yr = sn * x + c * y;
                    // bilinear in the x1 x2 plane at fixed x3
                    const double u = xr / g.h1 + o1, w = yr / g.h2 + o2;
                    const auto iu = std::min(std::size_t(std::max(u, 0.0)), g.n1 - 2);
                    const auto iw = std::min(std::size_t(std::max(w, 0.0)), g.n2 - 2);
                    const double tu = u - double(iu), tw = w - double(iw);
                    const std::size_t b = g.idx(iu, iw, k);
                    acc += (1 - tu) * (1 - tw) * half[b] + tu * (1 - tw) * half[b + 1] +
                           (1 - tu) * tw * half[b + g.n1] + tu * tw * half[b + g.n1 + 1];
                }
                out[id] = acc / double(s);
            }
        }
    return out;
}

Field symmetrize_adjoint(const Field& f, int s) {
    if (s < 1) throw Error("symmetrize requires s >= 1");
    const auto& g = *f.grid;
    if (s == 1) {
        Field out = reflection_average(f);
        out.symmetry_s = f.symmetry_s;
        return out;
    }
    // adjoint of the rotation average: scatter each in-disk node value onto
    // the bilinear corners of its rotated images
    Field acc = make_field(f.grid);
    const double L1s = 0.5 * double(g.n1 - 1) * g.h1;
    const double L2s = 0.5 * double(g.n2 - 1) * g.h2;
    const double rdisk2 = std::min(L1s, L2s) * std::min(L1s, L2s) * (1 + 1e-12);
    const double o1 = 0.5 * double(g.n1 - 1), o2 = 0.5 * double(g.n2 - 1);
    const double inv_s = 1.0 / double(s);
    for (std::size_t k = 0; k < g.n3; ++k)
        for (std::size_t j = 0; j < g.n2; ++j) {
            const double y = g.x2(j);
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double x = g.x1(i);
                const std::size_t id = g.idx(i, j, k);
                const double val = f[id];
                if (x * x + y * y > rdisk2) {
                    acc[id] += val;
                    continue;
                }
                acc[id] += val * inv_s; // q = 0 identity term
                for (int q = 1; q < s; ++q) {
                    const double th = 2.0 * kPi * double(q) / double(s);
                    const double c = std::cos(th), sn = std::sin(th);
                    const double xr = c * x - sn * y, yr = sn * x + c * y;
                    const double u = xr / g.h1 + o1, w = yr / g.h2 + o2;
                    const auto iu = std::min(std::size_t(std::max(u, 0.0)), g.n1 - 2);
                    const auto iw = std::min(std::size_t(std::max(w, 0.0)), g.n2 - 2);
                    const double tu = u - double(iu), tw = w - double(iw);
                    const std::size_t b = g.idx(iu, iw, k);
                    acc[b] += (1 - tu) * (1 - tw) * val * inv_s;
                    acc[b + 1] += tu * (1 - tw) * val * inv_s;
                    acc[b + g.n1] += (1 - tu) * tw * val * inv_s;
                    acc[b + g.n1 + 1] += tu * tw * val * inv_s;
                }
            }
        }
    Field out = reflection_average(acc);
    out.symmetry_s = f.symmetry_s;
    return out;
}

Field t_apply(const Field& fg) {
    const auto& g = *fg.grid;
    double fmax = 0, bmax = 0;
    for (std::size_t k = 0; k < g.n3; ++k)
        for (std::size_t j = 0; j < g.n2; ++j)
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double a = std::abs(fg[g.idx(i, j, k)]);
                fmax = std::max(fmax, a);
                if (i == 0 || j == 0 || k == 0 || i == g.n1 - 1 || j == g.n2 - 1 ||
                    k == g.n3 - 1)
                    bmax = std::max(bmax, a);
            }
    if (bmax > g.spec.boundary_tol * fmax)
        throw BoundaryMassTooLarge("field does not decay at the boundary: " +
                                   std::to_string(bmax / (fmax > 0 ? fmax : 1.0)));
    Field out = make_field(fg.grid);
    out.symmetry_s = fg.symmetry_s;
    g.newton_convolve(fg.v, out.v);
    return out;
}

Field bump_field(const radial::GroundState& gs, std::shared_ptr<const Grid> grid,
                 const std::array<double, 3>& center) {
    Field out = make_field(grid);
    const auto& g = *grid;
    for (std::size_t k = 0; k < g.n3; ++k) {
        const double dz = g.x3(k) - center[2];
        for (std::size_t j = 0; j < g.n2; ++j) {
            const double dy = g.x2(j) - center[1];
            const double dyz = dy * dy + dz * dz;
            double* line = out.v.data() + g.idx(0, j, k);
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double dx = g.x1(i) - center[0];
                line[i] = gs.U_at(std::sqrt(dx * dx + dyz));
            }
        }
    }
    return out;
}

Ansatz assemble_ansatz(const radial::GroundState& gs, const ring::BumpConfiguration& bumps,
                       std::shared_ptr<const Grid> grid) {
    const auto& g = *grid;
    const double L1s = 0.5 * double(g.n1 - 1) * g.h1;
    const double L2s = 0.5 * double(g.n2 - 1) * g.h2;
    if (std::min(L1s, L2s) < bumps.r + g.spec.ring_margin - 1e-9)
        throw RingOutOfGrid("ring radius " + std::to_string(bumps.r) +
                            " does not fit the grid with margin");
    Ansatz a;
    a.gs = &gs;
    a.bumps = bumps;
    a.Ur = make_field(grid);
    // symmetric by construction: exact samples of a class-E function
    a.Ur.symmetry_s = bumps.s;
    for (std::size_t k = 0; k < g.n3; ++k) {
        const double z = g.x3(k);
        for (std::size_t j = 0; j < g.n2; ++j) {
            const double y = g.x2(j);
            double* line = a.Ur.v.data() + g.idx(0, j, k);
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double x = g.x1(i);
                double acc = 0;
                for (const auto& c : bumps.centers) {
                    const double dx = x - c[0], dy = y - c[1], dz = z - c[2];
                    acc += gs.U_at(std::sqrt(dx * dx + dy * dy + dz * dz));
                }
                line[i] = acc;
            }
        }
    }
    a.t_ur_sq = make_field(grid);
    a.t_ur_sq.symmetry_s = bumps.s;
    std::vector<double> sq(g.n);
    for (std::size_t i = 0; i < g.n; ++i) sq[i] = a.Ur[i] * a.Ur[i];
    g.newton_convolve(sq, a.t_ur_sq.v);
    return a;
}

Field z_field(const radial::GroundState& gs, const ring::BumpConfiguration& bumps,
              std::shared_ptr<const Grid> grid, int i) {
    if (i < 0 || i >= bumps.s) throw Error("bump index out of range");
    const auto& c = bumps.centers[std::size_t(i)];
    const double rinv = 1.0 / bumps.r;
    Field out = make_field(grid);
    const auto& g = *grid;
    for (std::size_t k = 0; k < g.n3; ++k) {
        const double dz = g.x3(k) - c[2];
        for (std::size_t j = 0; j < g.n2; ++j) {
            const double dy = g.x2(j) - c[1];
            double* line = out.v.data() + g.idx(0, j, k);
            for (std::size_t i1 = 0; i1 < g.n1; ++i1) {
                const double dx = g.x1(i1) - c[0];
                const double rho = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (rho < 1e-12) {
                    line[i1] = 0.0;
                    continue;
                }
                // Z = U'(rho) < (xi - x)/rho , xi/r >
                const double proj = (-(dx * c[0] + dy * c[1] + dz * c[2])) * rinv / rho;
                line[i1] = gs.dU_at(rho) * proj;
            }
        }
    }
    return out;
}

std::vector<double> potential_samples(const Grid& g, const ring::PotentialParams& params) {
    std::vector<double> V(g.n);
    for (std::size_t k = 0; k < g.n3; ++k) {
        const double z = g.x3(k);
        for (std::size_t j = 0; j < g.n2; ++j) {
            const double y = g.x2(j);
            const double yz = y * y + z * z;
            double* line = V.data() + g.idx(0, j, k);
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double x = g.x1(i);
                line[i] = params.V(std::sqrt(x * x + yz));
            }
        }
    }
    return V;
}

double energy_J(const Field& u, const ring::PotentialParams& params) {
    const auto& g = *u.grid;
    const auto V = potential_samples(g, params);
    double pot = 0;
    for (std::size_t i = 0; i < g.n; ++i) pot += V[i] * u[i] * u[i];
    pot *= g.cell_volume();
    std::vector<double> sq(g.n), t(g.n);
    for (std::size_t i = 0; i < g.n; ++i) sq[i] = u[i] * u[i];
    g.newton_convolve(sq, t);
    double quart = 0;
    for (std::size_t i = 0; i < g.n; ++i) quart += t[i] * sq[i];
    quart *= g.cell_volume();
    return 0.5 * (dirichlet_form(u, u) + pot) - 0.125 * quart;
}

Field residual_strong(const Field& u, const ring::PotentialParams& params) {
    const auto& g = *u.grid;
    const auto V = potential_samples(g, params);
    Field out = make_field(u.grid);
    out.symmetry_s = u.symmetry_s;
    std::vector<double> sq(g.n), t(g.n);
    for (std::size_t i = 0; i < g.n; ++i) sq[i] = u[i] * u[i];
    g.newton_convolve(sq, t);
    g.laplacian(u.v, out.v);
    for (std::size_t i = 0; i < g.n; ++i)
        out[i] = -out[i] + V[i] * u[i] - 0.5 * t[i] * u[i];
    return out;
}

double inner_v(const Field& u, const Field& w, std::span<const double> V) {
    const auto& g = *u.grid;
    std::vector<double> lw(g.n);
    g.laplacian(w.v, lw);
    double acc = 0;
    for (std::size_t i = 0; i < g.n; ++i) acc += u[i] * (-lw[i] + V[i] * w[i]);
    return acc * g.cell_volume();
}

double dirichlet_form(const Field& u, const Field& w) {
    const auto& g = *u.grid;
    double acc = 0;
    const double c1 = 1.0 / (g.h1 * g.h1), c2 = 1.0 / (g.h2 * g.h2),
                 c3 = 1.0 / (g.h3 * g.h3);
    for (std::size_t k = 0; k < g.n3; ++k)
        for (std::size_t j = 0; j < g.n2; ++j) {
            const std::size_t base = g.idx(0, j, k);
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double uu = u[base + i], ww = w[base + i];
                const double dux = (i + 1 < g.n1 ? u[base + i + 1] : 0.0) - uu;
                const double dwx = (i + 1 < g.n1 ? w[base + i + 1] : 0.0) - ww;
                acc += c1 * dux * dwx;
                if (i == 0) acc += c1 * uu * ww;
                const double duy = (j + 1 < g.n2 ? u[base + i + g.n1] : 0.0) - uu;
                const double dwy = (j + 1 < g.n2 ? w[base + i + g.n1] : 0.0) - ww;
                acc += c2 * duy * dwy;
                if (j == 0) acc += c2 * uu * ww;
                const double duz = (k + 1 < g.n3 ? u[base + i + g.n1 * g.n2] : 0.0) - uu;
                const double dwz = (k + 1 < g.n3 ? w[base + i + g.n1 * g.n2] : 0.0) - ww;
                acc += c3 * duz * dwz;
                if (k == 0) acc += c3 * uu * ww;
            }
        }
    return acc * g.cell_volume();
}

double max_abs(const Field& u) {
    double m = 0;
    for (double v : u.v) m = std::max(m, std::abs(v));
    return m;
}

double min_value(const Field& u) {
    double m = u.v.empty() ? 0.0 : u.v[0];
    for (double v : u.v) m = std::min(m, v);
    return m;
}

} // namespace snb::field
