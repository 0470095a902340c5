#include "snb/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include <lapacke.h>

#include "snb/errors.hpp"
#include "snb/util.hpp"

namespace snb::spectra {

SectorOperator make_sector_operator(const radial::GroundState& gs, int l,
                                    double h, double r_max) {
    const double ratio = h / gs.grid.h;
    const auto stride = std::size_t(std::llround(ratio));
    if (std::abs(ratio - double(stride)) > 1e-9 * ratio || stride == 0)
        throw Error("sector spacing must be an integer multiple of the ground-state spacing");
    SectorOperator op;
    op.l = l;
    op.grid = radial::RadialGrid::from_extent(h, r_max);
    if (op.grid.r_max() > gs.grid.r_max() * (1 + 1e-12))
        throw TailTooShort("sector grid exceeds the ground-state grid");
    op.U.resize(op.grid.n);
    op.Psi.resize(op.grid.n);
    for (std::size_t k = 0; k < op.grid.n; ++k) {
        op.U[k] = gs.U[k * stride];
        op.Psi[k] = gs.Psi[k * stride];
    }
    return op;
}

std::vector<double> SectorOperator::apply(std::span<const double> f) const {
    const std::size_t n = grid.n;
    if (f.size() != n) throw Error("sector apply: sample count mismatch");
    const double h = grid.h;
    std::vector<double> uf(n), out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) uf[k] = U[k] * f[k];
    const auto kl = radial::radial_newton_transform(grid, uf, l, std::max(l, 4));
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double r = grid.node(k);
        const double lap = (f[k + 1] - 2 * f[k] + f[k - 1]) / (h * h) +
                           (f[k + 1] - f[k - 1]) / (h * r);
        out[k] = -lap + double(l * (l + 1)) * f[k] / (r * r) + f[k] -
                 Psi[k] * f[k] - U[k] * kl[k];
    }
    if (l == 0) {
        // f'(0) = 0 in the radial sector, so Delta f(0) = 6 (f1 - f0)/h^2
        const double lap0 = 6.0 * (f[1] - f[0]) / (h * h);
        out[0] = -lap0 + f[0] - Psi[0] * f[0] - U[0] * kl[0];
    }
    out[n - 1] = 0.0; // Dirichlet truncation
    return out;
}

namespace {

// The sector operator in g = rho f variables on the interior nodes 1..n-2:
//   A g = -g'' + [l(l+1)/rho^2 + 1 - Psi] g - (rho U) Ktilde[(U g)],
// where Ktilde carries the multipole kernel; it is symmetric and its
// application costs O(n) via cumulative trapezoid sums.
struct GOperator {
    int l;
    std::size_t m; // interior node count
    double h;
    std::vector<double> rho, diag, ru, u;      // per interior node
    std::vector<double> p_in, p_out, cum;      // scratch powers / sums

    explicit GOperator(const SectorOperator& op) {
        l = op.l;
        h = op.grid.h;
        m = op.grid.n - 2;
        rho.resize(m);
        diag.resize(m);
        ru.resize(m);
        u.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double r = op.grid.node(i + 1);
            rho[i] = r;
            diag[i] = 2.0 / (h * h) + double(l * (l + 1)) / (r * r) + 1.0 - op.Psi[i + 1];
            u[i] = op.U[i + 1];
            ru[i] = r * u[i];
        }
        p_in.resize(m);
        p_out.resize(m);
        cum.resize(m);
    }

    void apply(const double* x, double* y) const {
        const double ih2 = 1.0 / (h * h);
        // local tridiagonal part with Dirichlet ends
        for (std::size_t i = 0; i < m; ++i) {
            double v = diag[i] * x[i];
            if (i > 0) v -= ih2 * x[i - 1];
            if (i + 1 < m) v -= ih2 * x[i + 1];
            y[i] = v;
        }
        // nonlocal part: inner integrand t^(l+1) U g, outer integrand t^-l U g
        auto& pi = const_cast<std::vector<double>&>(p_in);
        auto& po = const_cast<std::vector<double>&>(p_out);
        auto& cm = const_cast<std::vector<double>&>(cum);
        for (std::size_t i = 0; i < m; ++i) {
            const double w = u[i] * x[i];
            const double rl = std::pow(rho[i], l);
            pi[i] = rl * rho[i] * w;
            po[i] = w / rl;
        }
        const double inv = 1.0 / double(2 * l + 1);
        double acc = 0.5 * h * pi[0]; // trapezoid from 0 (integrand vanishes there)
        for (std::size_t i = 0; i < m; ++i) {
            cm[i] = acc;
            if (i + 1 < m) acc += 0.5 * h * (pi[i] + pi[i + 1]);
        }
        double occ = 0.5 * h * po[m - 1]; // from R (integrand vanishes at R)
        for (std::size_t i = m; i-- > 0;) {
            const double rl = std::pow(rho[i], l);
            const double K = inv * (cm[i] / (rl * rho[i]) + rl * occ);
            y[i] -= ru[i] * K;
            if (i > 0) occ += 0.5 * h * (po[i] + po[i - 1]);
        }
    }
};

// Banded factorization of the augmented system
//   [ L  D ] [x]   [b]      L = local tridiagonal part,
//   [ D  B ] [z] = [0],     B = -d^2/drho^2 + l(l+1)/rho^2,  D = diag(U),
// whose Schur complement L - D B^-1 D approximates the sector operator; used
// as the preconditioner for the inner solves.
struct BandedSurrogate {
    std::size_t m;
    lapack_int nb, ldab;
    std::vector<double> ab;
    std::vector<lapack_int> ipiv;
    static constexpr lapack_int kl = 2, ku = 2;

    explicit BandedSurrogate(const GOperator& g) {
        m = g.m;
        nb = lapack_int(2 * m);
        ldab = 2 * kl + ku + 1;
        ab.assign(std::size_t(ldab) * nb, 0.0);
        const double ih2 = 1.0 / (g.h * g.h);
        auto at = [&](lapack_int i, lapack_int j) -> double& {
            return ab[std::size_t(kl + ku + i - j) + std::size_t(j) * ldab];
        };
        for (std::size_t i = 0; i < m; ++i) {
            const lapack_int xi = lapack_int(2 * i), zi = lapack_int(2 * i + 1);
            at(xi, xi) = g.diag[i];
            double bdiag = 2.0 * ih2 + double(g.l * (g.l + 1)) / (g.rho[i] * g.rho[i]);
            if (i + 1 == m) {
                // ghost node beyond the truncation radius follows the decaying
                // branch z ~ rho^-l of the exterior equation
                const double R = g.rho[m - 1] + g.h;
                const double factor = std::pow((R - g.h) / R, g.l);
                bdiag -= factor * ih2 * 0.0; // placeholder, corrected below
                bdiag = (2.0 - std::pow(g.rho[m - 1] / R, g.l)) * ih2 +
                        double(g.l * (g.l + 1)) / (g.rho[i] * g.rho[i]);
            }
            at(zi, zi) = bdiag;
            at(xi, zi) = g.u[i];
            at(zi, xi) = g.u[i];
            if (i + 1 < m) {
                const lapack_int xj = xi + 2, zj = zi + 2;
                at(xi, xj) = -ih2;
                at(xj, xi) = -ih2;
                at(zi, zj) = -ih2;
                at(zj, zi) = -ih2;
            }
        }
        ipiv.resize(nb);
        const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, nb, nb, kl, ku,
                                               ab.data(), ldab, ipiv.data());
        if (info != 0) throw Error("banded surrogate factorization failed");
    }

    // y := (Schur solve) applied to b: solve the augmented system, return x part
    void solve(const double* b, double* y, std::vector<double>& scratch) const {
        scratch.assign(std::size_t(nb), 0.0);
        for (std::size_t i = 0; i < m; ++i) scratch[2 * i] = b[i];
        const lapack_int info =
            LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', nb, kl, ku, 1, ab.data(), ldab,
                           ipiv.data(), scratch.data(), nb);
        if (info != 0) throw Error("banded surrogate solve failed");
        for (std::size_t i = 0; i < m; ++i) y[i] = scratch[2 * i];
    }
};

// Left-preconditioned GMRES for A x = b (full recurrence, no restart; the
// preconditioned operator is within O(h^2) of the identity).
void gmres_solve(const GOperator& A, const BandedSurrogate& M, const double* b,
                 double* x, double rtol, int maxit) {
    const std::size_t m = A.m;
    std::vector<double> scratch, r(m), w(m), t(m);
    M.solve(b, r.data(), scratch); // r = M^-1 b, x0 = 0
    const double beta = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
    std::fill(x, x + m, 0.0);
    if (beta == 0) return;
    std::vector<std::vector<double>> V;
    V.emplace_back(m);
    for (std::size_t i = 0; i < m; ++i) V[0][i] = r[i] / beta;
    std::vector<double> H((maxit + 1) * maxit, 0.0), cs(maxit), sn(maxit), g(maxit + 1, 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < maxit; ++k) {
        A.apply(V[k].data(), t.data());
        M.solve(t.data(), w.data(), scratch);
        for (int j = 0; j <= k; ++j) {
            double hij = std::inner_product(w.begin(), w.end(), V[j].begin(), 0.0);
            H[std::size_t(j) * maxit + k] = hij;
            for (std::size_t i = 0; i < m; ++i) w[i] -= hij * V[j][i];
        }
        double hnext = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        H[std::size_t(k + 1) * maxit + k] = hnext;
        // Givens rotations to maintain the least-squares residual
        for (int j = 0; j < k; ++j) {
            const double tmp = cs[j] * H[std::size_t(j) * maxit + k] +
                               sn[j] * H[std::size_t(j + 1) * maxit + k];
            H[std::size_t(j + 1) * maxit + k] = -sn[j] * H[std::size_t(j) * maxit + k] +
                                                cs[j] * H[std::size_t(j + 1) * maxit + k];
            H[std::size_t(j) * maxit + k] = tmp;
        }
        const double denom = std::hypot(H[std::size_t(k) * maxit + k], hnext);
        cs[k] = H[std::size_t(k) * maxit + k] / denom;
        sn[k] = hnext / denom;
        H[std::size_t(k) * maxit + k] = denom;
        g[k + 1] = -sn[k] * g[k];
        g[k] = cs[k] * g[k];
        if (std::abs(g[k + 1]) < rtol * beta || hnext == 0) {
            ++k;
            break;
        }
        V.emplace_back(m);
        for (std::size_t i = 0; i < m; ++i) V[k + 1][i] = w[i] / hnext;
    }
    // back substitution for the Krylov coefficients
    std::vector<double> ycoef(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
        double v = g[i];
        for (int j = i + 1; j < k; ++j) v -= H[std::size_t(i) * maxit + j] * ycoef[j];
        ycoef[i] = v / H[std::size_t(i) * maxit + i];
    }
    for (int j = 0; j < k; ++j)
        for (std::size_t i = 0; i < m; ++i) x[i] += ycoef[j] * V[j][i];
}

void orthonormalize(std::vector<double>& X, std::size_t m, int nv) {
    for (int c = 0; c < nv; ++c) {
        double* xc = &X[std::size_t(c) * m];
        for (int pass = 0; pass < 2; ++pass)
            for (int b = 0; b < c; ++b) {
                const double* xb = &X[std::size_t(b) * m];
                double dot = 0;
                for (std::size_t i = 0; i < m; ++i) dot += xc[i] * xb[i];
                for (std::size_t i = 0; i < m; ++i) xc[i] -= dot * xb[i];
            }
        double nrm = 0;
        for (std::size_t i = 0; i < m; ++i) nrm += xc[i] * xc[i];
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < m; ++i) xc[i] /= nrm;
    }
}

} // namespace

SectorSpectrum sector_spectrum(const SectorOperator& op, int k, unsigned seed) {
    const GOperator A(op);
    const BandedSurrogate M(A);
    const std::size_t m = A.m;
    const int nv = std::min<int>(k + 6, int(m));
    const int nk = std::min(k, nv);

    util::Rng rng(seed + unsigned(op.l) * 7919u);
    std::vector<double> X(std::size_t(nv) * m);
    for (auto& v : X) v = rng.uniform(-1.0, 1.0);
    orthonormalize(X, m, nv);

    std::vector<double> Y(X.size()), H(std::size_t(nv) * nv), evals(nv), work(m), t(m);
    double prev_res = 1e300;
    for (int it = 0; it < 100; ++it) {
        for (int c = 0; c < nv; ++c)
            gmres_solve(A, M, &X[std::size_t(c) * m], &Y[std::size_t(c) * m], 1e-12, 200);
        orthonormalize(Y, m, nv);
        // Rayleigh-Ritz with the exact operator (cheap O(m) applications)
        std::vector<double> AY(std::size_t(nv) * m);
        for (int c = 0; c < nv; ++c) A.apply(&Y[std::size_t(c) * m], &AY[std::size_t(c) * m]);
        for (int a = 0; a < nv; ++a)
            for (int b = 0; b <= a; ++b) {
                double s = 0;
                for (std::size_t i = 0; i < m; ++i)
                    s += Y[std::size_t(a) * m + i] * AY[std::size_t(b) * m + i];
                H[std::size_t(a) * nv + b] = s;
                H[std::size_t(b) * nv + a] = s;
            }
        lapack_int info = LAPACKE_dsyev(LAPACK_COL_MAJOR, 'V', 'L', nv, H.data(), nv,
                                        evals.data());
        if (info != 0) throw Error("Rayleigh-Ritz eigensolve failed");
        // rotate: X_c = sum_a Y_a * H(a, c)  (H column-major eigenvectors)
        std::fill(X.begin(), X.end(), 0.0);
        for (int c = 0; c < nv; ++c)
            for (int a = 0; a < nv; ++a) {
                const double wgt = H[std::size_t(c) * nv + a];
                const double* ya = &Y[std::size_t(a) * m];
                double* xc = &X[std::size_t(c) * m];
                for (std::size_t i = 0; i < m; ++i) xc[i] += wgt * ya[i];
            }
        std::vector<int> order(nv);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return std::abs(evals[a]) < std::abs(evals[b]); });
        {
            std::vector<double> Xs(X.size()), es(nv);
            for (int c = 0; c < nv; ++c) {
                es[c] = evals[order[c]];
                std::memcpy(&Xs[std::size_t(c) * m], &X[std::size_t(order[c]) * m],
                            m * sizeof(double));
            }
            X.swap(Xs);
            std::copy(es.begin(), es.end(), evals.begin());
        }
        double worst = 0;
        for (int c = 0; c < nk; ++c) {
            A.apply(&X[std::size_t(c) * m], work.data());
            double rr = 0;
            for (std::size_t i = 0; i < m; ++i) {
                const double e = work[i] - evals[c] * X[std::size_t(c) * m + i];
                rr += e * e;
            }
            worst = std::max(worst, std::sqrt(rr));
        }
        if (worst < 1e-10 || std::abs(worst - prev_res) < 1e-14 + 1e-6 * worst) break;
        prev_res = worst;
    }

    SectorSpectrum out;
    out.l = op.l;
    out.vec_len = m;
    out.eigenvalues.assign(evals.begin(), evals.begin() + nk);
    out.vectors.assign(X.begin(), X.begin() + std::size_t(nk) * m);
    out.residuals.resize(nk);
    for (int c = 0; c < nk; ++c) {
        A.apply(&out.vectors[std::size_t(c) * m], work.data());
        double rr = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double e = work[i] - out.eigenvalues[c] * out.vectors[std::size_t(c) * m + i];
            rr += e * e;
        }
        out.residuals[c] = std::sqrt(rr);
    }
    return out;
}

SpectrumReport nondegeneracy_report(const radial::GroundState& gs, int l_max, int k,
                                    double tol, const SpectraConfig& cfg) {
    if (l_max < 2 || k < 3)
        throw Error("nondegeneracy report requires l_max >= 2 and k >= 3");
    SpectrumReport rep;
    rep.h = cfg.h;
    rep.r_max = cfg.r_max;
    rep.tol_zero = tol > 0 ? tol : 10.0 * cfg.h * cfg.h * (1.0 + gs.Psi_max());
    std::string complaint;
    for (int l = 0; l <= l_max; ++l) {
        auto op = make_sector_operator(gs, l, cfg.h, cfg.r_max);
        auto spec = sector_spectrum(op, k, cfg.seed);
        if (l == 1 && !spec.vectors.empty()) {
            // overlap of the near-kernel vector with rho U' (g variables)
            const std::size_t m = spec.vec_len;
            const auto stride = std::size_t(std::llround(cfg.h / gs.grid.h));
            double dot = 0, na = 0, nb = 0;
            for (std::size_t i = 0; i < m; ++i) {
                const double r = op.grid.node(i + 1);
                const double gu = r * gs.dU[(i + 1) * stride];
                dot += gu * spec.vectors[i];
                na += gu * gu;
                nb += spec.vectors[i] * spec.vectors[i];
            }
            spec.kernel_overlap = std::abs(dot) / std::sqrt(na * nb);
        }
        int zeros = 0;
        for (double mu : spec.eigenvalues)
            if (std::abs(mu) <= rep.tol_zero) ++zeros;
        const int expected = (l == 1) ? 1 : 0;
        if (zeros != expected) {
            complaint += "sector l=" + std::to_string(l) + ": " + std::to_string(zeros) +
                         " near-zero eigenvalues, expected " + std::to_string(expected) +
                         " (";
            for (double mu : spec.eigenvalues) complaint += std::to_string(mu) + " ";
            complaint += "); ";
        }
        if (l == 1 && spec.kernel_overlap < cfg.overlap_min)
            complaint += "l=1 kernel overlap " + std::to_string(spec.kernel_overlap) +
                         " below " + std::to_string(cfg.overlap_min) + "; ";
        rep.sectors.push_back(std::move(spec));
    }
    if (!complaint.empty()) throw KernelCountMismatch(complaint);
    rep.nondegenerate = true;
    return rep;
}

} // namespace snb::spectra
