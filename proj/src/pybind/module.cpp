// Python bindings for the main operations: ground state, transforms, ring
// asymptotics, sector spectra, and the reduced-energy machinery.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "snb/field.hpp"
#include "snb/io.hpp"
#include "snb/radial.hpp"
#include "snb/reduction.hpp"
#include "snb/ring.hpp"
#include "snb/spectra.hpp"

namespace py = pybind11;
using namespace snb;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(py::ssize_t(v.size()), v.data());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "multi-bump solutions of the Schrodinger-Newton system";

    py::class_<radial::GroundState>(m, "GroundState")
        .def_property_readonly("h", [](const radial::GroundState& g) { return g.grid.h; })
        .def_property_readonly("r_max",
                               [](const radial::GroundState& g) { return g.grid.r_max(); })
        .def_property_readonly("rho",
                               [](const radial::GroundState& g) {
                                   std::vector<double> r(g.grid.n);
                                   for (std::size_t k = 0; k < g.grid.n; ++k)
                                       r[k] = g.grid.node(k);
                                   return to_array(r);
                               })
        .def_property_readonly("U",
                               [](const radial::GroundState& g) { return to_array(g.U); })
        .def_property_readonly("dU",
                               [](const radial::GroundState& g) { return to_array(g.dU); })
        .def_property_readonly("Psi",
                               [](const radial::GroundState& g) { return to_array(g.Psi); })
        .def_readonly("lambda0", &radial::GroundState::lambda0)
        .def_readonly("lambda0_drift", &radial::GroundState::lambda0_drift)
        .def_readonly("lambda1", &radial::GroundState::lambda1)
        .def_readonly("A1", &radial::GroundState::A1)
        .def_readonly("A2", &radial::GroundState::A2)
        .def_readonly("phi0_star", &radial::GroundState::phi0_star)
        .def_readonly("nehari_residual", &radial::GroundState::nehari_residual)
        .def_readonly("tail_sigma", &radial::GroundState::tail_sigma)
        .def("u_at", &radial::GroundState::U_at)
        .def("psi_at", &radial::GroundState::Psi_at);

    m.def(
        "ground_state",
        [](double h, double r_max) {
            radial::GroundStateConfig cfg;
            cfg.h = h;
            cfg.r_max = r_max;
            if (r_max < 50.0) {
                cfg.lambda0_window_lo = 0.4 * r_max;
                cfg.lambda0_window_hi = 0.6 * r_max;
                cfg.lambda1_window_lo = 0.75 * r_max;
                cfg.lambda1_window_hi = 0.95 * r_max;
            }
            return radial::compute_ground_state(cfg);
        },
        py::arg("h") = 1e-3, py::arg("r_max") = 60.0);

    m.def("radial_newton_transform",
          [](const radial::GroundState& gs, py::array_t<double> f, int l) {
              std::vector<double> fv(f.data(), f.data() + f.size());
              if (fv.size() != gs.grid.n)
                  throw std::invalid_argument("sample count must match the radial grid");
              return to_array(radial::radial_newton_transform(gs.grid, fv, l));
          },
          py::arg("gs"), py::arg("f"), py::arg("l") = 0);

    m.def("bump_points", [](int s, double r) {
        const auto b = ring::bump_points(s, r);
        py::array_t<double> centers({py::ssize_t(s), py::ssize_t(3)});
        auto acc = centers.mutable_unchecked<2>();
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < 3; ++j) acc(i, j) = b.centers[i][j];
        return py::make_tuple(centers, to_array(b.distances));
    });

    m.def("ring_sum", [](int s, double r, double p) {
        const auto rs = ring::ring_sum(s, r, p);
        py::dict d;
        d["value"] = rs.value;
        d["ratio_to_leading"] = rs.ratio_to_leading;
        d["lower_bound"] = rs.lower_bound;
        d["upper_bound"] = rs.upper_bound;
        return d;
    });

    m.def("pair_interaction", &ring::pair_interaction, py::arg("gs"), py::arg("d"));

    m.def("interaction_sum_check", [](const radial::GroundState& gs, int s, double r) {
        const auto rep = ring::interaction_sum_check(gs, s, r);
        py::dict d;
        d["sum_exact"] = rep.sum_exact;
        d["sum_monopole"] = rep.sum_monopole;
        d["paper_leading"] = rep.paper_leading;
        d["fitted_c"] = rep.fitted_c;
        return d;
    });

    m.def("fit_interaction_constant", [](const radial::GroundState& gs) {
        const auto fit = ring::fit_interaction_constant(gs, {});
        py::dict d;
        d["fitted_c"] = fit.fitted_c;
        d["matches"] = fit.matches;
        d["rel_dev_adjudicated"] = fit.rel_dev_adjudicated;
        d["rel_dev_paper"] = fit.rel_dev_paper;
        return d;
    });

    m.def(
        "energy_expansion",
        [](const radial::GroundState& gs, double a, double m_exp, int s, double r) {
            ring::PotentialParams pp;
            pp.a = a;
            pp.m = m_exp;
            const auto e = ring::energy_expansion(gs, pp, s, r);
            py::dict d;
            d["t_const"] = e.t_const;
            d["t_pot"] = e.t_pot;
            d["t_int"] = e.t_int;
            d["t_const_paper"] = e.t_const_paper;
            d["t_int_paper"] = e.t_int_paper;
            d["J_pred"] = e.J_pred;
            d["J_pred_paper"] = e.J_pred_paper;
            return d;
        },
        py::arg("gs"), py::arg("a"), py::arg("m"), py::arg("s"), py::arg("r"));

    m.def(
        "optimal_radius",
        [](const radial::GroundState& gs, double a, double m_exp, int s, bool paper) {
            ring::PotentialParams pp;
            pp.a = a;
            pp.m = m_exp;
            const auto o = ring::optimal_radius(
                gs, pp, s, paper ? ring::Convention::paper : ring::Convention::adjudicated);
            py::dict d;
            d["r_closed_form"] = o.r_closed_form;
            d["r_numeric"] = o.r_numeric;
            d["window"] = py::make_tuple(o.window.lo, o.window.hi);
            d["degenerate_regime"] = o.degenerate_regime;
            d["r_bar"] = o.r_bar_numeric;
            d["spacing"] = o.spacing;
            return d;
        },
        py::arg("gs"), py::arg("a"), py::arg("m"), py::arg("s"), py::arg("paper") = false);

    m.def("desk_coupling", &reduce::desk_coupling);
    m.def("desk_grid_h", &reduce::desk_grid_h);

    m.def(
        "nondegeneracy_spectrum",
        [](const radial::GroundState& gs, int l_max, int k, double h, double r_max) {
            spectra::SpectraConfig cfg;
            cfg.h = h;
            cfg.r_max = r_max;
            const auto rep = spectra::nondegeneracy_report(gs, l_max, k, 0.0, cfg);
            py::list sectors;
            for (const auto& sec : rep.sectors) {
                py::dict d;
                d["l"] = sec.l;
                d["eigenvalues"] = to_array(sec.eigenvalues);
                d["residuals"] = to_array(sec.residuals);
                d["kernel_overlap"] = sec.kernel_overlap;
                sectors.append(d);
            }
            py::dict out;
            out["sectors"] = sectors;
            out["tol_zero"] = rep.tol_zero;
            out["nondegenerate"] = rep.nondegenerate;
            return out;
        },
        py::arg("gs"), py::arg("l_max") = 3, py::arg("k") = 4, py::arg("h") = 1e-2,
        py::arg("r_max") = 40.0);

    m.def(
        "scan_and_build",
        [](const radial::GroundState& gs, int s, double a, double m_exp, double grid_h,
           int n_r) {
            ring::PotentialParams pp;
            pp.a = a;
            pp.m = m_exp;
            reduce::ScanConfig sc;
            sc.alpha_rel = 0.10;
            sc.grid_h = grid_h > 0 ? grid_h : reduce::desk_grid_h(s);
            sc.lateral_margin = 7.5;
            sc.vertical_extent = 7.5;
            sc.n_r = n_r;
            const auto res = reduce::scan_and_build(gs, pp, s, sc);
            py::dict d;
            py::list rows;
            for (const auto& row : res.rows)
                rows.append(py::make_tuple(row.r, row.F, row.w_norm, row.iters));
            d["rows"] = rows;
            const auto& c = res.certificate;
            py::dict cert;
            cert["s"] = c.s;
            cert["r_closed_form"] = c.r_closed_form;
            cert["r_numeric"] = c.r_numeric;
            cert["w_norm"] = c.w_norm;
            cert["residual_inf"] = c.residual_inf;
            cert["residual_l2"] = c.residual_l2;
            cert["min_u"] = c.min_u;
            cert["zeta_estimate"] = c.zeta_estimate;
            cert["J"] = c.J;
            cert["kappa_history"] = to_array(c.kappa_history);
            d["certificate"] = cert;
            return d;
        },
        py::arg("gs"), py::arg("s"), py::arg("a"), py::arg("m"), py::arg("grid_h") = 0.0,
        py::arg("n_r") = 9);

    m.def("set_fft_threads", &field::set_fft_threads);
}
