#include "snb/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "snb/errors.hpp"
#include "snb/util.hpp"

namespace snb::io {

using nlohmann::json;

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), std::streamsize(content.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".json");
    return p;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

void save_ground_state(const radial::GroundState& gs, const std::filesystem::path& csv_path) {
    std::string body;
    body.reserve(gs.grid.n * 64);
    body += "rho,u,psi\n";
    char line[128];
    for (std::size_t k = 0; k < gs.grid.n; ++k) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", gs.grid.node(k), gs.U[k],
                      gs.Psi[k]);
        body += line;
    }
    write_atomic(csv_path, body);

    json meta;
    meta["format_version"] = kCacheFormatVersion;
    meta["solver_version"] = kSolverVersion;
    meta["h"] = gs.grid.h;
    meta["R_rad"] = gs.grid.r_max();
    meta["phi0_star"] = gs.phi0_star;
    meta["lambda"] = gs.lambda;
    meta["lambda0"] = gs.lambda0;
    meta["lambda0_drift"] = gs.lambda0_drift;
    meta["lambda1"] = gs.lambda1;
    meta["A1"] = gs.A1;
    meta["A2"] = gs.A2;
    meta["nehari_residual"] = gs.nehari_residual;
    meta["tail_sigma"] = gs.tail_sigma;
    meta["tail_c"] = gs.tail_c;
    meta["rho_trust"] = gs.rho_trust;
    char sum[32];
    std::snprintf(sum, sizeof(sum), "%016" PRIx64, util::fnv1a(body));
    meta["checksum_fnv1a"] = sum;
    write_atomic(sidecar_path(csv_path), meta.dump(2) + "\n");
}

radial::GroundState load_ground_state(const std::filesystem::path& csv_path) {
    const std::string body = read_file(csv_path);
    json meta;
    try {
        meta = json::parse(read_file(sidecar_path(csv_path)));
    } catch (const json::parse_error& e) {
        throw FormatVersionMismatch("cache sidecar is not valid JSON: " +
                                    std::string(e.what()));
    }
    if (!meta.contains("format_version") ||
        meta["format_version"].get<int>() != kCacheFormatVersion)
        throw FormatVersionMismatch("unsupported ground-state cache format");
    char sum[32];
    std::snprintf(sum, sizeof(sum), "%016" PRIx64, util::fnv1a(body));
    if (meta["checksum_fnv1a"].get<std::string>() != sum)
        throw ChecksumMismatch("ground-state cache body does not match its checksum");

    radial::GroundState gs;
    gs.grid.h = meta["h"].get<double>();
    gs.phi0_star = meta["phi0_star"].get<double>();
    gs.lambda = meta["lambda"].get<double>();
    gs.lambda0 = meta["lambda0"].get<double>();
    gs.lambda0_drift = meta["lambda0_drift"].get<double>();
    gs.lambda1 = meta["lambda1"].get<double>();
    gs.A1 = meta["A1"].get<double>();
    gs.A2 = meta["A2"].get<double>();
    gs.nehari_residual = meta["nehari_residual"].get<double>();
    gs.tail_sigma = meta["tail_sigma"].get<double>();
    gs.tail_c = meta["tail_c"].get<double>();
    gs.rho_trust = meta["rho_trust"].get<double>();

    std::istringstream in(body);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double rho, u, psi;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &rho, &u, &psi) != 3)
            throw ChecksumMismatch("malformed cache row: " + line);
        gs.U.push_back(u);
        gs.Psi.push_back(psi);
    }
    gs.grid.n = gs.U.size();
    const double want = meta["R_rad"].get<double>();
    if (std::abs(gs.grid.r_max() - want) > 1e-9 * (1 + want))
        throw ChecksumMismatch("cache row count does not match the stored extent");

    // derivative samples by fourth-order differences (model values beyond
    // the trust radius are smooth, so this is accurate everywhere)
    const std::size_t n = gs.grid.n;
    gs.dU.assign(n, 0.0);
    gs.dPsi.assign(n, 0.0);
    const double h = gs.grid.h;
    auto d4 = [&](const std::vector<double>& y, std::size_t k) {
        if (k >= 2 && k + 2 < n)
            return (-y[k + 2] + 8 * y[k + 1] - 8 * y[k - 1] + y[k - 2]) / (12 * h);
        if (k == 0) return (-3 * y[0] + 4 * y[1] - y[2]) / (2 * h);
        if (k == 1) return (y[2] - y[0]) / (2 * h);
        if (k + 2 == n) return (y[k + 1] - y[k - 1]) / (2 * h);
        return (3 * y[n - 1] - 4 * y[n - 2] + y[n - 3]) / (2 * h);
    };
    for (std::size_t k = 0; k < n; ++k) {
        gs.dU[k] = d4(gs.U, k);
        gs.dPsi[k] = d4(gs.Psi, k);
    }
    gs.dU[0] = 0.0;
    gs.dPsi[0] = 0.0;
    return gs;
}

std::filesystem::path ground_state_cache_path(const std::filesystem::path& dir,
                                              const radial::GroundStateConfig& cfg) {
    char name[96];
    std::snprintf(name, sizeof(name), "ground_state_h%.6g_R%.6g.csv", cfg.h, cfg.r_max);
    return dir / name;
}

radial::GroundState load_or_compute_ground_state(const std::filesystem::path& cache_dir,
                                                 const radial::GroundStateConfig& cfg) {
    std::filesystem::create_directories(cache_dir);
    const auto path = ground_state_cache_path(cache_dir, cfg);
    if (std::filesystem::exists(path)) {
        auto gs = load_ground_state(path);
        if (std::abs(gs.grid.h - cfg.h) > 1e-12 * cfg.h ||
            std::abs(gs.grid.r_max() - cfg.r_max) > 1e-9 * cfg.r_max)
            throw FormatVersionMismatch(
                "cached ground state was computed at a different grid; "
                "delete " + path.string() + " to recompute");
        return gs;
    }
    auto gs = radial::compute_ground_state(cfg);
    save_ground_state(gs, path);
    return gs;
}

void save_field(const field::Field& f, const std::filesystem::path& path) {
    static_assert(sizeof(double) == 8);
    std::string bytes(reinterpret_cast<const char*>(f.v.data()), f.v.size() * 8);
    write_atomic(path, bytes);
    const auto& g = *f.grid;
    json meta;
    meta["n1"] = g.n1;
    meta["n2"] = g.n2;
    meta["n3"] = g.n3;
    meta["h1"] = g.h1;
    meta["h2"] = g.h2;
    meta["h3"] = g.h3;
    meta["origin"] = {g.x1(0), g.x2(0), g.x3(0)};
    meta["symmetry_s"] = f.symmetry_s;
    write_atomic(sidecar_path(path), meta.dump(2) + "\n");
}

field::Field load_field(const std::filesystem::path& path) {
    const json meta = json::parse(read_file(sidecar_path(path)));
    field::GridSpec spec;
    spec.h1 = meta["h1"].get<double>();
    spec.h2 = meta["h2"].get<double>();
    spec.h3 = meta["h3"].get<double>();
    const auto n1 = meta["n1"].get<std::size_t>();
    const auto n2 = meta["n2"].get<std::size_t>();
    const auto n3 = meta["n3"].get<std::size_t>();
    spec.L1 = 0.5 * double(n1 - 1) * spec.h1;
    spec.L2 = 0.5 * double(n2 - 1) * spec.h2;
    spec.L3 = 0.5 * double(n3 - 1) * spec.h3;
    auto grid = field::Grid::create(spec);
    if (grid->n1 != n1 || grid->n2 != n2 || grid->n3 != n3)
        throw FormatVersionMismatch("field dump dimensions are inconsistent");
    auto f = field::make_field(grid);
    f.symmetry_s = meta["symmetry_s"].get<int>();
    const std::string bytes = read_file(path);
    if (bytes.size() != f.v.size() * 8)
        throw ChecksumMismatch("field dump size does not match its sidecar");
    std::memcpy(f.v.data(), bytes.data(), bytes.size());
    return f;
}

void save_certificate(const reduce::SolutionCertificate& cert,
                      const ring::PotentialParams& params,
                      const std::filesystem::path& path) {
    json j;
    j["s"] = cert.s;
    j["m"] = cert.m;
    j["a"] = cert.a;
    j["V0"] = params.V0;
    j["theta"] = params.theta;
    j["r_closed_form"] = cert.r_closed_form;
    j["r_numeric"] = cert.r_numeric;
    j["w_norm"] = cert.w_norm;
    j["residual_inf"] = cert.residual_inf;
    j["residual_l2"] = cert.residual_l2;
    j["min_u"] = cert.min_u;
    j["zeta_estimate"] = cert.zeta_estimate;
    j["J"] = cert.J;
    j["iterations"] = cert.iterations;
    j["kappa_history"] = cert.kappa_history;
    j["grid_h"] = cert.grid_h;
    j["grid_L1"] = cert.grid_L1;
    j["grid_L3"] = cert.grid_L3;
    j["F_at_window_lo"] = cert.F_at_window_lo;
    j["F_at_window_hi"] = cert.F_at_window_hi;
    j["F_max"] = cert.F_max;
    j["solver_version"] = kSolverVersion;
    write_atomic(path, j.dump(2) + "\n");
}

LoadedCertificate load_certificate(const std::filesystem::path& path) {
    const json j = json::parse(read_file(path));
    LoadedCertificate out;
    out.cert.s = j["s"].get<int>();
    out.cert.m = j["m"].get<double>();
    out.cert.a = j["a"].get<double>();
    out.params.m = out.cert.m;
    out.params.a = out.cert.a;
    out.params.V0 = j["V0"].get<double>();
    out.params.theta = j["theta"].get<double>();
    out.cert.r_closed_form = j["r_closed_form"].get<double>();
    out.cert.r_numeric = j["r_numeric"].get<double>();
    out.cert.w_norm = j["w_norm"].get<double>();
    out.cert.residual_inf = j["residual_inf"].get<double>();
    out.cert.residual_l2 = j["residual_l2"].get<double>();
    out.cert.min_u = j["min_u"].get<double>();
    out.cert.zeta_estimate = j["zeta_estimate"].get<double>();
    out.cert.J = j["J"].get<double>();
    out.cert.iterations = j["iterations"].get<int>();
    out.cert.kappa_history = j["kappa_history"].get<std::vector<double>>();
    out.cert.grid_h = j["grid_h"].get<double>();
    out.cert.grid_L1 = j["grid_L1"].get<double>();
    out.cert.grid_L3 = j["grid_L3"].get<double>();
    return out;
}

} // namespace snb::io
