#pragma once

#include <filesystem>
#include <string>

#include "snb/field.hpp"
#include "snb/radial.hpp"
#include "snb/reduction.hpp"

namespace snb::io {

inline constexpr int kCacheFormatVersion = 1;
inline constexpr const char* kSolverVersion = "snbumps 0.1.0";

/// Writes content atomically (temp file + rename).
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Ground-state cache: CSV body `rho,u,psi` at 17 significant digits plus a
/// JSON sidecar with the derived constants and a checksum of the body.
void save_ground_state(const radial::GroundState& gs, const std::filesystem::path& csv_path);

/// Loads a cache pair; derivative samples and tail parameters are
/// reconstructed from the profiles, constants are taken from the sidecar.
radial::GroundState load_ground_state(const std::filesystem::path& csv_path);

/// Refuses caches whose grid differs from the requested one.
radial::GroundState load_or_compute_ground_state(const std::filesystem::path& cache_dir,
                                                 const radial::GroundStateConfig& cfg);

std::filesystem::path ground_state_cache_path(const std::filesystem::path& dir,
                                              const radial::GroundStateConfig& cfg);

/// Raw field dump: little-endian f64, x-fastest, with a JSON sidecar
/// {n1,n2,n3,h1,h2,h3,origin,symmetry_s}.
void save_field(const field::Field& f, const std::filesystem::path& path);
field::Field load_field(const std::filesystem::path& path);

void save_certificate(const reduce::SolutionCertificate& cert,
                      const ring::PotentialParams& params,
                      const std::filesystem::path& path);

struct LoadedCertificate {
    reduce::SolutionCertificate cert;
    ring::PotentialParams params;
};

LoadedCertificate load_certificate(const std::filesystem::path& path);

} // namespace snb::io
