#pragma once

#include <cstdlib>
#include <memory>

#include "snb/radial.hpp"

namespace snb::test {

inline unsigned test_seed() {
    if (const char* env = std::getenv("SNB_TEST_SEED")) return unsigned(std::atoi(env));
    return 12345u;
}

/// Default ground state, computed once per test binary.
inline const radial::GroundState& ground_state() {
    static const radial::GroundState gs = radial::compute_ground_state({});
    return gs;
}

/// Coarser, shorter ground state for tests that only need moderate accuracy.
inline const radial::GroundState& ground_state_coarse() {
    static const radial::GroundState gs = [] {
        radial::GroundStateConfig cfg;
        cfg.h = 5e-3;
        cfg.r_max = 40.0;
        cfg.lambda0_window_lo = 16.0;
        cfg.lambda0_window_hi = 24.0;
        cfg.lambda1_window_lo = 30.0;
        cfg.lambda1_window_hi = 38.0;
        return radial::compute_ground_state(cfg);
    }();
    return gs;
}

// Constants pinned by the self-convergence oracle (h, h/2, h/4 agree to
// better than 1e-8 relative; see the Richardson tests).
inline constexpr double kPhi0Star = 0.649533985703834;
inline constexpr double kA1 = 88.098544332787;
inline constexpr double kA2 = 2952.21055635899;
inline constexpr double kLambda1 = 3.50532970261123;

} // namespace snb::test
