#pragma once

#include <stdexcept>
#include <string>

namespace snb {

/// Base class for all failures raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// radial core
struct BracketInvalid : Error { using Error::Error; };
struct StepTooCoarse : Error { using Error::Error; };
struct TailTooShort : Error { using Error::Error; };
struct TailDivergent : Error { using Error::Error; };

// linearized spectra
struct KernelCountMismatch : Error { using Error::Error; };

// ring asymptotics
struct QuadratureNotConverged : Error { using Error::Error; };
struct SeparationTooSmall : Error { using Error::Error; };
struct NoInteriorMax : Error { using Error::Error; };

// field engine
struct BudgetExceeded : Error { using Error::Error; };
struct RingOutOfGrid : Error { using Error::Error; };
struct BoundaryMassTooLarge : Error { using Error::Error; };

// reduction solver
struct DegenerateConstraint : Error { using Error::Error; };
struct ContractionFailed : Error { using Error::Error; };
struct InnerSolveStalled : Error { using Error::Error; };
struct MaximizerOnBoundary : Error { using Error::Error; };
struct ResidualTooLarge : Error { using Error::Error; };

// io / cli
struct FormatVersionMismatch : Error { using Error::Error; };
struct ChecksumMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace snb
