#include "due/error.hpp"

namespace due {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::GridMismatch: return "grid-mismatch";
    case ErrorCode::Diverged: return "diverged";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::MissingJacobian: return "missing-jacobian";
    case ErrorCode::ModelBreakdown: return "model-breakdown";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

}  // namespace due
