#include "wharm/error.hpp"

namespace wharm {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutsideTube: return "OutsideTube";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::NonpositiveHeight: return "NonpositiveHeight";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::NonContraction: return "NonContraction";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::NonzeroTrace: return "NonzeroTrace";
    case ErrorCode::IndefiniteForm: return "IndefiniteForm";
    case ErrorCode::SingularOperator: return "SingularOperator";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::AmplitudeOutOfRange: return "AmplitudeOutOfRange";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingArtifacts: return "MissingArtifacts";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace wharm
