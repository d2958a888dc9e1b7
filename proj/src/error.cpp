#include "swnet/error.hpp"

namespace swnet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCyclicRouting: return "CyclicRouting";
    case ErrorCode::kMultipleDownstream: return "MultipleDownstream";
    case ErrorCode::kEmptyScheduleSet: return "EmptyScheduleSet";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kPolicyModelMismatch: return "PolicyModelMismatch";
    case ErrorCode::kNegativeQueue: return "NegativeQueue";
    case ErrorCode::kHorizonTooShort: return "HorizonTooShort";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kSolverDivergence: return "SolverDivergence";
    case ErrorCode::kNoRoot: return "NoRoot";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kPresetUnknown: return "PresetUnknown";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace swnet
