#ifndef NLWAVE_ERROR_HPP
#define NLWAVE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace nlwave {

enum class ErrorCode {
  MassDeficit,
  SymmetryViolation,
  NegativeKernel,
  NoPositiveEquilibrium,
  NoRoot,
  NoConvergence,
  MonotonicityLoss,
  NotAttained,
  GapViolated,
  NonPositiveConstant,
  HistoryUnderflow,
  StabilityBound,
  NonFinite,
  WindowTooSparse,
  NoiseFloor,
  InvalidArgument,
  Config,
  Io
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::MassDeficit: return "MassDeficit";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::NegativeKernel: return "NegativeKernel";
    case ErrorCode::NoPositiveEquilibrium: return "NoPositiveEquilibrium";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MonotonicityLoss: return "MonotonicityLoss";
    case ErrorCode::NotAttained: return "NotAttained";
    case ErrorCode::GapViolated: return "GapViolated";
    case ErrorCode::NonPositiveConstant: return "NonPositiveConstant";
    case ErrorCode::HistoryUnderflow: return "HistoryUnderflow";
    case ErrorCode::StabilityBound: return "StabilityBound";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::WindowTooSparse: return "WindowTooSparse";
    case ErrorCode::NoiseFloor: return "NoiseFloor";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace nlwave

#endif
