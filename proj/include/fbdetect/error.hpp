#ifndef FBDETECT_ERROR_HPP
#define FBDETECT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbdetect {

enum class ErrorKind {
  NotAProbability,
  SupportMismatch,
  ShapeMismatch,
  InvalidArgument,
  Unsupported,
  TooLarge,
  OrderingViolation,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotAProbability: return "NotAProbability";
    case ErrorKind::SupportMismatch: return "SupportMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::OrderingViolation: return "OrderingViolation";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Library failure tagged with its kind; what() reads "Kind: message".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fbdetect

#endif  // FBDETECT_ERROR_HPP
