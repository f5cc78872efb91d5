#pragma once

#include <stdexcept>
#include <string>

namespace claqs {

enum class ErrorKind {
  Dimension,
  Arity,
  Autodiff,
  Capacity,
  Index,
  Wiring,
  Shape,
  DegenerateState,
  EmptyWindow,
  DegenerateCoefficient,
  CollapsedState,
  Input,
  Label,
  Divergence,
  Io,
  Parse,
  Config,
  Budget,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Arity: return "arity error";
    case ErrorKind::Autodiff: return "autodiff error";
    case ErrorKind::Capacity: return "capacity error";
    case ErrorKind::Index: return "index error";
    case ErrorKind::Wiring: return "wiring error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::DegenerateState: return "degenerate-state error";
    case ErrorKind::EmptyWindow: return "empty-window error";
    case ErrorKind::DegenerateCoefficient: return "degenerate-coefficient error";
    case ErrorKind::CollapsedState: return "collapsed-state error";
    case ErrorKind::Input: return "input error";
    case ErrorKind::Label: return "label error";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Budget: return "budget refusal";
  }
  return "error";
}

}  // namespace claqs
