#pragma once

#include <stdexcept>
#include <string>

namespace mwvio {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

// geometry
struct SingularInput : Error {
  using Error::Error;
};
struct DegeneratePlanes : Error {
  using Error::Error;
};
struct LineThroughOrigin : Error {
  using Error::Error;
};

// image / line flow
struct TooSmall : Error {
  using Error::Error;
};

// manhattan
struct DegenerateSegment : Error {
  using Error::Error;
};
struct ParallelLines : Error {
  using Error::Error;
};
struct InsufficientConstraints : Error {
  using Error::Error;
};
struct WindowTooSmall : Error {
  using Error::Error;
};

// factors / window
struct ProjectionDegenerate : Error {
  using Error::Error;
};
struct BehindCamera : Error {
  using Error::Error;
};
struct InsufficientBaseline : Error {
  using Error::Error;
};
struct SolverDiverged : Error {
  using Error::Error;
};

// pipeline / io
struct ConfigInvalid : Error {
  using Error::Error;
};
struct NoOverlap : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& msg, int line, int column = -1)
      : Error(msg + " (line " + std::to_string(line) +
              (column >= 0 ? ", column " + std::to_string(column) : "") + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

}  // namespace mwvio
