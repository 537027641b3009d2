#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace mrta {

inline constexpr const char* kVersion = "0.1.0";

// caller broke an operation's contract: infeasible action, malformed matrix,
// inconsistent dimensions, non-finite weights
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// unreadable, truncated or schema-violating files
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

inline double dist(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace mrta
