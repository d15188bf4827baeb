#pragma once

#include <stdexcept>
#include <string>

namespace ngrhmc {

/* Every failure the library raises derives from Error, so callers can catch
   one type at the boundary and map it to an exit code. */
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// log density or gradient evaluated to NaN/Inf at a visited point
struct NonFiniteEvaluation : Error { using Error::Error; };

// constraint normal shorter than the degeneracy tolerance at a collision
struct DegenerateNormal : Error { using Error::Error; };

// l1 collision landed on a corner: some |w_i| below the sign tolerance
struct AmbiguousSign : Error { using Error::Error; };

// polynomial identically zero (within pruning) where roots were requested
struct DegeneratePoly : Error { using Error::Error; };

// dense-output evaluation requested outside the step interval
struct OutOfStepRange : Error { using Error::Error; };

struct InfeasibleStart : Error { using Error::Error; };
struct StepSizeUnderflow : Error { using Error::Error; };
struct EventStorm : Error { using Error::Error; };
struct UnknownExample : Error { using Error::Error; };
struct UnknownDemo : Error { using Error::Error; };
struct OracleInfeasible : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace ngrhmc
