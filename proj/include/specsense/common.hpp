#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace specsense {

/// Hard-decision fusion rule used to combine per-sensor sensing reports.
enum class Fusion { OR, AND };

inline const char* to_string(Fusion f) { return f == Fusion::OR ? "or" : "and"; }

inline Fusion fusion_from_string(const std::string& s) {
    if (s == "or" || s == "OR") return Fusion::OR;
    if (s == "and" || s == "AND") return Fusion::AND;
    throw std::invalid_argument("unknown fusion rule '" + s + "' (expected \"or\" or \"and\")");
}

// dB values appear only at I/O boundaries; everything internal is linear.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Thrown when a feasibility search exhausts its cap without a solution.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a problem instance exceeds the documented state-space limits.
struct SizeGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown by the robust selectors when no strategy satisfies the constraint.
struct NoSolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a closed-form analytic expression has no applicable branch.
struct BranchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a least-squares model fit fails (e.g. non-positive decay rate).
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace specsense
