#pragma once

#include <string>
#include <vector>

#include "mosb/model.hpp"

namespace mosb {

/// Box bound from the core-variety analysis: support of the optimal measure
/// lies in [0, B] with B = (M + sqrt(M(M - 4ak)))/(2a) for a > 0, any B > k
/// for a = 0.
double support_bound(double a, double k, double M);

struct SupportSuggestion {
    double B = 0.0;
    std::vector<double> per_asset;  // certified bound per asset, before margin
    bool heuristic = false;         // true when n > 1 (coordinate-wise extension)
    bool override_used = false;
    std::string warning;
};

/// Max over assets of the per-asset bound (deepest out-of-the-money option),
/// with a 1% margin. A config box bound takes precedence, with a warning when
/// it lies below the certified value.
SupportSuggestion suggest_B(const GmpProblem& p, bool honor_override = true);

}  // namespace mosb
