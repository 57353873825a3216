#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mosb/poly.hpp"

namespace mosb {

/// One observed European call: asset (1-based), strike, premium.
struct ObservedOption {
    int asset_index = 1;
    double strike = 0.0;
    double price = 0.0;
};

/// Polynomial moment datum: integral of f equals (or is at most) rhs.
struct MomentConstraint {
    enum class Relation { Equality, LessEqual };
    Polynomial f;
    double rhs = 0.0;
    Relation relation = Relation::Equality;
};

struct PayoffSpec {
    enum class Kind { WeightedBasket, CallOnMax, SingleCall };
    Kind kind = Kind::SingleCall;
    std::vector<double> weights;  // basket only
    double strike = 0.0;
};

const char* to_string(PayoffSpec::Kind k);

/// a.x - c >= 0
struct Halfspace {
    std::vector<double> a;
    double c = 0.0;
};

/// One affine piece of the payoff together with its activation region.
struct PayoffPiece {
    int index = 0;
    Polynomial poly;
    std::vector<Halfspace> region;
};

/// A full bound-computation instance.
struct GmpProblem {
    int n = 0;
    std::vector<std::string> asset_names;
    PayoffSpec payoff;
    std::vector<ObservedOption> options;  // sorted by (asset, strike), strikes strict
    std::vector<MomentConstraint> moments;
    std::optional<double> moment_cap;  // M; absent = no d-th moment cap
    double box_bound = 0.0;            // B
    int d = 2;                         // even moment-cap exponent

    /// Largest degree among payoff pieces, option integrands and moment data.
    int max_data_degree() const;
    std::vector<double> strikes_of(int asset_index) const;  // 1-based asset
};

/// Parse and validate a JSON config document.
GmpProblem load_problem(const std::string& config_text);

/// Inverse of load_problem (round-trips all fields).
std::string serialize(const GmpProblem& p);

/// Affine pieces of the payoff with their activation regions. The regions
/// together with the zero region cover the orthant, overlapping only on
/// hyperplanes.
std::vector<PayoffPiece> payoff_pieces(const PayoffSpec& p, int n);

/// Region where the payoff is identically zero.
std::vector<Halfspace> payoff_zero_region(const PayoffSpec& p, int n);

/// Direct evaluation of the payoff at a point.
double payoff_value(const PayoffSpec& p, std::span<const double> x);

}  // namespace mosb
