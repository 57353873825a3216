#include "mosb/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "mosb/errors.hpp"

namespace mosb {

using nlohmann::json;

const char* to_string(PayoffSpec::Kind k) {
    switch (k) {
        case PayoffSpec::Kind::WeightedBasket: return "weighted-basket";
        case PayoffSpec::Kind::CallOnMax: return "call-on-max";
        case PayoffSpec::Kind::SingleCall: return "single-call";
    }
    return "?";
}

int GmpProblem::max_data_degree() const {
    int d_max = 1;  // payoff pieces and option integrands are affine
    for (const auto& mc : moments) d_max = std::max(d_max, mc.f.degree());
    return d_max;
}

std::vector<double> GmpProblem::strikes_of(int asset_index) const {
    std::vector<double> out;
    for (const auto& o : options)
        if (o.asset_index == asset_index) out.push_back(o.strike);
    return out;
}

namespace {

PayoffSpec::Kind parse_kind(const std::string& s) {
    if (s == "weighted-basket") return PayoffSpec::Kind::WeightedBasket;
    if (s == "call-on-max") return PayoffSpec::Kind::CallOnMax;
    if (s == "single-call") return PayoffSpec::Kind::SingleCall;
    throw ParseError("unknown payoff kind: " + s);
}

void validate(GmpProblem& p) {
    if (p.n < 1) throw ValidationError("no assets");
    if (p.options.empty() && p.moments.empty())
        throw ValidationError("no observed options and no moment constraints");
    std::stable_sort(p.options.begin(), p.options.end(), [](const auto& a, const auto& b) {
        return a.asset_index != b.asset_index ? a.asset_index < b.asset_index
                                              : a.strike < b.strike;
    });
    for (std::size_t i = 0; i < p.options.size(); ++i) {
        const auto& o = p.options[i];
        if (o.asset_index < 1 || o.asset_index > p.n)
            throw ValidationError("option asset index out of range");
        if (o.strike < 0.0) throw ValidationError("negative strike");
        if (o.price < 0.0) throw ValidationError("negative option price");
        if (i > 0 && p.options[i - 1].asset_index == o.asset_index &&
            !(p.options[i - 1].strike < o.strike))
            throw ValidationError("duplicate strike on asset " + std::to_string(o.asset_index));
        if (o.strike >= p.box_bound)
            throw ValidationError("B must exceed every strike");
    }
    const auto& pay = p.payoff;
    if (pay.strike < 0.0) throw ValidationError("negative payoff strike");
    switch (pay.kind) {
        case PayoffSpec::Kind::WeightedBasket: {
            if (static_cast<int>(pay.weights.size()) != p.n)
                throw ValidationError("basket weights must have one entry per asset");
            double wmin = std::numeric_limits<double>::infinity();
            bool any = false;
            for (double w : pay.weights) {
                if (w < 0.0) throw ValidationError("negative basket weight");
                if (w > 0.0) { any = true; wmin = std::min(wmin, w); }
            }
            if (!any) throw ValidationError("basket weights all zero");
            if (p.box_bound <= pay.strike / wmin)
                throw ValidationError("B must exceed K / min positive weight");
            break;
        }
        case PayoffSpec::Kind::CallOnMax:
        case PayoffSpec::Kind::SingleCall:
            if (p.box_bound <= pay.strike) throw ValidationError("B must exceed K");
            break;
    }
    if (p.moment_cap && *p.moment_cap <= 0.0) throw ValidationError("M must be positive");
    if (p.box_bound <= 0.0) throw ValidationError("B must be positive");
    for (const auto& mc : p.moments) {
        if (mc.f.vars() != p.n) throw ValidationError("moment constraint variable count");
        if (mc.f.degree() < 1) throw ValidationError("moment constraint must have degree >= 1");
    }
    int need = p.max_data_degree() + 1;
    if (need % 2 != 0) ++need;
    if (p.d < need || p.d % 2 != 0)
        throw ValidationError("d must be even and at least max data degree + 1");
}

}  // namespace

GmpProblem load_problem(const std::string& config_text) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config parse: ") + e.what());
    }
    GmpProblem p;
    try {
        const auto& assets = j.at("assets");
        p.n = static_cast<int>(assets.size());
        int idx = 1;
        for (const auto& a : assets) {
            p.asset_names.push_back(a.value("name", "asset" + std::to_string(idx)));
            for (const auto& o : a.value("options", json::array()))
                p.options.push_back({idx, o.at("strike").get<double>(),
                                     o.at("price").get<double>()});
            ++idx;
        }
        const auto& pay = j.at("payoff");
        p.payoff.kind = parse_kind(pay.at("kind").get<std::string>());
        p.payoff.strike = pay.at("strike").get<double>();
        if (pay.contains("weights"))
            p.payoff.weights = pay.at("weights").get<std::vector<double>>();
        for (const auto& mc : j.value("moment_constraints", json::array())) {
            MomentConstraint m;
            m.f = Polynomial(p.n);
            for (const auto& t : mc.at("coeffs")) {
                auto expo = t.at("exponents").get<std::vector<int>>();
                if (static_cast<int>(expo.size()) != p.n)
                    throw ParseError("exponent array length must equal asset count");
                for (int e : expo)
                    if (e < 0) throw ParseError("negative exponent");
                MultiIndex mi;
                mi.e = expo;
                m.f.add_term(mi, t.at("value").get<double>());
            }
            m.rhs = mc.at("rhs").get<double>();
            std::string rel = mc.value("relation", "equality");
            if (rel == "equality")
                m.relation = MomentConstraint::Relation::Equality;
            else if (rel == "less-equal")
                m.relation = MomentConstraint::Relation::LessEqual;
            else
                throw ParseError("unknown relation: " + rel);
            p.moments.push_back(std::move(m));
        }
        if (j.contains("M") && !j.at("M").is_null())
            p.moment_cap = j.at("M").get<double>();
        p.box_bound = j.at("B").get<double>();
        int need = p.max_data_degree() + 1;
        if (need % 2 != 0) ++need;
        p.d = j.contains("d") && !j.at("d").is_null() ? j.at("d").get<int>() : need;
    } catch (const json::exception& e) {
        throw ParseError(std::string("config schema: ") + e.what());
    }
    validate(p);
    return p;
}

std::string serialize(const GmpProblem& p) {
    json j;
    j["assets"] = json::array();
    for (int a = 1; a <= p.n; ++a) {
        json asset;
        asset["name"] = p.asset_names[a - 1];
        asset["options"] = json::array();
        for (const auto& o : p.options)
            if (o.asset_index == a)
                asset["options"].push_back({{"strike", o.strike}, {"price", o.price}});
        j["assets"].push_back(asset);
    }
    j["payoff"] = {{"kind", to_string(p.payoff.kind)}, {"strike", p.payoff.strike}};
    if (!p.payoff.weights.empty()) j["payoff"]["weights"] = p.payoff.weights;
    j["moment_constraints"] = json::array();
    for (const auto& mc : p.moments) {
        json c;
        c["coeffs"] = json::array();
        for (const auto& [m, v] : mc.f.terms())
            c["coeffs"].push_back({{"exponents", m.e}, {"value", v}});
        c["rhs"] = mc.rhs;
        c["relation"] =
            mc.relation == MomentConstraint::Relation::Equality ? "equality" : "less-equal";
        j["moment_constraints"].push_back(c);
    }
    if (p.moment_cap) j["M"] = *p.moment_cap;
    j["B"] = p.box_bound;
    j["d"] = p.d;
    return j.dump(2);
}

std::vector<PayoffPiece> payoff_pieces(const PayoffSpec& p, int n) {
    std::vector<PayoffPiece> out;
    switch (p.kind) {
        case PayoffSpec::Kind::SingleCall: {
            PayoffPiece piece;
            piece.index = 0;
            piece.poly = Polynomial::variable(n, 0) - Polynomial::constant(n, p.strike);
            Halfspace h;
            h.a.assign(n, 0.0);
            h.a[0] = 1.0;
            h.c = p.strike;
            piece.region.push_back(h);
            out.push_back(std::move(piece));
            break;
        }
        case PayoffSpec::Kind::WeightedBasket: {
            PayoffPiece piece;
            piece.index = 0;
            piece.poly = Polynomial::constant(n, -p.strike);
            for (int i = 0; i < n; ++i)
                piece.poly = piece.poly + Polynomial::variable(n, i) * p.weights[i];
            Halfspace h;
            h.a = p.weights;
            h.c = p.strike;
            piece.region.push_back(h);
            out.push_back(std::move(piece));
            break;
        }
        case PayoffSpec::Kind::CallOnMax: {
            for (int j = 0; j < n; ++j) {
                PayoffPiece piece;
                piece.index = j;
                piece.poly = Polynomial::variable(n, j) - Polynomial::constant(n, p.strike);
                Halfspace hk;
                hk.a.assign(n, 0.0);
                hk.a[j] = 1.0;
                hk.c = p.strike;
                piece.region.push_back(hk);
                for (int i = 0; i < n; ++i) {
                    if (i == j) continue;
                    Halfspace h;  // x_j - x_i >= 0
                    h.a.assign(n, 0.0);
                    h.a[j] = 1.0;
                    h.a[i] = -1.0;
                    h.c = 0.0;
                    piece.region.push_back(h);
                }
                out.push_back(std::move(piece));
            }
            break;
        }
    }
    return out;
}

std::vector<Halfspace> payoff_zero_region(const PayoffSpec& p, int n) {
    std::vector<Halfspace> out;
    switch (p.kind) {
        case PayoffSpec::Kind::SingleCall: {
            Halfspace h;  // K - x1 >= 0
            h.a.assign(n, 0.0);
            h.a[0] = -1.0;
            h.c = -p.strike;
            out.push_back(h);
            break;
        }
        case PayoffSpec::Kind::WeightedBasket: {
            Halfspace h;  // K - w.x >= 0
            h.a.resize(n);
            for (int i = 0; i < n; ++i) h.a[i] = -p.weights[i];
            h.c = -p.strike;
            out.push_back(h);
            break;
        }
        case PayoffSpec::Kind::CallOnMax: {
            for (int i = 0; i < n; ++i) {
                Halfspace h;  // K - x_i >= 0
                h.a.assign(n, 0.0);
                h.a[i] = -1.0;
                h.c = -p.strike;
                out.push_back(h);
            }
            break;
        }
    }
    return out;
}

double payoff_value(const PayoffSpec& p, std::span<const double> x) {
    switch (p.kind) {
        case PayoffSpec::Kind::SingleCall: return std::max(0.0, x[0] - p.strike);
        case PayoffSpec::Kind::WeightedBasket: {
            double s = -p.strike;
            for (std::size_t i = 0; i < x.size(); ++i) s += p.weights[i] * x[i];
            return std::max(0.0, s);
        }
        case PayoffSpec::Kind::CallOnMax: {
            double mx = x[0];
            for (double v : x) mx = std::max(mx, v);
            return std::max(0.0, mx - p.strike);
        }
    }
    return 0.0;
}

}  // namespace mosb
