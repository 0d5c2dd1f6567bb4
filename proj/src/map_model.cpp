#include "brjuno/map_model.hpp"

#include <nlohmann/json.hpp>

#include "brjuno/errors.hpp"

namespace brjuno {

namespace {
using json = nlohmann::ordered_json;

Interval reciprocal(const Interval& x, std::int64_t prec) {
    return iv_div(Interval(Dyadic(1)), x, prec);
}
}  // namespace

void MapModel::require_branch(Digit i) const {
    if (!has_branch(i))
        throw InvalidDigit("digit " + std::to_string(i) + " indexes no branch of " + name());
}

Digit MapModel::branch_of(const Interval& x) const {
    const Rational m(x.mid());
    Digit i = locate_branch(m);
    // Accept a neighbour when the midpoint landed on an endpoint shared by
    // two branches.
    for (int step = 0; step < 3; ++step) {
        if (!has_branch(i)) break;
        const BranchBounds b = branch_bounds(i);
        if (Rational(x.lo()) >= b.lo && Rational(x.hi()) <= b.hi) return i;
        if (Rational(x.hi()) > b.hi) {
            if (i == 1) break;
            i = i - 1;  // interval extends to the right: smaller index
        } else {
            i = i + 1;
        }
    }
    throw BranchStraddle("interval " + x.to_string() + " does not fit in a single branch");
}

Interval MapModel::apply(const Interval& x, std::int64_t prec) const {
    return apply_on_branch(branch_of(x), x, prec);
}

Rational MapModel::g_of(Digit i) const {
    require_branch(i);
    if (branch_limit() != 0 && i + 1 > branch_limit())
        throw InvalidDigit("g(i) needs branch i+1");
    const Rational r_i = branch_bounds(i).hi;
    const Rational l_next = branch_bounds(i + 1).lo;
    return r_i / l_next - Rational(1);
}

// ---------------------------------------------------------------------------
// Gauss map

GaussMap::GaussMap(std::optional<MapConstants> constants)
    : MapModel("gauss", Rational(0), Rational(1), constants.value_or(MapConstants{
          /*kappa=*/2, /*tau=*/Rational(3, 2), /*sigma=*/Rational(5, 2),
          /*big_d=*/Rational(5), /*m_g=*/Rational(2)})) {}

BranchBounds GaussMap::branch_bounds(Digit i) const {
    require_branch(i);
    return {Rational(1) / Rational(static_cast<long>(i + 1)),
            Rational(1) / Rational(static_cast<long>(i))};
}

Interval GaussMap::apply_on_branch(Digit i, const Interval& x, std::int64_t prec) const {
    require_branch(i);
    const Interval digit(Dyadic(mpz_class(static_cast<unsigned long>(i)), 0));
    return reciprocal(x, prec) - digit;
}

Interval GaussMap::inverse_branch(Digit i, const Interval& y, std::int64_t prec) const {
    require_branch(i);
    const Interval digit(Dyadic(mpz_class(static_cast<unsigned long>(i)), 0));
    return reciprocal(digit + y, prec);
}

std::optional<Interval> GaussMap::abs_derivative(Digit i, const Interval& x,
                                                 std::int64_t prec) const {
    require_branch(i);
    return reciprocal((x * x).round_out(prec + 8), prec);
}

std::optional<Rational> GaussMap::min_abs_derivative(Digit i) const {
    const Rational ri(static_cast<long>(i));
    return ri * ri;
}

std::optional<Rational> GaussMap::min_abs_derivative_kappa(Digit i, int kappa) const {
    if (kappa == 1) return min_abs_derivative(i);
    if (kappa == 2) {
        const Rational r(static_cast<long>(i + 1));
        return r * r;
    }
    return std::nullopt;
}

Digit GaussMap::locate_branch(const Rational& point) const {
    if (point.sign() <= 0 || point >= Rational(1)) throw BranchStraddle("point outside (0,1)");
    // i = floor(1/point)
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), point.denominator().get_mpz_t(), point.numerator().get_mpz_t());
    if (q < 1) q = 1;
    if (!q.fits_ulong_p()) throw BranchStraddle("point too close to 0 to index a branch");
    return q.get_ui();
}

std::string GaussMap::to_config_json() const {
    json j;
    j["type"] = "gauss";
    j["kappa"] = constants().kappa;
    j["tau"] = constants().tau.to_string();
    j["sigma"] = constants().sigma.to_string();
    j["D"] = constants().big_d.to_string();
    j["m_g"] = constants().m_g.to_string();
    return j.dump();
}

// ---------------------------------------------------------------------------
// Alpha continued fractions

namespace {

Digit ceil_inverse(const Rational& r) {
    // ceil(num/den) for positive r
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), r.numerator().get_mpz_t(), r.denominator().get_mpz_t());
    return q.get_ui();
}

MapConstants alpha_defaults(Digit n1) {
    MapConstants c;
    c.kappa = 1;
    c.tau = Rational(3, 2);
    c.sigma = Rational(5, 4);
    c.big_d = Rational(8);
    c.m_g = Rational(1) / Rational(static_cast<long>(n1));
    return c;
}

Digit alpha_n1(const Rational& alpha, const std::optional<Digit>& n1_override) {
    if (alpha < Rational(1, 2) || alpha >= Rational(1))
        throw DomainError("alpha must lie in [1/2, 1)");
    const Digit natural = ceil_inverse(Rational(1) / (Rational(1) - alpha));
    const Digit n1 = n1_override.value_or(natural);
    if (n1 < natural)
        throw DomainError("n1 override must shrink the domain (n1 >= ceil(1/(1-alpha)))");
    return n1;
}

}  // namespace

AlphaCFMap::AlphaCFMap(Rational alpha, std::optional<Digit> n1_override,
                       std::optional<MapConstants> constants)
    : MapModel("alpha_cf", Rational(0),
               Rational(1) / Rational(static_cast<long>(alpha_n1(alpha, n1_override))),
               constants.value_or(alpha_defaults(alpha_n1(alpha, n1_override)))),
      alpha_(alpha),
      n1_(alpha_n1(alpha, n1_override)),
      n1_overridden_(n1_override.has_value()) {
    set_identity_key("alpha_cf:" + alpha_.to_string() + ":" + std::to_string(n1_));
}

Rational AlphaCFMap::branch_q(Digit i) const {
    const long two_n1 = static_cast<long>(2 * n1_);
    if (i % 2 == 1) return Rational(static_cast<long>(i) + two_n1 - 1, 2);
    return Rational(static_cast<long>(i) + two_n1, 2);
}

BranchBounds AlphaCFMap::branch_bounds(Digit i) const {
    require_branch(i);
    const long two_n1 = static_cast<long>(2 * n1_);
    return {Rational(2) / Rational(static_cast<long>(i) + two_n1),
            Rational(2) / Rational(static_cast<long>(i) + two_n1 - 1)};
}

Interval AlphaCFMap::apply_on_branch(Digit i, const Interval& x, std::int64_t prec) const {
    require_branch(i);
    const Interval q = Interval::of_rational(branch_q(i), prec + 8);
    if (i % 2 == 1) return reciprocal(x, prec) - q;
    return q - reciprocal(x, prec);
}

Interval AlphaCFMap::inverse_branch(Digit i, const Interval& y, std::int64_t prec) const {
    require_branch(i);
    const Interval q = Interval::of_rational(branch_q(i), prec + 8);
    if (i % 2 == 1) return reciprocal(q + y, prec);
    return reciprocal(q - y, prec);
}

std::optional<Interval> AlphaCFMap::abs_derivative(Digit i, const Interval& x,
                                                   std::int64_t prec) const {
    require_branch(i);
    return reciprocal((x * x).round_out(prec + 8), prec);
}

std::optional<Rational> AlphaCFMap::min_abs_derivative(Digit i) const {
    // inf |G'| = 1/r_i^2; the bracket's upper end is a safe r_i.
    const Rational r = branch_bounds(i).hi;
    return Rational(1) / (r * r);
}

std::optional<Rational> AlphaCFMap::min_abs_derivative_kappa(Digit i, int kappa) const {
    if (kappa == 1) return min_abs_derivative(i);
    return std::nullopt;
}

std::optional<std::string> AlphaCFMap::expansion_caveat() const {
    if (n1_ == 2 || n1_overridden_) return std::nullopt;
    return "expansion constants for alpha != 1/2 are certified only on an explicitly "
           "restricted domain; pass n1_override to enable the check";
}

Digit AlphaCFMap::locate_branch(const Rational& point) const {
    if (point.sign() <= 0 || point >= s1()) throw BranchStraddle("point outside (s0,s1)");
    const Rational inv = Rational(1) / point;
    // q = nearest integer to 1/point; decides branch parity.
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), inv.numerator().get_mpz_t(), inv.denominator().get_mpz_t());
    const Rational flr{fl};
    const Rational frac = inv - flr;
    mpz_class q = frac > Rational(1, 2) ? mpz_class(fl + 1) : fl;
    const long n1l = static_cast<long>(n1_);
    if (q < n1l) q = n1l;
    const Rational qr{q};
    const long k = mpz_class(q - n1l).get_si();
    if (inv > qr) {
        return static_cast<Digit>(2 * k + 1);  // decreasing branch
    }
    return static_cast<Digit>(2 * k);  // increasing branch
}

std::string AlphaCFMap::to_config_json() const {
    json j;
    j["type"] = "alpha_cf";
    j["alpha"] = alpha_.to_string();
    if (n1_overridden_) j["n1_override"] = n1_;
    else j["n1_override"] = nullptr;
    j["kappa"] = constants().kappa;
    j["tau"] = constants().tau.to_string();
    j["sigma"] = constants().sigma.to_string();
    j["D"] = constants().big_d.to_string();
    j["m_g"] = constants().m_g.to_string();
    return j.dump();
}

// ---------------------------------------------------------------------------
// Custom branch tables

CustomMap::CustomMap(std::string name, Rational s0, Rational s1, MapConstants constants,
                     std::vector<Branch> branches)
    : MapModel(std::move(name), std::move(s0), std::move(s1), std::move(constants)),
      branches_(std::move(branches)) {
    if (branches_.empty()) throw DomainError("custom map needs at least one branch");
    for (std::size_t k = 0; k + 1 < branches_.size(); ++k) {
        if (branches_[k + 1].hi > branches_[k].lo)
            throw DomainError("custom branches must be ordered leftward and disjoint");
    }
    // Branch formulas distinguish otherwise identically-shaped tables.
    std::size_t h = branches_.size();
    for (const Branch& b : branches_)
        h = h * 1099511628211ULL + std::hash<std::string>{}(b.forward.to_json_text());
    set_identity_key("custom:" + this->name() + ":" + this->s0().to_string() + ":" +
                     this->s1().to_string() + ":" + std::to_string(h));
}

BranchBounds CustomMap::branch_bounds(Digit i) const {
    require_branch(i);
    const Branch& b = branches_[i - 1];
    return {b.lo, b.hi};
}

bool CustomMap::branch_increasing(Digit i) const {
    require_branch(i);
    return branches_[i - 1].increasing;
}

Interval CustomMap::apply_on_branch(Digit i, const Interval& x, std::int64_t prec) const {
    require_branch(i);
    return branches_[i - 1].forward.eval(x, prec);
}

Interval CustomMap::inverse_branch(Digit i, const Interval& y, std::int64_t prec) const {
    require_branch(i);
    return branches_[i - 1].inverse.eval(y, prec);
}

std::optional<Interval> CustomMap::abs_derivative(Digit i, const Interval& x,
                                                  std::int64_t prec) const {
    require_branch(i);
    const Interval d = branches_[i - 1].forward.derivative().eval(x, prec);
    if (d.lo().sign() >= 0) return d;
    if (d.hi().sign() <= 0) return -d;
    return Interval(Dyadic(0), std::max(d.hi(), (-d).hi()));
}

Digit CustomMap::locate_branch(const Rational& point) const {
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        if (point >= branches_[k].lo && point <= branches_[k].hi)
            return static_cast<Digit>(k + 1);
    }
    throw BranchStraddle("point lies in no branch of the table");
}

std::string CustomMap::to_config_json() const {
    json j;
    j["type"] = "custom";
    j["name"] = name();
    j["s0"] = s0().to_string();
    j["s1"] = s1().to_string();
    j["kappa"] = constants().kappa;
    j["tau"] = constants().tau.to_string();
    j["sigma"] = constants().sigma.to_string();
    j["D"] = constants().big_d.to_string();
    j["m_g"] = constants().m_g.to_string();
    json arr = json::array();
    for (const Branch& b : branches_) {
        json jb;
        jb["lo"] = b.lo.to_string();
        jb["hi"] = b.hi.to_string();
        jb["expr"] = json::parse(b.forward.to_json_text());
        jb["inv_expr"] = json::parse(b.inverse.to_json_text());
        jb["increasing"] = b.increasing;
        arr.push_back(jb);
    }
    j["branches"] = arr;
    return j.dump();
}

// ---------------------------------------------------------------------------
// JSON config

std::shared_ptr<const MapModel> map_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad map JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("type")) throw ParseError("map config needs a type");
    const std::string type = j.at("type").get<std::string>();

    auto constants_from = [&](std::optional<MapConstants> defaults) -> std::optional<MapConstants> {
        const bool any = j.contains("kappa") || j.contains("tau") || j.contains("sigma") ||
                         j.contains("D") || j.contains("m_g");
        if (!any) return defaults;
        MapConstants c = defaults.value_or(MapConstants{});
        if (j.contains("kappa")) c.kappa = j.at("kappa").get<int>();
        if (j.contains("tau")) c.tau = Rational::parse(j.at("tau").get<std::string>());
        if (j.contains("sigma")) c.sigma = Rational::parse(j.at("sigma").get<std::string>());
        if (j.contains("D")) c.big_d = Rational::parse(j.at("D").get<std::string>());
        if (j.contains("m_g")) c.m_g = Rational::parse(j.at("m_g").get<std::string>());
        return c;
    };

    if (type == "gauss") {
        GaussMap defaults;
        return std::make_shared<GaussMap>(constants_from(defaults.constants()));
    }
    if (type == "alpha_cf") {
        const Rational alpha = Rational::parse(j.at("alpha").get<std::string>());
        std::optional<Digit> n1;
        if (j.contains("n1_override") && !j.at("n1_override").is_null())
            n1 = j.at("n1_override").get<Digit>();
        const AlphaCFMap plain(alpha, n1);
        return std::make_shared<AlphaCFMap>(alpha, n1, constants_from(plain.constants()));
    }
    if (type == "custom") {
        MapConstants c = constants_from(MapConstants{}).value();
        std::vector<CustomMap::Branch> branches;
        for (const json& jb : j.at("branches")) {
            CustomMap::Branch b{
                Rational::parse(jb.at("lo").get<std::string>()),
                Rational::parse(jb.at("hi").get<std::string>()),
                Expr::from_json_text(jb.at("expr").dump()),
                Expr::from_json_text(jb.at("inv_expr").dump()),
                jb.value("increasing", false)};
            branches.push_back(std::move(b));
        }
        return std::make_shared<CustomMap>(
            j.value("name", std::string("custom")),
            Rational::parse(j.at("s0").get<std::string>()),
            Rational::parse(j.at("s1").get<std::string>()), c, std::move(branches));
    }
    throw ParseError("unknown map type: " + type);
}

}  // namespace brjuno
