#include "brjuno/verify.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "brjuno/cf_engine.hpp"
#include "brjuno/errors.hpp"

namespace brjuno {

namespace {
using json = nlohmann::ordered_json;
}

Interval delta_G(const MapModel& map, Digit n, std::int64_t prec) {
    map.require_branch(n);
    map.require_branch(n + 1);
    const std::int64_t wp = prec + 16;
    const Interval phi = fixed_point_phi(map, wp);
    const Interval d =
        map.inverse_branch(n, phi, wp) - map.inverse_branch(n + 1, phi, wp);
    if (d.lo().sign() <= 0)
        throw NonPositiveDelta("delta_G(" + std::to_string(n) + ") not certified positive");
    return d.round_out(prec);
}

std::string ConditionVerdict::status_string() const {
    switch (status) {
        case Status::Pass: return "pass";
        case Status::Fail: return "fail";
        case Status::Unchecked: return "unchecked";
    }
    return "?";
}

bool ConditionReport::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const ConditionVerdict& v) {
        return v.status == ConditionVerdict::Status::Pass;
    });
}

const ConditionVerdict& ConditionReport::verdict(const std::string& id) const {
    for (const ConditionVerdict& v : verdicts)
        if (v.id == id) return v;
    throw DomainError("no verdict with id " + id);
}

std::string ConditionReport::to_json() const {
    json j;
    j["map"] = map_name;
    j["range"] = range;
    json arr = json::array();
    for (const ConditionVerdict& v : verdicts) {
        json jv;
        jv["id"] = v.id;
        jv["name"] = v.name;
        jv["status"] = v.status_string();
        jv["detail"] = v.detail;
        jv["checked_to"] = v.checked_to;
        jv["tail_certified"] = v.tail_certified;
        jv["worst_margin"] = v.worst_margin;
        arr.push_back(jv);
    }
    j["conditions"] = arr;
    j["all_pass"] = all_pass();
    return j.dump();
}

std::string ConditionReport::pretty() const {
    std::string s = "condition report for " + map_name + " (branches 1.." +
                    std::to_string(range) + ")\n";
    for (const ConditionVerdict& v : verdicts) {
        s += "  (" + v.id + ") " + v.status_string();
        for (std::size_t pad = v.id.size() + v.status_string().size(); pad < 16; ++pad) s += ' ';
        s += v.name;
        if (!v.detail.empty()) s += "  -- " + v.detail;
        s += "\n";
    }
    s += all_pass() ? "  all conditions pass\n" : "  NOT all conditions pass\n";
    return s;
}

namespace {

using Status = ConditionVerdict::Status;

double rat_margin(const Rational& r) { return r.to_double(); }

// (i) every branch maps onto (s0, s1)
ConditionVerdict check_surjectivity(const MapModel& map, Digit i_max, std::int64_t prec) {
    ConditionVerdict v;
    v.id = "i";
    v.name = "every branch maps onto (s0, s1)";
    v.checked_to = i_max;
    if (map.surjective_by_construction()) {
        v.status = Status::Pass;
        v.tail_certified = true;
        v.detail = "by construction; inverse-branch round trips spot-checked";
        // Spot-check a few branches anyway.
        const Digit probes[] = {1, 2, std::max<Digit>(1, i_max / 2), i_max};
        for (Digit i : probes) {
            if (!map.has_branch(i)) continue;
            const Interval y = Interval::of_rational(
                (map.s0() + map.s1()) * Rational(1, 3), prec + 8);
            const Interval x = map.inverse_branch(i, y, prec + 8);
            const Interval back = map.apply_on_branch(i, x, prec + 8);
            if (!back.overlaps(y)) {
                v.status = Status::Fail;
                v.tail_certified = false;
                v.detail = "round trip failed on branch " + std::to_string(i);
                return v;
            }
        }
        return v;
    }
    // Custom tables: round trips certify consistency of the supplied inverse,
    // not surjectivity itself.
    const Digit limit = map.branch_limit() == 0 ? i_max : std::min(i_max, map.branch_limit());
    for (Digit i = 1; i <= limit; ++i) {
        for (int t = 1; t <= 3; ++t) {
            const Interval y = Interval::of_rational(
                map.s0() + (map.s1() - map.s0()) * Rational(t, 4), prec + 8);
            const Interval x = map.inverse_branch(i, y, prec + 8);
            const Interval back = map.apply_on_branch(i, x, prec + 8);
            if (!back.overlaps(y)) {
                v.status = Status::Fail;
                v.detail = "inverse/forward mismatch on branch " + std::to_string(i);
                return v;
            }
        }
    }
    v.status = Status::Unchecked;
    v.detail = "round trips consistent on 1.." + std::to_string(limit) +
               "; surjectivity of a custom table is not certified";
    return v;
}

// (ii) expansion with the declared kappa, tau, sigma
ConditionVerdict check_expansion(const MapModel& map, Digit i_max) {
    ConditionVerdict v;
    v.id = "ii";
    v.name = "expansion: 1/tau_{i,1} < l_i sigma and 1/tau_{i,kappa} < l_i / tau";
    v.checked_to = i_max;
    if (const auto caveat = map.expansion_caveat()) {
        v.status = Status::Unchecked;
        v.detail = *caveat;
        return v;
    }
    const MapConstants& c = map.constants();
    if (c.tau <= Rational(1) || c.sigma <= Rational(1)) {
        v.status = Status::Fail;
        v.detail = "declared tau and sigma must exceed 1";
        return v;
    }
    const Digit limit = map.branch_limit() == 0 ? i_max : std::min(i_max, map.branch_limit());
    double worst = 1e300;
    for (Digit i = 1; i <= limit; ++i) {
        const auto t1 = map.min_abs_derivative(i);
        const auto tk = map.min_abs_derivative_kappa(i, c.kappa);
        if (!t1 || !tk) {
            v.status = Status::Unchecked;
            v.detail = "no certified branch derivative bounds (branch " + std::to_string(i) + ")";
            return v;
        }
        const Rational l = map.branch_bounds(i).lo;
        // inf |G'| may equal 1 when the infimum sits on the excluded branch
        // endpoint; below 1 is a genuine violation.
        if (*t1 < Rational(1)) {
            v.status = Status::Fail;
            v.detail = "|G'| < 1 on branch " + std::to_string(i);
            return v;
        }
        // 1/t1 < l*sigma  <=>  1 < t1*l*sigma
        const Rational m1 = *t1 * l * c.sigma - Rational(1);
        // 1/tk < l/tau    <=>  tau < tk*l
        const Rational m2 = *tk * l - c.tau;
        worst = std::min(worst, std::min(rat_margin(m1), rat_margin(m2)));
        if (m1.sign() <= 0 || m2.sign() <= 0) {
            v.status = Status::Fail;
            v.worst_margin = worst;
            v.detail = "violated at branch " + std::to_string(i) +
                       (m1.sign() <= 0 ? " (sigma side)" : " (tau side)");
            return v;
        }
    }
    v.status = Status::Pass;
    v.worst_margin = worst;
    v.tail_certified = map.condition_margins_tail_monotone() && map.branch_limit() == 0;
    v.detail = v.tail_certified ? "margins monotone in i beyond the range"
                                : "certified on 1.." + std::to_string(limit) + " only";
    return v;
}

// (iii) the first branch is decreasing
ConditionVerdict check_first_branch_decreasing(const MapModel& map, std::int64_t prec) {
    ConditionVerdict v;
    v.id = "iii";
    v.name = "first branch decreasing";
    v.checked_to = 1;
    if (map.surjective_by_construction()) {
        // Built-in families know their branch orientation.
        v.status = map.branch_increasing(1) ? Status::Fail : Status::Pass;
        v.tail_certified = true;
        v.detail = "by construction";
        return v;
    }
    // A C^1 branch with |G'| certified nonvanishing on pieces covering J_1 is
    // strictly monotone; two interior samples then fix the direction.
    const BranchBounds b = map.branch_bounds(1);
    const Rational span = b.hi - b.lo;
    bool nonvanishing = true;
    for (int piece = 0; piece < 16; ++piece) {
        const Rational lo = b.lo + span * Rational(piece, 16);
        const Rational hi = b.lo + span * Rational(piece + 1, 16);
        const Interval x(lo.floor_to(prec + 8), hi.ceil_to(prec + 8));
        const auto d = map.abs_derivative(1, x, prec + 8);
        if (!d) {
            v.status = Status::Unchecked;
            v.detail = "no derivative data";
            return v;
        }
        if (d->lo().sign() <= 0) nonvanishing = false;
    }
    const Interval left = map.apply_on_branch(
        1, Interval::of_rational(b.lo + span * Rational(1, 64), prec + 8), prec + 8);
    const Interval right = map.apply_on_branch(
        1, Interval::of_rational(b.hi - span * Rational(1, 64), prec + 8), prec + 8);
    if (nonvanishing && right.hi() < left.lo()) {
        v.status = Status::Pass;
        v.detail = "derivative nonvanishing on 16 pieces, interior samples decrease";
    } else if (nonvanishing && right.lo() > left.hi()) {
        v.status = Status::Fail;
        v.detail = "first branch is increasing";
    } else {
        v.status = Status::Unchecked;
        v.detail = "monotonicity not resolved at this precision";
    }
    return v;
}

// (iv) r_{N+1}/l_{N+1} * (r_N - l_{N+1}) / delta_G(N) < D
ConditionVerdict check_delta_ratio(const MapModel& map, Digit i_max, std::int64_t prec) {
    ConditionVerdict v;
    v.id = "iv";
    v.name = "r_{N+1}/l_{N+1} * (r_N - l_{N+1})/delta_G(N) < D";
    const Digit limit =
        map.branch_limit() == 0 ? i_max : std::min(i_max, map.branch_limit() - 1);
    v.checked_to = limit;
    if (map.branch_increasing(1)) {
        v.status = Status::Fail;
        v.detail = "no decreasing first branch, fixed point undefined";
        return v;
    }
    const std::int64_t wp = prec + 16;
    Interval phi;
    try {
        phi = fixed_point_phi(map, wp);
    } catch (const Error& e) {
        v.status = Status::Unchecked;
        v.detail = std::string("fixed point unavailable: ") + e.what();
        return v;
    }
    double worst = 1e300;
    Interval inv_cur = map.inverse_branch(1, phi, wp);
    for (Digit n = 1; n <= limit; ++n) {
        const Interval inv_next = map.inverse_branch(n + 1, phi, wp);
        const Interval d = inv_cur - inv_next;
        if (d.lo().sign() <= 0) {
            v.status = Status::Fail;
            v.detail = "delta_G(" + std::to_string(n) + ") not certified positive";
            return v;
        }
        const BranchBounds bn = map.branch_bounds(n);
        const BranchBounds bn1 = map.branch_bounds(n + 1);
        // Outward: numerator maximized, delta minimized.
        const Rational numer = (bn1.hi / bn1.lo) * (bn.hi - bn1.lo);
        const Rational ratio = numer / Rational(d.lo());
        const Rational margin = map.constants().big_d - ratio;
        worst = std::min(worst, rat_margin(margin));
        if (margin.sign() <= 0) {
            v.status = Status::Fail;
            v.worst_margin = worst;
            v.detail = "violated at N = " + std::to_string(n);
            return v;
        }
        inv_cur = inv_next;
    }
    v.status = Status::Pass;
    v.worst_margin = worst;
    v.tail_certified = map.condition_margins_tail_monotone() && map.branch_limit() == 0;
    v.detail = v.tail_certified ? "ratio decreasing in N beyond the range"
                                : "certified on 1.." + std::to_string(limit) + " only";
    return v;
}

// (v) (r_i - l_i)/l_i^2 < D
ConditionVerdict check_branch_width(const MapModel& map, Digit i_max) {
    ConditionVerdict v;
    v.id = "v";
    v.name = "(r_i - l_i)/l_i^2 < D";
    const Digit limit = map.branch_limit() == 0 ? i_max : std::min(i_max, map.branch_limit());
    v.checked_to = limit;
    double worst = 1e300;
    for (Digit i = 1; i <= limit; ++i) {
        const BranchBounds b = map.branch_bounds(i);
        const Rational val = (b.hi - b.lo) / (b.lo * b.lo);
        const Rational margin = map.constants().big_d - val;
        worst = std::min(worst, rat_margin(margin));
        if (margin.sign() <= 0) {
            v.status = Status::Fail;
            v.worst_margin = worst;
            v.detail = "violated at branch " + std::to_string(i);
            return v;
        }
    }
    v.status = Status::Pass;
    v.worst_margin = worst;
    v.tail_certified = map.condition_margins_tail_monotone() && map.branch_limit() == 0;
    v.detail = v.tail_certified ? "margin monotone in i beyond the range"
                                : "certified on 1.." + std::to_string(limit) + " only";
    return v;
}

// (vi) computability
ConditionVerdict check_computability(const MapModel& map) {
    ConditionVerdict v;
    v.id = "vi";
    v.name = "branch maps are computable";
    v.status = Status::Pass;
    v.tail_certified = true;
    v.detail = map.surjective_by_construction()
                   ? "pass by construction (closed-form branches)"
                   : "pass by construction (interval-evaluable expression table)";
    return v;
}

// (vii) g(i) = r_i/l_{i+1} - 1 in (0, m_g], decaying
ConditionVerdict check_gap_ratio(const MapModel& map, Digit i_max) {
    ConditionVerdict v;
    v.id = "vii";
    v.name = "0 < g(i) <= m_g with g(i) -> 0";
    const Digit limit =
        map.branch_limit() == 0 ? i_max : std::min(i_max, map.branch_limit() - 1);
    v.checked_to = limit;
    double worst = 1e300;
    Rational prev(0);
    bool monotone = true;
    for (Digit i = 1; i <= limit; ++i) {
        const Rational g = map.g_of(i);
        if (g.sign() <= 0) {
            v.status = Status::Fail;
            v.detail = "g(" + std::to_string(i) + ") <= 0";
            return v;
        }
        const Rational margin = map.constants().m_g - g;
        worst = std::min(worst, rat_margin(margin));
        if (margin.sign() < 0) {
            v.status = Status::Fail;
            v.worst_margin = worst;
            v.detail = "g exceeds m_g at branch " + std::to_string(i);
            return v;
        }
        if (i > 1 && g > prev) monotone = false;
        prev = g;
    }
    v.status = Status::Pass;
    v.worst_margin = worst;
    v.tail_certified = map.condition_margins_tail_monotone() && map.branch_limit() == 0;
    v.detail = (monotone ? std::string("non-increasing over the range")
                         : std::string("bounded over the range")) +
               (v.tail_certified ? "; decays to 0 by closed form" : "");
    return v;
}

}  // namespace

ConditionReport verify_conditions(const MapModel& map, Digit i_max, std::int64_t prec) {
    if (i_max < 2) throw DomainError("verify_conditions needs i_max >= 2");
    ConditionReport report;
    report.map_name = map.name();
    report.range = i_max;
    report.verdicts.push_back(check_surjectivity(map, i_max, prec));
    report.verdicts.push_back(check_expansion(map, i_max));
    report.verdicts.push_back(check_first_branch_decreasing(map, prec));
    report.verdicts.push_back(check_delta_ratio(map, i_max, prec));
    report.verdicts.push_back(check_branch_width(map, i_max));
    report.verdicts.push_back(check_computability(map));
    report.verdicts.push_back(check_gap_ratio(map, i_max));
    return report;
}

}  // namespace brjuno
