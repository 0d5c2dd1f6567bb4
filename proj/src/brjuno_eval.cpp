#include "brjuno/brjuno_eval.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "brjuno/errors.hpp"

namespace brjuno {

namespace {

std::int64_t bitlen(std::uint64_t n) {
    std::int64_t b = 0;
    while (n > 0) {
        ++b;
        n >>= 1;
    }
    return b;
}

// Working precision schedule: target + 2 log2(k) + 8 guard bits.
std::int64_t working_prec(std::int64_t prec, std::uint64_t k) {
    return prec + 2 * bitlen(k + 1) + 8;
}

const Dyadic& overflow_ceiling() {
    static const Dyadic ceiling = Dyadic::pow2(1 << 20);
    return ceiling;
}

void check_overflow(const Interval& v) {
    if (v.hi().abs() > overflow_ceiling() || v.lo().abs() > overflow_ceiling())
        throw DivergentHead("term enclosure exceeded the overflow budget");
}

}  // namespace

SignSpec SignSpec::periodic(std::vector<int> pattern) {
    if (pattern.empty()) throw DomainError("empty sign pattern");
    for (int s : pattern)
        if (s != 1 && s != -1) throw DomainError("sign values must be +1 or -1");
    if (std::all_of(pattern.begin(), pattern.end(), [](int s) { return s == 1; }))
        return constant();
    return SignSpec(Kind::Periodic, std::move(pattern));
}

SignSpec SignSpec::parse(const std::string& text) {
    if (text == "constant" || text == "plus" || text == "+1") return constant();
    if (text == "alternating") return alternating();
    if (text.rfind("periodic:", 0) == 0) {
        std::vector<int> pattern;
        std::istringstream is(text.substr(9));
        std::string item;
        while (std::getline(is, item, ',')) {
            if (item == "+1" || item == "1")
                pattern.push_back(1);
            else if (item == "-1")
                pattern.push_back(-1);
            else
                throw ParseError("bad sign entry: " + item);
        }
        return periodic(std::move(pattern));
    }
    throw ParseError("unknown sign spec: " + text);
}

std::string SignSpec::to_string() const {
    switch (kind_) {
        case Kind::Constant:
            return "constant";
        case Kind::Alternating:
            return "alternating";
        case Kind::Periodic: {
            std::string s = "periodic:";
            for (std::size_t i = 0; i < pattern_.size(); ++i) {
                if (i) s += ",";
                s += pattern_[i] == 1 ? "+1" : "-1";
            }
            return s;
        }
    }
    return "?";
}

BrjunoSpec BrjunoSpec::make(std::shared_ptr<const MapModel> map, WeightModel weight,
                            Rational nu, SignSpec sign) {
    if (nu.sign() <= 0) throw DomainError("nu must be positive");
    if (!map) throw DomainError("spec needs a map");
    return BrjunoSpec{std::move(map), std::move(weight), std::move(nu), std::move(sign)};
}

// ---------------------------------------------------------------------------
// Partial sums

namespace {

// eta_i enclosures for i = 1..k of a stream, one backward pass.
std::vector<Interval> eta_enclosures(const BrjunoSpec& spec, const DigitStream& x,
                                     std::uint64_t k, std::int64_t wp) {
    const MapModel& map = *spec.map;
    std::vector<Interval> etas(k + 1);  // 1-based
    if (x.tail_kind() == DigitStream::TailKind::Generator) {
        const DigitWord prefix = x.digits(1, k + 1);
        const std::vector<Interval> cyl = suffix_cylinders(map, prefix, wp);
        for (std::uint64_t i = 1; i <= k; ++i) etas[i] = cyl[i - 1];
        return etas;
    }
    const std::uint64_t head_len = x.head_length();
    const DigitWord pattern = x.tail_pattern();
    const std::uint64_t p = pattern.size();
    // Tail phase points.
    std::vector<Interval> phase(p);
    for (std::uint64_t r = 0; r < p; ++r) {
        DigitWord rotated;
        for (std::uint64_t t = 0; t < p; ++t) rotated.push_back(pattern[(r + t) % p]);
        phase[r] = p == 1 && pattern[0] == 1 ? fixed_point_phi(map, wp)
                                             : periodic_point(map, rotated, wp);
    }
    for (std::uint64_t i = k; i > head_len && i >= 1; --i)
        etas[i] = phase[(i - head_len - 1) % p];
    // Backward through the head from the tail boundary; every eta_i with
    // i <= head_len depends on all the later head digits.
    Interval next = phase[0];  // eta_{head_len + 1}
    for (std::uint64_t i = head_len; i >= 1; --i) {
        next = map.inverse_branch(x.digit(i), next, wp);
        if (i <= k) etas[i] = next;
        if (i == 1) break;
    }
    return etas;
}

}  // namespace

PartialSumState partial_sum(const BrjunoSpec& spec, const DigitStream& x, std::uint64_t k,
                            std::int64_t prec) {
    if (k < 1) throw DomainError("partial sums need k >= 1");
    const std::int64_t wp = working_prec(prec, k);
    const std::vector<Interval> etas = eta_enclosures(spec, x, k, wp);
    PartialSumState st;
    st.k = k;
    Interval prod(Dyadic(1));
    Interval sum(Dyadic(0));
    for (std::uint64_t n = 1; n <= k; ++n) {
        const Interval ppow = iv_pow(prod, spec.nu, wp);
        const Interval u = spec.weight.eval(etas[n], wp);
        Interval term = (ppow * u).round_out(wp);
        if (spec.sign.at(n) < 0) term = -term;
        sum = (sum + term).round_out(wp);
        check_overflow(sum);
        prod = (prod * etas[n]).round_out(wp);
    }
    st.product = prod;
    st.product_pow_nu = iv_pow(prod, spec.nu, wp);
    st.sum = sum;
    st.consumed = x.digits(1, k + 1);
    return st;
}

// ---------------------------------------------------------------------------
// rho bound

RhoBound rho_bound(const MapModel& map, std::int64_t prec,
                   std::optional<Rational> a_star_override) {
    if (map.s1() < Rational(1)) {
        return RhoBound{map.s1(), map.s1(), map.s1()};
    }
    const std::int64_t wp = prec + 16;
    Rational a_star;
    if (a_star_override) {
        a_star = *a_star_override;
    } else {
        a_star = Rational(fixed_point_phi(map, wp).hi());
    }
    const BranchBounds b1 = map.branch_bounds(1);
    if (!(a_star > b1.lo && a_star < Rational(1)))
        throw DomainError("a_star must lie inside the first branch");
    // G decreasing on J_1: sup of the image of [a_star, 1) is at a_star.
    const Interval image =
        map.apply_on_branch(1, Interval::of_rational(a_star, wp), wp);
    const Rational b_star(image.hi());
    const Rational rho = std::max(a_star, b_star);
    if (!(rho < Rational(1))) throw DomainError("rho bound not certified below 1");
    return RhoBound{rho, a_star, b_star};
}

// ---------------------------------------------------------------------------
// Closed-form evaluation of eventually-periodic points

ClosedEval eval_eventually_periodic(const BrjunoSpec& spec, const DigitWord& head,
                                    const DigitWord& pattern, std::int64_t prec) {
    if (pattern.empty()) throw InvalidDigit("empty tail pattern");
    const MapModel& map = *spec.map;
    const std::uint64_t m0 = head.size();
    const std::uint64_t p = pattern.size();
    const std::uint64_t ps = spec.sign.period();
    const std::uint64_t p_eff = std::lcm(p, ps);

    for (std::int64_t wp = working_prec(prec, m0 + p_eff) + 8;; wp += 32) {
        // Tail phase points z_r = point with digits pattern[r], pattern[r+1], ...
        std::vector<Interval> phase(p);
        const bool ones = p == 1 && pattern[0] == 1;
        for (std::uint64_t r = 0; r < p; ++r) {
            DigitWord rotated;
            for (std::uint64_t t = 0; t < p; ++t) rotated.push_back(pattern[(r + t) % p]);
            phase[r] = ones ? fixed_point_phi(map, wp) : periodic_point(map, rotated, wp);
        }
        ClosedEval out;
        out.tail_point = phase[0];
        out.u_tail_point = spec.weight.eval(phase[0], wp);
        out.etas.assign(m0 + 1, Interval());
        // Backward pass over the head.
        Interval next = phase[0];
        for (std::uint64_t i = m0; i >= 1; --i) {
            next = map.inverse_branch(head[i - 1], next, wp);
            out.etas[i] = next;
            if (i == 1) break;
        }
        // Head terms.
        Interval prod(Dyadic(1));
        Interval sum(Dyadic(0));
        out.terms.clear();
        for (std::uint64_t n = 1; n <= m0; ++n) {
            const Interval ppow = iv_pow(prod, spec.nu, wp);
            const Interval u = spec.weight.eval(out.etas[n], wp);
            Interval term = (ppow * u).round_out(wp);
            if (spec.sign.at(n) < 0) term = -term;
            out.terms.push_back(term);
            sum = (sum + term).round_out(wp);
            check_overflow(sum);
            prod = (prod * out.etas[n]).round_out(wp);
        }
        out.head_product = prod;
        // One effective period of tail terms, then the geometric factor.
        Interval block(Dyadic(0));
        Interval tail_prod = prod;  // eta_1 .. eta_{m0 + j}
        for (std::uint64_t j = 0; j < p_eff; ++j) {
            const Interval ppow = iv_pow(tail_prod, spec.nu, wp);
            const Interval u = spec.weight.eval(phase[j % p], wp);
            Interval term = (ppow * u).round_out(wp);
            if (spec.sign.at(m0 + 1 + j) < 0) term = -term;
            block = (block + term).round_out(wp);
            tail_prod = (tail_prod * phase[j % p]).round_out(wp);
        }
        // Ratio across one effective period: (z_0 ... z_{p_eff-1})^nu.
        Interval cycle_prod(Dyadic(1));
        for (std::uint64_t j = 0; j < p_eff; ++j)
            cycle_prod = (cycle_prod * phase[j % p]).round_out(wp);
        const Interval ratio = iv_pow(cycle_prod, spec.nu, wp);
        if (!(ratio.hi() < Dyadic(1))) {
            continue;  // refine until the geometric ratio is certified below 1
        }
        const Interval tail = iv_div(block, Interval(Dyadic(1)) - ratio, wp);
        out.value = (sum + tail).round_out(prec + 2);
        if (out.value.width() <= Dyadic::pow2(-prec)) return out;
        if (wp > 64 * prec + (1 << 14))
            throw DomainError("closed-form evaluation failed to reach width");
    }
}

Interval eval_eventually_ones(const BrjunoSpec& spec, const DigitWord& head,
                              std::int64_t prec) {
    return eval_eventually_periodic(spec, head, {1}, prec).value;
}

CohomologyCheck cohomology_check(const BrjunoSpec& spec, const DigitWord& head,
                                 std::int64_t prec) {
    if (!spec.sign.is_constant())
        throw DomainError("cohomology identity needs a constant sign");
    if (head.empty()) throw DomainError("cohomology check needs a non-empty head");
    const std::int64_t wp = prec + 16;
    CohomologyCheck out;
    out.lhs = eval_eventually_ones(spec, head, wp);
    DigitWord shifted(head.begin() + 1, head.end());
    const Interval phi_shift = eval_eventually_ones(spec, shifted, wp);
    const Interval x = eval_point(*spec.map, DigitStream::all_ones(head), wp);
    const Interval u_x = spec.weight.eval(x, wp);
    const Interval xpow = iv_pow(x, spec.nu, wp);
    out.rhs = (u_x + xpow * phi_shift).round_out(prec);
    out.lhs = out.lhs.round_out(prec);
    out.overlap = out.lhs.overlaps(out.rhs);
    return out;
}

// ---------------------------------------------------------------------------
// Enclosure sequences (left-computability surface)

EnclosureSequence::EnclosureSequence(BrjunoSpec spec, DigitStream x,
                                     std::optional<Digit> digit_bound, std::int64_t prec,
                                     bool want_upper)
    : spec_(std::move(spec)),
      x_(std::move(x)),
      digit_bound_(digit_bound),
      prec_(prec),
      want_upper_(want_upper) {
    if (want_upper_ && !digit_bound_)
        throw UpperBoundUnavailable("upper bounds require a digit bound");
    if (!spec_.sign.is_constant() && !digit_bound_)
        throw DomainError("non-constant signs require a digit bound");
    if (want_upper_ || !spec_.sign.is_constant()) {
        const std::int64_t wp = prec_ + 16;
        const RhoBound rho = rho_bound(*spec_.map, wp);
        const Interval q = iv_pow(Interval::of_rational(rho.rho, wp), spec_.nu, wp);
        const BranchBounds bound_branch = spec_.map->branch_bounds(*digit_bound_);
        // Digits <= A keep every eta inside [l_A, s1); u's sup over that
        // window feeds the geometric tail envelope.
        const Interval window(bound_branch.lo.floor_to(wp), spec_.map->s1().ceil_to(wp));
        const Interval u_sup = spec_.weight.eval(window, wp);
        tail_factor_ = iv_div((u_sup * Interval(Dyadic(2))),
                              Interval(Dyadic(1)) - q, wp);
        if (tail_factor_.lo().sign() < 0)
            tail_factor_ = Interval(Dyadic(0), tail_factor_.hi());
    }
}

EnclosureSequence::Item EnclosureSequence::next() {
    ++k_;
    if (digit_bound_) {
        // The caller promised digits <= A; verify as they are pulled.
        if (x_.digit(k_) > *digit_bound_ || x_.digit(k_ + 1) > *digit_bound_)
            throw InvalidDigit("stream digit exceeds the declared bound");
    }
    const PartialSumState st = partial_sum(spec_, x_, k_, prec_);
    Item item;
    item.k = k_;
    if (spec_.sign.is_constant()) {
        Dyadic lo = st.sum.lo();
        if (lo.sign() < 0) lo = Dyadic(0);
        if (have_lo_ && best_lo_ > lo) lo = best_lo_;
        best_lo_ = lo;
        have_lo_ = true;
        item.lo = lo;
        if (want_upper_) {
            const Interval tail = (st.product_pow_nu * tail_factor_).round_out(prec_);
            item.hi = (st.sum.hi() + tail.hi());
        }
    } else {
        const Interval tail = (st.product_pow_nu * tail_factor_).round_out(prec_);
        item.lo = st.sum.lo() - tail.hi();
        item.hi = st.sum.hi() + tail.hi();
    }
    return item;
}

}  // namespace brjuno
