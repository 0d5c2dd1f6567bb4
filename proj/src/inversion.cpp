#include "brjuno/inversion.hpp"
#include <cmath>
#include <cstdlib>

#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "brjuno/errors.hpp"

namespace brjuno {

namespace {

using json = nlohmann::ordered_json;

enum class Cert { True, False, Unknown };

constexpr std::int64_t kCertStart = 24;

// floor(log2 |d|) for d != 0.
std::int64_t floor_log2(const Dyadic& d) {
    return d.exponent() +
           static_cast<std::int64_t>(mpz_sizeinbase(d.mantissa().get_mpz_t(), 2)) - 1;
}

// Cached Phi evaluations of one all-ones point at geometric precisions.
class PhiCache {
public:
    PhiCache(const BrjunoSpec& spec, DigitWord head)
        : spec_(spec), head_(std::move(head)) {}

    const Interval& at(std::int64_t prec) {
        auto it = cache_.find(prec);
        if (it == cache_.end())
            it = cache_.emplace(prec, eval_eventually_ones(spec_, head_, prec)).first;
        return it->second;
    }

    const DigitWord& head() const { return head_; }

private:
    const BrjunoSpec& spec_;
    DigitWord head_;
    std::map<std::int64_t, Interval> cache_;
};

// Certified strict comparison of Phi(a) + shift < Phi(b), doubling precision
// from kCertStart up to the budget cap.
Cert certify_shifted_less(PhiCache& a, const Dyadic& shift, PhiCache& b,
                          std::int64_t cap) {
    for (std::int64_t p = kCertStart; p <= cap; p *= 2) {
        if (getenv("BRJUNO_TRACE") && p > 100) fprintf(stderr, "[cert] p=%lld\n", (long long)p);
        const Interval lhs = a.at(p) + Interval(shift);
        const Interval& rhs = b.at(p);
        if (lhs.hi() < rhs.lo()) return Cert::True;
        if (rhs.hi() <= lhs.lo()) return Cert::False;
    }
    return Cert::Unknown;
}

// Certified strict comparison of a dyadic point against Phi(b) + shift.
Cert certify_point_less(const Dyadic& point, PhiCache& b, const Dyadic& shift,
                        std::int64_t cap) {
    for (std::int64_t p = kCertStart; p <= cap; p *= 2) {
        const Interval rhs = b.at(p) + Interval(shift);
        if (point < rhs.lo()) return Cert::True;
        if (rhs.hi() <= point) return Cert::False;
    }
    return Cert::Unknown;
}

Cert certify_phi_less_point(PhiCache& a, const Dyadic& shift, const Dyadic& point,
                            std::int64_t cap) {
    for (std::int64_t p = kCertStart; p <= cap; p *= 2) {
        const Interval lhs = a.at(p) + Interval(shift);
        if (lhs.hi() < point) return Cert::True;
        if (point <= lhs.lo()) return Cert::False;
    }
    return Cert::Unknown;
}

DigitWord extend_head(const DigitWord& head, std::uint64_t ones_before, Digit digit,
                      std::uint64_t ones_after = 0) {
    DigitWord out = head;
    out.insert(out.end(), ones_before, 1);
    out.push_back(digit);
    out.insert(out.end(), ones_after, 1);
    return out;
}

struct InsertChoice {
    std::uint64_t m = 1;
    Digit digit = 1;
};

// Enclosure of Phi over EVERY beta = [head, 1^{m-1}, N, 1, 1, ...] with the
// inserted digit ranging over [n_lo, n_hi]. The digit's point is enclosed by
// the hull of the branch inverses at the fixed point; one backward fold and
// one forward pass then cover the whole block. Constant sign.
Interval phi_insert_range(const BrjunoSpec& spec, const DigitWord& head, std::uint64_t m,
                          Digit n_lo, Digit n_hi, std::int64_t prec) {
    const MapModel& map = *spec.map;
    const std::int64_t wp = prec + 24;
    const Interval phi_pt = fixed_point_phi(map, wp);
    const Interval z_big = map.inverse_branch(n_lo, phi_pt, wp);
    const Interval z_small = map.inverse_branch(n_hi, phi_pt, wp);
    const Interval z = Interval::hull(z_small, z_big);
    // Tail value at the inserted position: u(z) + z^nu Phi([1,1,...]).
    static thread_local std::map<std::pair<const void*, std::int64_t>, Interval> phi_star_cache;
    Interval phi_star;
    auto key = std::make_pair(static_cast<const void*>(spec.map.get()), wp);
    auto it = phi_star_cache.find(key);
    if (it != phi_star_cache.end()) {
        phi_star = it->second;
    } else {
        phi_star = eval_eventually_ones(spec, {}, wp);
        if (phi_star_cache.size() > 1024) phi_star_cache.clear();
        phi_star_cache.emplace(key, phi_star);
    }
    const Interval tail_v =
        spec.weight.eval(z, wp) + iv_pow(z, spec.nu, wp) * phi_star;
    // Backward fold from the insert position through the padding ones and
    // the head, collecting every eta.
    const std::uint64_t len = head.size() + m - 1;
    std::vector<Interval> etas(len + 1);
    Interval w = z;
    for (std::uint64_t i = len; i >= 1; --i) {
        const Digit d = i <= head.size() ? head[i - 1] : 1;
        w = map.inverse_branch(d, w, wp);
        etas[i] = w;
        if (i == 1) break;
    }
    Interval prod(Dyadic(1));
    Interval sum(Dyadic(0));
    for (std::uint64_t i = 1; i <= len; ++i) {
        const Interval ppow = iv_pow(prod, spec.nu, wp);
        const Interval u = spec.weight.eval(etas[i], wp);
        sum = (sum + ppow * u).round_out(wp);
        prod = (prod * etas[i]).round_out(wp);
    }
    const Interval ppow = iv_pow(prod, spec.nu, wp);
    return (sum + ppow * tail_v).round_out(prec);
}

// Searches one padding depth m for an inserted digit with Phi certified
// inside (t_lo, t_hi): doubling blocks of N with certified whole-block
// rejection, then bisection inside blocks that straddle the target.
std::optional<Digit> lane_search(const BrjunoSpec& spec, const DigitWord& head,
                                 std::uint64_t m, const Dyadic& t_lo, const Dyadic& t_hi,
                                 std::int64_t cap, std::uint64_t& evals,
                                 const SearchBudget& budget) {
    const Digit n_cap = Digit(1) << 62;
    std::function<std::optional<Digit>(Digit, Digit)> dive =
        [&](Digit a, Digit b) -> std::optional<Digit> {
        if (++evals > budget.max_mn * 64)
            throw SearchBudgetExceeded("insert search budget exhausted");
        for (std::int64_t p = kCertStart;; p *= 2) {
            if (p > cap) throw SearchBudgetExceeded("insert block certification unresolved");
            const Interval block = phi_insert_range(spec, head, m, a, b, p);
            if (block.hi() <= t_lo || block.lo() >= t_hi) return std::nullopt;  // miss
            if (t_lo < block.lo() && block.hi() < t_hi && a <= b) {
                return a;  // every digit in the block lands inside; take the smallest
            }
            if (a == b) {
                // Single digit, straddling an endpoint: refine until decided.
                continue;
            }
            // Straddles the target boundary: split.
            const Digit mid = a + (b - a) / 2;
            if (auto left = dive(a, mid)) return left;
            return dive(mid + 1, b);
        }
    };
    // Doubling blocks [2,3], [4,7], [8,15], ...
    for (Digit lo = 2; lo < n_cap; lo *= 2) {
        const Digit hi = std::min(n_cap, lo * 2 - 1);
        // Cheap ordering probe: if the whole block is already above the
        // target, larger digits will not help on this lane.
        const Interval probe = phi_insert_range(spec, head, m, lo, hi, kCertStart);
        ++evals;
        if (probe.lo() >= t_hi) return std::nullopt;
        if (probe.hi() <= t_lo) continue;
        if (auto hit = dive(lo, hi)) return hit;
    }
    return std::nullopt;
}

// Finds an inserted digit whose modified point has Phi certified strictly
// inside the absolute dyadic window (t_lo, t_hi). Shallow depths first (they
// carry the smallest digits); each depth is scanned with certified block
// rejection so large digits cost logarithmically.
InsertChoice targeted_insert(const BrjunoSpec& spec, const DigitWord& head,
                             const Dyadic& t_lo, const Dyadic& t_hi, std::uint64_t m_min,
                             std::int64_t cap, const SearchBudget& budget) {
    if (m_min < 1) m_min = 1;
    const std::uint64_t n = head.size();
    std::uint64_t evals = 0;
    for (std::uint64_t m = m_min; m <= m_min + 128; ++m) {
        if (spec.sign.at(n + m) != 1) continue;
        if (auto hit = lane_search(spec, head, m, t_lo, t_hi, cap, evals, budget))
            return InsertChoice{m, *hit};
        // A shallow lane whose smallest digit already overshoots means deeper
        // lanes are needed; one whose largest tested digit undershoots means
        // shallower. Lanes are scanned upward from m_min, so just continue.
    }
    throw SearchBudgetExceeded("no certified insert into the target window");
}

// Deterministic double-precision estimate of log2(eta_1 ... eta_n) for
// the all-ones completion of a head; steers the digit-search start.
double log2_head_product(const BrjunoSpec& spec, const DigitWord& head) {
    const std::int64_t wp = 16;
    Interval z = fixed_point_phi(*spec.map, wp);
    double acc = 0.0;
    for (auto it = head.rbegin(); it != head.rend(); ++it) {
        z = spec.map->inverse_branch(*it, z, wp);
        acc += std::log2(std::max(z.mid().to_double(), 1e-300));
    }
    return acc;
}

// Smallest m worth trying for a target increment eps: below it the inserted
// digit cannot make the step small enough. Biased low; wrong guesses only
// cost cheap certified rejections.
std::uint64_t estimate_m_min(const BrjunoSpec& spec, const DigitWord& head,
                             const Dyadic& eps) {
    const double log2_p = log2_head_product(spec, head);
    const double log2_eps = floor_log2(eps);
    const double log2_phi =
        std::log2(std::max(fixed_point_phi(*spec.map, 16).mid().to_double(), 1e-9));
    if (log2_phi >= 0.0) return 1;
    // The smallest climb a single inserted digit can make at depth m scales
    // like c * P * phi^(m-1); the shallowest depth whose smallest climb fits
    // under 2 eps wastes the least orbit product. c is under-estimated so a
    // too-low guess only costs a few cheap certified rejections.
    const double L = (log2_eps + 1.0) - log2_p - std::log2(0.1);
    if (L >= 0.0) return 1;
    return 1 + static_cast<std::uint64_t>(std::ceil(L / log2_phi));
}

}  // namespace

// ---------------------------------------------------------------------------
// Digit-insertion search

SearchResult518 lemma518_search(const BrjunoSpec& spec, const DigitWord& head,
                                const Dyadic& epsilon, std::uint64_t m_min,
                                std::int64_t prec, const SearchBudget& budget) {
    if (epsilon.sign() <= 0) throw DomainError("epsilon must be positive");
    if (m_min < 1) m_min = 1;
    const std::int64_t cap = std::max(prec, budget.max_prec_bits);
    const Dyadic two_eps = epsilon.mul_pow2(1);
    PhiCache omega(spec, head);
    const std::uint64_t n = head.size();

    for (std::uint64_t total = m_min + 1; total <= m_min + budget.max_mn; ++total) {
        for (Digit N = 1; N + m_min <= total; ++N) {
            const std::uint64_t m = total - N;
            if (m < m_min) break;
            if (spec.sign.at(n + m) != 1) continue;  // need s at the inserted position
            PhiCache beta(spec, extend_head(head, m - 1, N));
            if (getenv("BRJUNO_TRACE")) fprintf(stderr, "[518] head_len=%zu eps=%s total=%llu m=%llu N=%llu\n", head.size(), epsilon.to_string().c_str(), (unsigned long long)total, (unsigned long long)m, (unsigned long long)N);
            // Phi(omega) + eps < Phi(beta)
            const Cert lower = certify_shifted_less(omega, epsilon, beta, cap);
            if (getenv("BRJUNO_TRACE2")) {
                const Interval& po = omega.at(48); const Interval& pb = beta.at(48);
                fprintf(stderr, "[cand] m=%llu N=%llu omega=%.8f beta=%.8f inc=%.8f eps=%.8f lower=%d\n",
                        (unsigned long long)m, (unsigned long long)N, po.lo().to_double(), pb.lo().to_double(),
                        pb.lo().to_double()-po.lo().to_double(), epsilon.to_double(), (int)lower);
            }
            if (lower == Cert::False) continue;
            if (lower == Cert::Unknown)
                throw SearchBudgetExceeded("sandwich lower bound unresolved at precision cap");
            // Phi(beta) < Phi(omega) + 2 eps
            const Cert upper = certify_shifted_less(beta, Dyadic(0) - two_eps, omega, cap);
            if (upper == Cert::False) continue;
            if (upper == Cert::Unknown)
                throw SearchBudgetExceeded("sandwich upper bound unresolved at precision cap");
            SearchResult518 out;
            out.m = m;
            out.n_digit = N;
            out.phi_omega = omega.at(prec);
            out.phi_beta = beta.at(prec);
            return out;
        }
    }
    throw SearchBudgetExceeded("no certified (m, N) within the m+N budget");
}

// ---------------------------------------------------------------------------
// All-ones padding

namespace {

// Enclosure of the all-ones tail sum_{i >= |head| + m} of omega = [head, 1...].
Interval ones_tail(const BrjunoSpec& spec, const ClosedEval& ev, std::uint64_t m,
                   std::int64_t wp) {
    const Interval r = iv_pow(ev.tail_point, spec.nu, wp);
    const Interval q = iv_pow(ev.head_product, spec.nu, wp);
    Interval r_pow(Dyadic(1));
    // r^{m-1} by binary powering of the enclosure.
    std::uint64_t e = m - 1;
    Interval base = r;
    while (e > 0) {
        if (e & 1ULL) r_pow = (r_pow * base).round_out(wp);
        e >>= 1ULL;
        if (e > 0) base = (base * base).round_out(wp);
    }
    const Interval geom = iv_div(Interval(Dyadic(1)), Interval(Dyadic(1)) - r, wp);
    return (q * ev.u_tail_point * r_pow * geom).round_out(wp);
}

}  // namespace

std::uint64_t lemma519_pad(const BrjunoSpec& spec, const DigitWord& head,
                           const Dyadic& epsilon, std::int64_t prec,
                           const SearchBudget& budget) {
    if (epsilon.sign() <= 0) throw DomainError("epsilon must be positive");
    if (!spec.sign.is_constant())
        throw DomainError("the padding bound needs a constant sign");
    const std::uint64_t n = head.size();
    const std::int64_t wp =
        std::max<std::int64_t>(prec, -floor_log2(epsilon) * 2) + 32;
    const ClosedEval ev = eval_eventually_periodic(spec, head, {1}, wp);
    const Dyadic half_eps = epsilon.mul_pow2(-1);

    // Positivity makes the bound vacuous once eps is at least Phi(omega).
    if (Rational(epsilon) >= Rational(ev.value.hi())) return 1;

    // (a) m1: the dropped all-ones tail beyond |head| + m1 is below eps/2.
    std::uint64_t m1 = 1;
    for (;; ++m1) {
        if (m1 > budget.max_pad) throw SearchBudgetExceeded("tail cut did not certify");
        if (ones_tail(spec, ev, m1, wp).hi() < half_eps) break;
    }

    // (b) the first n+m1 terms, each lower-bounded over the whole cylinder
    // [head, 1^{m-1}] (worst case over every continuation), must already
    // carry Phi(omega) - eps; the dropped terms only add nonnegative mass.
    const Rational s0 = spec.map->s0();
    const Dyadic target = ev.value.hi() - epsilon;
    for (std::uint64_t m = m1;; ++m) {
        if (m > m1 + budget.max_pad)
            throw SearchBudgetExceeded("padding certification did not converge");
        DigitWord prefix = head;
        prefix.insert(prefix.end(), m - 1, 1);
        const std::vector<Interval> cyl = suffix_cylinders(*spec.map, prefix, wp);
        Interval prod(Dyadic(1));
        Dyadic sum_lo(0);
        for (std::uint64_t i = 1; i <= n + m1; ++i) {
            // Terms whose cylinder touches s0 contribute their trivial bound 0.
            if (Rational(cyl[i - 1].lo()) > s0) {
                const Interval ppow = iv_pow(prod, spec.nu, wp);
                const Interval u = spec.weight.eval(cyl[i - 1], wp);
                if (ppow.lo().sign() > 0 && u.lo().sign() > 0)
                    sum_lo = (sum_lo + ppow.lo() * u.lo()).floor_to(wp);
            }
            prod = (prod * cyl[i - 1]).round_out(wp);
        }
        if (sum_lo > target) return m;
    }
}

// ---------------------------------------------------------------------------
// Combined step

UniformStep uniform_step(const BrjunoSpec& spec, const DigitWord& head, const Dyadic& epsilon,
                         std::uint64_t m_min, std::uint64_t n_index, std::int64_t prec,
                         const SearchBudget& budget) {
    const SearchResult518 sr = lemma518_search(spec, head, epsilon, m_min, prec, budget);
    const DigitWord extended = extend_head(head, sr.m - 1, sr.n_digit);
    const Dyadic eps_pad = Dyadic::pow2(-static_cast<std::int64_t>(n_index));
    const std::uint64_t pad = lemma519_pad(spec, extended, eps_pad, prec, budget);
    UniformStep out;
    out.m = sr.m;
    out.n_digit = sr.n_digit;
    out.t = pad - 1;
    out.phi_before = sr.phi_omega;
    out.phi_after = sr.phi_beta;
    return out;
}

// ---------------------------------------------------------------------------
// Seeding

namespace {

// Enumerates words with sum(a_i + 1) = total in lex order.
void words_of_weight(std::uint64_t total, DigitWord& current,
                     const std::function<bool(const DigitWord&)>& visit, bool& stop) {
    if (stop) return;
    if (total == 0) {
        if (visit(current)) stop = true;
        return;
    }
    if (total == 1) return;  // parts are >= 2
    for (std::uint64_t part = 2; part <= total; ++part) {
        current.push_back(static_cast<Digit>(part - 1));
        words_of_weight(total - part, current, visit, stop);
        current.pop_back();
        if (stop) return;
    }
}

}  // namespace

DigitWord seed_gamma0(const BrjunoSpec& spec, const Dyadic& y_s, const Dyadic& epsilon,
                      std::int64_t prec, const SearchBudget& budget,
                      const DigitWord& x_star_head) {
    if (epsilon.sign() <= 0) throw DomainError("epsilon must be positive");
    if (!spec.sign.is_constant())
        throw DomainError("seeding needs a constant sign");
    const std::int64_t cap = std::max(prec, budget.max_prec_bits);
    PhiCache inf_point(spec, x_star_head);
    // Require y_s > Phi(x_*) + 2 eps.
    if (certify_point_less(y_s, inf_point, epsilon.mul_pow2(1), cap) != Cert::False)
        throw InfimumViolated("y_s not certified above Phi(x_*) + 2 eps");

    const Dyadic w_lo = y_s - epsilon;
    const Dyadic w_hi = y_s - epsilon.mul_pow2(-1);
    std::uint64_t nodes = 0;
    DigitWord found;
    bool have = false;
    auto visit = [&](const DigitWord& w) {
        ++nodes;
        if (nodes > budget.max_seed_nodes)
            throw SearchBudgetExceeded("seed search budget exhausted");
        PhiCache cand(spec, w);
        if (certify_point_less(w_lo, cand, Dyadic(0), cap) != Cert::True) return false;
        if (certify_phi_less_point(cand, Dyadic(0), w_hi, cap) != Cert::True) return false;
        found = w;
        have = true;
        return true;
    };
    for (std::uint64_t total = 0; total <= 4 * budget.max_mn; ++total) {
        DigitWord current;
        bool stop = false;
        words_of_weight(total, current, visit, stop);
        if (have) return found;
    }
    throw SearchBudgetExceeded("no seed head found in the window");
}

// ---------------------------------------------------------------------------
// The squeeze loop

namespace {

std::string word_json(const DigitWord& w) {
    json j = json::array();
    for (Digit d : w) j.push_back(d);
    return j.dump();
}

json audit_entry(std::uint64_t k, const DigitWord& head, const Interval& phi,
                 const Dyadic& y_sk, const std::string& cert) {
    json j;
    j["k"] = k;
    j["head"] = json::parse(word_json(head));
    j["phi_lo"] = phi.lo().to_decimal(18);
    j["phi_hi"] = phi.hi().to_decimal(18);
    j["y_sk"] = y_sk.to_decimal(18);
    j["cert"] = cert;
    return j;
}

}  // namespace

InvertResult invert(const BrjunoSpec& spec, TargetOracle& oracle, std::uint64_t steps,
                    std::int64_t prec, const SearchBudget& budget,
                    const DigitWord& x_star_head) {
    if (!spec.sign.is_constant())
        throw DomainError("inversion needs a constant sign");
    InvertResult res;
    const std::int64_t cap = std::max(prec, budget.max_prec_bits);

    Dyadic last_pull;
    bool any_pull = false;
    auto pull = [&](std::uint64_t n) -> std::optional<Dyadic> {
        std::optional<Dyadic> y = oracle.pull(n);
        if (y) {
            if (any_pull && *y < last_pull)
                throw OracleNotMonotone("oracle value decreased at pull " + std::to_string(n));
            last_pull = *y;
            any_pull = true;
            res.pulled.push_back(*y);
        }
        return y;
    };

    PhiCache inf_point(spec, x_star_head);

    // Choose s and eps: the first pull certified above Phi(x_*) + 2^-j for
    // the largest feasible j <= 8 fixes eps = 2^-(j+1); the scan then keeps
    // pulling until the oracle's jump falls to eps/2, which keeps each
    // squeeze step's climb commensurate with the orbit product (inserted
    // digits stay small).
    std::optional<std::uint64_t> s;
    Dyadic eps;
    std::uint64_t n = 0;
    while (!s && n < budget.stall_pulls) {
        ++n;
        const std::optional<Dyadic> y = pull(n);
        if (!y) break;
        for (int j = 8; j >= 0; --j) {
            const Dyadic gap = Dyadic::pow2(-j);
            if (certify_point_less(*y, inf_point, gap, cap) == Cert::False) {
                s = n;
                eps = gap.mul_pow2(-1);
                break;
            }
        }
    }
    if (s) {
        const Dyadic jump_target = eps.mul_pow2(-3);
        while (*s + 1 <= budget.stall_pulls) {
            const Dyadic prev = res.pulled[*s - 1];
            const std::optional<Dyadic> y = pull(*s + 1);
            if (!y) break;
            *s += 1;
            if (*y - prev <= jump_target) break;
        }
    }

    if (!s) {
        // Trivial case: the stream never certifies above the infimum.
        res.trivial_case = true;
        res.completed = true;
        res.s = 0;
        res.epsilon = Dyadic(0);
        DigitWord prefix = x_star_head;
        prefix.insert(prefix.end(), std::max<std::uint64_t>(steps, 1), 1);
        res.prefix = prefix;
        res.enclosure = cylinder_enclosure(*spec.map, prefix, prec).enclosure;
        res.phi_final = inf_point.at(prec);
        json j;
        j["cert"] = "trivial";
        j["note"] = "oracle stalled at or below the infimum; returning x_*";
        res.audit.push_back(j.dump());
        return res;
    }

    res.s = *s;
    res.epsilon = eps;
    {
        json j;
        j["cert"] = "seed-window";
        j["s"] = *s;
        j["epsilon"] = eps.to_string();
        res.audit.push_back(j.dump());
    }

    const Dyadic y_s = res.pulled[*s - 1];
    DigitWord head = seed_gamma0(spec, y_s, eps, prec, budget, x_star_head);
    Interval phi_prev = eval_eventually_ones(spec, head, prec);
    res.audit.push_back(audit_entry(0, head, phi_prev, y_s, "(4)").dump());

    for (std::uint64_t k = 1; k <= steps; ++k) {
        const std::optional<Dyadic> yk = pull(*s + k);
        if (!yk) {
            res.completed = false;
            json j;
            j["cert"] = "stall";
            j["k"] = k;
            j["note"] = "oracle exhausted; returning the certified partial prefix";
            res.audit.push_back(j.dump());
            break;
        }
        const Dyadic w_lo = *yk - eps.mul_pow2(-static_cast<std::int64_t>(k) + 0);
        const Dyadic w_hi = *yk - eps.mul_pow2(-static_cast<std::int64_t>(k) - 1);
        // w_lo = y - 2^-k eps, w_hi = y - 2^-(k+1) eps.
        const Dyadic width = w_hi - w_lo;
        const std::int64_t eval_prec =
            std::max<std::int64_t>(prec, -floor_log2(width) + 6);

        std::uint64_t substeps = 0;
        std::int64_t p_local = eval_prec;
        for (;;) {
            if (++substeps > budget.max_substeps)
                throw SearchBudgetExceeded("fine-increase substeps exhausted at k = " +
                                           std::to_string(k));
            const Interval phi = eval_eventually_ones(spec, head, p_local);
            if (phi.lo() > w_lo && phi.hi() < w_hi) {
                phi_prev = phi;
                break;
            }
            if (phi.lo() >= w_hi)
                throw SearchBudgetExceeded("window overshoot at k = " + std::to_string(k));
            const Dyadic margin = width.mul_pow2(-3);
            if (phi.width() > margin || !(phi.hi() < w_hi)) {
                // Too imprecise, or hugging the top edge: refine.
                p_local += 32;
                if (p_local > budget.max_prec_bits + eval_prec)
                    throw SearchBudgetExceeded("window certification stuck at k = " +
                                               std::to_string(k));
                continue;
            }
            // Aim the inserted digit at an absolute target interval: the
            // whole window (minus margins) when the achievable increments
            // are dense enough to hit it, else a partial climb placed so the
            // residual stays a healthy fraction of the remaining room.
            const Dyadic top = w_hi - margin;
            Dyadic t_lo = w_lo + margin;
            if (!(t_lo > phi.hi())) t_lo = phi.hi() + margin;
            // Relative target width (top-phi)/(t_lo-phi) >= ~1.35 admits an
            // insert; 20/(20+7) approximates the reciprocal.
            const bool entry_ok =
                t_lo > phi.hi() &&
                (top - phi.hi()) * Dyadic(20) > (t_lo - phi.lo()) * Dyadic(27);
            Dyadic t_hi = top;
            if (!entry_ok) {
                const Dyadic room = top - phi.hi();
                if (room.sign() <= 0) {
                    p_local += 32;
                    if (p_local > budget.max_prec_bits + eval_prec)
                        throw SearchBudgetExceeded("window certification stuck at k = " +
                                                   std::to_string(k));
                    continue;
                }
                // Climb into (9/16, 13/16) of the room: the residual keeps at
                // least 3/16 of it, so the finishing insert stays sizable.
                t_lo = phi.hi() + (room * Dyadic(9)).mul_pow2(-4);
                t_hi = phi.hi() + (room * Dyadic(13)).mul_pow2(-4);
            }
            Dyadic climb_guess = t_lo - phi.hi();
            if (climb_guess.sign() <= 0) climb_guess = width.mul_pow2(-2);
            const std::uint64_t m_start = estimate_m_min(spec, head, climb_guess);
            if (getenv("BRJUNO_TRACE3"))
                fprintf(stderr,
                        "[st] k=%llu hl=%zu log2P=%.2f entry=%d t_lo=%.6g t_hi=%.6g phi_hi=%.6g m_min=%llu\n",
                        (unsigned long long)k, head.size(), log2_head_product(spec, head),
                        (int)entry_ok, t_lo.to_double(), t_hi.to_double(),
                        phi.hi().to_double(), (unsigned long long)m_start);
            const InsertChoice ins =
                targeted_insert(spec, head, t_lo, t_hi, m_start, cap, budget);
            head = extend_head(head, ins.m - 1, ins.digit);
            json j;
            j["cert"] = "increase";
            j["k"] = k;
            j["m"] = ins.m;
            j["N"] = ins.digit;
            j["target_lo"] = t_lo.to_decimal(18);
            j["target_hi"] = t_hi.to_decimal(18);
            res.audit.push_back(j.dump());
        }
        // Property (6): pad with ones so every further extension stays above
        // Phi(gamma_k) - 2^-k; the pad leaves the point itself unchanged.
        const std::uint64_t pad =
            lemma519_pad(spec, head, Dyadic::pow2(-static_cast<std::int64_t>(k)),
                         eval_prec, budget);
        const std::uint64_t last_pad = pad - 1;
        head.insert(head.end(), last_pad, 1);
        res.audit.push_back(audit_entry(k, head, phi_prev, *yk, "(4)").dump());
        {
            json j;
            j["cert"] = "(6)";
            j["k"] = k;
            j["pad_ones"] = last_pad;
            j["bound"] = "2^-" + std::to_string(k);
            res.audit.push_back(j.dump());
        }
        res.steps_done = k;
        if (k == steps) res.completed = true;
    }

    res.prefix = head;
    res.enclosure = cylinder_enclosure(*spec.map, head, prec).enclosure;
    res.phi_final = phi_prev;
    return res;
}

}  // namespace brjuno
