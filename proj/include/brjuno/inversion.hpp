#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "brjuno/brjuno_eval.hpp"
#include "brjuno/cf_engine.hpp"
#include "brjuno/dyadic.hpp"

namespace brjuno {

/// Monotone stream of exact dyadic lower approximations y_n converging up to
/// the target value. pull(n) is 1-based and called with increasing n; nullopt
/// signals that the stream is exhausted (treated as a stall).
class TargetOracle {
public:
    virtual ~TargetOracle() = default;
    virtual std::optional<Dyadic> pull(std::uint64_t n) = 0;
};

/// Oracle over a fixed vector of values.
class VectorOracle final : public TargetOracle {
public:
    explicit VectorOracle(std::vector<Dyadic> values) : values_(std::move(values)) {}
    std::optional<Dyadic> pull(std::uint64_t n) override {
        if (n < 1 || n > values_.size()) return std::nullopt;
        return values_[n - 1];
    }

private:
    std::vector<Dyadic> values_;
};

/// Oracle from a callback (used by the CLI stdin reader and the bindings).
class CallbackOracle final : public TargetOracle {
public:
    explicit CallbackOracle(std::function<std::optional<Dyadic>(std::uint64_t)> fn)
        : fn_(std::move(fn)) {}
    std::optional<Dyadic> pull(std::uint64_t n) override { return fn_(n); }

private:
    std::function<std::optional<Dyadic>(std::uint64_t)> fn_;
};

/// Budgets for the searches and strictness certifications.
struct SearchBudget {
    std::uint64_t max_mn = 4096;          // cap on m+N in the digit search
    std::int64_t max_prec_bits = 4096;    // cap on certification precision (2^12)
    std::uint64_t max_pad = 1u << 16;     // cap on the all-ones padding length
    std::uint64_t max_seed_nodes = 200000;
    std::uint64_t stall_pulls = 64;       // oracle pulls before the trivial branch
    std::uint64_t max_substeps = 256;     // fine-increase steps per iteration
};

/// Certified sandwich for the digit-insertion search.
struct SearchResult518 {
    std::uint64_t m = 0;  // the inserted digit sits at position |head| + m
    Digit n_digit = 1;
    Interval phi_omega;   // Phi([head, 1, 1, ...])
    Interval phi_beta;    // Phi of the modified point, certified inside the sandwich
};

/// Finds (m >= m_min, N) with Phi(omega) + eps < Phi(beta^N) < Phi(omega) + 2 eps,
/// where beta^N has the head, then ones, then N at position |head| + m, then
/// ones. Enumeration is diagonal by m+N with N inner; strictness is certified
/// by precision doubling (SearchBudgetExceeded on unresolved ties or caps).
/// Non-constant signs are admitted by skipping positions with s(|head|+m) != +1.
SearchResult518 lemma518_search(const BrjunoSpec& spec, const DigitWord& head,
                                const Dyadic& epsilon, std::uint64_t m_min,
                                std::int64_t prec, const SearchBudget& budget = {});

/// Smallest certified m0 such that EVERY continuation after
/// [head, 1^{m0 - 1}] satisfies Phi > Phi([head, 1, 1, ...]) - eps. The
/// for-all side is certified from worst-case cylinder lower bounds, not by
/// sampling tails. Constant sign only.
std::uint64_t lemma519_pad(const BrjunoSpec& spec, const DigitWord& head,
                           const Dyadic& epsilon, std::int64_t prec,
                           const SearchBudget& budget = {});

/// One uniform step: the digit search at eps plus the padding at 2^-n_index
/// applied to the extended head. Appending [1^{m-1}, N, 1^t] to the head
/// raises Phi by an amount in (eps, 2 eps) and protects every further
/// extension from dropping below the new value by more than 2^-n_index.
struct UniformStep {
    std::uint64_t m = 0;
    std::uint64_t t = 0;
    Digit n_digit = 1;
    Interval phi_before, phi_after;
};
UniformStep uniform_step(const BrjunoSpec& spec, const DigitWord& head, const Dyadic& epsilon,
                         std::uint64_t m_min, std::uint64_t n_index, std::int64_t prec,
                         const SearchBudget& budget = {});

/// Breadth-first search (ordered by head length plus digit sum, then lex) for
/// a finite head with y_s - eps < Phi([head, 1, 1, ...]) < y_s - eps/2.
/// Requires certified y_s > Phi(x_*) + 2 eps (InfimumViolated otherwise).
DigitWord seed_gamma0(const BrjunoSpec& spec, const Dyadic& y_s, const Dyadic& epsilon,
                      std::int64_t prec, const SearchBudget& budget = {},
                      const DigitWord& x_star_head = {});

/// Outcome of the squeeze loop.
struct InvertResult {
    DigitWord prefix;           // I_K
    Interval enclosure;         // point enclosure from the prefix cylinder
    Interval phi_final;         // Phi(gamma_K)
    bool trivial_case = false;  // oracle stalled at or below the infimum
    bool completed = false;     // every requested step certified
    std::uint64_t steps_done = 0;
    std::uint64_t s = 0;        // oracle offset chosen by the scan
    Dyadic epsilon;
    std::vector<Dyadic> pulled;
    std::vector<std::string> audit;  // one JSON object per line
};

/// Runs the squeeze loop for K iterations: maintains
///   y_{s+k} - 2^-k eps < Phi(gamma_k) < y_{s+k} - 2^-(k+1) eps
/// with gamma_k = [I_k, 1, 1, ...], extending the prefix only. A stalled
/// oracle (never certified above Phi(x_*) + 2 eps) returns the digits of x_*.
/// Constant sign only.
InvertResult invert(const BrjunoSpec& spec, TargetOracle& oracle, std::uint64_t steps,
                    std::int64_t prec, const SearchBudget& budget = {},
                    const DigitWord& x_star_head = {});

}  // namespace brjuno
