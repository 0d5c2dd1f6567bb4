#include "brjuno/cf_engine.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include "brjuno/errors.hpp"

namespace brjuno {

std::string word_to_string(const DigitWord& w) {
    std::ostringstream os;
    os << "[";
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (k) os << ",";
        os << w[k];
    }
    os << "]";
    return os.str();
}

// ---------------------------------------------------------------------------
// DigitStream

struct DigitStream::Impl {
    DigitWord head;
    TailKind kind = TailKind::AllOnes;
    DigitWord pattern;  // for Periodic
    std::function<std::optional<Digit>()> next;
    mutable std::vector<Digit> pulled;
    mutable bool exhausted = false;
    mutable std::mutex mutex;

    Digit tail_digit(std::uint64_t t) const {  // t >= 1: index into the tail
        switch (kind) {
            case TailKind::AllOnes:
                return 1;
            case TailKind::Periodic:
                return pattern[(t - 1) % pattern.size()];
            case TailKind::Generator: {
                std::lock_guard<std::mutex> lock(mutex);
                while (pulled.size() < t && !exhausted) {
                    std::optional<Digit> d = next();
                    if (!d.has_value()) {
                        exhausted = true;
                        break;
                    }
                    if (*d < 1) throw InvalidDigit("generator produced digit 0");
                    pulled.push_back(*d);
                }
                if (pulled.size() < t)
                    throw InsufficientDigits("generator exhausted at tail index " +
                                             std::to_string(pulled.size()));
                return pulled[t - 1];
            }
        }
        throw DomainError("unreachable tail kind");
    }
};

DigitStream DigitStream::all_ones(DigitWord head) {
    auto impl = std::make_shared<Impl>();
    impl->head = std::move(head);
    impl->kind = TailKind::AllOnes;
    for (Digit d : impl->head)
        if (d < 1) throw InvalidDigit("digit 0 in head");
    return DigitStream(std::move(impl), 0);
}

DigitStream DigitStream::periodic(DigitWord head, DigitWord pattern) {
    if (pattern.empty()) throw InvalidDigit("empty periodic pattern");
    auto impl = std::make_shared<Impl>();
    impl->head = std::move(head);
    impl->kind = TailKind::Periodic;
    impl->pattern = std::move(pattern);
    for (Digit d : impl->head)
        if (d < 1) throw InvalidDigit("digit 0 in head");
    for (Digit d : impl->pattern)
        if (d < 1) throw InvalidDigit("digit 0 in pattern");
    // All-ones is the canonical form of the constant pattern.
    if (std::all_of(impl->pattern.begin(), impl->pattern.end(), [](Digit d) { return d == 1; }))
        impl->kind = TailKind::AllOnes;
    return DigitStream(std::move(impl), 0);
}

DigitStream DigitStream::generator(DigitWord head, std::function<std::optional<Digit>()> next) {
    auto impl = std::make_shared<Impl>();
    impl->head = std::move(head);
    impl->kind = TailKind::Generator;
    impl->next = std::move(next);
    for (Digit d : impl->head)
        if (d < 1) throw InvalidDigit("digit 0 in head");
    return DigitStream(std::move(impl), 0);
}

Digit DigitStream::digit(std::uint64_t i) const {
    if (i < 1) throw InvalidDigit("digit positions are 1-based");
    const std::uint64_t pos = i + offset_;
    if (pos <= impl_->head.size()) return impl_->head[pos - 1];
    return impl_->tail_digit(pos - impl_->head.size());
}

DigitWord DigitStream::digits(std::uint64_t i, std::uint64_t j) const {
    DigitWord w;
    for (std::uint64_t k = i; k <= j; ++k) w.push_back(digit(k));
    return w;
}

DigitStream DigitStream::shifted(std::uint64_t j) const {
    if (j < 1) throw InvalidDigit("shift index is 1-based");
    return DigitStream(impl_, offset_ + (j - 1));
}

DigitStream::TailKind DigitStream::tail_kind() const { return impl_->kind; }

std::uint64_t DigitStream::head_length() const {
    return offset_ >= impl_->head.size() ? 0 : impl_->head.size() - offset_;
}

DigitWord DigitStream::head_digits() const {
    DigitWord w;
    for (std::uint64_t k = offset_; k < impl_->head.size(); ++k) w.push_back(impl_->head[k]);
    return w;
}

DigitWord DigitStream::tail_pattern() const {
    switch (impl_->kind) {
        case TailKind::AllOnes:
            return {1};
        case TailKind::Periodic: {
            const std::uint64_t p = impl_->pattern.size();
            // Phase shift when the offset has eaten into the tail.
            std::uint64_t phase = 0;
            if (offset_ > impl_->head.size()) phase = (offset_ - impl_->head.size()) % p;
            DigitWord w;
            for (std::uint64_t k = 0; k < p; ++k) w.push_back(impl_->pattern[(phase + k) % p]);
            return w;
        }
        case TailKind::Generator:
            throw DomainError("generator tails have no pattern");
    }
    throw DomainError("unreachable tail kind");
}

DigitStream DigitStream::parse(const std::string& text) {
    auto parse_word = [](const std::string& s) {
        if (s.size() < 2 || s.front() != '[' || s.back() != ']')
            throw ParseError("expected [a1,a2,...]: " + s);
        DigitWord w;
        std::string body = s.substr(1, s.size() - 2);
        if (body.empty()) return w;
        std::istringstream is(body);
        std::string item;
        while (std::getline(is, item, ',')) {
            try {
                const long long v = std::stoll(item);
                if (v < 1) throw ParseError("digits must be >= 1: " + item);
                w.push_back(static_cast<Digit>(v));
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception&) {
                throw ParseError("bad digit: " + item);
            }
        }
        return w;
    };

    DigitWord head;
    std::string rest = text;
    const auto semi = rest.find(';');
    std::string first = semi == std::string::npos ? rest : rest.substr(0, semi);
    std::string second = semi == std::string::npos ? "" : rest.substr(semi + 1);
    if (first.rfind("head=", 0) == 0) {
        head = parse_word(first.substr(5));
        first = second;
    } else if (!second.empty()) {
        throw ParseError("bad digit-stream syntax: " + text);
    }
    if (first.rfind("tail=", 0) != 0) throw ParseError("missing tail= in: " + text);
    const std::string tail = first.substr(5);
    if (tail == "ones") return all_ones(std::move(head));
    if (tail.rfind("periodic:", 0) == 0)
        return periodic(std::move(head), parse_word(tail.substr(9)));
    throw ParseError("unknown tail kind: " + tail);
}

std::string DigitStream::to_string() const {
    std::string s = "head=" + word_to_string(head_digits()) + ";tail=";
    switch (tail_kind()) {
        case TailKind::AllOnes:
            return s + "ones";
        case TailKind::Periodic:
            return s + "periodic:" + word_to_string(tail_pattern());
        case TailKind::Generator:
            return s + "generator";
    }
    return s;
}

// ---------------------------------------------------------------------------
// Cylinders

namespace {

Interval ambient(const MapModel& map, std::int64_t prec) {
    return Interval(map.s0().floor_to(prec), map.s1().ceil_to(prec));
}

std::int64_t bitlen(std::uint64_t n) {
    std::int64_t b = 0;
    while (n > 0) {
        ++b;
        n >>= 1;
    }
    return b;
}

}  // namespace

CylinderInterval cylinder_enclosure(const MapModel& map, const DigitWord& word,
                                    std::int64_t prec) {
    const std::int64_t wp = prec + 8 + 2 * bitlen(word.size());
    Interval e = ambient(map, wp);
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        map.require_branch(*it);
        e = map.inverse_branch(*it, e, wp);
    }
    return CylinderInterval{word, e.round_out(prec)};
}

std::vector<Interval> suffix_cylinders(const MapModel& map, const DigitWord& word,
                                       std::int64_t prec) {
    const std::int64_t wp = prec + 8 + 2 * bitlen(word.size());
    std::vector<Interval> out(word.size() + 1);
    Interval e = ambient(map, wp);
    out[word.size()] = e;
    for (std::size_t k = word.size(); k-- > 0;) {
        map.require_branch(word[k]);
        e = map.inverse_branch(word[k], e, wp);
        out[k] = e;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fixed and periodic points

namespace {

Interval validated_fixed_point(const MapModel& map, const DigitWord& cycle, std::int64_t prec) {
    const std::int64_t wp = prec + 16 + 4 * static_cast<std::int64_t>(cycle.size());
    auto step = [&](const Interval& x) {
        Interval y = x;
        for (auto it = cycle.rbegin(); it != cycle.rend(); ++it)
            y = map.inverse_branch(*it, y, wp);
        return y;
    };
    // Iterate the composed inverse branch from the first branch midpoint.
    const BranchBounds b1 = map.branch_bounds(cycle.front());
    Interval x(((b1.lo + b1.hi) * Rational(1, 2)).floor_to(wp));
    Dyadic prev_mid = x.mid();
    const int max_iter = static_cast<int>(4 * prec + 64);
    for (int it = 0; it < max_iter; ++it) {
        x = Interval(step(x).mid());
        const Dyadic diff = (x.mid() - prev_mid).abs();
        prev_mid = x.mid();
        if (diff < Dyadic::pow2(-prec - 8) && it > 2) break;
        if (it == max_iter - 1)
            throw NoContraction("fixed-point iteration did not settle for " + map.name());
    }
    // Validate by self-inclusion, enlarging the candidate a few times if needed.
    Dyadic delta = Dyadic::pow2(-prec - 4);
    for (int attempt = 0; attempt < 8; ++attempt) {
        const Interval candidate(prev_mid - delta, prev_mid + delta);
        const Interval image = step(candidate);
        if (candidate.contains(image)) {
            return image.round_out(prec + 2);
        }
        delta = delta.mul_pow2(2);
    }
    throw NoContraction("self-inclusion failed for " + map.name());
}

}  // namespace

namespace {

// Validated periodic points are recomputed constantly by the evaluators;
// memoize them per map identity, pattern and precision.
Interval cached_periodic_point(const MapModel& map, const DigitWord& pattern,
                               std::int64_t prec) {
    static std::mutex mutex;
    static std::map<std::string, Interval> cache;
    std::string key = map.identity_key() + "|" + word_to_string(pattern) + "|" +
                      std::to_string(prec);
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    const Interval value = validated_fixed_point(map, pattern, prec);
    std::lock_guard<std::mutex> lock(mutex);
    if (cache.size() > 4096) cache.clear();
    cache.emplace(std::move(key), value);
    return value;
}

}  // namespace

Interval fixed_point_phi(const MapModel& map, std::int64_t prec) {
    if (map.branch_increasing(1))
        throw NoContraction("first branch is not decreasing");
    return cached_periodic_point(map, {1}, prec);
}

Interval periodic_point(const MapModel& map, const DigitWord& pattern, std::int64_t prec) {
    if (pattern.empty()) throw InvalidDigit("empty periodic pattern");
    return cached_periodic_point(map, pattern, prec);
}

Interval eval_point(const MapModel& map, const DigitStream& x, std::int64_t prec) {
    if (x.tail_kind() == DigitStream::TailKind::Generator)
        throw DomainError("eval_point needs an all-ones or periodic tail; "
                          "enclose generator streams via cylinder_enclosure");
    const DigitWord head = x.head_digits();
    for (std::int64_t wp = prec + 12 + 2 * bitlen(head.size());; wp += 32) {
        Interval point = x.tail_kind() == DigitStream::TailKind::AllOnes
                             ? fixed_point_phi(map, wp)
                             : periodic_point(map, x.tail_pattern(), wp);
        for (auto it = head.rbegin(); it != head.rend(); ++it) {
            map.require_branch(*it);
            point = map.inverse_branch(*it, point, wp);
        }
        if (point.width() <= Dyadic::pow2(-prec)) return point.round_out(prec + 2);
        if (wp > prec + 8 * 4096)
            throw DomainError("eval_point failed to reach requested width");
    }
}

std::uint64_t perturbation_bound(const MapModel& map, const DigitWord& word,
                                 const Dyadic& epsilon) {
    if (epsilon.sign() <= 0) throw DomainError("epsilon must be positive");
    const Rational span = map.s1() - map.s0();
    if (Rational(epsilon) >= span) return 0;
    // Smallest M with span / tau^M < epsilon; tau > 1 declared.
    const Rational tau = map.constants().tau;
    Rational power(1);
    std::uint64_t M = 0;
    const Rational eps_r(epsilon);
    while (span / power >= eps_r) {
        power = power * tau;
        ++M;
        if (M > 1u << 20) throw DomainError("perturbation bound did not converge (tau <= 1?)");
    }
    std::uint64_t L = static_cast<std::uint64_t>(map.constants().kappa) * M;
    // A certified cylinder width over the word's own digits may tighten L.
    if (!word.empty() && word.size() < L) {
        const std::int64_t prec = std::max<std::int64_t>(32, -epsilon.exponent() + 8);
        const std::vector<Interval> cyl = suffix_cylinders(map, word, prec);
        // cyl[0] encloses all points sharing the full word.
        if (cyl[0].width() < epsilon) L = word.size();
    }
    return L;
}

}  // namespace brjuno
