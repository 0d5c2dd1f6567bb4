#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "brjuno/interval.hpp"
#include "brjuno/map_model.hpp"

namespace brjuno {

/// Finite digit word (a_1, ..., a_n); empty word = full space.
using DigitWord = std::vector<Digit>;

std::string word_to_string(const DigitWord& w);

/// Symbolic representation of a point of the invariant set: a finite head
/// followed by a tail that is all ones, periodic, or produced on demand by a
/// pull-based supplier. Generator tails are memoized, so re-reads of
/// already-pulled digits are safe from any thread; fresh pulls are
/// single-consumer.
class DigitStream {
public:
    enum class TailKind { AllOnes, Periodic, Generator };

    static DigitStream all_ones(DigitWord head = {});
    static DigitStream periodic(DigitWord head, DigitWord pattern);
    /// The supplier returns successive digits after the head, or nullopt when
    /// the stream is exhausted (reads beyond raise InsufficientDigits).
    static DigitStream generator(DigitWord head, std::function<std::optional<Digit>()> next);

    /// 1-based digit access; pulls and memoizes as needed.
    Digit digit(std::uint64_t i) const;
    /// Digits i..j as a word.
    DigitWord digits(std::uint64_t i, std::uint64_t j) const;

    /// eta_j: drops the first j-1 digits; shift(1) is the identity.
    DigitStream shifted(std::uint64_t j) const;

    TailKind tail_kind() const;
    /// Number of explicit head digits remaining after the shift offset.
    std::uint64_t head_length() const;
    /// Effective head (offset applied).
    DigitWord head_digits() const;
    /// Tail pattern rotated to the current phase; {1} for all-ones.
    DigitWord tail_pattern() const;

    /// Parses `head=[a1,a2,...];tail=ones` or `tail=periodic:[b1,...]`.
    static DigitStream parse(const std::string& text);
    std::string to_string() const;

private:
    struct Impl;
    DigitStream(std::shared_ptr<Impl> impl, std::uint64_t offset)
        : impl_(std::move(impl)), offset_(offset) {}

    std::shared_ptr<Impl> impl_;
    std::uint64_t offset_ = 0;  // digits dropped from the front
};

/// A finite digit word together with a certified enclosure of the set of
/// points whose expansion starts with it.
struct CylinderInterval {
    DigitWord word;
    Interval enclosure;
};

/// Image of (s0, s1) under the composed inverse branches of the word,
/// outward-rounded. Empty word gives the full ambient interval.
CylinderInterval cylinder_enclosure(const MapModel& map, const DigitWord& word,
                                    std::int64_t prec);

/// Enclosures of eta_i for i = 1..word.size(): position i holds the image of
/// (s0, s1) under the inverse branches of word[i-1..end]. One backward pass.
std::vector<Interval> suffix_cylinders(const MapModel& map, const DigitWord& word,
                                       std::int64_t prec);

/// Enclosure of the fixed point of the first branch, width <= 2^-prec,
/// validated by interval self-inclusion of the inverse branch. Requires the
/// first branch to be decreasing; throws NoContraction when validation fails.
Interval fixed_point_phi(const MapModel& map, std::int64_t prec);

/// Enclosure of the periodic point with the given repeating pattern,
/// validated by self-inclusion of the composed inverse branches.
Interval periodic_point(const MapModel& map, const DigitWord& pattern, std::int64_t prec);

/// Enclosure (width <= 2^-prec) of the unique point with the stream's
/// symbolic representation. Only all-ones and periodic tails determine a
/// point exactly; generator tails get enclosures via cylinder_enclosure of
/// finite prefixes instead.
Interval eval_point(const MapModel& map, const DigitStream& x, std::int64_t prec);

/// Position L such that replacing any single digit at a position > L (keeping
/// the others) moves the point by less than epsilon. Computed from the
/// declared expansion constants, L = kappa * M with (s1-s0)/tau^M < epsilon;
/// when a word is supplied, a certified cylinder width may tighten L.
std::uint64_t perturbation_bound(const MapModel& map, const DigitWord& word,
                                 const Dyadic& epsilon);

}  // namespace brjuno
