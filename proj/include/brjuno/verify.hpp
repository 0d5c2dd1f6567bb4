#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brjuno/interval.hpp"
#include "brjuno/map_model.hpp"

namespace brjuno {

/// Positive enclosure of delta_G(N) = G_N^{-1}(phi) - G_{N+1}^{-1}(phi);
/// throws NonPositiveDelta when positivity cannot be certified.
Interval delta_G(const MapModel& map, Digit n, std::int64_t prec);

struct ConditionVerdict {
    enum class Status { Pass, Fail, Unchecked };
    std::string id;      // "i" .. "vii"
    std::string name;    // what the condition states
    Status status = Status::Unchecked;
    std::string detail;
    Digit checked_to = 0;        // certified branch range
    bool tail_certified = false; // closed-form/monotone argument beyond the range
    double worst_margin = 0.0;   // smallest slack observed (exact checks)

    std::string status_string() const;
};

/// Per-condition verdicts for the structural requirements on an expanding
/// full-branch map; a Pass is backed by certified inequalities over the
/// stated range.
struct ConditionReport {
    std::string map_name;
    Digit range = 0;
    std::vector<ConditionVerdict> verdicts;

    bool all_pass() const;
    const ConditionVerdict& verdict(const std::string& id) const;
    std::string to_json() const;
    std::string pretty() const;
};

/// Certifies the structural conditions over branches 1..i_max with the map's
/// declared constants. Failures are verdicts, not exceptions.
ConditionReport verify_conditions(const MapModel& map, Digit i_max, std::int64_t prec);

}  // namespace brjuno
