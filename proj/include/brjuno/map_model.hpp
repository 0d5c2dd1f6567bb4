#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "brjuno/expr.hpp"
#include "brjuno/interval.hpp"
#include "brjuno/rational.hpp"

namespace brjuno {

using Digit = std::uint64_t;

/// Outward bracket of a branch interval (l_i, r_i). For the built-in maps
/// with closed-form endpoints the bracket is exact.
struct BranchBounds {
    Rational lo, hi;
};

/// Declared structural constants of an expanding full-branch map.
struct MapConstants {
    int kappa = 1;
    Rational tau{3, 2};
    Rational sigma{2, 1};
    Rational big_d{2, 1};
    Rational m_g{2, 1};
};

/// An expanding map of (s0, s1) with countably many surjective branches,
/// ordered leftward: l_1 > l_2 > ... . Instances: the Gauss map x -> {1/x},
/// the alpha-continued-fraction family A_alpha restricted to (0, 1/n1), and
/// user-supplied branch tables.
class MapModel {
public:
    virtual ~MapModel() = default;

    const std::string& name() const { return name_; }
    /// Distinguishes map instances for internal memoization.
    const std::string& identity_key() const { return identity_key_; }
    const Rational& s0() const { return s0_; }
    const Rational& s1() const { return s1_; }
    const MapConstants& constants() const { return constants_; }

    /// 0 means countably infinite branches; otherwise the largest valid digit.
    virtual Digit branch_limit() const { return 0; }
    bool has_branch(Digit i) const {
        return i >= 1 && (branch_limit() == 0 || i <= branch_limit());
    }
    void require_branch(Digit i) const;

    virtual BranchBounds branch_bounds(Digit i) const = 0;
    virtual bool branch_bounds_exact(Digit /*i*/) const { return true; }
    virtual bool branch_increasing(Digit i) const = 0;

    /// Image enclosure of x under the branch-i formula.
    virtual Interval apply_on_branch(Digit i, const Interval& x, std::int64_t prec) const = 0;
    /// Enclosure of G_i^{-1}(y) in J_i.
    virtual Interval inverse_branch(Digit i, const Interval& y, std::int64_t prec) const = 0;

    /// Enclosure of |G'| over x within branch i, when derivative data exists.
    virtual std::optional<Interval> abs_derivative(Digit i, const Interval& x,
                                                   std::int64_t prec) const {
        (void)i; (void)x; (void)prec;
        return std::nullopt;
    }
    /// Closed-form inf over J_i of |G'| (tau_{i,1}); conservative lower bound.
    virtual std::optional<Rational> min_abs_derivative(Digit i) const {
        (void)i;
        return std::nullopt;
    }
    /// Closed-form inf over J_i of |(G^kappa)'| (tau_{i,kappa}).
    virtual std::optional<Rational> min_abs_derivative_kappa(Digit i, int kappa) const {
        (void)i; (void)kappa;
        return std::nullopt;
    }

    virtual bool surjective_by_construction() const { return false; }
    /// Per-branch condition margins are monotone in i, so a range check up to
    /// I_max extends to all branches.
    virtual bool condition_margins_tail_monotone() const { return false; }
    /// Non-empty when the expansion condition should be reported unchecked.
    virtual std::optional<std::string> expansion_caveat() const { return std::nullopt; }

    /// Branch index whose interval contains the point (candidate; callers
    /// validate interval containment).
    virtual Digit locate_branch(const Rational& point) const = 0;

    /// Applies the map to an interval lying within a single branch; throws
    /// BranchStraddle when the interval meets two branches.
    Interval apply(const Interval& x, std::int64_t prec) const;
    /// Branch containing the whole interval, or BranchStraddle.
    Digit branch_of(const Interval& x) const;

    /// g(i) = r_i / l_{i+1} - 1, from the stored brackets (exact for
    /// closed-form maps, a safe upper value for bracketed ones).
    Rational g_of(Digit i) const;

    virtual std::string to_config_json() const = 0;

protected:
    MapModel(std::string name, Rational s0, Rational s1, MapConstants constants)
        : name_(std::move(name)), identity_key_(name_), s0_(std::move(s0)),
          s1_(std::move(s1)), constants_(std::move(constants)) {}

    void set_identity_key(std::string key) { identity_key_ = std::move(key); }

private:
    std::string name_;
    std::string identity_key_;
    Rational s0_, s1_;
    MapConstants constants_;
};

/// G(x) = 1/x - i on J_i = (1/(i+1), 1/i).
class GaussMap final : public MapModel {
public:
    explicit GaussMap(std::optional<MapConstants> constants = std::nullopt);

    BranchBounds branch_bounds(Digit i) const override;
    bool branch_increasing(Digit) const override { return false; }
    Interval apply_on_branch(Digit i, const Interval& x, std::int64_t prec) const override;
    Interval inverse_branch(Digit i, const Interval& y, std::int64_t prec) const override;
    std::optional<Interval> abs_derivative(Digit i, const Interval& x,
                                           std::int64_t prec) const override;
    std::optional<Rational> min_abs_derivative(Digit i) const override;
    std::optional<Rational> min_abs_derivative_kappa(Digit i, int kappa) const override;
    bool surjective_by_construction() const override { return true; }
    bool condition_margins_tail_monotone() const override { return true; }
    Digit locate_branch(const Rational& point) const override;
    std::string to_config_json() const override;
};

/// The alpha-continued-fraction map restricted to (0, 1/n1) with
/// n1 = ceil(1/(1-alpha)). Branch j uses the half-case formula
///   odd j:  x -> 1/x - q_j,   q_j = (j + 2 n1 - 1)/2   (decreasing)
///   even j: x -> q_j - 1/x,   q_j = (j + 2 n1)/2       (increasing)
/// with endpoint brackets (2/(j+2n1), 2/(j+2n1-1)); the brackets are exact
/// exactly when n1 = 2 (alpha = 1/2).
class AlphaCFMap final : public MapModel {
public:
    AlphaCFMap(Rational alpha, std::optional<Digit> n1_override = std::nullopt,
               std::optional<MapConstants> constants = std::nullopt);

    const Rational& alpha() const { return alpha_; }
    Digit n1() const { return n1_; }
    bool n1_overridden() const { return n1_overridden_; }

    BranchBounds branch_bounds(Digit i) const override;
    bool branch_bounds_exact(Digit) const override { return n1_ == 2; }
    bool branch_increasing(Digit i) const override { return i % 2 == 0; }
    Interval apply_on_branch(Digit i, const Interval& x, std::int64_t prec) const override;
    Interval inverse_branch(Digit i, const Interval& y, std::int64_t prec) const override;
    std::optional<Interval> abs_derivative(Digit i, const Interval& x,
                                           std::int64_t prec) const override;
    std::optional<Rational> min_abs_derivative(Digit i) const override;
    std::optional<Rational> min_abs_derivative_kappa(Digit i, int kappa) const override;
    bool surjective_by_construction() const override { return true; }
    bool condition_margins_tail_monotone() const override { return n1_ == 2; }
    std::optional<std::string> expansion_caveat() const override;
    Digit locate_branch(const Rational& point) const override;
    std::string to_config_json() const override;

private:
    Rational branch_q(Digit i) const;

    Rational alpha_;
    Digit n1_;
    bool n1_overridden_;
};

/// User-supplied finite branch table; every branch carries its own forward
/// and inverse formulas as expression trees.
class CustomMap final : public MapModel {
public:
    struct Branch {
        Rational lo, hi;
        Expr forward;
        Expr inverse;
        bool increasing = false;
    };

    CustomMap(std::string name, Rational s0, Rational s1, MapConstants constants,
              std::vector<Branch> branches);

    Digit branch_limit() const override { return branches_.size(); }
    BranchBounds branch_bounds(Digit i) const override;
    bool branch_increasing(Digit i) const override;
    Interval apply_on_branch(Digit i, const Interval& x, std::int64_t prec) const override;
    Interval inverse_branch(Digit i, const Interval& y, std::int64_t prec) const override;
    std::optional<Interval> abs_derivative(Digit i, const Interval& x,
                                           std::int64_t prec) const override;
    Digit locate_branch(const Rational& point) const override;
    std::string to_config_json() const override;

private:
    std::vector<Branch> branches_;
};

/// Builds a map from its JSON config:
///   {"type":"gauss"} | {"type":"alpha_cf","alpha":"1/2","n1_override":null}
///   | {"type":"custom", ...branch table...}
/// Optional keys "kappa","tau","sigma","D","m_g" override declared constants.
std::shared_ptr<const MapModel> map_from_json(const std::string& text);

}  // namespace brjuno
