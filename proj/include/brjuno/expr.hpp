#pragma once

#include <memory>
#include <string>

#include "brjuno/interval.hpp"
#include "brjuno/rational.hpp"

namespace brjuno {

/// Expression tree over field operations and log, in one variable.
/// Supplies certified interval evaluation and a symbolic derivative;
/// custom maps and weights are admitted through this type, which is also
/// their computability witness.
class Expr {
public:
    static Expr var();
    static Expr constant(Rational value);
    static Expr add(Expr a, Expr b);
    static Expr sub(Expr a, Expr b);
    static Expr mul(Expr a, Expr b);
    static Expr div(Expr a, Expr b);
    static Expr neg(Expr a);
    /// log(a)
    static Expr log(Expr a);

    /// Certified enclosure of the expression over x.
    Interval eval(const Interval& x, std::int64_t prec) const;

    /// Symbolic derivative.
    Expr derivative() const;

    /// Parses the JSON encoding, e.g.
    ///   {"op":"div","a":{"op":"const","v":"1"},"b":{"op":"x"}}
    static Expr from_json_text(const std::string& text);
    std::string to_json_text() const;

    struct Node;  // opaque; defined in expr.cpp
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<const Node> node_;
};

}  // namespace brjuno
