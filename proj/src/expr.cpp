#include "brjuno/expr.hpp"

#include <nlohmann/json.hpp>

#include "brjuno/errors.hpp"

namespace brjuno {

namespace {
using json = nlohmann::ordered_json;
}

struct Expr::Node {
    enum class Op { Var, Const, Add, Sub, Mul, Div, Neg, Log };
    Op op;
    Rational value;
    std::shared_ptr<const Node> a, b;
};

Expr Expr::var() {
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Var;
    return Expr(n);
}

Expr Expr::constant(Rational value) {
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Const;
    n->value = std::move(value);
    return Expr(n);
}

namespace {
std::shared_ptr<const Expr::Node> binary(Expr::Node::Op op, std::shared_ptr<const Expr::Node> a,
                                         std::shared_ptr<const Expr::Node> b) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}
}  // namespace

Expr Expr::add(Expr a, Expr b) { return Expr(binary(Node::Op::Add, a.node_, b.node_)); }
Expr Expr::sub(Expr a, Expr b) { return Expr(binary(Node::Op::Sub, a.node_, b.node_)); }
Expr Expr::mul(Expr a, Expr b) { return Expr(binary(Node::Op::Mul, a.node_, b.node_)); }
Expr Expr::div(Expr a, Expr b) { return Expr(binary(Node::Op::Div, a.node_, b.node_)); }
Expr Expr::neg(Expr a) { return Expr(binary(Node::Op::Neg, a.node_, nullptr)); }
Expr Expr::log(Expr a) { return Expr(binary(Node::Op::Log, a.node_, nullptr)); }

namespace {

Interval eval_node(const Expr::Node& n, const Interval& x, std::int64_t prec) {
    using Op = Expr::Node::Op;
    switch (n.op) {
        case Op::Var:
            return x;
        case Op::Const:
            return Interval::of_rational(n.value, prec + 8);
        case Op::Add:
            return eval_node(*n.a, x, prec) + eval_node(*n.b, x, prec);
        case Op::Sub:
            return eval_node(*n.a, x, prec) - eval_node(*n.b, x, prec);
        case Op::Mul:
            return (eval_node(*n.a, x, prec) * eval_node(*n.b, x, prec)).round_out(prec + 8);
        case Op::Div:
            return iv_div(eval_node(*n.a, x, prec), eval_node(*n.b, x, prec), prec + 8);
        case Op::Neg:
            return -eval_node(*n.a, x, prec);
        case Op::Log:
            return iv_log(eval_node(*n.a, x, prec), prec + 8);
    }
    throw DomainError("unreachable expression op");
}

}  // namespace

Interval Expr::eval(const Interval& x, std::int64_t prec) const {
    return eval_node(*node_, x, prec).round_out(prec);
}

Expr Expr::derivative() const {
    using Op = Node::Op;
    const Node& n = *node_;
    switch (n.op) {
        case Op::Var:
            return constant(Rational(1));
        case Op::Const:
            return constant(Rational(0));
        case Op::Add:
            return add(Expr(n.a).derivative(), Expr(n.b).derivative());
        case Op::Sub:
            return sub(Expr(n.a).derivative(), Expr(n.b).derivative());
        case Op::Mul:
            return add(mul(Expr(n.a).derivative(), Expr(n.b)), mul(Expr(n.a), Expr(n.b).derivative()));
        case Op::Div:
            return div(sub(mul(Expr(n.a).derivative(), Expr(n.b)),
                           mul(Expr(n.a), Expr(n.b).derivative())),
                       mul(Expr(n.b), Expr(n.b)));
        case Op::Neg:
            return neg(Expr(n.a).derivative());
        case Op::Log:
            return div(Expr(n.a).derivative(), Expr(n.a));
    }
    throw DomainError("unreachable expression op");
}

namespace {

json node_to_json(const Expr::Node& n);

Expr node_from_json(const json& j) {
    if (!j.is_object() || !j.contains("op")) throw ParseError("expression node must have an op");
    const std::string op = j.at("op").get<std::string>();
    if (op == "x") return Expr::var();
    if (op == "const") return Expr::constant(Rational::parse(j.at("v").get<std::string>()));
    if (op == "neg") return Expr::neg(node_from_json(j.at("a")));
    if (op == "log") return Expr::log(node_from_json(j.at("a")));
    Expr a = node_from_json(j.at("a"));
    Expr b = node_from_json(j.at("b"));
    if (op == "add") return Expr::add(a, b);
    if (op == "sub") return Expr::sub(a, b);
    if (op == "mul") return Expr::mul(a, b);
    if (op == "div") return Expr::div(a, b);
    throw ParseError("unknown expression op: " + op);
}

}  // namespace

Expr Expr::from_json_text(const std::string& text) {
    try {
        return node_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad expression JSON: ") + e.what());
    }
}

namespace {

const char* op_name(Expr::Node::Op op) {
    using Op = Expr::Node::Op;
    switch (op) {
        case Op::Var: return "x";
        case Op::Const: return "const";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
        case Op::Neg: return "neg";
        case Op::Log: return "log";
    }
    return "?";
}

json node_to_json(const Expr::Node& n) {
    using Op = Expr::Node::Op;
    json j;
    j["op"] = op_name(n.op);
    if (n.op == Op::Const) j["v"] = n.value.to_string();
    if (n.a) j["a"] = node_to_json(*n.a);
    if (n.b) j["b"] = node_to_json(*n.b);
    return j;
}

}  // namespace

std::string Expr::to_json_text() const { return node_to_json(*node_).dump(); }

}  // namespace brjuno
