#include "holoflow/field.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace holoflow {

namespace {

NodePtr make(NodeKind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
}

NodePtr constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Constant;
    n->value = v;
    return n;
}

NodePtr unary(NodeKind k, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    return n;
}

NodePtr binary(NodeKind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr power(NodePtr base, int exponent) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Pow;
    n->exponent = exponent;
    n->a = std::move(base);
    return n;
}

bool is_const(const NodePtr& n, double v) {
    return n->kind == NodeKind::Constant && n->value == v;
}

// Sign folding keeps Neg away from Constant so canonical printing round-trips.
NodePtr neg(NodePtr a) {
    if (a->kind == NodeKind::Constant) return constant(-a->value);
    if (a->kind == NodeKind::Neg) return a->a;
    return unary(NodeKind::Neg, std::move(a));
}

// Neutral-element simplification only; correctness over compactness.
NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a, 0)) return b;
    if (is_const(b, 0)) return a;
    return binary(NodeKind::Add, std::move(a), std::move(b));
}

NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0)) return a;
    if (is_const(a, 0)) return neg(std::move(b));
    return binary(NodeKind::Sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0) || is_const(b, 0)) return constant(0);
    if (is_const(a, 1)) return b;
    if (is_const(b, 1)) return a;
    return binary(NodeKind::Mul, std::move(a), std::move(b));
}

NodePtr divide(NodePtr a, NodePtr b) {
    if (is_const(a, 0)) return constant(0);
    if (is_const(b, 1)) return a;
    return binary(NodeKind::Div, std::move(a), std::move(b));
}

NodePtr pow_node(NodePtr base, int e) {
    if (e == 0) return constant(1);
    if (e == 1) return base;
    return power(std::move(base), e);
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over the grammar
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' integer)?
//   unary  := '-'? atom
//   atom   := number | 'i' | 'pi' | 'e' | 'x' | func '(' expr ')' | '(' expr ')'
//   func   := 'exp' | 'sin' | 'cos'
// ---------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr run() {
        skip_ws();
        if (pos_ >= src_.size()) throw SyntaxError("empty expression", pos_);
        NodePtr e = expr();
        skip_ws();
        if (pos_ < src_.size()) throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (consume('+')) lhs = binary(NodeKind::Add, lhs, term());
            else if (consume('-')) lhs = binary(NodeKind::Sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = factor();
        for (;;) {
            if (consume('*')) lhs = binary(NodeKind::Mul, lhs, factor());
            else if (consume('/')) lhs = binary(NodeKind::Div, lhs, factor());
            else return lhs;
        }
    }

    NodePtr factor() {
        NodePtr base = unary_rule();
        if (consume('^')) {
            skip_ws();
            int e = integer();
            return power(base, e);
        }
        return base;
    }

    NodePtr unary_rule() {
        if (consume('-')) return neg(atom());
        return atom();
    }

    int integer() {
        std::size_t start = pos_;
        bool negative = false;
        if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) {
            negative = src_[pos_] == '-';
            ++pos_;
        }
        if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
            throw SyntaxError("expected integer exponent", pos_);
        long v = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            v = v * 10 + (src_[pos_] - '0');
            if (v > 1000000) throw SyntaxError("exponent too large", start);
            ++pos_;
        }
        return static_cast<int>(negative ? -v : v);
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!consume(')')) throw SyntaxError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    NodePtr number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        // Exponent is consumed only when unambiguous ('e' followed by digits),
        // so "2*e" still refers to Euler's constant.
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t probe = pos_ + 1;
            if (probe < src_.size() && (src_[probe] == '+' || src_[probe] == '-')) ++probe;
            if (probe < src_.size() && std::isdigit(static_cast<unsigned char>(src_[probe]))) {
                pos_ = probe;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        double v = 0;
        auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc{} || res.ptr != src_.data() + pos_)
            throw SyntaxError("malformed number", start);
        return constant(v);
    }

    NodePtr identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);
        if (name == "x") return make(NodeKind::Variable);
        if (name == "i") return make(NodeKind::ImagUnit);
        if (name == "pi") return constant(std::numbers::pi);
        if (name == "e") return constant(std::numbers::e);
        NodeKind fk;
        if (name == "exp") fk = NodeKind::Exp;
        else if (name == "sin") fk = NodeKind::Sin;
        else if (name == "cos") fk = NodeKind::Cos;
        else throw UnknownIdentifier(std::string(name), start);
        if (!consume('(')) throw SyntaxError("expected '(' after function name", pos_);
        NodePtr arg = expr();
        if (!consume(')')) throw SyntaxError("expected ')'", pos_);
        return unary(fk, std::move(arg));
    }
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Complex pow_by_squaring(Complex base, int e) {
    if (e == 0) return {1.0, 0.0};
    bool inv = e < 0;
    unsigned n = inv ? static_cast<unsigned>(-(long long)e) : static_cast<unsigned>(e);
    Complex acc{1.0, 0.0}, p = base;
    while (n) {
        if (n & 1u) acc *= p;
        p *= p;
        n >>= 1;
    }
    if (inv) {
        if (acc == Complex{0.0, 0.0}) throw DivisionByZero("zero base with negative exponent");
        return Complex{1.0, 0.0} / acc;
    }
    return acc;
}

Complex eval_node(const Node& n, Complex z) {
    switch (n.kind) {
        case NodeKind::Constant: return {n.value, 0.0};
        case NodeKind::ImagUnit: return {0.0, 1.0};
        case NodeKind::Variable: return z;
        case NodeKind::Add: return eval_node(*n.a, z) + eval_node(*n.b, z);
        case NodeKind::Sub: return eval_node(*n.a, z) - eval_node(*n.b, z);
        case NodeKind::Mul: return eval_node(*n.a, z) * eval_node(*n.b, z);
        case NodeKind::Div: {
            Complex den = eval_node(*n.b, z);
            if (den == Complex{0.0, 0.0}) throw DivisionByZero("division by zero");
            return eval_node(*n.a, z) / den;
        }
        case NodeKind::Pow: return pow_by_squaring(eval_node(*n.a, z), n.exponent);
        case NodeKind::Neg: return -eval_node(*n.a, z);
        case NodeKind::Exp: return std::exp(eval_node(*n.a, z));
        case NodeKind::Sin: return std::sin(eval_node(*n.a, z));
        case NodeKind::Cos: return std::cos(eval_node(*n.a, z));
    }
    throw Error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Symbolic differentiation
// ---------------------------------------------------------------------------

NodePtr diff(const NodePtr& n) {
    switch (n->kind) {
        case NodeKind::Constant:
        case NodeKind::ImagUnit: return constant(0);
        case NodeKind::Variable: return constant(1);
        case NodeKind::Add: return add(diff(n->a), diff(n->b));
        case NodeKind::Sub: return sub(diff(n->a), diff(n->b));
        case NodeKind::Mul: return add(mul(diff(n->a), n->b), mul(n->a, diff(n->b)));
        case NodeKind::Div:
            return divide(sub(mul(diff(n->a), n->b), mul(n->a, diff(n->b))),
                          pow_node(n->b, 2));
        case NodeKind::Pow:
            return mul(mul(constant(n->exponent), pow_node(n->a, n->exponent - 1)), diff(n->a));
        case NodeKind::Neg: return neg(diff(n->a));
        case NodeKind::Exp: return mul(unary(NodeKind::Exp, n->a), diff(n->a));
        case NodeKind::Sin: return mul(unary(NodeKind::Cos, n->a), diff(n->a));
        case NodeKind::Cos: return neg(mul(unary(NodeKind::Sin, n->a), diff(n->a)));
    }
    throw Error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Canonical printing. Levels mirror the grammar nonterminals:
//   expr=1, term=2, pow=3, unary=4, atom=5.
// A node printed into a context requiring level L gets parentheses when its
// own level is below L.
// ---------------------------------------------------------------------------

int node_level(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Pow: return 3;
        case NodeKind::Neg: return 4;
        case NodeKind::Constant: return n.value < 0 ? 4 : 5;  // "-3" parses as unary
        default: return 5;
    }
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void print_node(const Node& n, int min_level, std::string& out) {
    bool parens = node_level(n) < min_level;
    if (parens) out += '(';
    switch (n.kind) {
        case NodeKind::Constant: out += format_double(n.value); break;
        case NodeKind::ImagUnit: out += 'i'; break;
        case NodeKind::Variable: out += 'x'; break;
        case NodeKind::Add:
            print_node(*n.a, 1, out);
            out += '+';
            print_node(*n.b, 2, out);
            break;
        case NodeKind::Sub:
            print_node(*n.a, 1, out);
            out += '-';
            print_node(*n.b, 2, out);
            break;
        case NodeKind::Mul:
            print_node(*n.a, 2, out);
            out += '*';
            print_node(*n.b, 3, out);
            break;
        case NodeKind::Div:
            print_node(*n.a, 2, out);
            out += '/';
            print_node(*n.b, 3, out);
            break;
        case NodeKind::Pow:
            print_node(*n.a, 4, out);
            out += '^';
            out += std::to_string(n.exponent);
            break;
        case NodeKind::Neg:
            out += '-';
            print_node(*n.a, 5, out);
            break;
        case NodeKind::Exp:
        case NodeKind::Sin:
        case NodeKind::Cos:
            out += n.kind == NodeKind::Exp ? "exp(" : (n.kind == NodeKind::Sin ? "sin(" : "cos(");
            print_node(*n.a, 1, out);
            out += ')';
            break;
    }
    if (parens) out += ')';
}

bool node_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Constant: return a.value == b.value;
        case NodeKind::Pow:
            return a.exponent == b.exponent && node_equal(*a.a, *b.a);
        case NodeKind::ImagUnit:
        case NodeKind::Variable: return true;
        case NodeKind::Neg:
        case NodeKind::Exp:
        case NodeKind::Sin:
        case NodeKind::Cos: return node_equal(*a.a, *b.a);
        default: return node_equal(*a.a, *b.a) && node_equal(*a.b, *b.b);
    }
}

bool node_has_division(const Node& n) {
    if (n.kind == NodeKind::Div) return true;
    if (n.kind == NodeKind::Pow && n.exponent < 0) return true;
    if (n.a && node_has_division(*n.a)) return true;
    if (n.b && node_has_division(*n.b)) return true;
    return false;
}

using Poly = std::vector<Complex>;  // coefficients, ascending degree

void poly_trim(Poly& p) {
    while (p.size() > 1 && std::abs(p.back()) == 0.0) p.pop_back();
}

std::optional<Poly> poly_mul(const Poly& a, const Poly& b, int max_degree) {
    if (static_cast<int>(a.size() + b.size()) - 2 > max_degree) return std::nullopt;
    Poly out(a.size() + b.size() - 1, Complex{0, 0});
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    poly_trim(out);
    return out;
}

std::optional<Poly> poly_of(const Node& n, int max_degree) {
    switch (n.kind) {
        case NodeKind::Constant: return Poly{Complex{n.value, 0}};
        case NodeKind::ImagUnit: return Poly{Complex{0, 1}};
        case NodeKind::Variable: return Poly{Complex{0, 0}, Complex{1, 0}};
        case NodeKind::Add:
        case NodeKind::Sub: {
            auto a = poly_of(*n.a, max_degree), b = poly_of(*n.b, max_degree);
            if (!a || !b) return std::nullopt;
            Poly out(std::max(a->size(), b->size()), Complex{0, 0});
            for (std::size_t i = 0; i < a->size(); ++i) out[i] += (*a)[i];
            double s = n.kind == NodeKind::Add ? 1.0 : -1.0;
            for (std::size_t i = 0; i < b->size(); ++i) out[i] += s * (*b)[i];
            poly_trim(out);
            return out;
        }
        case NodeKind::Mul: {
            auto a = poly_of(*n.a, max_degree), b = poly_of(*n.b, max_degree);
            if (!a || !b) return std::nullopt;
            return poly_mul(*a, *b, max_degree);
        }
        case NodeKind::Div: {
            auto a = poly_of(*n.a, max_degree), b = poly_of(*n.b, max_degree);
            if (!a || !b || b->size() != 1 || (*b)[0] == Complex{0, 0}) return std::nullopt;
            for (auto& c : *a) c /= (*b)[0];
            return a;
        }
        case NodeKind::Pow: {
            if (n.exponent < 0) return std::nullopt;
            auto base = poly_of(*n.a, max_degree);
            if (!base) return std::nullopt;
            Poly acc{Complex{1, 0}};
            for (int k = 0; k < n.exponent; ++k) {
                auto next = poly_mul(acc, *base, max_degree);
                if (!next) return std::nullopt;
                acc = std::move(*next);
            }
            return acc;
        }
        case NodeKind::Neg: {
            auto a = poly_of(*n.a, max_degree);
            if (!a) return std::nullopt;
            for (auto& c : *a) c = -c;
            return a;
        }
        default: return std::nullopt;  // exp/sin/cos are not polynomial
    }
}

}  // namespace

FieldExpr FieldExpr::parse(std::string_view source) {
    Parser p(source);
    return FieldExpr(p.run(), std::string(source));
}

Complex FieldExpr::eval(Complex z) const {
    if (!root_) throw Error("empty expression");
    return eval_node(*root_, z);
}

FieldExpr FieldExpr::derivative(int k) const {
    if (!root_) throw Error("empty expression");
    if (k < 1) throw Error("derivative order must be >= 1");
    NodePtr d = root_;
    for (int j = 0; j < k; ++j) d = diff(d);
    std::string s;
    print_node(*d, 1, s);
    return FieldExpr(d, s);
}

std::string FieldExpr::str() const {
    if (!root_) return {};
    std::string s;
    print_node(*root_, 1, s);
    return s;
}

bool FieldExpr::has_division() const { return root_ && node_has_division(*root_); }

bool FieldExpr::structurally_equal(const FieldExpr& other) const {
    if (!root_ || !other.root_) return root_ == other.root_;
    return node_equal(*root_, *other.root_);
}

std::optional<std::vector<Complex>> FieldExpr::polynomial_coefficients(int max_degree) const {
    if (!root_) return std::nullopt;
    auto p = poly_of(*root_, max_degree);
    if (!p) return std::nullopt;
    poly_trim(*p);
    return p;
}

FieldExpr FieldExpr::negated() const {
    NodePtr n = neg(root_);
    std::string s;
    print_node(*n, 1, s);
    return FieldExpr(n, s);
}

}  // namespace holoflow
