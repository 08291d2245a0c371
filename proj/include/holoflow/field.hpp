#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "holoflow/errors.hpp"
#include "holoflow/types.hpp"

namespace holoflow {

enum class NodeKind {
    Constant,   // real constant (literals, pi, e, folded signs)
    ImagUnit,   // the symbol i
    Variable,   // x
    Add, Sub, Mul, Div,
    Pow,        // integer exponent
    Neg,
    Exp, Sin, Cos,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind;
    double value = 0.0;   // Constant
    int exponent = 0;     // Pow
    NodePtr a, b;         // children; unary ops use a
};

/// Immutable expression tree for an entire function F(x); shareable across
/// threads. Supports +, -, *, /, integer ^, exp, sin, cos and the atoms
/// x, i, pi, e and decimal literals.
class FieldExpr {
public:
    FieldExpr() = default;

    static FieldExpr parse(std::string_view source);

    Complex eval(Complex z) const;

    /// Exact symbolic k-th derivative (only neutral-element simplification).
    FieldExpr derivative(int k = 1) const;

    /// Canonical printing; parse(str()) is structurally equal to *this.
    std::string str() const;

    const std::string& source() const { return source_; }
    bool valid() const { return root_ != nullptr; }

    /// True if the tree contains a division (or negative power). Parsed F is
    /// assumed entire; the CLI turns this into a diagnostic.
    bool has_division() const;

    bool structurally_equal(const FieldExpr& other) const;

    /// Coefficients c0..cn with F = sum c_k x^k, when F is polynomial.
    std::optional<std::vector<Complex>> polynomial_coefficients(int max_degree = 64) const;

    /// -F, used by time-reversal checks.
    FieldExpr negated() const;

    const NodePtr& root() const { return root_; }

private:
    FieldExpr(NodePtr root, std::string source)
        : root_(std::move(root)), source_(std::move(source)) {}

    NodePtr root_;
    std::string source_;
};

}  // namespace holoflow
