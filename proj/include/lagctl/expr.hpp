#ifndef LAGCTL_EXPR_HPP
#define LAGCTL_EXPR_HPP

#include "lagctl/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lagctl {

/// Ordered set of variable names. Every name maps to a slot index; aliases
/// share the slot of their target. Slot order is the binding order used by
/// CompiledExpr.
class SymbolTable {
public:
    /// Adds a new slot. Throws ValidationError on duplicates.
    std::size_t add(const std::string& name);
    /// Makes `alias` resolve to the slot of `target`.
    void alias(const std::string& alias, const std::string& target);

    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t slot(std::string_view name) const;
    const std::string& name(std::size_t slot) const { return names_.at(slot); }
    std::size_t size() const noexcept { return names_.size(); }
    bool contains(std::string_view name) const { return find(name).has_value(); }

    /// q1..qn, u1..um followed by the parameter names.
    static SymbolTable mechanical(int n, int m, const std::vector<std::string>& params);

private:
    std::vector<std::string> names_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

enum class Op {
    Const,
    Var,
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
};

struct Node;

/// Immutable symbolic expression. Parsed trees keep binary Add/Sub/Mul/Div
/// exactly as written; simplify() produces the canonical n-ary form where
/// Sub/Div/Neg are rewritten and commutative operands are sorted.
class Expr {
public:
    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double value);
    static Expr variable(std::size_t slot);
    static Expr unary(Op op, Expr arg);
    static Expr binary(Op op, Expr lhs, Expr rhs);
    static Expr nary(Op op, std::vector<Expr> args);
    static Expr power(Expr base, int exponent);

    Op op() const noexcept;
    double value() const noexcept;
    std::size_t slot() const noexcept;
    int exponent() const noexcept;
    const std::vector<Expr>& args() const noexcept;

    bool is_constant() const noexcept { return op() == Op::Const; }
    bool is_constant(double v) const noexcept { return is_constant() && value() == v; }

    /// Structural identity (same node kinds, constants, slots, child order).
    friend bool operator==(const Expr& a, const Expr& b);
    /// Total order used to canonicalize commutative operands.
    friend int compare(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct Node {
    Op op = Op::Const;
    double value = 0.0;
    std::size_t slot = 0;
    int exponent = 0;
    std::vector<Expr> args;
};

/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | base ('^' ['-'] int)?
///   base   := number | ident | func '(' expr ')' | '(' expr ')'
///   func   := sin | cos | exp | ln | sqrt
Expr parse_expression(std::string_view text, const SymbolTable& vars);

std::string to_string(const Expr& e, const SymbolTable& vars);

Expr simplify(const Expr& e);

/// d e / d(slot), simplified.
Expr differentiate(const Expr& e, std::size_t slot);
Expr differentiate(const Expr& e, const SymbolTable& vars, std::string_view name);

/// Evaluates with named bindings. Throws ValidationError on an unbound
/// variable and DomainError on division by zero or ln/sqrt domain violations.
double evaluate(const Expr& e, const SymbolTable& vars, const std::map<std::string, double>& bindings);

/// Evaluates with one value per slot.
double evaluate(const Expr& e, std::span<const double> slots);

/// True when the expression does not reference `slot`.
bool independent_of(const Expr& e, std::size_t slot);

/// Postfix tape for fast repeated evaluation. Reentrant.
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const Expr& e);

    double operator()(std::span<const double> slots) const;
    bool is_zero() const noexcept { return zero_; }

private:
    struct Instr {
        Op op;
        int arity;
        double value;
        std::size_t slot;
        int exponent;
    };
    void emit(const Expr& e, int depth);

    std::vector<Instr> tape_;
    int max_depth_ = 0;
    bool zero_ = true;
};

}  // namespace lagctl

#endif  // LAGCTL_EXPR_HPP
