#pragma once

// Scalar expression language used to author Lagrangians, frame maps,
// embeddings, curves and displacement fields.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | name | func '(' args ')' | '(' expr ')'
//
// Functions: sin cos tan exp log sqrt (one argument), atan2 (two).
// Constants: pi, plus any named constants supplied at parse time.
// Variables follow the chart naming convention: t, qN, qdN, xN, xdN.

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dalembert/dualnum.hpp"
#include "dalembert/errors.hpp"

namespace dalembert {

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Atan2 };

/// Named numeric constants available to the parser (scenario parameters).
using Constants = std::map<std::string, double, std::less<>>;

template <typename T>
using VarBinding = std::map<std::string, T, std::less<>>;

class Expr {
public:
    enum class Kind { Number, Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

    struct Node {
        Kind kind = Kind::Number;
        double value = 0.0; // Number / Constant
        std::string name;   // Constant / Variable
        Func func = Func::Sin;
        std::vector<std::shared_ptr<const Node>> args;
    };
    using NodePtr = std::shared_ptr<const Node>;

    /// Zero literal.
    Expr();

    static Expr parse(std::string_view source, const Constants &constants = {});

    static Expr number(double value);
    static Expr variable(std::string name);
    static Expr negate(const Expr &a);
    static Expr binary(Kind op, const Expr &a, const Expr &b);
    static Expr call(Func f, std::vector<Expr> args);

    /// Canonical, fully parenthesised text; parse(unparse()) reproduces the tree.
    std::string unparse() const;

    /// Sorted, unique variable names.
    const std::vector<std::string> &free_vars() const noexcept { return free_vars_; }

    /// Simultaneous replacement of variables by expressions.
    Expr substitute(const std::map<std::string, Expr, std::less<>> &replacements) const;

    bool operator==(const Expr &other) const;

    const Node &root() const noexcept { return *root_; }

    template <typename T>
    T eval(const VarBinding<T> &binding) const;

private:
    explicit Expr(NodePtr root);

    NodePtr root_;
    std::vector<std::string> free_vars_;
};

Expr operator+(const Expr &a, const Expr &b);
Expr operator-(const Expr &a, const Expr &b);
Expr operator*(const Expr &a, const Expr &b);

/// True for names of the form t, qN, qdN, xN, xdN (N >= 1).
bool is_chart_variable(std::string_view name);

/// {prefix1, ..., prefixN}.
std::vector<std::string> indexed_names(std::string_view prefix, std::size_t count);

/// An expression lowered to a postfix program whose variables are bound to
/// positional slots. Immutable; evaluation is re-entrant.
class CompiledExpr {
public:
    CompiledExpr() = default;
    /// Throws UnboundVariable when the expression uses a name not in `slots`.
    CompiledExpr(const Expr &expr, std::span<const std::string> slots);

    std::size_t slot_count() const noexcept { return slot_count_; }

    template <typename T>
    T operator()(std::span<const T> args) const;

private:
    enum class Op : unsigned char {
        Push, Load, Neg, Add, Sub, Mul, Div, PowInt, Pow, Sin, Cos, Tan, Exp, Log, Sqrt, Atan2
    };
    struct Instr {
        Op op;
        int index;   // slot for Load, exponent for PowInt
        double value; // literal for Push
    };

    void emit(const Expr::Node &node, std::span<const std::string> slots, std::size_t depth);

    std::vector<Instr> code_;
    std::size_t slot_count_ = 0;
    std::size_t max_stack_ = 0;
};

/// Compile every expression in `exprs` against the same slots.
std::vector<CompiledExpr> compile_all(std::span<const Expr> exprs, std::span<const std::string> slots);

// -- implementation -------------------------------------------------------

template <typename T>
T CompiledExpr::operator()(std::span<const T> args) const {
    if (args.size() < slot_count_)
        throw DimensionMismatch("compiled expression expects " + std::to_string(slot_count_) +
                                " arguments, got " + std::to_string(args.size()));
    constexpr std::size_t kInline = 24;
    std::array<T, kInline> inline_stack{};
    std::vector<T> heap_stack;
    T *stack = inline_stack.data();
    if (max_stack_ > kInline) {
        heap_stack.resize(max_stack_);
        stack = heap_stack.data();
    }
    std::size_t top = 0;
    for (const Instr &in : code_) {
        switch (in.op) {
        case Op::Push: stack[top++] = T(in.value); break;
        case Op::Load: stack[top++] = args[static_cast<std::size_t>(in.index)]; break;
        case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
        case Op::Add: --top; stack[top - 1] = stack[top - 1] + stack[top]; break;
        case Op::Sub: --top; stack[top - 1] = stack[top - 1] - stack[top]; break;
        case Op::Mul: --top; stack[top - 1] = stack[top - 1] * stack[top]; break;
        case Op::Div: --top; stack[top - 1] = ad::div(stack[top - 1], stack[top]); break;
        case Op::PowInt: stack[top - 1] = ad::powi(stack[top - 1], in.index); break;
        case Op::Pow: --top; stack[top - 1] = ad::pow(stack[top - 1], stack[top]); break;
        case Op::Sin: stack[top - 1] = ad::sin(stack[top - 1]); break;
        case Op::Cos: stack[top - 1] = ad::cos(stack[top - 1]); break;
        case Op::Tan: stack[top - 1] = ad::tan(stack[top - 1]); break;
        case Op::Exp: stack[top - 1] = ad::exp(stack[top - 1]); break;
        case Op::Log: stack[top - 1] = ad::log(stack[top - 1]); break;
        case Op::Sqrt: stack[top - 1] = ad::sqrt(stack[top - 1]); break;
        case Op::Atan2: --top; stack[top - 1] = ad::atan2(stack[top - 1], stack[top]); break;
        }
    }
    return stack[0];
}

template <typename T>
T Expr::eval(const VarBinding<T> &binding) const {
    std::vector<T> args;
    args.reserve(free_vars_.size());
    for (const auto &name : free_vars_) {
        auto it = binding.find(name);
        if (it == binding.end()) throw UnboundVariable(name);
        args.push_back(it->second);
    }
    return CompiledExpr(*this, free_vars_)(std::span<const T>(args));
}

} // namespace dalembert
