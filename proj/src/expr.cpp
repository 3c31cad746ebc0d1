#include "dalembert/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dalembert {

namespace {

using Kind = Expr::Kind;
using Node = Expr::Node;
using NodePtr = Expr::NodePtr;

const std::vector<std::string> kOperandStart = {"number", "identifier", "'('", "'-'"};

struct FuncInfo {
    std::string_view name;
    Func func;
    std::size_t arity;
};
constexpr std::array<FuncInfo, 7> kFunctions = {{{"sin", Func::Sin, 1},
                                                 {"cos", Func::Cos, 1},
                                                 {"tan", Func::Tan, 1},
                                                 {"exp", Func::Exp, 1},
                                                 {"log", Func::Log, 1},
                                                 {"sqrt", Func::Sqrt, 1},
                                                 {"atan2", Func::Atan2, 2}}};
constexpr std::array<std::string_view, 8> kNonSmooth = {"abs", "floor", "ceil", "min",
                                                         "max", "sign", "round", "mod"};

std::string_view func_name(Func f) {
    for (const auto &info : kFunctions)
        if (info.func == f) return info.name;
    return "?";
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::string_view text;
    double number = 0.0;
    std::size_t line = 1;
    std::size_t column = 1;
};

std::string describe(const Token &tok) {
    if (tok.kind == Tok::End) return "end of input";
    return "'" + std::string(tok.text) + "'";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token tok{Tok::End, {}, 0.0, line_, col_};
        if (pos_ >= src_.size()) return tok;
        const char c = src_[pos_];
        const std::size_t start = pos_;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            lex_number(tok);
            return tok;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            tok.kind = Tok::Ident;
            tok.text = src_.substr(start, pos_ - start);
            return tok;
        }
        advance();
        tok.text = src_.substr(start, 1);
        switch (c) {
        case '+': tok.kind = Tok::Plus; break;
        case '-': tok.kind = Tok::Minus; break;
        case '*': tok.kind = Tok::Star; break;
        case '/': tok.kind = Tok::Slash; break;
        case '^': tok.kind = Tok::Caret; break;
        case '(': tok.kind = Tok::LParen; break;
        case ')': tok.kind = Tok::RParen; break;
        case ',': tok.kind = Tok::Comma; break;
        default:
            throw ParseError("unexpected character '" + std::string(1, c) + "'", tok.line, tok.column);
        }
        return tok;
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    bool digit_at(std::size_t i) const {
        return i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]));
    }
    void lex_number(Token &tok) {
        const std::size_t start = pos_;
        while (digit_at(pos_)) advance();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            while (digit_at(pos_)) advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (!digit_at(look))
                throw ParseError("malformed exponent in numeric literal", line_, col_, {"digit"});
            while (pos_ < look) advance();
            while (digit_at(pos_)) advance();
        }
        tok.kind = Tok::Number;
        tok.text = src_.substr(start, pos_ - start);
        const auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
        if (res.ec != std::errc() || !std::isfinite(tok.number))
            throw ParseError("numeric literal out of range", tok.line, tok.column);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

NodePtr make_number(double v) {
    Node n;
    n.kind = Kind::Number;
    n.value = v;
    return make(std::move(n));
}

NodePtr make_op(Kind k, std::vector<NodePtr> args) {
    Node n;
    n.kind = k;
    n.args = std::move(args);
    return make(std::move(n));
}

class Parser {
public:
    Parser(std::string_view src, const Constants &constants) : lex_(src), constants_(constants) {
        cur_ = lex_.next();
    }

    NodePtr parse_all() {
        NodePtr e = expr();
        if (cur_.kind != Tok::End)
            throw ParseError("unexpected " + describe(cur_), cur_.line, cur_.column,
                             {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
        return e;
    }

private:
    void bump() { cur_ = lex_.next(); }

    NodePtr expr() {
        NodePtr lhs = term();
        while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
            const Kind k = cur_.kind == Tok::Plus ? Kind::Add : Kind::Sub;
            bump();
            lhs = make_op(k, {lhs, term()});
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
            const Kind k = cur_.kind == Tok::Star ? Kind::Mul : Kind::Div;
            bump();
            lhs = make_op(k, {lhs, unary()});
        }
        return lhs;
    }

    NodePtr unary() {
        if (cur_.kind == Tok::Minus) {
            bump();
            return make_op(Kind::Negate, {unary()});
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (cur_.kind == Tok::Caret) {
            bump();
            return make_op(Kind::Pow, {base, unary()});
        }
        return base;
    }

    NodePtr primary() {
        const Token tok = cur_;
        switch (tok.kind) {
        case Tok::Number:
            bump();
            return make_number(tok.number);
        case Tok::LParen: {
            bump();
            NodePtr inner = expr();
            expect(Tok::RParen, "')'");
            return inner;
        }
        case Tok::Ident:
            bump();
            if (cur_.kind == Tok::LParen) return call(tok);
            return name(tok);
        default:
            throw ParseError("unexpected " + describe(tok), tok.line, tok.column, kOperandStart);
        }
    }

    NodePtr call(const Token &ident) {
        const auto info = std::find_if(kFunctions.begin(), kFunctions.end(),
                                       [&](const FuncInfo &f) { return f.name == ident.text; });
        if (info == kFunctions.end()) {
            const bool non_smooth =
                std::find(kNonSmooth.begin(), kNonSmooth.end(), ident.text) != kNonSmooth.end();
            throw ParseError((non_smooth ? "non-smooth function '" : "unknown function '") +
                                 std::string(ident.text) + "'",
                             ident.line, ident.column);
        }
        bump(); // '('
        Node n;
        n.kind = Kind::Call;
        n.func = info->func;
        n.args.push_back(expr());
        while (cur_.kind == Tok::Comma) {
            bump();
            n.args.push_back(expr());
        }
        expect(Tok::RParen, "')'");
        if (n.args.size() != info->arity)
            throw ParseError("function '" + std::string(info->name) + "' takes " +
                                 std::to_string(info->arity) + " argument(s), got " +
                                 std::to_string(n.args.size()),
                             ident.line, ident.column);
        return make(std::move(n));
    }

    NodePtr name(const Token &ident) {
        Node n;
        n.name = std::string(ident.text);
        if (is_chart_variable(ident.text)) {
            n.kind = Kind::Variable;
        } else if (ident.text == "pi") {
            n.kind = Kind::Constant;
            n.value = std::numbers::pi;
        } else if (auto it = constants_.find(ident.text); it != constants_.end()) {
            n.kind = Kind::Constant;
            n.value = it->second;
        } else {
            throw ParseError("unknown constant '" + n.name + "'", ident.line, ident.column);
        }
        return make(std::move(n));
    }

    void expect(Tok kind, const std::string &what) {
        if (cur_.kind != kind)
            throw ParseError("unexpected " + describe(cur_), cur_.line, cur_.column,
                             {what, "'+'", "'-'", "'*'", "'/'", "'^'"});
        bump();
    }

    Lexer lex_;
    const Constants &constants_;
    Token cur_;
};

void collect_vars(const Node &n, std::set<std::string> &out) {
    if (n.kind == Kind::Variable) out.insert(n.name);
    for (const auto &a : n.args) collect_vars(*a, out);
}

std::string format_literal(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void unparse_into(const Node &n, std::string &out) {
    switch (n.kind) {
    case Kind::Number: out += format_literal(n.value); return;
    case Kind::Constant:
    case Kind::Variable: out += n.name; return;
    case Kind::Negate:
        out += "(-";
        unparse_into(*n.args[0], out);
        out += ")";
        return;
    case Kind::Call:
        out += func_name(n.func);
        out += "(";
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            unparse_into(*n.args[i], out);
        }
        out += ")";
        return;
    default: break;
    }
    const char *op = n.kind == Kind::Add ? " + " : n.kind == Kind::Sub ? " - "
                   : n.kind == Kind::Mul ? " * " : n.kind == Kind::Div ? " / " : " ^ ";
    out += "(";
    unparse_into(*n.args[0], out);
    out += op;
    unparse_into(*n.args[1], out);
    out += ")";
}

bool same(const Node &a, const Node &b) {
    if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
    switch (a.kind) {
    case Kind::Number:
        if (a.value != b.value) return false;
        break;
    case Kind::Constant:
        if (a.name != b.name || a.value != b.value) return false;
        break;
    case Kind::Variable:
        if (a.name != b.name) return false;
        break;
    case Kind::Call:
        if (a.func != b.func) return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!same(*a.args[i], *b.args[i])) return false;
    return true;
}

NodePtr substitute_node(const NodePtr &n, const std::map<std::string, Expr, std::less<>> &repl) {
    if (n->kind == Kind::Variable) {
        auto it = repl.find(n->name);
        if (it == repl.end()) return n;
        return std::make_shared<const Node>(it->second.root());
    }
    if (n->args.empty()) return n;
    Node copy = *n;
    for (auto &a : copy.args) a = substitute_node(a, repl);
    return make(std::move(copy));
}

// Integer exponent known at compile time: a literal k or -(literal k).
bool literal_integer(const Node &n, int &k) {
    double v;
    if (n.kind == Kind::Number) {
        v = n.value;
    } else if (n.kind == Kind::Negate && n.args[0]->kind == Kind::Number) {
        v = -n.args[0]->value;
    } else {
        return false;
    }
    if (!ad::is_integral(v)) return false;
    k = static_cast<int>(v);
    return true;
}

} // namespace

bool is_chart_variable(std::string_view name) {
    if (name == "t") return true;
    std::string_view rest;
    if (name.starts_with("qd") || name.starts_with("xd")) {
        rest = name.substr(2);
    } else if (name.starts_with("q") || name.starts_with("x")) {
        rest = name.substr(1);
    } else {
        return false;
    }
    if (rest.empty() || rest[0] == '0') return false;
    return std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::vector<std::string> indexed_names(std::string_view prefix, std::size_t count) {
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) out.push_back(std::string(prefix) + std::to_string(i));
    return out;
}

Expr::Expr() : Expr(make_number(0.0)) {}

Expr::Expr(NodePtr root) : root_(std::move(root)) {
    std::set<std::string> vars;
    collect_vars(*root_, vars);
    free_vars_.assign(vars.begin(), vars.end());
}

Expr Expr::parse(std::string_view source, const Constants &constants) {
    Parser p(source, constants);
    return Expr(p.parse_all());
}

Expr Expr::number(double value) {
    if (std::signbit(value)) return Expr(make_op(Kind::Negate, {make_number(-value)}));
    return Expr(make_number(value));
}

Expr Expr::variable(std::string name) {
    Node n;
    n.kind = Kind::Variable;
    n.name = std::move(name);
    return Expr(make(std::move(n)));
}

Expr Expr::negate(const Expr &a) { return Expr(make_op(Kind::Negate, {a.root_})); }

Expr Expr::binary(Kind op, const Expr &a, const Expr &b) { return Expr(make_op(op, {a.root_, b.root_})); }

Expr Expr::call(Func f, std::vector<Expr> args) {
    Node n;
    n.kind = Kind::Call;
    n.func = f;
    for (auto &a : args) n.args.push_back(a.root_);
    return Expr(make(std::move(n)));
}

std::string Expr::unparse() const {
    std::string out;
    unparse_into(*root_, out);
    return out;
}

Expr Expr::substitute(const std::map<std::string, Expr, std::less<>> &replacements) const {
    return Expr(substitute_node(root_, replacements));
}

bool Expr::operator==(const Expr &other) const { return same(*root_, *other.root_); }

Expr operator+(const Expr &a, const Expr &b) { return Expr::binary(Expr::Kind::Add, a, b); }
Expr operator-(const Expr &a, const Expr &b) { return Expr::binary(Expr::Kind::Sub, a, b); }
Expr operator*(const Expr &a, const Expr &b) { return Expr::binary(Expr::Kind::Mul, a, b); }

CompiledExpr::CompiledExpr(const Expr &expr, std::span<const std::string> slots) : slot_count_(slots.size()) {
    emit(expr.root(), slots, 0);
}

void CompiledExpr::emit(const Expr::Node &n, std::span<const std::string> slots, std::size_t depth) {
    max_stack_ = std::max(max_stack_, depth + 1);
    switch (n.kind) {
    case Kind::Number:
    case Kind::Constant: code_.push_back({Op::Push, 0, n.value}); return;
    case Kind::Variable: {
        const auto it = std::find(slots.begin(), slots.end(), n.name);
        if (it == slots.end()) throw UnboundVariable(n.name);
        code_.push_back({Op::Load, static_cast<int>(it - slots.begin()), 0.0});
        return;
    }
    case Kind::Negate:
        emit(*n.args[0], slots, depth);
        code_.push_back({Op::Neg, 0, 0.0});
        return;
    case Kind::Pow: {
        int k = 0;
        emit(*n.args[0], slots, depth);
        if (literal_integer(*n.args[1], k)) {
            code_.push_back({Op::PowInt, k, 0.0});
        } else {
            emit(*n.args[1], slots, depth + 1);
            code_.push_back({Op::Pow, 0, 0.0});
        }
        return;
    }
    case Kind::Call: {
        for (std::size_t i = 0; i < n.args.size(); ++i) emit(*n.args[i], slots, depth + i);
        Op op = Op::Sin;
        switch (n.func) {
        case Func::Sin: op = Op::Sin; break;
        case Func::Cos: op = Op::Cos; break;
        case Func::Tan: op = Op::Tan; break;
        case Func::Exp: op = Op::Exp; break;
        case Func::Log: op = Op::Log; break;
        case Func::Sqrt: op = Op::Sqrt; break;
        case Func::Atan2: op = Op::Atan2; break;
        }
        code_.push_back({op, 0, 0.0});
        return;
    }
    default: break;
    }
    emit(*n.args[0], slots, depth);
    emit(*n.args[1], slots, depth + 1);
    const Op op = n.kind == Kind::Add ? Op::Add : n.kind == Kind::Sub ? Op::Sub
                : n.kind == Kind::Mul ? Op::Mul : Op::Div;
    code_.push_back({op, 0, 0.0});
}

std::vector<CompiledExpr> compile_all(std::span<const Expr> exprs, std::span<const std::string> slots) {
    std::vector<CompiledExpr> out;
    out.reserve(exprs.size());
    for (const auto &e : exprs) out.emplace_back(e, slots);
    return out;
}

} // namespace dalembert
