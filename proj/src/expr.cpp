#include "lagctl/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lagctl {

std::string format_double(double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    (void)ec;
    return std::string(buf.data(), ptr);
}

std::string format_vector(const Vector& v) {
    std::string out = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out + ")";
}

// ---------------------------------------------------------------- symbols

std::size_t SymbolTable::add(const std::string& name) {
    if (index_.count(name)) throw ValidationError("duplicate variable name '" + name + "'");
    names_.push_back(name);
    index_.emplace(name, names_.size() - 1);
    return names_.size() - 1;
}

void SymbolTable::alias(const std::string& alias, const std::string& target) {
    if (index_.count(alias)) throw ValidationError("duplicate variable name '" + alias + "'");
    index_.emplace(alias, slot(target));
}

std::optional<std::size_t> SymbolTable::find(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t SymbolTable::slot(std::string_view name) const {
    auto s = find(name);
    if (!s) throw ValidationError("unknown variable '" + std::string(name) + "'");
    return *s;
}

SymbolTable SymbolTable::mechanical(int n, int m, const std::vector<std::string>& params) {
    SymbolTable t;
    for (int i = 1; i <= n; ++i) t.add("q" + std::to_string(i));
    for (int i = 1; i <= m; ++i) t.add("u" + std::to_string(i));
    for (const auto& p : params) t.add(p);
    return t;
}

// ---------------------------------------------------------------- nodes

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(std::size_t slot) {
    auto n = std::make_shared<Node>();
    n->op = Op::Var;
    n->slot = slot;
    return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr arg) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args.push_back(std::move(arg));
    return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args.push_back(std::move(lhs));
    n->args.push_back(std::move(rhs));
    return Expr(std::move(n));
}

Expr Expr::nary(Op op, std::vector<Expr> args) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->exponent = exponent;
    n->args.push_back(std::move(base));
    return Expr(std::move(n));
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
std::size_t Expr::slot() const noexcept { return node_->slot; }
int Expr::exponent() const noexcept { return node_->exponent; }
const std::vector<Expr>& Expr::args() const noexcept { return node_->args; }

int compare(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return 0;
    if (a.op() != b.op()) return static_cast<int>(a.op()) < static_cast<int>(b.op()) ? -1 : 1;
    switch (a.op()) {
    case Op::Const:
        if (a.value() == b.value()) return 0;
        return a.value() < b.value() ? -1 : 1;
    case Op::Var:
        if (a.slot() == b.slot()) return 0;
        return a.slot() < b.slot() ? -1 : 1;
    default:
        break;
    }
    if (a.op() == Op::Pow && a.exponent() != b.exponent()) {
        int c = compare(a.args()[0], b.args()[0]);
        if (c != 0) return c;
        return a.exponent() < b.exponent() ? -1 : 1;
    }
    const auto& x = a.args();
    const auto& y = b.args();
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        int c = compare(x[i], y[i]);
        if (c != 0) return c;
    }
    if (x.size() == y.size()) return 0;
    return x.size() < y.size() ? -1 : 1;
}

bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

// ---------------------------------------------------------------- parser

namespace {

bool is_function(std::string_view name, Op& op) {
    static const std::pair<std::string_view, Op> table[] = {
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"ln", Op::Ln}, {"sqrt", Op::Sqrt}};
    for (const auto& [n, o] : table) {
        if (n == name) {
            op = o;
            return true;
        }
    }
    return false;
}

class Parser {
public:
    Parser(std::string_view text, const SymbolTable& vars) : text_(text), vars_(vars) {}

    Expr parse() {
        Expr e = expr();
        skip();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expr() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = Expr::binary(Op::Add, lhs, term());
            } else if (accept('-')) {
                lhs = Expr::binary(Op::Sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    Expr term() {
        Expr lhs = factor();
        for (;;) {
            if (accept('*')) {
                lhs = Expr::binary(Op::Mul, lhs, factor());
            } else if (accept('/')) {
                lhs = Expr::binary(Op::Div, lhs, factor());
            } else {
                return lhs;
            }
        }
    }

    Expr factor() {
        if (accept('-')) return Expr::unary(Op::Neg, factor());
        Expr b = base();
        if (accept('^')) {
            skip();
            bool negative = false;
            if (pos_ < text_.size() && text_[pos_] == '-') {
                negative = true;
                ++pos_;
            }
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("expected integer exponent");
            if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
                pos_ = start;
                fail("non-integer exponent");
            }
            int k = 0;
            auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, k);
            if (ec != std::errc()) {
                pos_ = start;
                fail("exponent out of range");
            }
            (void)ptr;
            b = Expr::power(b, negative ? -k : k);
        }
        return b;
    }

    Expr base() {
        skip();
        if (pos_ >= text_.size()) fail("expected operand");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string_view name = text_.substr(start, pos_ - start);
            Op op{};
            if (is_function(name, op)) {
                if (!accept('(')) fail("expected '(' after " + std::string(name));
                Expr arg = expr();
                if (!accept(')')) fail("expected ')'");
                return Expr::unary(op, arg);
            }
            auto slot = vars_.find(name);
            if (!slot) {
                pos_ = start;
                fail("unknown identifier '" + std::string(name) + "'");
            }
            return Expr::variable(*slot);
        }
        fail("expected operand");
    }

    Expr number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc() || ptr != text_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        return Expr::constant(v);
    }

    std::string_view text_;
    const SymbolTable& vars_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, const SymbolTable& vars) { return Parser(text, vars).parse(); }

// ---------------------------------------------------------------- printer

namespace {

const char* function_name(Op op) {
    switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Sqrt: return "sqrt";
    default: return "?";
    }
}

void print(const Expr& e, const SymbolTable& vars, int prec, std::string& out);

void print_const(double v, int prec, std::string& out) {
    if (std::signbit(v)) {
        // Parses back as Neg(const); simplify() folds it to the same constant.
        out += "(-";
        out += format_double(-v);
        out += ')';
    } else {
        out += format_double(v);
    }
    (void)prec;
}

// Precedence: 1 sum, 2 product, 3 unary minus, 4 power operand.
void print(const Expr& e, const SymbolTable& vars, int prec, std::string& out) {
    switch (e.op()) {
    case Op::Const:
        print_const(e.value(), prec, out);
        return;
    case Op::Var:
        out += vars.name(e.slot());
        return;
    case Op::Neg:
        if (prec > 1) out += '(';
        out += '-';
        print(e.args()[0], vars, 3, out);
        if (prec > 1) out += ')';
        return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Ln:
    case Op::Sqrt:
        out += function_name(e.op());
        out += '(';
        print(e.args()[0], vars, 0, out);
        out += ')';
        return;
    case Op::Pow:
        if (prec > 3) out += '(';
        print(e.args()[0], vars, 4, out);
        out += '^';
        out += std::to_string(e.exponent());
        if (prec > 3) out += ')';
        return;
    case Op::Sub:
    case Op::Div:
    case Op::Add:
    case Op::Mul: {
        bool sum = e.op() == Op::Add || e.op() == Op::Sub;
        int p = sum ? 1 : 2;
        const auto& a = e.args();
        if (prec > p) out += '(';
        print(a[0], vars, p, out);
        for (std::size_t i = 1; i < a.size(); ++i) {
            const Expr& t = a[i];
            if (e.op() == Op::Add && t.op() == Op::Mul && t.args().front().is_constant() &&
                std::signbit(t.args().front().value())) {
                // canonical "c*x" with c < 0 prints as a subtraction
                std::vector<Expr> rest(t.args().begin(), t.args().end());
                double mag = -rest.front().value();
                if (mag == 1.0) {
                    rest.erase(rest.begin());
                } else {
                    rest.front() = Expr::constant(mag);
                }
                out += " - ";
                print(rest.size() == 1 ? rest.front() : Expr::nary(Op::Mul, rest), vars, 2, out);
                continue;
            }
            switch (e.op()) {
            case Op::Add: out += " + "; break;
            case Op::Sub: out += " - "; break;
            case Op::Mul: out += '*'; break;
            default: out += '/'; break;
            }
            print(t, vars, p + 1, out);
        }
        if (prec > p) out += ')';
        return;
    }
    }
}

}  // namespace

std::string to_string(const Expr& e, const SymbolTable& vars) {
    std::string out;
    print(e, vars, 0, out);
    return out;
}

// ---------------------------------------------------------------- simplify

namespace {

bool foldable(Op op, double x) {
    switch (op) {
    case Op::Ln: return x > 0;
    case Op::Sqrt: return x >= 0;
    default: return true;
    }
}

double apply_unary(Op op, double x) {
    switch (op) {
    case Op::Neg: return -x;
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Exp: return std::exp(x);
    case Op::Ln: return std::log(x);
    case Op::Sqrt: return std::sqrt(x);
    default: return x;
    }
}

Expr canon_mul(const std::vector<Expr>& in);
Expr canon_pow(const Expr& base, int k);

Expr canon_add(const std::vector<Expr>& in) {
    std::vector<Expr> flat;
    for (const auto& a : in) {
        if (a.op() == Op::Add) {
            flat.insert(flat.end(), a.args().begin(), a.args().end());
        } else {
            flat.push_back(a);
        }
    }
    double constant = 0.0;
    std::vector<std::pair<double, Expr>> terms;
    for (const auto& t : flat) {
        if (t.is_constant()) {
            constant += t.value();
            continue;
        }
        double c = 1.0;
        Expr rest = t;
        if (t.op() == Op::Mul && t.args().front().is_constant()) {
            c = t.args().front().value();
            std::vector<Expr> r(t.args().begin() + 1, t.args().end());
            rest = r.size() == 1 ? r.front() : Expr::nary(Op::Mul, r);
        }
        auto it = std::find_if(terms.begin(), terms.end(), [&](const auto& p) { return p.second == rest; });
        if (it == terms.end()) {
            terms.emplace_back(c, rest);
        } else {
            it->first += c;
        }
    }
    std::vector<Expr> out;
    if (constant != 0.0) out.push_back(Expr::constant(constant));
    for (const auto& [c, rest] : terms) {
        if (c == 0.0) continue;
        out.push_back(c == 1.0 ? rest : canon_mul({Expr::constant(c), rest}));
    }
    if (out.empty()) return Expr::constant(0.0);
    if (out.size() == 1) return out.front();
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
    return Expr::nary(Op::Add, out);
}

Expr canon_mul(const std::vector<Expr>& in) {
    std::vector<Expr> flat;
    for (const auto& a : in) {
        if (a.op() == Op::Mul) {
            flat.insert(flat.end(), a.args().begin(), a.args().end());
        } else {
            flat.push_back(a);
        }
    }
    double coef = 1.0;
    std::vector<std::pair<Expr, int>> powers;
    for (const auto& f : flat) {
        if (f.is_constant()) {
            coef *= f.value();
            continue;
        }
        Expr base = f;
        int k = 1;
        if (f.op() == Op::Pow) {
            base = f.args()[0];
            k = f.exponent();
        }
        auto it = std::find_if(powers.begin(), powers.end(), [&](const auto& p) { return p.first == base; });
        if (it == powers.end()) {
            powers.emplace_back(base, k);
        } else {
            it->second += k;
        }
    }
    if (coef == 0.0) return Expr::constant(0.0);
    std::vector<Expr> out;
    for (const auto& [base, k] : powers) {
        if (k == 0) continue;
        Expr f = canon_pow(base, k);
        if (f.is_constant()) {
            coef *= f.value();
        } else if (f.op() == Op::Mul) {
            // (a*b)^k distributed; may carry its own constant.
            for (const auto& g : f.args()) {
                if (g.is_constant()) {
                    coef *= g.value();
                } else {
                    out.push_back(g);
                }
            }
        } else {
            out.push_back(f);
        }
    }
    std::sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
    if (out.empty()) return Expr::constant(coef);
    if (coef != 1.0) out.insert(out.begin(), Expr::constant(coef));
    if (out.size() == 1) return out.front();
    return Expr::nary(Op::Mul, out);
}

Expr canon_pow(const Expr& base, int k) {
    if (k == 0) return Expr::constant(1.0);
    if (k == 1) return base;
    if (base.is_constant()) {
        if (base.value() == 0.0 && k < 0) return Expr::power(base, k);
        return Expr::constant(std::pow(base.value(), k));
    }
    if (base.op() == Op::Pow) return canon_pow(base.args()[0], base.exponent() * k);
    if (base.op() == Op::Mul) {
        std::vector<Expr> parts;
        for (const auto& f : base.args()) parts.push_back(canon_pow(f, k));
        return canon_mul(parts);
    }
    return Expr::power(base, k);
}

}  // namespace

Expr simplify(const Expr& e) {
    switch (e.op()) {
    case Op::Const:
    case Op::Var:
        return e;
    case Op::Neg:
        return canon_mul({Expr::constant(-1.0), simplify(e.args()[0])});
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Ln:
    case Op::Sqrt: {
        Expr a = simplify(e.args()[0]);
        if (a.is_constant() && foldable(e.op(), a.value())) return Expr::constant(apply_unary(e.op(), a.value()));
        return Expr::unary(e.op(), a);
    }
    case Op::Add: {
        std::vector<Expr> a;
        for (const auto& x : e.args()) a.push_back(simplify(x));
        return canon_add(a);
    }
    case Op::Sub:
        return canon_add({simplify(e.args()[0]), canon_mul({Expr::constant(-1.0), simplify(e.args()[1])})});
    case Op::Mul: {
        std::vector<Expr> a;
        for (const auto& x : e.args()) a.push_back(simplify(x));
        return canon_mul(a);
    }
    case Op::Div:
        return canon_mul({simplify(e.args()[0]), canon_pow(simplify(e.args()[1]), -1)});
    case Op::Pow:
        return canon_pow(simplify(e.args()[0]), e.exponent());
    }
    return e;
}

// ---------------------------------------------------------------- derivative

namespace {

Expr d_raw(const Expr& e, std::size_t slot) {
    auto C = [](double v) { return Expr::constant(v); };
    auto mul = [](std::vector<Expr> a) { return Expr::nary(Op::Mul, std::move(a)); };
    switch (e.op()) {
    case Op::Const:
        return C(0.0);
    case Op::Var:
        return C(e.slot() == slot ? 1.0 : 0.0);
    case Op::Neg:
        return Expr::unary(Op::Neg, d_raw(e.args()[0], slot));
    case Op::Add:
    case Op::Sub: {
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < e.args().size(); ++i) {
            Expr d = d_raw(e.args()[i], slot);
            terms.push_back(e.op() == Op::Sub && i == 1 ? Expr::unary(Op::Neg, d) : d);
        }
        return Expr::nary(Op::Add, terms);
    }
    case Op::Mul: {
        const auto& f = e.args();
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::vector<Expr> prod;
            for (std::size_t j = 0; j < f.size(); ++j) prod.push_back(i == j ? d_raw(f[j], slot) : f[j]);
            terms.push_back(mul(prod));
        }
        return Expr::nary(Op::Add, terms);
    }
    case Op::Div: {
        const Expr& a = e.args()[0];
        const Expr& b = e.args()[1];
        Expr num = Expr::binary(Op::Sub, mul({d_raw(a, slot), b}), mul({a, d_raw(b, slot)}));
        return Expr::binary(Op::Div, num, Expr::power(b, 2));
    }
    case Op::Pow: {
        const Expr& b = e.args()[0];
        int k = e.exponent();
        return mul({C(k), Expr::power(b, k - 1), d_raw(b, slot)});
    }
    case Op::Sin:
        return mul({Expr::unary(Op::Cos, e.args()[0]), d_raw(e.args()[0], slot)});
    case Op::Cos:
        return mul({C(-1.0), Expr::unary(Op::Sin, e.args()[0]), d_raw(e.args()[0], slot)});
    case Op::Exp:
        return mul({e, d_raw(e.args()[0], slot)});
    case Op::Ln:
        return Expr::binary(Op::Div, d_raw(e.args()[0], slot), e.args()[0]);
    case Op::Sqrt:
        return Expr::binary(Op::Div, d_raw(e.args()[0], slot), mul({C(2.0), e}));
    }
    return C(0.0);
}

}  // namespace

Expr differentiate(const Expr& e, std::size_t slot) { return simplify(d_raw(simplify(e), slot)); }

Expr differentiate(const Expr& e, const SymbolTable& vars, std::string_view name) {
    return differentiate(e, vars.slot(name));
}

bool independent_of(const Expr& e, std::size_t slot) {
    if (e.op() == Op::Var) return e.slot() != slot;
    for (const auto& a : e.args())
        if (!independent_of(a, slot)) return false;
    return true;
}

// ---------------------------------------------------------------- evaluate

namespace {

double checked_unary(Op op, double x) {
    if (op == Op::Ln && !(x > 0)) throw DomainError("ln of non-positive value " + format_double(x));
    if (op == Op::Sqrt && x < 0) throw DomainError("sqrt of negative value " + format_double(x));
    return apply_unary(op, x);
}

double checked_pow(double b, int k) {
    if (b == 0.0 && k < 0) throw DomainError("division by zero");
    return std::pow(b, k);
}

double checked_div(double a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return a / b;
}

double finite(double v) {
    if (!std::isfinite(v)) throw DomainError("non-finite result");
    return v;
}

double eval(const Expr& e, std::span<const double> slots) {
    switch (e.op()) {
    case Op::Const: return e.value();
    case Op::Var:
        if (e.slot() >= slots.size()) throw ValidationError("unbound variable slot " + std::to_string(e.slot()));
        return slots[e.slot()];
    case Op::Neg:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Ln:
    case Op::Sqrt:
        return checked_unary(e.op(), eval(e.args()[0], slots));
    case Op::Add: {
        double s = 0.0;
        for (const auto& a : e.args()) s += eval(a, slots);
        return s;
    }
    case Op::Mul: {
        double p = 1.0;
        for (const auto& a : e.args()) p *= eval(a, slots);
        return p;
    }
    case Op::Sub: return eval(e.args()[0], slots) - eval(e.args()[1], slots);
    case Op::Div: return checked_div(eval(e.args()[0], slots), eval(e.args()[1], slots));
    case Op::Pow: return checked_pow(eval(e.args()[0], slots), e.exponent());
    }
    return 0.0;
}

void collect_slots(const Expr& e, std::vector<std::size_t>& out) {
    if (e.op() == Op::Var) out.push_back(e.slot());
    for (const auto& a : e.args()) collect_slots(a, out);
}

}  // namespace

double evaluate(const Expr& e, std::span<const double> slots) { return finite(eval(e, slots)); }

double evaluate(const Expr& e, const SymbolTable& vars, const std::map<std::string, double>& bindings) {
    std::vector<double> values(vars.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> bound(vars.size(), false);
    for (const auto& [name, v] : bindings) {
        auto s = vars.find(name);
        if (!s) throw ValidationError("binding for unknown variable '" + name + "'");
        values[*s] = v;
        bound[*s] = true;
    }
    std::vector<std::size_t> used;
    collect_slots(e, used);
    for (auto s : used)
        if (!bound[s]) throw ValidationError("unbound variable '" + vars.name(s) + "'");
    return evaluate(e, values);
}

// ---------------------------------------------------------------- compiled

CompiledExpr::CompiledExpr(const Expr& e) {
    zero_ = e.is_constant(0.0);
    emit(e, 1);
}

void CompiledExpr::emit(const Expr& e, int depth) {
    int arity = static_cast<int>(e.args().size());
    for (int i = 0; i < arity; ++i) emit(e.args()[i], depth + i);
    max_depth_ = std::max(max_depth_, depth + std::max(arity - 1, 0));
    tape_.push_back(Instr{e.op(), arity, e.value(), e.slot(), e.exponent()});
}

double CompiledExpr::operator()(std::span<const double> slots) const {
    constexpr int kInline = 64;
    std::array<double, kInline> inline_stack{};
    std::vector<double> heap;
    double* st = inline_stack.data();
    if (max_depth_ > kInline) {
        heap.resize(static_cast<std::size_t>(max_depth_));
        st = heap.data();
    }
    int top = 0;
    for (const auto& in : tape_) {
        switch (in.op) {
        case Op::Const: st[top++] = in.value; break;
        case Op::Var: st[top++] = slots[in.slot]; break;
        case Op::Neg:
        case Op::Sin:
        case Op::Cos:
        case Op::Exp:
        case Op::Ln:
        case Op::Sqrt: st[top - 1] = checked_unary(in.op, st[top - 1]); break;
        case Op::Add: {
            double s = 0.0;
            for (int i = top - in.arity; i < top; ++i) s += st[i];
            top -= in.arity;
            st[top++] = s;
            break;
        }
        case Op::Mul: {
            double p = 1.0;
            for (int i = top - in.arity; i < top; ++i) p *= st[i];
            top -= in.arity;
            st[top++] = p;
            break;
        }
        case Op::Sub:
            st[top - 2] = st[top - 2] - st[top - 1];
            --top;
            break;
        case Op::Div:
            st[top - 2] = checked_div(st[top - 2], st[top - 1]);
            --top;
            break;
        case Op::Pow: st[top - 1] = checked_pow(st[top - 1], in.exponent); break;
        }
    }
    return finite(st[0]);
}

}  // namespace lagctl
