#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "padiclab/recurrence.hpp"

namespace padiclab {

// ---------------------------------------------------------------------------
// AST

/// Index expression: integer constant plus integer multiples of loop
/// variables. Anything else in an index position is rejected.
struct AffineExpr {
    long constant = 0;
    std::map<std::string, long> coeffs;

    friend bool operator==(const AffineExpr&, const AffineExpr&) = default;

    long eval(const std::map<std::string, long>& binding) const {
        long v = constant;
        for (const auto& [name, c] : coeffs) {
            auto it = binding.find(name);
            if (it == binding.end())
                throw DomainError("unknown identifier in index: " + name);
            v += c * it->second;
        }
        return v;
    }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum Kind { Literal, ParamRef, VarRef, Binary, Power, Negate };
    Kind kind;
    Rational literal;                 // Literal
    std::string name;                 // ParamRef / VarRef
    std::vector<AffineExpr> indices;  // VarRef (empty for scalar nodes)
    char op = 0;                      // Binary: + - * /
    ExprPtr lhs, rhs;                 // Binary; Power/Negate use lhs only
    unsigned long power = 0;          // Power

    static ExprPtr lit(Rational v) {
        auto e = std::make_shared<Expr>();
        e->kind = Literal;
        e->literal = std::move(v);
        return e;
    }
    static ExprPtr param(std::string n) {
        auto e = std::make_shared<Expr>();
        e->kind = ParamRef;
        e->name = std::move(n);
        return e;
    }
    static ExprPtr var(std::string n, std::vector<AffineExpr> idx = {}) {
        auto e = std::make_shared<Expr>();
        e->kind = VarRef;
        e->name = std::move(n);
        e->indices = std::move(idx);
        return e;
    }
    static ExprPtr binary(char op, ExprPtr l, ExprPtr r) {
        auto e = std::make_shared<Expr>();
        e->kind = Binary;
        e->op = op;
        e->lhs = std::move(l);
        e->rhs = std::move(r);
        return e;
    }
    static ExprPtr pow(ExprPtr base, unsigned long k) {
        auto e = std::make_shared<Expr>();
        e->kind = Power;
        e->lhs = std::move(base);
        e->power = k;
        return e;
    }
    static ExprPtr neg(ExprPtr x) {
        auto e = std::make_shared<Expr>();
        e->kind = Negate;
        e->lhs = std::move(x);
        return e;
    }
};

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Expr::Literal: return a->literal == b->literal;
        case Expr::ParamRef: return a->name == b->name;
        case Expr::VarRef: return a->name == b->name && a->indices == b->indices;
        case Expr::Binary:
            return a->op == b->op && expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
        case Expr::Power: return a->power == b->power && expr_equal(a->lhs, b->lhs);
        case Expr::Negate: return expr_equal(a->lhs, b->lhs);
    }
    return false;
}

struct Range {
    std::string var;
    long lo, hi;
    friend bool operator==(const Range&, const Range&) = default;
};

struct Rule {
    std::string name;
    std::vector<AffineExpr> indices;
    ExprPtr body;
    std::optional<Range> range;
};

struct DslProgram {
    std::vector<std::pair<std::string, Rational>> params;  // declaration order
    std::vector<Rule> rules;

    const Rational* find_param(const std::string& n) const {
        for (const auto& [name, v] : params)
            if (name == n) return &v;
        return nullptr;
    }
};

inline bool program_equal(const DslProgram& a, const DslProgram& b) {
    if (a.params != b.params || a.rules.size() != b.rules.size()) return false;
    for (size_t i = 0; i < a.rules.size(); ++i) {
        const Rule &x = a.rules[i], &y = b.rules[i];
        if (x.name != y.name || x.indices != y.indices || x.range != y.range ||
            !expr_equal(x.body, y.body))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Lexer + parser

namespace detail {

struct Token {
    enum Type { Ident, Int, Sym, End } type = End;
    std::string text;   // Ident / Sym (".." is one symbol)
    Integer value = 0;  // Int
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip();
        tok_ = {};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= text_.size()) {
            tok_.type = Token::End;
            return;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                bump();
            tok_.type = Token::Ident;
            tok_.text = std::string(text_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                bump();
            tok_.type = Token::Int;
            tok_.value = Integer(std::string(text_.substr(start, pos_ - start)));
            return;
        }
        if (c == '.' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '.') {
            bump();
            bump();
            tok_.type = Token::Sym;
            tok_.text = "..";
            return;
        }
        if (std::string_view("=;[](),+-*/^").find(c) != std::string_view::npos) {
            bump();
            tok_.type = Token::Sym;
            tok_.text = std::string(1, c);
            return;
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') bump();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    DslProgram program() {
        DslProgram prog;
        while (lex_.peek().type != Token::End) {
            if (lex_.peek().type == Token::Ident && lex_.peek().text == "param") {
                lex_.take();
                Token name = expect(Token::Ident, "parameter name");
                if (name.text == "param" || name.text == "for" || name.text == "in")
                    throw ParseError(name.line, name.col, "reserved word as parameter name");
                if (prog.find_param(name.text))
                    throw ParseError(name.line, name.col, "duplicate parameter " + name.text);
                expect_sym("=");
                prog.params.emplace_back(name.text, rational_literal());
                accept_sym(";");  // optional terminator
                params_.insert(name.text);
            } else {
                prog.rules.push_back(rule());
            }
        }
        return prog;
    }

private:
    Rule rule() {
        Rule r;
        Token name = expect(Token::Ident, "rule head");
        r.name = name.text;
        if (accept_sym("[")) {
            r.indices.push_back(affine());
            while (accept_sym(",")) r.indices.push_back(affine());
            expect_sym("]");
        }
        expect_sym("=");
        r.body = expr();
        if (lex_.peek().type == Token::Ident && lex_.peek().text == "for") {
            lex_.take();
            Token v = expect(Token::Ident, "loop variable");
            Token in = expect(Token::Ident, "'in'");
            if (in.text != "in") throw ParseError(in.line, in.col, "expected 'in'");
            Range rg;
            rg.var = v.text;
            rg.lo = int_bound();
            expect_sym("..");
            rg.hi = int_bound();
            r.range = rg;
        }
        expect_sym(";");
        return r;
    }

    long int_bound() {
        bool neg = accept_sym("-");
        Token t = expect(Token::Int, "integer");
        long v = static_cast<long>(t.value.get_si());
        return neg ? -v : v;
    }

    Rational rational_literal() {
        bool neg = accept_sym("-");
        Token num = expect(Token::Int, "integer");
        Rational r(num.value);
        if (accept_sym("/")) {
            Token den = expect(Token::Int, "denominator");
            if (den.value == 0) throw ParseError(den.line, den.col, "zero denominator");
            r = Rational(num.value, den.value);
            r.canonicalize();
        }
        return neg ? Rational(-r) : r;
    }

    // sum of products with +, -, *, /, unary -, and ^ on factors
    ExprPtr expr() {
        ExprPtr e = term();
        while (lex_.peek().type == Token::Sym &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            char op = lex_.take().text[0];
            e = Expr::binary(op, e, term());
        }
        return e;
    }

    ExprPtr term() {
        ExprPtr e = factor();
        while (lex_.peek().type == Token::Sym &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            char op = lex_.take().text[0];
            e = Expr::binary(op, e, factor());
        }
        return e;
    }

    ExprPtr factor() {
        if (accept_sym("-")) return Expr::neg(factor());
        ExprPtr base = atom();
        if (accept_sym("^")) {
            Token k = expect(Token::Int, "nonnegative integer exponent");
            return Expr::pow(base, k.value.get_ui());
        }
        return base;
    }

    ExprPtr atom() {
        Token t = lex_.peek();
        if (t.type == Token::Int) {
            lex_.take();
            return Expr::lit(Rational(t.value));
        }
        if (t.type == Token::Ident) {
            if (t.text == "param" || t.text == "for" || t.text == "in")
                throw ParseError(t.line, t.col, "unexpected keyword '" + t.text + "'");
            lex_.take();
            if (accept_sym("[")) {
                std::vector<AffineExpr> idx;
                idx.push_back(affine());
                while (accept_sym(",")) idx.push_back(affine());
                expect_sym("]");
                return Expr::var(t.text, std::move(idx));
            }
            if (params_.count(t.text)) return Expr::param(t.text);
            return Expr::var(t.text);
        }
        if (t.type == Token::Sym && t.text == "(") {
            lex_.take();
            ExprPtr e = expr();
            expect_sym(")");
            return e;
        }
        throw ParseError(t.line, t.col, "expected an expression");
    }

    // INT, IDENT, INT*IDENT, IDENT*INT, combined with + and -.
    AffineExpr affine() {
        AffineExpr a;
        long sign = 1;
        if (accept_sym("-")) sign = -1;
        affine_term(a, sign);
        while (true) {
            if (accept_sym("+")) {
                affine_term(a, 1);
            } else if (accept_sym("-")) {
                affine_term(a, -1);
            } else {
                return a;
            }
        }
    }

    void affine_term(AffineExpr& a, long sign) {
        Token t = lex_.peek();
        if (t.type == Token::Int) {
            lex_.take();
            long c = static_cast<long>(t.value.get_si());
            if (accept_sym("*")) {
                Token v = lex_.take();
                if (v.type != Token::Ident)
                    throw ParseError(v.line, v.col, "non-affine index expression");
                a.coeffs[v.text] += sign * c;
            } else {
                a.constant += sign * c;
            }
        } else if (t.type == Token::Ident) {
            lex_.take();
            long c = 1;
            if (accept_sym("*")) {
                Token k = lex_.take();
                if (k.type != Token::Int)
                    throw ParseError(k.line, k.col, "non-affine index expression");
                c = static_cast<long>(k.value.get_si());
            }
            a.coeffs[t.text] += sign * c;
        } else {
            throw ParseError(t.line, t.col, "expected an index expression");
        }
    }

    Token expect(Token::Type type, const std::string& what) {
        Token t = lex_.peek();
        if (t.type != type)
            throw ParseError(t.line, t.col, "expected " + what);
        return lex_.take();
    }
    void expect_sym(const std::string& s) {
        Token t = lex_.peek();
        if (t.type != Token::Sym || t.text != s)
            throw ParseError(t.line, t.col, "expected '" + s + "'");
        lex_.take();
    }
    bool accept_sym(const std::string& s) {
        if (lex_.peek().type == Token::Sym && lex_.peek().text == s) {
            lex_.take();
            return true;
        }
        return false;
    }

    Lexer lex_;
    std::set<std::string> params_;
};

}  // namespace detail

inline DslProgram parse(std::string_view text) {
    return detail::Parser(text).program();
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline void print_affine(std::ostream& os, const AffineExpr& a) {
    bool first = true;
    for (const auto& [name, c] : a.coeffs) {
        if (c == 0) continue;
        if (!first) os << (c > 0 ? "+" : "-");
        else if (c < 0) os << "-";
        long ac = c < 0 ? -c : c;
        if (ac != 1) os << ac << "*";
        os << name;
        first = false;
    }
    if (first) {
        os << a.constant;
    } else if (a.constant != 0) {
        os << (a.constant > 0 ? "+" : "-") << (a.constant > 0 ? a.constant : -a.constant);
    }
}

// precedence levels: 1 sum, 2 product, 3 unary minus, 4 power base
inline void print_expr(std::ostream& os, const ExprPtr& e, int parent) {
    auto wrap = [&](int own, auto body) {
        if (own < parent) {
            os << "(";
            body();
            os << ")";
        } else {
            body();
        }
    };
    switch (e->kind) {
        case Expr::Literal: os << e->literal.get_str(); break;
        case Expr::ParamRef: os << e->name; break;
        case Expr::VarRef:
            os << e->name;
            if (!e->indices.empty()) {
                os << "[";
                for (size_t i = 0; i < e->indices.size(); ++i) {
                    if (i) os << ",";
                    print_affine(os, e->indices[i]);
                }
                os << "]";
            }
            break;
        case Expr::Binary: {
            int own = (e->op == '+' || e->op == '-') ? 1 : 2;
            wrap(own, [&] {
                print_expr(os, e->lhs, own);
                os << " " << e->op << " ";
                print_expr(os, e->rhs, own + 1);
            });
            break;
        }
        case Expr::Negate:
            wrap(3, [&] {
                os << "-";
                print_expr(os, e->lhs, 3);
            });
            break;
        case Expr::Power:
            wrap(3, [&] {
                print_expr(os, e->lhs, 4);
                os << "^" << e->power;
            });
            break;
    }
}

}  // namespace detail

inline std::string print_program(const DslProgram& prog) {
    std::ostringstream os;
    for (const auto& [name, v] : prog.params)
        os << "param " << name << " = " << v.get_str() << ";\n";
    for (const Rule& r : prog.rules) {
        os << r.name;
        if (!r.indices.empty()) {
            os << "[";
            for (size_t i = 0; i < r.indices.size(); ++i) {
                if (i) os << ",";
                detail::print_affine(os, r.indices[i]);
            }
            os << "]";
        }
        os << " = ";
        detail::print_expr(os, r.body, 0);
        if (r.range)
            os << " for " << r.range->var << " in " << r.range->lo << ".." << r.range->hi;
        os << ";\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Elaboration: expression trees -> single fractions of expanded
// SparsePolys (no gcd cancellation), then build_spec.

namespace detail {

inline SparsePoly poly_neg(const SparsePoly& a) {
    SparsePoly r;
    for (const auto& [m, c] : a.terms) r.terms.emplace(m, -c);
    return r;
}

inline SparsePoly poly_add(const SparsePoly& a, const SparsePoly& b) {
    SparsePoly r = a;
    for (const auto& [m, c] : b.terms) r.add_term(m, c);
    return r;
}

inline SparsePoly poly_mul(const SparsePoly& a, const SparsePoly& b, size_t arity,
                           size_t cap) {
    SparsePoly r;
    for (const auto& [ma, ca] : a.terms) {
        for (const auto& [mb, cb] : b.terms) {
            Monomial m(arity, 0);
            for (size_t j = 0; j < arity; ++j)
                m[j] = (j < ma.size() ? ma[j] : 0) + (j < mb.size() ? mb[j] : 0);
            r.add_term(std::move(m), ca * cb);
            if (r.terms.size() > cap)
                throw DomainError("monomial cap exceeded during expansion");
        }
    }
    return r;
}

struct Frac {
    SparsePoly num, den;
};

struct NodeEvaluator {
    const DslProgram& prog;
    const std::map<std::string, long>& binding;  // loop variable values
    const std::set<NodeId>& defined;
    std::vector<NodeId> vars;  // sorted predecessor list
    size_t cap;

    Frac constant(Rational c) const {
        return {SparsePoly::constant(std::move(c)), SparsePoly::constant(Rational(1))};
    }

    Frac eval(const ExprPtr& e) const {
        switch (e->kind) {
            case Expr::Literal: return constant(e->literal);
            case Expr::ParamRef: {
                const Rational* v = prog.find_param(e->name);
                if (!v) throw DomainError("unknown parameter " + e->name);
                return constant(*v);
            }
            case Expr::VarRef: {
                NodeId id = resolve(e);
                size_t j = static_cast<size_t>(
                    std::lower_bound(vars.begin(), vars.end(), id) - vars.begin());
                Monomial m(vars.size(), 0);
                m[j] = 1;
                SparsePoly p;
                p.terms.emplace(std::move(m), Rational(1));
                return {std::move(p), SparsePoly::constant(Rational(1))};
            }
            case Expr::Negate: {
                Frac f = eval(e->lhs);
                f.num = poly_neg(f.num);
                return f;
            }
            case Expr::Power: {
                Frac b = eval(e->lhs);
                Frac r = constant(Rational(1));
                for (unsigned long i = 0; i < e->power; ++i) {
                    r.num = poly_mul(r.num, b.num, vars.size(), cap);
                    r.den = poly_mul(r.den, b.den, vars.size(), cap);
                }
                return r;
            }
            case Expr::Binary: {
                Frac a = eval(e->lhs), b = eval(e->rhs);
                size_t n = vars.size();
                switch (e->op) {
                    case '+':
                        return {poly_add(poly_mul(a.num, b.den, n, cap),
                                         poly_mul(b.num, a.den, n, cap)),
                                poly_mul(a.den, b.den, n, cap)};
                    case '-':
                        return {poly_add(poly_mul(a.num, b.den, n, cap),
                                         poly_neg(poly_mul(b.num, a.den, n, cap))),
                                poly_mul(a.den, b.den, n, cap)};
                    case '*':
                        return {poly_mul(a.num, b.num, n, cap),
                                poly_mul(a.den, b.den, n, cap)};
                    case '/': {
                        SparsePoly den = poly_mul(a.den, b.num, n, cap);
                        if (den.is_zero())
                            throw DomainError("denominator reduces to the zero polynomial");
                        return {poly_mul(a.num, b.den, n, cap), std::move(den)};
                    }
                }
                throw DomainError("bad operator");
            }
        }
        throw DomainError("bad expression node");
    }

    NodeId resolve(const ExprPtr& e) const {
        if (binding.count(e->name) && e->indices.empty())
            throw DomainError("loop variable " + e->name + " used outside an index");
        NodeId id{e->name, {}};
        for (const AffineExpr& a : e->indices) id.index.push_back(a.eval(binding));
        if (!defined.count(id))
            throw DomainError("undefined node referenced: " + id.str());
        return id;
    }

    void collect_vars(const ExprPtr& e, std::set<NodeId>& out) const {
        switch (e->kind) {
            case Expr::VarRef: out.insert(resolve(e)); break;
            case Expr::Binary:
                collect_vars(e->lhs, out);
                collect_vars(e->rhs, out);
                break;
            case Expr::Power:
            case Expr::Negate: collect_vars(e->lhs, out); break;
            default: break;
        }
    }
};

}  // namespace detail

/// Expands ranges and reduces each rule to a P/Q pair of expanded sparse
/// polynomials. The cap bounds the monomial count per node.
inline RecurrenceSpec elaborate(const DslProgram& prog, const PrimeContext& ctx,
                                size_t monomial_cap = 100000) {
    struct Instance {
        const Rule* rule;
        std::map<std::string, long> binding;
        NodeId id;
    };
    std::vector<Instance> instances;
    std::set<NodeId> defined;
    for (const Rule& r : prog.rules) {
        std::vector<std::map<std::string, long>> bindings;
        if (r.range) {
            if (r.range->lo > r.range->hi)
                throw DomainError("empty or descending range for " + r.name);
            for (long v = r.range->lo; v <= r.range->hi; ++v)
                bindings.push_back({{r.range->var, v}});
        } else {
            bindings.push_back({});
        }
        for (auto& b : bindings) {
            NodeId id{r.name, {}};
            for (const AffineExpr& a : r.indices) id.index.push_back(a.eval(b));
            if (!defined.insert(id).second)
                throw DomainError("duplicate definition for node " + id.str());
            instances.push_back({&r, std::move(b), std::move(id)});
        }
    }

    std::vector<NodeDef> defs;
    defs.reserve(instances.size());
    for (const Instance& inst : instances) {
        detail::NodeEvaluator ev{prog, inst.binding, defined, {}, monomial_cap};
        std::set<NodeId> used;
        ev.collect_vars(inst.rule->body, used);
        // A self-reference stays in the list; build_spec rejects the cycle.
        ev.vars.assign(used.begin(), used.end());
        detail::Frac f = ev.eval(inst.rule->body);
        if (f.den.is_zero())
            throw DomainError("denominator reduces to the zero polynomial at " +
                              inst.id.str());
        defs.push_back(NodeDef{inst.id, ev.vars, std::move(f.num), std::move(f.den)});
    }
    return build_spec(std::move(defs), ctx);
}

}  // namespace padiclab
