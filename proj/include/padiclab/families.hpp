#pragma once

#include <string>
#include <vector>

#include "padiclab/dsl.hpp"
#include "padiclab/recurrence.hpp"

namespace padiclab {

/// Request for one of the built-in recurrence families.
struct FamilyRequest {
    std::string name;  // counterexample | frieze | somos | fz54 | dodgson | polynomial-demo

    unsigned n = 0;                             // frieze size / dodgson matrix size
    std::vector<Rational> c;                    // frieze c_0..c_{n-1}
    unsigned k = 4;                             // somos order
    std::vector<Rational> a;                    // somos a_1..a_{floor(k/2)}
    long length = 11;                           // last sequence index
    Rational fz_c{1}, fz_d{1}, x0{1}, x1{1};    // fz54 parameters
    std::vector<std::vector<Rational>> matrix;  // dodgson input
};

namespace detail {

inline Monomial unit_monomial(size_t arity, size_t j, unsigned e = 1) {
    Monomial m(arity, 0);
    m[j] = e;
    return m;
}

inline NodeDef constant_node(NodeId id, Rational value) {
    return NodeDef{std::move(id), {}, SparsePoly::constant(std::move(value)),
                   SparsePoly::constant(Rational(1))};
}

}  // namespace detail

inline std::vector<NodeDef> counterexample_defs() {
    std::vector<NodeDef> defs;
    defs.push_back(detail::constant_node(node("x", {0}), Rational(5)));
    defs.push_back(detail::constant_node(node("x", {1}), Rational(-5)));
    for (long m = 2; m <= 7; ++m) {
        // preds sorted: x[m-2] < x[m-1]
        NodeDef d;
        d.id = node("x", {m});
        d.predecessors = {node("x", {m - 2}), node("x", {m - 1})};
        d.P.add_term({0, 1}, Rational(1));
        d.P.add_term({0, 0}, Rational(-1));
        d.Q.add_term({1, 0}, Rational(1));
        defs.push_back(std::move(d));
    }
    return defs;
}

inline std::vector<NodeDef> frieze_defs(unsigned n, const std::vector<Rational>& c) {
    if (c.size() != n) throw DomainError("frieze: need exactly n constants c_0..c_{n-1}");
    std::vector<NodeDef> defs;
    for (unsigned b = 0; b <= n; ++b)
        defs.push_back(detail::constant_node(node("x", {0, b}), Rational(1)));
    for (unsigned b = 0; b + 1 <= n; ++b)
        defs.push_back(detail::constant_node(node("x", {1, b}), c[b]));
    for (unsigned aa = 2; aa <= n; ++aa) {
        for (unsigned b = 0; b + aa <= n; ++b) {
            NodeDef d;
            d.id = node("x", {aa, b});
            // sorted: x[a-2,b+1] < x[a-1,b] < x[a-1,b+1]
            d.predecessors = {node("x", {aa - 2, b + 1}), node("x", {aa - 1, b}),
                              node("x", {aa - 1, b + 1})};
            d.P.add_term({0, 1, 1}, Rational(1));
            d.P.add_term({0, 0, 0}, Rational(-1));
            d.Q.add_term({1, 0, 0}, Rational(1));
            defs.push_back(std::move(d));
        }
    }
    return defs;
}

inline std::vector<NodeDef> somos_defs(unsigned k, const std::vector<Rational>& a,
                                       long length) {
    if (k < 2) throw DomainError("somos: order k must be at least 2");
    if (a.size() != k / 2)
        throw DomainError("somos: need exactly floor(k/2) coefficients");
    if (length + 1 < static_cast<long>(k))
        throw DomainError("somos: length shorter than the initial segment");
    std::vector<NodeDef> defs;
    for (long m = 0; m < static_cast<long>(k); ++m)
        defs.push_back(detail::constant_node(node("x", {m}), Rational(1)));
    for (long m = k; m <= length; ++m) {
        NodeDef d;
        d.id = node("x", {m});
        std::set<long> idx{m - static_cast<long>(k)};
        for (unsigned i = 1; i <= k / 2; ++i) {
            if (a[i - 1] == 0) continue;
            idx.insert(m - static_cast<long>(k) + i);
            idx.insert(m - static_cast<long>(i));
        }
        std::map<long, size_t> pos;
        for (long j : idx) {
            pos[j] = d.predecessors.size();
            d.predecessors.push_back(node("x", {j}));
        }
        size_t arity = d.predecessors.size();
        for (unsigned i = 1; i <= k / 2; ++i) {
            if (a[i - 1] == 0) continue;
            Monomial mon(arity, 0);
            mon[pos[m - static_cast<long>(k) + i]] += 1;
            mon[pos[m - static_cast<long>(i)]] += 1;
            d.P.add_term(std::move(mon), a[i - 1]);
        }
        d.Q.add_term(detail::unit_monomial(arity, pos[m - static_cast<long>(k)]),
                     Rational(1));
        defs.push_back(std::move(d));
    }
    return defs;
}

inline std::vector<NodeDef> fz54_defs(const Rational& c, const Rational& d,
                                      const Rational& x0, const Rational& x1,
                                      long length) {
    if (length < 1) throw DomainError("fz54: length must be at least 1");
    std::vector<NodeDef> defs;
    defs.push_back(detail::constant_node(node("x", {0}), x0));
    defs.push_back(detail::constant_node(node("x", {1}), x1));
    for (long m = 2; m <= length; ++m) {
        NodeDef nd;
        nd.id = node("x", {m});
        nd.predecessors = {node("x", {m - 2}), node("x", {m - 1})};
        nd.P.add_term({0, 2}, Rational(1));
        nd.P.add_term({0, 1}, c);
        nd.P.add_term({0, 0}, d);
        nd.Q.add_term({1, 0}, Rational(1));
        defs.push_back(std::move(nd));
    }
    return defs;
}

/// Dodgson condensation of an n x n matrix: node (k,i,j) is the k x k
/// connected minor with top-left corner (i,j), 1-based. Level 0 is the
/// (n+1)^2 constant-1 border, level 1 the matrix entries, and the top
/// node (n,1,1) the determinant.
inline std::vector<NodeDef> dodgson_defs(const std::vector<std::vector<Rational>>& m) {
    size_t n = m.size();
    if (n == 0) throw DomainError("dodgson: empty matrix");
    for (const auto& row : m)
        if (row.size() != n) throw DomainError("dodgson: matrix must be square");
    std::vector<NodeDef> defs;
    for (long i = 1; i <= static_cast<long>(n) + 1; ++i)
        for (long j = 1; j <= static_cast<long>(n) + 1; ++j)
            defs.push_back(detail::constant_node(node("m", {0, i, j}), Rational(1)));
    for (long i = 1; i <= static_cast<long>(n); ++i)
        for (long j = 1; j <= static_cast<long>(n); ++j)
            defs.push_back(detail::constant_node(node("m", {1, i, j}), m[i - 1][j - 1]));
    for (long k = 2; k <= static_cast<long>(n); ++k) {
        for (long i = 1; i + k - 1 <= static_cast<long>(n); ++i) {
            for (long j = 1; j + k - 1 <= static_cast<long>(n); ++j) {
                NodeDef d;
                d.id = node("m", {k, i, j});
                // sorted: center minor, then the four level-(k-1) minors
                d.predecessors = {node("m", {k - 2, i + 1, j + 1}),
                                  node("m", {k - 1, i, j}),
                                  node("m", {k - 1, i, j + 1}),
                                  node("m", {k - 1, i + 1, j}),
                                  node("m", {k - 1, i + 1, j + 1})};
                d.P.add_term({0, 1, 0, 0, 1}, Rational(1));
                d.P.add_term({0, 0, 1, 1, 0}, Rational(-1));
                d.Q.add_term({1, 0, 0, 0, 0}, Rational(1));
                defs.push_back(std::move(d));
            }
        }
    }
    return defs;
}

/// Division-free recurrence (all Q = 1) with several monomials per node.
inline std::vector<NodeDef> polynomial_demo_defs(long length) {
    if (length < 1) throw DomainError("polynomial-demo: length must be at least 1");
    std::vector<NodeDef> defs;
    defs.push_back(detail::constant_node(node("x", {0}), Rational(1)));
    defs.push_back(detail::constant_node(node("x", {1}), Rational(2)));
    for (long m = 2; m <= length; ++m) {
        NodeDef d;
        d.id = node("x", {m});
        d.predecessors = {node("x", {m - 2}), node("x", {m - 1})};
        d.P.add_term({1, 1}, Rational(1));  // x[m-1]*x[m-2]
        d.P.add_term({1, 0}, Rational(1));  // x[m-2]
        d.P.add_term({0, 0}, Rational(1));  // 1
        d.Q.add_term({0, 0}, Rational(1));
        defs.push_back(std::move(d));
    }
    return defs;
}

inline std::vector<NodeDef> family_defs(const FamilyRequest& req) {
    if (req.name == "counterexample") return counterexample_defs();
    if (req.name == "frieze") return frieze_defs(req.n, req.c);
    if (req.name == "somos") return somos_defs(req.k, req.a, req.length);
    if (req.name == "fz54") return fz54_defs(req.fz_c, req.fz_d, req.x0, req.x1, req.length);
    if (req.name == "dodgson") return dodgson_defs(req.matrix);
    if (req.name == "polynomial-demo") return polynomial_demo_defs(req.length);
    throw DomainError("unknown family: " + req.name);
}

/// Builds and validates a family spec. Frieze constants of negative
/// valuation are rejected here.
inline RecurrenceSpec builtin_family(const FamilyRequest& req, const PrimeContext& ctx) {
    if (req.name == "frieze") {
        for (const Rational& cb : req.c)
            if (ctx.valuation(cb) < Valuation(0))
                throw DomainError("frieze: constant " + cb.get_str() +
                                  " has negative valuation at p=" +
                                  std::to_string(ctx.prime()));
    }
    return build_spec(family_defs(req), ctx);
}

// ---------------------------------------------------------------------------
// .rec emission. Built independently of family_defs so the two routes
// cross-check each other.

namespace detail {

inline AffineExpr aff_const(long v) {
    AffineExpr a;
    a.constant = v;
    return a;
}
inline AffineExpr aff_var(const std::string& name, long offset = 0) {
    AffineExpr a;
    a.coeffs[name] = 1;
    a.constant = offset;
    return a;
}
inline ExprPtr const_expr(const Rational& v, DslProgram& prog, const std::string& pname) {
    // Integers are plain literals; anything else goes through a param so
    // the printed text re-parses to the same structure.
    if (v.get_den() == 1) {
        Integer num(v.get_num());
        if (num >= 0) return Expr::lit(v);
        return Expr::neg(Expr::lit(Rational(-num)));
    }
    prog.params.emplace_back(pname, v);
    return Expr::param(pname);
}

}  // namespace detail

/// The family rendered as a DSL program (the text form of cmd_family).
inline DslProgram family_program(const FamilyRequest& req) {
    using detail::aff_const;
    using detail::aff_var;
    DslProgram prog;
    auto var1 = [](const std::string& n, AffineExpr i) {
        return Expr::var(n, {std::move(i)});
    };

    if (req.name == "counterexample") {
        prog.rules.push_back({"x", {aff_const(0)}, Expr::lit(Rational(5)), {}});
        prog.rules.push_back({"x", {aff_const(1)}, Expr::neg(Expr::lit(Rational(5))), {}});
        ExprPtr body = Expr::binary(
            '/', Expr::binary('-', var1("x", aff_var("n", -1)), Expr::lit(Rational(1))),
            var1("x", aff_var("n", -2)));
        prog.rules.push_back({"x", {aff_var("n")}, body, Range{"n", 2, 7}});
        return prog;
    }
    if (req.name == "frieze") {
        if (req.c.size() != req.n) throw DomainError("frieze: need n constants");
        std::vector<ExprPtr> cexpr;
        for (unsigned b = 0; b < req.n; ++b)
            cexpr.push_back(detail::const_expr(req.c[b], prog, "c" + std::to_string(b)));
        for (long b = 0; b <= req.n; ++b)
            prog.rules.push_back({"x", {aff_const(0), aff_const(b)}, Expr::lit(Rational(1)), {}});
        for (long b = 0; b + 1 <= req.n; ++b)
            prog.rules.push_back({"x", {aff_const(1), aff_const(b)}, cexpr[b], {}});
        for (long a = 2; a <= req.n; ++a) {
            for (long b = 0; b + a <= req.n; ++b) {
                ExprPtr body = Expr::binary(
                    '/',
                    Expr::binary('-',
                                 Expr::binary('*',
                                              Expr::var("x", {aff_const(a - 1), aff_const(b)}),
                                              Expr::var("x", {aff_const(a - 1), aff_const(b + 1)})),
                                 Expr::lit(Rational(1))),
                    Expr::var("x", {aff_const(a - 2), aff_const(b + 1)}));
                prog.rules.push_back({"x", {aff_const(a), aff_const(b)}, body, {}});
            }
        }
        return prog;
    }
    if (req.name == "somos") {
        if (req.a.size() != req.k / 2) throw DomainError("somos: need floor(k/2) coefficients");
        std::vector<ExprPtr> aexpr;
        for (unsigned i = 1; i <= req.k / 2; ++i)
            aexpr.push_back(detail::const_expr(req.a[i - 1], prog, "a" + std::to_string(i)));
        prog.rules.push_back({"x", {aff_var("i")}, Expr::lit(Rational(1)),
                              Range{"i", 0, static_cast<long>(req.k) - 1}});
        ExprPtr sum;
        for (unsigned i = 1; i <= req.k / 2; ++i) {
            ExprPtr term = Expr::binary(
                '*',
                Expr::binary('*', aexpr[i - 1],
                             var1("x", aff_var("n", static_cast<long>(i) - static_cast<long>(req.k)))),
                var1("x", aff_var("n", -static_cast<long>(i))));
            sum = sum ? Expr::binary('+', sum, term) : term;
        }
        ExprPtr body = Expr::binary('/', sum, var1("x", aff_var("n", -static_cast<long>(req.k))));
        prog.rules.push_back({"x", {aff_var("n")}, body,
                              Range{"n", static_cast<long>(req.k), req.length}});
        return prog;
    }
    if (req.name == "fz54") {
        ExprPtr c = detail::const_expr(req.fz_c, prog, "c");
        ExprPtr d = detail::const_expr(req.fz_d, prog, "d");
        ExprPtr i0 = detail::const_expr(req.x0, prog, "init0");
        ExprPtr i1 = detail::const_expr(req.x1, prog, "init1");
        prog.rules.push_back({"x", {aff_const(0)}, i0, {}});
        prog.rules.push_back({"x", {aff_const(1)}, i1, {}});
        ExprPtr prev = var1("x", aff_var("n", -1));
        ExprPtr body = Expr::binary(
            '/',
            Expr::binary('+', Expr::binary('+', Expr::pow(prev, 2), Expr::binary('*', c, prev)),
                         d),
            var1("x", aff_var("n", -2)));
        prog.rules.push_back({"x", {aff_var("n")}, body, Range{"n", 2, req.length}});
        return prog;
    }
    if (req.name == "dodgson") {
        size_t n = req.matrix.size();
        if (n == 0) throw DomainError("dodgson: empty matrix");
        for (long i = 1; i <= static_cast<long>(n) + 1; ++i)
            for (long j = 1; j <= static_cast<long>(n) + 1; ++j)
                prog.rules.push_back({"m", {aff_const(0), aff_const(i), aff_const(j)},
                                      Expr::lit(Rational(1)), {}});
        for (long i = 1; i <= static_cast<long>(n); ++i)
            for (long j = 1; j <= static_cast<long>(n); ++j) {
                ExprPtr e = detail::const_expr(req.matrix[i - 1][j - 1], prog,
                                               "e" + std::to_string(i) + "_" + std::to_string(j));
                prog.rules.push_back({"m", {aff_const(1), aff_const(i), aff_const(j)}, e, {}});
            }
        auto mref = [&](long k, long i, long j) {
            return Expr::var("m", {aff_const(k), aff_const(i), aff_const(j)});
        };
        for (long k = 2; k <= static_cast<long>(n); ++k)
            for (long i = 1; i + k - 1 <= static_cast<long>(n); ++i)
                for (long j = 1; j + k - 1 <= static_cast<long>(n); ++j) {
                    ExprPtr body = Expr::binary(
                        '/',
                        Expr::binary('-',
                                     Expr::binary('*', mref(k - 1, i, j), mref(k - 1, i + 1, j + 1)),
                                     Expr::binary('*', mref(k - 1, i, j + 1), mref(k - 1, i + 1, j))),
                        mref(k - 2, i + 1, j + 1));
                    prog.rules.push_back({"m", {aff_const(k), aff_const(i), aff_const(j)}, body, {}});
                }
        return prog;
    }
    if (req.name == "polynomial-demo") {
        prog.rules.push_back({"x", {aff_const(0)}, Expr::lit(Rational(1)), {}});
        prog.rules.push_back({"x", {aff_const(1)}, Expr::lit(Rational(2)), {}});
        ExprPtr body = Expr::binary(
            '+',
            Expr::binary('+',
                         Expr::binary('*', var1("x", aff_var("n", -1)), var1("x", aff_var("n", -2))),
                         var1("x", aff_var("n", -2))),
            Expr::lit(Rational(1)));
        prog.rules.push_back({"x", {aff_var("n")}, body, Range{"n", 2, req.length}});
        return prog;
    }
    throw DomainError("unknown family: " + req.name);
}

inline std::string family_rec_text(const FamilyRequest& req) {
    return print_program(family_program(req));
}

}  // namespace padiclab
