#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "padiclab/digits.hpp"
#include "padiclab/valuation.hpp"

namespace padiclab {

/// Node identity: a family tag plus an index tuple, e.g. x[3] or x[2,1].
struct NodeId {
    std::string family;
    std::vector<long> index;

    auto operator<=>(const NodeId&) const = default;

    std::string str() const {
        if (index.empty()) return family;
        std::ostringstream os;
        os << family << '[';
        for (size_t i = 0; i < index.size(); ++i) {
            if (i) os << ',';
            os << index[i];
        }
        os << ']';
        return os.str();
    }

    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (char c : family) h = splitmix64(h ^ static_cast<unsigned char>(c));
        for (long i : index) h = splitmix64(h ^ static_cast<std::uint64_t>(i));
        return h;
    }
};

inline NodeId node(std::string family, std::initializer_list<long> idx = {}) {
    return NodeId{std::move(family), std::vector<long>(idx)};
}

/// Exponent tuple aligned with a node's ordered predecessor list.
using Monomial = std::vector<unsigned>;

/// Multivariate polynomial as a sparse monomial-to-coefficient map.
/// Invariant: no zero coefficients stored; the empty map is the zero
/// polynomial.
struct SparsePoly {
    std::map<Monomial, Rational> terms;

    static SparsePoly constant(Rational c) {
        SparsePoly p;
        if (c != 0) p.terms.emplace(Monomial{}, std::move(c));
        return p;
    }

    bool is_zero() const { return terms.empty(); }
    bool is_constant() const {
        for (const auto& [m, c] : terms)
            for (unsigned e : m)
                if (e != 0) return false;
        return true;
    }

    void add_term(Monomial m, const Rational& c) {
        if (c == 0) return;
        auto [it, fresh] = terms.emplace(std::move(m), c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms.erase(it);
        }
    }

    friend bool operator==(const SparsePoly&, const SparsePoly&) = default;
};

/// One node of a recurrence: value = P(predecessors) / Q(predecessors).
struct NodeDef {
    NodeId id;
    std::vector<NodeId> predecessors;  // ordered; monomials index into this
    SparsePoly P, Q;
};

/// A validated recurrence: nodes in deterministic topological order,
/// coefficients jointly normalized per node, and the derived strict
/// partial order (reachability through predecessor edges).
class RecurrenceSpec {
public:
    const std::vector<NodeDef>& nodes() const { return nodes_; }
    const PrimeContext& context() const { return ctx_; }

    size_t size() const { return nodes_.size(); }
    const NodeDef& operator[](size_t i) const { return nodes_[i]; }

    size_t index_of(const NodeId& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw DomainError("unknown node " + id.str());
        return it->second;
    }
    bool contains(const NodeId& id) const { return index_.count(id) != 0; }

    /// Indices of all nodes strictly below node i, ascending.
    std::span<const std::uint32_t> ancestors(size_t i) const { return ancestors_[i]; }

    /// The derived strict order: t < s.
    bool less(const NodeId& t, const NodeId& s) const {
        size_t ti = index_of(t), si = index_of(s);
        const auto& anc = ancestors_[si];
        return std::binary_search(anc.begin(), anc.end(), static_cast<std::uint32_t>(ti));
    }

    /// Power of p each node's (P, Q) pair was divided by during
    /// normalization.
    const std::vector<long>& normalization_shifts() const { return shifts_; }

    friend RecurrenceSpec build_spec(std::vector<NodeDef> defs, const PrimeContext& ctx);

private:
    explicit RecurrenceSpec(const PrimeContext& ctx) : ctx_(ctx) {}
    PrimeContext ctx_;
    std::vector<NodeDef> nodes_;
    std::map<NodeId, size_t> index_;
    std::vector<std::vector<std::uint32_t>> ancestors_;
    std::vector<long> shifts_;
};

namespace detail {

/// Drops predecessors that appear in no monomial of P or Q, so that
/// "predecessor of" coincides with "f_s nonconstant in x_t".
inline void prune_unused_predecessors(NodeDef& def) {
    size_t n = def.predecessors.size();
    std::vector<bool> used(n, false);
    for (const SparsePoly* poly : {&def.P, &def.Q})
        for (const auto& [m, c] : poly->terms)
            for (size_t j = 0; j < m.size() && j < n; ++j)
                if (m[j] != 0) used[j] = true;
    if (std::all_of(used.begin(), used.end(), [](bool b) { return b; })) return;

    std::vector<NodeId> preds;
    std::vector<size_t> remap(n);
    for (size_t j = 0; j < n; ++j) {
        if (used[j]) {
            remap[j] = preds.size();
            preds.push_back(def.predecessors[j]);
        }
    }
    auto shrink = [&](SparsePoly& poly) {
        SparsePoly out;
        for (const auto& [m, c] : poly.terms) {
            Monomial mm(preds.size(), 0);
            for (size_t j = 0; j < m.size() && j < n; ++j)
                if (used[j]) mm[remap[j]] = m[j];
            out.add_term(std::move(mm), c);
        }
        poly = std::move(out);
    };
    shrink(def.P);
    shrink(def.Q);
    def.predecessors = std::move(preds);
}

}  // namespace detail

/// Validates the node set, derives the dependency order, and normalizes
/// each node's coefficients so the minimum valuation over P and Q is 0.
inline RecurrenceSpec build_spec(std::vector<NodeDef> defs, const PrimeContext& ctx) {
    std::map<NodeId, size_t> by_id;
    for (size_t i = 0; i < defs.size(); ++i) {
        if (defs[i].Q.is_zero())
            throw DomainError("node " + defs[i].id.str() + ": Q is the zero polynomial");
        detail::prune_unused_predecessors(defs[i]);
        if (!by_id.emplace(defs[i].id, i).second)
            throw DomainError("duplicate node id " + defs[i].id.str());
    }
    for (const NodeDef& d : defs)
        for (const NodeId& p : d.predecessors)
            if (!by_id.count(p))
                throw DomainError("node " + d.id.str() + ": undefined predecessor " + p.str());

    // Kahn layers; ready nodes taken in id order, so the result does not
    // depend on the order the defs were supplied in.
    std::vector<size_t> indeg(defs.size(), 0);
    std::vector<std::vector<size_t>> dependents(defs.size());
    for (size_t i = 0; i < defs.size(); ++i) {
        std::set<NodeId> distinct(defs[i].predecessors.begin(), defs[i].predecessors.end());
        indeg[i] = distinct.size();
        for (const NodeId& p : distinct) dependents[by_id[p]].push_back(i);
    }
    std::set<NodeId> ready;
    for (size_t i = 0; i < defs.size(); ++i)
        if (indeg[i] == 0) ready.insert(defs[i].id);

    RecurrenceSpec spec(ctx);
    while (!ready.empty()) {
        NodeId id = *ready.begin();
        ready.erase(ready.begin());
        size_t i = by_id[id];
        spec.index_.emplace(id, spec.nodes_.size());
        spec.nodes_.push_back(std::move(defs[i]));
        for (size_t j : dependents[i])
            if (--indeg[j] == 0) ready.insert(defs[j].id);
    }
    if (spec.nodes_.size() != defs.size())
        throw CycleError("recurrence dependencies contain a cycle");

    // Joint rescale of P and Q preserves f_s; r_s depends on v(Q), so the
    // pair must move together.
    for (NodeDef& d : spec.nodes_) {
        std::vector<Rational> coeffs;
        for (const SparsePoly* poly : {&d.P, &d.Q})
            for (const auto& [m, c] : poly->terms) coeffs.push_back(c);
        auto [scaled, shift] = normalize_coefficients(coeffs, ctx);
        size_t k = 0;
        for (SparsePoly* poly : {&d.P, &d.Q})
            for (auto& [m, c] : poly->terms) c = scaled[k++];
        spec.shifts_.push_back(shift);
    }

    spec.ancestors_.resize(spec.nodes_.size());
    for (size_t i = 0; i < spec.nodes_.size(); ++i) {
        std::set<std::uint32_t> anc;
        for (const NodeId& p : spec.nodes_[i].predecessors) {
            std::uint32_t pi = static_cast<std::uint32_t>(spec.index_.at(p));
            anc.insert(pi);
            anc.insert(spec.ancestors_[pi].begin(), spec.ancestors_[pi].end());
        }
        spec.ancestors_[i].assign(anc.begin(), anc.end());
    }
    return spec;
}

/// Evaluates P and Q at the given predecessor values, exactly and
/// separately (the quotient is not formed here).
inline std::pair<Rational, Rational> eval_fraction(
    const NodeDef& def, const std::map<NodeId, Rational>& values) {
    std::vector<const Rational*> args;
    args.reserve(def.predecessors.size());
    for (const NodeId& p : def.predecessors) {
        auto it = values.find(p);
        if (it == values.end())
            throw DomainError("eval_fraction: missing value for " + p.str());
        args.push_back(&it->second);
    }
    auto eval = [&](const SparsePoly& poly) {
        Rational acc(0);
        for (const auto& [m, c] : poly.terms) {
            Rational term = c;
            for (size_t j = 0; j < m.size(); ++j)
                if (m[j] != 0) term *= rational_pow(*args[j], m[j]);
            acc += term;
        }
        return acc;
    };
    return {eval(def.P), eval(def.Q)};
}

/// The unique exact solution g, computed in topological order.
inline std::map<NodeId, Rational> solve_exact(const RecurrenceSpec& spec) {
    std::map<NodeId, Rational> g;
    for (const NodeDef& d : spec.nodes()) {
        auto [num, den] = eval_fraction(d, g);
        if (den == 0)
            throw DivisionByZeroError(d.id.str(),
                                      "Q vanishes at node " + d.id.str());
        g.emplace(d.id, num / den);
    }
    return g;
}

}  // namespace padiclab
