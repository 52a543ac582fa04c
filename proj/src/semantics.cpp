#include <kql/semantics.hpp>

#include <unordered_set>

#include <kql/error.hpp>

namespace kql {

Evaluator::Evaluator(const Structure& s, int k, bool oracle)
    : structure_(&s), space_(s.size(), k), oracle_(oracle) {
    if (oracle_) oracle::check_size(s, space_);
}

const TupleSet& Evaluator::extension(const Formula& f) {
    if (auto it = memo_.find(f.id()); it != memo_.end()) return it->second.second;
    check_formula(f, space_.k(), structure_->signature());
    return compute(f);
}

const TupleSet& Evaluator::compute(const Formula& f) {
    if (auto it = memo_.find(f.id()); it != memo_.end()) return it->second.second;
    TupleSet result = space_.empty_set();
    switch (f.kind()) {
    case Formula::Kind::Top: result = space_.full_set(); break;
    case Formula::Kind::Atom: {
        const auto& rel = structure_->relation(f.relation());
        const auto& vars = f.variables();
        std::vector<Element> args(vars.size());
        for (TupleCode alpha = 0; alpha < space_.size(); ++alpha) {
            for (std::size_t i = 0; i < vars.size(); ++i) args[i] = space_.at(alpha, vars[i] - 1);
            if (rel.contains(args)) result.insert(alpha);
        }
        break;
    }
    case Formula::Kind::Not: result = compute(f.sub()).complement(); break;
    case Formula::Kind::And: {
        // Copy before the second recursive call: rehashing may move memo entries.
        TupleSet left = compute(f.left());
        result = left & compute(f.right());
        break;
    }
    case Formula::Kind::Quant: {
        TupleSet body = compute(f.body());
        const auto& q = f.quantifier();
        for (TupleCode alpha = 0; alpha < space_.size(); ++alpha) {
            bool ok = oracle_ ? oracle::admits_witness_within(q, *structure_, space_, alpha, body)
                              : q.admits_witness_within(*structure_, space_, alpha, body);
            if (ok) result.insert(alpha);
        }
        break;
    }
    }
    auto [it, inserted] = memo_.emplace(f.id(), std::make_pair(f, std::move(result)));
    return it->second.second;
}

std::vector<std::pair<Formula, TupleSet>> Evaluator::trace(const Formula& f) {
    extension(f);
    std::vector<std::pair<Formula, TupleSet>> out;
    std::unordered_set<const FormulaNode*> seen;
    auto visit = [&](auto& self, const Formula& g) -> void {
        if (!seen.insert(g.id()).second) return;
        switch (g.kind()) {
        case Formula::Kind::Not: self(self, g.sub()); break;
        case Formula::Kind::And:
            self(self, g.left());
            self(self, g.right());
            break;
        case Formula::Kind::Quant: self(self, g.body()); break;
        default: break;
        }
        out.emplace_back(g, memo_.at(g.id()).second);
    };
    visit(visit, f);
    return out;
}

bool eval(const Structure& s, const Assignment& alpha, const Formula& f) {
    if (alpha.empty()) throw ValidationError("assignment must have length k >= 1");
    for (Element e : alpha)
        if (e >= s.size()) throw ValidationError("assignment value outside the universe");
    Evaluator ev(s, static_cast<int>(alpha.size()));
    return ev.holds(alpha, f);
}

bool eval_team(const Structure& s, const std::vector<Assignment>& team, int k, const Formula& f) {
    Evaluator ev(s, k);
    TupleSet members = ev.space().empty_set();
    for (const auto& alpha : team) {
        if (static_cast<int>(alpha.size()) != k) throw ValidationError("team member has wrong length");
        members.insert(ev.space().encode(alpha));
    }
    return ev.holds_on_team(members, f);
}

std::optional<TupleSet> check_type_realization(const Structure& s, const Assignment& alpha,
                                               const Quantifier& q, const std::vector<Formula>& psi) {
    Evaluator ev(s, static_cast<int>(alpha.size()));
    const auto& space = ev.space();
    TupleCode a = space.encode(alpha);
    TupleSet joint = space.full_set();
    for (const auto& f : psi) joint &= ev.extension(f);
    if (!q.admits_witness_within(s, space, a, joint)) return std::nullopt;
    for (auto& w : q.minimal_witnesses(s, space, a))
        if (w.is_subset_of(joint)) return w;
    // admits and minimal_witnesses disagree; a quantifier implementation bug.
    throw Error("internal", "witness admitted but no minimal witness found for " + q.to_string());
}

} // namespace kql
