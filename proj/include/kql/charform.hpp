#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <kql/formula.hpp>
#include <kql/quantifier.hpp>
#include <kql/semantics.hpp>
#include <kql/structure.hpp>

namespace kql {

/// Switches for the two halves of the inductive step (mutation testing).
struct CharOptions {
    bool forth = true;
    bool back = true;
};

/// Characteristic formulas chi^q relative to a finite comparison universe.
///
/// Level-q formulas of all tuples of all structures are interned by their
/// extensions across the universe; the classes form Delta_q restricted to the
/// universe. Formulas for unrealized classes would have empty extension in
/// every structure here, so the back conjuncts they would add are inert.
///
/// chi^{q+1}(alpha) = chi^0(alpha)
///   & /\ { Q \/ Delta_q(s)       : s a minimal witness of Q at alpha }
///   & /\ { !Q \/ Phi             : Phi ⊆ Delta_q maximal with alpha |= !Q \/ Phi }
/// Smaller witnesses and larger Phi give stronger conjuncts by monotonicity,
/// so the omitted ones are implied.
class CharContext {
public:
    CharContext(std::vector<Structure> universe, std::vector<Quantifier> registry, int k,
                CharOptions options = {});
    CharContext(const CharContext&) = delete;
    CharContext& operator=(const CharContext&) = delete;

    const std::vector<Structure>& universe() const { return universe_; }
    const std::vector<Quantifier>& registry() const { return registry_; }
    int k() const { return k_; }
    const TupleSpace& space(std::size_t s) const { return spaces_[s]; }

    /// Position of a structure in the universe; throws if absent.
    std::size_t index_of(const Structure& s) const;

    const Formula& chi(std::size_t s, TupleCode alpha, int q);
    int class_of(std::size_t s, TupleCode alpha, int q);
    std::size_t class_count(int q);
    const Formula& representative(int q, int cls);

    Evaluator& evaluator(std::size_t s) { return *evaluators_[s]; }

private:
    struct Level {
        std::vector<std::vector<Formula>> chi;  // [structure][tuple]
        std::vector<std::vector<int>> cls;      // [structure][tuple]
        std::vector<Formula> reps;              // [class]
        std::vector<std::vector<TupleSet>> ext; // [class][structure]
        std::map<std::vector<int>, Formula> disjunctions;
    };

    void ensure(int q);
    void build_base();
    void build_next();
    void intern(Level& lvl);
    const Formula& disjunction(Level& lvl, const std::vector<int>& classes);
    std::vector<Formula> back_part(Level& lvl, std::size_t s, TupleCode alpha, std::size_t qi);

    std::vector<Structure> universe_;
    std::vector<Quantifier> registry_;
    int k_;
    CharOptions options_;
    std::vector<TupleSpace> spaces_;
    std::vector<std::unique_ptr<Evaluator>> evaluators_;
    // Minimal witnesses [structure][quantifier][tuple].
    std::vector<std::vector<std::vector<std::vector<TupleSet>>>> witnesses_;
    std::vector<Level> levels_;
};

Formula chi(CharContext& ctx, const Structure& s, const Assignment& alpha, int q);

/// B, beta |= chi^q(A, alpha).
bool check_char(CharContext& ctx, const Structure& a, const Assignment& alpha, const Structure& b,
                const Assignment& beta, int q);

/// Disjunction of chi^{qr(f)} over the classes satisfying f in the universe.
Formula normal_form(CharContext& ctx, const Formula& f);

/// chi^{r+1}(A, alpha) for the least round r+1 at which the pair fails the
/// game, or nothing if the pair is bisimilar.
std::optional<Formula> distinguishing_formula(CharContext& ctx, const Structure& a, const Assignment& alpha,
                                              const Structure& b, const Assignment& beta);

} // namespace kql
