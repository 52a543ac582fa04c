#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <kql/quantifier.hpp>
#include <kql/structure.hpp>

namespace kql {

struct FormulaNode;

/// Immutable formula over true, relational atoms, negation, binary conjunction
/// and quantifier application. Nodes are shared, so large formulas (such as
/// characteristic formulas) are DAGs; node identity is usable as a memo key.
class Formula {
public:
    enum class Kind { Top, Atom, Not, And, Quant };

    Formula();  // true

    static Formula top();
    static Formula bottom();  // !true
    /// `vars` holds 1-based variable indices.
    static Formula atom(std::string relation, std::vector<int> vars);
    static Formula negate(Formula f);
    static Formula conj(Formula a, Formula b);
    static Formula quant(Quantifier q, Formula body);

    // Derived connectives, desugared on construction.
    static Formula disj(Formula a, Formula b);     // !(!a & !b)
    static Formula implies(Formula a, Formula b);  // !(a & !b)
    static Formula iff(Formula a, Formula b);      // (a -> b) & (b -> a)

    /// Balanced right-nested conjunction; the empty conjunction is true.
    static Formula conjunction(const std::vector<Formula>& fs);
    /// Disjunction via De Morgan; the empty disjunction is false.
    static Formula disjunction(const std::vector<Formula>& fs);

    Kind kind() const;
    const std::string& relation() const;     // Atom
    const std::vector<int>& variables() const;  // Atom
    const Formula& sub() const;               // Not
    const Formula& left() const;              // And
    const Formula& right() const;             // And
    const Quantifier& quantifier() const;     // Quant
    const Formula& body() const;              // Quant

    /// Node identity, stable for the lifetime of any copy of this formula.
    const FormulaNode* id() const { return node_.get(); }

    /// Structural equality.
    friend bool operator==(const Formula& a, const Formula& b);

private:
    explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const FormulaNode> node_;
};

struct FormulaNode {
    struct Top {};
    struct Atom {
        std::string relation;
        std::vector<int> vars;
    };
    struct Not {
        Formula sub;
    };
    struct And {
        Formula left;
        Formula right;
    };
    struct Quant {
        Quantifier q;
        Formula body;
    };
    std::variant<Top, Atom, Not, And, Quant> data;
};

/// Parses the concrete grammar, desugaring |, ->, <-> and false, and checks
/// relation names, arities, variable indices and quantifier signatures.
Formula parse_formula(const std::string& text, int k, const Signature& sig);

/// One formula per non-blank line; '#' starts a comment.
std::vector<Formula> parse_formula_lines(const std::string& text, int k, const Signature& sig);

/// Canonical concrete syntax; binary connectives fully parenthesized.
std::string print_formula(const Formula& f);

int quantifier_rank(const Formula& f);

/// Re-validates a formula built programmatically against a signature and k.
void check_formula(const Formula& f, int k, const Signature& sig);

/// Variable index tuples over 1..k of the given length, in lexicographic order.
std::vector<std::vector<int>> variable_tuples(int k, int arity);

/// Number of distinct nodes in the formula DAG.
std::size_t dag_size(const Formula& f);

} // namespace kql
