#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include <kql/formula.hpp>
#include <kql/game.hpp>
#include <kql/quantifier.hpp>
#include <kql/structure.hpp>

namespace kql {

/// Parameters of a randomized verification run.
struct Corpus {
    std::uint64_t seed = 1;
    int count = 200;
    int max_size = 4;
    int max_relations = 2;
    int max_arity = 2;
    int max_k = 2;
    int max_rank = 3;
    /// Fixed registry; empty means a random registry per instance.
    std::vector<Quantifier> quantifiers;
    /// "none", "drop-back" or "drop-forth": weakens characteristic formulas.
    std::string mutant = "none";
    /// Run only this instance index (for reproducing a counterexample).
    std::optional<int> only;

    void validate() const;
};

/// A pair of structures over one signature, with k and a registry.
struct Instance {
    Structure left;
    Structure right;
    int k = 1;
    std::vector<Quantifier> registry;
};

/// Per-instance generator, seeded from (corpus seed, index).
std::mt19937_64 instance_rng(const Corpus& c, int index, std::uint64_t salt = 0);

/// Every tuple included independently with probability 1/2.
Structure random_structure(std::mt19937_64& rng, const Signature& sig, std::size_t size);

/// Small edge-case structures over {P:1, R:2}: singleton empty/full, K1, a loop, a 3-cycle, ...
std::vector<Structure> fixed_structures();

/// `count` structures: the fixed sub-corpus first, then random ones.
std::vector<Structure> gen_structures(const Corpus& c);

/// The pair instance used by the ef, invariance, finite-index, hm and charform suites.
Instance gen_instance(const Corpus& c, int index);

/// Random formula of rank <= depth over the signature and registry.
Formula random_formula(std::mt19937_64& rng, const Signature& sig, int k, const std::vector<Quantifier>& registry,
                       int depth);

struct Fig1Family {
    Structure left;
    Structure right;
    Assignment alpha;  // left root
    Assignment beta;   // right root
};

/// Root with spokes of chain lengths 0..n on the left and 0..n+1 on the right.
Fig1Family gen_fig1_family(int n);

/// ~^0..~^q of the game in which both players may use every witness
/// (powerset enumeration; oracle-size structures only).
std::vector<PairRelation> all_witness_game(const Structure& a, const Structure& b, int k,
                                           const std::vector<Quantifier>& registry, int q);

struct SuiteReport {
    std::string suite;
    bool passed = true;
    std::size_t instances = 0;
    std::size_t checks = 0;
    double seconds = 0.0;
    std::vector<std::string> details;
    std::optional<nlohmann::ordered_json> counterexample;

    nlohmann::ordered_json to_json() const;
};

std::vector<std::string> suite_names();

/// Runs one suite ("all" runs every suite and merges the reports).
SuiteReport run_suite(const std::string& name, const Corpus& c);

/// Writes left.json / right.json of a counterexample into `dir`; returns the
/// reproducing command line.
std::string dump_counterexample(const nlohmann::ordered_json& cex, const std::string& dir);

} // namespace kql
