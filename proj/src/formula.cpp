#include <kql/formula.hpp>

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <kql/error.hpp>

namespace kql {

namespace {

const Formula& shared_top() {
    static const Formula t = Formula::top();
    return t;
}

template <class T>
const T& expect(const FormulaNode* node, const char* what) {
    if (const auto* p = std::get_if<T>(&node->data)) return *p;
    throw Error("formula_kind", std::string("formula is not ") + what);
}

} // namespace

// ---------------------------------------------------------------------------
// Construction

Formula::Formula() : node_(shared_top().node_) {}

Formula Formula::top() {
    return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaNode::Top{}}));
}

Formula Formula::bottom() { return negate(top()); }

Formula Formula::atom(std::string relation, std::vector<int> vars) {
    return Formula(std::make_shared<const FormulaNode>(
        FormulaNode{FormulaNode::Atom{std::move(relation), std::move(vars)}}));
}

Formula Formula::negate(Formula f) {
    return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaNode::Not{std::move(f)}}));
}

Formula Formula::conj(Formula a, Formula b) {
    return Formula(
        std::make_shared<const FormulaNode>(FormulaNode{FormulaNode::And{std::move(a), std::move(b)}}));
}

Formula Formula::quant(Quantifier q, Formula body) {
    return Formula(std::make_shared<const FormulaNode>(
        FormulaNode{FormulaNode::Quant{std::move(q), std::move(body)}}));
}

Formula Formula::disj(Formula a, Formula b) {
    return negate(conj(negate(std::move(a)), negate(std::move(b))));
}

Formula Formula::implies(Formula a, Formula b) {
    return negate(conj(std::move(a), negate(std::move(b))));
}

Formula Formula::iff(Formula a, Formula b) { return conj(implies(a, b), implies(b, a)); }

namespace {

Formula balanced(const std::vector<Formula>& fs, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return fs[lo];
    std::size_t mid = lo + (hi - lo + 1) / 2;
    return Formula::conj(balanced(fs, lo, mid), balanced(fs, mid, hi));
}

} // namespace

Formula Formula::conjunction(const std::vector<Formula>& fs) {
    if (fs.empty()) return top();
    return balanced(fs, 0, fs.size());
}

Formula Formula::disjunction(const std::vector<Formula>& fs) {
    if (fs.empty()) return bottom();
    if (fs.size() == 1) return fs.front();
    std::vector<Formula> negated;
    negated.reserve(fs.size());
    for (const auto& f : fs) negated.push_back(negate(f));
    return negate(conjunction(negated));
}

// ---------------------------------------------------------------------------
// Access

Formula::Kind Formula::kind() const { return static_cast<Kind>(node_->data.index()); }

const std::string& Formula::relation() const {
    return expect<FormulaNode::Atom>(node_.get(), "an atom").relation;
}
const std::vector<int>& Formula::variables() const {
    return expect<FormulaNode::Atom>(node_.get(), "an atom").vars;
}
const Formula& Formula::sub() const { return expect<FormulaNode::Not>(node_.get(), "a negation").sub; }
const Formula& Formula::left() const {
    return expect<FormulaNode::And>(node_.get(), "a conjunction").left;
}
const Formula& Formula::right() const {
    return expect<FormulaNode::And>(node_.get(), "a conjunction").right;
}
const Quantifier& Formula::quantifier() const {
    return expect<FormulaNode::Quant>(node_.get(), "a quantification").q;
}
const Formula& Formula::body() const {
    return expect<FormulaNode::Quant>(node_.get(), "a quantification").body;
}

bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case Formula::Kind::Top: return true;
    case Formula::Kind::Atom: return a.relation() == b.relation() && a.variables() == b.variables();
    case Formula::Kind::Not: return a.sub() == b.sub();
    case Formula::Kind::And: return a.left() == b.left() && a.right() == b.right();
    case Formula::Kind::Quant: return a.quantifier() == b.quantifier() && a.body() == b.body();
    }
    return false;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
public:
    Parser(const std::string& text, int k, const Signature& sig, std::size_t line)
        : text_(text), k_(k), sig_(sig), line_(line) {}

    Formula parse_all() {
        Formula f = formula();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, pos_ + 1); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void consume(char c) {
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    std::string identifier() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ >= text_.size() || !ident_start(text_[pos_])) fail("expected a formula");
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    Formula formula() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (c == '!') {
            ++pos_;
            return Formula::negate(formula());
        }
        if (c == '(') return binary();

        std::size_t start = pos_;
        std::string word = identifier();
        char next = pos_ < text_.size() ? text_[pos_] : '\0';
        if (word == "true") return Formula::top();
        if (word == "false") return Formula::bottom();
        bool quant_head = word == "all" || word == "some" ||
                          ((word == "dia" || word == "cyc" || word == "inf" || word == "reach") &&
                           next == '[') ||
                          ((word == "dia" || word == "ex") && next == '>');
        if (quant_head) return quantified(start, word);
        return atom(start, word);
    }

    Formula binary() {
        consume('(');
        Formula lhs = formula();
        skip_ws();
        std::string op;
        if (text_.compare(pos_, 3, "<->") == 0) op = "<->";
        else if (text_.compare(pos_, 2, "->") == 0) op = "->";
        else if (pos_ < text_.size() && (text_[pos_] == '&' || text_[pos_] == '|')) op = text_.substr(pos_, 1);
        else fail("expected a binary connective");
        pos_ += op.size();
        Formula rhs = formula();
        consume(')');
        if (op == "&") return Formula::conj(lhs, rhs);
        if (op == "|") return Formula::disj(lhs, rhs);
        if (op == "->") return Formula::implies(lhs, rhs);
        return Formula::iff(lhs, rhs);
    }

    Formula quantified(std::size_t start, const std::string& word) {
        if (word != "all" && word != "some") {
            auto close = text_.find(']', pos_);
            if (close == std::string::npos) fail("unterminated quantifier");
            pos_ = close + 1;
        }
        std::string token = text_.substr(start, pos_ - start);
        Quantifier q = Quantifier::all();
        try {
            q = Quantifier::parse(token);
        } catch (const ValidationError& e) {
            pos_ = start;
            fail(e.what());
        }
        q.check(sig_, k_);
        return Formula::quant(std::move(q), formula());
    }

    int variable() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ >= text_.size() || text_[pos_] != 'x') fail("expected a variable");
        ++pos_;
        std::size_t digits = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (digits == pos_ || pos_ - digits > 6) {
            pos_ = start;
            fail("malformed variable");
        }
        int idx = std::stoi(text_.substr(digits, pos_ - digits));
        if (idx < 1 || idx > k_) {
            pos_ = start;
            fail("variable x" + std::to_string(idx) + " outside x1..x" + std::to_string(k_));
        }
        return idx;
    }

    Formula atom(std::size_t start, const std::string& name) {
        std::vector<int> vars;
        consume('(');
        vars.push_back(variable());
        while (peek(',')) {
            ++pos_;
            vars.push_back(variable());
        }
        consume(')');
        if (!sig_.contains(name)) {
            pos_ = start;
            throw SignatureMismatch("unknown relation '" + name + "' at line " + std::to_string(line_) +
                                    ", column " + std::to_string(start + 1));
        }
        if (sig_.arity(name) != static_cast<int>(vars.size()))
            throw ValidationError("arity_mismatch", "relation '" + name + "' has arity " +
                                                        std::to_string(sig_.arity(name)) + " but " +
                                                        std::to_string(vars.size()) +
                                                        " variables were given");
        return Formula::atom(name, std::move(vars));
    }

    const std::string& text_;
    int k_;
    const Signature& sig_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

} // namespace

Formula parse_formula(const std::string& text, int k, const Signature& sig) {
    if (k < 1) throw ValidationError("k must be positive");
    return Parser(text, k, sig, 1).parse_all();
}

std::vector<Formula> parse_formula_lines(const std::string& text, int k, const Signature& sig) {
    std::vector<Formula> out;
    std::stringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(Parser(line, k, sig, lineno).parse_all());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Printing and measures

namespace {

void print_into(const Formula& f, std::string& out) {
    switch (f.kind()) {
    case Formula::Kind::Top: out += "true"; return;
    case Formula::Kind::Atom: {
        out += f.relation();
        out += '(';
        const auto& vars = f.variables();
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (i) out += ',';
            out += 'x';
            out += std::to_string(vars[i]);
        }
        out += ')';
        return;
    }
    case Formula::Kind::Not:
        out += '!';
        print_into(f.sub(), out);
        return;
    case Formula::Kind::And:
        out += '(';
        print_into(f.left(), out);
        out += " & ";
        print_into(f.right(), out);
        out += ')';
        return;
    case Formula::Kind::Quant:
        out += f.quantifier().to_string();
        out += ' ';
        print_into(f.body(), out);
        return;
    }
}

int rank_memo(const Formula& f, std::unordered_map<const FormulaNode*, int>& memo) {
    if (auto it = memo.find(f.id()); it != memo.end()) return it->second;
    int r = 0;
    switch (f.kind()) {
    case Formula::Kind::Top:
    case Formula::Kind::Atom: r = 0; break;
    case Formula::Kind::Not: r = rank_memo(f.sub(), memo); break;
    case Formula::Kind::And: r = std::max(rank_memo(f.left(), memo), rank_memo(f.right(), memo)); break;
    case Formula::Kind::Quant: r = 1 + rank_memo(f.body(), memo); break;
    }
    memo.emplace(f.id(), r);
    return r;
}

} // namespace

std::string print_formula(const Formula& f) {
    std::string out;
    print_into(f, out);
    return out;
}

int quantifier_rank(const Formula& f) {
    std::unordered_map<const FormulaNode*, int> memo;
    return rank_memo(f, memo);
}

void check_formula(const Formula& f, int k, const Signature& sig) {
    std::unordered_set<const FormulaNode*> seen;
    std::vector<Formula> stack{f};
    while (!stack.empty()) {
        Formula g = stack.back();
        stack.pop_back();
        if (!seen.insert(g.id()).second) continue;
        switch (g.kind()) {
        case Formula::Kind::Top: break;
        case Formula::Kind::Atom:
            if (sig.arity(g.relation()) != static_cast<int>(g.variables().size()))
                throw ValidationError("arity_mismatch", "arity mismatch for relation '" + g.relation() + "'");
            for (int v : g.variables())
                if (v < 1 || v > k)
                    throw ValidationError("variable x" + std::to_string(v) + " outside x1..x" +
                                          std::to_string(k));
            break;
        case Formula::Kind::Not: stack.push_back(g.sub()); break;
        case Formula::Kind::And:
            stack.push_back(g.left());
            stack.push_back(g.right());
            break;
        case Formula::Kind::Quant:
            g.quantifier().check(sig, k);
            stack.push_back(g.body());
            break;
        }
    }
}

std::vector<std::vector<int>> variable_tuples(int k, int arity) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(arity), 1);
    while (true) {
        out.push_back(cur);
        int i = arity - 1;
        while (i >= 0 && cur[i] == k) cur[i--] = 1;
        if (i < 0) break;
        ++cur[i];
    }
    return out;
}

std::size_t dag_size(const Formula& f) {
    std::unordered_set<const FormulaNode*> seen;
    std::vector<Formula> stack{f};
    while (!stack.empty()) {
        Formula g = stack.back();
        stack.pop_back();
        if (!seen.insert(g.id()).second) continue;
        switch (g.kind()) {
        case Formula::Kind::Not: stack.push_back(g.sub()); break;
        case Formula::Kind::And:
            stack.push_back(g.left());
            stack.push_back(g.right());
            break;
        case Formula::Kind::Quant: stack.push_back(g.body()); break;
        default: break;
        }
    }
    return seen.size();
}

} // namespace kql
