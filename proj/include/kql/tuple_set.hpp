#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace kql {

/// Index of a k-tuple in the canonical (lexicographic) enumeration of A^k.
using TupleCode = std::uint32_t;

/// A subset of A^k stored as a dense bitset over tuple codes. Iteration is in
/// increasing code order, i.e. canonical tuple order.
class TupleSet {
public:
    TupleSet() = default;
    explicit TupleSet(std::size_t domain) : domain_(domain), words_((domain + 63) / 64, 0) {}

    static TupleSet full(std::size_t domain) {
        TupleSet s(domain);
        for (auto& w : s.words_) w = ~std::uint64_t{0};
        s.trim();
        return s;
    }

    static TupleSet of(std::size_t domain, const std::vector<TupleCode>& codes) {
        TupleSet s(domain);
        for (TupleCode c : codes) s.insert(c);
        return s;
    }

    std::size_t domain() const noexcept { return domain_; }

    bool contains(TupleCode c) const noexcept {
        return c < domain_ && ((words_[c >> 6] >> (c & 63)) & 1U) != 0;
    }
    void insert(TupleCode c) { words_[c >> 6] |= std::uint64_t{1} << (c & 63); }
    void erase(TupleCode c) { words_[c >> 6] &= ~(std::uint64_t{1} << (c & 63)); }

    std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }
    bool empty() const noexcept {
        for (auto w : words_)
            if (w != 0) return false;
        return true;
    }

    bool is_subset_of(const TupleSet& other) const noexcept {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if ((words_[i] & ~other.words_[i]) != 0) return false;
        return true;
    }
    bool intersects(const TupleSet& other) const noexcept {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if ((words_[i] & other.words_[i]) != 0) return true;
        return false;
    }

    TupleSet& operator&=(const TupleSet& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    TupleSet& operator|=(const TupleSet& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    TupleSet complement() const {
        TupleSet r(*this);
        for (auto& w : r.words_) w = ~w;
        r.trim();
        return r;
    }
    friend TupleSet operator&(TupleSet a, const TupleSet& b) { return a &= b; }
    friend TupleSet operator|(TupleSet a, const TupleSet& b) { return a |= b; }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            std::uint64_t w = words_[i];
            while (w != 0) {
                auto bit = static_cast<unsigned>(std::countr_zero(w));
                f(static_cast<TupleCode>(i * 64 + bit));
                w &= w - 1;
            }
        }
    }

    std::vector<TupleCode> elements() const {
        std::vector<TupleCode> out;
        out.reserve(count());
        for_each([&](TupleCode c) { out.push_back(c); });
        return out;
    }

    friend bool operator==(const TupleSet& a, const TupleSet& b) = default;

    std::size_t hash() const noexcept {
        std::size_t h = domain_;
        for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }

private:
    void trim() {
        if (domain_ % 64 != 0 && !words_.empty())
            words_.back() &= (std::uint64_t{1} << (domain_ % 64)) - 1;
    }

    std::size_t domain_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Canonical witness order: lexicographic comparison of the sorted member lists.
inline bool canonical_less(const TupleSet& a, const TupleSet& b) {
    auto ea = a.elements();
    auto eb = b.elements();
    return ea < eb;
}

struct TupleSetHash {
    std::size_t operator()(const TupleSet& s) const noexcept { return s.hash(); }
};

} // namespace kql
