#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "cnplab/errors.hpp"
#include "cnplab/rational.hpp"

namespace cnplab {

// Weakly decreasing tuple of nonnegative integers with trailing zeros removed.
// Canonical key type for all coefficient tables and polynomial bases.
using Partition = std::vector<int>;

inline Partition trim(Partition p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
    return p;
}

inline int degree_of(const Partition& p) {
    int n = 0;
    for (int x : p) n += x;
    return n;
}

inline bool is_weakly_decreasing(const std::vector<int>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i] < v[i + 1]) return false;
    return v.empty() || v.back() >= 0;
}

// Canonical total order on partitions: by degree, then descending
// lexicographic within a degree. Descending lex is a linear extension of the
// dominance order, which the triangular solves below rely on.
inline bool canonical_less(const Partition& x, const Partition& y) {
    int dx = degree_of(x), dy = degree_of(y);
    if (dx != dy) return dx < dy;
    const std::size_t n = std::max(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i) {
        int xi = i < x.size() ? x[i] : 0;
        int yi = i < y.size() ? y[i] : 0;
        if (xi != yi) return xi > yi;
    }
    return false;
}

struct CanonicalLess {
    bool operator()(const Partition& x, const Partition& y) const { return canonical_less(x, y); }
};

// Dominance order within one degree: x <= y iff every prefix sum of x is <= the
// corresponding prefix sum of y. Partial order; only comparable within a degree.
inline bool dominated_by(const Partition& x, const Partition& y) {
    if (degree_of(x) != degree_of(y)) return false;
    int sx = 0, sy = 0;
    const std::size_t n = std::max(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i) {
        sx += i < x.size() ? x[i] : 0;
        sy += i < y.size() ? y[i] : 0;
        if (sx > sy) return false;
    }
    return true;
}

// A signature is a weakly decreasing tuple of nonnegative integers of fixed
// length r (zeros retained, unlike Partition).
struct Signature {
    std::vector<int> parts;

    Signature() = default;
    explicit Signature(std::vector<int> p) : parts(std::move(p)) {
        if (!is_weakly_decreasing(parts) || (!parts.empty() && parts.back() < 0))
            throw validation_error("signature parts must be weakly decreasing and nonnegative");
    }

    int length() const { return static_cast<int>(parts.size()); }
    int degree() const { return degree_of(parts); }
    Partition key() const { return trim(parts); }

    bool operator==(const Signature& o) const { return parts == o.parts; }

    std::string str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(parts[i]);
        }
        return s + ")";
    }
};

inline Signature signature_from_partition(const Partition& p, int r) {
    if (static_cast<int>(p.size()) > r)
        throw validation_error("partition has more parts than the signature length");
    std::vector<int> v(p);
    v.resize(static_cast<std::size_t>(r), 0);
    return Signature(std::move(v));
}

// Domain parameters: rank r, characteristic multiplicities a and b.
// Derived quantities: complex dimension d = r*(1 + (a/2)(r-1) + b) and
// genus p = 2 + a(r-1) + b. The constructor validates integrality of d.
struct CartanParams {
    int r = 1;
    int a = 0;
    int b = 0;

    CartanParams() = default;
    CartanParams(int r_, int a_, int b_) : r(r_), a(a_), b(b_) {
        if (r < 1) throw validation_error("rank r must be >= 1");
        if (a < 0 || b < 0) throw validation_error("multiplicities a, b must be >= 0");
        Rat dr = dim_over_rank();
        if (Rat(r) * dr != Rat(dimension()))
            throw validation_error("dimension d = r*(1 + (a/2)(r-1) + b) must be an integer");
    }

    Rat dim_over_rank() const { return Rat(1) + rat(a, 2) * Rat(r - 1) + Rat(b); }

    int dimension() const {
        Rat d = Rat(r) * dim_over_rank();
        if (d.get_den() != 1)
            throw validation_error("non-integer dimension for (r,a,b)");
        return static_cast<int>(d.get_num().get_si());
    }

    int genus() const { return 2 + a * (r - 1) + b; }

    // Jack parameter 2/a. Only meaningful for r >= 2; rank one never consults it.
    Rat alpha() const {
        if (r < 2) throw validation_error("alpha = 2/a is only defined for rank >= 2");
        if (a == 0) throw validation_error("alpha = 2/a undefined: a = 0 with rank >= 2");
        return rat(2, a);
    }

    bool operator==(const CartanParams& o) const { return r == o.r && a == o.a && b == o.b; }
};

// All signatures of length r and degree n, in canonical (descending
// lexicographic) order. Size equals the number of partitions of n into at
// most r parts.
inline std::vector<Signature> enumerate_signatures(int r, int n) {
    if (r < 1) throw validation_error("enumerate_signatures: r must be >= 1");
    if (n < 0) throw validation_error("enumerate_signatures: n must be >= 0");
    std::vector<Signature> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int rem, int maxp) -> void {
        if (rem == 0) {
            Partition p = cur;
            out.push_back(signature_from_partition(p, r));
            return;
        }
        if (static_cast<int>(cur.size()) == r) return;
        for (int p = std::min(rem, maxp); p >= 1; --p) {
            cur.push_back(p);
            self(self, rem - p, p);
            cur.pop_back();
        }
    };
    rec(rec, n, n);
    // recursion emits descending lex already; keep an explicit sort as a guard
    std::sort(out.begin(), out.end(), [](const Signature& x, const Signature& y) {
        return canonical_less(x.key(), y.key());
    });
    return out;
}

// Rising factorial (x)_m = x (x+1) ... (x+m-1).
inline Rat rising_factorial(const Rat& x, int m) {
    if (m < 0) throw validation_error("rising factorial needs m >= 0");
    Rat v(1);
    for (int l = 0; l < m; ++l) v *= x + Rat(l);
    return v;
}

// Multivariate Pochhammer symbol attached to a signature:
// (nu)_s = prod_{j=1}^{r} (nu - (a/2)(j-1))_{s_j}.
// Monic polynomial of degree |s| in nu.
inline Rat generalized_pochhammer(const Rat& nu, const Signature& s, int a) {
    if (a < 0) throw validation_error("generalized_pochhammer: a must be >= 0");
    Rat v(1);
    for (int j = 0; j < s.length(); ++j)
        v *= rising_factorial(nu - rat(a, 2) * Rat(j), s.parts[static_cast<std::size_t>(j)]);
    return v;
}

// All valid signatures obtained by decrementing one part of s.
inline std::vector<Signature> lower_neighbors(const Signature& s) {
    if (s.degree() == 0)
        throw validation_error("lower_neighbors: the zero signature has no lower neighbors");
    std::vector<Signature> out;
    for (int i = 0; i < s.length(); ++i) {
        std::vector<int> v = s.parts;
        v[static_cast<std::size_t>(i)] -= 1;
        if (v[static_cast<std::size_t>(i)] < 0) continue;
        if (!is_weakly_decreasing(v)) continue;
        out.push_back(Signature(v));
    }
    return out;
}

enum class SigOrder { equal, greater, less, incomparable };

// Componentwise comparison. greater/less imply weak componentwise dominance
// with at least one strict component.
inline SigOrder signature_order(const Signature& s, const Signature& t) {
    if (s.length() != t.length())
        throw validation_error("signature_order: length mismatch");
    bool geq = true, leq = true;
    for (int i = 0; i < s.length(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (s.parts[u] < t.parts[u]) geq = false;
        if (s.parts[u] > t.parts[u]) leq = false;
    }
    if (geq && leq) return SigOrder::equal;
    if (geq) return SigOrder::greater;
    if (leq) return SigOrder::less;
    return SigOrder::incomparable;
}

} // namespace cnplab
