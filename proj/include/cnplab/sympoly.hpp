#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "cnplab/rational.hpp"
#include "cnplab/signatures.hpp"

namespace cnplab {

namespace detail {

// Distinct permutations of p padded with zeros to length r, each exactly once.
inline std::vector<std::vector<int>> distinct_permutations(const Partition& p, int r) {
    std::vector<int> v(p);
    v.resize(static_cast<std::size_t>(r), 0);
    std::sort(v.begin(), v.end());
    std::vector<std::vector<int>> out;
    do {
        out.push_back(v);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

// Number of distinct permutations of p in r slots: r! / (prod multiplicities! * zeros!).
inline Rat permutation_count(const Partition& p, int r) {
    Rat count = factorial_rat(static_cast<unsigned long>(r));
    int run = 1;
    for (std::size_t i = 1; i <= p.size(); ++i) {
        if (i < p.size() && p[i] == p[i - 1]) {
            ++run;
        } else {
            count /= factorial_rat(static_cast<unsigned long>(run));
            run = 1;
        }
    }
    int zeros = r - static_cast<int>(p.size());
    count /= factorial_rat(static_cast<unsigned long>(zeros));
    return count;
}

} // namespace detail

// Symmetric polynomial in r variables expressed over the monomial-symmetric
// basis m_p. Keys are trimmed partitions with at most r parts; zero
// coefficients are never stored. Exact rational coefficients.
class SymPoly {
public:
    using Table = std::map<Partition, Rat, CanonicalLess>;

    explicit SymPoly(int r) : r_(r) {
        if (r < 1) throw validation_error("SymPoly needs at least one variable");
    }

    static SymPoly monomial(int r, const Partition& p, const Rat& c = Rat(1)) {
        SymPoly f(r);
        f.add(p, c);
        return f;
    }

    static SymPoly one(int r) { return monomial(r, {}); }

    int vars() const { return r_; }
    const Table& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree() const {
        int d = 0;
        for (const auto& [p, c] : terms_) d = std::max(d, degree_of(p));
        return d;
    }

    Rat coeff(const Partition& p) const {
        auto it = terms_.find(trim(p));
        return it == terms_.end() ? Rat(0) : it->second;
    }

    void add(const Partition& p, const Rat& c) {
        if (c == 0) return;
        Partition key = trim(p);
        if (static_cast<int>(key.size()) > r_)
            throw validation_error("partition has more parts than variables");
        auto [it, inserted] = terms_.emplace(std::move(key), c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    SymPoly& operator+=(const SymPoly& g) {
        require_same_vars(g);
        for (const auto& [p, c] : g.terms_) add(p, c);
        return *this;
    }

    SymPoly& operator-=(const SymPoly& g) {
        require_same_vars(g);
        for (const auto& [p, c] : g.terms_) add(p, -c);
        return *this;
    }

    SymPoly& operator*=(const Rat& c) {
        if (c == 0) {
            terms_.clear();
        } else {
            for (auto& [p, v] : terms_) v *= c;
        }
        return *this;
    }

    friend SymPoly operator+(SymPoly f, const SymPoly& g) { return f += g; }
    friend SymPoly operator-(SymPoly f, const SymPoly& g) { return f -= g; }
    friend SymPoly operator*(SymPoly f, const Rat& c) { return f *= c; }
    friend SymPoly operator*(const Rat& c, SymPoly f) { return f *= c; }

    // Product in the monomial basis. The product of symmetric polynomials is
    // symmetric, so the coefficient of m_p equals the coefficient of the single
    // sorted monomial x^p; only sorted exponent vectors are accumulated.
    friend SymPoly operator*(const SymPoly& f, const SymPoly& g) {
        f.require_same_vars(g);
        const int r = f.r_;
        std::map<std::vector<int>, Rat> acc;
        for (const auto& [pf, cf] : f.terms_) {
            const auto monos_f = detail::distinct_permutations(pf, r);
            for (const auto& [pg, cg] : g.terms_) {
                const Rat c = cf * cg;
                const auto monos_g = detail::distinct_permutations(pg, r);
                for (const auto& mf : monos_f) {
                    for (const auto& mg : monos_g) {
                        std::vector<int> e(static_cast<std::size_t>(r));
                        bool sorted = true;
                        for (int i = 0; i < r; ++i) {
                            e[static_cast<std::size_t>(i)] =
                                mf[static_cast<std::size_t>(i)] + mg[static_cast<std::size_t>(i)];
                            if (i > 0 && e[static_cast<std::size_t>(i)] >
                                             e[static_cast<std::size_t>(i - 1)]) {
                                sorted = false;
                                break;
                            }
                        }
                        if (!sorted) continue;
                        acc[std::move(e)] += c;
                    }
                }
            }
        }
        SymPoly out(r);
        for (const auto& [e, c] : acc) out.add(e, c);
        return out;
    }

    bool operator==(const SymPoly& g) const { return r_ == g.r_ && terms_ == g.terms_; }

    // Exact value at x = (1, ..., 1).
    Rat eval_ones() const {
        Rat v(0);
        for (const auto& [p, c] : terms_) v += c * detail::permutation_count(p, r_);
        return v;
    }

    // Floating evaluation at an arbitrary point.
    double eval(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != r_)
            throw validation_error("evaluation point has wrong dimension");
        double total = 0.0;
        for (const auto& [p, c] : terms_) {
            double msum = 0.0;
            for (const auto& mono : detail::distinct_permutations(p, r_)) {
                double term = 1.0;
                for (int i = 0; i < r_; ++i) {
                    int e = mono[static_cast<std::size_t>(i)];
                    for (int k = 0; k < e; ++k) term *= x[static_cast<std::size_t>(i)];
                }
                msum += term;
            }
            total += rat_to_double(c) * msum;
        }
        return total;
    }

private:
    void require_same_vars(const SymPoly& g) const {
        if (r_ != g.r_) throw validation_error("SymPoly variable count mismatch");
    }

    int r_;
    Table terms_;
};

// m_p * m_q in r variables.
inline SymPoly mono_multiply(int r, const Partition& p, const Partition& q) {
    return SymPoly::monomial(r, p) * SymPoly::monomial(r, q);
}

} // namespace cnplab
