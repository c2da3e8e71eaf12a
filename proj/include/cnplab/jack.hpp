#pragma once

#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "cnplab/rational.hpp"
#include "cnplab/signatures.hpp"
#include "cnplab/sympoly.hpp"

namespace cnplab {

// Expansion of one Jack polynomial over the monomial basis:
// P_lam = m_lam + sum_{mu < lam} c_mu m_mu (dominance-lower terms only).
struct JackCoefficients {
    Partition lam;
    SymPoly::Table expansion;

    Rat coeff(const Partition& mu) const {
        auto it = expansion.find(trim(mu));
        return it == expansion.end() ? Rat(0) : it->second;
    }
};

/*
 * Jack symmetric polynomials P_lam^(alpha) in r variables, cached per (r, alpha).
 *
 * Method: triangular eigen-solve of the degree-preserving second-order operator
 *
 *   D = (alpha/2) sum_i x_i^2 d^2/dx_i^2 + sum_{i<j} (x_i^2 d/dx_i - x_j^2 d/dx_j)/(x_i - x_j)
 *
 * in the monomial basis. Acting on the symmetrized pair x^a y^b + x^b y^a (a > b),
 * the pair term contributes a*(both monomials) + (a-b)*(x^k y^{a+b-k} for b < k < a);
 * for a = b it contributes a*(the monomial). Hence D m_lam = e_lam m_lam + (strictly
 * dominance-lower terms) with
 *
 *   e_lam = (alpha/2) sum_i lam_i (lam_i - 1) + sum_i (r - i) lam_i,
 *
 * and e is strictly increasing along dominance within a degree for alpha > 0,
 * so back-substitution in descending-lex order never divides by zero.
 *
 * Thread safety: insert-only cache behind a mutex; returned references point at
 * node-stable map entries and remain valid for the basis lifetime.
 */
class JackBasis {
public:
    JackBasis(int r, Rat alpha, int max_degree = 14)
        : r_(r), alpha_(std::move(alpha)), max_degree_(max_degree) {
        if (r_ < 1) throw validation_error("JackBasis needs r >= 1");
        if (alpha_ <= 0) throw validation_error("JackBasis needs alpha > 0");
        if (max_degree_ < 0) throw validation_error("JackBasis needs a nonnegative degree cap");
    }

    int vars() const { return r_; }
    const Rat& alpha() const { return alpha_; }
    int max_degree() const { return max_degree_; }

    // P_lam^(alpha) over the monomial basis. Monic in m_lam.
    const JackCoefficients& jack_P(const Partition& lam_in) {
        Partition lam = trim(lam_in);
        if (static_cast<int>(lam.size()) > r_)
            throw validation_error("jack_P: partition has more parts than variables");
        check_cap(degree_of(lam));
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(lam);
        if (it != cache_.end()) return it->second;
        compute_degree_locked(degree_of(lam));
        return cache_.at(lam);
    }

    SymPoly jack_poly(const Partition& lam) {
        const JackCoefficients& jc = jack_P(lam);
        SymPoly f(r_);
        for (const auto& [mu, c] : jc.expansion) f.add(mu, c);
        return f;
    }

    // P_lam^(alpha)(1, ..., 1), exact.
    Rat eval_ones(const Partition& lam) { return jack_poly(lam).eval_ones(); }

    // Rewrites f over the Jack basis: f = sum c_lam P_lam. Exact; the triangular
    // back-substitution consumes f degree by degree and must leave no residual.
    SymPoly::Table expand_in_jack(const SymPoly& f) {
        if (f.vars() != r_) throw validation_error("expand_in_jack: variable count mismatch");
        check_cap(f.degree());
        SymPoly rem = f;
        SymPoly::Table out;
        std::vector<int> degs;
        for (const auto& [p, c] : rem.terms()) degs.push_back(degree_of(p));
        std::sort(degs.begin(), degs.end());
        degs.erase(std::unique(degs.begin(), degs.end()), degs.end());
        for (int n : degs) {
            for (const auto& s : enumerate_signatures(r_, n)) {
                const Partition lam = s.key();
                const Rat c = rem.coeff(lam);
                if (c == 0) continue;
                out.emplace(lam, c);
                for (const auto& [mu, v] : jack_P(lam).expansion) rem.add(mu, -c * v);
            }
        }
        if (!rem.is_zero())
            throw std::logic_error("expand_in_jack: triangular solve left a residual");
        return out;
    }

    // Rows (lam, mu, coefficient) for every cached expansion, canonical order.
    std::vector<std::tuple<Partition, Partition, Rat>> dump_rows() {
        std::lock_guard<std::mutex> lock(mutex_);
        std::vector<std::tuple<Partition, Partition, Rat>> rows;
        for (const auto& [lam, jc] : cache_)
            for (const auto& [mu, c] : jc.expansion) rows.emplace_back(lam, mu, c);
        return rows;
    }

private:
    void check_cap(int degree) const {
        if (degree > max_degree_)
            throw degree_cap_error("jack basis degree " + std::to_string(degree) +
                                   " exceeds cap " + std::to_string(max_degree_));
    }

    Rat eigenvalue(const Partition& lam) const {
        Rat e(0);
        for (std::size_t i = 0; i < lam.size(); ++i) {
            const Rat li(lam[i]);
            e += alpha_ / 2 * li * (li - 1);
            e += Rat(r_ - 1 - static_cast<int>(i)) * li;
        }
        return e;
    }

    // D applied to m_mu, collected over the monomial basis.
    SymPoly::Table apply_D(const Partition& mu) const {
        std::map<std::vector<int>, Rat> acc;
        auto emit = [&](std::vector<int> expo, const Rat& c) {
            for (std::size_t i = 0; i + 1 < expo.size(); ++i)
                if (expo[i] < expo[i + 1]) return; // only sorted representatives matter
            acc[std::move(expo)] += c;
        };
        for (const auto& beta : detail::distinct_permutations(mu, r_)) {
            // diagonal part (alpha/2) sum_i beta_i (beta_i - 1)
            long diag = 0;
            for (int bi : beta) diag += static_cast<long>(bi) * (bi - 1);
            if (diag != 0) emit(beta, alpha_ / 2 * Rat(diag));
            // pair part; each unordered pair handled at its (a >= b) representative
            for (int i = 0; i < r_; ++i) {
                for (int j = i + 1; j < r_; ++j) {
                    const int a = beta[static_cast<std::size_t>(i)];
                    const int b = beta[static_cast<std::size_t>(j)];
                    if (a < b) continue;
                    if (a == b) {
                        if (a != 0) emit(beta, Rat(a));
                        continue;
                    }
                    emit(beta, Rat(a));
                    std::vector<int> swapped = beta;
                    std::swap(swapped[static_cast<std::size_t>(i)],
                              swapped[static_cast<std::size_t>(j)]);
                    emit(std::move(swapped), Rat(a));
                    for (int k = b + 1; k < a; ++k) {
                        std::vector<int> mid = beta;
                        mid[static_cast<std::size_t>(i)] = k;
                        mid[static_cast<std::size_t>(j)] = a + b - k;
                        emit(std::move(mid), Rat(a - b));
                    }
                }
            }
        }
        SymPoly::Table out;
        for (auto& [expo, c] : acc) {
            if (c == 0) continue;
            out.emplace(trim(expo), std::move(c));
        }
        return out;
    }

    // Solves every P_lam of the given degree and inserts them into the cache.
    void compute_degree_locked(int n) {
        const auto sigs = enumerate_signatures(r_, n);
        std::vector<Partition> parts;
        parts.reserve(sigs.size());
        for (const auto& s : sigs) parts.push_back(s.key());

        std::map<Partition, SymPoly::Table, CanonicalLess> dmat;
        std::map<Partition, Rat, CanonicalLess> eig;
        for (const auto& p : parts) {
            dmat.emplace(p, apply_D(p));
            eig.emplace(p, eigenvalue(p));
        }

        // parts is descending lex; for each lam, sweep strictly lower entries
        for (std::size_t li = 0; li < parts.size(); ++li) {
            const Partition& lam = parts[li];
            if (cache_.count(lam)) continue;
            JackCoefficients jc;
            jc.lam = lam;
            jc.expansion.emplace(lam, Rat(1));
            const Rat& elam = eig.at(lam);
            for (std::size_t ni = li + 1; ni < parts.size(); ++ni) {
                const Partition& nu = parts[ni];
                Rat s(0);
                for (const auto& [mu, u] : jc.expansion) {
                    const auto& row = dmat.at(mu);
                    auto it = row.find(nu);
                    if (it != row.end()) s += u * it->second;
                }
                if (s == 0) continue;
                jc.expansion.emplace(nu, s / (elam - eig.at(nu)));
            }
            cache_.emplace(lam, std::move(jc));
        }
    }

    int r_;
    Rat alpha_;
    int max_degree_;
    std::mutex mutex_;
    std::map<Partition, JackCoefficients, CanonicalLess> cache_;
};

} // namespace cnplab
