#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cnplab/jack.hpp"
#include "cnplab/rational.hpp"
#include "cnplab/signatures.hpp"
#include "cnplab/sympoly.hpp"

namespace cnplab {

// Coefficient table over signatures (trimmed-partition keys), exact values.
using CoeffTable = std::map<Partition, Rat, CanonicalLess>;

inline Rat table_value(const CoeffTable& t, const Partition& p) {
    auto it = t.find(trim(p));
    return it == t.end() ? Rat(0) : it->second;
}

/*
 * Radial model of the isotypic kernel components on the diagonal frame.
 *
 * Each component K_s is represented by f_s = K_s(e,e) * P_s / P_s(1^r) where
 * P_s is the Jack polynomial at alpha = 2/a (rank one uses the univariate
 * monomial basis; alpha is immaterial there). The vector (x_1, ..., x_r) holds
 * squared frame coordinates, so f_s(1, ..., 1) = K_s(e,e).
 *
 * Peter-Weyl values K_s(e,e) come from the exponential identity
 *   sum_{|s|=n} K_s(e,e) * P_s(x)/P_s(1^r) = (x_1 + ... + x_r)^n / n!,
 * read off by expanding the left power in the Jack basis.
 *
 * Structure constants c^p_{s,t} are defined by f_s f_t = sum_p c^p_{s,t} f_p;
 * they are symmetric in (s,t), supported on |p| = |s|+|t| with p >= s and
 * p >= t componentwise, and nonnegative.
 */
class RadialAlgebra {
public:
    explicit RadialAlgebra(CartanParams params, int max_degree = 14)
        : params_(params),
          alpha_(params.r >= 2 ? params.alpha() : Rat(1)),
          jack_(params.r, alpha_, max_degree) {}

    const CartanParams& params() const { return params_; }
    int rank() const { return params_.r; }
    int max_degree() const { return jack_.max_degree(); }
    JackBasis& jack() { return jack_; }

    // K_s(e,e); depends only on (r, a).
    Rat sphere_value(const Partition& s) {
        Partition key = trim(s);
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        ensure_sphere_degree(degree_of(key));
        return sphere_.at(key);
    }

    // Radial representative f_s over the monomial basis.
    SymPoly f_poly(const Partition& s) {
        Partition key = trim(s);
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        auto it = fpoly_.find(key);
        if (it != fpoly_.end()) return it->second;
        SymPoly f = jack_.jack_poly(key);
        const Rat scale = sphere_value(key) / f.eval_ones();
        f *= scale;
        fpoly_.emplace(key, f);
        return f;
    }

    // Expansion of f_s f_t over the f-basis: map p -> c^p_{s,t}.
    const CoeffTable& structure_constants(const Partition& s_in, const Partition& t_in) {
        Partition s = trim(s_in), t = trim(t_in);
        if (degree_of(s) + degree_of(t) > max_degree())
            throw degree_cap_error("structure constants exceed the degree cap");
        if (canonical_less(t, s)) std::swap(s, t); // symmetric in (s, t)
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        auto it = structure_.find({s, t});
        if (it != structure_.end()) return it->second;
        SymPoly prod = f_poly(s) * f_poly(t);
        CoeffTable out;
        for (const auto& [p, d] : jack_.expand_in_jack(prod)) {
            const Rat c = d * jack_.eval_ones(p) / sphere_value(p);
            if (c != 0) out.emplace(p, c);
        }
        return structure_.emplace(std::pair<Partition, Partition>{s, t}, std::move(out))
            .first->second;
    }

    Rat structure_constant(const Partition& s, const Partition& t, const Partition& p) {
        return table_value(structure_constants(s, t), p);
    }

    std::size_t structure_cache_size() {
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        return structure_.size();
    }

    // Pre-populated rows for the on-disk cache: (s, t, p, c).
    std::vector<std::tuple<Partition, Partition, Partition, Rat>> structure_rows() {
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        std::vector<std::tuple<Partition, Partition, Partition, Rat>> rows;
        for (const auto& [key, tab] : structure_)
            for (const auto& [p, c] : tab) rows.emplace_back(key.first, key.second, p, c);
        return rows;
    }

    // Seeds the cache with externally persisted rows (grouped per (s,t) pair).
    void adopt_structure_rows(
        const std::vector<std::tuple<Partition, Partition, Partition, Rat>>& rows) {
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        std::map<std::pair<Partition, Partition>, CoeffTable> grouped;
        for (const auto& [s, t, p, c] : rows) {
            Partition a = trim(s), b = trim(t);
            if (canonical_less(b, a)) std::swap(a, b);
            grouped[{a, b}].emplace(trim(p), c);
        }
        for (auto& [key, tab] : grouped) structure_.emplace(key, std::move(tab));
    }

private:
    void ensure_sphere_degree(int n) {
        if (n > max_degree()) throw degree_cap_error("sphere value exceeds the degree cap");
        if (sphere_degrees_.count(n)) return;
        // (x_1 + ... + x_r)^n / n! expanded over the Jack basis
        SymPoly f = SymPoly::one(params_.r);
        const SymPoly p1 = SymPoly::monomial(params_.r, {1});
        for (int k = 1; k <= n; ++k) f = f * p1;
        f *= Rat(1) / factorial_rat(static_cast<unsigned long>(n));
        SymPoly::Table ex = jack_.expand_in_jack(f);
        for (const auto& sig : enumerate_signatures(params_.r, n)) {
            const Partition lam = sig.key();
            auto it = ex.find(lam);
            const Rat g = it == ex.end() ? Rat(0) : it->second;
            sphere_.emplace(lam, g * jack_.eval_ones(lam));
        }
        sphere_degrees_.insert(n);
    }

    CartanParams params_;
    Rat alpha_;
    JackBasis jack_;
    std::recursive_mutex mutex_;
    std::set<int> sphere_degrees_;
    std::map<Partition, Rat, CanonicalLess> sphere_;
    std::map<Partition, SymPoly, CanonicalLess> fpoly_;
    std::map<std::pair<Partition, Partition>, CoeffTable> structure_;
};

// Invariant kernel truncated at degree N: K = sum_{|s| <= N} a_s K_s with
// a_0 = 1. Values may be zero or negative for formal analysis; the positivity
// flags record which regime the table is in.
struct RadialKernel {
    CartanParams params;
    int N = 0;
    CoeffTable a;
    bool strictly_positive = false;
    bool nonnegative = false;

    Rat a_of(const Partition& s) const { return table_value(a, s); }

    static RadialKernel from_table(const CartanParams& params, int N, CoeffTable table,
                                   bool require_strict = false) {
        if (N < 0) throw validation_error("kernel degree cutoff must be >= 0");
        for (const auto& [p, v] : table) {
            if (static_cast<int>(p.size()) > params.r)
                throw validation_error("kernel coefficient signature longer than the rank");
            if (degree_of(p) > N)
                throw validation_error("kernel coefficient beyond the degree cutoff");
            (void)v;
        }
        if (table_value(table, {}) != 1)
            throw validation_error("kernel must have unit constant coefficient a_0 = 1");
        RadialKernel k;
        k.params = params;
        k.N = N;
        k.a = std::move(table);
        k.strictly_positive = true;
        k.nonnegative = true;
        for (int n = 0; n <= N; ++n) {
            for (const auto& s : enumerate_signatures(params.r, n)) {
                const Rat v = k.a_of(s.key());
                if (v <= 0) k.strictly_positive = false;
                if (v < 0) k.nonnegative = false;
            }
        }
        if (require_strict && !k.strictly_positive)
            throw validation_error("kernel coefficients must be strictly positive");
        return k;
    }
};

// Coefficients of the reciprocal series: 1/K = sum bhat_s K_s, bhat_0 = 1.
// The sign-flipped tail b_s = -bhat_s (|s| >= 1) is the object of the
// positivity tests below.
struct InverseTable {
    int N = 0;
    CoeffTable bhat;

    Rat bhat_of(const Partition& s) const { return table_value(bhat, s); }
    Rat b_of(const Partition& s) const {
        if (trim(s).empty()) throw validation_error("b_s is defined for |s| >= 1 only");
        return -bhat_of(s);
    }
};

// Degree-by-degree inversion of the coefficient series. Unitriangular: each
// step divides only by a_0 = 1, so zero or negative a_s are tolerated.
inline InverseTable invert_kernel(RadialAlgebra& alg, const RadialKernel& K) {
    if (!(K.params == alg.params()))
        throw validation_error("kernel parameters do not match the algebra");
    if (K.N > alg.max_degree())
        throw degree_cap_error("kernel cutoff exceeds the algebra degree cap");
    InverseTable inv;
    inv.N = K.N;
    inv.bhat.emplace(Partition{}, Rat(1));
    for (int k = 1; k <= K.N; ++k) {
        for (const auto& s0sig : enumerate_signatures(K.params.r, k)) {
            const Partition s0 = s0sig.key();
            Rat acc = K.a_of(s0); // bhat_0 * a_{s0}
            for (int qd = 1; qd < k; ++qd) {
                for (const auto& qsig : enumerate_signatures(K.params.r, qd)) {
                    const Partition q = qsig.key();
                    const Rat bq = inv.bhat_of(q);
                    if (bq == 0) continue;
                    Rat coef(0);
                    for (const auto& psig : enumerate_signatures(K.params.r, k - qd)) {
                        const Partition p = psig.key();
                        const Rat ap = K.a_of(p);
                        if (ap == 0) continue;
                        coef += ap * alg.structure_constant(p, q, s0);
                    }
                    acc += coef * bq;
                }
            }
            if (acc != 0) inv.bhat.emplace(s0, -acc);
        }
    }
    return inv;
}

struct CnpReport {
    bool cnp = false;
    int certified_degree = 0;
    // signatures with b_s < 0, canonical enumeration order
    std::vector<Signature> offenders;

    // Among offenders of minimal degree, the dominance-lowest one (ties broken
    // toward ascending lex). Matches the sign analysis that tests the most
    // balanced signatures first.
    std::optional<Signature> first_witness() const {
        if (offenders.empty()) return std::nullopt;
        const int d0 = offenders.front().degree();
        Signature best = offenders.front();
        for (const auto& s : offenders) {
            if (s.degree() != d0) break;
            best = s; // canonical order is descending lex; keep the last = ascending-lex least
        }
        return best;
    }
};

// Complete positivity verdict for the reciprocal tail: CNP up to degree N iff
// b_s >= 0 for every 1 <= |s| <= N.
inline CnpReport cnp_test(const RadialKernel& K, const InverseTable& inv) {
    CnpReport rep;
    rep.certified_degree = inv.N;
    rep.cnp = true;
    for (int n = 1; n <= inv.N; ++n) {
        for (const auto& s : enumerate_signatures(K.params.r, n)) {
            if (inv.b_of(s.key()) < 0) {
                rep.cnp = false;
                rep.offenders.push_back(s);
            }
        }
    }
    return rep;
}

struct KaluzaReport {
    bool pass = false;
    bool vacuous = false;
    int certified_degree = 0;
    std::optional<std::pair<Signature, Signature>> witness; // (s0, q) of first failure
};

// Ratio-monotonicity test on the coefficient table: for every s0 with
// 2 <= |s0| = k <= N and every q with 1 <= |q| <= k-1,
//   sum_{s~ in lower(s0)} sum_{|p~|=k-1-|q|} (a_{p~}/a_{s~}) c^{s~}_{p~,q}
//     >= |lower(s0)| * sum_{|p|=k-|q|} (a_p/a_{s0}) c^{s0}_{p,q}.
// Degree-1 signatures impose no constraint (empty q range), so N <= 1 passes
// vacuously. Requires strictly positive coefficients. A pass certifies the
// complete positivity of the reciprocal tail up to the same degree.
inline KaluzaReport kaluza_test(RadialAlgebra& alg, const RadialKernel& K) {
    if (!K.strictly_positive)
        throw validation_error("kaluza_test requires strictly positive coefficients");
    KaluzaReport rep;
    rep.certified_degree = K.N;
    rep.vacuous = K.N <= 1;
    rep.pass = true;
    const int r = K.params.r;
    for (int k = 2; k <= K.N && rep.pass; ++k) {
        for (const auto& s0sig : enumerate_signatures(r, k)) {
            const Partition s0 = s0sig.key();
            const auto lower = lower_neighbors(s0sig);
            for (int qd = 1; qd <= k - 1; ++qd) {
                for (const auto& qsig : enumerate_signatures(r, qd)) {
                    const Partition q = qsig.key();
                    Rat lhs(0);
                    for (const auto& st : lower) {
                        const Rat ast = K.a_of(st.key());
                        for (const auto& pt : enumerate_signatures(r, k - 1 - qd)) {
                            const Rat apt = K.a_of(pt.key());
                            if (apt == 0) continue;
                            lhs += apt / ast * alg.structure_constant(pt.key(), q, st.key());
                        }
                    }
                    Rat rhs(0);
                    for (const auto& p : enumerate_signatures(r, k - qd)) {
                        const Rat ap = K.a_of(p.key());
                        if (ap == 0) continue;
                        rhs += ap / K.a_of(s0) * alg.structure_constant(p.key(), q, s0);
                    }
                    rhs *= Rat(static_cast<long>(lower.size()));
                    if (lhs < rhs) {
                        rep.pass = false;
                        rep.witness = {s0sig, qsig};
                        return rep;
                    }
                }
            }
        }
    }
    return rep;
}

// A^s_q = sum_{|p| = |s|-|q|} (a_p / a_s) c^s_{p,q}; zero when |q| > |s|.
inline Rat A_coefficient(RadialAlgebra& alg, const RadialKernel& K, const Signature& s,
                         const Signature& q) {
    if (q.degree() > s.degree()) return Rat(0);
    const Rat as = K.a_of(s.key());
    if (as == 0) throw validation_error("A coefficient undefined: a_s = 0");
    Rat acc(0);
    for (const auto& p : enumerate_signatures(K.params.r, s.degree() - q.degree())) {
        const Rat ap = K.a_of(p.key());
        if (ap == 0) continue;
        acc += ap / as * alg.structure_constant(p.key(), q.key(), s.key());
    }
    return acc;
}

// Weighted Bergman-type coefficient table a_s = (nu)_s.
inline RadialKernel bergman_coefficients(const CartanParams& params, const Rat& nu, int N,
                                         bool require_strict = false) {
    CoeffTable t;
    for (int n = 0; n <= N; ++n)
        for (const auto& s : enumerate_signatures(params.r, n))
            t.emplace(s.key(), generalized_pochhammer(nu, s, params.a));
    return RadialKernel::from_table(params, N, std::move(t), require_strict);
}

struct SweepEntry {
    Rat nu;
    bool strictly_positive = false;
    bool cnp = false;
    int certified_degree = 0;
    std::optional<Signature> witness;
};

inline std::vector<SweepEntry> bergman_cnp_sweep(RadialAlgebra& alg, const std::vector<Rat>& nus,
                                                 int N) {
    std::vector<SweepEntry> out;
    for (const Rat& nu : nus) {
        RadialKernel K = bergman_coefficients(alg.params(), nu, N, false);
        InverseTable inv = invert_kernel(alg, K);
        CnpReport rep = cnp_test(K, inv);
        SweepEntry e;
        e.nu = nu;
        e.strictly_positive = K.strictly_positive;
        e.cnp = rep.cnp;
        e.certified_degree = rep.certified_degree;
        e.witness = rep.first_witness();
        out.push_back(std::move(e));
    }
    return out;
}

struct FromLResult {
    RadialKernel K;
    Rat boundary_sum;      // sum_s c_s K_s(e,e)
    bool boundary_le_one = false;
};

// K = 1/(1 - L) for L = sum_{|s|>=1} c_s K_s with c_s >= 0, truncated at N.
// The geometric series in the coefficient algebra; by construction the
// reciprocal tail of the result equals c, so the result is CNP at every
// truncation order. The boundary sum reports whether the series is dominated
// on the closed frame orbit.
inline FromLResult build_from_L(RadialAlgebra& alg, const CoeffTable& c, int N) {
    for (const auto& [s, v] : c) {
        if (trim(s).empty() && v != 0)
            throw validation_error("build_from_L: L must have no constant term");
        if (v < 0) throw validation_error("build_from_L: coefficients must be >= 0");
        if (degree_of(s) > N)
            throw validation_error("build_from_L: coefficient beyond the cutoff");
    }
    auto mul_tables = [&](const CoeffTable& u, const CoeffTable& v) {
        CoeffTable out;
        for (const auto& [s, us] : u) {
            for (const auto& [t, vt] : v) {
                if (degree_of(s) + degree_of(t) > N) continue;
                for (const auto& [p, cc] : alg.structure_constants(s, t)) {
                    auto [it, ins] = out.emplace(p, us * vt * cc);
                    if (!ins) it->second += us * vt * cc;
                }
            }
        }
        return out;
    };
    CoeffTable acc{{Partition{}, Rat(1)}};
    CoeffTable power{{Partition{}, Rat(1)}};
    for (int j = 1; j <= N; ++j) {
        power = mul_tables(power, c);
        if (power.empty()) break;
        for (const auto& [p, v] : power) {
            auto [it, ins] = acc.emplace(p, v);
            if (!ins) it->second += v;
        }
    }
    for (auto it = acc.begin(); it != acc.end();) {
        if (it->second == 0)
            it = acc.erase(it);
        else
            ++it;
    }
    FromLResult res{RadialKernel::from_table(alg.params(), N, std::move(acc)), Rat(0), false};
    for (const auto& [s, v] : c)
        if (v != 0) res.boundary_sum += v * alg.sphere_value(s);
    res.boundary_le_one = res.boundary_sum <= 1;
    return res;
}

struct BoundaryReport {
    Rat total;                    // sum_s |c_s| K_s(e,e) through the cutoff
    std::vector<Rat> blocks;      // degree block n contributes blocks[n] * t^{2n}
    bool unbounded_at_cutoff = false;

    double eval_S(double t) const {
        double v = 0.0, t2 = t * t, p = 1.0;
        for (const Rat& b : blocks) {
            v += rat_to_double(b) * p;
            p *= t2;
        }
        return v;
    }
};

// Exact partial sums of sum |c_s| K_s(e,e) t^{2|s|} as a polynomial in t^2.
// The divergence flag is a cutoff diagnostic: the top two degree blocks are
// positive and non-decreasing.
inline BoundaryReport boundary_norm(RadialAlgebra& alg, const CoeffTable& c, int N) {
    BoundaryReport rep;
    rep.total = Rat(0);
    rep.blocks.assign(static_cast<std::size_t>(N) + 1, Rat(0));
    for (const auto& [s, v] : c) {
        const int n = degree_of(s);
        if (n > N) throw validation_error("boundary_norm: coefficient beyond the cutoff");
        Rat av = v >= 0 ? v : Rat(-v);
        rep.blocks[static_cast<std::size_t>(n)] += av * alg.sphere_value(s);
    }
    for (const Rat& b : rep.blocks) rep.total += b;
    if (N >= 1) {
        const Rat& last = rep.blocks[static_cast<std::size_t>(N)];
        const Rat& prev = rep.blocks[static_cast<std::size_t>(N - 1)];
        rep.unbounded_at_cutoff = last > 0 && last >= prev;
    }
    return rep;
}

struct IdentityReport {
    Rat lhs;
    Rat rhs;
    bool ok = false;
};

// Exact closure identity a_p = sum_{|s|+|t|=|p|, |t|>=1} a_s b_t c^p_{s,t}.
inline IdentityReport consistency_identity(RadialAlgebra& alg, const RadialKernel& K,
                                           const InverseTable& inv, const Partition& p_in) {
    const Partition p = trim(p_in);
    const int n = degree_of(p);
    if (n < 1) throw validation_error("consistency identity needs |p| >= 1");
    if (n > inv.N) throw degree_cap_error("consistency identity beyond the inverse cutoff");
    IdentityReport rep{K.a_of(p), Rat(0), false};
    for (int sd = 0; sd <= n - 1; ++sd) {
        for (const auto& ssig : enumerate_signatures(K.params.r, sd)) {
            const Rat as = K.a_of(ssig.key());
            if (as == 0) continue;
            for (const auto& tsig : enumerate_signatures(K.params.r, n - sd)) {
                const Rat bt = inv.b_of(tsig.key());
                if (bt == 0) continue;
                rep.rhs += as * bt * alg.structure_constant(ssig.key(), tsig.key(), p);
            }
        }
    }
    rep.ok = rep.lhs == rep.rhs;
    return rep;
}

struct GammaReport {
    bool defined = false;
    Rat gamma;
    Rat one_minus_gamma;
    bool identity_applicable = false; // N_cap == |s'| - 1
    Rat identity_rhs;                 // b_{s'} c^{s'}_{s',0} / a_{s'}
    bool identity_ok = false;
};

// Scalar gamma(s') = (1/a_{s'}) sum_{1<=|s|<=N_cap, |t|=|s'|-|s|} a_t b_s c^{s'}_{s,t}.
// At N_cap = |s'|-1 the complement identity 1 - gamma = b_{s'} c^{s'}_{s',0} / a_{s'}
// holds exactly and is verified.
inline GammaReport gamma_scalar(RadialAlgebra& alg, const RadialKernel& K,
                                const InverseTable& inv, const Partition& sp_in, int N_cap) {
    const Partition sp = trim(sp_in);
    const int n = degree_of(sp);
    if (n < 1) throw validation_error("gamma_scalar needs |s'| >= 1");
    if (n > inv.N) throw degree_cap_error("gamma_scalar beyond the inverse cutoff");
    GammaReport rep;
    const Rat asp = K.a_of(sp);
    if (asp == 0) {
        rep.defined = false;
        rep.gamma = Rat(0);
        rep.one_minus_gamma = Rat(1);
        return rep;
    }
    rep.defined = true;
    Rat acc(0);
    const int top = std::min(N_cap, n);
    for (int sd = 1; sd <= top; ++sd) {
        for (const auto& ssig : enumerate_signatures(K.params.r, sd)) {
            const Rat bs = inv.b_of(ssig.key());
            if (bs == 0) continue;
            for (const auto& tsig : enumerate_signatures(K.params.r, n - sd)) {
                const Rat at = K.a_of(tsig.key());
                if (at == 0) continue;
                acc += at * bs * alg.structure_constant(ssig.key(), tsig.key(), sp);
            }
        }
    }
    rep.gamma = acc / asp;
    rep.one_minus_gamma = Rat(1) - rep.gamma;
    rep.identity_applicable = N_cap == n - 1;
    if (rep.identity_applicable) {
        rep.identity_rhs = inv.b_of(sp) * alg.structure_constant(sp, {}, sp) / asp;
        rep.identity_ok = rep.one_minus_gamma == rep.identity_rhs;
    }
    return rep;
}

struct RadialEvalReport {
    double value = 0.0;
    std::vector<double> blocks;    // degree block contributions
    double tail_bound = 0.0;       // crude geometric estimate from the last two blocks
    bool tail_finite = false;
};

// Floating evaluation of sum_{|s|<=N} a_s K_s(e,e) phi_s at the scaled frame
// point: x holds frame coordinates in [0,1], the scale t multiplies the point,
// so phi_s is evaluated at the squared coordinates ((t x_1)^2, ..., (t x_r)^2).
inline RadialEvalReport radial_eval(RadialAlgebra& alg, const RadialKernel& K,
                                    const std::vector<double>& x, double t) {
    if (static_cast<int>(x.size()) != K.params.r)
        throw validation_error("radial_eval: point dimension must equal the rank");
    if (!(t >= 0.0 && t < 1.0)) throw validation_error("radial_eval: need 0 <= t < 1");
    for (double xi : x)
        if (!(xi >= 0.0 && xi <= 1.0))
            throw validation_error("radial_eval: coordinates must lie in [0,1]");
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = (t * x[i]) * (t * x[i]);
    RadialEvalReport rep;
    rep.blocks.assign(static_cast<std::size_t>(K.N) + 1, 0.0);
    for (int n = 0; n <= K.N; ++n) {
        double block = 0.0;
        for (const auto& s : enumerate_signatures(K.params.r, n)) {
            const Rat as = K.a_of(s.key());
            if (as == 0) continue;
            block += rat_to_double(as) * alg.f_poly(s.key()).eval(y);
        }
        rep.blocks[static_cast<std::size_t>(n)] = block;
        rep.value += block;
    }
    if (K.N >= 1) {
        const double last = std::abs(rep.blocks[static_cast<std::size_t>(K.N)]);
        const double prev = std::abs(rep.blocks[static_cast<std::size_t>(K.N - 1)]);
        if (last == 0.0) {
            rep.tail_bound = 0.0;
            rep.tail_finite = true;
        } else if (prev > 0.0 && last < prev) {
            const double rho = last / prev;
            rep.tail_bound = last * rho / (1.0 - rho);
            rep.tail_finite = true;
        } else {
            rep.tail_bound = std::numeric_limits<double>::infinity();
            rep.tail_finite = false;
        }
    } else {
        rep.tail_finite = true;
    }
    return rep;
}

} // namespace cnplab
