#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cnplab/rational.hpp"
#include "cnplab/signatures.hpp"

namespace cnplab {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using MultiIndex = std::vector<int>;

namespace balldetail {

inline Rat multi_factorial(const MultiIndex& beta) {
    Rat f(1);
    for (int b : beta) f *= factorial_rat(static_cast<unsigned long>(b));
    return f;
}

inline int multi_degree(const MultiIndex& beta) {
    int n = 0;
    for (int b : beta) n += b;
    return n;
}

// All multi-indices in d slots of total degree n, first coordinate descending.
inline std::vector<MultiIndex> multi_indices(int d, int n) {
    std::vector<MultiIndex> out;
    MultiIndex cur(static_cast<std::size_t>(d), 0);
    auto rec = [&](auto&& self, int rem, int pos) -> void {
        if (pos == d - 1) {
            cur[static_cast<std::size_t>(pos)] = rem;
            out.push_back(cur);
            return;
        }
        for (int k = rem; k >= 0; --k) {
            cur[static_cast<std::size_t>(pos)] = k;
            self(self, rem - k, pos + 1);
        }
    };
    rec(rec, n, 0);
    return out;
}

inline double op_norm(const CMat& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(M);
    return svd.singularValues()(0);
}

inline CMat hermitize(const CMat& M) { return (M + M.adjoint()) / 2.0; }

struct PsdSqrt {
    CMat sqrt;
    double min_eig = 0.0;
    bool psd = false; // min_eig >= -clip_tol
};

// Square root after clipping eigenvalues in [-clip_tol, 0] to zero.
inline PsdSqrt psd_sqrt(const CMat& M, double clip_tol) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(M));
    Eigen::VectorXd w = es.eigenvalues();
    PsdSqrt out;
    out.min_eig = w.minCoeff();
    out.psd = out.min_eig >= -clip_tol;
    Eigen::VectorXd c = w.cwiseMax(0.0).cwiseSqrt();
    out.sqrt = es.eigenvectors() * c.asDiagonal() * es.eigenvectors().adjoint();
    return out;
}

// Orthonormal basis of the numerical range of a PSD matrix.
inline CMat range_basis(const CMat& M, double rank_tol) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(M));
    const Eigen::VectorXd w = es.eigenvalues();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w(i) > rank_tol) keep.push_back(i);
    CMat U(M.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) U.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
    return U;
}

} // namespace balldetail

// Rank-one coefficient data on the d-dimensional ball, exact until the
// numerical boundary. a[n] are the isotypic coefficients (a_0 = 1, a_n > 0);
// b[n] is the sign-flipped reciprocal tail from exact power-series inversion:
// (sum a_n x^n / n!) * (1 - sum_{n>=1} b_n x^n / n!) = 1 truncated at N_op.
struct BallKernel {
    int d = 1;
    int N_op = 0;
    std::vector<Rat> a; // size N_op + 1
    std::vector<Rat> b; // size N_op + 1, b[0] = 0

    static BallKernel from_k_basis(int d, int N_op, std::vector<Rat> a_table) {
        if (d < 1) throw validation_error("ball dimension must be >= 1");
        if (N_op < 0) throw validation_error("truncation order must be >= 0");
        if (static_cast<int>(a_table.size()) != N_op + 1)
            throw validation_error("coefficient table must have N_op + 1 entries");
        if (a_table[0] != 1) throw validation_error("a_0 must equal 1");
        for (const Rat& v : a_table)
            if (v <= 0) throw validation_error("coefficients a_n must be strictly positive");
        BallKernel K;
        K.d = d;
        K.N_op = N_op;
        K.a = std::move(a_table);
        // exact inversion of the power-basis series c_n = a_n / n!
        std::vector<Rat> c(K.a.size()), chat(K.a.size());
        for (std::size_t n = 0; n < K.a.size(); ++n)
            c[n] = K.a[n] / factorial_rat(static_cast<unsigned long>(n));
        chat[0] = Rat(1);
        for (std::size_t n = 1; n < c.size(); ++n) {
            Rat s(0);
            for (std::size_t k = 1; k <= n; ++k) s += c[k] * chat[n - k];
            chat[n] = -s;
        }
        K.b.assign(K.a.size(), Rat(0));
        for (std::size_t n = 1; n < c.size(); ++n)
            K.b[n] = -chat[n] * factorial_rat(static_cast<unsigned long>(n));
        return K;
    }

    static BallKernel from_power_series(int d, int N_op, const std::vector<Rat>& c) {
        if (static_cast<int>(c.size()) != N_op + 1)
            throw validation_error("power series must have N_op + 1 entries");
        std::vector<Rat> a(c.size());
        for (std::size_t n = 0; n < c.size(); ++n)
            a[n] = c[n] * factorial_rat(static_cast<unsigned long>(n));
        return from_k_basis(d, N_op, std::move(a));
    }

    double a_ratio_double(int n, const Rat& denom) const {
        return rat_to_double(a[static_cast<std::size_t>(n)] / denom);
    }

    int max_b_degree() const {
        for (int n = N_op; n >= 1; --n)
            if (b[static_cast<std::size_t>(n)] != 0) return n;
        return 0;
    }

    bool cnp_truncated() const {
        for (const Rat& v : b)
            if (v < 0) return false;
        return true;
    }
};

// Commuting tuple of square matrices. Construction enforces the commutativity
// tolerance ||T_i T_j - T_j T_i|| <= tol * max(1, max_i ||T_i||^2).
struct OperatorTuple {
    int d = 1;
    int m = 1;
    std::vector<CMat> T;

    static OperatorTuple from_matrices(std::vector<CMat> mats, double tol = 1e-10) {
        if (mats.empty()) throw validation_error("operator tuple needs at least one matrix");
        const Eigen::Index m = mats[0].rows();
        for (const CMat& M : mats)
            if (M.rows() != m || M.cols() != m)
                throw validation_error("operator tuple matrices must be square and same size");
        double scale = 1.0;
        for (const CMat& M : mats)
            scale = std::max(scale, std::pow(balldetail::op_norm(M), 2));
        for (std::size_t i = 0; i < mats.size(); ++i) {
            for (std::size_t j = i + 1; j < mats.size(); ++j) {
                const double comm = balldetail::op_norm(mats[i] * mats[j] - mats[j] * mats[i]);
                if (comm > tol * scale)
                    throw noncommuting_error("commutator norm " + std::to_string(comm) +
                                             " exceeds tolerance");
            }
        }
        OperatorTuple t;
        t.d = static_cast<int>(mats.size());
        t.m = static_cast<int>(m);
        t.T = std::move(mats);
        return t;
    }
};

// Monomials T^beta for |beta| <= N.
class PowerTable {
public:
    PowerTable(const OperatorTuple& t, int N) {
        CMat I = CMat::Identity(t.m, t.m);
        table_[MultiIndex(static_cast<std::size_t>(t.d), 0)] = I;
        for (int n = 1; n <= N; ++n) {
            for (const auto& beta : balldetail::multi_indices(t.d, n)) {
                std::size_t i = 0;
                while (beta[i] == 0) ++i;
                MultiIndex prev = beta;
                prev[i] -= 1;
                table_[beta] = t.T[i] * table_.at(prev);
            }
        }
    }
    const CMat& at(const MultiIndex& beta) const { return table_.at(beta); }

private:
    std::map<MultiIndex, CMat> table_;
};

struct DefectPackage {
    CMat defect2;       // I - sum_{n>=1} b_n sum_{|beta|=n} T^beta T^{*beta} / beta!
    CMat Delta;         // clipped PSD square root
    double min_eig = 0.0;
    bool contraction = false;
    double tail_block = 0.0; // ||b_N * P_N|| at the cutoff (0 when b terminates earlier)
    bool tail_ok = false;
};

// Defect of the tuple against the kernel. Nilpotent tuples and finitely
// supported b make the series terminate exactly; otherwise the top block norm
// is reported as a truncation diagnostic.
inline DefectPackage defect_operator(const OperatorTuple& t, const BallKernel& K,
                                     double tol_psd = 1e-10) {
    if (t.d != K.d) throw validation_error("tuple dimension does not match the kernel");
    PowerTable P(t, K.N_op);
    CMat S = CMat::Zero(t.m, t.m);
    std::vector<double> block_norms(static_cast<std::size_t>(K.N_op) + 1, 0.0);
    for (int n = 1; n <= K.N_op; ++n) {
        const Rat& bn = K.b[static_cast<std::size_t>(n)];
        if (bn == 0) continue;
        CMat block = CMat::Zero(t.m, t.m);
        for (const auto& beta : balldetail::multi_indices(t.d, n)) {
            const CMat& Tb = P.at(beta);
            block += rat_to_double(Rat(1) / balldetail::multi_factorial(beta)) * (Tb * Tb.adjoint());
        }
        block *= rat_to_double(bn);
        block_norms[static_cast<std::size_t>(n)] = balldetail::op_norm(block);
        S += block;
    }
    DefectPackage pkg;
    pkg.defect2 = CMat::Identity(t.m, t.m) - S;
    auto sq = balldetail::psd_sqrt(pkg.defect2, tol_psd);
    pkg.Delta = sq.sqrt;
    pkg.min_eig = sq.min_eig;
    pkg.contraction = sq.psd;
    if (K.max_b_degree() < K.N_op) {
        pkg.tail_block = 0.0;
        pkg.tail_ok = true;
    } else {
        pkg.tail_block = block_norms[static_cast<std::size_t>(K.N_op)];
        const double prev = block_norms[static_cast<std::size_t>(K.N_op - 1)];
        pkg.tail_ok = pkg.tail_block == 0.0 || (prev > 0.0 && pkg.tail_block < prev);
    }
    return pkg;
}

struct PurityReport {
    enum class Verdict { pure, not_pure, inconclusive };
    Verdict verdict = Verdict::inconclusive;
    std::vector<double> residuals; // ||S_N - I|| for N = 0..N_op
    double final_residual = 0.0;
    bool bounded = true; // S_N <= I + tol_bound at every N
};

// Partial sums S_N = sum_{n<=N} a_n sum_beta psi_beta(T) Delta^2 psi_beta(T)*.
// Pure when the residual reaches tol_pure; definitely not pure when the series
// has stalled (zero increments) away from I; inconclusive otherwise.
inline PurityReport purity_check(const OperatorTuple& t, const BallKernel& K,
                                 const DefectPackage& pkg, double tol_pure = 1e-8,
                                 double tol_bound = 1e-10) {
    PowerTable P(t, K.N_op);
    PurityReport rep;
    const CMat I = CMat::Identity(t.m, t.m);
    CMat S = CMat::Zero(t.m, t.m);
    double last_block = 0.0;
    for (int n = 0; n <= K.N_op; ++n) {
        CMat block = CMat::Zero(t.m, t.m);
        for (const auto& beta : balldetail::multi_indices(t.d, n)) {
            const CMat& Tb = P.at(beta);
            block += K.a_ratio_double(n, balldetail::multi_factorial(beta)) *
                     (Tb * pkg.defect2 * Tb.adjoint());
        }
        S += block;
        last_block = balldetail::op_norm(block);
        rep.residuals.push_back(balldetail::op_norm(S - I));
        Eigen::SelfAdjointEigenSolver<CMat> es(balldetail::hermitize(S));
        if (es.eigenvalues().maxCoeff() > 1.0 + tol_bound) rep.bounded = false;
    }
    rep.final_residual = rep.residuals.back();
    bool nonincreasing = true;
    for (std::size_t i = 1; i < rep.residuals.size(); ++i)
        if (rep.residuals[i] > rep.residuals[i - 1] + 1e-12) nonincreasing = false;
    if (rep.final_residual <= tol_pure && rep.bounded && nonincreasing) {
        rep.verdict = PurityReport::Verdict::pure;
    } else if (last_block <= tol_pure * 1e-2 && rep.final_residual > 100 * tol_pure) {
        rep.verdict = PurityReport::Verdict::not_pure; // stalled away from I
    } else {
        rep.verdict = PurityReport::Verdict::inconclusive;
    }
    return rep;
}

// Dilation data: V rows are blocks sqrt(a_n/beta!) * U_delta^* Delta T^{*beta}
// against the orthonormal basis sqrt(a_n/beta!) z^beta of the function space,
// with the defect factor expressed in an orthonormal basis of Ran Delta.
struct IsometryPackage {
    int N_op = 0;
    int rank_delta = 0;
    std::vector<MultiIndex> index; // all |beta| <= N_op grouped by degree
    CMat U_delta;                  // m x rank_delta
    CMat V;                        // (index.size() * rank_delta) x m
    double isometry_defect = 0.0;  // ||V^*V - I||
    double condition_b = 0.0;      // min eig of V^*V
    std::vector<double> intertwining; // per coordinate, degree guard band applied
};

namespace balldetail {

// Multiplication matrix by the i-th coordinate on the truncated function space
// tensored with C^{fibre}: block (beta + e_i, beta) = sqrt(a_n/a_{n+1}) sqrt(beta_i + 1) I.
inline CMat coordinate_mult(const BallKernel& K, const std::vector<MultiIndex>& index,
                            const std::map<MultiIndex, std::size_t>& pos, int i, int fibre) {
    const Eigen::Index dim = static_cast<Eigen::Index>(index.size()) * fibre;
    CMat M = CMat::Zero(dim, dim);
    for (std::size_t col = 0; col < index.size(); ++col) {
        const MultiIndex& beta = index[col];
        const int n = multi_degree(beta);
        MultiIndex up = beta;
        up[static_cast<std::size_t>(i)] += 1;
        const auto it = pos.find(up);
        if (it == pos.end()) continue; // top degree of the compression
        const std::size_t row = it->second;
        const double w =
            std::sqrt(rat_to_double(K.a[static_cast<std::size_t>(n)] /
                                    K.a[static_cast<std::size_t>(n + 1)]) *
                      (beta[static_cast<std::size_t>(i)] + 1));
        for (int k = 0; k < fibre; ++k)
            M(static_cast<Eigen::Index>(row) * fibre + k,
              static_cast<Eigen::Index>(col) * fibre + k) = w;
    }
    return M;
}

inline std::vector<MultiIndex> all_indices(int d, int N) {
    std::vector<MultiIndex> index;
    for (int n = 0; n <= N; ++n)
        for (const auto& beta : multi_indices(d, n)) index.push_back(beta);
    return index;
}

inline std::map<MultiIndex, std::size_t> index_positions(const std::vector<MultiIndex>& index) {
    std::map<MultiIndex, std::size_t> pos;
    for (std::size_t i = 0; i < index.size(); ++i) pos.emplace(index[i], i);
    return pos;
}

} // namespace balldetail

inline IsometryPackage build_V(const OperatorTuple& t, const BallKernel& K,
                               const DefectPackage& pkg, double rank_tol = 1e-12) {
    if (!pkg.contraction)
        throw validation_error("build_V requires a kernel contraction (PSD defect)");
    IsometryPackage out;
    out.N_op = K.N_op;
    out.index = balldetail::all_indices(K.d, K.N_op);
    const auto pos = balldetail::index_positions(out.index);
    out.U_delta = balldetail::range_basis(pkg.defect2, rank_tol);
    out.rank_delta = static_cast<int>(out.U_delta.cols());
    const int rd = std::max(out.rank_delta, 1);
    PowerTable P(t, K.N_op);
    out.V = CMat::Zero(static_cast<Eigen::Index>(out.index.size()) * rd, t.m);
    for (std::size_t row = 0; row < out.index.size(); ++row) {
        const MultiIndex& beta = out.index[row];
        const int n = balldetail::multi_degree(beta);
        const double w = std::sqrt(K.a_ratio_double(n, balldetail::multi_factorial(beta)));
        if (out.rank_delta > 0)
            out.V.middleRows(static_cast<Eigen::Index>(row) * rd, out.rank_delta) =
                w * (out.U_delta.adjoint() * pkg.Delta * P.at(beta).adjoint());
    }
    const CMat G = out.V.adjoint() * out.V;
    out.isometry_defect = balldetail::op_norm(G - CMat::Identity(t.m, t.m));
    Eigen::SelfAdjointEigenSolver<CMat> es(balldetail::hermitize(G));
    out.condition_b = es.eigenvalues().minCoeff();
    // intertwining V^*(M_i tensor I) = T_i V^* on inputs of degree <= N_op - 1
    for (int i = 0; i < K.d; ++i) {
        const CMat Mi = balldetail::coordinate_mult(K, out.index, pos, i, rd);
        CMat R = out.V.adjoint() * Mi - t.T[static_cast<std::size_t>(i)] * out.V.adjoint();
        std::vector<Eigen::Index> cols;
        for (std::size_t c = 0; c < out.index.size(); ++c)
            if (balldetail::multi_degree(out.index[c]) <= K.N_op - 1)
                for (int k = 0; k < rd; ++k)
                    cols.push_back(static_cast<Eigen::Index>(c) * rd + k);
        CMat Rg(R.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c)
            Rg.col(static_cast<Eigen::Index>(c)) = R.col(cols[c]);
        out.intertwining.push_back(balldetail::op_norm(Rg));
    }
    return out;
}

struct KwReport {
    CMat series;   // sum_n (a_n/n!) W^n, W = sum_i conj(w_i) T_i
    CMat inverse;  // (I - sum_{n>=1} (b_n/n!) W^n)^{-1}
    double agreement = 0.0;
    double guard_norm = 0.0; // ||sum (b_n/n!) W^n||, must be < 1 for the inverse route
    bool guard_ok = false;
};

inline KwReport Kw_calculus(const OperatorTuple& t, const BallKernel& K,
                            const std::vector<Cplx>& w) {
    if (static_cast<int>(w.size()) != K.d)
        throw validation_error("Kw_calculus: point dimension mismatch");
    CMat W = CMat::Zero(t.m, t.m);
    for (int i = 0; i < K.d; ++i) W += std::conj(w[static_cast<std::size_t>(i)]) * t.T[static_cast<std::size_t>(i)];
    CMat Wp = CMat::Identity(t.m, t.m);
    CMat series = CMat::Zero(t.m, t.m);
    CMat A = CMat::Zero(t.m, t.m);
    for (int n = 0; n <= K.N_op; ++n) {
        if (n > 0) Wp = Wp * W;
        const Rat fact = factorial_rat(static_cast<unsigned long>(n));
        series += rat_to_double(K.a[static_cast<std::size_t>(n)] / fact) * Wp;
        if (n >= 1) A += rat_to_double(K.b[static_cast<std::size_t>(n)] / fact) * Wp;
    }
    KwReport rep;
    rep.series = series;
    rep.guard_norm = balldetail::op_norm(A);
    rep.guard_ok = rep.guard_norm < 1.0;
    rep.inverse = (CMat::Identity(t.m, t.m) - A).inverse();
    rep.agreement = (rep.series - rep.inverse).cwiseAbs().maxCoeff();
    return rep;
}

// Scalar kernel value K(z, w) = sum (a_n/n!) <z,w>^n truncated.
inline Cplx kernel_value(const BallKernel& K, const std::vector<Cplx>& z,
                         const std::vector<Cplx>& w) {
    Cplx ip(0);
    for (int i = 0; i < K.d; ++i)
        ip += z[static_cast<std::size_t>(i)] * std::conj(w[static_cast<std::size_t>(i)]);
    Cplx v(0), p(1);
    for (int n = 0; n <= K.N_op; ++n) {
        if (n > 0) p *= ip;
        v += K.a_ratio_double(n, factorial_rat(static_cast<unsigned long>(n))) * p;
    }
    return v;
}

// Norm-squared tail proxy of K_w in the function space: blocks a_n ||w||^{2n}/n!
// extrapolated geometrically past the cutoff.
inline double kw_tail_estimate(const BallKernel& K, const std::vector<Cplx>& w) {
    if (K.N_op < 1) return 0.0;
    double nw2 = 0.0;
    for (const Cplx& x : w) nw2 += std::norm(x);
    double last = 0.0, prev = 0.0;
    for (int n = K.N_op - 1; n <= K.N_op; ++n) {
        const double v = K.a_ratio_double(n, factorial_rat(static_cast<unsigned long>(n))) *
                         std::pow(nw2, n);
        if (n == K.N_op) last = v; else prev = v;
    }
    if (last == 0.0) return 0.0;
    if (prev <= 0.0 || last >= prev) return std::numeric_limits<double>::infinity();
    const double rho = last / prev;
    return last * rho / (1.0 - rho);
}

/*
 * Transfer-function data of the tuple against a kernel with nonnegative
 * reciprocal tail. The internal space stacks one copy of C^m per multi-index
 * with 1 <= |beta| <= N_op and b_{|beta|} > 0; indices with vanishing weight
 * are dropped (they contribute zero columns and identity defect blocks, so
 * the value changes only by removing zero columns). For the classical disc
 * weights the construction degenerates to rows/columns of the single-block
 * Sz.-Nagy-Foias function.
 */
class CharFn {
public:
    CharFn(const OperatorTuple& t, const BallKernel& K, const DefectPackage& pkg,
           double rank_tol = 1e-12)
        : m_(t.m), d_(K.d), K_(K), Delta_(pkg.Delta) {
        if (!pkg.contraction)
            throw validation_error("characteristic function requires a kernel contraction");
        for (const Rat& v : K.b)
            if (v < 0)
                throw validation_error(
                    "characteristic function requires nonnegative reciprocal tail");
        PowerTable P(t, K.N_op);
        for (int n = 1; n <= K.N_op; ++n) {
            if (K.b[static_cast<std::size_t>(n)] == 0) continue;
            for (const auto& beta : balldetail::multi_indices(K.d, n)) J_.push_back(beta);
        }
        Ttilde_ = CMat::Zero(m_, static_cast<Eigen::Index>(J_.size()) * m_);
        for (std::size_t k = 0; k < J_.size(); ++k) {
            const MultiIndex& beta = J_[k];
            const int n = balldetail::multi_degree(beta);
            const double w = std::sqrt(rat_to_double(
                K.b[static_cast<std::size_t>(n)] / balldetail::multi_factorial(beta)));
            Ttilde_.middleCols(static_cast<Eigen::Index>(k) * m_, m_) = w * P.at(beta);
        }
        const Eigen::Index ht = Ttilde_.cols();
        const CMat Dt2 = CMat::Identity(ht, ht) - Ttilde_.adjoint() * Ttilde_;
        auto sq = balldetail::psd_sqrt(Dt2, 1e-10);
        Dtilde_ = sq.sqrt;
        U_dom_ = balldetail::range_basis(Dt2, rank_tol);
        U_delta_ = balldetail::range_basis(pkg.defect2, rank_tol);
        // intertwining consistency: Ttilde * Dtilde = Delta * Ttilde
        tdt_residual_ = (Ttilde_ * Dtilde_ - Delta_ * Ttilde_).cwiseAbs().maxCoeff();
    }

    struct Value {
        CMat full;       // m x (m * #J), canonical coordinates
        CMat restricted; // rank(Delta) x dim(Ran D_tilde)
        double norm = 0.0;
        bool contraction_ok = false;
    };

    Value eval(const std::vector<Cplx>& z, double tol_contraction = 1e-8) const {
        if (static_cast<int>(z.size()) != d_)
            throw validation_error("CharFn::eval: point dimension mismatch");
        const Eigen::Index ht = Ttilde_.cols();
        CMat Z = CMat::Zero(m_, ht);
        for (std::size_t k = 0; k < J_.size(); ++k) {
            const MultiIndex& beta = J_[k];
            const int n = balldetail::multi_degree(beta);
            Cplx zb(1);
            for (int i = 0; i < d_; ++i)
                for (int e = 0; e < beta[static_cast<std::size_t>(i)]; ++e)
                    zb *= z[static_cast<std::size_t>(i)];
            const double w = std::sqrt(rat_to_double(
                K_.b[static_cast<std::size_t>(n)] / balldetail::multi_factorial(beta)));
            Z.middleCols(static_cast<Eigen::Index>(k) * m_, m_) =
                (w * zb) * CMat::Identity(m_, m_);
        }
        const CMat ZT = Z * Ttilde_.adjoint();
        const CMat inv = (CMat::Identity(m_, m_) - ZT).inverse();
        Value v;
        v.full = -Ttilde_ + Delta_ * inv * Z * Dtilde_;
        v.restricted = U_delta_.adjoint() * v.full * U_dom_;
        v.norm = balldetail::op_norm(v.full);
        v.contraction_ok = v.norm <= 1.0 + tol_contraction;
        return v;
    }

    int domain_dim() const { return static_cast<int>(U_dom_.cols()); }
    int range_dim() const { return static_cast<int>(U_delta_.cols()); }
    double tdt_residual() const { return tdt_residual_; }
    const CMat& Delta() const { return Delta_; }
    const CMat& Ttilde() const { return Ttilde_; }
    const CMat& Dtilde() const { return Dtilde_; }

private:
    int m_;
    int d_;
    BallKernel K_;
    CMat Delta_;
    std::vector<MultiIndex> J_;
    CMat Ttilde_;
    CMat Dtilde_;
    CMat U_dom_;
    CMat U_delta_;
    double tdt_residual_ = 0.0;
};

// max-abs residual of
// I - theta(z) theta(w)* = (1/K(z,w)) Delta K_z(T)* K_w(T) Delta on C^m.
inline double verify_identity_lemma(const OperatorTuple& t, const BallKernel& K,
                                    const DefectPackage& pkg, const CharFn& theta,
                                    const std::vector<Cplx>& z, const std::vector<Cplx>& w) {
    const Cplx kzw = kernel_value(K, z, w);
    if (std::abs(kzw) < 1e-12)
        throw validation_error("identity check: K(z,w) vanishes at the sample");
    const CMat thz = theta.eval(z).full;
    const CMat thw = theta.eval(w).full;
    const CMat lhs = CMat::Identity(t.m, t.m) - thz * thw.adjoint();
    const CMat Kz = Kw_calculus(t, K, z).series;
    const CMat Kw = Kw_calculus(t, K, w).series;
    const CMat rhs = (1.0 / kzw) * (pkg.Delta * Kz.adjoint() * Kw * pkg.Delta);
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

struct GramSample {
    std::vector<Cplx> w;
    CVec xi; // defect vector, projected onto Ran Delta by the harness
};

// Gram identity of the dilation: for samples (w_i, xi_i),
// <V*(K_{w_i} (x) xi_i), V*(K_{w_j} (x) xi_j)> = K(w_j, w_i) <(I - theta(w_j) theta(w_i)*) xi_i, xi_j>.
// Samples whose tail proxy exceeds tol_tail are refused.
inline double verify_gram(const OperatorTuple& t, const BallKernel& K, const DefectPackage& pkg,
                          const IsometryPackage& iso, const CharFn& theta,
                          std::vector<GramSample> samples, double tol_tail = 1e-9) {
    const int rd = std::max(iso.rank_delta, 1);
    std::vector<CVec> images;    // V*(K_w (x) xi)
    std::vector<CVec> defects;   // projected xi
    for (auto& s : samples) {
        if (kw_tail_estimate(K, s.w) > tol_tail)
            throw validation_error("gram check: sample too close to the sphere for the cutoff");
        // project onto Ran Delta
        CVec xi = iso.U_delta * (iso.U_delta.adjoint() * s.xi);
        CVec coords = CVec::Zero(static_cast<Eigen::Index>(iso.index.size()) * rd);
        for (std::size_t row = 0; row < iso.index.size(); ++row) {
            const MultiIndex& beta = iso.index[row];
            const int n = balldetail::multi_degree(beta);
            Cplx wb(1);
            for (int i = 0; i < K.d; ++i)
                for (int e = 0; e < beta[static_cast<std::size_t>(i)]; ++e)
                    wb *= std::conj(s.w[static_cast<std::size_t>(i)]);
            const double c = std::sqrt(K.a_ratio_double(n, balldetail::multi_factorial(beta)));
            coords.segment(static_cast<Eigen::Index>(row) * rd, iso.rank_delta) =
                (c * wb) * (iso.U_delta.adjoint() * xi);
        }
        images.push_back(iso.V.adjoint() * coords);
        defects.push_back(std::move(xi));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = 0; j < samples.size(); ++j) {
            const Cplx lhs = (images[j].adjoint() * images[i])(0, 0);
            const CMat thj = theta.eval(samples[j].w).full;
            const CMat thi = theta.eval(samples[i].w).full;
            const Cplx kji = kernel_value(K, samples[j].w, samples[i].w);
            const Cplx rhs =
                kji * (defects[j].adjoint() *
                       ((CMat::Identity(t.m, t.m) - thj * thi.adjoint()) * defects[i]))(0, 0);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

struct FactorableReport {
    std::vector<double> multiplier_norms; // per coordinate, on the represented degrees
    double cond1_min = 0.0;  // min_i min eig(||M_i||^2 X - T_i X T_i*)
    double cond2_min = 0.0;  // min eig(X - P_T(X))
    std::vector<double> cond3_profile; // ||S_N(X) - X||
    double cond3_final = 0.0;
    bool pass1 = false, pass2 = false, pass3 = false;
};

// Three-part positivity/convergence test for hereditary factorability of a
// PSD matrix X against the tuple T and the kernel coefficients.
inline FactorableReport factorable_check(const CMat& X, const OperatorTuple& t,
                                         const BallKernel& K, double tol = 1e-8) {
    if (X.rows() != t.m || X.cols() != t.m)
        throw validation_error("factorable_check: X must act on the tuple space");
    PowerTable P(t, K.N_op);
    FactorableReport rep;
    for (int i = 0; i < K.d; ++i) {
        double sup = 0.0;
        for (int n = 0; n < K.N_op; ++n)
            sup = std::max(sup, std::sqrt(rat_to_double(K.a[static_cast<std::size_t>(n)] /
                                                        K.a[static_cast<std::size_t>(n + 1)]) *
                                          (n + 1)));
        rep.multiplier_norms.push_back(sup);
    }
    rep.cond1_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K.d; ++i) {
        const double nm = rep.multiplier_norms[static_cast<std::size_t>(i)];
        const CMat G = nm * nm * X - t.T[static_cast<std::size_t>(i)] * X *
                                         t.T[static_cast<std::size_t>(i)].adjoint();
        Eigen::SelfAdjointEigenSolver<CMat> es(balldetail::hermitize(G));
        rep.cond1_min = std::min(rep.cond1_min, es.eigenvalues().minCoeff());
    }
    CMat PX = CMat::Zero(t.m, t.m);
    for (int n = 1; n <= K.N_op; ++n) {
        if (K.b[static_cast<std::size_t>(n)] == 0) continue;
        for (const auto& beta : balldetail::multi_indices(K.d, n)) {
            const CMat& Tb = P.at(beta);
            PX += rat_to_double(K.b[static_cast<std::size_t>(n)] /
                                balldetail::multi_factorial(beta)) *
                  (Tb * X * Tb.adjoint());
        }
    }
    const CMat Y = X - PX;
    Eigen::SelfAdjointEigenSolver<CMat> es2(balldetail::hermitize(Y));
    rep.cond2_min = es2.eigenvalues().minCoeff();
    CMat S = CMat::Zero(t.m, t.m);
    for (int n = 0; n <= K.N_op; ++n) {
        for (const auto& beta : balldetail::multi_indices(K.d, n)) {
            const CMat& Tb = P.at(beta);
            S += K.a_ratio_double(n, balldetail::multi_factorial(beta)) * (Tb * Y * Tb.adjoint());
        }
        rep.cond3_profile.push_back(balldetail::op_norm(S - X));
    }
    rep.cond3_final = rep.cond3_profile.back();
    rep.pass1 = rep.cond1_min >= -tol;
    rep.pass2 = rep.cond2_min >= -tol;
    rep.pass3 = rep.cond3_final <= tol;
    return rep;
}

struct BTReport {
    enum class Verdict { contraction, obstruction, inconclusive };
    Verdict verdict = Verdict::inconclusive;
    double min_eig = 0.0;
    int kernel_dim = 0;
    int guard_dim = 0;
    double isometry_defect = 0.0;
};

/*
 * Compression test on ker V_T^*: builds B_i = P_ker (M_i tensor I)|_ker and
 * evaluates the defect form I - sum_n b_n sum_beta B^beta B^{*beta} / beta! on
 * vectors supported in degrees <= N_op - max{n : b_n != 0} (guard band, so the
 * truncated compression agrees with the untruncated one on the test space).
 * A definite negative eigenvalue certifies that no transfer-function
 * realization against this kernel exists for the compressed tuple.
 */
inline BTReport build_BT_and_test(const OperatorTuple& t, const BallKernel& K,
                                  const DefectPackage& pkg,
                                  std::optional<int> guard_override = std::nullopt,
                                  double tol_pass = 1e-7, double tol_fail = 1e-3) {
    IsometryPackage iso = build_V(t, K, pkg);
    BTReport rep;
    rep.isometry_defect = iso.isometry_defect;
    if (iso.isometry_defect > 1e-8)
        throw validation_error("build_BT_and_test requires a pure tuple (V must be an isometry)");
    const int rd = std::max(iso.rank_delta, 1);
    const Eigen::Index dim = static_cast<Eigen::Index>(iso.index.size()) * rd;
    const CMat Pker = CMat::Identity(dim, dim) - iso.V * iso.V.adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> es(balldetail::hermitize(Pker));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 0.5) keep.push_back(i);
    CMat Q(dim, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
        Q.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[static_cast<std::size_t>(k)]);
    rep.kernel_dim = static_cast<int>(Q.cols());
    if (rep.kernel_dim == 0) {
        rep.verdict = BTReport::Verdict::inconclusive;
        return rep;
    }
    const auto pos = balldetail::index_positions(iso.index);
    std::vector<CMat> B;
    for (int i = 0; i < K.d; ++i) {
        const CMat Mi = balldetail::coordinate_mult(K, iso.index, pos, i, rd);
        B.push_back(Q.adjoint() * Mi * Q);
    }
    OperatorTuple bt;
    bt.d = K.d;
    bt.m = rep.kernel_dim;
    bt.T = std::move(B);
    const int nb = K.max_b_degree();
    const int guard_deg = K.N_op - guard_override.value_or(nb);
    // guarded subspace: ker V* vectors supported in degrees <= guard_deg,
    // i.e. the null space of (rows above guard_deg) applied to Q
    std::vector<Eigen::Index> high_rows;
    for (std::size_t r = 0; r < iso.index.size(); ++r)
        if (balldetail::multi_degree(iso.index[r]) > guard_deg)
            for (int k = 0; k < rd; ++k)
                high_rows.push_back(static_cast<Eigen::Index>(r) * rd + k);
    CMat H(static_cast<Eigen::Index>(high_rows.size()), Q.cols());
    for (std::size_t r = 0; r < high_rows.size(); ++r)
        H.row(static_cast<Eigen::Index>(r)) = Q.row(high_rows[r]);
    CMat Cg;
    if (high_rows.empty()) {
        Cg = CMat::Identity(Q.cols(), Q.cols());
    } else {
        Eigen::JacobiSVD<CMat> svd(H, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > 1e-10) ++rank;
        Cg = svd.matrixV().rightCols(svd.matrixV().cols() - rank);
    }
    rep.guard_dim = static_cast<int>(Cg.cols());
    if (rep.guard_dim == 0) {
        rep.verdict = BTReport::Verdict::inconclusive;
        return rep;
    }
    PowerTable BP(bt, nb);
    CMat D = CMat::Identity(rep.kernel_dim, rep.kernel_dim);
    for (int n = 1; n <= nb; ++n) {
        if (K.b[static_cast<std::size_t>(n)] == 0) continue;
        for (const auto& beta : balldetail::multi_indices(K.d, n)) {
            const CMat& Bb = BP.at(beta);
            D -= rat_to_double(K.b[static_cast<std::size_t>(n)] /
                               balldetail::multi_factorial(beta)) *
                 (Bb * Bb.adjoint());
        }
    }
    const CMat G = Cg.adjoint() * D * Cg;
    Eigen::SelfAdjointEigenSolver<CMat> ge(balldetail::hermitize(G));
    rep.min_eig = ge.eigenvalues().minCoeff();
    if (rep.min_eig >= -tol_pass)
        rep.verdict = BTReport::Verdict::contraction;
    else if (rep.min_eig <= -tol_fail)
        rep.verdict = BTReport::Verdict::obstruction;
    else
        rep.verdict = BTReport::Verdict::inconclusive;
    return rep;
}

// Tuple of coordinate multiplications compressed to polynomials of degree <= N
// (tensored with C^fibre): weighted shifts, weights sqrt(a_n/a_{n+1}) sqrt(beta_i + 1).
inline OperatorTuple multiplication_tuple(const BallKernel& K, int N, int fibre = 1) {
    if (N > K.N_op) throw validation_error("multiplication_tuple: N exceeds the kernel cutoff");
    const auto index = balldetail::all_indices(K.d, N);
    const auto pos = balldetail::index_positions(index);
    std::vector<CMat> mats;
    for (int i = 0; i < K.d; ++i)
        mats.push_back(balldetail::coordinate_mult(K, index, pos, i, fibre));
    return OperatorTuple::from_matrices(std::move(mats));
}

inline OperatorTuple model_compression(const BallKernel& K, int N) {
    return multiplication_tuple(K, N, 1);
}

// Deviation of the defect from the vacuum projection, exact zero in theory
// for every compression of the coordinate model.
inline double vacuum_defect_deviation(const BallKernel& K, int N, const DefectPackage& pkg) {
    const auto index = balldetail::all_indices(K.d, N);
    CMat E0 = CMat::Zero(static_cast<Eigen::Index>(index.size()),
                         static_cast<Eigen::Index>(index.size()));
    for (std::size_t i = 0; i < index.size(); ++i)
        if (balldetail::multi_degree(index[i]) == 0)
            E0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    return (pkg.defect2 - E0).cwiseAbs().maxCoeff();
}

struct CoincidenceReport {
    bool dims_ok = false;
    double residual = std::numeric_limits<double>::infinity();
    bool coincide = false;
    bool heuristic = true; // alternating unitary fits are not certificates
    int iterations = 0;
};

// Searches unitaries (tau_range, tau_dom) with
// tau_range * theta1(z_k) ~= theta2(z_k) * tau_dom via alternating orthogonal
// Procrustes fits; a small residual is evidence of coincidence, never proof.
inline CoincidenceReport coincidence_check(const std::vector<CMat>& theta1,
                                           const std::vector<CMat>& theta2,
                                           double tol = 1e-6, int max_iter = 300) {
    CoincidenceReport rep;
    if (theta1.empty() || theta1.size() != theta2.size()) return rep;
    const Eigen::Index p = theta1[0].rows(), q = theta1[0].cols();
    for (const CMat& M : theta1)
        if (M.rows() != p || M.cols() != q) return rep;
    for (const CMat& M : theta2)
        if (M.rows() != p || M.cols() != q) return rep;
    rep.dims_ok = true;
    auto polar_unitary = [](const CMat& M) {
        Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
        return CMat(svd.matrixV() * svd.matrixU().adjoint());
    };
    CMat tau_dom = CMat::Identity(q, q);
    CMat tau_range = CMat::Identity(p, p);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        // optimal range rotation given tau_dom
        CMat Mr = CMat::Zero(p, p);
        for (std::size_t k = 0; k < theta1.size(); ++k)
            Mr += theta1[k] * (theta2[k] * tau_dom).adjoint();
        tau_range = polar_unitary(Mr);
        // optimal domain rotation given tau_range
        CMat Md = CMat::Zero(q, q);
        for (std::size_t k = 0; k < theta1.size(); ++k)
            Md += (tau_range * theta1[k]).adjoint() * theta2[k];
        tau_dom = polar_unitary(Md);
        double res = 0.0;
        for (std::size_t k = 0; k < theta1.size(); ++k)
            res = std::max(res, (tau_range * theta1[k] - theta2[k] * tau_dom).norm());
        rep.residual = res;
        rep.iterations = it + 1;
        if (std::abs(prev - res) < 1e-14) break;
        prev = res;
    }
    rep.coincide = rep.residual <= tol;
    return rep;
}

} // namespace cnplab
