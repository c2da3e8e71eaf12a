#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cnplab/io.hpp"

namespace {

using namespace cnplab;

constexpr int kExitOk = 0;
constexpr int kExitNegativeVerdict = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDegreeCap = 3;
constexpr int kExitNoncommuting = 4;
constexpr int kExitResidual = 5;
constexpr int kExitNoCharFn = 6;
constexpr int kExitInconclusive = 7;

// Deterministic cross-run sampling; the report bytes must depend only on the
// config and the seed.
struct SplitMix64 {
    std::uint64_t s;
    explicit SplitMix64(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double sym() { return 2.0 * uniform() - 1.0; }
};

std::vector<Cplx> sample_point(SplitMix64& rng, int d, double radius) {
    std::vector<Cplx> w;
    const double per = radius / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i) {
        const double rho = per * std::sqrt(rng.uniform());
        const double phi = 2.0 * 3.14159265358979323846 * rng.uniform();
        w.emplace_back(rho * std::cos(phi), rho * std::sin(phi));
    }
    return w;
}

CVec sample_vector(SplitMix64& rng, int m) {
    CVec v(m);
    for (int i = 0; i < m; ++i) v(i) = Cplx(rng.sym(), rng.sym());
    const double n = v.norm();
    if (n < 1e-12) {
        v.setZero();
        v(0) = 1.0;
        return v;
    }
    return v / n;
}

void write_out(const std::string& text, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(output_path, std::ios::binary);
    if (!out) throw validation_error("cannot open output file: " + output_path);
    out << text;
}

std::optional<std::string> cache_dir() {
    const char* dir = std::getenv("CNPLAB_CACHE_DIR");
    if (dir == nullptr || *dir == '\0') return std::nullopt;
    return std::string(dir);
}

std::vector<Rat> parse_rat_list(const std::string& csv) {
    std::vector<Rat> out;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(rat_from_string(tok));
    }
    return out;
}

struct CommonOpts {
    std::string format = "json";
    std::string output;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--format", c.format, "Report format: json, csv, or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    cmd->add_option("--output", c.output, "Write the report to this file instead of stdout");
}

// ---------------------------------------------------------------------------
// analyze-kernel

int run_analyze(const std::string& input, int max_degree_override, bool emit_a_table,
                const CommonOpts& common) {
    KernelSpec spec = parse_kernel_spec(load_json_file(input));
    const int N = max_degree_override > 0 ? max_degree_override : spec.max_degree;
    if (N < 1) throw validation_error("maxDegree must be >= 1");
    RadialAlgebra alg(spec.params, N);
    if (auto dir = cache_dir()) load_structure_cache(alg, *dir);

    RealizedKernel rk = realize_kernel(spec, alg, N);
    InverseTable inv = invert_kernel(alg, rk.kernel);
    CnpReport cnp = cnp_test(rk.kernel, inv);
    std::optional<KaluzaReport> kal;
    if (rk.kernel.strictly_positive) kal = kaluza_test(alg, rk.kernel);
    std::optional<BoundaryReport> boundary;
    if (spec.type == "from-L") boundary = boundary_norm(alg, spec.from_l, N);

    const int r = spec.params.r;
    Json rep;
    rep["command"] = "analyze-kernel";
    rep["domain"] = {{"r", r}, {"a", spec.params.a}, {"b", spec.params.b}};
    rep["certifiedDegree"] = N;
    rep["kernel"] = {{"type", spec.type}, {"strictlyPositive", rk.kernel.strictly_positive}};
    CoeffTable btab;
    for (const auto& [s, v] : inv.bhat)
        if (!s.empty() && v != 0) btab[s] = -v;
    rep["bTable"] = coeff_table_json(btab, r);
    Json cj;
    cj["verdict"] = cnp.cnp ? "CNP" : "not-CNP";
    cj["certifiedDegree"] = cnp.certified_degree;
    Json wit = Json::array();
    for (const auto& s : cnp.offenders) wit.push_back(sig_json(s.key(), r));
    cj["witnesses"] = wit;
    if (auto fw = cnp.first_witness()) cj["firstWitness"] = sig_json(fw->key(), r);
    rep["cnp"] = cj;
    if (kal) {
        Json kj;
        kj["verdict"] = kal->pass ? "pass" : "fail";
        kj["vacuous"] = kal->vacuous;
        kj["certifiedDegree"] = kal->certified_degree;
        if (kal->witness)
            kj["witness"] = {{"s0", sig_json(kal->witness->first.key(), r)},
                             {"q", sig_json(kal->witness->second.key(), r)}};
        rep["kaluza"] = kj;
    } else {
        rep["kaluza"] = {{"verdict", "skipped"},
                         {"reason", "requires strictly positive coefficients"}};
    }
    Json warnings = Json::array();
    if (boundary) {
        Json bj;
        bj["sum"] = rat_to_string(boundary->total);
        bj["leOne"] = !(boundary->total > 1);
        bj["unboundedAtCutoff"] = boundary->unbounded_at_cutoff;
        rep["boundary"] = bj;
        if (boundary->total > 1)
            warnings.push_back("boundary sum exceeds 1 at the cutoff; the sufficient "
                               "condition does not apply, the verdict below still stands");
    }
    rep["warnings"] = warnings;
    if (emit_a_table) {
        if (!rk.kernel.strictly_positive) {
            rep["aTable"] = {{"skipped", "requires strictly positive coefficients"}};
        } else {
            Json at = Json::array();
            for (int k = 1; k <= N; ++k)
                for (const auto& s : enumerate_signatures(r, k))
                    for (int kq = 1; kq <= k; ++kq)
                        for (const auto& q : enumerate_signatures(r, kq))
                            at.push_back(
                                Json{{"s", sig_json(s.key(), r)},
                                     {"q", sig_json(q.key(), r)},
                                     {"value", rat_to_string(
                                                   A_coefficient(alg, rk.kernel, s, q))}});
            rep["aTable"] = at;
        }
    }

    std::string out;
    if (common.format == "json") {
        out = rep.dump(2) + "\n";
    } else if (common.format == "text") {
        std::ostringstream os;
        os << "domain r=" << r << " a=" << spec.params.a << " b=" << spec.params.b << "\n";
        os << "CNP up to degree " << cnp.certified_degree << ": " << (cnp.cnp ? "yes" : "no");
        if (auto fw = cnp.first_witness()) os << "; witness " << sig_text(fw->key(), r);
        os << "\n";
        if (kal) {
            os << "Kaluza inequality up to degree " << kal->certified_degree << ": "
               << (kal->pass ? (kal->vacuous ? "pass (vacuous)" : "pass") : "fail");
            if (kal->witness)
                os << "; witness s0=" << sig_text(kal->witness->first.key(), r)
                   << " q=" << sig_text(kal->witness->second.key(), r);
            os << "\n";
        } else {
            os << "Kaluza inequality: skipped (requires strictly positive coefficients)\n";
        }
        if (boundary) {
            os << "boundary sum at degree " << N << ": " << rat_to_string(boundary->total)
               << (boundary->total > 1 ? " (warning: exceeds 1)" : " (<= 1)") << "\n";
        }
        for (const auto& w : warnings) os << "warning: " << w.get<std::string>() << "\n";
        out = os.str();
    } else {
        throw validation_error("analyze-kernel supports json or text output");
    }
    write_out(out, common.output);
    if (auto dir = cache_dir()) save_structure_cache(alg, *dir);
    return cnp.cnp ? kExitOk : kExitNegativeVerdict;
}

// ---------------------------------------------------------------------------
// bergman-sweep

int run_sweep(int r, int ma, int mb, const std::string& nu_csv, int N, const CommonOpts& common) {
    if (N < 1) throw validation_error("max degree must be >= 1");
    CartanParams params(r, ma, mb);
    RadialAlgebra alg(params, N);
    if (auto dir = cache_dir()) load_structure_cache(alg, *dir);
    const std::vector<Rat> nus = parse_rat_list(nu_csv);
    const auto rows = bergman_cnp_sweep(alg, nus, N);

    std::string out;
    if (common.format == "csv") {
        std::ostringstream os;
        os << "nu,verdict,witness,degree\n";
        for (const auto& e : rows) {
            os << rat_to_string(e.nu) << "," << (e.cnp ? "CNP" : "not-CNP") << ",";
            if (e.witness) os << sig_csv(e.witness->key(), r);
            os << "," << e.certified_degree << "\n";
        }
        out = os.str();
    } else if (common.format == "json") {
        Json rep;
        rep["command"] = "bergman-sweep";
        rep["domain"] = {{"r", r}, {"a", ma}, {"b", mb}};
        rep["certifiedDegree"] = N;
        Json arr = Json::array();
        for (const auto& e : rows) {
            Json row;
            row["nu"] = rat_to_string(e.nu);
            row["verdict"] = e.cnp ? "CNP" : "not-CNP";
            row["strictlyPositive"] = e.strictly_positive;
            row["certifiedDegree"] = e.certified_degree;
            if (e.witness) row["witness"] = sig_json(e.witness->key(), r);
            arr.push_back(row);
        }
        rep["entries"] = arr;
        out = rep.dump(2) + "\n";
    } else {
        std::ostringstream os;
        for (const auto& e : rows) {
            os << "nu=" << rat_to_string(e.nu) << ": "
               << (e.cnp ? "CNP" : "not-CNP") << " up to degree " << e.certified_degree;
            if (e.witness) os << "; witness " << sig_text(e.witness->key(), r);
            os << "\n";
        }
        out = os.str();
    }
    write_out(out, common.output);
    if (auto dir = cache_dir()) save_structure_cache(alg, *dir);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// charfn

struct CharfnTols {
    double identity = 1e-7;
    double gram = 1e-7;
    double contraction = 1e-8;
    double psd = 1e-10;
    double commutator = 1e-10;
    double kw_agree = 1e-8;
    double bt_pass = 1e-7;
    double bt_fail = 1e-3;
};

int run_charfn(const std::string& fixture_path, const std::string& kernel_path, int n_op,
               int n_bt, int n_samples, double radius, std::uint64_t seed,
               const CharfnTols& tol, const CommonOpts& common) {
    if (n_op < 1 || n_bt < 1) throw validation_error("truncation orders must be >= 1");
    OperatorTuple T = parse_operator_fixture(load_json_file(fixture_path), tol.commutator);
    KernelSpec kspec = parse_kernel_spec(load_json_file(kernel_path));
    BallKernel K = BallKernel::from_k_basis(T.d, n_op, ball_sequence(kspec, n_op));

    Json rep;
    rep["command"] = "charfn";
    rep["d"] = T.d;
    rep["dim"] = T.m;
    rep["kernel"] = {{"type", kspec.type}, {"truncation", n_op}};
    std::ostringstream text;

    DefectPackage pkg = defect_operator(T, K, tol.psd);
    rep["defect"] = {{"minEig", pkg.min_eig},
                     {"contraction", pkg.contraction},
                     {"tailBlock", pkg.tail_block},
                     {"tailDecaying", pkg.tail_ok},
                     {"truncation", n_op}};
    text << "contraction up to degree " << n_op << ": " << (pkg.contraction ? "yes" : "no")
         << " (min defect eigenvalue " << fmt_double(pkg.min_eig) << ")\n";
    if (!pkg.contraction) {
        rep["verdict"] = "not a 1/K-contraction";
        text << "verdict: not a 1/K-contraction\n";
        write_out(common.format == "text" ? text.str() : rep.dump(2) + "\n", common.output);
        return kExitNegativeVerdict;
    }

    PurityReport pur = purity_check(T, K, pkg);
    const char* pv = pur.verdict == PurityReport::Verdict::pure          ? "pure"
                     : pur.verdict == PurityReport::Verdict::not_pure    ? "not-pure"
                                                                         : "inconclusive";
    rep["purity"] = {{"verdict", pv},
                     {"finalResidual", pur.final_residual},
                     {"bounded", pur.bounded},
                     {"truncation", n_op}};
    text << "purity up to degree " << n_op << ": " << pv << " (residual "
         << fmt_double(pur.final_residual) << ")\n";

    IsometryPackage iso = build_V(T, K, pkg);
    Json ij;
    ij["isometryDefect"] = iso.isometry_defect;
    ij["conditionB"] = iso.condition_b;
    ij["rankDelta"] = iso.rank_delta;
    Json itw = Json::array();
    for (double v : iso.intertwining) itw.push_back(v);
    ij["intertwining"] = itw;
    rep["dilation"] = ij;
    text << "dilation at degree " << n_op << ": ||V*V - I|| = "
         << fmt_double(iso.isometry_defect) << ", condition (B) constant = "
         << fmt_double(iso.condition_b) << "\n";

    SplitMix64 rng(seed);
    std::vector<std::vector<Cplx>> pts;
    for (int i = 0; i < n_samples; ++i) pts.push_back(sample_point(rng, T.d, radius));

    double kw_agree = 0.0, kw_guard = 0.0, kw_tail = 0.0;
    for (const auto& w : pts) {
        KwReport kw = Kw_calculus(T, K, w);
        if (!kw.guard_ok)
            throw validation_error("functional calculus: inverse route requires ||A|| < 1");
        kw_agree = std::max(kw_agree, kw.agreement);
        kw_guard = std::max(kw_guard, kw.guard_norm);
        kw_tail = std::max(kw_tail, kw_tail_estimate(K, w));
    }
    rep["functionalCalculus"] = {{"samples", n_samples},
                                 {"radius", radius},
                                 {"maxAgreementResidual", kw_agree},
                                 {"maxGuardNorm", kw_guard},
                                 {"maxTailEstimate", kw_tail},
                                 {"truncation", n_op}};
    text << "functional calculus at degree " << n_op << ": series/inverse agreement "
         << fmt_double(kw_agree) << ", tail estimate " << fmt_double(kw_tail) << "\n";

    bool residual_fail = kw_agree > tol.kw_agree;
    bool theta_built = false;
    if (K.cnp_truncated()) {
        theta_built = true;
        CharFn theta(T, K, pkg);
        double theta_norm = 0.0;
        bool theta_ok = true;
        for (const auto& z : pts) {
            auto v = theta.eval(z, tol.contraction);
            theta_norm = std::max(theta_norm, v.norm);
            theta_ok = theta_ok && v.contraction_ok;
        }
        double ident = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            ident = std::max(ident, verify_identity_lemma(T, K, pkg, theta, pts[i], pts[i]));
            ident = std::max(ident, verify_identity_lemma(T, K, pkg, theta, pts[i],
                                                          pts[(i + 1) % pts.size()]));
        }
        std::vector<GramSample> gs;
        for (const auto& w : pts) gs.push_back({w, sample_vector(rng, T.m)});
        const double gram = verify_gram(T, K, pkg, iso, theta, gs, 1e-6);
        rep["charfn"] = {{"domainDim", theta.domain_dim()},
                         {"rangeDim", theta.range_dim()},
                         {"tdtResidual", theta.tdt_residual()},
                         {"maxNorm", theta_norm},
                         {"contraction", theta_ok},
                         {"identityResidual", ident},
                         {"gramResidual", gram},
                         {"truncation", n_op}};
        text << "characteristic function at degree " << n_op << ": max norm "
             << fmt_double(theta_norm) << ", identity residual " << fmt_double(ident)
             << ", gram residual " << fmt_double(gram) << "\n";
        residual_fail = residual_fail || ident > tol.identity || gram > tol.gram || !theta_ok ||
                        theta.tdt_residual() > 1e-9;
    } else {
        rep["charfn"] = {{"skipped", "reciprocal tail has negative coefficients"}};
        text << "characteristic function: skipped (reciprocal tail has negative "
                "coefficients)\n";
    }

    // Compression test on its own, smaller truncation; the guard band needs
    // room below the cutoff.
    std::string bt_verdict = "inconclusive";
    double bt_min = 0.0;
    int bt_guard = 0;
    std::string bt_note;
    if (pur.verdict == PurityReport::Verdict::pure) {
        try {
            BallKernel Kbt =
                n_bt == n_op ? K : BallKernel::from_k_basis(T.d, n_bt, ball_sequence(kspec, n_bt));
            DefectPackage pkg_bt = n_bt == n_op ? pkg : defect_operator(T, Kbt, tol.psd);
            BTReport bt = build_BT_and_test(T, Kbt, pkg_bt, std::nullopt, tol.bt_pass, tol.bt_fail);
            bt_min = bt.min_eig;
            bt_guard = bt.guard_dim;
            bt_verdict = bt.verdict == BTReport::Verdict::contraction    ? "contraction"
                         : bt.verdict == BTReport::Verdict::obstruction  ? "obstruction"
                                                                         : "inconclusive";
        } catch (const validation_error& e) {
            bt_note = e.what();
        }
    } else {
        bt_note = "requires a pure tuple at the compression truncation";
    }
    Json btj;
    btj["verdict"] = bt_verdict;
    btj["minEig"] = bt_min;
    btj["guardDim"] = bt_guard;
    btj["truncation"] = n_bt;
    if (!bt_note.empty()) btj["note"] = bt_note;
    rep["compression"] = btj;
    text << "kernel-of-dilation compression at degree " << n_bt << ": " << bt_verdict
         << " (min eigenvalue " << fmt_double(bt_min) << ")\n";

    std::string verdict;
    int code;
    if (bt_verdict == "obstruction") {
        verdict = "no characteristic function";
        code = kExitNoCharFn;
    } else if (residual_fail) {
        verdict = "identity residuals beyond tolerance";
        code = kExitResidual;
    } else if (pur.verdict != PurityReport::Verdict::pure) {
        verdict = "inconclusive at this truncation";
        code = kExitInconclusive;
    } else if (!theta_built) {
        // the compression test is the only signal left; a contraction verdict
        // at this truncation is necessary but not sufficient
        verdict = bt_verdict == "contraction"
                      ? "compression test passed; explicit construction unavailable "
                        "(negative reciprocal tail)"
                      : "inconclusive at this truncation";
        code = kExitInconclusive;
    } else {
        verdict = "verified";
        code = kExitOk;
    }
    rep["verdict"] = verdict;
    text << "verdict: " << verdict << "\n";

    if (common.format == "text") {
        write_out(text.str(), common.output);
    } else if (common.format == "json") {
        write_out(rep.dump(2) + "\n", common.output);
    } else {
        throw validation_error("charfn supports json or text output");
    }
    return code;
}

// ---------------------------------------------------------------------------
// dump-structure

int run_dump(int r, int ma, int mb, int N, const std::string& what, const CommonOpts& common) {
    if (N < 0) throw validation_error("max degree must be >= 0");
    CartanParams params(r, ma, mb);
    std::ostringstream os;
    if (what == "structure") {
        RadialAlgebra alg(params, N);
        if (auto dir = cache_dir()) load_structure_cache(alg, *dir);
        os << "s,t,p,c\n";
        for (int k = 2; k <= N; ++k) {
            for (int ds = 1; ds < k; ++ds) {
                for (const auto& s : enumerate_signatures(r, ds)) {
                    for (const auto& t : enumerate_signatures(r, k - ds)) {
                        if (canonical_less(t.key(), s.key())) continue; // unordered pairs once
                        for (const auto& [p, c] : alg.structure_constants(s.key(), t.key()))
                            os << sig_csv(s.key(), r) << "," << sig_csv(t.key(), r) << ","
                               << sig_csv(p, r) << "," << rat_to_string(c) << "\n";
                    }
                }
            }
        }
        if (auto dir = cache_dir()) save_structure_cache(alg, *dir);
    } else if (what == "jack") {
        const Rat alpha = (params.r >= 2 && params.a > 0) ? params.alpha() : Rat(1);
        JackBasis jb(r, alpha, N);
        os << "lambda,mu,coeff\n";
        for (int n = 0; n <= N; ++n)
            for (const auto& lam : enumerate_signatures(r, n))
                for (const auto& [mu, c] : jb.jack_P(lam.key()).expansion)
                    os << sig_csv(lam.key(), r) << "," << sig_csv(mu, r) << ","
                       << rat_to_string(c) << "\n";
    } else {
        throw validation_error("--what must be structure or jack");
    }
    if (common.format != "csv")
        throw validation_error("dump-structure emits CSV; use --format csv");
    write_out(os.str(), common.output);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// selftest

int run_selftest(const CommonOpts& common) {
    std::ostringstream os;
    bool ok = true;
    auto check = [&](const std::string& name, bool pass) {
        os << (pass ? "[PASS] " : "[FAIL] ") << name << "\n";
        ok = ok && pass;
    };

    // reciprocal-tail round trip at a sample domain
    {
        CartanParams p(2, 2, 0);
        RadialAlgebra alg(p, 4);
        bool pass = true;
        for (const Rat& nu : {Rat(2), rat(1, 2)}) {
            RadialKernel K = bergman_coefficients(p, nu, 4, false);
            InverseTable inv = invert_kernel(alg, K);
            for (int n = 1; n <= 4 && pass; ++n)
                for (const auto& s : enumerate_signatures(2, n))
                    if (inv.bhat_of(s.key()) != generalized_pochhammer(-nu, s, p.a)) pass = false;
        }
        check("power-of-determinant inversion round trip (r=2)", pass);
    }
    // rank-1 geometric kernel is CNP
    {
        CartanParams p(1, 0, 0);
        RadialAlgebra alg(p, 6);
        CoeffTable t;
        for (int n = 0; n <= 6; ++n)
            t[n == 0 ? Partition{} : Partition{n}] = factorial_rat(static_cast<unsigned>(n));
        RadialKernel K = RadialKernel::from_table(p, 6, std::move(t));
        check("geometric rank-1 kernel is CNP", cnp_test(K, invert_kernel(alg, K)).cnp);
    }
    // classical disc degeneration of the characteristic function
    {
        std::vector<CMat> mats(1, CMat::Zero(3, 3));
        mats[0](1, 0) = 0.7;
        mats[0](2, 1) = 0.4;
        OperatorTuple T = OperatorTuple::from_matrices(mats);
        std::vector<Rat> a;
        for (int n = 0; n <= 8; ++n) a.push_back(factorial_rat(static_cast<unsigned>(n)));
        BallKernel K = BallKernel::from_k_basis(1, 8, std::move(a));
        DefectPackage pkg = defect_operator(T, K);
        CharFn theta(T, K, pkg);
        const Cplx z(0.3, 0.2);
        const CMat th = theta.eval({z}).full;
        const CMat D2 = CMat::Identity(3, 3) - T.T[0].adjoint() * T.T[0];
        const CMat Dstar2 = CMat::Identity(3, 3) - T.T[0] * T.T[0].adjoint();
        const CMat classical =
            -T.T[0] + balldetail::psd_sqrt(Dstar2, 1e-12).sqrt *
                          (CMat::Identity(3, 3) - z * T.T[0].adjoint()).inverse() * z *
                          balldetail::psd_sqrt(D2, 1e-12).sqrt;
        check("classical disc degeneration",
              (th - classical).cwiseAbs().maxCoeff() < 1e-10);
    }
    os << (ok ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
    write_out(os.str(), common.output);
    return ok ? kExitOk : kExitNegativeVerdict;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact complete Nevanlinna-Pick certification for invariant kernels and "
                 "numerical verification of reciprocal-kernel contraction models"};
    app.require_subcommand(1);

    // analyze-kernel
    auto* an = app.add_subcommand("analyze-kernel", "Invert a kernel spec and certify CNP");
    std::string an_input;
    int an_maxdeg = 0;
    bool an_atable = false;
    CommonOpts an_common;
    an->add_option("input", an_input, "Kernel spec JSON")->required();
    an->add_option("--max-degree", an_maxdeg, "Override the spec's degree cutoff");
    an->add_flag("--a-table", an_atable, "Include the ratio-coefficient table in the report");
    add_common(an, an_common);

    // bergman-sweep
    auto* sw = app.add_subcommand("bergman-sweep", "CNP verdicts across a weight grid");
    int sw_r = 2, sw_a = 2, sw_b = 0, sw_n = 6;
    std::string sw_nus;
    CommonOpts sw_common;
    sw->add_option("--rank", sw_r, "Domain rank r")->required();
    sw->add_option("--mult-a", sw_a, "Multiplicity a")->required();
    sw->add_option("--mult-b", sw_b, "Multiplicity b");
    sw->add_option("--nu", sw_nus, "Comma-separated weight list, e.g. 0,1/2,1,2");
    sw->add_option("--max-degree", sw_n, "Degree cutoff");
    add_common(sw, sw_common);

    // charfn
    auto* cf = app.add_subcommand("charfn", "Verify the transfer-function identities of a tuple");
    std::string cf_fixture, cf_kernel;
    int cf_nop = 22, cf_nbt = 6, cf_samples = 5;
    double cf_radius = 0.55;
    std::uint64_t cf_seed = 1;
    CharfnTols cf_tol;
    CommonOpts cf_common;
    cf->add_option("fixture", cf_fixture, "Operator fixture JSON")->required();
    cf->add_option("kernel", cf_kernel, "Rank-1 kernel spec JSON")->required();
    cf->add_option("--n-op", cf_nop, "Series truncation degree");
    cf->add_option("--n-bt", cf_nbt, "Compression-test truncation degree");
    cf->add_option("--samples", cf_samples, "Number of interior sample points");
    cf->add_option("--radius", cf_radius, "Sampling radius (< 1)");
    cf->add_option("--seed", cf_seed, "Sampling seed");
    cf->add_option("--tol-identity", cf_tol.identity, "Identity residual tolerance");
    cf->add_option("--tol-gram", cf_tol.gram, "Gram residual tolerance");
    cf->add_option("--tol-contraction", cf_tol.contraction, "Norm slack for ||theta|| <= 1");
    cf->add_option("--tol-psd", cf_tol.psd, "Defect clipping tolerance");
    cf->add_option("--tol-commutator", cf_tol.commutator, "Commutator tolerance");
    add_common(cf, cf_common);

    // dump-structure
    auto* du = app.add_subcommand("dump-structure", "CSV dump of structure constants");
    int du_r = 1, du_a = 2, du_b = 0, du_n = 4;
    std::string du_what = "structure";
    CommonOpts du_common;
    du_common.format = "csv";
    du->add_option("--rank", du_r, "Domain rank r")->required();
    du->add_option("--mult-a", du_a, "Multiplicity a");
    du->add_option("--mult-b", du_b, "Multiplicity b");
    du->add_option("--max-degree", du_n, "Dump pairs with |s|+|t| <= this degree");
    du->add_option("--what", du_what, "structure or jack")
        ->check(CLI::IsMember({"structure", "jack"}));
    add_common(du, du_common);

    // selftest
    auto* st = app.add_subcommand("selftest", "Run a small built-in verification battery");
    CommonOpts st_common;
    st_common.format = "text";
    add_common(st, st_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (an->parsed()) return run_analyze(an_input, an_maxdeg, an_atable, an_common);
        if (sw->parsed()) return run_sweep(sw_r, sw_a, sw_b, sw_nus, sw_n, sw_common);
        if (cf->parsed())
            return run_charfn(cf_fixture, cf_kernel, cf_nop, cf_nbt, cf_samples, cf_radius,
                              cf_seed, cf_tol, cf_common);
        if (du->parsed()) return run_dump(du_r, du_a, du_b, du_n, du_what, du_common);
        if (st->parsed()) return run_selftest(st_common);
    } catch (const degree_cap_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegreeCap;
    } catch (const noncommuting_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoncommuting;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
