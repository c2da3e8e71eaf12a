#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cnplab/ball.hpp"
#include "cnplab/radial.hpp"

namespace cnplab {

using Json = nlohmann::ordered_json;

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open input file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw validation_error("JSON parse failure in " + path + ": " + e.what());
    }
    return j;
}

inline Rat json_rat(const Json& j, const std::string& what) {
    if (j.is_string()) return rat_from_string(j.get<std::string>());
    if (j.is_number_integer()) return Rat(j.get<long>());
    throw validation_error(what + ": rationals must be \"p/q\" strings or integers");
}

// Signature arrays may be padded with zeros ([2,1,0]) or trimmed ([2,1]).
inline Partition json_signature(const Json& j, int r, const std::string& what) {
    if (!j.is_array()) throw validation_error(what + ": signature must be an integer array");
    std::vector<int> parts;
    for (const auto& e : j) {
        if (!e.is_number_integer()) throw validation_error(what + ": signature entries must be integers");
        parts.push_back(e.get<int>());
    }
    if (static_cast<int>(parts.size()) > r)
        throw validation_error(what + ": signature longer than the rank");
    if (!is_weakly_decreasing(parts))
        throw validation_error(what + ": signature must be weakly decreasing and nonnegative");
    return trim(parts);
}

// --- emission -------------------------------------------------------------

inline Json sig_json(const Partition& s, int r) {
    Json arr = Json::array();
    for (int i = 0; i < r; ++i)
        arr.push_back(i < static_cast<int>(s.size()) ? s[static_cast<std::size_t>(i)] : 0);
    return arr;
}

inline std::string sig_text(const Partition& s, int r) {
    std::string out = "(";
    for (int i = 0; i < r; ++i) {
        if (i) out += ",";
        out += std::to_string(i < static_cast<int>(s.size()) ? s[static_cast<std::size_t>(i)] : 0);
    }
    return out + ")";
}

inline std::string sig_csv(const Partition& s, int r) {
    std::string out;
    for (int i = 0; i < r; ++i) {
        if (i) out += " ";
        out += std::to_string(i < static_cast<int>(s.size()) ? s[static_cast<std::size_t>(i)] : 0);
    }
    return out;
}

inline Json coeff_table_json(const CoeffTable& table, int r) {
    Json arr = Json::array();
    for (const auto& [s, v] : table)
        arr.push_back(Json{{"s", sig_json(s, r)}, {"value", rat_to_string(v)}});
    return arr;
}

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::string(buf);
}

// --- kernel specs ----------------------------------------------------------

struct KernelSpec {
    CartanParams params{1, 0, 0};
    int max_degree = 0;
    std::string type; // pochhammer | table | rank1-power-series | from-L
    Rat nu;                  // pochhammer
    CoeffTable table;        // table (K-basis a_s)
    std::vector<Rat> series; // rank1-power-series (power-basis c_n)
    CoeffTable from_l;       // from-L (c_s, no constant term)
};

inline KernelSpec parse_kernel_spec(const Json& j) {
    KernelSpec spec;
    if (!j.contains("domain") || !j.contains("maxDegree") || !j.contains("coefficients"))
        throw validation_error("kernel spec needs domain, maxDegree, coefficients");
    const Json& dom = j.at("domain");
    if (!dom.contains("r") || !dom.contains("a") || !dom.contains("b"))
        throw validation_error("kernel spec domain needs integer fields r, a, b");
    spec.params = CartanParams(dom.at("r").get<int>(), dom.at("a").get<int>(), dom.at("b").get<int>());
    spec.max_degree = j.at("maxDegree").get<int>();
    if (spec.max_degree < 0) throw validation_error("maxDegree must be >= 0");
    const Json& co = j.at("coefficients");
    if (!co.contains("type")) throw validation_error("coefficients need a type");
    spec.type = co.at("type").get<std::string>();
    if (spec.type == "pochhammer") {
        spec.nu = json_rat(co.at("nu"), "pochhammer nu");
    } else if (spec.type == "table") {
        for (const auto& e : co.at("entries")) {
            Partition s = json_signature(e.at("s"), spec.params.r, "table entry");
            spec.table[s] = json_rat(e.at("value"), "table entry");
        }
    } else if (spec.type == "rank1-power-series") {
        if (spec.params.r != 1)
            throw validation_error("rank1-power-series requires r = 1");
        for (const auto& e : co.at("values")) spec.series.push_back(json_rat(e, "power series"));
    } else if (spec.type == "from-L") {
        for (const auto& e : co.at("entries")) {
            Partition s = json_signature(e.at("s"), spec.params.r, "from-L entry");
            spec.from_l[s] = json_rat(e.at("value"), "from-L entry");
        }
    } else {
        throw validation_error("unknown coefficient type: " + spec.type);
    }
    return spec;
}

struct RealizedKernel {
    RadialKernel kernel;
    std::optional<FromLResult> from_l;
};

// Build the coefficient table at cutoff N (defaults to the spec's maxDegree).
inline RealizedKernel realize_kernel(const KernelSpec& spec, RadialAlgebra& alg,
                                     std::optional<int> degree_override = std::nullopt) {
    const int N = degree_override.value_or(spec.max_degree);
    RealizedKernel out;
    if (spec.type == "pochhammer") {
        (void)alg;
        out.kernel = bergman_coefficients(spec.params, spec.nu, N);
    } else if (spec.type == "table") {
        CoeffTable t = spec.table;
        if (t.find(Partition{}) == t.end()) t.emplace(Partition{}, Rat(1));
        for (const auto& [s, v] : spec.table)
            if (degree_of(s) > N)
                throw validation_error("table entry beyond maxDegree");
        out.kernel = RadialKernel::from_table(spec.params, N, std::move(t), false);
    } else if (spec.type == "rank1-power-series") {
        if (static_cast<int>(spec.series.size()) < N + 1)
            throw validation_error("power series shorter than the requested degree");
        if (spec.series[0] != 1) throw validation_error("power series must start at 1");
        CoeffTable t;
        for (int n = 0; n <= N; ++n) {
            const Rat a_n = spec.series[static_cast<std::size_t>(n)] *
                            factorial_rat(static_cast<unsigned long>(n));
            if (a_n != 0) t[n == 0 ? Partition{} : Partition{n}] = a_n;
        }
        out.kernel = RadialKernel::from_table(spec.params, N, std::move(t), false);
    } else if (spec.type == "from-L") {
        FromLResult res = build_from_L(alg, spec.from_l, N);
        out.kernel = res.K;
        out.from_l = std::move(res);
    } else {
        throw validation_error("unknown coefficient type: " + spec.type);
    }
    return out;
}

// Rank-1 coefficient sequence a_0..a_N for the ball module.
inline std::vector<Rat> ball_sequence(const KernelSpec& spec, int N) {
    if (spec.params.r != 1)
        throw validation_error("operator-side kernels must have rank 1");
    RadialAlgebra alg(spec.params, N);
    RealizedKernel rk = realize_kernel(spec, alg, N);
    std::vector<Rat> a;
    for (int n = 0; n <= N; ++n)
        a.push_back(rk.kernel.a_of(n == 0 ? Partition{} : Partition{n}));
    return a;
}

// --- operator fixtures ------------------------------------------------------

inline OperatorTuple parse_operator_fixture(const Json& j, double comm_tol = 1e-10) {
    if (!j.contains("d") || !j.contains("dim") || !j.contains("matrices"))
        throw validation_error("operator fixture needs d, dim, matrices");
    const int d = j.at("d").get<int>();
    const int m = j.at("dim").get<int>();
    if (d < 1 || m < 1) throw validation_error("operator fixture: d and dim must be >= 1");
    const Json& mats = j.at("matrices");
    if (static_cast<int>(mats.size()) != d)
        throw validation_error("operator fixture: expected d matrices");
    std::vector<CMat> T;
    for (const auto& mj : mats) {
        if (static_cast<int>(mj.size()) != m)
            throw validation_error("operator fixture: matrix row count mismatch");
        CMat M(m, m);
        for (int r = 0; r < m; ++r) {
            const Json& row = mj.at(static_cast<std::size_t>(r));
            if (static_cast<int>(row.size()) != m)
                throw validation_error("operator fixture: matrix column count mismatch");
            for (int c = 0; c < m; ++c) {
                const Json& cell = row.at(static_cast<std::size_t>(c));
                if (!cell.is_array() || cell.size() != 2)
                    throw validation_error("operator fixture: entries must be [re, im]");
                M(r, c) = Cplx(cell.at(0).get<double>(), cell.at(1).get<double>());
            }
        }
        T.push_back(std::move(M));
    }
    return OperatorTuple::from_matrices(std::move(T), comm_tol);
}

// --- structure-constant disk cache ------------------------------------------

inline std::string structure_cache_path(const std::string& dir, const CartanParams& p) {
    return dir + "/structure_r" + std::to_string(p.r) + "_a" + std::to_string(p.a) + ".csv";
}

inline std::string structure_cache_header(const CartanParams& p) {
    return "# cnplab-structure-v1 r=" + std::to_string(p.r) + " a=" + std::to_string(p.a);
}

inline Partition parse_sig_csv(const std::string& field) {
    std::istringstream in(field);
    std::vector<int> parts;
    int x;
    while (in >> x) parts.push_back(x);
    if (!is_weakly_decreasing(parts))
        throw validation_error("cache row: malformed signature");
    return trim(parts);
}

// Best-effort load; a missing or version-mismatched file is ignored.
inline void load_structure_cache(RadialAlgebra& alg, const std::string& dir) {
    const std::string path = structure_cache_path(dir, alg.params());
    std::ifstream in(path);
    if (!in) return;
    std::string line;
    if (!std::getline(in, line) || line != structure_cache_header(alg.params())) return;
    if (!std::getline(in, line) || line != "s,t,p,c") return;
    std::vector<std::tuple<Partition, Partition, Partition, Rat>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string fs, ft, fp, fc;
        if (!std::getline(ls, fs, ',') || !std::getline(ls, ft, ',') ||
            !std::getline(ls, fp, ',') || !std::getline(ls, fc))
            return; // corrupt file: adopt nothing
        try {
            rows.emplace_back(parse_sig_csv(fs), parse_sig_csv(ft), parse_sig_csv(fp),
                              rat_from_string(fc));
        } catch (const validation_error&) {
            return;
        }
    }
    alg.adopt_structure_rows(rows);
}

// Atomic rewrite (temp file + rename) of everything currently cached.
inline void save_structure_cache(RadialAlgebra& alg, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    const std::string path = structure_cache_path(dir, alg.params());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) return;
        out << structure_cache_header(alg.params()) << "\n";
        out << "s,t,p,c\n";
        const int r = alg.params().r;
        for (const auto& [s, t, p, c] : alg.structure_rows())
            out << sig_csv(s, r) << "," << sig_csv(t, r) << "," << sig_csv(p, r) << ","
                << rat_to_string(c) << "\n";
    }
    fs::rename(tmp, path, ec);
    if (ec) fs::remove(tmp, ec);
}

} // namespace cnplab
