#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heavytail/margins.hpp"
#include "heavytail/matrixlaw.hpp"
#include "heavytail/risksets.hpp"

namespace heavytail {

// A fully specified batch run: marginal law, matrix law, risk set, and the
// Monte Carlo knobs. Parsed from a JSON config file.
struct Scenario {
    MarginalModel margins;
    MatrixLaw law;
    RiskSet set;
    std::vector<double> t_grid;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = unspecified; the front end resolves flag > config > env > 1
};

namespace detail {

using json = nlohmann::json;

// Every reader names the offending field so a bad config produces one
// actionable line instead of a parser backtrace.
inline const json& require_field(const json& j, const std::string& path, const std::string& key) {
    if (!j.is_object() || !j.contains(key))
        throw validation_error(path + "." + key + ": required field is missing");
    return j.at(key);
}

inline std::string require_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw validation_error(path + ": expected a string");
    return j.get<std::string>();
}

inline double require_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw validation_error(path + ": expected a number");
    return j.get<double>();
}

inline int require_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw validation_error(path + ": expected an integer");
    return j.get<int>();
}

inline std::uint64_t require_u64(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
        throw validation_error(path + ": expected a non-negative integer");
    return j.get<std::uint64_t>();
}

// Rationals arrive as integers or as exact "p/q" strings; doubles are
// rejected here because the exact-arithmetic path must stay exact.
inline Rat require_rational(const json& j, const std::string& path) {
    if (j.is_number_integer()) return Rat(j.get<std::int64_t>());
    if (j.is_string()) {
        try {
            return parse_rational(j.get<std::string>());
        } catch (const std::exception& e) {
            throw validation_error(path + ": " + e.what());
        }
    }
    throw validation_error(path + ": expected an integer or a \"p/q\" string");
}

inline std::vector<Rat> require_rational_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw validation_error(path + ": expected an array");
    std::vector<Rat> out;
    for (std::size_t s = 0; s < j.size(); ++s)
        out.push_back(require_rational(j[s], path + "[" + std::to_string(s) + "]"));
    return out;
}

// Matrices are {"rows": q, "cols": d, "entries": [row-major...]}.
template <class S>
Mat<S> parse_matrix(const json& j, const std::string& path) {
    int q = require_int(require_field(j, path, "rows"), path + ".rows");
    int d = require_int(require_field(j, path, "cols"), path + ".cols");
    if (q < 1 || d < 1) throw validation_error(path + ": rows and cols must be >= 1");
    const json& entries = require_field(j, path, "entries");
    if (!entries.is_array() || static_cast<int>(entries.size()) != q * d)
        throw validation_error(path + ".entries: expected a row-major array of length rows*cols");
    Mat<S> m(q, d);
    for (int r = 0; r < q; ++r)
        for (int c = 0; c < d; ++c) {
            const json& cell = entries[static_cast<std::size_t>(r) * d + c];
            std::string cell_path =
                path + ".entries[" + std::to_string(r * d + c) + "]";
            if constexpr (std::is_same_v<S, double>) {
                if (cell.is_string())
                    m(r, c) = to_double(require_rational(cell, cell_path));
                else
                    m(r, c) = require_number(cell, cell_path);
            } else {
                m(r, c) = require_rational(cell, cell_path);
            }
        }
    return m;
}

inline MarginalModel parse_margins(const json& j, const std::string& path) {
    std::string kind = require_string(require_field(j, path, "kind"), path + ".kind");
    double alpha = require_number(require_field(j, path, "alpha"), path + ".alpha");
    std::vector<Rat> kappa =
        require_rational_array(require_field(j, path, "kappa"), path + ".kappa");
    if (kind == "iid") return iid_pareto(alpha, std::move(kappa));
    if (kind == "dependent") {
        Rat rho = require_rational(require_field(j, path, "rho"), path + ".rho");
        Rat theta = require_rational(require_field(j, path, "theta"), path + ".theta");
        return dependent_pareto(alpha, std::move(kappa), std::move(rho), std::move(theta));
    }
    throw validation_error(path + ".kind: expected \"iid\" or \"dependent\"");
}

inline ExclusionRule parse_exclusion(const json& j, const std::string& path) {
    std::string s = require_string(j, path);
    if (s == "none") return ExclusionRule::None;
    if (s == "own_index") return ExclusionRule::OwnIndex;
    if (s == "window") return ExclusionRule::Window;
    throw validation_error(path + ": expected \"none\", \"own_index\", or \"window\"");
}

inline MatrixLaw parse_matrix_law(const json& j, const std::string& path) {
    std::string kind = require_string(require_field(j, path, "kind"), path + ".kind");
    if (kind == "point_mass")
        return point_mass(parse_matrix<double>(require_field(j, path, "matrix"), path + ".matrix"));
    if (kind == "atoms") {
        const json& atoms = require_field(j, path, "atoms");
        if (!atoms.is_array() || atoms.empty())
            throw validation_error(path + ".atoms: expected a non-empty array");
        std::vector<MatrixAtom> parsed;
        for (std::size_t s = 0; s < atoms.size(); ++s) {
            std::string apath = path + ".atoms[" + std::to_string(s) + "]";
            MatrixAtom at;
            at.prob = require_rational(require_field(atoms[s], apath, "prob"), apath + ".prob");
            at.a = parse_matrix<double>(require_field(atoms[s], apath, "matrix"),
                                        apath + ".matrix");
            parsed.push_back(std::move(at));
        }
        return explicit_law(std::move(parsed));
    }
    if (kind == "onehot") {
        int q = require_int(require_field(j, path, "rows"), path + ".rows");
        int d = require_int(require_field(j, path, "cols"), path + ".cols");
        ExclusionRule rule = j.contains("exclusion")
                                 ? parse_exclusion(j.at("exclusion"), path + ".exclusion")
                                 : ExclusionRule::None;
        int window = j.contains("window")
                         ? require_int(j.at("window"), path + ".window")
                         : 0;
        Mat<Rat> weights;
        if (j.contains("weights"))
            weights = parse_matrix<Rat>(j.at("weights"), path + ".weights");
        return onehot_law(q, d, rule, window, std::move(weights));
    }
    if (kind == "bernoulli") {
        Mat<Rat> p = parse_matrix<Rat>(require_field(j, path, "connect"), path + ".connect");
        Mat<Rat> w = parse_matrix<Rat>(require_field(j, path, "weights"), path + ".weights");
        return bernoulli_law(std::move(p), std::move(w));
    }
    throw validation_error(path +
                           ".kind: expected \"point_mass\", \"atoms\", \"onehot\", or \"bernoulli\"");
}

inline RiskSet parse_risk_set(const json& j, const std::string& path, int q_hint) {
    std::string kind = require_string(require_field(j, path, "kind"), path + ".kind");
    int k = require_int(require_field(j, path, "k"), path + ".k");
    if (kind == "order_stat") {
        int q = j.contains("dim") ? require_int(j.at("dim"), path + ".dim") : q_hint;
        Rat thr = j.contains("threshold")
                      ? require_rational(j.at("threshold"), path + ".threshold")
                      : Rat(1);
        std::vector<RectClause> clauses;
        for_each_subset(q, k, k, [&](const std::vector<int>& J) {
            RectClause c;
            c.coords = J;
            c.thresholds.assign(J.size(), thr);
            clauses.push_back(std::move(c));
        });
        return rect_union(q, k, std::move(clauses));
    }
    if (kind == "rect_union") {
        const json& cl = require_field(j, path, "clauses");
        if (!cl.is_array() || cl.empty())
            throw validation_error(path + ".clauses: expected a non-empty array");
        int q = j.contains("dim") ? require_int(j.at("dim"), path + ".dim") : q_hint;
        std::vector<RectClause> clauses;
        for (std::size_t s = 0; s < cl.size(); ++s) {
            std::string cpath = path + ".clauses[" + std::to_string(s) + "]";
            RectClause c;
            const json& coords = require_field(cl[s], cpath, "coords");
            if (!coords.is_array()) throw validation_error(cpath + ".coords: expected an array");
            for (const json& v : coords) c.coords.push_back(require_int(v, cpath + ".coords[]"));
            c.thresholds = require_rational_array(require_field(cl[s], cpath, "thresholds"),
                                                  cpath + ".thresholds");
            clauses.push_back(std::move(c));
        }
        return rect_union(q, k, std::move(clauses));
    }
    if (kind == "halfspace_union") {
        const json& cl = require_field(j, path, "clauses");
        if (!cl.is_array() || cl.empty())
            throw validation_error(path + ".clauses: expected a non-empty array");
        int q = j.contains("dim") ? require_int(j.at("dim"), path + ".dim") : q_hint;
        Rat delta = require_rational(require_field(j, path, "delta"), path + ".delta");
        std::vector<HalfspaceClause> clauses;
        for (std::size_t s = 0; s < cl.size(); ++s) {
            std::string cpath = path + ".clauses[" + std::to_string(s) + "]";
            HalfspaceClause c;
            const json& normals = require_field(cl[s], cpath, "normals");
            if (!normals.is_array() || normals.empty())
                throw validation_error(cpath + ".normals: expected a non-empty array of rows");
            for (std::size_t r = 0; r < normals.size(); ++r)
                c.normals.push_back(require_rational_array(
                    normals[r], cpath + ".normals[" + std::to_string(r) + "]"));
            c.offsets = require_rational_array(require_field(cl[s], cpath, "offsets"),
                                               cpath + ".offsets");
            clauses.push_back(std::move(c));
        }
        return halfspace_union(q, k, std::move(clauses), std::move(delta));
    }
    throw validation_error(path +
                           ".kind: expected \"order_stat\", \"rect_union\", or \"halfspace_union\"");
}

}  // namespace detail

// Parses a scenario from JSON text. Throws validation_error naming the
// offending field for any structural or semantic problem.
inline Scenario parse_scenario(const std::string& text) {
    detail::json j;
    try {
        j = detail::json::parse(text);
    } catch (const std::exception& e) {
        std::string what = e.what();
        std::size_t nl = what.find('\n');
        throw validation_error("config: not valid JSON (" + what.substr(0, nl) + ")");
    }
    if (!j.is_object()) throw validation_error("config: top level must be a JSON object");

    Scenario sc;
    sc.margins = detail::parse_margins(detail::require_field(j, "config", "margins"), "margins");
    sc.law = detail::parse_matrix_law(detail::require_field(j, "config", "matrix_law"),
                                      "matrix_law");
    sc.set = detail::parse_risk_set(detail::require_field(j, "config", "risk_set"), "risk_set",
                                    sc.law.q);

    if (sc.law.d != sc.margins.dim())
        throw validation_error(
            "matrix_law.cols: law has " + std::to_string(sc.law.d) +
            " columns but margins.kappa has " + std::to_string(sc.margins.dim()) + " entries");
    if (sc.set.q != sc.law.q)
        throw validation_error("risk_set.dim: set lives in dimension " + std::to_string(sc.set.q) +
                               " but matrix_law.rows is " + std::to_string(sc.law.q));

    if (j.contains("t_grid")) {
        const detail::json& tg = j.at("t_grid");
        if (!tg.is_array()) throw validation_error("t_grid: expected an array of positive numbers");
        for (std::size_t s = 0; s < tg.size(); ++s) {
            double t = detail::require_number(tg[s], "t_grid[" + std::to_string(s) + "]");
            if (!(t > 0.0))
                throw validation_error("t_grid[" + std::to_string(s) + "]: must be > 0");
            sc.t_grid.push_back(t);
        }
    }
    if (j.contains("samples"))
        sc.samples = detail::require_u64(j.at("samples"), "samples");
    if (j.contains("seed"))
        sc.seed = detail::require_u64(j.at("seed"), "seed");
    else
        throw validation_error("seed: required field is missing (runs must be reproducible)");
    if (j.contains("threads")) {
        sc.threads = detail::require_int(j.at("threads"), "threads");
        if (sc.threads < 1) throw validation_error("threads: must be >= 1");
    }
    return sc;
}

// Loads and parses a scenario config file.
inline Scenario load_scenario(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw validation_error("config: cannot open file '" + file + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario(text);
}

}  // namespace heavytail
