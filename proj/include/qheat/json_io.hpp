#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "linalg.hpp"
#include "quadric.hpp"
#include "spectral.hpp"

namespace qheat {

using json = nlohmann::json;

namespace detail {

inline complex complex_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InputError("field '" + field + "': expected [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

inline json to_json(complex v) { return json::array({v.real(), v.imag()}); }

inline json to_json(std::span<const complex> v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(to_json(x));
    return out;
}

/// Complex vector as a list of [re, im] pairs.
inline CVector cvector_from_json(const json& j, std::size_t n, const std::string& field) {
    if (!j.is_array()) throw InputError("field '" + field + "': expected a list of [re, im] pairs");
    if (j.size() != n)
        throw InputError("field '" + field + "': expected " + std::to_string(n) + " entries, got " +
                         std::to_string(j.size()));
    CVector out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(detail::complex_from_json(j[i], field));
    return out;
}

inline RVector rvector_from_json(const json& j, std::size_t n, const std::string& field) {
    if (!j.is_array()) throw InputError("field '" + field + "': expected a list of numbers");
    if (j.size() != n)
        throw InputError("field '" + field + "': expected " + std::to_string(n) + " entries, got " +
                         std::to_string(j.size()));
    RVector out;
    for (const auto& v : j) {
        if (!v.is_number()) throw InputError("field '" + field + "': expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

/// {"n": int, "m": int, "A": [matrix, ...]}, each matrix a row-major list of n*n [re, im] pairs.
inline json to_json(const QuadricForm& Q) {
    json mats = json::array();
    for (const auto& a : Q.matrices()) mats.push_back(to_json(a.data()));
    return {{"n", Q.n()}, {"m", Q.m()}, {"A", mats}};
}

inline QuadricForm quadric_from_json(const json& j) {
    if (!j.is_object()) throw InputError("field 'quadric': expected an object {n, m, A}");
    for (const char* key : {"n", "m", "A"})
        if (!j.contains(key)) throw InputError(std::string("field 'quadric.") + key + "': missing");
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1)
        throw InputError("field 'quadric.n': expected a positive integer");
    if (!j["m"].is_number_integer() || j["m"].get<long long>() < 1)
        throw InputError("field 'quadric.m': expected a positive integer");
    const auto n = j["n"].get<std::size_t>();
    const auto m = j["m"].get<std::size_t>();
    const json& A = j["A"];
    if (!A.is_array() || A.size() != m)
        throw InputError("field 'quadric.A': expected " + std::to_string(m) + " matrices");
    std::vector<CMatrix> mats;
    for (std::size_t k = 0; k < m; ++k) {
        const std::string field = "quadric.A[" + std::to_string(k) + "]";
        const CVector flat = cvector_from_json(A[k], n * n, field);
        CMatrix mat(n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) mat(r, c) = flat[r * n + c];
        mats.push_back(std::move(mat));
    }
    return QuadricForm(n, m, std::move(mats));
}

/// Debug dump with fields lambda, mu, V (row-major pairs), nu, tol.
inline json to_json(const SpectralData& S) {
    return {{"lambda", S.lambda}, {"mu", S.mu}, {"V", to_json(S.V.data())}, {"nu", S.nu}, {"tol", S.tol}};
}

}  // namespace qheat
