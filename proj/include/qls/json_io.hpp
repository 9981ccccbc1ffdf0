#pragma once
#include <json.hpp>

#include "qls/encodings.hpp"
#include "qls/instances.hpp"

namespace qls {

using json = nlohmann::json;

inline json to_json(const CVec& v) {
    json entries = json::array();
    for (const auto& x : v) entries.push_back({x.real(), x.imag()});
    return {{"dim", v.size()}, {"entries", entries}};
}

inline CVec vec_from_json(const json& j) {
    CVec v;
    v.reserve(j.at("dim").get<std::size_t>());
    for (const auto& e : j.at("entries")) v.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    if (v.size() != j.at("dim").get<std::size_t>()) throw std::invalid_argument("vector dim mismatch");
    return v;
}

inline json to_json(const CMat& m) {
    json entries = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            entries.push_back({m(i, j).real(), m(i, j).imag()});
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline CMat mat_from_json(const json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto& entries = j.at("entries");
    if (entries.size() != rows * cols) throw std::invalid_argument("matrix entry count mismatch");
    CMat m(rows, cols);
    std::size_t k = 0;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < cols; ++c, ++k)
            m(i, c) = cplx(entries[k].at(0).get<double>(), entries[k].at(1).get<double>());
    return m;
}

inline json to_json(const LinearSystemInstance& inst) {
    json j = {{"a", to_json(inst.a)},       {"b", to_json(inst.b)},
              {"alpha_a", inst.alpha_a},    {"alpha_ainv", inst.alpha_ainv},
              {"law", inst.law},            {"seed", inst.seed}};
    if (inst.solution) j["solution"] = to_json(*inst.solution);
    if (inst.sol_norm) j["sol_norm"] = *inst.sol_norm;
    return j;
}

inline LinearSystemInstance instance_from_json(const json& j) {
    LinearSystemInstance inst;
    inst.a = mat_from_json(j.at("a"));
    inst.b = vec_from_json(j.at("b"));
    inst.alpha_a = j.at("alpha_a").get<double>();
    inst.alpha_ainv = j.at("alpha_ainv").get<double>();
    inst.law = j.value("law", "");
    inst.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("solution")) inst.solution = vec_from_json(j.at("solution"));
    if (j.contains("sol_norm")) inst.sol_norm = j.at("sol_norm").get<double>();
    return inst;
}

inline json to_json(const ThresholdQuartet& q) {
    return {{"theta0", q.theta0}, {"phi", q.phi},   {"eps", q.eps},
            {"degree", q.degree()}, {"nu", q.g.nu}, {"beta", q.g.beta}};
}

}  // namespace qls
