#include "qmt/json_io.hpp"

#include <set>
#include <stdexcept>

#include "json.hpp"

#include "qmt/report.hpp"

namespace qmt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

int require_int(const json& obj, const char* key, int fallback, bool present_ok = true) {
    if (!obj.contains(key)) {
        if (present_ok) return fallback;
        fail(std::string("config misses the field '") + key + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) fail(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
}

MatrixXcd matrix_from_json(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where + " must be a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto cols = static_cast<Eigen::Index>(v.at(0).size());
    MatrixXcd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = v.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            fail(where + " has ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& cell = row.at(static_cast<std::size_t>(c));
            if (!cell.is_array() || cell.size() != 2 || !cell.at(0).is_number() ||
                !cell.at(1).is_number()) {
                fail(where + " entries must be [re, im] pairs");
            }
            out(r, c) = complexd(cell.at(0).get<double>(), cell.at(1).get<double>());
        }
    }
    return out;
}

json matrix_to_json(const MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

Scenario scenario_from_json(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("config is not valid JSON: ") + e.what());
    }
    if (!obj.is_object()) fail("config must be a JSON object");

    Scenario sc;
    if (!obj.contains("model") || !obj.at("model").is_string()) {
        fail("config needs a string field 'model'");
    }
    sc.model = obj.at("model").get<std::string>();
    static const std::set<std::string> kModels{"ising", "random", "reconstruction-data"};
    if (kModels.count(sc.model) == 0) fail("unknown model '" + sc.model + "'");
    if (sc.model == "reconstruction-data") {
        if (!obj.contains("data_file") || !obj.at("data_file").is_string()) {
            fail("model 'reconstruction-data' needs a string field 'data_file'");
        }
        sc.data_file = obj.at("data_file").get<std::string>();
    }

    sc.k = require_int(obj, "k", sc.k);
    sc.d = require_int(obj, "d", sc.d);
    sc.q = require_int(obj, "q", sc.q);
    sc.n = require_int(obj, "n", sc.n);
    if (sc.k < 1 || sc.d < 2 || sc.q < 1 || sc.n < 0) {
        fail("sizes must satisfy k >= 1, d >= 2, q >= 1, n >= 0");
    }

    if (obj.contains("parameters")) {
        const auto& par = obj.at("parameters");
        if (!par.is_object()) fail("'parameters' must be an object");
        for (const auto& [key, value] : par.items()) {
            if (key == "beta" || key == "j" || key == "jp") {
                if (!value.is_number()) fail("parameter '" + key + "' must be a number");
                const double x = value.get<double>();
                if (key == "beta") sc.beta = x;
                if (key == "j") sc.j = x;
                if (key == "jp") sc.jp = x;
            } else if (key == "seed") {
                if (!value.is_number_unsigned() && !value.is_number_integer()) {
                    fail("parameter 'seed' must be an integer");
                }
                sc.seed = value.get<std::uint64_t>();
            } else {
                fail("unknown parameter '" + key + "'");
            }
        }
    }

    static const std::set<std::string> kSuites{"canonical",    "markov",     "gibbs",
                                               "disintegrate", "reconstruct", "hamiltonian"};
    if (obj.contains("suites")) {
        const auto& arr = obj.at("suites");
        if (!arr.is_array()) fail("'suites' must be an array");
        for (const auto& s : arr) {
            if (!s.is_string()) fail("suite names must be strings");
            const std::string name = s.get<std::string>();
            if (kSuites.count(name) == 0) fail("unknown suite '" + name + "'");
            sc.suites.push_back(name);
        }
    }

    if (obj.contains("tolerances")) {
        const auto& tols = obj.at("tolerances");
        if (!tols.is_object()) fail("'tolerances' must be an object");
        for (const auto& [key, value] : tols.items()) {
            if (!value.is_number()) fail("tolerance '" + key + "' must be a number");
            const double x = value.get<double>();
            if (!(x >= 0.0)) fail("tolerance '" + key + "' must be nonnegative");
            sc.tolerances[key] = x;
        }
    }

    if (obj.contains("output")) {
        const auto& out = obj.at("output");
        if (!out.is_object()) fail("'output' must be an object");
        if (out.contains("path")) {
            if (!out.at("path").is_string()) fail("output path must be a string");
            sc.out_path = out.at("path").get<std::string>();
        }
        if (out.contains("format")) {
            if (!out.at("format").is_string()) fail("output format must be a string");
            sc.format = out.at("format").get<std::string>();
        }
    }
    if (sc.format != "json" && sc.format != "csv") {
        fail("output format must be 'json' or 'csv'");
    }

    if (obj.contains("defects")) {
        const auto& def = obj.at("defects");
        if (!def.is_object()) fail("'defects' must be an object");
        for (const auto& [key, value] : def.items()) {
            if (key == "scale_pi_row") {
                if (!value.is_object()) fail("'scale_pi_row' must be an object");
                sc.defects.scale_pi_row = true;
                sc.defects.pi_level = require_int(value, "level", 0);
                sc.defects.pi_label = require_int(value, "label", 0);
                if (value.contains("factor")) {
                    if (!value.at("factor").is_number()) fail("defect factor must be a number");
                    sc.defects.pi_factor = value.at("factor").get<double>();
                }
            } else if (key == "perturb_rho0") {
                if (!value.is_number()) fail("'perturb_rho0' must be a number");
                sc.defects.rho0_perturbation = value.get<double>();
            } else {
                fail("unknown defect '" + key + "'");
            }
        }
    }
    return sc;
}

ExtractedClassical bundle_from_json(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("data file is not valid JSON: ") + e.what());
    }
    if (!obj.is_object()) fail("data file must hold a JSON object");

    ExtractedClassical out;
    out.data.k = require_int(obj, "k", 0, false);
    out.data.q = require_int(obj, "q", 0, false);
    if (out.data.k < 1 || out.data.q < 1) fail("data file needs k >= 1 and q >= 1");

    for (const char* key : {"n_dims", "m_dims"}) {
        if (!obj.contains(key) || !obj.at(key).is_array()) {
            fail(std::string("data file needs an integer array '") + key + "'");
        }
        for (const auto& v : obj.at(key)) {
            if (!v.is_number_integer()) fail(std::string("'") + key + "' must hold integers");
            const int x = v.get<int>();
            if (x < 1) fail(std::string("'") + key + "' must be positive");
            if (std::string(key) == "n_dims") out.data.n_dims.push_back(x);
            else out.data.m_dims.push_back(x);
        }
    }

    if (!obj.contains("pi0") || !obj.at("pi0").is_array()) fail("data file needs 'pi0'");
    out.data.pi0.resize(static_cast<Eigen::Index>(obj.at("pi0").size()));
    for (Eigen::Index i = 0; i < out.data.pi0.size(); ++i) {
        const auto& v = obj.at("pi0").at(static_cast<std::size_t>(i));
        if (!v.is_number()) fail("'pi0' must hold numbers");
        out.data.pi0(i) = v.get<double>();
    }

    if (!obj.contains("pi") || !obj.at("pi").is_array()) fail("data file needs 'pi'");
    for (std::size_t lvl = 0; lvl < obj.at("pi").size(); ++lvl) {
        const auto& v = obj.at("pi").at(lvl);
        const std::string where = "pi level " + std::to_string(lvl);
        if (!v.is_array() || v.empty()) fail(where + " must be an array of rows");
        Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()),
                          static_cast<Eigen::Index>(v.at(0).size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const auto& row = v.at(static_cast<std::size_t>(r));
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
                fail(where + " has ragged rows");
            }
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (!row.at(static_cast<std::size_t>(c)).is_number()) {
                    fail(where + " must hold numbers");
                }
                m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
            }
        }
        out.data.pi.push_back(std::move(m));
    }

    if (!obj.contains("eta0") || !obj.at("eta0").is_array()) fail("data file needs 'eta0'");
    for (std::size_t w = 0; w < obj.at("eta0").size(); ++w) {
        out.factors.eta0.push_back(
            matrix_from_json(obj.at("eta0").at(w), "eta0 entry " + std::to_string(w)));
    }

    if (!obj.contains("eta") || !obj.at("eta").is_array()) fail("data file needs 'eta'");
    for (std::size_t lvl = 0; lvl < obj.at("eta").size(); ++lvl) {
        const auto& v = obj.at("eta").at(lvl);
        if (!v.is_array()) fail("eta level " + std::to_string(lvl) + " must be an array");
        std::vector<MatrixXcd> level;
        for (std::size_t i = 0; i < v.size(); ++i) {
            level.push_back(matrix_from_json(v.at(i), "eta level " + std::to_string(lvl) +
                                                          " entry " + std::to_string(i)));
        }
        out.factors.eta.push_back(std::move(level));
    }

    out.structure = BlockStructure::standard(out.data.n_dims, out.data.m_dims);
    return out;
}

std::string bundle_to_json(const ExtractedClassical& bundle) {
    json obj;
    obj["k"] = bundle.data.k;
    obj["q"] = bundle.data.q;
    obj["n_dims"] = bundle.data.n_dims;
    obj["m_dims"] = bundle.data.m_dims;
    json pi0 = json::array();
    for (Eigen::Index i = 0; i < bundle.data.pi0.size(); ++i) pi0.push_back(bundle.data.pi0(i));
    obj["pi0"] = std::move(pi0);
    json pi = json::array();
    for (const auto& level : bundle.data.pi) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < level.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < level.cols(); ++c) row.push_back(level(r, c));
            rows.push_back(std::move(row));
        }
        pi.push_back(std::move(rows));
    }
    obj["pi"] = std::move(pi);
    json eta0 = json::array();
    for (const auto& m : bundle.factors.eta0) eta0.push_back(matrix_to_json(m));
    obj["eta0"] = std::move(eta0);
    json eta = json::array();
    for (const auto& level : bundle.factors.eta) {
        json entries = json::array();
        for (const auto& m : level) entries.push_back(matrix_to_json(m));
        eta.push_back(std::move(entries));
    }
    obj["eta"] = std::move(eta);
    return obj.dump();
}

} // namespace qmt
