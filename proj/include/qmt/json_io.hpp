#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qmt/reconstruction.hpp"

namespace qmt {

// Defects a scenario may inject on purpose, to confirm that the checks
// detect them.
struct DefectSpec {
    bool scale_pi_row = false;  // multiply one chain weight row
    int pi_level = 0;
    int pi_label = 0;
    double pi_factor = 1.0;
    double rho0_perturbation = 0.0;  // shift one root weight, renormalized
};

// A scenario: which model to build, its sizes and parameters, which suites
// to run, and where the report goes.
struct Scenario {
    std::string model;  // "ising" | "random" | "reconstruction-data"
    std::string data_file;
    int k = 2;
    int d = 2;
    int q = 2;
    int n = 1;
    double beta = 1.0;
    double j = 1.0;
    double jp = 0.0;
    std::uint64_t seed = 1;
    std::vector<std::string> suites;
    std::map<std::string, double> tolerances;  // per check name
    std::string out_path = "report.json";
    std::string format = "json";  // "json" | "csv"
    DefectSpec defects;
};

// Parse and validate one scenario document.  Throws std::invalid_argument
// with a readable message on any schema violation.
Scenario scenario_from_json(const std::string& text);

// Classical chain data in one document: sizes, splits, weights, and factor
// states with real/imaginary entry pairs.  The block structure is the
// coordinate one induced by the splits.
ExtractedClassical bundle_from_json(const std::string& text);
std::string bundle_to_json(const ExtractedClassical& bundle);

} // namespace qmt
