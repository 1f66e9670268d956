#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace skyrmion {

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0; // upper or lower limit, see relation
    std::string relation;   // "<=", ">=", "<", ">", "in", "=="
    double tolerance_hi = 0.0; // second bound for "in"
    bool pass = false;
    std::string note;
};

struct SuiteOptions {
    int grid_points = 4096;
    int spectral_points = 32768; // the zero mode is only O(h^2) accurate
    std::uint64_t seed = 42;
};

// One acceptance criterion: a titled group of checks with a runtime budget.
struct Criterion {
    int id;
    std::string suite;
    std::string title;
    double time_limit_s;
    std::function<std::vector<Check>(const SuiteOptions&)> run;
};

const std::vector<Criterion>& criteria();

// Checks that belong to a suite without being an acceptance criterion.
std::vector<Check> supplementary_checks(const std::string& suite, const SuiteOptions& opt);

const std::vector<std::string>& suite_names(); // identities energy solver shape spectral resolvent all

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    double seconds = 0.0;
    bool pass = false;
    std::string error; // set when the run threw
};

// Runs one criterion, timing it; the runtime budget becomes one more check.
CriterionResult run_criterion(const Criterion& c, const SuiteOptions& opt);

struct SuiteResult {
    std::string suite;
    std::vector<CriterionResult> criteria;
    std::vector<Check> supplementary;
    bool pass = false;
};

// Throws ValidationError for an unknown suite.
SuiteResult run_suite(const std::string& name, const SuiteOptions& opt);

} // namespace skyrmion
