#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "n4d/solver.hpp"

namespace n4d {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;  // measured values
};

struct VerifyProfile {
    Rational gamma_p = default_gamma_prime();
    int n_small = 6;  // quick solve size
    int m_small = 3;
};

// Largest relative gap between the d-weighted union of block spectra and the
// spectrum of the unreduced pencil, both in units of omega.
double block_equivalence_error(const ProblemConfig& cfg);

std::vector<CheckResult> run_verify_suite(const VerifyProfile& prof);
// One "PASS|FAIL name: detail" line per check; returns true when all pass.
bool print_checks(const std::vector<CheckResult>& checks, std::ostream& os);

}  // namespace n4d
