#pragma once

#include <optional>
#include <utility>

#include "mjls/core.hpp"

namespace mjls {

struct DiscernibilityReport {
    Path first, second;
    bool discernible = false;
    double residual_norm = 0.0;
};

struct MOCertificate {
    int N = 0;
    int alpha = 0, omega = 0;
    bool holds = false;
    std::optional<std::pair<Path, Path>> witness_pair;  // set when holds=false
    long pairs_tested = 0;
};

// Thrown when a combinatorial enumeration would exceed its budget.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sufficient test for discernibility with respect to almost every control:
// residual = ||(I - P) (G(th) - G(th'))||_F with P the orthogonal projector
// onto col[O(th) O(th')]. Paths must have equal length >= 2.
DiscernibilityReport is_discernible_ae(const Model& m, const Path& a,
                                       const Path& b);

// Exhaustively tests all unordered path pairs in W^{N+1} differing on the
// core positions [alpha, N - omega]. Requires alpha + omega < N.
// pair_budget caps the number of discernibility tests; exceeding it throws
// ResourceError (never silently truncates).
MOCertificate check_mo(const Model& m, int N, int alpha, int omega,
                       long pair_budget = 2'000'000);

// Smallest N <= N_max for which some (alpha, omega) certificate holds.
std::optional<MOCertificate> find_weak_mo_index(const Model& m, int N_max,
                                                long pair_budget = 2'000'000);

// rank(O(path)) == ns under a relative singular-value tolerance.
bool is_pathwise_observable(const Model& m, const Path& path);

}  // namespace mjls
