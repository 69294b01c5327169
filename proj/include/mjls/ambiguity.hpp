#pragma once

#include <limits>
#include <vector>

#include "mjls/core.hpp"

namespace mjls {

// Observed mode-switch counts; counts(i, j) = number of i -> j transitions.
struct TransitionDataset {
    Eigen::MatrixXi counts;

    explicit TransitionDataset(int n_modes)
        : counts(Eigen::MatrixXi::Zero(n_modes, n_modes)) {}
    int n_modes() const { return (int)counts.rows(); }
    long row_total(int i) const { return counts.row(i).sum(); }
    void add(int from, int to) { ++counts(from, to); }
    void add_pairs(const std::vector<std::pair<int, int>>& pairs) {
        for (auto [i, j] : pairs) add(i, j);
    }
};

// l1 concentration radius sqrt(2 (M ln 2 - ln beta) / n); +inf for n = 0.
double radius(long n_samples, int n_modes, double beta);

// Summable confidence schedule beta_t = 0.5 (t+1)^(-2).
double beta_schedule(long t);
// Sum of the schedule over all t: 0.5 * pi^2 / 6.
inline constexpr double kBetaScheduleSum = 0.5 * 1.6449340668482264;

// Polytopic ambiguity set for one transition-matrix row: the l1 ball of the
// given radius around p_hat intersected with the probability simplex.
struct AmbiguitySet {
    Vector p_hat;
    double radius = std::numeric_limits<double>::infinity();
    std::vector<Vector> vertices;
    bool full_simplex = true;
};

// Vertices of {p in simplex : ||p - p_hat||_1 <= r}. Exact facet-subset
// enumeration; r >= 2 (1 - min p_hat_j) short-circuits to the unit vectors.
std::vector<Vector> l1_simplex_vertices(const Vector& p_hat, double r);

// Row ambiguity set from observed counts: empirical estimate + concentration
// radius; an empty row yields the full simplex.
AmbiguitySet build_ambiguity(const TransitionDataset& ds, int mode,
                             double beta);

// ||p_true_row - p_hat||_1 <= radius (always true for the infinite sentinel).
bool coverage_check(const Vector& p_true_row, const AmbiguitySet& amb);

}  // namespace mjls
