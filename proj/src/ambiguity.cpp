#include "mjls/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mjls {

double radius(long n_samples, int n_modes, double beta) {
    if (n_samples < 0) throw std::invalid_argument("radius: n_samples >= 0");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("radius: beta in (0,1)");
    if (n_samples == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(2.0 * (n_modes * std::log(2.0) - std::log(beta)) /
                     (double)n_samples);
}

double beta_schedule(long t) {
    if (t < 0) throw std::invalid_argument("beta_schedule: t >= 0");
    const double tp1 = (double)t + 1.0;
    return 0.5 / (tp1 * tp1);
}

namespace {

// The feasible set is the intersection of the hyperplane sum(p) = 1 with the
// half-spaces p_j >= 0 (M facets) and s^T (p - p_hat) <= r for every sign
// vector s in {-1, +1}^M (l1 ball facets). Vertices lie where M - 1
// independent facets are active on the hyperplane. M <= 6 at desk scale, so
// plain subset enumeration is fine.
std::vector<Vector> enumerate_vertices(const Vector& p_hat, double r) {
    const int M = (int)p_hat.size();
    struct Facet {
        Vector a;
        double b;  // a^T p <= b
    };
    std::vector<Facet> facets;
    for (int j = 0; j < M; ++j) {
        Vector a = Vector::Zero(M);
        a(j) = -1.0;
        facets.push_back({a, 0.0});
    }
    for (int mask = 0; mask < (1 << M); ++mask) {
        Vector s(M);
        for (int j = 0; j < M; ++j) s(j) = (mask >> j) & 1 ? 1.0 : -1.0;
        facets.push_back({s, r + s.dot(p_hat)});
    }
    const int F = (int)facets.size();
    std::vector<Vector> verts;
    // iterate over all (M-1)-subsets of facets
    std::vector<int> idx(M - 1);
    for (int i = 0; i < M - 1; ++i) idx[i] = i;
    auto advance = [&]() {
        int i = M - 2;
        while (i >= 0 && idx[i] == F - (M - 1 - i)) --i;
        if (i < 0) return false;
        ++idx[i];
        for (int j = i + 1; j < M - 1; ++j) idx[j] = idx[j - 1] + 1;
        return true;
    };
    if (M == 1) {
        verts.push_back(Vector::Ones(1));
        return verts;
    }
    do {
        Matrix S(M, M);
        Vector rhs(M);
        S.row(0).setOnes();
        rhs(0) = 1.0;
        for (int i = 0; i < M - 1; ++i) {
            S.row(i + 1) = facets[idx[i]].a.transpose();
            rhs(i + 1) = facets[idx[i]].b;
        }
        Eigen::FullPivLU<Matrix> lu(S);
        if (!lu.isInvertible()) continue;
        Vector p = lu.solve(rhs);
        // feasibility w.r.t. every facet
        bool ok = true;
        for (const Facet& f : facets)
            if (f.a.dot(p) > f.b + 1e-9) {
                ok = false;
                break;
            }
        if (!ok) continue;
        bool dup = false;
        for (const Vector& v : verts)
            if ((v - p).lpNorm<1>() < 1e-9) {
                dup = true;
                break;
            }
        if (!dup) verts.push_back(p);
    } while (advance());
    return verts;
}

std::vector<Vector> unit_vertices(int M) {
    std::vector<Vector> verts;
    for (int j = 0; j < M; ++j) {
        Vector e = Vector::Zero(M);
        e(j) = 1.0;
        verts.push_back(e);
    }
    return verts;
}

}  // namespace

std::vector<Vector> l1_simplex_vertices(const Vector& p_hat, double r) {
    const int M = (int)p_hat.size();
    if (M < 1) throw std::invalid_argument("l1_simplex_vertices: empty p_hat");
    if (std::abs(p_hat.sum() - 1.0) > 1e-9 || p_hat.minCoeff() < -1e-12)
        throw std::invalid_argument("l1_simplex_vertices: p_hat off simplex");
    if (r < 0) throw std::invalid_argument("l1_simplex_vertices: r >= 0");
    if (std::isinf(r) || r >= 2.0 * (1.0 - p_hat.minCoeff()))
        return unit_vertices(M);
    auto verts = enumerate_vertices(p_hat, r);
    // canonical order for determinism
    std::sort(verts.begin(), verts.end(), [](const Vector& a, const Vector& b) {
        for (int i = 0; i < a.size(); ++i)
            if (std::abs(a(i) - b(i)) > 1e-12) return a(i) < b(i);
        return false;
    });
    return verts;
}

AmbiguitySet build_ambiguity(const TransitionDataset& ds, int mode,
                             double beta) {
    const int M = ds.n_modes();
    if (mode < 0 || mode >= M)
        throw std::invalid_argument("build_ambiguity: bad mode");
    AmbiguitySet amb;
    const long n = ds.row_total(mode);
    if (n == 0) {
        amb.p_hat = Vector::Constant(M, 1.0 / M);  // barycenter placeholder
        amb.radius = std::numeric_limits<double>::infinity();
        amb.vertices = unit_vertices(M);
        amb.full_simplex = true;
        return amb;
    }
    amb.p_hat = Vector(M);
    for (int j = 0; j < M; ++j)
        amb.p_hat(j) = (double)ds.counts(mode, j) / (double)n;
    amb.radius = radius(n, M, beta);
    amb.full_simplex = amb.radius >= 2.0 * (1.0 - amb.p_hat.minCoeff());
    amb.vertices = l1_simplex_vertices(amb.p_hat, amb.radius);
    return amb;
}

bool coverage_check(const Vector& p_true_row, const AmbiguitySet& amb) {
    if (std::isinf(amb.radius)) return true;
    return (p_true_row - amb.p_hat).lpNorm<1>() <= amb.radius + 1e-12;
}

}  // namespace mjls
