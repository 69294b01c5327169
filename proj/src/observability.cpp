#include "mjls/observability.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace mjls {

namespace {

constexpr double kRankTolRel = 1e-9;
constexpr double kResidualTolRel = 1e-8;

// Orthonormal basis of col(M) with singular values below
// kRankTolRel * sigma_max treated as zero.
Matrix range_basis(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return Matrix(M.rows(), 0);
    int r = 0;
    while (r < sv.size() && sv(r) > kRankTolRel * sv(0)) ++r;
    return svd.matrixU().leftCols(r);
}

// Advance a path like an odometer; returns false after the last one.
bool next_path(Path& p, int n_modes) {
    for (size_t i = 0; i < p.size(); ++i) {
        if (++p[i] < n_modes) return true;
        p[i] = 0;
    }
    return false;
}

bool core_equal(const Path& a, const Path& b, int alpha, int hi) {
    for (int k = alpha; k <= hi; ++k)
        if (a[k] != b[k]) return false;
    return true;
}

}  // namespace

DiscernibilityReport is_discernible_ae(const Model& m, const Path& a,
                                       const Path& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument(
            "is_discernible_ae: paths must have equal length >= 2");
    DiscernibilityReport rep;
    rep.first = a;
    rep.second = b;
    PathAlgebra pa = PathAlgebra::build(m, a);
    PathAlgebra pb = PathAlgebra::build(m, b);
    Matrix OO(pa.O.rows(), pa.O.cols() + pb.O.cols());
    OO << pa.O, pb.O;
    const Matrix U = range_basis(OO);
    const Matrix D = pa.G - pb.G;
    const Matrix R = D - U * (U.transpose() * D);
    rep.residual_norm = R.norm();
    rep.discernible = rep.residual_norm > kResidualTolRel * D.norm();
    return rep;
}

MOCertificate check_mo(const Model& m, int N, int alpha, int omega,
                       long pair_budget) {
    if (!(alpha >= 0 && omega >= 0 && alpha + omega < N))
        throw std::invalid_argument("check_mo: need alpha + omega < N");
    MOCertificate cert;
    cert.N = N;
    cert.alpha = alpha;
    cert.omega = omega;
    cert.holds = true;
    const int hi = N - omega;  // inclusive core upper bound
    Path a(N + 1, 0);
    do {
        Path b = a;
        while (next_path(b, m.n_modes)) {  // b lexicographically after a
            if (core_equal(a, b, alpha, hi)) continue;
            if (++cert.pairs_tested > pair_budget)
                throw ResourceError("check_mo: pair budget exceeded");
            if (!is_discernible_ae(m, a, b).discernible) {
                cert.holds = false;
                cert.witness_pair = {a, b};
                return cert;
            }
        }
    } while (next_path(a, m.n_modes));
    return cert;
}

std::optional<MOCertificate> find_weak_mo_index(const Model& m, int N_max,
                                                long pair_budget) {
    if (N_max < 1) throw std::invalid_argument("find_weak_mo_index: N_max >= 1");
    if (m.n_modes == 1) {
        // All path pairs coincide, so Def. 2 is vacuous; report the smallest
        // window whose observability matrix has full column rank instead.
        Path p;
        for (int N = 1; N <= N_max; ++N) {
            p.assign(N + 1, 0);
            if (is_pathwise_observable(m, p)) {
                MOCertificate cert;
                cert.N = N;
                cert.alpha = 0;
                cert.omega = N - 1;
                cert.holds = true;
                return cert;
            }
        }
        return std::nullopt;
    }
    for (int N = 1; N <= N_max; ++N)
        for (int alpha = 0; alpha < N; ++alpha)
            for (int omega = 0; alpha + omega < N; ++omega) {
                MOCertificate cert = check_mo(m, N, alpha, omega, pair_budget);
                if (cert.holds) return cert;
            }
    return std::nullopt;
}

bool is_pathwise_observable(const Model& m, const Path& path) {
    const Matrix O = obs_matrix(m, path);
    Eigen::JacobiSVD<Matrix> svd(O);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return m.ns == 0;
    int r = 0;
    while (r < sv.size() && sv(r) > kRankTolRel * sv(0)) ++r;
    return r == m.ns;
}

}  // namespace mjls
