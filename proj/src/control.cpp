#include "mjls/control.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace mjls::control {

using sdp::Expr;
using sdp::Problem;
using sdp::VarRef;

DesignVars make_design_vars(Problem& p, const Model& m) {
    DesignVars v;
    for (int i = 0; i < m.n_modes; ++i) {
        v.V1.push_back(p.add_sym(m.ns));
        v.V2.push_back(p.add_var(m.na, m.ns));
        v.V4.push_back(p.add_sym(m.na));
        v.H1.push_back(p.add_var(m.ns, m.ns));
        v.H2.push_back(p.add_var(m.na, m.ns));
        v.G1.push_back(p.add_var(m.ns, m.ns));
        v.G2.push_back(p.add_var(m.na, m.ns));
    }
    v.Q4 = p.add_sym(m.na);
    v.L = p.add_var(m.na, m.ny);
    return v;
}

Expr build_design_matrix(const Problem& p, const Model& m,
                         const DesignVars& vars, int i, const Vector& q,
                         const std::vector<Matrix>& M, double alpha) {
    if (i < 0 || i >= m.n_modes)
        throw std::invalid_argument("build_design_matrix: bad mode index");
    if ((int)q.size() != m.n_modes)
        throw std::invalid_argument("build_design_matrix: bad vertex size");
    if ((int)M.size() != m.n_modes || M[i].rows() != m.na || M[i].cols() != m.ns)
        throw std::invalid_argument("build_design_matrix: bad M dimensions");

    const Matrix& Ai = m.A[i];
    const Matrix& Bi = m.B[i];
    const Matrix& Ci = m.C[i];
    const Matrix& Mi = M[i];

    Expr sumV1(m.ns, m.ns), sumV2(m.na, m.ns), sumV4(m.na, m.na);
    for (int j = 0; j < m.n_modes; ++j) {
        sumV1 = sumV1 + p.expr(vars.V1[j]).scaled(q(j));
        sumV2 = sumV2 + p.expr(vars.V2[j]).scaled(q(j));
        sumV4 = sumV4 + p.expr(vars.V4[j]).scaled(q(j));
    }

    const Expr H1A = p.expr(vars.H1[i]).right_mul(Ai);
    const Expr MQM = p.expr(vars.Q4).left_mul(Mi.transpose()).right_mul(Mi);
    const Expr MLC = p.expr(vars.L).left_mul(Mi.transpose()).right_mul(Ci);
    const Expr LC = p.expr(vars.L).right_mul(Ci);

    Expr O11 = H1A.sym() - p.expr(vars.V1[i]) + MQM.scaled(2.0 * alpha) -
               MLC.sym().scaled(2.0 * alpha);
    Expr O21 = p.expr(vars.H2[i]).right_mul(Ai) +
               p.expr(vars.H1[i]).right_mul(Bi).transpose() +
               LC.scaled(2.0 * alpha);
    Expr O22 = p.expr(vars.H2[i]).right_mul(Bi).sym() -
               p.expr(vars.Q4).scaled(2.0 * alpha);
    Expr O31 = p.expr(vars.G1[i]).right_mul(Ai) + p.expr(vars.H1[i]).transpose();
    Expr O32 = p.expr(vars.G1[i]).right_mul(Bi) - p.expr(vars.H2[i]).transpose();
    Expr O33 = sumV1 - p.expr(vars.G1[i]).sym();
    Expr O41 = p.expr(vars.G2[i]).right_mul(Ai) + LC;
    Expr O42 = p.expr(vars.G2[i]).right_mul(Bi) + p.expr(vars.Q4);
    Expr O43 = sumV2 - p.expr(vars.G2[i]);
    Expr O44 = sumV4 - p.expr(vars.Q4).scaled(2.0);

    return sdp::blocks({{O11, O21.transpose(), O31.transpose(), O41.transpose()},
                        {O21, O22, O32.transpose(), O42.transpose()},
                        {O31, O32, O33, O43.transpose()},
                        {O41, O42, O43, O44}});
}

std::vector<Matrix> closed_loop(const Model& m, const Matrix& K) {
    if (K.rows() != m.na || K.cols() != m.ny)
        throw std::invalid_argument("closed_loop: bad gain dimensions");
    std::vector<Matrix> out;
    out.reserve(m.n_modes);
    for (int i = 0; i < m.n_modes; ++i)
        out.push_back(m.A[i] + m.B[i] * K * m.C[i]);
    return out;
}

namespace {

Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) =
                A(i, j) * B;
    return K;
}

}  // namespace

double ms_spectral_radius(const std::vector<Matrix>& Acl, const Matrix& P) {
    const int M = (int)Acl.size();
    const int n = (int)Acl[0].rows();
    const int d = n * n;
    Matrix T = Matrix::Zero(M * d, M * d);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            T.block(i * d, j * d, d, d) = P(i, j) * kron(Acl[j], Acl[j]).transpose();
    Eigen::EigenSolver<Matrix> es(T, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double ms_spectral_radius(const Model& m, const Matrix& K, const Matrix& P) {
    return ms_spectral_radius(closed_loop(m, K), P);
}

namespace {

StabilityCertificate verify_cl_stability(
    const std::vector<Matrix>& Acl, int ns,
    const std::vector<std::vector<Vector>>& vertices,
    const sdp::SolveOptions& opts) {
    const int M = (int)Acl.size();
    Problem p;
    std::vector<VarRef> V;
    for (int i = 0; i < M; ++i) V.push_back(p.add_sym(ns));
    const Matrix I = Matrix::Identity(ns, ns);
    // Normalize the (scale-free) feasibility problem with V_i >= I.
    for (int i = 0; i < M; ++i)
        p.add_pd(p.expr(V[i]) - Expr::constant(I), 0.0);
    for (int i = 0; i < M; ++i)
        for (const Vector& q : vertices[i]) {
            Expr lhs = p.expr(V[i]);
            for (int j = 0; j < M; ++j)
                lhs = lhs - p.expr(V[j])
                          .left_mul(Acl[j].transpose())
                          .right_mul(Acl[j])
                          .scaled(q(j));
            p.add_pd(lhs);
        }
    auto res = sdp::solve(p, opts);
    StabilityCertificate out;
    out.stable = (res.status == sdp::SolveStatus::feasible);
    if (!out.stable) {
        out.worst_margin = -std::numeric_limits<double>::infinity();
        return out;
    }
    for (int i = 0; i < M; ++i) out.V.push_back(p.value(V[i], res.x));
    // Independent eigenvalue margins at the returned certificate.
    out.worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < M; ++i)
        for (const Vector& q : vertices[i]) {
            Matrix lhs = out.V[i];
            for (int j = 0; j < M; ++j)
                lhs -= q(j) * Acl[j].transpose() * out.V[j] * Acl[j];
            Eigen::SelfAdjointEigenSolver<Matrix> es(lhs);
            const double mineig = es.eigenvalues().minCoeff();
            out.margins.push_back(mineig);
            out.worst_margin = std::min(out.worst_margin, mineig);
        }
    return out;
}

}  // namespace

StabilityCertificate verify_ms_stability(
    const Model& m, const Matrix& K,
    const std::vector<std::vector<Vector>>& vertices,
    const sdp::SolveOptions& opts) {
    if ((int)vertices.size() != m.n_modes)
        throw std::invalid_argument("verify_ms_stability: bad vertex sets");
    return verify_cl_stability(closed_loop(m, K), m.ns, vertices, opts);
}

StabilityCertificate verify_ms_stability(const Model& m, const Matrix& K,
                                         const Matrix& P,
                                         const sdp::SolveOptions& opts) {
    std::vector<std::vector<Vector>> verts(m.n_modes);
    for (int i = 0; i < m.n_modes; ++i) verts[i].push_back(P.row(i).transpose());
    return verify_ms_stability(m, K, verts, opts);
}

std::vector<Matrix> synthesize_state_feedback(
    const Model& m, const std::vector<std::vector<Vector>>& vertices,
    const sdp::SolveOptions& opts) {
    const int M = m.n_modes, ns = m.ns, na = m.na;
    Problem p;
    std::vector<VarRef> W, Y;
    for (int i = 0; i < M; ++i) {
        W.push_back(p.add_sym(ns));
        Y.push_back(p.add_var(na, ns));
    }
    const Matrix I = Matrix::Identity(ns, ns);
    for (int i = 0; i < M; ++i)
        p.add_pd(p.expr(W[i]) - Expr::constant(I), 0.0);
    const Expr zero(ns, ns);
    for (int i = 0; i < M; ++i) {
        const Expr AWBY =
            p.expr(W[i]).left_mul(m.A[i]) + p.expr(Y[i]).left_mul(m.B[i]);
        for (const Vector& q : vertices.at(i)) {
            std::vector<std::vector<Expr>> rows(M + 1,
                                                std::vector<Expr>(M + 1, zero));
            rows[0][0] = p.expr(W[i]);
            for (int j = 0; j < M; ++j) {
                const double s = std::sqrt(std::max(q(j), 0.0));
                rows[0][j + 1] = AWBY.transpose().scaled(s);
                rows[j + 1][0] = AWBY.scaled(s);
                rows[j + 1][j + 1] = p.expr(W[j]);
            }
            p.add_pd(sdp::blocks(rows));
        }
    }
    auto res = sdp::solve(p, opts);
    if (res.status != sdp::SolveStatus::feasible)
        throw std::runtime_error("no robust state feedback");
    std::vector<Matrix> gains;
    for (int i = 0; i < M; ++i) {
        Matrix Wi = p.value(W[i], res.x);
        Matrix Yi = p.value(Y[i], res.x);
        gains.push_back(Wi.llt().solve(Yi.transpose()).transpose());
    }
    return gains;
}

OutputFeedbackResult synthesize_output_feedback(
    const Model& m, const std::vector<std::vector<Vector>>& vertices,
    const std::vector<Matrix>& M, double alpha, double c,
    const sdp::SolveOptions& opts) {
    if ((int)vertices.size() != m.n_modes)
        throw std::invalid_argument("synthesize_output_feedback: bad vertex sets");
    if (alpha <= 0 || c <= 0)
        throw std::invalid_argument("synthesize_output_feedback: alpha, c > 0");
    Problem p;
    DesignVars vars = make_design_vars(p, m);
    VarRef gamma = p.add_scalar();

    const int sz = 2 * (m.ns + m.na);
    Expr gI(sz, sz);
    gI.lin[gamma.base] = Matrix::Identity(sz, sz);

    for (int i = 0; i < m.n_modes; ++i) {
        p.add_pd(sdp::blocks({{p.expr(vars.V1[i]), p.expr(vars.V2[i]).transpose()},
                              {p.expr(vars.V2[i]), p.expr(vars.V4[i])}}));
        for (const Vector& q : vertices[i])
            p.add_pd(gI - build_design_matrix(p, m, vars, i, q, M, alpha));
    }
    // gamma >= -c
    Expr gc(1, 1);
    gc.k0(0, 0) = c;
    gc.lin[gamma.base] = Matrix::Identity(1, 1);
    p.add_pd(gc, 0.0);
    p.set_objective_var(gamma);

    auto res = sdp::solve(p, opts);
    OutputFeedbackResult out;
    if (res.status != sdp::SolveStatus::feasible || res.objective >= 0)
        return out;
    Matrix Q4 = p.value(vars.Q4, res.x);
    Eigen::LLT<Matrix> llt(Q4);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("synthesize_output_feedback: singular Q4");
    out.feasible = true;
    out.gamma = res.objective;
    out.K = llt.solve(p.value(vars.L, res.x));
    for (int i = 0; i < m.n_modes; ++i) {
        out.V1.push_back(p.value(vars.V1[i], res.x));
        out.V2.push_back(p.value(vars.V2[i], res.x));
        out.V4.push_back(p.value(vars.V4[i], res.x));
    }
    return out;
}

namespace {

std::vector<std::vector<Vector>> contract_vertices(
    const std::vector<std::vector<Vector>>& vertices, double level) {
    if (level >= 1.0) return vertices;
    std::vector<std::vector<Vector>> out(vertices.size());
    for (size_t i = 0; i < vertices.size(); ++i) {
        Vector center = Vector::Zero(vertices[i].at(0).size());
        for (const Vector& v : vertices[i]) center += v;
        center /= (double)vertices[i].size();
        if (level <= 0.0) {
            out[i].push_back(center);
            continue;
        }
        for (const Vector& v : vertices[i])
            out[i].push_back(center + level * (v - center));
    }
    return out;
}

Model decay_scaled(const Model& m, double delta) {
    Model s = m;
    for (int i = 0; i < m.n_modes; ++i) {
        s.A[i] /= delta;
        s.B[i] /= delta;
    }
    return s;
}

}  // namespace

SynthesisReport synthesize_gain(const Model& m,
                                const std::vector<std::vector<Vector>>& vertices,
                                const SynthesisOptions& opts) {
    SynthesisReport rep;
    std::vector<double> levels =
        opts.allow_shrink ? opts.shrink_levels : std::vector<double>{1.0};
    for (double level : levels) {
        auto verts = contract_vertices(vertices, level);
        for (double delta : opts.deltas) {
            Model scaled = decay_scaled(m, delta);
            std::vector<Matrix> M;
            try {
                M = synthesize_state_feedback(scaled, verts);
            } catch (const std::runtime_error&) {
                continue;
            }
            for (double alpha : opts.alphas) {
                auto of = synthesize_output_feedback(scaled, verts, M, alpha,
                                                     opts.c);
                if (!of.feasible) continue;
                auto cert = verify_ms_stability(m, of.K, verts);
                if (!cert.stable || cert.worst_margin < -opts.margin_tol)
                    continue;
                rep.ok = true;
                rep.K = of.K;
                rep.gamma = of.gamma;
                rep.alpha = alpha;
                rep.delta = delta;
                rep.shrink = level;
                rep.M = M;
                rep.cert = cert;
                rep.cert_requested =
                    level >= 1.0 ? cert : verify_ms_stability(m, of.K, vertices);
                return rep;
            }
        }
    }
    return rep;
}

}  // namespace mjls::control
