#pragma once

#include <vector>

#include "mjls/core.hpp"
#include "mjls/sdp.hpp"

namespace mjls::control {

// Decision-variable handles for the output-feedback design matrix.
// Dimensions (per mode i): V1 ns x ns sym, V2 na x ns, V4 na x na sym,
// H1 ns x ns, H2 na x ns, G1 ns x ns, G2 na x ns; shared: Q4 na x na sym,
// L na x ny.
struct DesignVars {
    std::vector<sdp::VarRef> V1, V2, V4, H1, H2, G1, G2;
    sdp::VarRef Q4, L;
};

DesignVars make_design_vars(sdp::Problem& p, const Model& m);

// Assembles the 4x4 symmetric block design matrix (2(ns+na) square) for
// mode `i`, transition-row vertex `q`, state-feedback gains M (na x ns per
// mode) and scalar alpha. Affine in all decision variables.
sdp::Expr build_design_matrix(const sdp::Problem& p, const Model& m,
                              const DesignVars& vars, int i, const Vector& q,
                              const std::vector<Matrix>& M, double alpha);

// Closed-loop matrices A_i + B_i K C_i.
std::vector<Matrix> closed_loop(const Model& m, const Matrix& K);

// Spectral radius of the second-moment operator: block (i,j) equals
// P(i,j) * kron(Acl_j, Acl_j)^T. Mean-square stable iff < 1.
double ms_spectral_radius(const std::vector<Matrix>& Acl, const Matrix& P);
double ms_spectral_radius(const Model& m, const Matrix& K, const Matrix& P);

struct StabilityCertificate {
    bool stable = false;
    std::vector<Matrix> V;        // per-mode certificates (when stable)
    std::vector<double> margins;  // per (mode, vertex): min eig of
                                  // V_i - sum_j q_j Acl_j^T V_j Acl_j
    double worst_margin = 0.0;
};

// Searches common certificates V_i > 0 with
//   sum_j q_j Acl_j^T V_j Acl_j - V_i < 0
// for every mode i and every vertex q in vertices[i]. Margins are computed
// with an independent eigenvalue solver at the returned V.
StabilityCertificate verify_ms_stability(
    const Model& m, const Matrix& K,
    const std::vector<std::vector<Vector>>& vertices,
    const sdp::SolveOptions& opts = {});
// Convenience overload: fixed transition matrix (each row is a singleton
// vertex set).
StabilityCertificate verify_ms_stability(const Model& m, const Matrix& K,
                                         const Matrix& P,
                                         const sdp::SolveOptions& opts = {});

// Robust mode-dependent state feedback M_i (na x ns): coupled Lyapunov LMI
// with variables W_i > 0 and Y_i, replicated over every vertex of every
// mode's set; M_i = Y_i W_i^{-1}. Throws std::runtime_error
// ("no robust state feedback") when infeasible.
std::vector<Matrix> synthesize_state_feedback(
    const Model& m, const std::vector<std::vector<Vector>>& vertices,
    const sdp::SolveOptions& opts = {});

struct OutputFeedbackResult {
    bool feasible = false;
    double gamma = 0.0;
    Matrix K;  // na x ny, = Q4^{-1} L
    std::vector<Matrix> V1, V2, V4;
};

// Minimizes gamma subject to the per-mode coupling blocks
// [[V1_i, V2_i^T],[V2_i, V4_i]] > 0, the design matrix < gamma I at every
// mode and vertex, and gamma >= -c. Returns feasible=false when the solver
// fails or gamma* >= 0.
OutputFeedbackResult synthesize_output_feedback(
    const Model& m, const std::vector<std::vector<Vector>>& vertices,
    const std::vector<Matrix>& M, double alpha, double c = 1e3,
    const sdp::SolveOptions& opts = {});

struct SynthesisOptions {
    // Decay scalings: synthesis runs on (A/delta, B/delta) so an accepted
    // gain certifies per-step state decay delta on the original plant.
    std::vector<double> deltas{0.85, 0.9, 0.95, 1.0};
    std::vector<double> alphas{1, 10, 100, 1e3, 1e4, 1e5};
    double c = 1e3;
    double margin_tol = 1e-6;
    // When true and no gain certifies at the requested vertices, retry with
    // vertex sets contracted toward their centroid by each level (1 = no
    // contraction, 0 = centroid singleton). Keeps the pipeline alive for
    // plants that admit no gain over the full requested set.
    bool allow_shrink = false;
    std::vector<double> shrink_levels{1.0, 0.5, 0.25, 0.1, 0.0};
};

struct SynthesisReport {
    bool ok = false;
    Matrix K;
    double gamma = 0.0;
    double alpha = 0.0;
    double delta = 1.0;
    double shrink = 1.0;             // contraction level actually used
    std::vector<Matrix> M;           // state-feedback gains used
    StabilityCertificate cert;       // at the vertices actually used
    StabilityCertificate cert_requested;  // at the originally requested set
};

// Full synthesis policy: grid over (shrink, delta, alpha); a candidate gain
// is accepted only after the independent verify_ms_stability check passes
// on the unscaled model at the vertices used.
SynthesisReport synthesize_gain(const Model& m,
                                const std::vector<std::vector<Vector>>& vertices,
                                const SynthesisOptions& opts = {});

}  // namespace mjls::control
