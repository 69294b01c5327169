#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mjls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Mode sequence over an observation window. Modes are 0-based internally;
// all file formats and CLI output use 1-based labels.
using Path = std::vector<int>;

struct Model {
    int n_modes = 0;
    int ns = 0, na = 0, ny = 0;
    std::vector<Matrix> A, B, C;
    std::optional<Matrix> P;  // true transition matrix, when known

    // Throws std::invalid_argument on dimension mismatch.
    void validate() const;
};

// Row-stochastic checks for a candidate transition matrix.
bool is_stochastic(const Matrix& P, double tol = 1e-12);
// Some power of P is strictly positive (primitive chain).
bool is_ergodic(const Matrix& P);

// Observability matrix O(theta): (N+1)*ny x ns, block k = C_{th_k} A_{th_{k-1}} ... A_{th_0}.
Matrix obs_matrix(const Model& m, const Path& path);

// Input-effect matrix G(theta): (N+1)*ny x N*na, strictly lower block-triangular;
// block (k,l) = C_{th_k} A_{th_{k-1}} ... A_{th_{l+1}} B_{th_l} for l < k.
Matrix input_effect(const Model& m, const Path& path);

// Stacked outputs Y(theta, x0, u) = O(theta) x0 + G(theta) u.
Vector predict_outputs(const Model& m, const Path& path, const Vector& x0,
                       const Vector& u);

// Incrementally extendable (O, G) pair for a growing path; appending a mode
// costs O(ns^2 * ny) via the running state-transition product.
struct PathAlgebra {
    const Model* model = nullptr;
    Path path;
    Matrix O;    // (N+1)*ny x ns
    Matrix G;    // (N+1)*ny x N*na
    Matrix Phi;  // A_{th_{N-1}} ... A_{th_0} (identity for N = 0)

    static PathAlgebra start(const Model& m, int mode0);
    static PathAlgebra build(const Model& m, const Path& path);
    PathAlgebra extended(int mode) const;
};

// Sample theta_0..theta_T from the chain (theta0 given, T transitions).
std::vector<int> sample_chain(const Matrix& P, int theta0, int T,
                              std::uint64_t seed);

// JSON model I/O. Fields: n_modes, ns, na, ny, A, B, C, optional P;
// matrices are arrays of row arrays. Throws std::invalid_argument on bad input.
Model parse_model(const std::string& json_text);
Model load_model(const std::string& file_path);
std::string model_to_json(const Model& m);

}  // namespace mjls
