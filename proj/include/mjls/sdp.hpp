#pragma once

#include <map>
#include <string>
#include <vector>

#include "mjls/core.hpp"

namespace mjls::sdp {

// Affine matrix expression E(x) = K0 + sum_k x_k Kk over scalar decision
// variables. All LMI blocks in this project are of the form
// (constant) * (matrix variable) * (constant), which stays affine.
class Expr {
  public:
    Expr() = default;
    Expr(int rows, int cols) : k0(Matrix::Zero(rows, cols)) {}
    static Expr constant(const Matrix& M) {
        Expr e;
        e.k0 = M;
        return e;
    }

    int rows() const { return (int)k0.rows(); }
    int cols() const { return (int)k0.cols(); }

    Expr operator+(const Expr& o) const;
    Expr operator-(const Expr& o) const;
    Expr operator-() const;
    Expr transpose() const;
    Expr scaled(double s) const;
    Expr left_mul(const Matrix& L) const;    // L * E
    Expr right_mul(const Matrix& R) const;   // E * R
    Expr sym() const { return *this + this->transpose(); }  // E + E^T
    Matrix eval(const Vector& x) const;

    Matrix k0;
    std::map<int, Matrix> lin;  // variable index -> coefficient
};

Expr operator*(const Matrix& L, const Expr& e);
Expr operator*(double s, const Expr& e);

// Assemble a block matrix of expressions (all entries must be present).
Expr blocks(const std::vector<std::vector<Expr>>& rows);

struct VarRef {
    int base = 0;
    int rows = 0, cols = 0;
    bool symmetric = false;
    int count() const { return symmetric ? rows * (rows + 1) / 2 : rows * cols; }
};

class Problem {
  public:
    VarRef add_sym(int n);            // symmetric n x n, upper triangle packed
    VarRef add_var(int r, int c);     // full matrix
    VarRef add_scalar() { return add_var(1, 1); }

    Expr expr(const VarRef& v) const;  // affine lift of the variable
    // Require E(x) - strictness * I to be positive definite. The strictness
    // shift realizes strict inequalities; pass 0 for closed constraints.
    void add_pd(const Expr& e, double strictness = -1.0);
    void set_objective(const Vector& c) { objective_ = c; }
    void set_objective_var(const VarRef& scalar_var);

    int num_vars() const { return num_vars_; }
    Matrix value(const VarRef& v, const Vector& x) const;

    struct Block {
        Matrix f0;                   // includes the strictness shift
        Matrix f0_orig;              // without the shift (for verification)
        std::map<int, Matrix> terms;
    };
    const std::vector<Block>& constraint_blocks() const { return blocks_; }
    const Vector& objective() const { return objective_; }

  private:
    int num_vars_ = 0;
    std::vector<Block> blocks_;
    Vector objective_;
};

struct SolveOptions {
    double tol = 1e-8;          // duality-measure target per constraint dim
    int max_iters = 400;        // total Newton iterations across the path
    double box_bound = 1e6;     // |x_k| <= box_bound for every variable
    double default_strictness_scale = 1e-7;
};

enum class SolveStatus { feasible, infeasible, maxiter };

struct SolveResult {
    SolveStatus status = SolveStatus::maxiter;
    Vector x;
    double objective = 0.0;
    double phase1_margin = 0.0;  // best attainable slack (negative: strict)
    int newton_iters = 0;
};

// Phase-1/phase-2 log-det barrier method. Deterministic.
SolveResult solve(const Problem& p, const SolveOptions& opts = {});

// Independent eigenvalue check (Eigen's self-adjoint solver; no reuse of
// barrier internals): minimum eigenvalue of every original constraint block.
struct VerifyReport {
    std::vector<double> min_eigenvalues;
    double worst = 0.0;
    int worst_index = -1;
};
VerifyReport verify(const Problem& p, const Vector& x);

}  // namespace mjls::sdp
