#include "mjls/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace mjls::sdp {

Expr Expr::operator+(const Expr& o) const {
    if (rows() != o.rows() || cols() != o.cols())
        throw std::invalid_argument("Expr: dimension mismatch in +");
    Expr out = *this;
    out.k0 += o.k0;
    for (const auto& [k, M] : o.lin) {
        auto it = out.lin.find(k);
        if (it == out.lin.end())
            out.lin[k] = M;
        else
            it->second += M;
    }
    return out;
}

Expr Expr::operator-(const Expr& o) const { return *this + o.scaled(-1.0); }
Expr Expr::operator-() const { return scaled(-1.0); }

Expr Expr::transpose() const {
    Expr out;
    out.k0 = k0.transpose();
    for (const auto& [k, M] : lin) out.lin[k] = M.transpose();
    return out;
}

Expr Expr::scaled(double s) const {
    Expr out = *this;
    out.k0 *= s;
    for (auto& [k, M] : out.lin) M *= s;
    return out;
}

Expr Expr::left_mul(const Matrix& L) const {
    Expr out;
    out.k0 = L * k0;
    for (const auto& [k, M] : lin) out.lin[k] = L * M;
    return out;
}

Expr Expr::right_mul(const Matrix& R) const {
    Expr out;
    out.k0 = k0 * R;
    for (const auto& [k, M] : lin) out.lin[k] = M * R;
    return out;
}

Matrix Expr::eval(const Vector& x) const {
    Matrix out = k0;
    for (const auto& [k, M] : lin) out += x(k) * M;
    return out;
}

Expr operator*(const Matrix& L, const Expr& e) { return e.left_mul(L); }
Expr operator*(double s, const Expr& e) { return e.scaled(s); }

Expr blocks(const std::vector<std::vector<Expr>>& rows) {
    int total_r = 0, total_c = 0;
    for (const auto& row : rows) total_r += row.at(0).rows();
    for (const auto& e : rows.at(0)) total_c += e.cols();
    Expr out(total_r, total_c);
    int r0 = 0;
    for (const auto& row : rows) {
        int c0 = 0;
        const int rh = row.at(0).rows();
        for (const auto& e : row) {
            if (e.rows() != rh)
                throw std::invalid_argument("blocks: ragged row heights");
            out.k0.block(r0, c0, rh, e.cols()) = e.k0;
            for (const auto& [k, M] : e.lin) {
                auto it = out.lin.find(k);
                if (it == out.lin.end())
                    it = out.lin.emplace(k, Matrix::Zero(total_r, total_c)).first;
                it->second.block(r0, c0, rh, e.cols()) += M;
            }
            c0 += e.cols();
        }
        if (c0 != total_c) throw std::invalid_argument("blocks: ragged widths");
        r0 += rh;
    }
    return out;
}

VarRef Problem::add_sym(int n) {
    VarRef v{num_vars_, n, n, true};
    num_vars_ += v.count();
    return v;
}

VarRef Problem::add_var(int r, int c) {
    VarRef v{num_vars_, r, c, false};
    num_vars_ += v.count();
    return v;
}

Expr Problem::expr(const VarRef& v) const {
    Expr e(v.rows, v.cols);
    int idx = v.base;
    if (v.symmetric) {
        for (int i = 0; i < v.rows; ++i)
            for (int j = i; j < v.cols; ++j) {
                Matrix K = Matrix::Zero(v.rows, v.cols);
                K(i, j) = 1.0;
                K(j, i) = 1.0;
                e.lin[idx++] = K;
            }
    } else {
        for (int i = 0; i < v.rows; ++i)
            for (int j = 0; j < v.cols; ++j) {
                Matrix K = Matrix::Zero(v.rows, v.cols);
                K(i, j) = 1.0;
                e.lin[idx++] = K;
            }
    }
    return e;
}

void Problem::add_pd(const Expr& e, double strictness) {
    if (e.rows() != e.cols())
        throw std::invalid_argument("add_pd: non-square expression");
    Block b;
    b.f0_orig = 0.5 * (e.k0 + e.k0.transpose());
    b.terms.clear();
    for (const auto& [k, M] : e.lin) {
        Matrix S = 0.5 * (M + M.transpose());
        if (S.norm() > 0) b.terms[k] = S;
    }
    double eps = strictness;
    if (eps < 0) {
        double scale = std::max(1.0, b.f0_orig.norm());
        for (const auto& [k, M] : b.terms) scale = std::max(scale, M.norm());
        eps = 1e-7 * scale;
    }
    b.f0 = b.f0_orig - eps * Matrix::Identity(e.rows(), e.rows());
    blocks_.push_back(std::move(b));
}

void Problem::set_objective_var(const VarRef& v) {
    Vector c = Vector::Zero(num_vars_);
    c(v.base) = 1.0;
    objective_ = c;
}

Matrix Problem::value(const VarRef& v, const Vector& x) const {
    Matrix M(v.rows, v.cols);
    int idx = v.base;
    if (v.symmetric) {
        for (int i = 0; i < v.rows; ++i)
            for (int j = i; j < v.cols; ++j) {
                M(i, j) = x(idx);
                M(j, i) = x(idx);
                ++idx;
            }
    } else {
        for (int i = 0; i < v.rows; ++i)
            for (int j = 0; j < v.cols; ++j) M(i, j) = x(idx++);
    }
    return M;
}

namespace {

// Internal view: blocks F_b(z) = F0_b + sum_k z_k A_{b,k} over the working
// variable vector z (which may carry the phase-1 slack as its last entry).
struct Cone {
    std::vector<const Problem::Block*> blocks;
    int nx = 0;        // problem variables
    bool slack = false;  // extra last variable s entering every block as +sI
    double box = 1e6;
    double slack_hi = 0.0;  // upper bound for s in phase 1

    int nz() const { return nx + (slack ? 1 : 0); }

    bool factorize(const Vector& z, std::vector<Eigen::LLT<Matrix>>& llts,
                   std::vector<Matrix>& Fs) const {
        llts.clear();
        Fs.clear();
        const double s = slack ? z(nx) : 0.0;
        for (const auto* b : blocks) {
            Matrix F = b->f0;
            for (const auto& [k, A] : b->terms) F += z(k) * A;
            if (slack) F.diagonal().array() += s;
            Eigen::LLT<Matrix> llt(F);
            if (llt.info() != Eigen::Success) return false;
            llts.push_back(std::move(llt));
            Fs.push_back(std::move(F));
        }
        // box feasibility
        for (int k = 0; k < nx; ++k)
            if (std::abs(z(k)) >= box) return false;
        if (slack && z(nx) >= slack_hi) return false;
        return true;
    }

    // Barrier value: -sum log det F_b - box logs.
    double barrier(const Vector& z,
                   const std::vector<Eigen::LLT<Matrix>>& llts) const {
        double val = 0.0;
        for (const auto& llt : llts) {
            const auto& L = llt.matrixLLT();
            for (int i = 0; i < L.rows(); ++i) val -= 2.0 * std::log(L(i, i));
        }
        for (int k = 0; k < nx; ++k)
            val -= std::log(box - z(k)) + std::log(box + z(k));
        if (slack) val -= std::log(slack_hi - z(nx));
        return val;
    }

};

}  // namespace

namespace detail {

// Straightforward damped-Newton barrier minimizer of
//   f(z) = t * c.z - sum log det F_b(z) - box barrier terms.
struct Barrier {
    const Cone& cone;
    Vector c;

    double value(const Vector& z, double t,
                 const std::vector<Eigen::LLT<Matrix>>& llts) const {
        return t * c.dot(z) + cone.barrier(z, llts);
    }

    void derivatives(const Vector& z, double t,
                     const std::vector<Eigen::LLT<Matrix>>& llts, Vector& g,
                     Matrix& H) const {
        const int n = cone.nz();
        g = t * c;
        H = Matrix::Zero(n, n);
        for (size_t bi = 0; bi < cone.blocks.size(); ++bi) {
            const auto* b = cone.blocks[bi];
            const auto& llt = llts[bi];
            std::vector<std::pair<int, Matrix>> W;
            for (const auto& [k, A] : b->terms) W.emplace_back(k, llt.solve(A));
            if (cone.slack) {
                const int d = (int)b->f0.rows();
                W.emplace_back(cone.nx, llt.solve(Matrix::Identity(d, d)));
            }
            for (const auto& [k, Wk] : W) g(k) -= Wk.trace();
            for (size_t i = 0; i < W.size(); ++i)
                for (size_t j = i; j < W.size(); ++j) {
                    const double h = (W[i].second.array() *
                                      W[j].second.transpose().array())
                                         .sum();
                    H(W[i].first, W[j].first) += h;
                    if (W[i].first != W[j].first)
                        H(W[j].first, W[i].first) += h;
                }
        }
        for (int k = 0; k < cone.nx; ++k) {
            const double hi = cone.box - z(k), lo = cone.box + z(k);
            g(k) += 1.0 / hi - 1.0 / lo;
            H(k, k) += 1.0 / (hi * hi) + 1.0 / (lo * lo);
        }
        if (cone.slack) {
            const double hi = cone.slack_hi - z(cone.nx);
            g(cone.nx) += 1.0 / hi;
            H(cone.nx, cone.nx) += 1.0 / (hi * hi);
        }
    }

    // Newton loop at fixed t; returns Newton decrement reached.
    double center(Vector& z, double t, int& iter_budget) const {
        std::vector<Eigen::LLT<Matrix>> llts;
        std::vector<Matrix> Fs;
        if (!cone.factorize(z, llts, Fs))
            throw std::runtime_error("barrier: infeasible start");
        while (iter_budget > 0) {
            --iter_budget;
            Vector g;
            Matrix H;
            derivatives(z, t, llts, g, H);
            Eigen::LDLT<Matrix> ldlt(H);
            Vector dz = -ldlt.solve(g);
            double decr2 = -g.dot(dz);
            if (!(decr2 > 0)) {  // numerical breakdown; regularize
                Matrix Hr = H;
                Hr.diagonal().array() += 1e-10 * (1.0 + H.diagonal().maxCoeff());
                dz = -Hr.ldlt().solve(g);
                decr2 = -g.dot(dz);
                if (!(decr2 > 0)) return 0.0;
            }
            if (decr2 < 1e-18) return std::sqrt(std::max(decr2, 0.0));
            const double f0 = value(z, t, llts);
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                Vector zn = z + step * dz;
                std::vector<Eigen::LLT<Matrix>> llts_n;
                std::vector<Matrix> Fs_n;
                if (cone.factorize(zn, llts_n, Fs_n)) {
                    const double fn = value(zn, t, llts_n);
                    if (fn <= f0 - 1e-4 * step * decr2 ||
                        (ls > 0 && fn < f0)) {
                        z = zn;
                        llts = std::move(llts_n);
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!moved) return std::sqrt(std::max(decr2, 0.0));
            if (decr2 < 1e-10) return std::sqrt(decr2);
        }
        return 1.0;  // budget exhausted before centering
    }
};

}  // namespace detail

SolveResult solve(const Problem& p, const SolveOptions& opts) {
    SolveResult res;
    const int nx = p.num_vars();
    Vector c = p.objective().size() == nx ? p.objective() : Vector::Zero(nx);

    // total barrier parameter (block dims + box terms)
    double nu = 2.0 * nx;
    for (const auto& b : p.constraint_blocks()) nu += (double)b.f0.rows();

    int budget = opts.max_iters;

    // ---- phase 1: minimize slack s with F_b + s I > 0 ----
    Cone cone1;
    for (const auto& b : p.constraint_blocks()) cone1.blocks.push_back(&b);
    cone1.nx = nx;
    cone1.slack = true;
    cone1.box = opts.box_bound;
    double s0 = 1.0;
    {
        Vector z0 = Vector::Zero(nx);
        for (const auto& b : p.constraint_blocks()) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(b.f0);
            s0 = std::max(s0, -es.eigenvalues().minCoeff() + 1.0);
        }
    }
    cone1.slack_hi = 2.0 * s0 + 10.0;
    Vector z = Vector::Zero(nx + 1);
    z(nx) = s0;
    detail::Barrier ph1{cone1, Vector::Zero(nx + 1)};
    ph1.c(nx) = 1.0;
    double t = 1.0;
    bool strictly_feasible = false;
    const double nu1 = nu + 1.0 + 1.0;  // slack block contributions
    while (budget > 0) {
        // Centering runs in small chunks so the slack sign is polled often:
        // once s < 0 the problem is strictly feasible and phase 1 must stop
        // instead of spending the whole budget driving s further down.
        int chunk = std::min(budget, 25);
        const int chunk0 = chunk;
        const double decr = ph1.center(z, t, chunk);
        budget -= chunk0 - chunk;
        if (z(nx) < -1e-12) {
            strictly_feasible = true;
            break;
        }
        if (decr >= 1e-5 && chunk == 0) continue;  // keep centering at this t
        if (nu1 / t < std::min(opts.tol, 1e-9) * std::max(1.0, std::abs(z(nx))))
            break;
        if (t > 1e16) break;
        t *= 20.0;
    }
    res.phase1_margin = z(nx);
    if (!strictly_feasible) {
        if (budget <= 0 && std::abs(z(nx)) < 1e-6) {
            res.status = SolveStatus::maxiter;
        } else if (z(nx) >= 0) {
            res.status =
                budget > 0 ? SolveStatus::infeasible : SolveStatus::maxiter;
        }
        res.newton_iters = opts.max_iters - budget;
        res.x = z.head(nx);
        return res;
    }

    Vector x = z.head(nx);
    res.status = SolveStatus::feasible;

    // ---- phase 2: minimize c.x over F_b(x) > 0 ----
    int budget2 = opts.max_iters;  // independent budget for the main path
    if (c.norm() > 0) {
        Cone cone2 = cone1;
        cone2.slack = false;
        detail::Barrier ph2{cone2, c};
        double t2 = 1.0 / std::max(1.0, c.cwiseAbs().maxCoeff());
        while (budget2 > 0) {
            int chunk = std::min(budget2, 25);
            const int chunk0 = chunk;
            const double decr = ph2.center(x, t2, chunk);
            budget2 -= chunk0 - chunk;
            if (decr >= 1e-5 && chunk == 0) continue;
            if (nu / t2 < opts.tol * std::max(1.0, std::abs(c.dot(x)))) break;
            if (t2 > 1e18) break;
            t2 *= 20.0;
        }
        // keep feasibility even if the budget ran out mid-path
    }
    res.x = x;
    res.objective = c.dot(x);
    res.newton_iters =
        (opts.max_iters - budget) + (opts.max_iters - budget2);
    return res;
}

VerifyReport verify(const Problem& p, const Vector& x) {
    VerifyReport rep;
    rep.worst = std::numeric_limits<double>::infinity();
    int idx = 0;
    for (const auto& b : p.constraint_blocks()) {
        Matrix F = b.f0_orig;
        for (const auto& [k, A] : b.terms) F += x(k) * A;
        Eigen::SelfAdjointEigenSolver<Matrix> es(F);
        const double mineig = es.eigenvalues().minCoeff();
        rep.min_eigenvalues.push_back(mineig);
        if (mineig < rep.worst) {
            rep.worst = mineig;
            rep.worst_index = idx;
        }
        ++idx;
    }
    return rep;
}

}  // namespace mjls::sdp
