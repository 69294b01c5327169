#include "mjls/estimator.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <set>
#include <stdexcept>

#include "mjls/observability.hpp"

namespace mjls {

ConsistencyResult is_consistent(const Model& m, const Path& path,
                                const Vector& y, const Vector& u, double tol) {
    PathAlgebra pa = PathAlgebra::build(m, path);
    if (y.size() != pa.O.rows() || u.size() != pa.G.cols())
        throw std::invalid_argument("is_consistent: shape mismatch");
    const Vector ytilde = y - pa.G * u;
    Eigen::BDCSVD<Matrix> svd(pa.O, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ConsistencyResult res;
    res.x_ls = svd.solve(ytilde);
    res.residual = (ytilde - pa.O * res.x_ls).norm();
    res.consistent = res.residual <= tol * (1.0 + ytilde.norm());
    return res;
}

AgreementResult agreement_indices(const std::vector<Path>& Theta, int n_sub,
                                  int n_c) {
    if (Theta.empty())
        throw std::invalid_argument("agreement_indices: empty Theta");
    if (n_c < 1) throw std::invalid_argument("agreement_indices: n_c >= 1");
    AgreementResult out;
    const int nbar = std::max(n_sub - n_c, 0);
    for (int k = 0; k <= nbar; ++k) {
        bool agreed = true;
        Path run;
        for (int i = 0; i < n_c && agreed; ++i) {
            const int pos = k + i;
            if (pos > n_sub) continue;  // beyond the window end
            const int mode = Theta.front()[pos];
            for (const Path& th : Theta)
                if (th[pos] != mode) {
                    agreed = false;
                    break;
                }
            if (agreed) run.push_back(mode);
        }
        if (agreed) {
            out.indices.push_back(k);
            out.agreed_runs.emplace_back(k, std::move(run));
        }
    }
    return out;
}

std::vector<Path> update_theta(const Model& m,
                               const std::vector<Path>& theta_prev, bool grew,
                               const Vector& y, const Vector& u, double tol) {
    std::set<Path> candidates;
    for (const Path& th : theta_prev) {
        Path base = th;
        if (!grew) base.erase(base.begin());  // window slid: drop oldest
        for (int mode = 0; mode < m.n_modes; ++mode) {
            Path cand = base;
            cand.push_back(mode);
            candidates.insert(std::move(cand));
        }
    }
    std::vector<Path> out;
    for (const Path& cand : candidates)
        if (is_consistent(m, cand, y, u, tol).consistent) out.push_back(cand);
    return out;  // std::set iteration is already lexicographic
}

std::pair<Vector, bool> recover_state(const Model& m, const Path& path,
                                      const Vector& y, const Vector& u,
                                      double tol) {
    ConsistencyResult res = is_consistent(m, path, y, u, tol);
    if (!res.consistent)
        throw std::invalid_argument("recover_state: path not consistent");
    return {res.x_ls, is_pathwise_observable(m, path)};
}

Observer::Observer(const Model& m, const Vector& y0, int n_c,
                   bool pathwise_rank_required, double tol)
    : model_(m),
      n_c_(n_c),
      pathwise_rank_required_(pathwise_rank_required),
      tol_(tol) {
    model_.validate();
    if (n_c_ < 1) throw std::invalid_argument("Observer: n_c >= 1");
    reseed(y0);
    refresh_agreement();
}

Vector Observer::window_outputs() const {
    Vector y((Eigen::Index)y_win_.size() * model_.ny);
    for (size_t k = 0; k < y_win_.size(); ++k)
        y.segment((Eigen::Index)k * model_.ny, model_.ny) = y_win_[k];
    return y;
}

Vector Observer::window_controls() const {
    Vector u((Eigen::Index)u_win_.size() * model_.na);
    for (size_t k = 0; k < u_win_.size(); ++k)
        u.segment((Eigen::Index)k * model_.na, model_.na) = u_win_[k];
    return u;
}

void Observer::reseed(const Vector& y_new) {
    y_win_.clear();
    u_win_.clear();
    y_win_.push_back(y_new);
    theta_.clear();
    const Vector u_empty(0);
    for (int mode = 0; mode < model_.n_modes; ++mode)
        if (is_consistent(model_, {mode}, y_new, u_empty, tol_).consistent)
            theta_.push_back({mode});
    harvest_cursor_ = t_;  // never emit pairs spanning a reset
}

void Observer::refresh_agreement() {
    if (theta_.empty()) {
        agreement_ = AgreementResult{};
        grow_pending_ = true;
        return;
    }
    agreement_ = agreement_indices(theta_, subscript(), n_c_);
    bool ok = !agreement_.indices.empty();
    if (ok && pathwise_rank_required_) {
        for (const Path& th : theta_)
            if (!is_pathwise_observable(model_, th)) {
                ok = false;
                break;
            }
    }
    grow_pending_ = !ok;
}

void Observer::harvest(ObserverEvents& ev) {
    if (theta_.empty()) return;
    const Path& ref = theta_.front();
    const int n_sub = subscript();
    for (int k : agreement_.indices) {
        if (k + n_c_ - 1 > n_sub) continue;  // run not fully in the window
        for (int i = 0; i + 1 < n_c_; ++i) {
            const long long abs_time = (long long)t_ - n_sub + k + i;
            if (abs_time <= harvest_cursor_) continue;
            ev.harvested.emplace_back(ref[k + i], ref[k + i + 1]);
            harvest_cursor_ = abs_time;
        }
    }
}

ObserverEvents Observer::step(const Vector& y_new, const Vector& u_prev) {
    if (y_new.size() != model_.ny || u_prev.size() != model_.na)
        throw std::invalid_argument("Observer::step: shape mismatch");
    ObserverEvents ev;
    const bool grew = grow_pending_;
    std::vector<long long> before_abs;
    for (int k : agreement_.indices)
        before_abs.push_back((long long)t_ - subscript() + k);
    ++t_;
    y_win_.push_back(y_new);
    u_win_.push_back(u_prev);
    if (!grew) {
        y_win_.pop_front();
        if (!u_win_.empty()) u_win_.pop_front();
    } else {
        ev.window_grown = true;
    }
    theta_ = update_theta(model_, theta_, grew, window_outputs(),
                          window_controls(), tol_);
    if (theta_.empty()) {
        ev.reset = true;
        ev.window_grown = false;
        reseed(y_new);
    }
    refresh_agreement();
    if (!ev.reset) harvest(ev);
    for (int k : agreement_.indices) {
        const long long abs_time = (long long)t_ - subscript() + k;
        if (std::find(before_abs.begin(), before_abs.end(), abs_time) ==
            before_abs.end())
            ev.resolved_indices.push_back(k);
    }
    return ev;
}

}  // namespace mjls
