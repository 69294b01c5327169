#pragma once

#include <deque>
#include <vector>

#include "mjls/core.hpp"

namespace mjls {

struct ConsistencyResult {
    bool consistent = false;
    double residual = 0.0;
    Vector x_ls;  // minimum-norm least-squares initial state
};

// Residual test: || (I - O O^+) (y - G u) || <= tol * (1 + ||y - G u||).
ConsistencyResult is_consistent(const Model& m, const Path& path,
                                const Vector& y, const Vector& u,
                                double tol = 1e-8);

struct AgreementResult {
    std::vector<int> indices;  // window positions k where a run agrees
    // (start position, agreed modes over the run) for each index, in order.
    std::vector<std::pair<int, Path>> agreed_runs;
};

// Agreement index set over window positions [0, max(n_sub - n_c, 0)];
// a position k qualifies when every path in Theta carries identical modes at
// k .. k+n_c-1 (positions beyond the window end are ignored, which keeps
// single-mode systems from growing their window forever).
AgreementResult agreement_indices(const std::vector<Path>& Theta, int n_sub,
                                  int n_c);

// One incremental consistent-set update. `grew` says whether the window was
// extended this step; otherwise each previous path drops its oldest mode
// before being extended by every mode. Result is lexicographically sorted.
std::vector<Path> update_theta(const Model& m,
                               const std::vector<Path>& theta_prev, bool grew,
                               const Vector& y, const Vector& u,
                               double tol = 1e-8);

// Minimum-norm initial state for a consistent path; unique iff O(path) has
// full column rank. Throws std::invalid_argument if the path is inconsistent.
std::pair<Vector, bool> recover_state(const Model& m, const Path& path,
                                      const Vector& y, const Vector& u,
                                      double tol = 1e-8);

struct ObserverEvents {
    bool window_grown = false;
    bool reset = false;
    // Newly harvested agreed transitions (from_mode, to_mode), 0-based.
    std::vector<std::pair<int, int>> harvested;
    // Window positions whose modes became agreed this step.
    std::vector<int> resolved_indices;
};

// Receding-horizon mode observer. The window-size counter window_size()
// reports the number of buffered measurements; the trailing-subscript count
// used by the agreement bound is window_size() - 1.
class Observer {
  public:
    Observer(const Model& m, const Vector& y0, int n_c = 2,
             bool pathwise_rank_required = false, double tol = 1e-8);

    // Advance one step: u_prev is the control applied between the previous
    // and the new measurement.
    ObserverEvents step(const Vector& y_new, const Vector& u_prev);

    int t() const { return t_; }
    int window_size() const { return (int)y_win_.size(); }
    int subscript() const { return (int)y_win_.size() - 1; }
    const std::vector<Path>& theta() const { return theta_; }
    const AgreementResult& agreement() const { return agreement_; }
    bool grow_pending() const { return grow_pending_; }
    Vector window_outputs() const;
    Vector window_controls() const;

  private:
    void reseed(const Vector& y_new);
    void refresh_agreement();
    void harvest(ObserverEvents& ev);

    Model model_;
    int n_c_;
    bool pathwise_rank_required_;
    double tol_;
    int t_ = 0;
    std::deque<Vector> y_win_, u_win_;
    std::vector<Path> theta_;
    AgreementResult agreement_;
    bool grow_pending_ = false;
    long long harvest_cursor_ = -1;  // absolute time of last harvested pair
};

}  // namespace mjls
