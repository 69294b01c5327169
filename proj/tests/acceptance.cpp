// Acceptance suite: one pass/fail line per criterion, tolerances pinned
// below. Exit code = number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mjls/ambiguity.hpp"
#include "mjls/control.hpp"
#include "mjls/core.hpp"
#include "mjls/estimator.hpp"
#include "mjls/harness.hpp"
#include "mjls/observability.hpp"

using namespace mjls;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s  (%s)\n", id, pass ? "PASS" : "FAIL",
                detail.c_str());
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

Matrix rand_mat(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> g;
    Matrix M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = g(rng);
    return M;
}

std::vector<std::vector<Vector>> singleton_rows(const Matrix& P) {
    std::vector<std::vector<Vector>> v(P.rows());
    for (int i = 0; i < P.rows(); ++i) v[i].push_back(P.row(i).transpose());
    return v;
}

std::vector<std::vector<Vector>> full_simplex(int M) {
    std::vector<Vector> units;
    for (int j = 0; j < M; ++j) {
        Vector e = Vector::Zero(M);
        e(j) = 1.0;
        units.push_back(e);
    }
    return std::vector<std::vector<Vector>>(M, units);
}

// ---------------------------------------------------------------------------
// criterion 1: window convergence on the shipped 2-mode benchmark
// ---------------------------------------------------------------------------
void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    Model m = load_model("models/va.json");
    harness::ExperimentConfig cfg;
    cfg.kind = harness::ControllerKind::random_input;
    cfg.T = 200;
    cfg.n_c = 2;
    cfg.seed = 1;
    auto sum = harness::batch_trials(m, cfg, 100);
    const double dt = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "terminal window=3 in %d/100 trials, max |Theta|=%d, %.1fs",
                  sum.terminal_window3, sum.max_theta, dt);
    report(1, sum.terminal_window3 == 100 && sum.max_theta <= 4 && dt < 30.0,
           buf);
}

// ---------------------------------------------------------------------------
// criterion 2: incremental consistent sets equal brute-force enumeration
// ---------------------------------------------------------------------------
void criterion2() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> coin(0, 1);
    long mismatches = 0;
    for (int sys = 0; sys < 200; ++sys) {
        Model m;
        m.n_modes = 2;
        m.ns = 2;
        m.na = 1;
        m.ny = 1 + coin(rng);
        for (int i = 0; i < 2; ++i) {
            m.A.push_back(rand_mat(rng, 2, 2));
            m.B.push_back(rand_mat(rng, 2, 1));
            m.C.push_back(rand_mat(rng, m.ny, 2));
        }
        Vector x = rand_mat(rng, 2, 1);
        std::vector<int> modes;
        std::vector<Vector> ys;
        std::vector<double> us;
        for (int k = 0; k <= 4; ++k) {
            modes.push_back(coin(rng));
            ys.push_back(m.C[modes[k]] * x);
            const double u = rand_mat(rng, 1, 1)(0, 0);
            us.push_back(u);
            x = m.A[modes[k]] * x + m.B[modes[k]] * Vector::Constant(1, u);
        }
        // incremental maintenance over a growing window
        std::vector<Path> theta;
        for (int j = 0; j < 2; ++j)
            if (is_consistent(m, {j}, ys[0], Vector(0)).consistent)
                theta.push_back({j});
        for (int N = 1; N <= 4; ++N) {
            Vector y(m.ny * (N + 1)), u(N);
            for (int k = 0; k <= N; ++k) y.segment(k * m.ny, m.ny) = ys[k];
            for (int k = 0; k < N; ++k) u(k) = us[k];
            theta = update_theta(m, theta, /*grew=*/true, y, u);
            // brute force: all 2^(N+1) paths under the same residual test
            std::vector<Path> brute;
            for (int mask = 0; mask < (1 << (N + 1)); ++mask) {
                Path p(N + 1);
                for (int k = 0; k <= N; ++k) p[k] = (mask >> k) & 1;
                if (is_consistent(m, p, y, u).consistent) brute.push_back(p);
            }
            std::sort(brute.begin(), brute.end());
            if (theta != brute) ++mismatches;
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%ld mismatches over 200 systems, N<=4",
                  mismatches);
    report(2, mismatches == 0, buf);
}

// ---------------------------------------------------------------------------
// criterion 3: the shipped benchmark is not mode observable for N <= 5
// ---------------------------------------------------------------------------
void criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    Model m = load_model("models/va.json");
    int holds = 0, checked = 0;
    for (int N = 1; N <= 5; ++N)
        for (int a = 0; a < N; ++a)
            for (int w = 0; a + w < N; ++w) {
                auto cert = check_mo(m, N, a, w, 50'000'000);
                ++checked;
                if (cert.holds) ++holds;
            }
    const double dt = seconds_since(t0);
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "%d/%d (alpha,omega,N<=5) certificates hold, %.1fs", holds,
                  checked, dt);
    report(3, holds == 0 && dt < 10.0, buf);
}

// ---------------------------------------------------------------------------
// criterion 4: radius value + vertex enumeration vs an independent oracle
// ---------------------------------------------------------------------------
std::vector<Vector> oracle_vertices(const Vector& p_hat, double r) {
    // Independent facet-subset brute force: no shortcuts, QR solves.
    const int M = (int)p_hat.size();
    std::vector<std::pair<Vector, double>> facets;  // a.p <= b
    for (int k = 0; k < M; ++k) {
        Vector a = Vector::Zero(M);
        a(k) = -1.0;
        facets.push_back({a, 0.0});  // -p_k <= 0
    }
    for (int mask = 0; mask < (1 << M); ++mask) {
        Vector s(M);
        for (int k = 0; k < M; ++k) s(k) = (mask >> k) & 1 ? 1.0 : -1.0;
        facets.push_back({s, s.dot(p_hat) + r});
    }
    std::vector<Vector> verts;
    std::vector<int> idx(M - 1);
    const int F = (int)facets.size();
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == M - 1) {
            Matrix A(M, M);
            Vector b(M);
            A.row(0).setOnes();
            b(0) = 1.0;
            for (int d = 0; d < M - 1; ++d) {
                A.row(d + 1) = facets[idx[d]].first.transpose();
                b(d + 1) = facets[idx[d]].second;
            }
            Eigen::ColPivHouseholderQR<Matrix> qr(A);
            if (qr.rank() < M) return;
            Vector p = qr.solve(b);
            if ((A * p - b).norm() > 1e-8) return;
            for (const auto& [a, bb] : facets)
                if (a.dot(p) > bb + 1e-9) return;
            for (const auto& v : verts)
                if ((v - p).lpNorm<1>() < 1e-7) return;
            verts.push_back(p);
            return;
        }
        for (int f = start; f < F; ++f) {
            idx[depth] = f;
            rec(f + 1, depth + 1);
        }
    };
    rec(0, 0);
    return verts;
}

void criterion4() {
    const double r_val = radius(100, 2, 0.5);
    bool ok = std::abs(r_val - 0.20394) <= 1e-4;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int bad = 0, total = 0;
    for (int M = 2; M <= 4; ++M)
        for (int inst = 0; inst < 100; ++inst) {
            Vector p(M);
            for (int k = 0; k < M; ++k) p(k) = -std::log(unif(rng));
            p /= p.sum();
            const double r = 2.5 * unif(rng);
            auto got = l1_simplex_vertices(p, r);
            auto want = oracle_vertices(p, r);
            ++total;
            bool match = got.size() == want.size();
            if (match)
                for (const auto& g : got) {
                    bool found = false;
                    for (const auto& w : want)
                        if ((g - w).lpNorm<1>() < 1e-7) found = true;
                    if (!found) match = false;
                }
            if (!match) ++bad;
        }
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "radius(100,2,0.5)=%.5f, %d/%d oracle mismatches", r_val,
                  bad, total);
    report(4, ok && bad == 0, buf);
}

// ---------------------------------------------------------------------------
// criterion 5: Monte Carlo coverage of the ambiguity radius
// ---------------------------------------------------------------------------
void criterion5() {
    const int trials = 2000, n = 50;
    const double beta = 0.1;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double r = radius(n, 2, beta);
    int covered = 0;
    for (int t = 0; t < trials; ++t) {
        const double p1 = unif(rng);
        int c1 = 0;
        for (int k = 0; k < n; ++k)
            if (unif(rng) < p1) ++c1;
        const double l1 = 2.0 * std::abs(p1 - (double)c1 / n);
        if (l1 <= r) ++covered;
    }
    const double rate = (double)covered / trials;
    const double sigma = std::sqrt(beta * (1 - beta) / trials);
    const double floor = 1.0 - beta - 3.0 * sigma;
    char buf[96];
    std::snprintf(buf, sizeof buf, "coverage %.4f >= %.4f", rate, floor);
    report(5, rate >= floor, buf);
}

// ---------------------------------------------------------------------------
// criterion 6: synthesis soundness (stochastic + full-simplex robust)
// ---------------------------------------------------------------------------
void criterion6() {
    Model m = load_model("models/vb.json");

    auto t0 = std::chrono::steady_clock::now();
    auto stoch = control::synthesize_gain(m, singleton_rows(*m.P));
    const double dt_s = seconds_since(t0);
    const bool ok_s = stoch.ok && stoch.gamma < 0 &&
                      stoch.cert.worst_margin >= -1e-6 && dt_s < 60.0;

    t0 = std::chrono::steady_clock::now();
    control::SynthesisOptions strict;
    strict.allow_shrink = false;
    auto rob = control::synthesize_gain(m, full_simplex(2), strict);
    const double dt_r = seconds_since(t0);
    const bool ok_r = rob.ok && rob.gamma < 0 &&
                      rob.cert.worst_margin >= -1e-6 && dt_r < 60.0;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "stochastic: ok=%d gamma=%.3g margin=%.2e %.1fs | robust "
                  "(full simplex): ok=%d %.1fs",
                  (int)stoch.ok, stoch.gamma, stoch.cert.worst_margin, dt_s,
                  (int)rob.ok, dt_r);
    report(6, ok_s && ok_r, buf);
    if (!ok_r) {
        std::printf(
            "  analysis: the robust half is structurally unattainable for this "
            "plant.\n"
            "  In mode 1 the input matrix has a zero second row and the output "
            "matrix has rank one,\n"
            "  so for every static gain K the closed-loop matrix of mode 1 "
            "keeps its (2,2) entry at 1.1\n"
            "  and its (2,1) entry at 0: the eigenvalue 1.1 is fixed. The "
            "degenerate simplex vertex that\n"
            "  locks the chain into mode 1 then forces a spectral radius >= "
            "1.1, so no gain can satisfy the\n"
            "  vertex certificate over the full simplex. The pipeline instead "
            "falls back to a contracted\n"
            "  vertex set (see the synthesis options); this criterion is "
            "reported red by design rather than\n"
            "  weakening the check.\n");
    }
}

// ---------------------------------------------------------------------------
// criterion 7: closed-loop mean-square decay of the stochastic controller
// ---------------------------------------------------------------------------
void criterion7() {
    Model m = load_model("models/vb.json");
    harness::ExperimentConfig cfg;
    cfg.kind = harness::ControllerKind::stochastic;
    cfg.T = 40;
    cfg.x0 = Vector::Ones(2);
    double num = 0.0, den = 0.0;
    for (int s = 0; s < 50; ++s) {
        cfg.seed = 100 + s;
        auto rec = harness::run_experiment(m, cfg);
        num += rec.steps[40].x_norm * rec.steps[40].x_norm;
        den += rec.steps[0].x_norm * rec.steps[0].x_norm;
    }
    const double ratio = num / den;
    char buf[96];
    std::snprintf(buf, sizeof buf, "mean ||x_40||^2 / ||x_0||^2 = %.3e < 1e-2",
                  ratio);
    report(7, ratio < 1e-2, buf);
}

// ---------------------------------------------------------------------------
// criterion 8: disturbance rejection, learned (dr) vs robust controller
// ---------------------------------------------------------------------------
void criterion8() {
    Model m = load_model("models/vb.json");
    const int T = 100, t_dist = 50;
    auto recovery = [&](const harness::TrajectoryRecord& rec) {
        const double thresh = 0.05 * rec.steps[t_dist].x_norm;
        for (int t = t_dist + 1; t <= T; ++t)
            if (rec.steps[t].x_norm <= thresh) return t;
        return T + 1;
    };
    int dr_wins = 0, identity_ok = 0;
    long transitions_by_tdist = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        harness::ExperimentConfig cfg;
        cfg.T = T;
        cfg.seed = 500 + s;
        cfg.x0 = Vector::Ones(2);
        cfg.disturbance.time = t_dist;
        cfg.disturbance.dx = Vector::Constant(2, 10.0);
        cfg.kind = harness::ControllerKind::robust;
        auto rob = harness::run_experiment(m, cfg);
        cfg.kind = harness::ControllerKind::dr;
        auto dr = harness::run_experiment(m, cfg);
        if (recovery(dr) <= recovery(rob)) ++dr_wins;
        // identical trajectories before the first adopted gain update
        const int split =
            dr.first_gain_update_t < 0 ? T : dr.first_gain_update_t;
        bool same = (rob.initial_synthesis.K - dr.initial_synthesis.K).norm() == 0.0;
        for (int t = 0; t <= split && same; ++t)
            if ((rob.steps[t].x - dr.steps[t].x).norm() != 0.0) same = false;
        if (same) ++identity_ok;
        transitions_by_tdist += dr.harvested_total;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "dr recovery <= robust in %d/%d seeds (need >=30); "
                  "pre-update identity in %d/%d",
                  dr_wins, seeds, identity_ok, seeds);
    report(8, dr_wins >= 30 && identity_ok == seeds, buf);
    std::printf(
        "  note: the stated precondition of >=100 observed transitions by "
        "t=50 is unattainable in a\n"
        "  single run (a 50-step prefix contains at most 49 transitions); the "
        "comparison is evaluated\n"
        "  on the shipped disturbance configuration regardless.\n");
}

// ---------------------------------------------------------------------------
// criterion 9: inclusion properties and certificate extension
// ---------------------------------------------------------------------------
void criterion9() {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> coin(0, 1);
    long violations = 0;
    for (int inst = 0; inst < 10'000; ++inst) {
        Model m;
        m.n_modes = 2;
        m.ns = 2;
        m.na = 1;
        m.ny = 1 + coin(rng);
        for (int i = 0; i < 2; ++i) {
            m.A.push_back(rand_mat(rng, 2, 2));
            m.B.push_back(rand_mat(rng, 2, 1));
            m.C.push_back(rand_mat(rng, m.ny, 2));
        }
        Vector x = rand_mat(rng, 2, 1);
        std::vector<Vector> ys;
        std::vector<double> us;
        std::vector<int> modes;
        for (int k = 0; k <= 2; ++k) {
            modes.push_back(coin(rng));
            ys.push_back(m.C[modes[k]] * x);
            const double u = rand_mat(rng, 1, 1)(0, 0);
            us.push_back(u);
            x = m.A[modes[k]] * x + m.B[modes[k]] * Vector::Constant(1, u);
        }
        Vector y3(3 * m.ny), u3(2);
        for (int k = 0; k < 3; ++k) y3.segment(k * m.ny, m.ny) = ys[k];
        u3 << us[0], us[1];
        Vector y_head = y3.head(2 * m.ny), y_tail = y3.tail(2 * m.ny);
        Vector u_head = u3.head(1), u_tail = u3.tail(1);
        for (int mask = 0; mask < 8; ++mask) {
            Path p{mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
            if (!is_consistent(m, p, y3, u3).consistent) continue;
            // consistent on the full window => consistent after dropping the
            // newest measurement, and after sliding off the oldest
            if (!is_consistent(m, {p[0], p[1]}, y_head, u_head).consistent)
                ++violations;
            if (!is_consistent(m, {p[1], p[2]}, y_tail, u_tail).consistent)
                ++violations;
        }
    }

    // certificate extension: an (N, alpha, omega) certificate implies the
    // (N+1, alpha, omega+1) certificate (same core positions, longer window)
    std::mt19937_64 rng2(99);
    std::normal_distribution<double> g;
    int certified = 0, extension_failures = 0;
    for (int sys = 0; sys < 300; ++sys) {
        Model m;
        m.n_modes = 2;
        m.ns = 2;
        m.na = 1;
        m.ny = 3;
        for (int i = 0; i < 2; ++i) {
            // rank-deficient dynamics so short-window certificates can exist
            Matrix u1 = rand_mat(rng2, 2, 1), v1 = rand_mat(rng2, 2, 1);
            m.A.push_back(u1 * v1.transpose());
            m.B.push_back(rand_mat(rng2, 2, 1));
            m.C.push_back(rand_mat(rng2, 3, 2));
        }
        for (int N = 1; N <= 3; ++N)
            for (int a = 0; a < N; ++a)
                for (int w = 0; a + w < N; ++w) {
                    auto cert = check_mo(m, N, a, w, 5'000'000);
                    if (!cert.holds) continue;
                    ++certified;
                    auto ext = check_mo(m, N + 1, a, w + 1, 5'000'000);
                    if (!ext.holds) ++extension_failures;
                }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%ld inclusion violations / 10^4 instances; %d/%d "
                  "certificate extensions hold",
                  violations, certified - extension_failures, certified);
    report(9, violations == 0 && extension_failures == 0 && certified > 0, buf);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures;
}
