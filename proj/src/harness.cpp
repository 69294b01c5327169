#include "mjls/harness.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mjls::harness {

ControllerKind controller_kind_from_string(const std::string& s) {
    if (s == "none") return ControllerKind::none;
    if (s == "random") return ControllerKind::random_input;
    if (s == "robust") return ControllerKind::robust;
    if (s == "stochastic") return ControllerKind::stochastic;
    if (s == "dr") return ControllerKind::dr;
    throw std::invalid_argument("unknown controller kind: " + s);
}

std::string to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::none: return "none";
        case ControllerKind::random_input: return "random";
        case ControllerKind::robust: return "robust";
        case ControllerKind::stochastic: return "stochastic";
        case ControllerKind::dr: return "dr";
    }
    return "?";
}

namespace {

struct AmbiguityState {
    std::vector<std::vector<Vector>> vertices;
    std::vector<double> radii;
    Matrix p_hat;
};

AmbiguityState ambiguity_state(const TransitionDataset& ds, double beta) {
    const int M = ds.n_modes();
    AmbiguityState st;
    st.vertices.resize(M);
    st.radii.resize(M);
    st.p_hat = Matrix::Zero(M, M);
    for (int i = 0; i < M; ++i) {
        AmbiguitySet amb = build_ambiguity(ds, i, beta);
        st.vertices[i] = amb.vertices;
        st.radii[i] = amb.radius;
        st.p_hat.row(i) = amb.p_hat.transpose();
    }
    return st;
}

bool uses_gain(ControllerKind k) {
    return k == ControllerKind::robust || k == ControllerKind::stochastic ||
           k == ControllerKind::dr;
}

}  // namespace

TrajectoryRecord run_experiment(const Model& m, const ExperimentConfig& cfg) {
    m.validate();
    if (cfg.T < 1) throw std::invalid_argument("run_experiment: T >= 1");
    if (cfg.epsilon < 0) throw std::invalid_argument("run_experiment: eps >= 0");
    if (cfg.theta0 < 0 || cfg.theta0 >= m.n_modes)
        throw std::invalid_argument("run_experiment: bad theta0");
    const Matrix P = m.P.has_value()
                         ? *m.P
                         : Matrix::Constant(m.n_modes, m.n_modes,
                                            1.0 / m.n_modes);

    TrajectoryRecord rec;
    rec.counts = TransitionDataset(m.n_modes);

    const std::vector<int> modes =
        sample_chain(P, cfg.theta0, cfg.T, cfg.seed);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> gauss;

    // ---- initial gain ----
    Matrix K;
    int gain_id = 0;
    control::SynthesisReport held;
    long long last_synth_t = 0;
    std::vector<double> last_synth_radii;
    if (uses_gain(cfg.kind)) {
        control::SynthesisOptions opts = cfg.synth;
        std::vector<std::vector<Vector>> verts;
        if (cfg.kind == ControllerKind::stochastic) {
            if (!m.P.has_value())
                throw std::invalid_argument(
                    "stochastic controller needs a known transition matrix");
            verts.resize(m.n_modes);
            for (int i = 0; i < m.n_modes; ++i)
                verts[i].push_back(m.P->row(i).transpose());
        } else {
            // Empty-data ambiguity: full simplex for every row. Plants that
            // admit no full-simplex certificate fall back to a contracted set
            // instead of aborting, so comparative runs stay possible.
            opts.allow_shrink = true;
            AmbiguityState st = ambiguity_state(rec.counts, beta_schedule(0));
            verts = st.vertices;
            last_synth_radii = st.radii;
        }
        held = control::synthesize_gain(m, verts, opts);
        if (!held.ok)
            throw std::runtime_error("initial synthesis infeasible for " +
                                     to_string(cfg.kind) + " controller");
        K = held.K;
        gain_id = 1;
        rec.initial_synthesis = held;
    }

    // ---- simulate ----
    Vector x = cfg.x0.size() ? cfg.x0 : Vector::Ones(m.ns);
    if ((int)x.size() != m.ns)
        throw std::invalid_argument("run_experiment: bad x0 dimension");
    std::string events0;
    if (cfg.disturbance.time == 0) {
        x += cfg.disturbance.dx;
        events0 = "disturb";
    }
    Vector y = m.C[modes[0]] * x;
    Observer obs(m, y, cfg.n_c);

    AmbiguityState amb = ambiguity_state(rec.counts, beta_schedule(0));

    auto record = [&](int t, const Vector& u, const std::string& ev) {
        StepRecord s;
        s.t = t;
        s.mode = modes[t];
        s.x = x;
        s.y = y;
        s.u = u;
        s.x_norm = x.norm();
        s.window = obs.window_size();
        s.theta_count = (int)obs.theta().size();
        s.radii = amb.radii;
        s.gain_id = gain_id;
        s.events = ev;
        rec.max_theta = std::max(rec.max_theta, s.theta_count);
        rec.steps.push_back(std::move(s));
    };

    Vector u_zero = Vector::Zero(m.na);
    record(0, u_zero, events0);

    for (int t = 0; t < cfg.T; ++t) {
        // control applied between t and t+1
        Vector u(m.na);
        switch (cfg.kind) {
            case ControllerKind::none:
                u.setZero();
                break;
            case ControllerKind::random_input:
                for (int k = 0; k < m.na; ++k) u(k) = gauss(rng);
                break;
            default: {
                u = K * y;
                if (cfg.epsilon > 0) {
                    const double sd = std::sqrt(cfg.epsilon);
                    for (int k = 0; k < m.na; ++k) u(k) += sd * gauss(rng);
                }
            }
        }
        rec.steps.back().u = u;

        x = m.A[modes[t]] * x + m.B[modes[t]] * u;
        std::string ev;
        if (cfg.disturbance.time == t + 1) {
            if ((int)cfg.disturbance.dx.size() != m.ns)
                throw std::invalid_argument("run_experiment: bad disturbance");
            x += cfg.disturbance.dx;
            ev = "disturb";
        }
        y = m.C[modes[t + 1]] * x;

        ObserverEvents oev = obs.step(y, u);
        if (oev.window_grown) ev += ev.empty() ? "grow" : ";grow";
        if (oev.reset) {
            ++rec.resets;
            ev += ev.empty() ? "reset" : ";reset";
        }
        if (!oev.harvested.empty()) {
            rec.counts.add_pairs(oev.harvested);
            rec.harvested_total += (long)oev.harvested.size();
        }
        amb = ambiguity_state(rec.counts, beta_schedule(t + 1));

        // DR re-synthesis cadence / radius trigger
        if (cfg.kind == ControllerKind::dr) {
            bool due = (t + 1 - last_synth_t) >= cfg.synth_period;
            if (!due)
                for (size_t i = 0; i < amb.radii.size(); ++i) {
                    const double then = last_synth_radii[i];
                    const double now = amb.radii[i];
                    if (std::isinf(then) != std::isinf(now) ||
                        (std::isfinite(then) &&
                         std::abs(now - then) > cfg.radius_trigger * then)) {
                        due = true;
                        break;
                    }
                }
            if (due) {
                last_synth_t = t + 1;
                last_synth_radii = amb.radii;
                ev += ev.empty() ? "synth" : ";synth";
                control::SynthesisOptions opts = cfg.synth;
                opts.allow_shrink = true;
                auto cand = control::synthesize_gain(m, amb.vertices, opts);
                if (cand.ok) {
                    const double rho_new =
                        control::ms_spectral_radius(m, cand.K, amb.p_hat);
                    const double rho_old =
                        control::ms_spectral_radius(m, K, amb.p_hat);
                    // adopt only on a material improvement of the certified
                    // decay at the current point estimate; swapping gains on
                    // sub-percent differences is churn, not learning
                    if (rho_new < 0.99 * rho_old) {
                        K = cand.K;
                        held = cand;
                        ++gain_id;
                        if (rec.first_gain_update_t < 0)
                            rec.first_gain_update_t = t + 1;
                        ev += ";adopt";
                    }
                }
            }
        }

        record(t + 1, u_zero, ev);
    }

    // multiset overlap of harvested transitions with the ground truth
    Eigen::MatrixXi truth = Eigen::MatrixXi::Zero(m.n_modes, m.n_modes);
    for (int t = 0; t < cfg.T; ++t) ++truth(modes[t], modes[t + 1]);
    for (int i = 0; i < m.n_modes; ++i)
        for (int j = 0; j < m.n_modes; ++j)
            rec.harvested_correct += std::min(rec.counts.counts(i, j), truth(i, j));

    if (m.P.has_value()) {
        for (int i = 0; i < m.n_modes; ++i) {
            AmbiguitySet a = build_ambiguity(rec.counts, i, beta_schedule(cfg.T));
            if (!coverage_check(m.P->row(i).transpose(), a))
                rec.coverage_ok = false;
        }
    }
    return rec;
}

std::string to_csv(const TrajectoryRecord& rec) {
    std::ostringstream os;
    os.precision(17);
    if (rec.steps.empty()) return "";
    const auto& s0 = rec.steps[0];
    os << "t,mode";
    for (int i = 0; i < s0.x.size(); ++i) os << ",x" << i + 1;
    for (int i = 0; i < s0.y.size(); ++i) os << ",y" << i + 1;
    for (int i = 0; i < s0.u.size(); ++i) os << ",u" << i + 1;
    os << ",x_norm,window,n_theta";
    for (size_t i = 0; i < s0.radii.size(); ++i) os << ",radius" << i + 1;
    os << ",gain_id,events\n";
    for (const auto& s : rec.steps) {
        os << s.t << ',' << s.mode + 1;
        for (int i = 0; i < s.x.size(); ++i) os << ',' << s.x(i);
        for (int i = 0; i < s.y.size(); ++i) os << ',' << s.y(i);
        for (int i = 0; i < s.u.size(); ++i) os << ',' << s.u(i);
        os << ',' << s.x_norm << ',' << s.window << ',' << s.theta_count;
        for (double r : s.radii) {
            os << ',';
            if (std::isinf(r))
                os << "inf";
            else
                os << r;
        }
        os << ',' << s.gain_id << ',' << s.events << '\n';
    }
    return os.str();
}

BatchSummary batch_trials(const Model& m, const ExperimentConfig& cfg,
                          int n_trials) {
    if (n_trials < 1) throw std::invalid_argument("batch_trials: n >= 1");
    BatchSummary sum;
    sum.n_trials = n_trials;
    double norm_acc = 0.0;
    for (int k = 0; k < n_trials; ++k) {
        ExperimentConfig c = cfg;
        c.seed = cfg.seed + (std::uint64_t)k;
        TrajectoryRecord rec = run_experiment(m, c);
        const auto& last = rec.steps.back();
        sum.terminal_windows.push_back(last.window);
        if (last.window == 3) ++sum.terminal_window3;
        sum.max_theta = std::max(sum.max_theta, rec.max_theta);
        sum.harvested_total += rec.harvested_total;
        sum.harvested_correct += rec.harvested_correct;
        if (rec.coverage_ok) ++sum.coverage_ok;
        norm_acc += last.x_norm;
    }
    sum.mean_terminal_norm = norm_acc / n_trials;
    return sum;
}

}  // namespace mjls::harness
