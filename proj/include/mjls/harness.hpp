#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mjls/ambiguity.hpp"
#include "mjls/control.hpp"
#include "mjls/core.hpp"
#include "mjls/estimator.hpp"

namespace mjls::harness {

enum class ControllerKind {
    none,          // u = 0
    random_input,  // u ~ N(0, I): estimation-only runs
    robust,        // synthesized once against the empty-data (full simplex) set
    stochastic,    // synthesized once against the true transition rows
    dr             // starts as robust; re-synthesized from learned ambiguity
};

ControllerKind controller_kind_from_string(const std::string& s);
std::string to_string(ControllerKind k);

struct DisturbanceSpec {
    int time = -1;  // step at which dx is added to the state; -1 = never
    Vector dx;
};

struct ExperimentConfig {
    ControllerKind kind = ControllerKind::random_input;
    int T = 100;
    std::uint64_t seed = 0;
    int n_c = 2;
    double epsilon = 1e-6;  // dither variance: u = K y + e, e ~ N(0, eps I)
    DisturbanceSpec disturbance;
    int synth_period = 10;           // DR re-synthesis cadence
    double radius_trigger = 0.10;    // also re-synthesize on >10% radius change
    Vector x0;                       // empty -> all-ones
    int theta0 = 0;
    control::SynthesisOptions synth;
};

struct StepRecord {
    int t = 0;
    int mode = 0;  // ground-truth mode, 0-based (1-based in CSV)
    Vector x, y, u;
    double x_norm = 0.0;
    int window = 0;       // buffered measurements in the observer
    int theta_count = 0;  // |Theta_t|
    std::vector<double> radii;  // per-mode ambiguity radii (inf when no data)
    int gain_id = 0;            // 0 = no gain; increments when a gain is adopted
    std::string events;         // semicolon-joined: grow,reset,synth,adopt,disturb
};

struct TrajectoryRecord {
    std::vector<StepRecord> steps;  // length T+1
    TransitionDataset counts{1};    // harvested transitions (persist across resets)
    long harvested_total = 0;
    long harvested_correct = 0;  // multiset overlap with the true transitions
    int resets = 0;
    int max_theta = 0;
    control::SynthesisReport initial_synthesis;  // kinds robust/stochastic/dr
    int first_gain_update_t = -1;  // first step where the DR gain changed
    bool coverage_ok = true;  // final ambiguity covers every sampled true row
};

// Closed-loop (or estimation-only) experiment. Deterministic under the seed.
// Throws std::invalid_argument on bad config and std::runtime_error when the
// initial synthesis fails for a gain-based controller kind.
TrajectoryRecord run_experiment(const Model& m, const ExperimentConfig& cfg);

// Stable CSV schema: one row per step; vectors expanded per coordinate.
std::string to_csv(const TrajectoryRecord& rec);

struct BatchSummary {
    int n_trials = 0;
    int terminal_window3 = 0;  // trials ending with a 3-measurement window
    std::vector<int> terminal_windows;
    int max_theta = 0;
    long harvested_total = 0;
    long harvested_correct = 0;
    int coverage_ok = 0;  // trials whose final ambiguity covers the true rows
    double mean_terminal_norm = 0.0;
};

// Independent trials with seeds cfg.seed + trial index; order-independent
// aggregation.
BatchSummary batch_trials(const Model& m, const ExperimentConfig& cfg,
                          int n_trials);

}  // namespace mjls::harness
