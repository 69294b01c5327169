#include "mjls.h"

#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include <json.hpp>

#include "mjls/ambiguity.hpp"
#include "mjls/control.hpp"
#include "mjls/core.hpp"
#include "mjls/estimator.hpp"
#include "mjls/harness.hpp"
#include "mjls/observability.hpp"

using nlohmann::json;

struct mjls_model {
    mjls::Model m;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int fail(int code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        int rc = fn();
        if (rc == MJLS_OK) g_last_error.clear();
        return rc;
    } catch (const json::exception& e) {
        return fail(MJLS_ERR_INVALID, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(MJLS_ERR_INVALID, e.what());
    } catch (const mjls::ResourceError& e) {
        return fail(MJLS_ERR_RESOURCE, e.what());
    } catch (const std::exception& e) {
        return fail(MJLS_ERR_INTERNAL, e.what());
    }
}

json matrix_to_json(const mjls::Matrix& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

mjls::Vector vector_from_json(const json& j) {
    mjls::Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

json vector_to_json(const mjls::Vector& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json path_to_json(const mjls::Path& p) {
    json out = json::array();
    for (int mode : p) out.push_back(mode + 1);
    return out;
}

// Stacked column vectors (y_0..y_T etc.) from an array of arrays.
std::vector<mjls::Vector> vectors_from_json(const json& j, int dim,
                                            const char* name) {
    std::vector<mjls::Vector> out;
    for (const auto& row : j) {
        if ((int)row.size() != dim)
            throw std::invalid_argument(std::string(name) +
                                        ": wrong entry dimension");
        out.push_back(vector_from_json(row));
    }
    return out;
}

mjls::harness::ExperimentConfig config_from_json(const mjls::Model& m,
                                                 const json& req) {
    mjls::harness::ExperimentConfig cfg;
    cfg.kind = mjls::harness::controller_kind_from_string(
        req.value("controller", std::string("random")));
    cfg.T = req.value("T", 100);
    cfg.seed = req.value("seed", (std::uint64_t)0);
    cfg.n_c = req.value("n_c", 2);
    cfg.epsilon = req.value("epsilon", 1e-6);
    cfg.theta0 = req.value("theta0", 1) - 1;  // 1-based outside
    cfg.synth_period = req.value("synth_period", 10);
    if (req.contains("x0")) cfg.x0 = vector_from_json(req.at("x0"));
    if (req.contains("disturbance")) {
        const auto& d = req.at("disturbance");
        cfg.disturbance.time = d.at("time").get<int>();
        cfg.disturbance.dx = vector_from_json(d.at("dx"));
        if ((int)cfg.disturbance.dx.size() != m.ns)
            throw std::invalid_argument("disturbance: dx dimension");
    }
    return cfg;
}

json summary_json(const mjls::harness::TrajectoryRecord& rec) {
    return json{{"terminal_window", rec.steps.back().window},
                {"max_theta", rec.max_theta},
                {"harvested_total", rec.harvested_total},
                {"harvested_correct", rec.harvested_correct},
                {"resets", rec.resets},
                {"coverage_ok", rec.coverage_ok},
                {"terminal_norm", rec.steps.back().x_norm},
                {"first_gain_update_t", rec.first_gain_update_t}};
}

}  // namespace

extern "C" {

const char* mjls_last_error(void) { return g_last_error.c_str(); }

int mjls_model_parse(const char* json_text, mjls_model** out) {
    return guarded([&] {
        if (!json_text || !out)
            throw std::invalid_argument("null argument");
        auto* h = new mjls_model{mjls::parse_model(json_text)};
        *out = h;
        return MJLS_OK;
    });
}

int mjls_model_load(const char* path, mjls_model** out) {
    return guarded([&] {
        if (!path || !out) throw std::invalid_argument("null argument");
        auto* h = new mjls_model{mjls::load_model(path)};
        *out = h;
        return MJLS_OK;
    });
}

int mjls_model_to_json(const mjls_model* model, char** out_json) {
    return guarded([&] {
        if (!model || !out_json) throw std::invalid_argument("null argument");
        *out_json = dup_string(mjls::model_to_json(model->m));
        return MJLS_OK;
    });
}

void mjls_model_free(mjls_model* model) { delete model; }

void mjls_string_free(char* s) { delete[] s; }

int mjls_estimate(const mjls_model* model, const char* request_json,
                  char** out_json) {
    return guarded([&] {
        if (!model || !request_json || !out_json)
            throw std::invalid_argument("null argument");
        const mjls::Model& m = model->m;
        json req = json::parse(request_json);
        auto ys = vectors_from_json(req.at("y"), m.ny, "y");
        auto us = req.contains("u")
                      ? vectors_from_json(req.at("u"), m.na, "u")
                      : std::vector<mjls::Vector>(
                            ys.empty() ? 0 : ys.size() - 1,
                            mjls::Vector::Zero(m.na));
        if (ys.empty()) throw std::invalid_argument("y: need at least one output");
        if (us.size() + 1 != ys.size())
            throw std::invalid_argument("u: need exactly one control per step");
        const int n_c = req.value("n_c", 2);
        const double tol = req.value("tol", 1e-8);

        mjls::Observer obs(m, ys[0], n_c, false, tol);
        json steps = json::array();
        auto snapshot = [&](int t, const mjls::ObserverEvents* ev) {
            json theta = json::array();
            for (const auto& p : obs.theta()) theta.push_back(path_to_json(p));
            json harvested = json::array();
            if (ev)
                for (auto [i, j] : ev->harvested)
                    harvested.push_back(json::array({i + 1, j + 1}));
            steps.push_back(json{{"t", t},
                                 {"window", obs.window_size()},
                                 {"n_theta", obs.theta().size()},
                                 {"theta", theta},
                                 {"grown", ev ? ev->window_grown : false},
                                 {"reset", ev ? ev->reset : false},
                                 {"harvested", harvested}});
        };
        snapshot(0, nullptr);
        for (size_t t = 0; t + 1 < ys.size(); ++t) {
            mjls::ObserverEvents ev = obs.step(ys[t + 1], us[t]);
            snapshot((int)t + 1, &ev);
        }
        *out_json = dup_string(json{{"steps", std::move(steps)}}.dump());
        return MJLS_OK;
    });
}

int mjls_observability(const mjls_model* model, const char* request_json,
                       char** out_json) {
    return guarded([&] {
        if (!model || !out_json) throw std::invalid_argument("null argument");
        json req = request_json ? json::parse(request_json) : json::object();
        const int n_max = req.value("n_max", 3);
        const long budget = req.value("budget", (long)2'000'000);
        if (n_max < 1) throw std::invalid_argument("n_max >= 1");
        json results = json::array();
        json weak_index = nullptr;
        for (int N = 1; N <= n_max; ++N)
            for (int alpha = 0; alpha < N; ++alpha)
                for (int omega = 0; alpha + omega < N; ++omega) {
                    auto cert = mjls::check_mo(model->m, N, alpha, omega, budget);
                    json r{{"N", N},
                           {"alpha", alpha},
                           {"omega", omega},
                           {"holds", cert.holds},
                           {"pairs_tested", cert.pairs_tested}};
                    if (cert.witness_pair)
                        r["witness"] =
                            json::array({path_to_json(cert.witness_pair->first),
                                         path_to_json(cert.witness_pair->second)});
                    if (cert.holds && weak_index.is_null()) weak_index = N;
                    results.push_back(std::move(r));
                }
        *out_json = dup_string(
            json{{"results", std::move(results)}, {"weak_index", weak_index}}
                .dump());
        return MJLS_OK;
    });
}

int mjls_synthesize(const mjls_model* model, const char* request_json,
                    char** out_json) {
    return guarded([&] {
        if (!model || !request_json || !out_json)
            throw std::invalid_argument("null argument");
        const mjls::Model& m = model->m;
        json req = json::parse(request_json);
        const std::string kind = req.at("kind").get<std::string>();

        std::vector<std::vector<mjls::Vector>> verts(m.n_modes);
        mjls::control::SynthesisOptions opts;
        if (kind == "stochastic") {
            if (!m.P.has_value())
                throw std::invalid_argument(
                    "stochastic synthesis needs a known transition matrix");
            for (int i = 0; i < m.n_modes; ++i)
                verts[i].push_back(m.P->row(i).transpose());
        } else if (kind == "robust" || kind == "dr") {
            mjls::TransitionDataset ds(m.n_modes);
            if (kind == "dr" && req.contains("counts")) {
                const auto& c = req.at("counts");
                if ((int)c.size() != m.n_modes)
                    throw std::invalid_argument("counts: wrong row count");
                for (int i = 0; i < m.n_modes; ++i)
                    for (int j = 0; j < m.n_modes; ++j)
                        ds.counts(i, j) = c[i][j].get<int>();
            }
            const double beta = req.value("beta", 0.05);
            for (int i = 0; i < m.n_modes; ++i)
                verts[i] = mjls::build_ambiguity(ds, i, beta).vertices;
            opts.allow_shrink = true;
        } else {
            throw std::invalid_argument("kind: robust, stochastic or dr");
        }
        if (req.contains("allow_shrink"))
            opts.allow_shrink = req.at("allow_shrink").get<bool>();

        auto rep = mjls::control::synthesize_gain(m, verts, opts);
        if (!rep.ok)
            return fail(MJLS_ERR_INFEASIBLE, "no certified gain found");
        json margins = json::array();
        for (double v : rep.cert.margins) margins.push_back(v);
        json Ms = json::array();
        for (const auto& Mi : rep.M) Ms.push_back(matrix_to_json(Mi));
        *out_json = dup_string(json{{"K", matrix_to_json(rep.K)},
                                    {"gamma", rep.gamma},
                                    {"alpha", rep.alpha},
                                    {"delta", rep.delta},
                                    {"shrink", rep.shrink},
                                    {"margins", std::move(margins)},
                                    {"worst_margin", rep.cert.worst_margin},
                                    {"M", std::move(Ms)}}
                                   .dump());
        return MJLS_OK;
    });
}

int mjls_simulate(const mjls_model* model, const char* request_json,
                  char** out_json) {
    return guarded([&] {
        if (!model || !request_json || !out_json)
            throw std::invalid_argument("null argument");
        json req = json::parse(request_json);
        auto cfg = config_from_json(model->m, req);
        mjls::harness::TrajectoryRecord rec;
        try {
            rec = mjls::harness::run_experiment(model->m, cfg);
        } catch (const mjls::ResourceError&) {
            throw;
        } catch (const std::runtime_error& e) {
            return fail(MJLS_ERR_INFEASIBLE, e.what());
        }
        *out_json = dup_string(json{{"csv", mjls::harness::to_csv(rec)},
                                    {"summary", summary_json(rec)}}
                                   .dump());
        return MJLS_OK;
    });
}

int mjls_batch(const mjls_model* model, const char* request_json,
               char** out_json) {
    return guarded([&] {
        if (!model || !request_json || !out_json)
            throw std::invalid_argument("null argument");
        json req = json::parse(request_json);
        auto cfg = config_from_json(model->m, req);
        const int trials = req.value("trials", 1);
        mjls::harness::BatchSummary sum;
        try {
            sum = mjls::harness::batch_trials(model->m, cfg, trials);
        } catch (const mjls::ResourceError&) {
            throw;
        } catch (const std::runtime_error& e) {
            return fail(MJLS_ERR_INFEASIBLE, e.what());
        }
        json windows = json::array();
        for (int w : sum.terminal_windows) windows.push_back(w);
        *out_json =
            dup_string(json{{"n_trials", sum.n_trials},
                            {"terminal_window3", sum.terminal_window3},
                            {"terminal_windows", std::move(windows)},
                            {"max_theta", sum.max_theta},
                            {"harvested_total", sum.harvested_total},
                            {"harvested_correct", sum.harvested_correct},
                            {"coverage_ok", sum.coverage_ok},
                            {"mean_terminal_norm", sum.mean_terminal_norm}}
                           .dump());
        return MJLS_OK;
    });
}

}  // extern "C"
