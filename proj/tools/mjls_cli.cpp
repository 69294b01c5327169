// Command-line front end. Talks to the library exclusively through the C API
// in mjls.h; JSON plumbing is local to this tool.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mjls.h"

using nlohmann::json;

namespace {

int fail_status(int rc) {
    std::cerr << "error: " << mjls_last_error() << "\n";
    return rc;
}

int write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
        return 0;
    }
    std::ofstream os(out_path);
    if (!os) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return 2;
    }
    os << text;
    return 0;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::istringstream is(csv);
    std::string cell;
    while (std::getline(is, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

// --disturb "50:1.5,-2" -> {"time":50,"dx":[1.5,-2]}
json parse_disturb(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("--disturb expects t:v1,v2,...");
    return json{{"time", std::stoi(spec.substr(0, colon))},
                {"dx", parse_doubles(spec.substr(colon + 1))}};
}

struct ModelGuard {
    mjls_model* h = nullptr;
    ~ModelGuard() { mjls_model_free(h); }
};

struct ReplyGuard {
    char* s = nullptr;
    ~ReplyGuard() { mjls_string_free(s); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Switched-system mode estimation, ambiguity learning and "
                 "robust gain synthesis"};
    app.require_subcommand(1);

    std::string model_path, out_path, data_path, counts_path;
    std::string controller = "random", disturb, x0_csv;
    std::uint64_t seed = 0;
    int T = 100, nc = 2, theta0 = 1, trials = 100, nmax = 3, synth_period = 10;
    long budget = 2'000'000;
    double epsilon = 1e-6, beta = 0.05;
    bool no_shrink = false;

    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--model", model_path, "model JSON file")->required();
        cmd->add_option("--out", out_path, "output file (default: stdout)");
    };

    auto* est = app.add_subcommand("estimate", "run the mode observer on logged data");
    add_model(est);
    est->add_option("--data", data_path,
                    "JSON file with fields y (outputs) and u (controls)")
        ->required();
    est->add_option("--nc", nc, "agreed-run length for harvesting");

    auto* obs = app.add_subcommand("observability", "mode-observability certificates");
    add_model(obs);
    obs->add_option("--nmax", nmax, "largest window length to scan");
    obs->add_option("--budget", budget, "path-pair test budget");

    auto* syn = app.add_subcommand("synthesize", "compute a certified gain");
    add_model(syn);
    syn->add_option("--controller", controller, "robust | stochastic | dr");
    syn->add_option("--counts", counts_path,
                    "CSV of observed transition counts (dr)");
    syn->add_option("--beta", beta, "ambiguity confidence parameter (dr)");
    syn->add_flag("--no-shrink", no_shrink,
                  "fail instead of contracting an uncertifiable vertex set");

    auto add_sim_flags = [&](CLI::App* cmd) {
        add_model(cmd);
        cmd->add_option("--controller", controller,
                        "none | random | robust | stochastic | dr");
        cmd->add_option("--T", T, "horizon (steps)");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--nc", nc, "agreed-run length for harvesting");
        cmd->add_option("--epsilon", epsilon, "dither variance");
        cmd->add_option("--disturb", disturb, "additive state disturbance t:v1,v2,...");
        cmd->add_option("--x0", x0_csv, "initial state v1,v2,...");
        cmd->add_option("--theta0", theta0, "initial mode (1-based)");
        cmd->add_option("--synth-period", synth_period, "DR re-synthesis cadence");
    };
    auto* sim = app.add_subcommand("simulate", "closed-loop experiment; CSV trajectory");
    add_sim_flags(sim);
    auto* bat = app.add_subcommand("batch", "repeated seeded trials; JSON summary");
    add_sim_flags(bat);
    bat->add_option("--trials", trials, "number of trials");

    CLI11_PARSE(app, argc, argv);

    ModelGuard model;
    if (int rc = mjls_model_load(model_path.c_str(), &model.h); rc != MJLS_OK)
        return fail_status(rc);

    try {
        if (est->parsed()) {
            std::ifstream is(data_path);
            if (!is) {
                std::cerr << "error: cannot read " << data_path << "\n";
                return 2;
            }
            json req = json::parse(is);
            req["n_c"] = nc;
            ReplyGuard r;
            if (int rc = mjls_estimate(model.h, req.dump().c_str(), &r.s);
                rc != MJLS_OK)
                return fail_status(rc);
            return write_output(r.s, out_path);
        }
        if (obs->parsed()) {
            json req{{"n_max", nmax}, {"budget", budget}};
            ReplyGuard r;
            if (int rc = mjls_observability(model.h, req.dump().c_str(), &r.s);
                rc != MJLS_OK)
                return fail_status(rc);
            return write_output(r.s, out_path);
        }
        if (syn->parsed()) {
            json req{{"kind", controller}, {"beta", beta}};
            if (no_shrink) req["allow_shrink"] = false;
            if (!counts_path.empty()) {
                std::ifstream is(counts_path);
                if (!is) {
                    std::cerr << "error: cannot read " << counts_path << "\n";
                    return 2;
                }
                json counts = json::array();
                std::string line;
                while (std::getline(is, line)) {
                    if (line.empty()) continue;
                    json row = json::array();
                    for (double v : parse_doubles(line)) row.push_back((long)v);
                    counts.push_back(std::move(row));
                }
                req["counts"] = std::move(counts);
            }
            ReplyGuard r;
            if (int rc = mjls_synthesize(model.h, req.dump().c_str(), &r.s);
                rc != MJLS_OK)
                return fail_status(rc);
            return write_output(r.s, out_path);
        }

        // simulate / batch
        json req{{"controller", controller}, {"T", T},
                 {"seed", seed},             {"n_c", nc},
                 {"epsilon", epsilon},       {"theta0", theta0},
                 {"synth_period", synth_period}};
        if (!disturb.empty()) req["disturbance"] = parse_disturb(disturb);
        if (!x0_csv.empty()) req["x0"] = parse_doubles(x0_csv);
        if (bat->parsed()) {
            req["trials"] = trials;
            ReplyGuard r;
            if (int rc = mjls_batch(model.h, req.dump().c_str(), &r.s);
                rc != MJLS_OK)
                return fail_status(rc);
            return write_output(r.s, out_path);
        }
        ReplyGuard r;
        if (int rc = mjls_simulate(model.h, req.dump().c_str(), &r.s);
            rc != MJLS_OK)
            return fail_status(rc);
        json out = json::parse(std::string(r.s));
        std::cerr << out.at("summary").dump() << "\n";
        return write_output(out.at("csv").get<std::string>(), out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
