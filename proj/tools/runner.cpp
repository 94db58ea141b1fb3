#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "pxcald/dn_curve.hpp"
#include "pxcald/forward.hpp"
#include "pxcald/io.hpp"
#include "pxcald/recon.hpp"
#include "pxcald/sampling.hpp"
#include "pxcald/sigma_projection.hpp"

namespace pxcald::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kTasks = {"forward-sweep", "fixed-point", "extremal", "moments", "reconstruct", "interior"};
const std::set<std::string> kFields = {"task", "profiles", "dn_curve", "out", "seed", "noise", "N", "mode",
                                       "m_grid", "schedules", "sides", "tolerances", "fd", "interior"};

// A pipeline failure tagged with the stage that raised it.
struct StageError : std::runtime_error {
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(what), stage(std::move(stage)) {}
    std::string stage;
};

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

json read_json_file(const fs::path& path, const std::string& field) {
    std::ifstream in(path);
    if (!in) throw ValidationError(field, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(field, std::string("invalid JSON in ") + path.string() + ": " + e.what());
    }
}

double number_field(const json& obj, const char* key, double fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ValidationError(path + "/" + key, "expected a number");
    return obj[key].get<double>();
}

int int_field(const json& obj, const char* key, int fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) throw ValidationError(path + "/" + key, "expected an integer");
    return obj[key].get<int>();
}

std::vector<double> positive_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ValidationError(path, "expected a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !(v[i].get<double>() > 0.0)) {
            throw ValidationError(path + "/" + std::to_string(i), "expected a positive number");
        }
        out.push_back(v[i].get<double>());
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

struct Context {
    const ExperimentConfig& cfg;
    ProfilePair profiles;
    std::optional<CommonGrid> grid;
    DNCurve curve;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    json tol;

    void write(const std::string& name, const std::string& text) {
        write_text(cfg.out_dir / name, text);
        outputs.push_back(name);
    }
};

ProfilePair load_profiles(const ExperimentConfig& cfg, bool require_gamma, std::vector<std::string>& inputs) {
    if (!cfg.doc.contains("profiles")) throw ValidationError("/profiles", "missing field");
    const json& field = cfg.doc["profiles"];
    if (field.is_string()) {
        const fs::path path = cfg.base_dir / field.get<std::string>();
        inputs.push_back(field.get<std::string>());
        return profiles_from_json(read_json_file(path, "/profiles"), require_gamma, "/profiles");
    }
    if (field.is_object()) return profiles_from_json(field, require_gamma, "/profiles");
    throw ValidationError("/profiles", "expected a path or an inline profile object");
}

bool needs_gamma(const ExperimentConfig& cfg) {
    if (!cfg.doc.contains("dn_curve")) return true;
    if (cfg.task == "interior") return true;
    return cfg.doc.value("mode", std::string("measured")) == "oracle";
}

json quadrature_moments(const CommonGrid& grid, int N) {
    json out = json::array();
    for (int n = 0; n <= N; ++n) {
        out.push_back(integrate_cellwise(grid, [n](double p, double gamma, double len) {
            const double g = 1.0 / (p - 1.0);
            return std::pow(gamma, -g) * std::pow(g, n) * len;
        }));
    }
    return out;
}

json task_forward_sweep(Context& ctx) {
    const json grid = ctx.cfg.doc.value("m_grid", json::object());
    const double lo = number_field(grid, "min", 1e-3, "/m_grid");
    const double hi = number_field(grid, "max", 1e3, "/m_grid");
    const int count = int_field(grid, "count", 61, "/m_grid");
    if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("/m_grid", "need 0 < min <= max");
    if (count < 1) throw ValidationError("/m_grid/count", "must be positive");
    const auto ms = log_grid(lo, hi, static_cast<std::size_t>(count));
    const auto samples = stage("forward", [&] { return sample_curve(ctx.curve, ms); });
    std::ostringstream csv;
    write_dn_csv(csv, samples);
    ctx.write("dn_curve.csv", csv.str());
    return {{"samples", samples.size()}, {"m_min", lo}, {"m_max", hi}};
}

json task_fixed_point(Context& ctx) {
    const double tol = number_field(ctx.tol, "fixed_point", 0.0, "/tolerances");
    const double k = stage("fixed-point", [&] { return fixed_point(ctx.curve, tol); });
    json rep = {{"fixed_point", k}, {"residual", ctx.curve(k) - k}};
    json tri = json::array();
    for (double factor : {0.5, 1.0, 2.0}) {
        const double m = factor * k;
        const double excess = ctx.curve(m) - m;
        json row = {{"m", m}, {"lambda_minus_m", excess}};
        if (ctx.curve.mode() == DNCurve::Mode::Exact) row["K"] = ctx.curve.flux(m).K;
        tri.push_back(row);
    }
    rep["trichotomy"] = tri;
    if (ctx.grid) {
        const double quad = integrate_cellwise(*ctx.grid, [](double p, double gamma, double len) {
            return std::pow(gamma, -1.0 / (p - 1.0)) * len;
        });
        rep["quadrature"] = quad;
        rep["relative_error"] = std::abs(k - quad) / quad;
    }
    return rep;
}

json task_extremal(Context& ctx) {
    const json& doc = ctx.cfg.doc;
    std::vector<std::string> sides = {"max-q", "min-q"};
    if (doc.contains("sides")) {
        sides.clear();
        for (std::size_t i = 0; i < doc["sides"].size(); ++i) {
            const auto s = doc["sides"][i].is_string() ? doc["sides"][i].get<std::string>() : "";
            if (s != "max-q" && s != "min-q") throw ValidationError("/sides/" + std::to_string(i), "expected max-q or min-q");
            sides.push_back(s);
        }
    }
    const json sched = doc.value("schedules", json::object());
    json rep = json::object();
    std::ostringstream csv;
    csv << "side,m,scaled_value,recovered_average\n";
    const LevelSetPartition part = level_sets(ctx.profiles.p);
    for (const auto& name : sides) {
        const ExtremalSide side = name == "max-q" ? ExtremalSide::MaxQ : ExtremalSide::MinQ;
        const std::string key = name == "max-q" ? "max_q" : "min_q";
        const auto schedule = sched.contains(key) ? positive_list(sched[key], "/schedules/" + key) : default_schedule(side);
        const auto est = stage("extremal", [&] { return extremal_recovery(ctx.curve, ctx.profiles.p, side, schedule); });
        json entry = to_json(est);
        if (ctx.grid) {
            // mean of f over the extreme level set
            const Level& lv = part[side == ExtremalSide::MaxQ ? part.max_q_level() : part.min_q_level()];
            double integral = 0.0;
            for (const Cell& c : ctx.grid->cells()) {
                if (c.p == lv.p) integral += c.f() * c.length();
            }
            const double avg = integral / lv.measure;
            entry["oracle_average"] = avg;
            entry["oracle_scaled_value"] = std::pow(avg, -(lv.p - 1.0));
        }
        rep[key] = entry;
        char buf[160];
        for (const auto& s : est.history) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n", name.c_str(), s.m, s.scaled_value,
                          s.recovered_average);
            csv << buf;
        }
    }
    ctx.write("extremal.csv", csv.str());
    return rep;
}

DerivativeSource parse_mode(const json& doc) {
    const std::string mode = doc.value("mode", std::string("measured"));
    if (mode == "measured") return DerivativeSource::Measured;
    if (mode == "oracle") return DerivativeSource::Oracle;
    throw ValidationError("/mode", "expected measured or oracle");
}

FiniteDifferenceScheme parse_scheme(const json& doc) {
    FiniteDifferenceScheme s;
    const json fd = doc.value("fd", json::object());
    s.h0_rel = number_field(fd, "h0_rel", s.h0_rel, "/fd");
    s.levels = int_field(fd, "levels", s.levels, "/fd");
    if (!(s.h0_rel > 0.0)) throw ValidationError("/fd/h0_rel", "must be positive");
    if (s.levels < 1) throw ValidationError("/fd/levels", "must be >= 1");
    return s;
}

json task_moments(Context& ctx) {
    const json& doc = ctx.cfg.doc;
    const int N = int_field(doc, "N", 3, "");
    if (N < 1) throw ValidationError("/N", "must be >= 1");
    const DerivativeSource mode = parse_mode(doc);
    json rep = {{"mode", to_string(mode)}, {"order", N}};
    MomentVector mu;
    if (mode == DerivativeSource::Oracle) {
        const auto od = stage("derivatives", [&] { return dn_oracle_derivatives(ctx.curve.grid(), N); });
        std::vector<double> jet(static_cast<std::size_t>(N) + 1);
        jet[0] = od.lambda_jet[0];
        const auto kj = stage("inverse-derivatives", [&] { return inverse_derivatives(od.m_jet, N); });
        for (int n = 1; n <= N; ++n) jet[static_cast<std::size_t>(n)] = faa_di_bruno(od.lambda_jet, kj, n);
        rep["fixed_point"] = od.m_jet[0];
        rep["dlambda_dm"] = jet;
        mu = stage("moments", [&] { return extract_moments(jet, od.m_jet[0], N); });
    } else {
        const double k = stage("fixed-point", [&] {
            return fixed_point(ctx.curve, number_field(ctx.tol, "fixed_point", 0.0, "/tolerances"));
        });
        const auto d = stage("derivatives", [&] { return dn_derivatives(ctx.curve, k, N, parse_scheme(doc)); });
        rep["fixed_point"] = k;
        rep["dlambda_dm"] = d.values;
        rep["derivative_error"] = d.error;
        rep["step"] = d.step;
        mu = stage("moments", [&] { return extract_moments(d.values, k, N); });
    }
    rep["moments"] = to_json(mu);
    if (ctx.grid) {
        const json quad = quadrature_moments(*ctx.grid, N);
        json rel = json::array();
        for (int n = 0; n <= N; ++n) {
            const double q = quad[static_cast<std::size_t>(n)].get<double>();
            rel.push_back(std::abs(mu[static_cast<std::size_t>(n)] - q) / std::abs(q));
        }
        rep["quadrature_moments"] = quad;
        rep["relative_error"] = rel;
    }
    return rep;
}

json task_reconstruct(Context& ctx) {
    const json& doc = ctx.cfg.doc;
    ReconstructOptions opt;
    opt.mode = parse_mode(doc);
    opt.scheme = parse_scheme(doc);
    opt.fixed_point_tol = number_field(ctx.tol, "fixed_point", 0.0, "/tolerances");
    opt.merge_tol = number_field(ctx.tol, "merge", 0.0, "/tolerances");
    const std::size_t levels = level_sets(ctx.profiles.p, opt.merge_tol).size();
    const int N = int_field(doc, "N", static_cast<int>(levels) - 1, "");
    if (N < 0) throw ValidationError("/N", "must be >= 0");
    const auto report = stage("reconstruct", [&] { return reconstruct(ctx.curve, ctx.profiles.p, N, opt); });
    json rep = to_json(report);
    if (ctx.profiles.gamma) {
        const auto truth = project_conductivity(*ctx.profiles.gamma, ctx.profiles.p, opt.merge_tol);
        rep["projection"] = to_json(truth);
        double worst = 0.0;
        for (std::size_t l = 0; l < truth.values.size() && l < report.reconstructed.values.size(); ++l) {
            worst = std::max(worst, std::abs(report.reconstructed.values[l] - truth.values[l]) / truth.values[l]);
        }
        rep["max_relative_error"] = worst;
    }
    std::ostringstream csv;
    write_projection_csv(csv, report.reconstructed);
    ctx.write("reconstruction.csv", csv.str());
    return rep;
}

json task_interior(Context& ctx) {
    const json& doc = ctx.cfg.doc;
    if (!doc.contains("interior")) throw ValidationError("/interior", "missing field");
    const json& in = doc["interior"];
    if (!in.is_object()) throw ValidationError("/interior", "expected an object");
    const CommonGrid& grid = *ctx.grid;

    std::vector<double> r(grid.size());
    const json rj = in.value("r", json(0.0));
    if (rj.is_number()) {
        std::fill(r.begin(), r.end(), rj.get<double>());
    } else {
        if (!rj.is_object() || !rj.contains("breaks") || !rj.contains("values")) {
            throw ValidationError("/interior/r", "expected a number or {breaks, values}");
        }
        std::vector<double> rb = rj["breaks"].get<std::vector<double>>();
        std::vector<double> rv = rj["values"].get<std::vector<double>>();
        const auto gb = grid.breaks();
        for (std::size_t i = 0; i < rb.size(); ++i) {
            if (!std::binary_search(gb.begin(), gb.end(), rb[i])) {
                throw ValidationError("/interior/r/breaks/" + std::to_string(i), "must be a breakpoint of p or gamma");
            }
        }
        const PiecewiseConstant rf = [&] {
            try {
                return PiecewiseConstant(std::move(rb), std::move(rv));
            } catch (const DomainError& e) {
                throw ValidationError("/interior/r", e.what());
            }
        }();
        for (std::size_t i = 0; i < grid.size(); ++i) r[i] = rf.at(0.5 * (grid[i].left + grid[i].right));
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] >= 0.0)) throw ValidationError("/interior/r", "exponent must be nonnegative");
    }

    // K = 1 unless requested otherwise
    const double K = number_field(in, "K", 1.0, "/interior");
    if (!(K > 0.0)) throw ValidationError("/interior/K", "must be positive");
    const FluxConstant flux{K, dirichlet_gap(K, grid)};
    const double eps = number_field(ctx.tol, "interior_eps", 1e-8, "/tolerances");
    const auto data = stage("interior", [&] { return interior_power_data(r, flux, grid); });
    const auto gamma = stage("interior", [&] { return recover_from_interior(data, r, flux, grid, eps); });
    json cells = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cells.push_back({{"left", grid[i].left},
                         {"right", grid[i].right},
                         {"p", grid[i].p},
                         {"r", r[i]},
                         {"data", data[i]},
                         {"gamma", grid[i].gamma},
                         {"recovered_gamma", gamma[i]}});
    }
    return {{"K", K}, {"m", flux.m}, {"cells", cells}};
}

}  // namespace

bool is_task(const std::string& task) { return kTasks.count(task) > 0; }

ExperimentConfig load_config(const std::string& task, const fs::path& config_path, const Overrides& ov) {
    if (!is_task(task)) throw ValidationError("task", "unknown task \"" + task + "\"");
    ExperimentConfig cfg;
    cfg.task = task;
    cfg.config_path = config_path;
    cfg.base_dir = config_path.parent_path();
    cfg.doc = read_json_file(config_path, "--config");
    if (!cfg.doc.is_object()) throw ValidationError("/", "config must be a JSON object");
    for (const auto& [key, _] : cfg.doc.items()) {
        if (!kFields.count(key)) throw ValidationError("/" + key, "unknown field");
    }
    if (cfg.doc.contains("task") && cfg.doc["task"] != task) {
        throw ValidationError("/task", "config names a different task than the command line");
    }
    cfg.doc["task"] = task;
    if (ov.out) cfg.doc["out"] = *ov.out;
    if (ov.seed) cfg.doc["seed"] = *ov.seed;
    if (ov.noise) cfg.doc["noise"] = *ov.noise;
    if (ov.order) cfg.doc["N"] = *ov.order;
    if (ov.mode) cfg.doc["mode"] = *ov.mode;

    const json& d = cfg.doc;
    if (d.contains("out") && !d["out"].is_string()) throw ValidationError("/out", "expected a path");
    cfg.out_dir = d.value("out", std::string("out"));
    if (cfg.out_dir.is_relative() && !ov.out) cfg.out_dir = cfg.base_dir / cfg.out_dir;
    if (d.contains("seed") && !d["seed"].is_number_unsigned()) throw ValidationError("/seed", "expected a nonnegative integer");
    cfg.seed = d.value("seed", std::uint64_t{0});
    cfg.noise = number_field(d, "noise", 0.0, "");
    if (!(cfg.noise >= 0.0)) throw ValidationError("/noise", "must be >= 0");
    if (d.contains("mode")) parse_mode(d);
    if (d.contains("dn_curve") && !d["dn_curve"].is_string()) throw ValidationError("/dn_curve", "expected a path");
    if (d.contains("tolerances") && !d["tolerances"].is_object()) throw ValidationError("/tolerances", "expected an object");
    return cfg;
}

int run(const ExperimentConfig& cfg) {
    std::vector<std::string> inputs = {cfg.config_path.string()};
    ProfilePair profiles = load_profiles(cfg, needs_gamma(cfg), inputs);
    std::optional<CommonGrid> grid;
    if (profiles.gamma) grid.emplace(merge_grids(profiles.p, *profiles.gamma));
    const json tol = cfg.doc.value("tolerances", json::object());

    DNCurve curve = [&] {
        if (cfg.doc.contains("dn_curve") && cfg.task != "interior") {
            const std::string rel = cfg.doc["dn_curve"].get<std::string>();
            inputs.push_back(rel);
            std::ifstream in(cfg.base_dir / rel);
            if (!in) throw ValidationError("/dn_curve", "cannot open " + rel);
            auto samples = read_dn_csv(in);
            try {
                return DNCurve::tabulated(std::move(samples));
            } catch (const DomainError& e) {
                throw ValidationError("/dn_curve", e.what());
            }
        }
        return DNCurve::exact(*grid, number_field(tol, "root", 0.0, "/tolerances"));
    }();
    curve = add_noise(curve, cfg.noise, cfg.seed);

    fs::create_directories(cfg.out_dir);
    Context ctx{cfg, std::move(profiles), std::move(grid), std::move(curve), std::move(inputs), {}, tol};

    json report;
    if (cfg.task == "forward-sweep") report = task_forward_sweep(ctx);
    else if (cfg.task == "fixed-point") report = task_fixed_point(ctx);
    else if (cfg.task == "extremal") report = task_extremal(ctx);
    else if (cfg.task == "moments") report = task_moments(ctx);
    else if (cfg.task == "reconstruct") report = task_reconstruct(ctx);
    else report = task_interior(ctx);
    report["task"] = cfg.task;
    report["curve_mode"] = ctx.curve.mode() == DNCurve::Mode::Exact ? "exact" : "tabulated";
    report["noise"] = cfg.noise;
    report["seed"] = cfg.seed;
    ctx.write("report.json", report.dump(2) + "\n");

    json manifest = {{"tool", "pxcald"},
                     {"version", PXCALD_VERSION},
                     {"task", cfg.task},
                     {"inputs", ctx.inputs},
                     {"parameters", cfg.doc},
                     {"outputs", ctx.outputs}};
    manifest["outputs"].push_back("manifest.json");
    write_text(cfg.out_dir / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
}

int run_cli(const std::string& task, const fs::path& config_path, const Overrides& overrides) {
    try {
        const ExperimentConfig cfg = load_config(task, config_path, overrides);
        return run(cfg);
    } catch (const ValidationError& e) {
        std::cerr << "pxcald: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StageError& e) {
        std::cerr << "pxcald: " << e.stage << " failed: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const std::exception& e) {
        std::cerr << "pxcald: setup failed: " << e.what() << "\n";
        return kExitPipeline;
    }
}

}  // namespace pxcald::cli
