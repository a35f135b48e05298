#pragma once

// Persistence and configuration surface: JSON run configs with full schema
// validation (every violation reported, with its path), CSV point patterns
// with a JSON window sidecar, JSON serialization of results and experiment
// reports, and a deterministic SVG renderer for configurations.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "energy.hpp"
#include "estimators.hpp"
#include "experiments.hpp"
#include "geometry.hpp"
#include "oracle.hpp"
#include "sampler.hpp"

namespace gibbsbox {

// Schema validation failure carrying every violation found, not just the
// first; what() joins them with semicolons.
struct ConfigError : GibbsboxError {
    std::vector<std::string> violations;
    explicit ConfigError(std::vector<std::string> v)
        : GibbsboxError(join(v)), violations(std::move(v)) {}

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid config: ";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += "; ";
            s += v[i];
        }
        return s;
    }
};

// Declarative model description, buildable into an EnergyModel2.  The JSON
// form is flat: {"family": ..., "z": ..., "beta": ..., <family keys>}.
struct ModelDescriptor {
    std::string family = "strauss";
    double z = 1.0;
    double beta = 1.0;
    double R = 1.0;                              // strauss/hard/smooth/area/random_cluster
    std::vector<double> coefficients, radii;     // multi_strauss
    double lj_a = 1.0, lj_b = 0.0, lj_rcut = 1.0;  // lennard_jones
    std::optional<double> stability_constant;
    int mc_samples = 0;  // 0 keeps the model default (area only)
    bool inside_only = false;

    EnergyModel2 build() const {
        EnergyModel2 m = build_bare();
        if (mc_samples > 0) m.with_mc_samples(mc_samples);
        return m;
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"family", family}, {"z", z}, {"beta", beta}};
        if (family == "multi_strauss") {
            j["coefficients"] = coefficients;
            j["radii"] = radii;
            if (stability_constant) j["stability_constant"] = *stability_constant;
        } else if (family == "lennard_jones") {
            j["a"] = lj_a;
            j["b"] = lj_b;
            j["rcut"] = lj_rcut;
            if (stability_constant) j["stability_constant"] = *stability_constant;
        } else {
            j["R"] = R;
            if (family == "area" && mc_samples > 0) j["mc_samples"] = mc_samples;
            if (family == "random_cluster" && inside_only) j["inside_only"] = true;
        }
        return j;
    }

  private:
    EnergyModel2 build_bare() const {
        if (family == "strauss") return EnergyModel2::pairwise(PairPotential::strauss(R));
        if (family == "hard_core") return EnergyModel2::hard_core(R);
        if (family == "smooth_core") return EnergyModel2::pairwise(PairPotential::smooth_core(R));
        if (family == "multi_strauss")
            return EnergyModel2::pairwise(
                PairPotential::multi_strauss(coefficients, radii, stability_constant));
        if (family == "lennard_jones")
            return EnergyModel2::pairwise(
                PairPotential::truncated_lennard_jones(lj_a, lj_b, lj_rcut, stability_constant));
        if (family == "area") return EnergyModel2::area(R);
        if (family == "random_cluster") return EnergyModel2::random_cluster(R, inside_only);
        throw GibbsboxError("unknown model family: " + family);
    }
};

struct RunConfig {
    std::string subcommand;  // simulate | estimate | oracle | experiment | diagnose
    ModelDescriptor model;
    Window2 window = make_window(0.0, 0.0, 1.0, 1.0);
    SamplerConfig sampler;  // z, beta and seed are filled from model/seed
    OptimizerConfig optimizer;
    OracleConfig oracle;
    std::uint64_t seed = 20260825;
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "json"};
    long replicates = 1;
    std::string method = "takacs_fiksel";  // estimate: takacs_fiksel|mple|mc_mle|variational
    std::string experiment = "gnz";        // experiment/diagnose dispatch name
    std::vector<double> z_values;          // phase_transition sweep
    std::vector<double> window_sides;      // mean_energy sweep

    nlohmann::json to_json() const {
        return nlohmann::json{{"subcommand", subcommand},
                              {"model", model.to_json()},
                              {"window",
                               {{"lo", {window.lo()[0], window.lo()[1]}},
                                {"hi", {window.hi()[0], window.hi()[1]}}}},
                              {"seed", seed},
                              {"out", out_dir},
                              {"formats", formats},
                              {"replicates", replicates},
                              {"method", method},
                              {"experiment", experiment}};
    }
};

namespace detail {

class SchemaCheck {
  public:
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    void add(const std::string& path, const std::string& msg) {
        violations.push_back(path + ": " + msg);
    }

    // Rejects keys outside the allowed set, so mutually exclusive or
    // misspelled sections are caught ("model.strauss" plus "model.area").
    void allow_keys(const nlohmann::json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) add(path, "unknown key '" + it.key() + "'");
    }

    bool number(const nlohmann::json& obj, const std::string& path, const std::string& key,
                double& out, bool required = false) {
        if (!obj.contains(key)) {
            if (required) add(path + "." + key, "missing required key");
            return false;
        }
        if (!obj[key].is_number()) {
            add(path + "." + key, "must be a number");
            return false;
        }
        out = obj[key].template get<double>();
        return true;
    }

    bool integer(const nlohmann::json& obj, const std::string& path, const std::string& key,
                 long& out) {
        if (!obj.contains(key)) return false;
        if (!obj[key].is_number_integer()) {
            add(path + "." + key, "must be an integer");
            return false;
        }
        out = obj[key].template get<long>();
        return true;
    }

    bool text(const nlohmann::json& obj, const std::string& path, const std::string& key,
              std::string& out, bool required = false) {
        if (!obj.contains(key)) {
            if (required) add(path + "." + key, "missing required key");
            return false;
        }
        if (!obj[key].is_string()) {
            add(path + "." + key, "must be a string");
            return false;
        }
        out = obj[key].template get<std::string>();
        return true;
    }

    bool number_array(const nlohmann::json& obj, const std::string& path, const std::string& key,
                      std::vector<double>& out) {
        if (!obj.contains(key)) return false;
        if (!obj[key].is_array()) {
            add(path + "." + key, "must be an array of numbers");
            return false;
        }
        out.clear();
        for (const auto& v : obj[key]) {
            if (!v.is_number()) {
                add(path + "." + key, "must be an array of numbers");
                return false;
            }
            out.push_back(v.template get<double>());
        }
        return true;
    }
};

inline void parse_model(const nlohmann::json& j, SchemaCheck& sc, ModelDescriptor& md) {
    if (!j.is_object()) {
        sc.add("model", "must be an object");
        return;
    }
    sc.text(j, "model", "family", md.family, true);
    static const std::set<std::string> families{"strauss",       "hard_core",     "smooth_core",
                                                "multi_strauss", "lennard_jones", "area",
                                                "random_cluster"};
    if (!families.count(md.family)) {
        sc.add("model.family", "unknown model family '" + md.family + "'");
        return;
    }
    std::set<std::string> allowed{"family", "z", "beta"};
    if (md.family == "multi_strauss") {
        allowed.insert({"coefficients", "radii", "stability_constant"});
    } else if (md.family == "lennard_jones") {
        allowed.insert({"a", "b", "rcut", "stability_constant"});
    } else {
        allowed.insert("R");
        if (md.family == "area") allowed.insert("mc_samples");
        if (md.family == "random_cluster") allowed.insert("inside_only");
    }
    sc.allow_keys(j, "model", allowed);

    if (sc.number(j, "model", "z", md.z) && !(md.z > 0.0))
        sc.add("model.z", "must be positive");
    if (sc.number(j, "model", "beta", md.beta) && !(md.beta >= 0.0))
        sc.add("model.beta", "must be nonnegative");

    if (md.family == "multi_strauss") {
        if (!sc.number_array(j, "model", "coefficients", md.coefficients) ||
            md.coefficients.empty())
            sc.add("model.coefficients", "missing or empty");
        if (!sc.number_array(j, "model", "radii", md.radii) ||
            md.radii.size() != md.coefficients.size() + 1)
            sc.add("model.radii", "need one more radius than coefficients");
        double a = 0.0;
        if (sc.number(j, "model", "stability_constant", a)) md.stability_constant = a;
    } else if (md.family == "lennard_jones") {
        if (sc.number(j, "model", "a", md.lj_a, true) && !(md.lj_a > 0.0))
            sc.add("model.a", "must be positive");
        sc.number(j, "model", "b", md.lj_b);
        if (sc.number(j, "model", "rcut", md.lj_rcut, true) && !(md.lj_rcut > 0.0))
            sc.add("model.rcut", "must be positive");
        double a = 0.0;
        if (sc.number(j, "model", "stability_constant", a)) md.stability_constant = a;
    } else {
        if (sc.number(j, "model", "R", md.R, true) && !(md.R > 0.0))
            sc.add("model.R", "must be positive");
        long ms = 0;
        if (sc.integer(j, "model", "mc_samples", ms)) {
            if (ms < 16)
                sc.add("model.mc_samples", "must be at least 16");
            else
                md.mc_samples = static_cast<int>(ms);
        }
        if (j.contains("inside_only")) {
            if (!j["inside_only"].is_boolean())
                sc.add("model.inside_only", "must be a boolean");
            else
                md.inside_only = j["inside_only"].template get<bool>();
        }
    }
}

inline void parse_window(const nlohmann::json& j, SchemaCheck& sc, Window2& win) {
    if (!j.is_object()) {
        sc.add("window", "must be an object with 'lo' and 'hi'");
        return;
    }
    sc.allow_keys(j, "window", {"lo", "hi"});
    std::vector<double> lo, hi;
    bool has_lo = sc.number_array(j, "window", "lo", lo);
    bool has_hi = sc.number_array(j, "window", "hi", hi);
    if (!j.contains("lo")) sc.add("window.lo", "missing required key");
    if (!j.contains("hi")) sc.add("window.hi", "missing required key");
    if (!has_lo || !has_hi) return;
    if (lo.size() != 2 || hi.size() != 2) {
        sc.add("window", "lo and hi must each hold two coordinates");
        return;
    }
    if (!(lo[0] < hi[0]) || !(lo[1] < hi[1])) {
        sc.add("window", "lo must be strictly below hi in both coordinates");
        return;
    }
    win = make_window(lo[0], lo[1], hi[0], hi[1]);
}

}  // namespace detail

// Parses and validates a JSON run configuration.  Every schema violation is
// collected and reported at once (inside a ConfigError) rather than stopping
// at the first; on success all defaults are filled in.
inline RunConfig parse_config(const std::string& text) {
    detail::SchemaCheck sc;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError({std::string("json: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"config: must be a JSON object"});

    RunConfig rc;
    sc.allow_keys(j, "config",
                  {"subcommand", "model", "window", "sampler", "optimizer", "oracle", "seed",
                   "out", "formats", "replicates", "method", "experiment", "z_values",
                   "window_sides"});

    sc.text(j, "config", "subcommand", rc.subcommand, true);
    static const std::set<std::string> subs{"simulate", "estimate", "oracle", "experiment",
                                            "diagnose"};
    if (!rc.subcommand.empty() && !subs.count(rc.subcommand))
        sc.add("config.subcommand", "unknown subcommand '" + rc.subcommand + "'");

    if (j.contains("model"))
        detail::parse_model(j["model"], sc, rc.model);
    else
        sc.add("config.model", "missing required key");
    if (j.contains("window"))
        detail::parse_window(j["window"], sc, rc.window);
    else
        sc.add("config.window", "missing required key");

    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].template get<long long>() < 0)
            sc.add("config.seed", "must be a nonnegative integer");
        else
            rc.seed = j["seed"].template get<std::uint64_t>();
    }
    sc.text(j, "config", "out", rc.out_dir);
    if (j.contains("formats")) {
        if (!j["formats"].is_array()) {
            sc.add("config.formats", "must be an array of strings");
        } else {
            rc.formats.clear();
            for (const auto& f : j["formats"]) {
                std::string s = f.is_string() ? f.template get<std::string>() : std::string();
                if (s != "csv" && s != "json" && s != "svg")
                    sc.add("config.formats", "entries must be csv, json or svg");
                else
                    rc.formats.push_back(s);
            }
        }
    }
    long reps = 0;
    if (sc.integer(j, "config", "replicates", reps)) {
        if (reps < 1)
            sc.add("config.replicates", "must be at least 1");
        else
            rc.replicates = reps;
    }
    sc.text(j, "config", "method", rc.method);
    static const std::set<std::string> methods{"takacs_fiksel", "mple", "mc_mle", "variational"};
    if (!methods.count(rc.method)) sc.add("config.method", "unknown method '" + rc.method + "'");
    sc.text(j, "config", "experiment", rc.experiment);
    static const std::set<std::string> experiments{"gnz",  "hardcore_bounds", "phase_transition",
                                                   "uniqueness", "tail",      "mean_energy"};
    if (!experiments.count(rc.experiment))
        sc.add("config.experiment", "unknown experiment '" + rc.experiment + "'");
    sc.number_array(j, "config", "z_values", rc.z_values);
    sc.number_array(j, "config", "window_sides", rc.window_sides);

    if (j.contains("sampler")) {
        const auto& s = j["sampler"];
        if (!s.is_object()) {
            sc.add("sampler", "must be an object");
        } else {
            sc.allow_keys(s, "sampler", {"sweeps", "burn_in", "thinning", "move_mix"});
            long v = 0;
            if (sc.integer(s, "sampler", "sweeps", v)) {
                if (v < 1)
                    sc.add("sampler.sweeps", "must be positive");
                else
                    rc.sampler.sweeps = v;
            }
            if (sc.integer(s, "sampler", "burn_in", v)) {
                if (v < 0)
                    sc.add("sampler.burn_in", "must be nonnegative");
                else
                    rc.sampler.burn_in = v;
            }
            if (sc.integer(s, "sampler", "thinning", v)) {
                if (v < 1)
                    sc.add("sampler.thinning", "must be positive");
                else
                    rc.sampler.thinning = v;
            }
            std::vector<double> mix;
            if (sc.number_array(s, "sampler", "move_mix", mix)) {
                if (mix.size() != 3 || mix[0] < 0 || mix[1] < 0 || mix[2] < 0 ||
                    mix[0] + mix[1] + mix[2] <= 0)
                    sc.add("sampler.move_mix", "need three nonnegative weights with positive sum");
                else
                    rc.sampler.move_mix = {mix[0], mix[1], mix[2]};
            }
        }
    }
    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        if (!o.is_object()) {
            sc.add("optimizer", "must be an object");
        } else {
            sc.allow_keys(o, "optimizer",
                          {"z_lo", "z_hi", "beta_lo", "beta_hi", "coarse_grid", "tol",
                           "quad_nodes", "max_refine_iters"});
            sc.number(o, "optimizer", "z_lo", rc.optimizer.z_lo);
            sc.number(o, "optimizer", "z_hi", rc.optimizer.z_hi);
            sc.number(o, "optimizer", "beta_lo", rc.optimizer.beta_lo);
            sc.number(o, "optimizer", "beta_hi", rc.optimizer.beta_hi);
            sc.number(o, "optimizer", "tol", rc.optimizer.tol);
            long v = 0;
            if (sc.integer(o, "optimizer", "coarse_grid", v)) rc.optimizer.coarse_grid = static_cast<int>(v);
            if (sc.integer(o, "optimizer", "quad_nodes", v)) rc.optimizer.quad_nodes = static_cast<int>(v);
            if (sc.integer(o, "optimizer", "max_refine_iters", v))
                rc.optimizer.max_refine_iters = static_cast<int>(v);
            try {
                rc.optimizer.validate();
            } catch (const GibbsboxError& e) {
                sc.add("optimizer", e.what());
            }
        }
    }
    if (j.contains("oracle")) {
        const auto& o = j["oracle"];
        if (!o.is_object()) {
            sc.add("oracle", "must be an object");
        } else {
            sc.allow_keys(o, "oracle",
                          {"n_max", "mc_samples", "batches", "truncation_tolerance"});
            long v = 0;
            if (sc.integer(o, "oracle", "n_max", v)) rc.oracle.n_max = static_cast<int>(v);
            if (sc.integer(o, "oracle", "mc_samples", v)) rc.oracle.mc_samples = v;
            if (sc.integer(o, "oracle", "batches", v)) rc.oracle.batches = static_cast<int>(v);
            sc.number(o, "oracle", "truncation_tolerance", rc.oracle.truncation_tolerance);
            try {
                rc.oracle.validate();
            } catch (const GibbsboxError& e) {
                sc.add("oracle", e.what());
            }
        }
    }

    if (!sc.ok()) throw ConfigError(std::move(sc.violations));
    rc.sampler.z = rc.model.z;
    rc.sampler.beta = rc.model.beta;
    rc.sampler.seed = rc.seed;
    rc.oracle.seed = rc.seed;
    return rc;
}

// ---------------------------------------------------------------------------
// Point pattern CSV with a JSON window sidecar.

inline void write_pattern_csv(const PointConfiguration2& cfg, std::ostream& os) {
    os << "x,y\n";
    char buf[80];
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const Point2& p = cfg.point(i);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p[0], p[1]);
        os << buf;
    }
}

inline void write_pattern_csv(const PointConfiguration2& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw GibbsboxError("pattern csv: cannot open '" + path + "' for writing");
    write_pattern_csv(cfg, os);
}

namespace detail {

inline bool parse_double_field(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* c = s.c_str();
    char* end = nullptr;
    out = std::strtod(c, &end);
    return end == c + s.size();
}

}  // namespace detail

inline PointConfiguration2 read_pattern_csv(std::istream& is, const Window2& win,
                                            double cell_hint = 0.0) {
    PointConfiguration2 cfg(win, cell_hint);
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != "x,y")
                throw GibbsboxError("pattern csv: expected header 'x,y' at line 1");
            continue;
        }
        if (line.empty()) continue;
        auto comma = line.find(',');
        double x = 0.0, y = 0.0;
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos ||
            !detail::parse_double_field(line.substr(0, comma), x) ||
            !detail::parse_double_field(line.substr(comma + 1), y))
            throw GibbsboxError("pattern csv: parse error at line " + std::to_string(lineno));
        Point2 p{x, y};
        if (!win.contains(p))
            throw GibbsboxError("pattern csv: point outside the window at line " +
                                std::to_string(lineno));
        if (!cfg.try_insert(p))
            throw GibbsboxError("pattern csv: duplicate point at line " + std::to_string(lineno));
    }
    if (lineno == 0) throw GibbsboxError("pattern csv: empty file (missing header)");
    return cfg;
}

inline PointConfiguration2 read_pattern_csv(const std::string& path, const Window2& win,
                                            double cell_hint = 0.0) {
    std::ifstream is(path);
    if (!is) throw GibbsboxError("pattern csv: cannot open '" + path + "'");
    return read_pattern_csv(is, win, cell_hint);
}

inline nlohmann::json window_to_json(const Window2& win) {
    return nlohmann::json{{"lo", {win.lo()[0], win.lo()[1]}}, {"hi", {win.hi()[0], win.hi()[1]}}};
}

inline Window2 window_from_json(const nlohmann::json& j) {
    detail::SchemaCheck sc;
    Window2 win = make_window(0.0, 0.0, 1.0, 1.0);
    detail::parse_window(j, sc, win);
    if (!sc.ok()) throw ConfigError(std::move(sc.violations));
    return win;
}

inline void write_window_json(const Window2& win, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw GibbsboxError("window json: cannot open '" + path + "' for writing");
    os << window_to_json(win).dump(2) << "\n";
}

inline Window2 read_window_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw GibbsboxError("window json: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw GibbsboxError(std::string("window json: ") + e.what());
    }
    return window_from_json(j);
}

// Writes the pattern (CSV) and its window (JSON sidecar) under the given base
// path, reads both back, and returns the reloaded pattern.  The 17-digit
// float format makes the roundtrip exact.
inline PointConfiguration2 pattern_roundtrip(const PointConfiguration2& cfg,
                                             const std::string& base_path,
                                             double cell_hint = 0.0) {
    write_pattern_csv(cfg, base_path + ".csv");
    write_window_json(cfg.window(), base_path + ".window.json");
    Window2 win = read_window_json(base_path + ".window.json");
    return read_pattern_csv(base_path + ".csv", win, cell_hint);
}

// ---------------------------------------------------------------------------
// Deterministic SVG snapshot: a frame for the window and one circle per point
// (radius R when given, a fixed dot otherwise), in insertion order, world
// coordinates.  Identical inputs produce byte-identical output.

inline std::string render_svg(const PointConfiguration2& cfg, const Window2& win,
                              std::optional<double> R = std::nullopt) {
    const double w = win.hi()[0] - win.lo()[0];
    const double h = win.hi()[1] - win.lo()[1];
    const double r = R ? *R : std::max(w, h) / 200.0;
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.9g %.9g %.9g %.9g\" "
                  "width=\"640\" height=\"%.9g\">\n",
                  win.lo()[0], win.lo()[1], w, h, 640.0 * h / w);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.9g\" y=\"%.9g\" width=\"%.9g\" height=\"%.9g\" fill=\"none\" "
                  "stroke=\"black\" stroke-width=\"%.9g\"/>\n",
                  win.lo()[0], win.lo()[1], w, h, w / 400.0);
    out += buf;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const Point2& p = cfg.point(i);
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.9g\" cy=\"%.9g\" r=\"%.9g\" fill=\"steelblue\" "
                      "fill-opacity=\"0.55\"/>\n",
                      p[0], p[1], r);
        out += buf;
    }
    out += "</svg>\n";
    return out;
}

// ---------------------------------------------------------------------------
// JSON serialization of results, reports and run manifests.

inline nlohmann::json to_json(const EstimationResult& r) {
    nlohmann::json j{{"method", r.method},
                     {"z_hat", r.z_hat},
                     {"beta_hat", r.beta_hat},
                     {"contrast", r.contrast},
                     {"iterations", r.iterations},
                     {"border_corrected", r.border_corrected},
                     {"on_boundary", r.on_boundary},
                     {"near_flat", r.near_flat}};
    j["z_se"] = r.z_se ? nlohmann::json(*r.z_se) : nlohmann::json(nullptr);
    j["beta_se"] = r.beta_se ? nlohmann::json(*r.beta_se) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const Verdict& v) {
    return nlohmann::json{{"name", v.name},
                          {"value", v.value},
                          {"threshold", v.threshold},
                          {"relation", v.relation},
                          {"pass", v.pass}};
}

inline nlohmann::json to_json(const ExperimentReport& rep) {
    nlohmann::json j{{"name", rep.name},
                     {"parameters", rep.parameters},
                     {"seeds", rep.seeds},
                     {"notes", rep.notes},
                     {"all_pass", rep.all_pass()}};
    nlohmann::json aggs = nlohmann::json::object();
    for (const auto& [k, a] : rep.aggregates) aggs[k] = {{"mean", a.mean}, {"se", a.se}};
    j["aggregates"] = aggs;
    nlohmann::json series = nlohmann::json::object();
    for (const auto& [k, xs] : rep.series) series[k] = xs;
    j["series"] = series;
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : rep.verdicts) vs.push_back(to_json(v));
    j["verdicts"] = vs;
    return j;
}

// Flat CSV view of the per-replicate series, ready for plotting.
inline std::string report_series_csv(const ExperimentReport& rep) {
    std::string out = "series,index,value\n";
    char buf[128];
    for (const auto& [k, xs] : rep.series) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            std::snprintf(buf, sizeof(buf), ",%zu,%.17g\n", i, xs[i]);
            out += k;
            out += buf;
        }
    }
    return out;
}

// Everything needed to rerun a command: the validated config echo and the
// list of artifacts it produced.
inline nlohmann::json run_manifest(const RunConfig& rc, const std::vector<std::string>& outputs) {
    return nlohmann::json{{"tool", "gibbsbox"},
                          {"config", rc.to_json()},
                          {"outputs", outputs}};
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw GibbsboxError("cannot open '" + path + "' for writing");
    os << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw GibbsboxError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace gibbsbox
