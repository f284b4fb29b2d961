#include "shiftsim/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "shiftsim/vec.hpp"

namespace shiftsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string join_issues(const std::vector<std::string>& issues) {
    std::ostringstream os;
    os << "config validation failed (" << issues.size() << " issue"
       << (issues.size() == 1 ? "" : "s") << "):";
    for (const auto& s : issues) os << "\n  - " << s;
    return os.str();
}

// Walks one JSON object and records every schema violation instead of
// stopping at the first, so a report lists all offending fields at once.
class Obj {
  public:
    Obj(const nlohmann::ordered_json& j, std::string path,
        std::vector<std::string>& issues)
        : j_(j), path_(std::move(path)), issues_(issues) {
        if (!j_.is_object())
            issues_.push_back(path_ + ": expected an object");
    }

    ~Obj() {
        if (!j_.is_object()) return;
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key))
                issues_.push_back(path_ + "." + key + ": unknown key");
    }

    bool has(const std::string& key) {
        return j_.is_object() && j_.contains(key);
    }

    const nlohmann::ordered_json* get(const std::string& key, bool required) {
        seen_.insert(key);
        if (!j_.is_object()) return nullptr;
        if (!j_.contains(key)) {
            if (required) issues_.push_back(path_ + "." + key + ": missing");
            return nullptr;
        }
        return &j_.at(key);
    }

    double number(const std::string& key, bool required, double fallback) {
        const auto* v = get(key, required);
        if (!v) return fallback;
        if (!v->is_number()) {
            issues_.push_back(path_ + "." + key + ": expected a number");
            return fallback;
        }
        return v->get<double>();
    }

    std::uint64_t u64(const std::string& key, bool required, std::uint64_t fallback) {
        const auto* v = get(key, required);
        if (!v) return fallback;
        if (!v->is_number_unsigned() && !v->is_number_integer()) {
            issues_.push_back(path_ + "." + key + ": expected a non-negative integer");
            return fallback;
        }
        if (v->is_number_integer() && v->get<std::int64_t>() < 0) {
            issues_.push_back(path_ + "." + key + ": must be non-negative");
            return fallback;
        }
        return v->get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool required, bool fallback) {
        const auto* v = get(key, required);
        if (!v) return fallback;
        if (!v->is_boolean()) {
            issues_.push_back(path_ + "." + key + ": expected a boolean");
            return fallback;
        }
        return v->get<bool>();
    }

    std::string str(const std::string& key, bool required,
                    const std::string& fallback = "") {
        const auto* v = get(key, required);
        if (!v) return fallback;
        if (!v->is_string()) {
            issues_.push_back(path_ + "." + key + ": expected a string");
            return fallback;
        }
        return v->get<std::string>();
    }

    std::vector<double> number_list(const std::string& key, bool required) {
        const auto* v = get(key, required);
        std::vector<double> out;
        if (!v) return out;
        if (!v->is_array()) {
            issues_.push_back(path_ + "." + key + ": expected an array of numbers");
            return out;
        }
        for (const auto& e : *v) {
            if (!e.is_number()) {
                issues_.push_back(path_ + "." + key + ": non-numeric entry");
                return {};
            }
            out.push_back(e.get<double>());
        }
        if (out.empty()) issues_.push_back(path_ + "." + key + ": must be non-empty");
        return out;
    }

    std::vector<std::uint64_t> u64_list(const std::string& key, bool required) {
        std::vector<std::uint64_t> out;
        for (double v : number_list(key, required)) {
            if (v < 0 || v != std::floor(v)) {
                issues_.push_back(path_ + "." + key +
                                  ": entries must be non-negative integers");
                return {};
            }
            out.push_back(static_cast<std::uint64_t>(v));
        }
        return out;
    }

    const nlohmann::ordered_json& json() const { return j_; }
    const std::string& path() const { return path_; }
    std::vector<std::string>& issues() { return issues_; }

  private:
    const nlohmann::ordered_json& j_;
    std::string path_;
    std::vector<std::string>& issues_;
    std::set<std::string> seen_;
};

DirectionSpec parse_direction(const nlohmann::ordered_json& j, const std::string& path,
                              std::vector<std::string>& issues) {
    Obj o(j, path, issues);
    DirectionSpec d;
    int selectors = 0;
    if (o.has("axis")) {
        d.kind = DirectionSpec::Kind::axis;
        d.axis = static_cast<std::size_t>(o.u64("axis", true, 0));
        ++selectors;
    }
    if (o.has("spread")) {
        if (o.boolean("spread", true, false)) d.kind = DirectionSpec::Kind::spread;
        ++selectors;
    }
    if (o.has("coords")) {
        d.kind = DirectionSpec::Kind::coords;
        d.coords = o.number_list("coords", true);
        ++selectors;
    }
    if (o.has("angle_deg")) {
        d.kind = DirectionSpec::Kind::angle;
        d.angle_deg = o.number("angle_deg", true, 0.0);
        ++selectors;
    }
    if (selectors != 1)
        issues.push_back(path +
                         ": exactly one of axis/spread/coords/angle_deg is required");
    if (o.has("plane")) {
        const auto list = o.u64_list("plane", true);
        if (list.size() != 2)
            issues.push_back(path + ".plane: expected two axis indices");
        else
            d.plane = {static_cast<std::size_t>(list[0]),
                       static_cast<std::size_t>(list[1])};
        if (d.kind != DirectionSpec::Kind::angle)
            issues.push_back(path + ".plane: only valid with angle_deg");
    }
    d.norm = o.number("norm", false, 1.0);
    if (!(d.norm > 0.0)) issues.push_back(path + ".norm: must be positive");
    return d;
}

DistConfig parse_dist(const nlohmann::ordered_json& j, const std::string& path,
                      std::vector<std::string>& issues) {
    Obj o(j, path, issues);
    DistConfig d;
    if (const auto* dir = o.get("direction", true))
        d.direction = parse_direction(*dir, path + ".direction", issues);
    d.rho = o.number("rho", true, 1.0);
    if (!(d.rho > 0.0)) issues.push_back(path + ".rho: must be positive");
    if (o.has("noise")) {
        const std::string name = o.str("noise", true);
        try {
            d.noise = noise_family_from_string(name);
        } catch (const std::exception&) {
            issues.push_back(path + ".noise: unknown family '" + name + "'");
        }
    }
    return d;
}

EvalConfig parse_eval(const nlohmann::ordered_json& j, const std::string& path,
                      std::vector<std::string>& issues) {
    Obj o(j, path, issues);
    EvalConfig e;
    const std::string mode = o.str("mode", true, "mc");
    if (mode == "mc") {
        e.mode = EvalConfig::Mode::mc;
        e.samples = o.u64("samples", true, 0);
        if (e.samples == 0) issues.push_back(path + ".samples: must be >= 1");
    } else if (mode == "exact") {
        e.mode = EvalConfig::Mode::exact;
    } else {
        issues.push_back(path + ".mode: expected 'mc' or 'exact'");
    }
    return e;
}

FilterRuleConfig parse_filter_rule(const nlohmann::ordered_json& j,
                                   const std::string& path,
                                   std::vector<std::string>& issues) {
    Obj o(j, path, issues);
    FilterRuleConfig f;
    f.kind = o.str("kind", true);
    if (f.kind == "hard_threshold") {
        f.tau = o.number("tau", true, 0.0);
    } else if (f.kind == "logistic") {
        f.tau = o.number("tau", true, 0.0);
        f.beta = o.number("beta", true, 1.0);
        if (!(f.beta > 0.0)) issues.push_back(path + ".beta: must be positive");
    } else if (f.kind == "top_quantile") {
        f.q = o.number("q", true, 1.0);
        if (!(f.q > 0.0 && f.q <= 1.0))
            issues.push_back(path + ".q: must be in (0,1]");
    } else {
        issues.push_back(path + ".kind: expected hard_threshold/logistic/top_quantile");
    }
    return f;
}

LineSweepConfig parse_line_sweep(Obj& o, std::vector<std::string>& issues) {
    LineSweepConfig c;
    c.dimension = static_cast<std::size_t>(o.u64("dimension", true, 0));
    if (c.dimension < 2) issues.push_back("$.dimension: must be >= 2");
    if (const auto* v = o.get("train", true))
        c.train = parse_dist(*v, "$.train", issues);
    if (const auto* v = o.get("test_ref", true))
        c.test_ref = parse_dist(*v, "$.test_ref", issues);
    if (const auto* v = o.get("test_shift", true))
        c.test_shift = parse_dist(*v, "$.test_shift", issues);
    c.n_grid = o.u64_list("n_grid", true);
    for (auto n : c.n_grid)
        if (n == 0) issues.push_back("$.n_grid: entries must be >= 1");
    c.xi_grid = o.number_list("xi_grid", true);
    for (auto x : c.xi_grid)
        if (!(x > 0.0)) issues.push_back("$.xi_grid: entries must be positive");
    c.trials = o.u64("trials", true, 0);
    if (c.trials == 0) issues.push_back("$.trials: must be >= 1");
    if (const auto* v = o.get("eval", true))
        c.eval = parse_eval(*v, "$.eval", issues);
    if (o.has("families")) {
        const auto* v = o.get("families", true);
        if (v && v->is_array()) {
            for (const auto& e : *v) {
                try {
                    c.families.push_back(noise_family_from_string(e.get<std::string>()));
                } catch (const std::exception&) {
                    issues.push_back("$.families: unknown noise family");
                }
            }
        } else {
            issues.push_back("$.families: expected an array of family names");
        }
    }
    if (o.has("checks")) {
        const auto* v = o.get("checks", true);
        Obj co(*v, "$.checks", issues);
        if (co.has("slope_rel_tol"))
            c.checks.slope_rel_tol = co.number("slope_rel_tol", true, 0.0);
        if (co.has("intercept_abs_tol"))
            c.checks.intercept_abs_tol = co.number("intercept_abs_tol", true, 0.0);
        if (co.has("closed_form_abs_tol"))
            c.checks.closed_form_abs_tol = co.number("closed_form_abs_tol", true, 0.0);
        if (co.has("family_agreement_sigma"))
            c.checks.family_agreement_sigma =
                co.number("family_agreement_sigma", true, 0.0);
    }
    return c;
}

MixSweepConfig parse_mix_sweep(Obj& o, std::vector<std::string>& issues) {
    MixSweepConfig c;
    c.dimension = static_cast<std::size_t>(o.u64("dimension", true, 0));
    if (c.dimension < 2) issues.push_back("$.dimension: must be >= 2");
    c.n_total = o.u64("n_total", true, 0);
    if (c.n_total == 0) issues.push_back("$.n_total: must be >= 1");
    if (o.has("alphas")) {
        c.alphas = o.number_list("alphas", true);
    } else {
        const std::uint64_t count = o.u64("alpha_count", true, 0);
        if (count < 2) {
            issues.push_back("$.alpha_count: must be >= 2");
        } else {
            for (std::uint64_t i = 0; i < count; ++i)
                c.alphas.push_back(static_cast<double>(i) /
                                   static_cast<double>(count - 1));
        }
    }
    if (const auto* v = o.get("source1", true))
        c.source1 = parse_dist(*v, "$.source1", issues);
    if (const auto* v = o.get("source2", true))
        c.source2 = parse_dist(*v, "$.source2", issues);
    if (const auto* v = o.get("test_ref", true))
        c.test_ref = parse_dist(*v, "$.test_ref", issues);
    if (const auto* v = o.get("test_shift", true))
        c.test_shift = parse_dist(*v, "$.test_shift", issues);
    c.random_geometries = o.u64("random_geometries", false, 0);
    if (o.has("mc")) {
        const auto* v = o.get("mc", true);
        Obj mo(*v, "$.mc", issues);
        MixMcConfig m;
        m.alphas = mo.number_list("alphas", true);
        m.n_grid = mo.u64_list("n_grid", true);
        m.trials = mo.u64("trials", true, 0);
        if (m.trials == 0) issues.push_back("$.mc.trials: must be >= 1");
        m.samples = mo.u64("samples", true, 0);
        if (m.samples == 0) issues.push_back("$.mc.samples: must be >= 1");
        m.slope_rel_tol = mo.number("slope_rel_tol", false, 0.05);
        c.mc = std::move(m);
    }
    return c;
}

EnsembleCheckConfig parse_ensemble(Obj& o, std::vector<std::string>& issues) {
    EnsembleCheckConfig c;
    c.dimension = static_cast<std::size_t>(o.u64("dimension", true, 0));
    if (c.dimension < 1) issues.push_back("$.dimension: must be >= 1");
    c.pairs = o.u64("pairs", true, 0);
    if (c.pairs == 0) issues.push_back("$.pairs: must be >= 1");
    c.n_min = o.u64("n_min", true, 0);
    c.n_max = o.u64("n_max", true, 0);
    if (c.n_min == 0 || c.n_max < c.n_min)
        issues.push_back("$.n_min/$.n_max: need 1 <= n_min <= n_max");
    c.tolerance = o.number("tolerance", false, 1e-12);
    if (!(c.tolerance > 0.0)) issues.push_back("$.tolerance: must be positive");
    return c;
}

FilterExperimentConfig parse_filter_exp(Obj& o, std::vector<std::string>& issues) {
    FilterExperimentConfig c;
    c.dimension = static_cast<std::size_t>(o.u64("dimension", true, 0));
    if (c.dimension < 2) issues.push_back("$.dimension: must be >= 2");
    c.n = o.u64("n", true, 0);
    if (c.n == 0) issues.push_back("$.n: must be >= 1");
    c.trials = o.u64("trials", true, 0);
    if (c.trials == 0) issues.push_back("$.trials: must be >= 1");
    if (const auto* v = o.get("test_id", true))
        c.test_id = parse_dist(*v, "$.test_id", issues);
    if (const auto* v = o.get("test_ood", true))
        c.test_ood = parse_dist(*v, "$.test_ood", issues);
    if (const auto* v = o.get("train", true))
        c.train = parse_dist(*v, "$.train", issues);
    if (const auto* v = o.get("pretrained", true))
        c.pretrained = parse_direction(*v, "$.pretrained", issues);
    if (const auto* v = o.get("filter", true))
        c.filter = parse_filter_rule(*v, "$.filter", issues);
    if (o.has("control")) {
        const auto* v = o.get("control", true);
        c.control = parse_filter_rule(*v, "$.control", issues);
    }
    c.min_sigma = o.number("min_sigma", false, 3.0);
    c.control_max_sigma = o.number("control_max_sigma", false, 1.0);
    return c;
}

ResidualScalingConfig parse_residual(Obj& o, std::vector<std::string>& issues) {
    ResidualScalingConfig c;
    for (auto v : o.u64_list("dims", true))
        c.dims.push_back(static_cast<std::size_t>(v));
    for (std::size_t i = 1; i < c.dims.size(); ++i)
        if (c.dims[i] <= c.dims[i - 1])
            issues.push_back("$.dims: must be strictly ascending");
    c.n_over_d = o.number("n_over_d", true, 0.0);
    if (!(c.n_over_d > 0.0)) issues.push_back("$.n_over_d: must be positive");
    c.trials = o.u64("trials", true, 0);
    if (c.trials == 0) issues.push_back("$.trials: must be >= 1");
    c.xi = o.number("xi", false, 1.0);
    if (!(c.xi > 0.0)) issues.push_back("$.xi: must be positive");
    c.rho_train = o.number("rho_train", false, 1.0);
    c.rho_ref = o.number("rho_ref", false, 1.0);
    c.rho_shift = o.number("rho_shift", false, 1.0);
    c.shift_angle_deg = o.number("shift_angle_deg", true, 0.0);
    c.inject_perfect = o.boolean("inject_perfect", false, false);
    return c;
}

IngestFitConfig parse_ingest(Obj& o, std::vector<std::string>& issues,
                             const std::filesystem::path& base_dir) {
    IngestFitConfig c;
    const std::string input = o.str("input", true);
    if (!input.empty()) {
        std::filesystem::path p(input);
        c.input = p.is_absolute() ? p : base_dir / p;
    } else {
        issues.push_back("$.input: missing or empty");
    }
    c.filter = o.str("filter", false, "");
    c.fit_mode = o.str("fit_mode", false, "free");
    if (c.fit_mode != "free" && c.fit_mode != "through_origin")
        issues.push_back("$.fit_mode: expected 'free' or 'through_origin'");
    c.exclude_clamped = o.boolean("exclude_clamped", false, false);
    return c;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> list)
    : std::runtime_error(join_issues(list)), issues(std::move(list)) {}

std::vector<double> DirectionSpec::realize(std::size_t dim) const {
    std::vector<double> v;
    switch (kind) {
        case Kind::axis:
            if (axis >= dim)
                throw std::domain_error("direction axis out of range for dimension");
            v = unit_axis(dim, axis);
            break;
        case Kind::spread:
            v = unit_spread(dim);
            break;
        case Kind::coords: {
            if (coords.size() != dim)
                throw std::domain_error(
                    "direction coords length does not match dimension");
            v = coords;
            const double nv = shiftsim::norm(v);
            if (nv == 0.0) throw std::domain_error("direction coords are all zero");
            for (double& x : v) x /= nv;
            break;
        }
        case Kind::angle: {
            const double rad = angle_deg * kPi / 180.0;
            if (plane) {
                if (plane->first >= dim || plane->second >= dim ||
                    plane->first == plane->second)
                    throw std::domain_error("direction plane axes invalid");
                v = rotate_in_plane(unit_axis(dim, plane->first),
                                    unit_axis(dim, plane->second), rad);
            } else {
                v = rotate_in_plane(unit_spread(dim), unit_spread_partner(dim), rad);
            }
            break;
        }
    }
    for (double& x : v) x *= norm;
    return v;
}

DistributionSpec DistConfig::realize(std::size_t dim, NoiseFamily fallback) const {
    DistributionSpec spec;
    spec.theta = direction.realize(dim);
    spec.rho = rho;
    spec.noise = noise.value_or(fallback);
    return spec;
}

ExperimentConfig parse_config(const nlohmann::ordered_json& j,
                              const std::filesystem::path& base_dir) {
    std::vector<std::string> issues;
    ExperimentConfig cfg;
    cfg.raw = j;
    {
        // scope so the Obj destructor records unknown top-level keys before
        // the verdict below
        Obj o(j, "$", issues);
        const std::uint64_t version = o.u64("version", true, 0);
        if (version != 1 && o.has("version"))
            issues.push_back("$.version: unsupported schema version " +
                             std::to_string(version));
        cfg.version = static_cast<int>(version);
        cfg.kind = o.str("kind", true);
        cfg.seed = SeedSpec{o.u64("seed", true, 0)};
        cfg.output = o.str("output", false, "");

        if (cfg.kind == "line_sweep")
            cfg.payload = parse_line_sweep(o, issues);
        else if (cfg.kind == "mix_sweep")
            cfg.payload = parse_mix_sweep(o, issues);
        else if (cfg.kind == "ensemble_check")
            cfg.payload = parse_ensemble(o, issues);
        else if (cfg.kind == "filter_experiment")
            cfg.payload = parse_filter_exp(o, issues);
        else if (cfg.kind == "residual_scaling")
            cfg.payload = parse_residual(o, issues);
        else if (cfg.kind == "ingest_fit")
            cfg.payload = parse_ingest(o, issues, base_dir);
        else if (o.has("kind"))
            issues.push_back("$.kind: unknown experiment kind '" + cfg.kind + "'");
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config " + path.string());
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config " + path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

}  // namespace shiftsim
