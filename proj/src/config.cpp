#include "htb/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace htb {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw Error(ErrorCode::Config, "field '" + field + "': " + msg);
}

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!ok.count(it.key())) fail(join(path, it.key()), "unknown field");
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& path, const char* key) {
    const json* v = find(obj, key);
    if (!v) fail(join(path, key), "missing");
    return *v;
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
}

std::size_t as_count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        fail(path, "expected a nonnegative integer");
    }
    return v.get<std::size_t>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    Vector out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_double(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<Vector> as_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of rows");
    std::vector<Vector> rows;
    for (std::size_t i = 0; i < v.size(); ++i) {
        rows.push_back(as_vector(v[i], path + "[" + std::to_string(i) + "]"));
        if (rows.back().size() != rows.front().size() || rows.back().empty()) {
            fail(path + "[" + std::to_string(i) + "]", "rows must be nonempty and of equal length");
        }
    }
    return rows;
}

std::string resolve(const std::string& base_dir, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
    return path.string();
}

// Library errors raised while reading referenced files become field errors.
template <class F>
auto with_field(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config && std::string(e.what()).rfind("field '", 0) == 0) throw;
        fail(path, e.what());
    }
}

NoiseKind noise_kind(const std::string& s, const std::string& path) {
    if (s == "pareto") return NoiseKind::SymmetricPareto;
    if (s == "student_t") return NoiseKind::StudentT;
    if (s == "bounded") return NoiseKind::Bounded;
    fail(path, "unknown noise kind '" + s + "' (pareto, student_t, bounded)");
}

RegimeKind regime_kind(const std::string& s, const std::string& path) {
    if (s == "stochastic_mab") return RegimeKind::StochasticMab;
    if (s == "stochastic_linear") return RegimeKind::StochasticLinear;
    if (s == "adversarial_script") return RegimeKind::AdversarialScript;
    fail(path, "unknown regime '" + s + "' (stochastic_mab, stochastic_linear, adversarial_script)");
}

FeatureSet feature_rows(const std::vector<Vector>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return FeatureSet(m);
}

NoiseModel parse_noise(const json& v, const std::string& path, std::optional<double>& scale) {
    check_keys(v, path, {"kind", "shape", "scale"});
    NoiseModel n;
    n.kind = noise_kind(as_string(require(v, path, "kind"), join(path, "kind")), join(path, "kind"));
    if (const json* s = find(v, "shape")) {
        n.shape = as_double(*s, join(path, "shape"));
    } else if (n.kind == NoiseKind::Bounded) {
        n.shape = 1.0;
    }
    if (const json* s = find(v, "scale")) {
        scale = as_double(*s, join(path, "scale"));
        if (!(*scale > 0.0)) fail(join(path, "scale"), "must be positive");
    }
    return n;
}

EnvironmentSpec parse_environment(const json& v, const std::string& base_dir, const HeavyTailSpec& spec) {
    const std::string path = "environment";
    check_keys(v, path,
               {"regime", "means", "features", "features_csv", "features_header", "theta", "script", "generator",
                "corruption", "budget", "noise"});
    EnvironmentSpec env;
    env.regime = regime_kind(as_string(require(v, path, "regime"), "environment.regime"), "environment.regime");

    const json* feats = find(v, "features");
    const json* feats_csv = find(v, "features_csv");
    if (feats && feats_csv) fail("environment.features", "give features or features_csv, not both");
    if (feats) {
        auto rows = as_matrix(*feats, "environment.features");
        env.features = with_field("environment.features", [&] { return feature_rows(rows); });
    } else if (feats_csv) {
        const bool header = find(v, "features_header") ? as_bool(v["features_header"], "environment.features_header")
                                                       : false;
        const std::string file = resolve(base_dir, as_string(*feats_csv, "environment.features_csv"));
        env.features = with_field("environment.features_csv", [&] { return FeatureSet::from_csv_file(file, header); });
    }

    switch (env.regime) {
        case RegimeKind::StochasticMab:
            env.means = as_vector(require(v, path, "means"), "environment.means");
            if (env.means.size() < 2) fail("environment.means", "need at least two arms");
            if (env.features && env.features->num_arms() != env.means.size()) {
                fail("environment.features", "row count differs from the number of means");
            }
            break;
        case RegimeKind::StochasticLinear:
            if (!env.features) fail("environment.features", "missing (required by stochastic_linear)");
            env.theta = as_vector(require(v, path, "theta"), "environment.theta");
            if (env.theta.size() != env.features->ambient_dim()) {
                fail("environment.theta", "length " + std::to_string(env.theta.size()) + " differs from feature dimension " +
                                              std::to_string(env.features->ambient_dim()));
            }
            break;
        case RegimeKind::AdversarialScript: {
            const json* script = find(v, "script");
            const json* gen = find(v, "generator");
            if ((script != nullptr) == (gen != nullptr)) fail("environment.script", "give exactly one of script, generator");
            if (script) {
                if (script->is_string()) {
                    const std::string file = resolve(base_dir, script->get<std::string>());
                    env.script = with_field("environment.script", [&] { return read_script_csv(file); });
                } else {
                    env.script = as_matrix(*script, "environment.script");
                }
                if (env.script.front().size() < 2) fail("environment.script", "need at least two arms");
            } else {
                const std::string gp = "environment.generator";
                check_keys(*gen, gp, {"kind", "arms", "base", "kappa", "block"});
                const std::string kind = as_string(require(*gen, gp, "kind"), gp + ".kind");
                if (kind != "alternating") fail(gp + ".kind", "unknown generator '" + kind + "' (alternating)");
                AlternatingGenerator g;
                g.arms = as_count(require(*gen, gp, "arms"), gp + ".arms");
                g.base = as_double(require(*gen, gp, "base"), gp + ".base");
                g.kappa = as_double(require(*gen, gp, "kappa"), gp + ".kappa");
                g.block = find(*gen, "block") ? as_count((*gen)["block"], gp + ".block") : 1;
                if (g.arms < 2) fail(gp + ".arms", "need at least two arms");
                if (g.block < 1) fail(gp + ".block", "must be >= 1");
                if (!(g.kappa >= 0.0)) fail(gp + ".kappa", "must be >= 0");
                env.generator = g;
            }
            const std::size_t k = env.num_arms();
            if (env.features && env.features->num_arms() != k) {
                fail("environment.features", "row count differs from the number of arms");
            }
            break;
        }
        case RegimeKind::Callback: break;
    }

    if (const json* b = find(v, "budget")) {
        env.budget = as_double(*b, "environment.budget");
        if (!(*env.budget >= 0.0)) fail("environment.budget", "must be >= 0");
    }
    if (const json* c = find(v, "corruption")) {
        const std::string cp = "environment.corruption";
        if (!env.budget) fail("environment.budget", "missing (required with corruption)");
        if (env.regime == RegimeKind::AdversarialScript) fail(cp, "corruption applies to stochastic regimes only");
        if (c->is_string()) {
            const std::string file = resolve(base_dir, c->get<std::string>());
            env.corruption = with_field(cp, [&] { return read_corruption_csv(file); });
        } else if (c->is_array()) {
            for (std::size_t i = 0; i < c->size(); ++i) {
                const std::string ep = cp + "[" + std::to_string(i) + "]";
                check_keys((*c)[i], ep, {"t", "arm", "shift"});
                env.corruption.push_back({as_count(require((*c)[i], ep, "t"), ep + ".t"),
                                          as_count(require((*c)[i], ep, "arm"), ep + ".arm"),
                                          as_double(require((*c)[i], ep, "shift"), ep + ".shift")});
            }
        } else {
            check_keys(*c, cp, {"generator", "arm", "shift"});
            const std::string kind = as_string(require(*c, cp, "generator"), cp + ".generator");
            if (kind != "front_loaded") fail(cp + ".generator", "unknown generator '" + kind + "' (front_loaded)");
            FrontLoadedCorruption f;
            f.arm = as_count(require(*c, cp, "arm"), cp + ".arm");
            f.shift = as_double(require(*c, cp, "shift"), cp + ".shift");
            if (f.arm >= env.num_arms()) fail(cp + ".arm", "out of range");
            env.front_loaded = f;
        }
    }
    if (env.budget && env.regime == RegimeKind::AdversarialScript) {
        fail("environment.budget", "corruption applies to stochastic regimes only");
    }

    env.noise = parse_noise(require(v, path, "noise"), "environment.noise", env.scale);
    with_field("environment.noise", [&] {
        env.noise.validate(spec.epsilon());
        return 0;
    });
    return env;
}

PolicyConfig parse_policy(const json& v) {
    check_keys(v, "policy", {"id", "alpha", "clip_scale"});
    PolicyConfig p;
    const std::string id = as_string(require(v, "policy", "id"), "policy.id");
    p.kind = with_field("policy.id", [&] { return policy_kind_from_string(id); });
    if (const json* a = find(v, "alpha")) {
        if (p.kind != PolicyKind::Alg3) fail("policy.alpha", "only alg3 takes alpha");
        p.alpha = as_double(*a, "policy.alpha");
        if (!(*p.alpha >= 0.5 && *p.alpha < 1.0)) fail("policy.alpha", "must lie in [1/2, 1)");
    }
    if (const json* c = find(v, "clip_scale")) {
        p.clip_scale = as_double(*c, "policy.clip_scale");
        if (!(p.clip_scale > 0.0)) fail("policy.clip_scale", "must be positive");
    }
    return p;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
    return line;
}

json matrix_json(const std::vector<Vector>& rows) {
    json out = json::array();
    for (const auto& r : rows) out.push_back(r);
    return out;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::string& base_dir) {
    check_keys(doc, "",
               {"schema_version", "name", "policy", "heavy_tail", "environment", "horizon", "repetitions", "seed",
                "checkpoints", "monitors"});
    const std::size_t version = as_count(require(doc, "", "schema_version"), "schema_version");
    if (version != static_cast<std::size_t>(kSchemaVersion)) {
        fail("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                   std::to_string(kSchemaVersion) + ")");
    }
    ExperimentConfig c;
    if (const json* n = find(doc, "name")) {
        c.name = as_string(*n, "name");
        if (c.name.empty() || c.name.find_first_of(",\"\n") != std::string::npos) {
            fail("name", "must be nonempty without commas, quotes or newlines");
        }
    }
    c.policy = parse_policy(require(doc, "", "policy"));

    const json& ht = require(doc, "", "heavy_tail");
    check_keys(ht, "heavy_tail", {"epsilon", "sigma"});
    const double eps = as_double(require(ht, "heavy_tail", "epsilon"), "heavy_tail.epsilon");
    const double sigma = as_double(require(ht, "heavy_tail", "sigma"), "heavy_tail.sigma");
    if (!(eps > 1.0 && eps <= 2.0)) {
        fail("heavy_tail.epsilon", "moment order must lie in (1, 2], got " + format_double(eps));
    }
    if (!(sigma > 0.0)) fail("heavy_tail.sigma", "moment bound must be positive, got " + format_double(sigma));
    c.spec = HeavyTailSpec(eps, sigma);

    c.environment = parse_environment(require(doc, "", "environment"), base_dir, c.spec);
    c.horizon = as_count(require(doc, "", "horizon"), "horizon");
    if (c.horizon < 1) fail("horizon", "must be >= 1");
    if (const json* r = find(doc, "repetitions")) c.repetitions = as_count(*r, "repetitions");
    if (c.repetitions < 1) fail("repetitions", "must be >= 1");
    if (const json* s = find(doc, "seed")) {
        if (!s->is_number_unsigned()) fail("seed", "expected a nonnegative integer");
        c.seed = s->get<std::uint64_t>();
    }
    if (const json* cps = find(doc, "checkpoints")) {
        if (!cps->is_array()) fail("checkpoints", "expected an array of rounds");
        for (std::size_t i = 0; i < cps->size(); ++i) {
            c.checkpoints.push_back(as_count((*cps)[i], "checkpoints[" + std::to_string(i) + "]"));
        }
    }
    if (const json* m = find(doc, "monitors")) {
        check_keys(*m, "monitors", {"invariants", "entropy"});
        if (const json* b = find(*m, "invariants")) c.monitors.invariants = as_bool(*b, "monitors.invariants");
        if (const json* b = find(*m, "entropy")) c.monitors.entropy = as_bool(*b, "monitors.entropy");
    }
    with_field("checkpoints", [&] {
        c.validate();
        return 0;
    });
    if (c.environment.regime == RegimeKind::AdversarialScript && !c.environment.generator &&
        c.environment.script.size() < c.horizon) {
        fail("environment.script", "has " + std::to_string(c.environment.script.size()) + " rows, horizon is " +
                                       std::to_string(c.horizon));
    }
    // Dry construction: everything except an infeasible moment certificate is
    // a configuration problem.
    try {
        const Environment env = c.environment.build(c.spec, c.horizon);
        const FeatureSet* f = c.environment.features ? &*c.environment.features : env.features();
        make_policy(c.policy, env.num_arms(), f, c.spec, c.horizon);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Infeasible) throw;
        if (e.code() == ErrorCode::Config && std::string(e.what()).rfind("field '", 0) == 0) throw;
        const std::string where = e.code() == ErrorCode::HorizonTooShort ? "horizon" : "environment";
        fail(where, std::string(to_string(e.code())) + ": " + e.what());
    }
    return c;
}

LoadedConfig parse_config_text(const std::string& text, const std::string& base_dir, const std::string& origin) {
    LoadedConfig out;
    try {
        out.source = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, origin + ":" + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    try {
        out.config = parse_config(out.source, base_dir);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Config) throw;
        throw Error(ErrorCode::Config, origin + ": " + e.what());
    }
    return out;
}

LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), std::filesystem::path(path).parent_path().string(), path);
}

json config_to_json(const ExperimentConfig& c) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["name"] = c.name;
    json pol{{"id", to_string(c.policy.kind)}, {"clip_scale", c.policy.clip_scale}};
    if (c.policy.alpha) pol["alpha"] = *c.policy.alpha;
    doc["policy"] = pol;
    doc["heavy_tail"] = {{"epsilon", c.spec.epsilon()}, {"sigma", c.spec.sigma()}};

    const EnvironmentSpec& e = c.environment;
    json env;
    env["regime"] = to_string(e.regime);
    if (e.regime == RegimeKind::StochasticMab) env["means"] = e.means;
    if (e.features) {
        const auto& m = e.features->matrix();
        std::vector<Vector> rows(static_cast<std::size_t>(m.rows()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
        env["features"] = matrix_json(rows);
    }
    if (e.regime == RegimeKind::StochasticLinear) env["theta"] = e.theta;
    if (e.regime == RegimeKind::AdversarialScript) {
        if (e.generator) {
            env["generator"] = {{"kind", "alternating"},
                                {"arms", e.generator->arms},
                                {"base", e.generator->base},
                                {"kappa", e.generator->kappa},
                                {"block", e.generator->block}};
        } else {
            env["script"] = matrix_json(e.script);
        }
    }
    if (e.budget) env["budget"] = *e.budget;
    if (e.front_loaded) {
        env["corruption"] = {{"generator", "front_loaded"}, {"arm", e.front_loaded->arm}, {"shift", e.front_loaded->shift}};
    } else if (!e.corruption.empty()) {
        json ev = json::array();
        for (const auto& x : e.corruption) ev.push_back({{"t", x.t}, {"arm", x.arm}, {"shift", x.shift}});
        env["corruption"] = ev;
    }
    json noise{{"kind", to_string(e.noise.kind)}, {"shape", e.noise.shape}};
    if (e.scale) noise["scale"] = *e.scale;
    env["noise"] = noise;
    doc["environment"] = env;

    doc["horizon"] = c.horizon;
    doc["repetitions"] = c.repetitions;
    doc["seed"] = c.seed;
    doc["checkpoints"] = c.checkpoints;
    doc["monitors"] = {{"invariants", c.monitors.invariants}, {"entropy", c.monitors.entropy}};
    return doc;
}

std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw Error(ErrorCode::Io, "number formatting failed");
    return std::string(buf, end);
}

namespace {

void csv_prefix(std::ostream& out, const ExperimentConfig& c) {
    out << c.name << ',' << to_string(c.policy.kind) << ',' << to_string(c.environment.regime) << ','
        << format_double(c.spec.epsilon()) << ',' << format_double(c.spec.sigma()) << ',';
}

}  // namespace

void write_curve_csv(std::ostream& out, const ExperimentConfig& c, const RegretCurve& curve) {
    out << "run_id,policy,regime,epsilon,sigma,T_checkpoint,mean_regret,stderr,violations_total\n";
    for (std::size_t i = 0; i < curve.checkpoints.size(); ++i) {
        csv_prefix(out, c);
        out << curve.checkpoints[i] << ',' << format_double(curve.mean_regret[i]) << ','
            << format_double(curve.standard_error[i]) << ',' << curve.invariants.hard_total() << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const ExperimentConfig& c, std::span<const ScalingRow> rows) {
    out << "T,run_id,policy,regime,epsilon,sigma,T_checkpoint,mean_regret,stderr,violations_total,"
           "ratio_T_pow_inv_eps,ratio_log_T\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.curve.checkpoints.size(); ++i) {
            const double cp = static_cast<double>(row.curve.checkpoints[i]);
            const double m = row.curve.mean_regret[i];
            out << row.horizon << ',';
            csv_prefix(out, c);
            out << row.curve.checkpoints[i] << ',' << format_double(m) << ','
                << format_double(row.curve.standard_error[i]) << ',' << row.curve.invariants.hard_total() << ','
                << format_double(m / std::pow(cp, 1.0 / c.spec.epsilon())) << ','
                << format_double(cp > 1.0 ? m / std::log(cp) : 0.0) << '\n';
        }
    }
}

json invariant_summary_json(const InvariantSummary& s) {
    return {{"simplex_normalized", s.simplex_normalized},
            {"gamma_at_most_half", s.gamma_at_most_half},
            {"bonus_within_threshold", s.bonus_within_threshold},
            {"clip_contained", s.clip_contained},
            {"beta_monotone", s.beta_monotone},
            {"entropy_stable_soft", s.entropy_stable},
            {"hard_total", s.hard_total()}};
}

namespace {

json curve_json(const RegretCurve& curve) {
    json rows = json::array();
    for (std::size_t i = 0; i < curve.checkpoints.size(); ++i) {
        rows.push_back({{"T_checkpoint", curve.checkpoints[i]},
                        {"mean_regret", curve.mean_regret[i]},
                        {"stderr", curve.standard_error[i]}});
    }
    return {{"checkpoints", rows},
            {"per_seed", curve.per_seed},
            {"comparators", curve.comparators},
            {"violations", invariant_summary_json(curve.invariants)},
            {"violations_total", curve.invariants.hard_total()},
            {"failed_repetitions", curve.failures},
            {"ok", curve.ok()}};
}

}  // namespace

json curve_summary_json(const LoadedConfig& loaded, const RegretCurve& curve) {
    const ExperimentConfig& c = loaded.config;
    json out = curve_json(curve);
    out["run_id"] = c.name;
    out["policy"] = to_string(c.policy.kind);
    out["regime"] = to_string(c.environment.regime);
    out["epsilon"] = c.spec.epsilon();
    out["sigma"] = c.spec.sigma();
    out["config"] = loaded.source;
    return out;
}

json sweep_summary_json(const LoadedConfig& loaded, std::span<const ScalingRow> rows) {
    const ExperimentConfig& c = loaded.config;
    json hs = json::array();
    bool ok = true;
    for (const auto& row : rows) {
        json r = curve_json(row.curve);
        r["T"] = row.horizon;
        r["mean_regret"] = row.mean_regret;
        r["stderr"] = row.standard_error;
        r["ratio_T_pow_inv_eps"] = row.ratio_power;
        r["ratio_log_T"] = row.ratio_log;
        ok = ok && row.curve.ok();
        hs.push_back(r);
    }
    return {{"run_id", c.name},
            {"policy", to_string(c.policy.kind)},
            {"regime", to_string(c.environment.regime)},
            {"epsilon", c.spec.epsilon()},
            {"sigma", c.spec.sigma()},
            {"horizons", hs},
            {"ok", ok},
            {"config", loaded.source}};
}

json round_record_json(const RoundRecord& rec, const Vector& means) {
    auto dist = [](const std::optional<SimplexDistribution>& d) -> json {
        if (!d) return nullptr;
        return Vector(d->weights().begin(), d->weights().end());
    };
    auto opt = [](const std::optional<double>& x) -> json {
        if (!x) return nullptr;
        return *x;
    };
    const InvariantFlags& f = rec.flags;
    return {{"t", rec.t},
            {"q", dist(rec.q)},
            {"p", dist(rec.p)},
            {"u", rec.uniform_draw},
            {"arm", rec.chosen_arm},
            {"loss", rec.observed_loss},
            {"means", means},
            {"raw_estimate", rec.raw_estimate},
            {"clipped_estimate", rec.clipped_estimate},
            {"bonus", rec.bonus},
            {"clip_thresholds", rec.clip_thresholds},
            {"gamma", rec.gamma},
            {"beta", rec.beta},
            {"beta_lo", opt(rec.beta_lo)},
            {"entropy", opt(rec.entropy)},
            {"z", opt(rec.z)},
            {"w", opt(rec.w)},
            {"next_beta", opt(rec.next_beta)},
            {"next_beta_lo", opt(rec.next_beta_lo)},
            {"flags",
             {{"simplex_normalized", f.simplex_normalized},
              {"gamma_at_most_half", f.gamma_at_most_half},
              {"bonus_within_threshold", f.bonus_within_threshold},
              {"clip_contained", f.clip_contained},
              {"beta_monotone", f.beta_monotone},
              {"entropy_stable", f.entropy_stable}}}};
}

}  // namespace htb
