// htb: command-line driver for regret experiments.
//
//   htb run --config C --out results.csv
//   htb sweep --config C --horizons 4096,8192,16384 --out sweep.csv
//   htb check-design --features arms.csv [--header]
//   htb validate-moments --config C
//   htb trace --config C --out trace.jsonl [--rounds N]
//   htb trace --replay trace.jsonl
//
// Exit status: 0 success, 1 runtime or invariant failure, 2 configuration error.

#include "htb/config.hpp"
#include "htb/optimal_design.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    std::vector<std::size_t> horizons;
    std::string features;
    bool header = false;
    std::string replay;
    std::optional<std::size_t> rounds;
    std::size_t samples = 200000;
};

// Config-stage failures are reported with exit status 2.
struct ConfigFailure {
    std::string message;
};

htb::LoadedConfig load(const Options& o) {
    try {
        auto loaded = htb::load_config(o.config);
        if (o.seed) loaded.config.seed = *o.seed;
        return loaded;
    } catch (const htb::Error& e) {
        if (e.code() == htb::ErrorCode::Config || e.code() == htb::ErrorCode::Io) throw ConfigFailure{e.what()};
        throw;
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw htb::Error(htb::ErrorCode::Io, "cannot write " + path);
    out << content;
    if (!out) throw htb::Error(htb::ErrorCode::Io, "write failed for " + path);
}

std::string summary_path(const std::string& csv) {
    std::filesystem::path p(csv);
    return (p.parent_path() / (p.stem().string() + ".summary.json")).string();
}

void emit(const Options& o, const std::string& csv, const json& summary) {
    if (o.out.empty()) {
        std::cout << csv;
        return;
    }
    write_file(o.out, csv);
    write_file(summary_path(o.out), summary.dump(2) + "\n");
}

void report(const Options& o, const std::string& msg) {
    if (!o.quiet) std::cerr << msg << "\n";
}

int cmd_run(const Options& o) {
    const auto loaded = load(o);
    const auto curve = htb::run_experiment(loaded.config);
    std::ostringstream csv;
    htb::write_curve_csv(csv, loaded.config, curve);
    emit(o, csv.str(), htb::curve_summary_json(loaded, curve));
    for (const auto& f : curve.failures) std::cerr << "failed " << f << "\n";
    report(o, "violations: " + std::to_string(curve.invariants.hard_total()) + " hard, " +
                  std::to_string(curve.invariants.entropy_stable) + " soft; failed repetitions: " +
                  std::to_string(curve.failures.size()));
    return curve.ok() ? kOk : kFailure;
}

int cmd_sweep(const Options& o) {
    const auto loaded = load(o);
    if (o.horizons.empty()) throw ConfigFailure{"sweep needs --horizons"};
    std::vector<htb::ScalingRow> rows;
    try {
        rows = htb::scaling_probe(loaded.config, o.horizons);
    } catch (const htb::Error& e) {
        if (e.code() == htb::ErrorCode::Config) throw ConfigFailure{e.what()};
        throw;
    }
    std::ostringstream csv;
    htb::write_sweep_csv(csv, loaded.config, rows);
    const json summary = htb::sweep_summary_json(loaded, rows);
    emit(o, csv.str(), summary);
    bool ok = true;
    for (const auto& r : rows) {
        for (const auto& f : r.curve.failures) std::cerr << "T=" << r.horizon << " failed " << f << "\n";
        ok = ok && r.curve.ok();
    }
    return ok ? kOk : kFailure;
}

json design_json(const htb::DesignResult& r, std::size_t d) {
    const double bound = static_cast<double>(d) * (1.0 + htb::kDefaultDesignTol);
    return {{"distribution", htb::Vector(r.distribution.weights().begin(), r.distribution.weights().end())},
            {"max_leverage", r.max_leverage},
            {"bound", bound},
            {"iterations", r.iterations},
            {"certified", r.max_leverage <= bound}};
}

int cmd_check_design(const Options& o) {
    std::optional<htb::FeatureSet> features;
    try {
        if (!o.features.empty()) {
            features = htb::FeatureSet::from_csv_file(o.features, o.header);
        } else if (!o.config.empty()) {
            const auto loaded = load(o);
            if (!loaded.config.environment.features) throw ConfigFailure{"config has no environment.features"};
            features = loaded.config.environment.features;
        } else {
            throw ConfigFailure{"check-design needs --features or --config"};
        }
    } catch (const htb::Error& e) {
        throw ConfigFailure{e.what()};
    }
    const std::size_t d = features->ambient_dim();
    json out{{"arms", features->num_arms()}, {"dimension", d}};
    bool ok = true;
    try {
        const auto g = htb::g_optimal_design(*features);
        out["g_optimal"] = design_json(g, d);
        ok = ok && out["g_optimal"]["certified"].get<bool>();
    } catch (const htb::Error& e) {
        out["g_optimal"] = {{"error", std::string(htb::to_string(e.code())) + ": " + e.what()}};
        ok = false;
    }
    try {
        const auto c = htb::centered_optimal_design(*features);
        out["centered"] = design_json(c, d);
        ok = ok && out["centered"]["certified"].get<bool>();
    } catch (const htb::Error& e) {
        out["centered"] = {{"error", std::string(htb::to_string(e.code())) + ": " + e.what()}};
        ok = false;
    }
    out["ok"] = ok;
    const std::string text = out.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        write_file(o.out, text);
    }
    return ok ? kOk : kFailure;
}

int cmd_validate(const Options& o) {
    const auto loaded = load(o);
    const auto& c = loaded.config;
    htb::Environment env = [&] {
        try {
            return c.environment.build(c.spec, c.horizon);
        } catch (const htb::Error& e) {
            if (e.code() == htb::ErrorCode::Infeasible) throw;
            throw ConfigFailure{e.what()};
        }
    }();
    const double sigma = c.spec.sigma();
    const double order = c.spec.epsilon() - 0.1;
    const auto certs = env.certificates();
    const auto mc = htb::monte_carlo_moments(env, 1, order, o.samples, c.seed);
    json arms = json::array();
    bool ok = true;
    for (std::size_t a = 0; a < env.num_arms(); ++a) {
        const bool cert_ok = certs[a] <= sigma;
        const bool mc_ok = mc[a].estimate - 3.0 * mc[a].standard_error <= mc[a].bound * (1.0 + 1e-12);
        ok = ok && cert_ok && mc_ok;
        arms.push_back({{"arm", a},
                        {"certificate", certs[a]},
                        {"certified", cert_ok},
                        {"mc_order", order},
                        {"mc_estimate", mc[a].estimate},
                        {"mc_stderr", mc[a].standard_error},
                        {"mc_bound", mc[a].bound},
                        {"mc_ok", mc_ok}});
    }
    json out{{"epsilon", c.spec.epsilon()},
             {"sigma", sigma},
             {"noise", htb::to_string(env.noise().kind)},
             {"shape", env.noise().shape},
             {"scale", env.scale()},
             {"samples", o.samples},
             {"arms", arms},
             {"ok", ok}};
    const std::string text = out.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        write_file(o.out, text);
    }
    return ok ? kOk : kFailure;
}

struct TraceResult {
    std::vector<std::string> lines;
    bool ok = true;
};

TraceResult produce_trace(const htb::ExperimentConfig& config, std::optional<std::size_t> rounds) {
    const htb::Environment env = config.environment.build(config.spec, config.horizon);
    env.require_certified();
    const std::size_t n = rounds ? std::min(*rounds, config.horizon) : config.horizon;
    TraceResult out;
    out.lines.push_back(json{{"type", "header"},
                             {"format", "htb-trace"},
                             {"version", htb::kSchemaVersion},
                             {"rounds", n},
                             {"config", htb::config_to_json(config)}}
                            .dump());
    const auto rep = htb::run_repetition(config, env, config.seed,
                                         [&](const htb::RoundRecord& rec, const htb::Vector& means) {
                                             out.lines.push_back(htb::round_record_json(rec, means).dump());
                                         },
                                         n);
    if (rep.error) {
        std::cerr << "trace failed: " << *rep.error << "\n";
        out.ok = false;
    }
    if (rep.invariants.hard_total() > 0) {
        std::cerr << "trace has " << rep.invariants.hard_total() << " invariant violations\n";
        out.ok = false;
    }
    return out;
}

std::string joined(const std::vector<std::string>& lines) {
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    return s;
}

int cmd_trace(const Options& o) {
    if (o.replay.empty()) {
        if (o.config.empty()) throw ConfigFailure{"trace needs --config or --replay"};
        const auto loaded = load(o);
        const auto tr = produce_trace(loaded.config, o.rounds);
        if (o.out.empty()) {
            std::cout << joined(tr.lines);
        } else {
            write_file(o.out, joined(tr.lines));
        }
        return tr.ok ? kOk : kFailure;
    }

    std::ifstream in(o.replay, std::ios::binary);
    if (!in) throw ConfigFailure{"cannot open " + o.replay};
    std::vector<std::string> prior;
    for (std::string line; std::getline(in, line);) prior.push_back(line);
    if (prior.empty()) throw ConfigFailure{o.replay + ": empty trace"};
    htb::ExperimentConfig config;
    std::size_t rounds = 0;
    try {
        const json header = json::parse(prior.front());
        if (header.value("format", "") != "htb-trace") throw ConfigFailure{o.replay + ": not an htb trace"};
        config = htb::parse_config(header.at("config"), "");
        rounds = header.at("rounds").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ConfigFailure{o.replay + ":1: " + e.what()};
    } catch (const htb::Error& e) {
        throw ConfigFailure{o.replay + ":1: " + e.what()};
    }
    if (o.seed) config.seed = *o.seed;
    const auto tr = produce_trace(config, rounds);
    if (!o.out.empty()) write_file(o.out, joined(tr.lines));
    const std::size_t n = std::max(prior.size(), tr.lines.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& a = i < prior.size() ? prior[i] : std::string("<missing>");
        const std::string& b = i < tr.lines.size() ? tr.lines[i] : std::string("<missing>");
        if (a != b) {
            std::cerr << o.replay << ":" << i + 1 << ": replay differs\n  recorded: " << a << "\n  replayed: " << b
                      << "\n";
            return kFailure;
        }
    }
    report(o, "replay identical: " + std::to_string(tr.lines.size() - 1) + " rounds");
    return tr.ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heavy-tailed bandit experiments"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", o.config, "Experiment config (JSON)");
        if (config_required) c->required();
        c->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output path (stdout when omitted)");
        sub->add_option("--seed", o.seed, "Override the base seed");
        sub->add_flag("--quiet", o.quiet, "No progress messages");
    };

    auto* run = app.add_subcommand("run", "Run an experiment; writes the regret CSV and a summary JSON");
    add_common(run, true);
    auto* sweep = app.add_subcommand("sweep", "Run an experiment at several horizons");
    add_common(sweep, true);
    sweep->add_option("--horizons", o.horizons, "Increasing horizons")->delimiter(',')->required();
    auto* design = app.add_subcommand("check-design", "G-optimal and centered designs of a feature set");
    add_common(design, false);
    design->add_option("--features", o.features, "Feature CSV, one arm per row")->check(CLI::ExistingFile);
    design->add_flag("--header", o.header, "Skip the first CSV line");
    auto* validate = app.add_subcommand("validate-moments", "Moment certificates of the configured environment");
    add_common(validate, true);
    validate->add_option("--samples", o.samples, "Monte Carlo draws per arm")->check(CLI::Range(2, 1 << 30));
    auto* trace = app.add_subcommand("trace", "Per-round JSON-lines trace of one repetition");
    add_common(trace, false);
    trace->add_option("--rounds", o.rounds, "Stop after this many rounds");
    trace->add_option("--replay", o.replay, "Re-execute a recorded trace and compare byte for byte")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        htb::configure_threads_from_env();
        if (*run) return cmd_run(o);
        if (*sweep) return cmd_sweep(o);
        if (*design) return cmd_check_design(o);
        if (*validate) return cmd_validate(o);
        if (*trace) return cmd_trace(o);
    } catch (const ConfigFailure& e) {
        std::cerr << "config error: " << e.message << "\n";
        return kConfigError;
    } catch (const htb::Error& e) {
        if (e.code() == htb::ErrorCode::Config) {
            std::cerr << "config error: " << e.what() << "\n";
            return kConfigError;
        }
        std::cerr << "error (" << htb::to_string(e.code()) << "): " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
