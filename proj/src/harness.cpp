#include "htb/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace htb {

std::size_t EnvironmentSpec::num_arms() const {
    switch (regime) {
        case RegimeKind::StochasticMab: return means.size();
        case RegimeKind::StochasticLinear: return features ? features->num_arms() : 0;
        case RegimeKind::AdversarialScript:
            if (generator) return generator->arms;
            return script.empty() ? 0 : script.front().size();
        case RegimeKind::Callback: return 0;
    }
    return 0;
}

Environment EnvironmentSpec::build(const HeavyTailSpec& spec, std::size_t horizon) const {
    std::optional<Environment> env;
    switch (regime) {
        case RegimeKind::StochasticMab: env = Environment::stochastic_mab(means, noise, spec, horizon); break;
        case RegimeKind::StochasticLinear: {
            if (!features) throw Error(ErrorCode::Config, "linear regime needs features");
            Eigen::VectorXd th = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
            env = Environment::stochastic_linear(*features, th, noise, spec, horizon);
            break;
        }
        case RegimeKind::AdversarialScript: {
            MeanScript rows;
            if (generator) {
                rows = alternating_script(generator->arms, horizon, generator->base, generator->kappa, generator->block,
                                          spec.epsilon());
            } else {
                if (script.size() < horizon) {
                    throw Error(ErrorCode::Config, "script has " + std::to_string(script.size()) +
                                                       " rows, horizon is " + std::to_string(horizon));
                }
                rows.assign(script.begin(), script.begin() + static_cast<std::ptrdiff_t>(horizon));
            }
            env = Environment::scripted(std::move(rows), noise, spec);
            break;
        }
        case RegimeKind::Callback:
            throw Error(ErrorCode::Config, "callback adversaries are not configurable");
    }
    if (budget) {
        auto events = corruption;
        if (front_loaded) {
            auto extra = front_loaded_corruption(front_loaded->arm, front_loaded->shift, *budget);
            extra.erase(std::remove_if(extra.begin(), extra.end(), [&](const auto& e) { return e.t > horizon; }),
                        extra.end());
            events.insert(events.end(), extra.begin(), extra.end());
        }
        env->corrupt(std::move(events), *budget);
    } else if (!corruption.empty() || front_loaded) {
        throw Error(ErrorCode::Config, "corruption schedule given without a budget");
    }
    if (scale) env->set_scale(*scale);
    return std::move(*env);
}

void ExperimentConfig::validate() const {
    if (repetitions < 1) throw Error(ErrorCode::Config, "repetitions must be >= 1");
    if (horizon < 1) throw Error(ErrorCode::Config, "horizon must be >= 1");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || checkpoints[i] > horizon) {
            throw Error(ErrorCode::Config, "checkpoint " + std::to_string(checkpoints[i]) + " outside 1.." +
                                               std::to_string(horizon));
        }
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
            throw Error(ErrorCode::Config, "checkpoints must be strictly increasing");
        }
    }
    if (!(policy.clip_scale > 0.0)) throw Error(ErrorCode::Config, "clip_scale must be positive");
}

std::vector<std::size_t> ExperimentConfig::effective_checkpoints() const {
    if (checkpoints.empty()) return {horizon};
    return checkpoints;
}

ExperimentConfig ExperimentConfig::with_horizon(std::size_t t) const {
    ExperimentConfig c = *this;
    c.horizon = t;
    c.checkpoints.clear();
    for (std::size_t cp : checkpoints) {
        if (cp < t) c.checkpoints.push_back(cp);
    }
    c.checkpoints.push_back(t);
    return c;
}

void InvariantSummary::add(const InvariantFlags& f, const Monitors& monitors) {
    if (monitors.invariants) {
        simplex_normalized += !f.simplex_normalized;
        gamma_at_most_half += !f.gamma_at_most_half;
        bonus_within_threshold += !f.bonus_within_threshold;
        clip_contained += !f.clip_contained;
        beta_monotone += !f.beta_monotone;
    }
    if (monitors.entropy) entropy_stable += !f.entropy_stable;
}

void InvariantSummary::merge(const InvariantSummary& o) {
    simplex_normalized += o.simplex_normalized;
    gamma_at_most_half += o.gamma_at_most_half;
    bonus_within_threshold += o.bonus_within_threshold;
    clip_contained += o.clip_contained;
    beta_monotone += o.beta_monotone;
    entropy_stable += o.entropy_stable;
}

std::size_t InvariantSummary::hard_total() const {
    return simplex_normalized + gamma_at_most_half + bonus_within_threshold + clip_contained + beta_monotone;
}

double pseudo_regret_increment(const SimplexDistribution& p, std::span<const double> means, std::size_t comparator) {
    if (means.size() != p.size()) throw Error(ErrorCode::DimensionMismatch, "p and means differ in K");
    if (comparator >= p.size()) throw Error(ErrorCode::InvalidArgument, "comparator out of range");
    const double mc = means[comparator];
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) acc += p[a] * (means[a] - mc);
    return acc;
}

RepetitionResult run_repetition(const ExperimentConfig& config, const Environment& prototype, std::uint64_t seed,
                                const RoundObserver& observer, std::optional<std::size_t> rounds) {
    RepetitionResult out;
    const std::size_t horizon = rounds ? std::min(*rounds, config.horizon) : config.horizon;
    std::vector<std::size_t> checkpoints;
    for (std::size_t cp : config.effective_checkpoints()) {
        if (cp <= horizon) checkpoints.push_back(cp);
    }
    try {
        Environment env = prototype;
        const std::size_t k = env.num_arms();
        const FeatureSet* features = config.environment.features ? &*config.environment.features : env.features();
        auto policy = make_policy(config.policy, k, features, config.spec, config.horizon);
        Rng rng(seed);

        // regret_vs[c]: running regret against arm c; total[c]: running sum of m_{t,c}.
        Vector regret_vs(k, 0.0), total(k, 0.0);
        std::vector<Vector> snap_regret, snap_total;
        std::size_t next_cp = 0;
        for (std::size_t t = 1; t <= horizon; ++t) {
            const SimplexDistribution& p = policy->select();
            const Vector m = env.expected_losses(t);
            for (std::size_t c = 0; c < k; ++c) {
                regret_vs[c] += pseudo_regret_increment(p, m, c);
                total[c] += m[c];
            }
            const double u = uniform01(rng);
            const std::size_t arm = sample_arm(p, u);
            const double loss = env.sample_loss(t, arm, rng);
            env.record_action(arm);
            const RoundRecord rec = policy->observe(arm, u, loss);
            out.invariants.add(rec.flags, config.monitors);
            if (observer) observer(rec, m);
            if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
                snap_regret.push_back(regret_vs);
                snap_total.push_back(total);
                ++next_cp;
            }
        }
        out.comparator = static_cast<std::size_t>(std::min_element(total.begin(), total.end()) - total.begin());
        out.regret.reserve(checkpoints.size());
        for (const auto& row : snap_regret) out.regret.push_back(row[out.comparator]);
    } catch (const Error& e) {
        out.error = std::string(to_string(e.code())) + ": " + e.what();
        out.regret.clear();
    }
    return out;
}

RegretCurve run_experiment(const ExperimentConfig& config, Execution exec) {
    config.validate();
    const Environment prototype = config.environment.build(config.spec, config.horizon);
    prototype.require_certified();

    const std::size_t reps = config.repetitions;
    std::vector<RepetitionResult> results(reps);
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(reps); ++r) {
            const auto ru = static_cast<std::size_t>(r);
            results[ru] = run_repetition(config, prototype, config.seed + ru);
        }
    } else {
        for (std::size_t r = 0; r < reps; ++r) results[r] = run_repetition(config, prototype, config.seed + r);
    }

    RegretCurve curve;
    curve.checkpoints = config.effective_checkpoints();
    const std::size_t n_cp = curve.checkpoints.size();
    curve.per_seed.resize(reps);
    curve.comparators.resize(reps);
    std::size_t ok = 0;
    Vector sum(n_cp, 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
        curve.invariants.merge(results[r].invariants);
        if (results[r].error) {
            curve.failures.push_back("repetition " + std::to_string(r) + ": " + *results[r].error);
            continue;
        }
        curve.per_seed[r] = results[r].regret;
        curve.comparators[r] = results[r].comparator;
        for (std::size_t i = 0; i < n_cp; ++i) sum[i] += results[r].regret[i];
        ++ok;
    }
    curve.mean_regret.assign(n_cp, 0.0);
    curve.standard_error.assign(n_cp, 0.0);
    if (ok == 0) return curve;
    for (std::size_t i = 0; i < n_cp; ++i) curve.mean_regret[i] = sum[i] / static_cast<double>(ok);
    if (ok > 1) {
        for (std::size_t i = 0; i < n_cp; ++i) {
            double ss = 0.0;
            for (std::size_t r = 0; r < reps; ++r) {
                if (results[r].error) continue;
                const double d = results[r].regret[i] - curve.mean_regret[i];
                ss += d * d;
            }
            curve.standard_error[i] = std::sqrt(ss / static_cast<double>(ok - 1)) / std::sqrt(static_cast<double>(ok));
        }
    }
    return curve;
}

std::vector<ScalingRow> scaling_probe(const ExperimentConfig& config, std::span<const std::size_t> horizons,
                                      Execution exec) {
    if (horizons.size() < 3) throw Error(ErrorCode::Config, "scaling probe needs at least three horizons");
    for (std::size_t i = 1; i < horizons.size(); ++i) {
        if (horizons[i] <= horizons[i - 1]) throw Error(ErrorCode::Config, "horizons must be increasing");
    }
    std::vector<ScalingRow> rows;
    for (std::size_t t : horizons) {
        if (t < 2) throw Error(ErrorCode::Config, "horizons must be at least 2");
        ScalingRow row;
        row.horizon = t;
        row.curve = run_experiment(config.with_horizon(t), exec);
        row.mean_regret = row.curve.mean_regret.back();
        row.standard_error = row.curve.standard_error.back();
        const double td = static_cast<double>(t);
        row.ratio_power = row.mean_regret / std::pow(td, 1.0 / config.spec.epsilon());
        row.ratio_log = row.mean_regret / std::log(td);
        rows.push_back(std::move(row));
    }
    return rows;
}

int configure_threads_from_env() {
    if (const char* v = std::getenv("HTB_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(v, &end, 10);
        if (end == v || *end != '\0' || n < 0) {
            throw Error(ErrorCode::Config, std::string("HTB_THREADS must be a nonnegative integer, got '") + v + "'");
        }
        if (n > 0) omp_set_num_threads(static_cast<int>(n));
    }
    return omp_get_max_threads();
}

}  // namespace htb
