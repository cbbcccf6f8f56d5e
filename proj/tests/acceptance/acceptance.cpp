// Acceptance suite: one PASS/FAIL line per criterion. Every threshold and
// runtime budget is pinned below. Exit status 0 iff every selected criterion
// passes.
//
//   htb_acceptance --htb PATH_TO_HTB --golden DIR [--only 1,5,9]

#include "htb/core_types.hpp"
#include "htb/estimators_bonuses.hpp"
#include "htb/harness.hpp"
#include "htb/optimal_design.hpp"
#include "htb/policies.hpp"
#include "htb/simplex_ftrl.hpp"
#include "oracles/bias_oracle.hpp"
#include "oracles/ftrl_oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace htb;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Eigen::MatrixXd gaussian_rows(std::mt19937_64& rng, std::size_t k, std::size_t d) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = n(rng);
    }
    return m;
}

/// Dirichlet(conc) draw mixed with `floor` of uniform mass.
std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t k, double conc, double floor) {
    std::gamma_distribution<double> g(conc, 1.0);
    std::vector<double> w(k);
    for (auto& x : w) x = g(rng) + 1e-300;
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x = (1.0 - floor) * x / s + floor / static_cast<double>(k);
    return w;
}

// ------------------------------------------------------------ criterion 1

constexpr double kFtrlObjectiveTol = 1e-8;
constexpr int kFtrlInstances = 50;

Outcome ftrl_oracle() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    std::string worst_where;
    int count = 0;
    for (std::size_t k : {2, 3}) {
        for (auto kind : {RegularizerKind::Shannon, RegularizerKind::Tsallis, RegularizerKind::HybridTsallis}) {
            for (int i = 0; i < kFtrlInstances; ++i) {
                const double alpha = uniform(rng, 0.1, 0.9);
                RegularizerSpec reg = RegularizerSpec::shannon();
                if (kind == RegularizerKind::Tsallis) reg = RegularizerSpec::tsallis(alpha);
                if (kind == RegularizerKind::HybridTsallis) {
                    reg = RegularizerSpec::hybrid(alpha, alpha * uniform(rng, 0.2, 1.0), uniform(rng, 0.0, 5.0));
                }
                const double beta = uniform(rng, 0.2, 10.0);
                std::vector<double> loss(k);
                for (auto& x : loss) x = uniform(rng, -5.0, 5.0);
                const auto sol = solve_ftrl(reg, loss, beta);
                const auto ref = oracle::brute_force_minimizer(reg, loss, beta);
                const double gap =
                    std::abs(ftrl_objective(reg, loss, beta, sol.q.weights()) - ftrl_objective(reg, loss, beta, ref));
                if (gap > worst) {
                    worst = gap;
                    worst_where = "K=" + std::to_string(k) + " instance " + std::to_string(i);
                }
                ++count;
            }
        }
    }
    return {worst <= kFtrlObjectiveTol, std::to_string(count) + " instances, max |objective gap| " + fmt(worst) +
                                            " (" + worst_where + ") <= " + fmt(kFtrlObjectiveTol)};
}

// ------------------------------------------------------------ criterion 2

constexpr double kDesignSlack = 1e-3;
constexpr int kDesignSets = 100;

Outcome design_certificates() {
    std::mt19937_64 rng(202);
    double worst_g = 0.0, worst_c = 0.0;
    for (int i = 0; i < kDesignSets; ++i) {
        const std::size_t d = uniform_int(rng, 1, 5);
        const std::size_t k = uniform_int(rng, d + 1, 30);
        Eigen::MatrixXd rows = gaussian_rows(rng, k, d);
        // Anisotropic scaling on every other set.
        if (i % 2 == 1) {
            for (Eigen::Index j = 0; j < rows.cols(); ++j) rows.col(j) *= std::pow(10.0, uniform(rng, -1.0, 1.0));
        }
        const FeatureSet fs(rows);
        const auto g = g_optimal_design(fs);
        const auto c = centered_optimal_design(fs);
        // Leverages recomputed from the returned weights with an explicit inverse.
        auto lev = [&](std::span<const double> p, bool centered) {
            Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
            if (centered) {
                for (std::size_t a = 0; a < k; ++a) mu += p[a] * rows.row(static_cast<Eigen::Index>(a)).transpose();
            }
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
            for (std::size_t a = 0; a < k; ++a) {
                const Eigen::VectorXd x = rows.row(static_cast<Eigen::Index>(a)).transpose() - mu;
                m += p[a] * x * x.transpose();
            }
            const Eigen::MatrixXd inv = m.inverse();
            double best = 0.0;
            for (std::size_t a = 0; a < k; ++a) {
                const Eigen::VectorXd x = rows.row(static_cast<Eigen::Index>(a)).transpose() - mu;
                best = std::max(best, x.dot(inv * x));
            }
            return best;
        };
        const double dd = static_cast<double>(d);
        worst_g = std::max(worst_g, lev(g.distribution.weights(), false) / dd);
        worst_c = std::max(worst_c, lev(c.distribution.weights(), true) / dd);
    }
    const double bound = 1.0 + kDesignSlack;
    return {worst_g <= bound && worst_c <= bound,
            std::to_string(kDesignSets) + " sets, max leverage / d: G-optimal " + fmt(worst_g, 10) + ", centered " +
                fmt(worst_c, 10) + " <= " + fmt(bound, 10)};
}

// ------------------------------------------------------------ criterion 3

constexpr std::size_t kUnbiasedDraws = 1000000;
constexpr double kUnbiasedZ = 3.0;
constexpr int kGeometries = 10;

Outcome unbiased_differences() {
    std::mt19937_64 rng(303);
    const HeavyTailSpec spec(2.0, 1.0);
    const double half_width = 0.5;
    double worst_z = 0.0;
    std::size_t pairs = 0;
    for (int gi = 0; gi < kGeometries; ++gi) {
        const std::size_t d = uniform_int(rng, 2, 3);
        const std::size_t k = uniform_int(rng, d + 1, 6);
        const Eigen::MatrixXd rows = gaussian_rows(rng, k, d);
        const FeatureSet fs(rows);
        Eigen::VectorXd theta(static_cast<Eigen::Index>(d));
        for (auto& x : theta) x = uniform(rng, -0.5, 0.5);
        const Eigen::VectorXd m = rows * theta;
        const SimplexDistribution p(random_distribution(rng, k, 1.0, 0.3));
        const std::vector<double> s(k, 1e300);
        for (auto kind : {EstimatorKind::Linear, EstimatorKind::VarianceReduced}) {
            std::mt19937_64 draw(1000 + static_cast<std::uint64_t>(gi));
            std::vector<double> sum(k * k, 0.0), sq(k * k, 0.0);
            for (std::size_t n = 0; n < kUnbiasedDraws; ++n) {
                const std::size_t arm = sample_arm(p, uniform01(draw));
                const double loss = m(static_cast<Eigen::Index>(arm)) + half_width * (2.0 * uniform01(draw) - 1.0);
                const auto e = kind == EstimatorKind::Linear ? linear_estimate(arm, loss, p, fs, s, spec)
                                                             : vr_linear_estimate(arm, loss, p, fs, s, spec);
                for (std::size_t a = 0; a < k; ++a) {
                    for (std::size_t b = a + 1; b < k; ++b) {
                        const double x = e.raw_estimate[a] - e.raw_estimate[b];
                        sum[a * k + b] += x;
                        sq[a * k + b] += x * x;
                    }
                }
            }
            const double nn = static_cast<double>(kUnbiasedDraws);
            for (std::size_t a = 0; a < k; ++a) {
                for (std::size_t b = a + 1; b < k; ++b) {
                    const double mean = sum[a * k + b] / nn;
                    const double var = (sq[a * k + b] - nn * mean * mean) / (nn - 1.0);
                    const double se = std::sqrt(std::max(var, 0.0) / nn);
                    const double dev = std::abs(mean - (m(static_cast<Eigen::Index>(a)) - m(static_cast<Eigen::Index>(b))));
                    worst_z = std::max(worst_z, se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : INFINITY));
                    ++pairs;
                }
            }
        }
    }
    return {worst_z <= kUnbiasedZ, std::to_string(kGeometries) + " geometries x 2 estimators, " +
                                       std::to_string(pairs) + " pairs, " + std::to_string(kUnbiasedDraws) +
                                       " draws: max |deviation| / SE " + fmt(worst_z) + " <= " + fmt(kUnbiasedZ)};
}

// ------------------------------------------------------------ criterion 4

constexpr int kVarianceTriples = 500;
constexpr double kLibraryAgreement = 1e-9;

Outcome variance_bound() {
    std::mt19937_64 rng(404);
    double worst_ratio = 0.0, worst_agree = 0.0;
    for (int i = 0; i < kVarianceTriples; ++i) {
        const std::size_t d = uniform_int(rng, 1, 5);
        const std::size_t k = uniform_int(rng, d + 1, 30);
        const Eigen::MatrixXd rows = gaussian_rows(rng, k, d);
        const FeatureSet fs(rows);
        const double eps = 2.0 - uniform(rng, 0.0, 1.0);
        // Concentrations from very peaked to nearly uniform.
        const auto w = random_distribution(rng, k, std::pow(10.0, uniform(rng, -2.0, 1.0)), 1e-6);
        const SimplexDistribution p(w);
        const std::vector<double> pw(p.weights().begin(), p.weights().end());
        const Eigen::MatrixXd kern = oracle::kernel(oracle::Kind::Centered, pw, rows);
        double lhs = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                lhs += p[a] * p[b] *
                       std::pow(std::abs(kern(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))), eps);
            }
        }
        const double pmax = *std::max_element(p.weights().begin(), p.weights().end());
        const double rhs = 4.0 * std::pow(static_cast<double>(d), eps / 2.0) * std::pow(1.0 - pmax, 2.0 - eps);
        worst_ratio = std::max(worst_ratio, lhs / rhs);
        const auto lib = variance_bound_check(p, fs, eps);
        worst_agree = std::max({worst_agree, std::abs(lib.lhs - lhs) / lhs, std::abs(lib.rhs - rhs) / rhs});
    }
    return {worst_ratio <= 1.0 && worst_agree <= kLibraryAgreement,
            std::to_string(kVarianceTriples) + " triples: max lhs / rhs " + fmt(worst_ratio) +
                " <= 1; library vs oracle relative difference " + fmt(worst_agree) + " <= " + fmt(kLibraryAgreement)};
}

// ------------------------------------------------------------ criterion 5

constexpr std::size_t kInvariantHorizon = 10000;
constexpr std::size_t kInvariantSeeds = 5;

EnvironmentSpec linear_instance(std::uint64_t seed, std::size_t k, std::size_t d) {
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd rows = gaussian_rows(rng, k, d) / std::sqrt(static_cast<double>(d));
    EnvironmentSpec env;
    env.regime = RegimeKind::StochasticLinear;
    env.features = FeatureSet(rows);
    env.theta.resize(d);
    for (auto& x : env.theta) x = uniform(rng, -0.3, 0.3);
    env.noise = {NoiseKind::StudentT, 3.0};
    return env;
}

EnvironmentSpec alternating_instance() {
    EnvironmentSpec env;
    env.regime = RegimeKind::AdversarialScript;
    env.generator = AlternatingGenerator{5, 0.0, 1.0, 64};
    env.noise = {NoiseKind::SymmetricPareto, 3.0};
    return env;
}

EnvironmentSpec stochastic_instance() {
    EnvironmentSpec env;
    env.regime = RegimeKind::StochasticMab;
    env.means = {-0.4, -0.2, 0.4, 0.4, 0.4};
    env.noise = {NoiseKind::SymmetricPareto, 3.0};
    return env;
}

ExperimentConfig experiment(PolicyKind policy, EnvironmentSpec env, double eps, std::size_t horizon,
                            std::size_t reps, std::uint64_t seed) {
    ExperimentConfig c;
    c.policy.kind = policy;
    c.environment = std::move(env);
    c.spec = HeavyTailSpec(eps, 1.0);
    c.horizon = horizon;
    c.repetitions = reps;
    c.seed = seed;
    return c;
}

Outcome run_invariants() {
    struct Case {
        std::string name;
        ExperimentConfig config;
    };
    std::vector<Case> cases;
    for (auto pk : {PolicyKind::Alg1, PolicyKind::Alg2, PolicyKind::Alg3}) {
        const std::string pn = to_string(pk);
        if (pk == PolicyKind::Alg1) {
            cases.push_back({pn + "/stochastic_mab",
                             experiment(pk, stochastic_instance(), 1.5, kInvariantHorizon, kInvariantSeeds, 51)});
        } else {
            cases.push_back({pn + "/stochastic_linear",
                             experiment(pk, linear_instance(7, 10, 3), 1.8, kInvariantHorizon, kInvariantSeeds, 51)});
        }
        cases.push_back({pn + "/alternating",
                         experiment(pk, alternating_instance(), 1.5, kInvariantHorizon, kInvariantSeeds, 52)});
    }
    std::size_t violations = 0, failures = 0, rounds = 0;
    std::string where;
    for (const auto& c : cases) {
        const auto curve = run_experiment(c.config);
        const std::size_t v = curve.invariants.hard_total();
        if (v + curve.failures.size() > 0) where += " " + c.name;
        violations += v;
        failures += curve.failures.size();
        rounds += kInvariantHorizon * kInvariantSeeds;
    }
    return {violations == 0 && failures == 0,
            std::to_string(cases.size()) + " runs, " + std::to_string(rounds) + " rounds: " +
                std::to_string(violations) + " violations, " + std::to_string(failures) + " failed repetitions" +
                (where.empty() ? "" : " in" + where)};
}

// ------------------------------------------------------------ criterion 6

const std::vector<std::size_t> kHorizons{4096, 8192, 16384, 32768, 65536};
constexpr std::size_t kScalingReps = 20;
constexpr double kIncrementChange = 0.5;
constexpr double kUniformDoubling = 0.01;

std::vector<double> increments(const std::vector<ScalingRow>& rows) {
    std::vector<double> inc;
    for (std::size_t i = 1; i < rows.size(); ++i) inc.push_back(rows[i].mean_regret - rows[i - 1].mean_regret);
    return inc;
}

Outcome log_growth() {
    auto cfg = experiment(PolicyKind::Alg1, stochastic_instance(), 1.5, kHorizons.back(), kScalingReps, 1);
    const auto rows = scaling_probe(cfg, kHorizons);
    cfg.policy.kind = PolicyKind::Uniform;
    const auto base = scaling_probe(cfg, kHorizons);

    bool ok = true;
    for (const auto& r : rows) ok = ok && r.curve.ok();
    const auto inc = increments(rows);
    const double change = inc[3] / inc[2];
    const bool flat = std::abs(change - 1.0) < kIncrementChange;

    double worst_doubling = 0.0;
    const auto binc = increments(base);
    for (std::size_t i = 1; i < binc.size(); ++i) {
        worst_doubling = std::max(worst_doubling, std::abs(binc[i] / binc[i - 1] - 2.0));
    }
    const bool doubles = worst_doubling <= kUniformDoubling;

    // Least-squares slope of regret against ln T over the last three horizons.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 2; i < 5; ++i) {
        const double x = std::log(static_cast<double>(rows[i].horizon)), y = rows[i].mean_regret;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);

    std::string regrets;
    for (const auto& r : rows) regrets += " " + fmt(r.mean_regret, 6);
    return {ok && flat && doubles && slope > 0.0,
            "regret" + regrets + "; last increments " + fmt(inc[2], 6) + " -> " + fmt(inc[3], 6) + " (ratio " +
                fmt(change) + ", |ratio-1| < " + fmt(kIncrementChange) + "); slope vs ln T " + fmt(slope) +
                " > 0; uniform increment ratio max |r-2| " + fmt(worst_doubling) + " <= " + fmt(kUniformDoubling)};
}

// ------------------------------------------------------------ criterion 7

constexpr double kPowerSpread = 2.0;
constexpr double kLogDivergence = 4.0;

Outcome adversarial_scaling() {
    bool pass = true;
    std::string detail;
    for (auto pk : {PolicyKind::Alg1, PolicyKind::Alg2}) {
        const auto cfg = experiment(pk, alternating_instance(), 1.5, kHorizons.back(), kScalingReps, 1);
        const auto rows = scaling_probe(cfg, kHorizons);
        double lo = INFINITY, hi = 0.0;
        bool ok = true;
        for (const auto& r : rows) {
            lo = std::min(lo, r.ratio_power);
            hi = std::max(hi, r.ratio_power);
            ok = ok && r.curve.ok();
        }
        const double spread = hi / lo;
        const double diverge = rows.back().ratio_log / rows.front().ratio_log;
        pass = pass && ok && spread < kPowerSpread && diverge > kLogDivergence;
        detail += std::string(detail.empty() ? "" : "; ") + to_string(pk) + ": Reg/T^(1/eps) spread " + fmt(spread) +
                  " < " + fmt(kPowerSpread) + ", Reg/lnT largest/smallest " + fmt(diverge) + " > " +
                  fmt(kLogDivergence);
    }
    return {pass, detail};
}

// ------------------------------------------------------------ criterion 8

constexpr std::size_t kCorruptionHorizon = 32768;

Outcome corruption() {
    const auto clean_cfg = experiment(PolicyKind::Alg1, stochastic_instance(), 1.5, kCorruptionHorizon, kScalingReps, 1);
    const auto clean = run_experiment(clean_cfg);
    std::vector<double> mean, se;
    bool exact = false, ok = clean.ok();
    for (double budget : {0.0, 50.0, 200.0}) {
        auto cfg = clean_cfg;
        cfg.environment.front_loaded = FrontLoadedCorruption{0, 0.4};
        cfg.environment.budget = budget;
        const auto curve = run_experiment(cfg);
        ok = ok && curve.ok();
        mean.push_back(curve.mean_regret.back());
        se.push_back(curve.standard_error.back());
        if (budget == 0.0) exact = curve.per_seed == clean.per_seed && curve.mean_regret == clean.mean_regret;
    }
    bool up = true, down = true;
    for (std::size_t i = 1; i < mean.size(); ++i) {
        const double tol = std::hypot(se[i], se[i - 1]);
        up = up && mean[i] >= mean[i - 1] - tol;
        down = down && mean[i] <= mean[i - 1] + tol;
    }
    return {ok && exact && (up || down),
            "C=0/50/200: " + fmt(mean[0], 8) + " / " + fmt(mean[1], 8) + " / " + fmt(mean[2], 8) + " (SE " +
                fmt(se[0], 3) + "/" + fmt(se[1], 3) + "/" + fmt(se[2], 3) + "), monotone " +
                (up && down ? "(flat)" : up ? "nondecreasing" : down ? "nonincreasing" : "NO") +
                " within 1 SE; C=0 vs uncorrupted " + (exact ? "bit-identical" : "DIFFERENT")};
}

// ------------------------------------------------------------ criterion 9

Outcome golden_replay(const std::string& htb, const std::string& dir) {
    std::vector<std::string> traces;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() == ".jsonl") traces.push_back(e.path().string());
    }
    std::sort(traces.begin(), traces.end());
    std::size_t identical = 0;
    std::string bad;
    for (const auto& t : traces) {
        const std::string cmd = "'" + htb + "' trace --quiet --replay '" + t + "'";
        if (std::system(cmd.c_str()) == 0) {
            ++identical;
        } else {
            bad += " " + std::filesystem::path(t).filename().string();
        }
    }
    return {traces.size() >= 3 && identical == traces.size(),
            std::to_string(identical) + "/" + std::to_string(traces.size()) + " traces replay byte for byte" +
                (bad.empty() ? "" : "; differing:" + bad)};
}

// ----------------------------------------------------------- criterion 10

constexpr double kIncrementRelTol = 1e-12;
constexpr std::size_t kBetaHorizon = 3000;

Outcome learning_rate() {
    auto cfg = experiment(PolicyKind::Alg3, linear_instance(11, 8, 3), 1.7, kBetaHorizon, 1, 10);
    const auto env = cfg.environment.build(cfg.spec, cfg.horizon);
    const double eps = cfg.spec.epsilon(), sigma = cfg.spec.sigma();
    const double alpha = default_alpha(8);
    const double d = 3.0;

    std::vector<RoundRecord> recs;
    const auto rep = run_repetition(cfg, env, cfg.seed, [&](const RoundRecord& r, const Vector&) { recs.push_back(r); });

    long double worst_inc = 0.0L, worst_inputs = 0.0L;
    bool chained = true;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        const auto& q = r.q->weights();
        const auto& p = r.p->weights();
        const long double qmax = *std::max_element(q.begin(), q.end());
        const long double qs = std::min(qmax, 1.0L - qmax);
        const long double pmax = *std::max_element(p.begin(), p.end());
        long double h = 0.0L;
        for (double x : q) h += std::pow(static_cast<long double>(x), static_cast<long double>(alpha));
        h = (h - 1.0L) / alpha;
        const long double w = std::pow(static_cast<long double>(sigma), 3.0L / eps) / std::pow(1.0L - alpha, 2.0L) * d *
                              std::pow(qs, 2.0L * (1.0L - alpha));
        const long double z = std::pow(1.0L - alpha, 1.0L - eps) * sigma *
                              std::pow(qs, static_cast<long double>((eps - 1.0) * (1.0 - alpha))) *
                              std::pow(static_cast<long double>(d), eps / 2.0L) * std::pow(1.0L - pmax, 2.0L - eps);
        const long double beta = static_cast<long double>(r.beta) + static_cast<long double>(r.beta_lo.value_or(0.0));
        const long double expect =
            (std::pow(beta, static_cast<long double>(1.0 - eps)) * z + w / (beta * beta)) / h;
        const long double got = (static_cast<long double>(*r.next_beta) - r.beta) +
                                (static_cast<long double>(r.next_beta_lo.value_or(0.0)) - r.beta_lo.value_or(0.0));
        worst_inc = std::max(worst_inc, std::abs(got - expect) / expect);
        worst_inputs = std::max({worst_inputs, std::abs(*r.entropy - h) / h, std::abs(*r.z - z) / std::max(z, 1e-300L),
                                 std::abs(*r.w - w) / w});
        if (i + 1 < recs.size()) {
            chained = chained && recs[i + 1].beta == *r.next_beta && recs[i + 1].beta_lo == r.next_beta_lo;
        }
    }
    const bool ok = !rep.error && rep.invariants.hard_total() == 0 && recs.size() == kBetaHorizon;
    return {ok && chained && worst_inc <= kIncrementRelTol && worst_inputs <= kIncrementRelTol,
            std::to_string(recs.size()) + " rounds: max relative error of beta increment " +
                fmt(static_cast<double>(worst_inc)) + ", of recomputed h/z/w " +
                fmt(static_cast<double>(worst_inputs)) + " <= " + fmt(kIncrementRelTol) + "; beta chain " +
                (chained ? "consistent" : "BROKEN")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string htb_path, golden_dir;
    std::vector<int> only;
    app.add_option("--htb", htb_path, "htb executable")->required();
    app.add_option("--golden", golden_dir, "Directory of golden traces")->required();
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "FTRL oracle equivalence", 60, ftrl_oracle},
        {2, "design certificates", 60, design_certificates},
        {3, "unbiased estimator differences", 120, unbiased_differences},
        {4, "centered variance bound", 30, variance_bound},
        {5, "per-round invariants", 120, run_invariants},
        {6, "stochastic log-growth", 600, log_growth},
        {7, "adversarial T^(1/eps) scaling", 900, adversarial_scaling},
        {8, "corruption monotonicity", 600, corruption},
        {9, "golden trace replay", 1, [&] { return golden_replay(htb_path, golden_dir); }},
        {10, "learning-rate increments", 10, learning_rate},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = secs < c.budget_seconds;
        const bool pass = out.pass && in_budget;
        failed += !pass;
        std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << "  " << c.name << "  ["
                  << out.detail << "; " << fmt(secs, 3) << " s < " << c.budget_seconds << " s"
                  << (in_budget ? "" : " EXCEEDED") << "]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
