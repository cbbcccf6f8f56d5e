#include "htb/policies.hpp"

#include "htb/optimal_design.hpp"
#include "htb/simplex_ftrl.hpp"

#include <algorithm>
#include <cmath>

namespace htb {

double mab_beta_schedule(std::size_t t, std::size_t k, const HeavyTailSpec& spec) {
    if (t < 1) throw Error(ErrorCode::InvalidArgument, "rounds start at 1");
    const double eps = spec.epsilon();
    const double kd = static_cast<double>(k);
    const double floor = 8.0 * eps * std::pow(kd, (eps - 1.0) / eps) / (eps - 1.0);
    return std::pow(spec.sigma(), 1.0 / eps) * std::max(floor, std::pow(static_cast<double>(t), 1.0 / eps));
}

DerivedRoundParams mab_round_params(const SimplexDistribution& q, double beta, std::size_t k,
                                    const HeavyTailSpec& spec) {
    if (q.size() != k) throw Error(ErrorCode::DimensionMismatch, "q has the wrong number of arms");
    const double eps = spec.epsilon();
    const double alpha = 1.0 / eps;
    DerivedRoundParams r;
    r.q_star = std::min(q.max(), 1.0 - q.max());
    r.a_tilde = q.argmax();
    r.q_tilde.resize(k);
    r.s.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
        r.q_tilde[a] = std::min(q[a], r.q_star);
        r.s[a] = (1.0 - alpha) * std::pow(r.q_tilde[a], alpha - 1.0) * beta / 8.0;
    }
    r.gamma = std::pow(spec.sigma(), 1.0 / (eps - 1.0)) * static_cast<double>(k) *
              std::pow(r.s[r.a_tilde], eps / (1.0 - eps));
    if (r.gamma > 0.5 + 1e-12) {
        throw Error(ErrorCode::InvariantViolation, "exploration rate " + std::to_string(r.gamma) + " exceeds 1/2");
    }
    return r;
}

Alg2Constants alg2_constants(std::size_t k, std::size_t d, std::size_t horizon, const HeavyTailSpec& spec) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least two arms");
    if (horizon < 1 || d < 1) throw Error(ErrorCode::InvalidArgument, "horizon and dimension must be positive");
    const double eps = spec.epsilon();
    Alg2Constants c;
    c.beta = std::pow(std::log(static_cast<double>(k)) /
                          (spec.sigma() * std::pow(static_cast<double>(d), eps / 2.0) * static_cast<double>(horizon)),
                      -1.0 / eps);
    c.gamma = 4.0 * std::pow(spec.sigma(), 2.0 / eps) * static_cast<double>(d) / (c.beta * c.beta);
    c.s = c.beta / 2.0;
    if (c.gamma > 0.5) {
        throw Error(ErrorCode::HorizonTooShort,
                    "horizon " + std::to_string(horizon) + " gives exploration rate " + std::to_string(c.gamma));
    }
    return c;
}

double htspm_increment(double beta, double z, double w, double h, const HeavyTailSpec& spec) {
    if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
    if (!(z >= 0.0) || !(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "z and w must be nonnegative");
    if (!(h > 1e-300)) throw Error(ErrorCode::ZeroEntropy, "entropy of q_t vanished");
    return (std::pow(beta, 1.0 - spec.epsilon()) * z + w / (beta * beta)) / h;
}

double htspm_update(double beta, double z, double w, double h, const HeavyTailSpec& spec) {
    return beta + htspm_increment(beta, z, w, h, spec);
}

DerivedRoundParams alg3_round_params(const SimplexDistribution& q, double beta, std::size_t d,
                                     const HeavyTailSpec& spec, double alpha) {
    const double eps = spec.epsilon();
    const double dd = static_cast<double>(d);
    const std::size_t k = q.size();
    DerivedRoundParams r;
    r.q_star = std::min(q.max(), 1.0 - q.max());
    r.a_tilde = q.argmax();
    r.q_tilde.resize(k);
    for (std::size_t a = 0; a < k; ++a) r.q_tilde[a] = std::min(q[a], r.q_star);
    const double qpow = std::pow(r.q_star, 2.0 * (1.0 - alpha));
    r.gamma = 256.0 / ((1.0 - alpha) * (1.0 - alpha)) * std::pow(spec.sigma(), 2.0 / eps) * dd / (beta * beta) * qpow;
    r.s.assign(k, (1.0 - alpha) * beta * std::pow(r.q_star, alpha - 1.0) / 8.0);
    r.w = std::pow(spec.sigma(), 3.0 / eps) / ((1.0 - alpha) * (1.0 - alpha)) * dd * qpow;
    if (r.gamma > 0.5 + 1e-12) {
        throw Error(ErrorCode::InvariantViolation, "exploration rate " + std::to_string(r.gamma) + " exceeds 1/2");
    }
    return r;
}

double alg3_z(double q_star, double p_max, std::size_t d, const HeavyTailSpec& spec, double alpha) {
    const double eps = spec.epsilon();
    return std::pow(1.0 - alpha, 1.0 - eps) * spec.sigma() * std::pow(q_star, (eps - 1.0) * (1.0 - alpha)) *
           std::pow(static_cast<double>(d), eps / 2.0) * std::pow(1.0 - p_max, 2.0 - eps);
}

double alg3_initial_beta(double alpha, std::size_t d, const HeavyTailSpec& spec) {
    return std::sqrt(1024.0) / (1.0 - alpha) * std::pow(spec.sigma(), 1.0 / spec.epsilon()) *
           std::sqrt(static_cast<double>(d)) * std::pow(0.5, 1.0 - alpha);
}

double alg3_beta_bar(double alpha, std::size_t d, double beta1, const HeavyTailSpec& spec) {
    const double eps = spec.epsilon();
    const double sigma = spec.sigma();
    return 64.0 / std::pow(1.0 - alpha, 3.0) * std::pow(static_cast<double>(d), eps) * std::pow(beta1, 1.0 - eps) *
           std::max(std::pow(sigma, 3.0 / eps), sigma);
}

double default_alpha(std::size_t k) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least two arms");
    return std::max(0.5, 1.0 - 1.0 / std::log(static_cast<double>(std::max<std::size_t>(k, 3))));
}

FeatureSet affine_basis(std::size_t k) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least two arms");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1));
    m.bottomRows(static_cast<Eigen::Index>(k - 1)).setIdentity();
    return FeatureSet(m);
}

const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Alg1: return "alg1";
        case PolicyKind::Alg2: return "alg2";
        case PolicyKind::Alg3: return "alg3";
        case PolicyKind::Uniform: return "uniform";
        case PolicyKind::ExpWeights: return "exp_weights";
    }
    return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
    for (auto k : {PolicyKind::Alg1, PolicyKind::Alg2, PolicyKind::Alg3, PolicyKind::Uniform, PolicyKind::ExpWeights}) {
        if (name == to_string(k)) return k;
    }
    throw Error(ErrorCode::Config, "unknown policy id '" + name + "'");
}

Policy::Policy(std::size_t k, HeavyTailSpec spec) : k_(k), spec_(spec) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least two arms");
    state_.cumulative_shifted_loss.assign(k, 0.0);
}

RoundRecord Policy::base_record(std::size_t arm, double uniform_draw, double loss) const {
    if (!pending_) throw Error(ErrorCode::InvalidArgument, "observe() called without select()");
    if (arm >= k_) throw Error(ErrorCode::InvalidArgument, "arm out of range");
    RoundRecord rec;
    rec.t = state_.round;
    rec.q = state_.last_q;
    rec.p = state_.last_p;
    rec.chosen_arm = arm;
    rec.uniform_draw = uniform_draw;
    rec.observed_loss = loss;
    rec.beta = state_.beta;
    rec.flags.simplex_normalized = simplex_ok(*state_.last_p) && (!state_.last_q || simplex_ok(*state_.last_q));
    return rec;
}

bool Policy::simplex_ok(const SimplexDistribution& p) {
    double sum = 0.0;
    for (double x : p.weights()) {
        if (!(x >= 0.0)) return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= 1e-12;
}

namespace {

void fill_estimates(RoundRecord& rec, const EstimateBundle& e) {
    rec.raw_estimate = e.raw_estimate;
    rec.clipped_estimate = e.clipped_estimate;
    rec.bonus = e.bonus;
    rec.clip_thresholds = e.clip_thresholds;
    rec.flags.clip_contained = clip_contained(e);
    rec.flags.bonus_within_threshold = bonus_within_threshold(e);
}

void accumulate(Vector& cum, const EstimateBundle& e) {
    for (std::size_t a = 0; a < cum.size(); ++a) cum[a] += e.clipped_estimate[a] - e.bonus[a];
}

Vector scaled(const Vector& s, double factor) {
    Vector out(s);
    for (double& x : out) x *= factor;
    return out;
}

void check_finite(const Vector& cum) {
    for (double x : cum) {
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "cumulative loss became non-finite");
    }
}

}  // namespace

Alg1Policy::Alg1Policy(std::size_t k, HeavyTailSpec spec, double clip_scale) : Policy(k, spec), clip_scale_(clip_scale) {
    if (!(clip_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "clip_scale must be positive");
    state_.alpha = 1.0 / spec.epsilon();
}

const SimplexDistribution& Alg1Policy::select() {
    ++state_.round;
    prev_beta_ = state_.beta;
    state_.beta = mab_beta_schedule(state_.round, k_, spec_);
    const auto sol = solve_tsallis(state_.cumulative_shifted_loss, state_.beta, state_.alpha, warm_);
    warm_ = sol.shift;
    params_ = mab_round_params(sol.q, state_.beta, k_, spec_);
    state_.last_q = sol.q;
    state_.last_p = mix(sol.q, SimplexDistribution::uniform(k_), params_.gamma);
    pending_ = true;
    return *state_.last_p;
}

RoundRecord Alg1Policy::observe(std::size_t arm, double uniform_draw, double loss) {
    RoundRecord rec = base_record(arm, uniform_draw, loss);
    const auto e = mab_estimate(arm, loss, *state_.last_p, scaled(params_.s, clip_scale_), spec_);
    fill_estimates(rec, e);
    rec.gamma = params_.gamma;
    rec.flags.gamma_at_most_half = params_.gamma <= 0.5 + 1e-12;
    rec.flags.beta_monotone = state_.beta >= prev_beta_;
    accumulate(state_.cumulative_shifted_loss, e);
    check_finite(state_.cumulative_shifted_loss);
    pending_ = false;
    return rec;
}

Alg2Policy::Alg2Policy(FeatureSet features, HeavyTailSpec spec, std::size_t horizon, double clip_scale)
    : Policy(features.num_arms(), spec), features_(std::move(features)), clip_scale_(clip_scale) {
    if (!(clip_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "clip_scale must be positive");
    constants_ = alg2_constants(k_, features_.ambient_dim(), horizon, spec);
    state_.beta = constants_.beta;
    state_.horizon = horizon;
    state_.design = g_optimal_design(features_).distribution;
}

const SimplexDistribution& Alg2Policy::select() {
    ++state_.round;
    const auto sol = solve_shannon(state_.cumulative_shifted_loss, state_.beta);
    state_.last_q = sol.q;
    state_.last_p = mix(sol.q, *state_.design, constants_.gamma);
    pending_ = true;
    return *state_.last_p;
}

RoundRecord Alg2Policy::observe(std::size_t arm, double uniform_draw, double loss) {
    RoundRecord rec = base_record(arm, uniform_draw, loss);
    const Vector s(k_, constants_.s * clip_scale_);
    const auto e = linear_estimate(arm, loss, *state_.last_p, features_, s, spec_);
    fill_estimates(rec, e);
    rec.gamma = constants_.gamma;
    rec.flags.gamma_at_most_half = constants_.gamma <= 0.5;
    accumulate(state_.cumulative_shifted_loss, e);
    check_finite(state_.cumulative_shifted_loss);
    pending_ = false;
    return rec;
}

Alg3Policy::Alg3Policy(FeatureSet features, HeavyTailSpec spec, std::optional<double> alpha, double clip_scale)
    : Policy(features.num_arms(), spec), features_(std::move(features)), clip_scale_(clip_scale) {
    if (!(clip_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "clip_scale must be positive");
    state_.alpha = alpha.value_or(default_alpha(k_));
    if (!(state_.alpha >= 0.5 && state_.alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in [1/2, 1)");
    }
    state_.alpha_bar = (spec.epsilon() - 1.0) * (1.0 - state_.alpha);
    const std::size_t d = features_.ambient_dim();
    state_.beta = alg3_initial_beta(state_.alpha, d, spec);
    state_.beta_bar = alg3_beta_bar(state_.alpha, d, state_.beta, spec);
    state_.design = centered_optimal_design(features_).distribution;
}

const SimplexDistribution& Alg3Policy::select() {
    ++state_.round;
    const auto sol = solve_hybrid(state_.cumulative_shifted_loss, state_.beta, state_.alpha, state_.beta_bar,
                                  state_.alpha_bar, warm_);
    warm_ = sol.shift;
    params_ = alg3_round_params(sol.q, state_.beta, features_.ambient_dim(), spec_, state_.alpha);
    state_.last_q = sol.q;
    state_.last_p = mix(sol.q, *state_.design, params_.gamma);
    params_.z = alg3_z(params_.q_star, state_.last_p->max(), features_.ambient_dim(), spec_, state_.alpha);
    pending_ = true;
    return *state_.last_p;
}

RoundRecord Alg3Policy::observe(std::size_t arm, double uniform_draw, double loss) {
    RoundRecord rec = base_record(arm, uniform_draw, loss);
    const auto e = vr_linear_estimate(arm, loss, *state_.last_p, features_, scaled(params_.s, clip_scale_), spec_);
    fill_estimates(rec, e);
    rec.gamma = params_.gamma;
    rec.flags.gamma_at_most_half = params_.gamma <= 0.5 + 1e-12;

    const double h = tsallis_entropy_value(*state_.last_q, state_.alpha);
    const double inc = htspm_increment(state_.beta, params_.z, params_.w, h, spec_);
    // Running sum kept exact as hi + lo (two-sum); the rounding error of each
    // addition moves into the low part.
    const double sum = state_.beta + inc;
    const double bv = sum - state_.beta;
    const double lo_acc = state_.beta_lo + ((state_.beta - (sum - bv)) + (inc - bv));
    const double hi = sum + lo_acc;
    const double lo = lo_acc - (hi - sum);
    rec.entropy = h;
    rec.z = params_.z;
    rec.w = params_.w;
    rec.beta_lo = state_.beta_lo;
    rec.next_beta = hi;
    rec.next_beta_lo = lo;
    rec.flags.beta_monotone = hi + lo >= state_.beta + state_.beta_lo && hi >= state_.beta;
    if (state_.round > 1) rec.flags.entropy_stable = h <= 8.0 * prev_h_ + 1e-12;

    accumulate(state_.cumulative_shifted_loss, e);
    check_finite(state_.cumulative_shifted_loss);
    prev_h_ = h;
    state_.last_h = h;
    state_.beta = hi;
    state_.beta_lo = lo;
    pending_ = false;
    return rec;
}

UniformPolicy::UniformPolicy(std::size_t k, HeavyTailSpec spec) : Policy(k, spec) {}

const SimplexDistribution& UniformPolicy::select() {
    ++state_.round;
    state_.last_p = SimplexDistribution::uniform(k_);
    pending_ = true;
    return *state_.last_p;
}

RoundRecord UniformPolicy::observe(std::size_t arm, double uniform_draw, double loss) {
    RoundRecord rec = base_record(arm, uniform_draw, loss);
    pending_ = false;
    return rec;
}

ExpWeightsPolicy::ExpWeightsPolicy(std::size_t k, HeavyTailSpec spec) : Policy(k, spec) {}

const SimplexDistribution& ExpWeightsPolicy::select() {
    ++state_.round;
    const double eta = std::sqrt(std::log(static_cast<double>(k_)) / (static_cast<double>(k_ * state_.round)));
    state_.beta = 1.0 / eta;
    const auto sol = solve_shannon(state_.cumulative_shifted_loss, state_.beta);
    state_.last_q = sol.q;
    state_.last_p = sol.q;
    pending_ = true;
    return *state_.last_p;
}

RoundRecord ExpWeightsPolicy::observe(std::size_t arm, double uniform_draw, double loss) {
    RoundRecord rec = base_record(arm, uniform_draw, loss);
    const double pa = (*state_.last_p)[arm];
    if (pa <= 1e-300) throw Error(ErrorCode::ZeroProbability, "played arm has zero probability");
    rec.raw_estimate.assign(k_, 0.0);
    rec.raw_estimate[arm] = loss / pa;
    rec.clipped_estimate = rec.raw_estimate;
    state_.cumulative_shifted_loss[arm] += loss / pa;
    check_finite(state_.cumulative_shifted_loss);
    pending_ = false;
    return rec;
}

std::unique_ptr<Policy> make_policy(const PolicyConfig& config, std::size_t k, const FeatureSet* features,
                                    const HeavyTailSpec& spec, std::size_t horizon) {
    if (features && features->num_arms() != k) {
        throw Error(ErrorCode::DimensionMismatch, "feature set and arm count differ");
    }
    switch (config.kind) {
        case PolicyKind::Alg1: return std::make_unique<Alg1Policy>(k, spec, config.clip_scale);
        case PolicyKind::Alg2:
            return std::make_unique<Alg2Policy>(features ? *features : FeatureSet::standard_basis(k), spec, horizon,
                                                config.clip_scale);
        case PolicyKind::Alg3:
            return std::make_unique<Alg3Policy>(features ? *features : affine_basis(k), spec, config.alpha,
                                                config.clip_scale);
        case PolicyKind::Uniform: return std::make_unique<UniformPolicy>(k, spec);
        case PolicyKind::ExpWeights: return std::make_unique<ExpWeightsPolicy>(k, spec);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown policy kind");
}

}  // namespace htb
