#include "htb/environments.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace htb {

const char* to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::SymmetricPareto: return "pareto";
        case NoiseKind::StudentT: return "student_t";
        case NoiseKind::Bounded: return "bounded";
    }
    return "unknown";
}

const char* to_string(RegimeKind kind) {
    switch (kind) {
        case RegimeKind::StochasticMab: return "stochastic_mab";
        case RegimeKind::StochasticLinear: return "stochastic_linear";
        case RegimeKind::AdversarialScript: return "adversarial_script";
        case RegimeKind::Callback: return "callback";
    }
    return "unknown";
}

void NoiseModel::validate(double epsilon) const {
    switch (kind) {
        case NoiseKind::SymmetricPareto:
            if (!(shape > epsilon)) {
                throw Error(ErrorCode::InvalidArgument, "Pareto shape must exceed epsilon");
            }
            break;
        case NoiseKind::StudentT:
            if (!(shape > epsilon)) {
                throw Error(ErrorCode::InvalidArgument, "Student-t degrees of freedom must exceed epsilon");
            }
            break;
        case NoiseKind::Bounded:
            if (!(shape >= 0.0) || !std::isfinite(shape)) {
                throw Error(ErrorCode::InvalidArgument, "bounded noise needs a finite half-width >= 0");
            }
            break;
    }
}

double NoiseModel::sample(Rng& rng) const {
    switch (kind) {
        case NoiseKind::SymmetricPareto: {
            const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
            const double u = 1.0 - uniform01(rng);
            return sign * std::pow(u, -1.0 / shape);
        }
        case NoiseKind::StudentT: {
            // Bailey's polar method.
            for (;;) {
                const double u = 2.0 * uniform01(rng) - 1.0;
                const double v = 2.0 * uniform01(rng) - 1.0;
                const double w = u * u + v * v;
                if (w >= 1.0 || w == 0.0) continue;
                return u * std::sqrt(shape * (std::pow(w, -2.0 / shape) - 1.0) / w);
            }
        }
        case NoiseKind::Bounded: return shape * (2.0 * uniform01(rng) - 1.0);
    }
    return 0.0;
}

double student_t_abs_moment_closed_form(double nu, double e) {
    return std::exp(0.5 * e * std::log(nu) + std::lgamma((e + 1.0) / 2.0) + std::lgamma((nu - e) / 2.0) -
                    0.5 * std::log(M_PI) - std::lgamma(nu / 2.0));
}

double bounded_abs_moment_closed_form(double half_width, double e) {
    return std::pow(half_width, e) / (e + 1.0);
}

double noise_abs_moment(const NoiseModel& noise, double e) {
    switch (noise.kind) {
        case NoiseKind::SymmetricPareto:
            if (!(noise.shape > e)) return std::numeric_limits<double>::infinity();
            return noise.shape / (noise.shape - e);
        case NoiseKind::StudentT: {
            const double nu = noise.shape;
            if (!(nu > e)) return std::numeric_limits<double>::infinity();
            const double log_norm = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * M_PI);
            auto f = [&](double x) {
                if (x <= 0.0) return 0.0;
                return std::exp(e * std::log(x) + log_norm - (nu + 1.0) / 2.0 * std::log1p(x * x / nu));
            };
            boost::math::quadrature::exp_sinh<double> integrator;
            return 2.0 * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
        }
        case NoiseKind::Bounded: {
            const double w = noise.shape;
            if (w == 0.0) return 0.0;
            auto f = [&](double x) { return abs_pow(x, e); };
            boost::math::quadrature::tanh_sinh<double> integrator;
            return integrator.integrate(f, 0.0, w) / w;
        }
    }
    return 0.0;
}

double moment_bound(double mean, const NoiseModel& noise, double scale, double e) {
    if (noise.degenerate()) return abs_pow(mean, e);
    return std::max(1.0, std::pow(2.0, e - 1.0)) * (abs_pow(mean, e) + std::pow(scale, e) * noise_abs_moment(noise, e));
}

Calibration calibrate_moment(double mean, const NoiseModel& noise, const HeavyTailSpec& spec) {
    const double eps = spec.epsilon();
    noise.validate(eps);
    const double budget = spec.sigma() / std::pow(2.0, eps - 1.0) - abs_pow(mean, eps);
    if (noise.degenerate()) {
        Calibration c{1.0, abs_pow(mean, eps)};
        if (c.certificate > spec.sigma()) {
            throw Error(ErrorCode::Infeasible, "|mean|^eps exceeds sigma");
        }
        return c;
    }
    if (!(budget > 0.0)) {
        throw Error(ErrorCode::Infeasible, "|mean|^eps = " + std::to_string(abs_pow(mean, eps)) +
                                               " leaves no room under sigma / 2^(eps-1)");
    }
    Calibration c;
    c.scale = std::pow(budget / noise_abs_moment(noise, eps), 1.0 / eps);
    c.certificate = moment_bound(mean, noise, c.scale, eps);
    // Step down past rounding so the certificate holds in floating point.
    while (c.certificate > spec.sigma()) {
        c.scale = std::nextafter(c.scale, 0.0);
        c.certificate = moment_bound(mean, noise, c.scale, eps);
    }
    return c;
}

namespace {

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t min_cols) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (rows.empty() && line_no == 1) continue;  // header
            throw Error(ErrorCode::Config, path + ":" + std::to_string(line_no) + ": non-numeric cell");
        }
        if (row.size() < min_cols) {
            throw Error(ErrorCode::Config, path + ":" + std::to_string(line_no) + ": expected at least " +
                                               std::to_string(min_cols) + " columns");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<CorruptionEvent> read_corruption_csv(const std::string& path) {
    std::vector<CorruptionEvent> out;
    for (const auto& row : read_numeric_csv(path, 3)) {
        if (row[0] < 1 || row[1] < 0 || row[0] != std::floor(row[0]) || row[1] != std::floor(row[1])) {
            throw Error(ErrorCode::Config, path + ": round must be >= 1 and arm >= 0 (integers)");
        }
        out.push_back({static_cast<std::size_t>(row[0]), static_cast<std::size_t>(row[1]), row[2]});
    }
    return out;
}

std::vector<CorruptionEvent> front_loaded_corruption(std::size_t arm, double shift, double budget) {
    if (!(shift != 0.0) || !(budget >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bad corruption parameters");
    std::vector<CorruptionEvent> out;
    double left = budget;
    for (std::size_t t = 1; left > 0.0; ++t) {
        const double mag = std::min(std::abs(shift), left);
        out.push_back({t, arm, std::copysign(mag, shift)});
        left -= mag;
    }
    return out;
}

MeanScript alternating_script(std::size_t k, std::size_t horizon, double base, double kappa, std::size_t block,
                              double epsilon) {
    if (k < 2 || horizon < 1 || block < 1) throw Error(ErrorCode::InvalidArgument, "bad alternating script");
    const double gap = kappa * std::pow(static_cast<double>(horizon), -(epsilon - 1.0) / epsilon);
    MeanScript s(horizon, Vector(k, base + gap));
    for (std::size_t t = 1; t <= horizon; ++t) {
        auto& row = s[t - 1];
        row[0] = base;
        if (k > 1) row[1 + ((t - 1) / block) % (k - 1)] = base + 2.0 * gap;
    }
    return s;
}

MeanScript read_script_csv(const std::string& path) {
    auto rows = read_numeric_csv(path, 2);
    if (rows.empty()) throw Error(ErrorCode::Config, path + ": empty script");
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw Error(ErrorCode::Config, path + ": ragged script rows");
    }
    return rows;
}

Environment Environment::stochastic_mab(Vector means, NoiseModel noise, HeavyTailSpec spec, std::size_t horizon) {
    if (means.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two arms");
    Environment env;
    env.regime_ = RegimeKind::StochasticMab;
    env.k_ = means.size();
    env.horizon_ = horizon;
    env.means_ = std::move(means);
    env.noise_ = noise;
    env.spec_ = spec;
    env.calibrate();
    return env;
}

Environment Environment::stochastic_linear(FeatureSet features, Eigen::VectorXd theta, NoiseModel noise,
                                           HeavyTailSpec spec, std::size_t horizon) {
    if (static_cast<std::size_t>(theta.size()) != features.ambient_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "theta and features differ in dimension");
    }
    Environment env;
    env.regime_ = RegimeKind::StochasticLinear;
    env.k_ = features.num_arms();
    env.horizon_ = horizon;
    const Eigen::VectorXd m = features.matrix() * theta;
    env.means_.assign(m.data(), m.data() + m.size());
    env.features_ = std::move(features);
    env.noise_ = noise;
    env.spec_ = spec;
    env.calibrate();
    return env;
}

Environment Environment::scripted(MeanScript script, NoiseModel noise, HeavyTailSpec spec) {
    if (script.empty() || script.front().size() < 2) throw Error(ErrorCode::InvalidArgument, "empty script");
    Environment env;
    env.regime_ = RegimeKind::AdversarialScript;
    env.k_ = script.front().size();
    for (const auto& row : script) {
        if (row.size() != env.k_) throw Error(ErrorCode::DimensionMismatch, "ragged script");
    }
    env.horizon_ = script.size();
    env.script_ = std::move(script);
    env.noise_ = noise;
    env.spec_ = spec;
    env.calibrate();
    return env;
}

Environment Environment::callback(std::size_t k, AdversaryCallback cb, double max_abs_mean, NoiseModel noise,
                                  HeavyTailSpec spec, std::size_t horizon) {
    if (k < 2 || !cb) throw Error(ErrorCode::InvalidArgument, "callback adversary needs K >= 2 and a callable");
    Environment env;
    env.regime_ = RegimeKind::Callback;
    env.k_ = k;
    env.horizon_ = horizon;
    env.callback_ = std::move(cb);
    env.callback_bound_ = std::abs(max_abs_mean);
    env.noise_ = noise;
    env.spec_ = spec;
    env.calibrate();
    return env;
}

Environment& Environment::corrupt(std::vector<CorruptionEvent> events, double budget) {
    if (regime_ != RegimeKind::StochasticMab && regime_ != RegimeKind::StochasticLinear) {
        throw Error(ErrorCode::Config, "corruption applies to stochastic regimes only");
    }
    if (!(budget >= 0.0)) throw Error(ErrorCode::Config, "corruption budget must be >= 0");
    std::sort(events.begin(), events.end(),
              [](const CorruptionEvent& a, const CorruptionEvent& b) { return a.t < b.t; });
    shifts_.clear();
    for (const auto& ev : events) {
        if (ev.t < 1 || ev.t > horizon_) {
            throw Error(ErrorCode::Config, "corruption round " + std::to_string(ev.t) + " outside 1.." +
                                               std::to_string(horizon_));
        }
        if (ev.arm >= k_) throw Error(ErrorCode::Config, "corruption arm " + std::to_string(ev.arm) + " out of range");
        if (!std::isfinite(ev.shift)) throw Error(ErrorCode::Config, "non-finite corruption shift");
        if (shifts_.empty() || shifts_.back().first != ev.t) shifts_.emplace_back(ev.t, Vector(k_, 0.0));
        shifts_.back().second[ev.arm] += ev.shift;
    }
    spent_prefix_.assign(horizon_ + 1, 0.0);
    std::size_t j = 0;
    for (std::size_t t = 1; t <= horizon_; ++t) {
        double step = 0.0;
        if (j < shifts_.size() && shifts_[j].first == t) {
            for (double s : shifts_[j].second) step = std::max(step, std::abs(s));
            ++j;
        }
        spent_prefix_[t] = spent_prefix_[t - 1] + step;
    }
    // Small slack for the float sum of a schedule that spends C exactly.
    if (spent_prefix_[horizon_] > budget * (1.0 + 1e-12)) {
        throw Error(ErrorCode::Config, "corruption schedule spends " + std::to_string(spent_prefix_[horizon_]) +
                                           " > budget " + std::to_string(budget));
    }
    corrupted_ = true;
    budget_ = budget;
    calibrate();
    return *this;
}

Environment& Environment::set_scale(double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::Config, "noise scale must be positive");
    scale_ = scale;
    explicit_scale_ = true;
    return *this;
}

void Environment::calibrate() {
    noise_.validate(spec_.epsilon());
    if (explicit_scale_) return;
    scale_ = calibrate_moment(max_abs_mean(), noise_, spec_).scale;
}

double Environment::max_abs_mean() const {
    double m = 0.0;
    switch (regime_) {
        case RegimeKind::StochasticMab:
        case RegimeKind::StochasticLinear:
            for (double x : means_) m = std::max(m, std::abs(x));
            for (const auto& [t, shift] : shifts_) {
                for (std::size_t a = 0; a < k_; ++a) m = std::max(m, std::abs(means_[a] + shift[a]));
            }
            break;
        case RegimeKind::AdversarialScript:
            for (const auto& row : script_)
                for (double x : row) m = std::max(m, std::abs(x));
            break;
        case RegimeKind::Callback: m = callback_bound_; break;
    }
    return m;
}

Vector Environment::base_means(std::size_t t) const {
    switch (regime_) {
        case RegimeKind::StochasticMab:
        case RegimeKind::StochasticLinear: return means_;
        case RegimeKind::AdversarialScript: return script_[t - 1];
        case RegimeKind::Callback: {
            Vector m = callback_(t, history_);
            if (m.size() != k_) throw Error(ErrorCode::DimensionMismatch, "callback returned the wrong arm count");
            for (double x : m) {
                if (!(std::abs(x) <= callback_bound_)) {
                    throw Error(ErrorCode::InvariantViolation, "callback mean exceeds its declared bound");
                }
            }
            return m;
        }
    }
    return means_;
}

Vector Environment::expected_losses(std::size_t t) const {
    if (t < 1 || t > horizon_) throw Error(ErrorCode::InvalidArgument, "round outside the horizon");
    Vector m = base_means(t);
    if (!shifts_.empty()) {
        auto it = std::lower_bound(shifts_.begin(), shifts_.end(), t,
                                   [](const auto& entry, std::size_t r) { return entry.first < r; });
        if (it != shifts_.end() && it->first == t) {
            for (std::size_t a = 0; a < k_; ++a) m[a] += it->second[a];
        }
    }
    return m;
}

double Environment::sample_loss(std::size_t t, std::size_t arm, Rng& rng) const {
    if (arm >= k_) throw Error(ErrorCode::InvalidArgument, "arm out of range");
    const double mean = expected_losses(t)[arm];
    if (noise_.degenerate()) return mean;
    return mean + scale_ * noise_.sample(rng);
}

void Environment::record_action(std::size_t arm) { history_.push_back(arm); }

double Environment::corruption_spent(std::size_t t) const {
    if (!corrupted_) return 0.0;
    return spent_prefix_[std::min(t, horizon_)];
}

Vector Environment::certificates() const {
    const double eps = spec_.epsilon();
    Vector out(k_, 0.0);
    if (regime_ == RegimeKind::Callback) {
        out.assign(k_, moment_bound(callback_bound_, noise_, scale_, eps));
        return out;
    }
    if (regime_ == RegimeKind::AdversarialScript) {
        for (const auto& row : script_)
            for (std::size_t a = 0; a < k_; ++a) out[a] = std::max(out[a], moment_bound(row[a], noise_, scale_, eps));
        return out;
    }
    for (std::size_t a = 0; a < k_; ++a) out[a] = moment_bound(means_[a], noise_, scale_, eps);
    for (const auto& [t, shift] : shifts_) {
        for (std::size_t a = 0; a < k_; ++a) {
            out[a] = std::max(out[a], moment_bound(means_[a] + shift[a], noise_, scale_, eps));
        }
    }
    return out;
}

bool Environment::certified() const {
    for (double c : certificates()) {
        if (!(c <= spec_.sigma())) return false;
    }
    return true;
}

void Environment::require_certified() const {
    const auto cert = certificates();
    for (std::size_t a = 0; a < k_; ++a) {
        if (!(cert[a] <= spec_.sigma())) {
            throw Error(ErrorCode::Infeasible, "moment certificate of arm " + std::to_string(a) + " is " +
                                                   std::to_string(cert[a]) + " > sigma = " +
                                                   std::to_string(spec_.sigma()));
        }
    }
}

std::variant<GapProfile, NotApplicable> Environment::self_bounding_certificate() const {
    if (regime_ != RegimeKind::StochasticMab && regime_ != RegimeKind::StochasticLinear) return NotApplicable{};
    GapProfile g;
    g.optimal_arm = static_cast<std::size_t>(std::min_element(means_.begin(), means_.end()) - means_.begin());
    const double best = means_[g.optimal_arm];
    g.gaps.resize(k_);
    for (std::size_t a = 0; a < k_; ++a) {
        g.gaps[a] = means_[a] - best;
        if (a != g.optimal_arm && g.gaps[a] <= 1e-12 * (1.0 + std::abs(best))) {
            throw Error(ErrorCode::NonUniqueOptimum,
                        "arms " + std::to_string(g.optimal_arm) + " and " + std::to_string(a) + " tie for the best mean");
        }
    }
    g.corruption_budget = corrupted_ ? budget_ : 0.0;
    return g;
}

namespace {

constexpr std::size_t kMomentChunk = 1u << 15;

struct MomentSums {
    double sum = 0.0;
    double sum_sq = 0.0;
};

MomentSums moment_chunk(const Environment& env, std::size_t t, std::size_t arm, double order, std::size_t n,
                        std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(arm), static_cast<std::uint32_t>(chunk)};
    Rng rng(seq);
    MomentSums s;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = abs_pow(env.sample_loss(t, arm, rng), order);
        s.sum += v;
        s.sum_sq += v * v;
    }
    return s;
}

}  // namespace

std::vector<MomentCheck> monte_carlo_moments(const Environment& env, std::size_t t, double order, std::size_t n,
                                             std::uint64_t seed, bool parallel) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two draws");
    if (env.regime() == RegimeKind::Callback) {
        throw Error(ErrorCode::InvalidArgument, "moment check needs an oblivious environment");
    }
    const std::size_t k = env.num_arms();
    const std::size_t chunks = (n + kMomentChunk - 1) / kMomentChunk;
    std::vector<MomentSums> parts(k * chunks);
    auto chunk_n = [&](std::size_t c) { return std::min(kMomentChunk, n - c * kMomentChunk); };
    const auto total = static_cast<std::ptrdiff_t>(k * chunks);
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < total; ++i) {
            const auto iu = static_cast<std::size_t>(i);
            parts[iu] = moment_chunk(env, t, iu / chunks, order, chunk_n(iu % chunks), seed, iu % chunks);
        }
    } else {
        for (std::size_t i = 0; i < k * chunks; ++i) {
            parts[i] = moment_chunk(env, t, i / chunks, order, chunk_n(i % chunks), seed, i % chunks);
        }
    }
    const Vector means = env.expected_losses(t);
    std::vector<MomentCheck> out;
    const double nd = static_cast<double>(n);
    for (std::size_t a = 0; a < k; ++a) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            s += parts[a * chunks + c].sum;
            s2 += parts[a * chunks + c].sum_sq;
        }
        const double mean = s / nd;
        const double var = std::max(0.0, s2 / nd - mean * mean) * nd / (nd - 1.0);
        out.push_back({a, order, mean, std::sqrt(var / nd), moment_bound(means[a], env.noise(), env.scale(), order)});
    }
    return out;
}

}  // namespace htb
