#include "htb/simplex_ftrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace htb {

RegularizerSpec RegularizerSpec::shannon() { return RegularizerSpec{RegularizerKind::Shannon, 0.0, 0.0, 0.0}; }

RegularizerSpec RegularizerSpec::tsallis(double alpha) {
    RegularizerSpec r{RegularizerKind::Tsallis, alpha, 0.0, 0.0};
    r.validate();
    return r;
}

RegularizerSpec RegularizerSpec::hybrid(double alpha, double alpha_bar, double beta_bar) {
    RegularizerSpec r{RegularizerKind::HybridTsallis, alpha, alpha_bar, beta_bar};
    r.validate();
    return r;
}

void RegularizerSpec::validate() const {
    switch (kind) {
        case RegularizerKind::Shannon: return;
        case RegularizerKind::Tsallis:
            if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "Tsallis alpha must lie in (0, 1)");
            return;
        case RegularizerKind::HybridTsallis:
            if (!(alpha_bar > 0.0 && alpha_bar <= alpha && alpha < 1.0)) {
                throw Error(ErrorCode::InvalidArgument, "hybrid regularizer needs 0 < alpha_bar <= alpha < 1");
            }
            if (!(beta_bar >= 0.0) || !std::isfinite(beta_bar)) {
                throw Error(ErrorCode::InvalidArgument, "beta_bar must be finite and nonnegative");
            }
            return;
    }
}

namespace {

constexpr double kLogFloor = -690.7755278982137;  // log(1e-300)

void check_inputs(std::span<const double> cum_loss, double beta) {
    if (cum_loss.empty()) throw Error(ErrorCode::InvalidArgument, "empty loss vector");
    for (double x : cum_loss) {
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "non-finite cumulative loss");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
}

// One coordinate of the dual map: the q solving
//   beta q^(alpha-1) + beta_bar q^(alpha_bar-1) = x,
// together with dq/dx. x is at least beta + beta_bar on the bracket used below,
// so the root exists and is unique.
struct Coordinate {
    double q;
    double dq_dx;
};

class DualMap {
public:
    DualMap(double beta, double alpha, double beta_bar, double alpha_bar)
        : beta_(beta), alpha_(alpha), beta_bar_(beta_bar), alpha_bar_(alpha_bar) {}

    double g(double q) const {
        double v = beta_ * std::pow(q, alpha_ - 1.0);
        if (beta_bar_ > 0.0) v += beta_bar_ * std::pow(q, alpha_bar_ - 1.0);
        return v;
    }

    Coordinate solve(double x) const {
        double u = std::log(x / beta_) / (alpha_ - 1.0);
        if (beta_bar_ > 0.0) {
            // Both single-term roots lie left of the true root, where the
            // convex decreasing residual is positive; Newton from there is
            // monotone and never overshoots.
            u = std::max(u, std::log(x / beta_bar_) / (alpha_bar_ - 1.0));
            for (int it = 0; it < 100; ++it) {
                const double t1 = beta_ * std::exp((alpha_ - 1.0) * u);
                const double t2 = beta_bar_ * std::exp((alpha_bar_ - 1.0) * u);
                const double h = t1 + t2 - x;
                const double dh = (alpha_ - 1.0) * t1 + (alpha_bar_ - 1.0) * t2;
                const double step = -h / dh;
                u += step;
                if (!(std::abs(step) > 1e-15 * std::max(1.0, std::abs(u)))) break;
            }
        }
        u = std::max(u, kLogFloor);
        const double q = std::exp(u);
        // q g'(q), written through the two terms to stay finite for tiny q.
        double qg = (alpha_ - 1.0) * beta_ * std::exp((alpha_ - 1.0) * u);
        if (beta_bar_ > 0.0) qg += (alpha_bar_ - 1.0) * beta_bar_ * std::exp((alpha_bar_ - 1.0) * u);
        return {q, q / qg};
    }

private:
    double beta_, alpha_, beta_bar_, alpha_bar_;
};

FtrlSolution solve_dual(std::span<const double> cum_loss, double beta, double alpha, double beta_bar,
                        double alpha_bar, std::optional<double> warm_shift) {
    const std::size_t k = cum_loss.size();
    const double min_loss = *std::min_element(cum_loss.begin(), cum_loss.end());
    Vector shifted(k);
    for (std::size_t a = 0; a < k; ++a) shifted[a] = cum_loss[a] - min_loss;

    const DualMap map(beta, alpha, beta_bar, alpha_bar);
    const double kd = static_cast<double>(k);

    // At c = g(1) the best arm alone carries unit mass; at c = g(1/K) every
    // arm carries at most 1/K.
    double lo = map.g(1.0);
    double hi = map.g(1.0 / kd);
    if (!(hi >= lo)) hi = lo;

    Vector q(k);
    auto evaluate = [&](double c, double& slope) {
        double sum = 0.0;
        slope = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            const Coordinate coord = map.solve(shifted[a] + c);
            q[a] = coord.q;
            sum += coord.q;
            slope += coord.dq_dx;
        }
        return sum - 1.0;
    };

    double c = lo;
    if (warm_shift) {
        const double w = *warm_shift + min_loss;
        if (w > lo && w < hi) c = w;
    }

    double slope = 0.0;
    double f = evaluate(c, slope);
    std::size_t iterations = 1;
    const double f_tol = 4.0 * std::numeric_limits<double>::epsilon() * kd;
    while (std::abs(f) > f_tol) {
        if (iterations >= kFtrlMaxIterations) {
            throw Error(ErrorCode::NoConvergence, "Tsallis dual solve exceeded iteration cap");
        }
        if (f > 0.0) lo = c; else hi = c;
        double next = c - f / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (next == c || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(c)) break;
        c = next;
        f = evaluate(c, slope);
        ++iterations;
    }

    double sum = 0.0;
    for (double x : q) sum += x;
    const double residual = std::abs(sum - 1.0);
    for (double& x : q) x /= sum;

    FtrlSolution sol{SimplexDistribution(std::move(q)), 0.0, c - min_loss, iterations, residual};
    sol.dual_value = beta / alpha - sol.shift;
    if (beta_bar > 0.0) sol.dual_value += beta_bar / alpha_bar;
    return sol;
}

}  // namespace

FtrlSolution solve_shannon(std::span<const double> cum_loss, double beta) {
    check_inputs(cum_loss, beta);
    const double min_loss = *std::min_element(cum_loss.begin(), cum_loss.end());
    Vector w(cum_loss.size());
    double z = 0.0;
    for (std::size_t a = 0; a < w.size(); ++a) {
        w[a] = std::exp(-(cum_loss[a] - min_loss) / beta);
        z += w[a];
    }
    for (double& x : w) x /= z;
    double sum = 0.0;
    for (double x : w) sum += x;
    // lambda = L_a + beta (log q_a + 1), read off at the best arm.
    const double lambda = min_loss + beta * (1.0 - std::log(z));
    return FtrlSolution{normalize(w), lambda, lambda, 1, std::abs(sum - 1.0)};
}

FtrlSolution solve_tsallis(std::span<const double> cum_loss, double beta, double alpha,
                           std::optional<double> warm_shift) {
    check_inputs(cum_loss, beta);
    RegularizerSpec::tsallis(alpha);
    return solve_dual(cum_loss, beta, alpha, 0.0, 0.0, warm_shift);
}

FtrlSolution solve_hybrid(std::span<const double> cum_loss, double beta, double alpha, double beta_bar,
                          double alpha_bar, std::optional<double> warm_shift) {
    check_inputs(cum_loss, beta);
    RegularizerSpec::hybrid(alpha, alpha_bar, beta_bar);
    return solve_dual(cum_loss, beta, alpha, beta_bar, alpha_bar, warm_shift);
}

FtrlSolution solve_ftrl(const RegularizerSpec& reg, std::span<const double> cum_loss, double beta,
                        std::optional<double> warm_shift) {
    switch (reg.kind) {
        case RegularizerKind::Shannon: return solve_shannon(cum_loss, beta);
        case RegularizerKind::Tsallis: return solve_tsallis(cum_loss, beta, reg.alpha, warm_shift);
        case RegularizerKind::HybridTsallis:
            return solve_hybrid(cum_loss, beta, reg.alpha, reg.beta_bar, reg.alpha_bar, warm_shift);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown regularizer");
}

double tsallis_entropy_value(const SimplexDistribution& q, double alpha) {
    return -tsallis_regularizer(q.weights(), alpha);
}

double tsallis_regularizer(std::span<const double> q, double alpha) {
    double s = 0.0;
    double mass = 0.0;
    for (double x : q) {
        if (x > 0.0) s += std::pow(x, alpha);
        mass += x;
    }
    return -(s - mass) / alpha;
}

double shannon_regularizer(std::span<const double> q) {
    double s = 0.0;
    for (double x : q) {
        if (x > 0.0) s += x * std::log(x);
    }
    return s;
}

double ftrl_objective(const RegularizerSpec& reg, std::span<const double> cum_loss, double beta,
                      std::span<const double> q) {
    double linear = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) linear += cum_loss[a] * q[a];
    switch (reg.kind) {
        case RegularizerKind::Shannon: return linear + beta * shannon_regularizer(q);
        case RegularizerKind::Tsallis: return linear + beta * tsallis_regularizer(q, reg.alpha);
        case RegularizerKind::HybridTsallis:
            return linear + beta * tsallis_regularizer(q, reg.alpha) +
                   reg.beta_bar * tsallis_regularizer(q, reg.alpha_bar);
    }
    return linear;
}

Vector ftrl_gradient(const RegularizerSpec& reg, std::span<const double> cum_loss, double beta,
                     std::span<const double> q) {
    Vector g(q.size());
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q.size(); ++a) {
        const double x = q[a];
        switch (reg.kind) {
            case RegularizerKind::Shannon:
                g[a] = cum_loss[a] + (x > 0.0 ? beta * (std::log(x) + 1.0) : -inf);
                break;
            case RegularizerKind::Tsallis:
                g[a] = cum_loss[a] + (x > 0.0 ? beta * (1.0 / reg.alpha - std::pow(x, reg.alpha - 1.0)) : -inf);
                break;
            case RegularizerKind::HybridTsallis:
                g[a] = cum_loss[a] +
                       (x > 0.0 ? beta * (1.0 / reg.alpha - std::pow(x, reg.alpha - 1.0)) +
                                      reg.beta_bar * (1.0 / reg.alpha_bar - std::pow(x, reg.alpha_bar - 1.0))
                                : -inf);
                break;
        }
    }
    return g;
}

}  // namespace htb
