#pragma once

// Shared vocabulary for the heavy-tailed bandit library: distributions over
// arms, moment parameters, feature sets and per-round traces.

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace htb {

enum class ErrorCode {
    AllZero,
    NonFinite,
    DimensionMismatch,
    InvalidArgument,
    NoConvergence,
    RankDeficient,
    AffinelyDegenerate,
    NearSingular,
    ZeroProbability,
    InvariantViolation,
    HorizonTooShort,
    ZeroEntropy,
    Infeasible,
    NonUniqueOptimum,
    Config,
    Io,
};

const char* to_string(ErrorCode code);

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

using Vector = std::vector<double>;

/// Moment parameters (epsilon, sigma): E|loss|^epsilon <= sigma with
/// epsilon in (1, 2] and sigma > 0.
class HeavyTailSpec {
public:
    HeavyTailSpec(double epsilon, double sigma);

    double epsilon() const noexcept { return epsilon_; }
    double sigma() const noexcept { return sigma_; }

private:
    double epsilon_;
    double sigma_;
};

/// Probability vector over K arms. Entries are nonnegative and sum to one.
class SimplexDistribution {
public:
    static constexpr double kValidationTol = 1e-9;
    static constexpr double kUnderflowFloor = 1e-300;

    /// Validates weights that are already (approximately) a distribution and
    /// renormalizes them exactly.
    explicit SimplexDistribution(Vector weights);

    static SimplexDistribution uniform(std::size_t k);
    static SimplexDistribution dirac(std::size_t k, std::size_t arm);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t a) const { return weights_[a]; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Largest weight (the infinity norm).
    double max() const;
    /// Index of the largest weight; ties go to the lowest index.
    std::size_t argmax() const;

private:
    struct Trusted {};
    SimplexDistribution(Trusted, Vector weights) : weights_(std::move(weights)) {}

    friend SimplexDistribution normalize(std::span<const double> weights);
    friend SimplexDistribution mix(const SimplexDistribution&, const SimplexDistribution&, double);

    Vector weights_;
};

/// Scales nonnegative weights to sum to one. Throws AllZero / NonFinite.
SimplexDistribution normalize(std::span<const double> weights);

/// (1 - gamma) q + gamma p0.
SimplexDistribution mix(const SimplexDistribution& q, const SimplexDistribution& p0, double gamma);

/// Arm feature vectors, one row per arm. The rows span R^d.
class FeatureSet {
public:
    explicit FeatureSet(Eigen::MatrixXd rows);

    /// Features e_1..e_K; turns a K-armed bandit into a linear one with d = K.
    static FeatureSet standard_basis(std::size_t k);

    /// One arm per line, `d` comma-separated reals. With `has_header` the first
    /// line is skipped.
    static FeatureSet from_csv(std::istream& in, bool has_header);
    static FeatureSet from_csv_file(const std::string& path, bool has_header);

    std::size_t num_arms() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
    std::size_t ambient_dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }

    const Eigen::MatrixXd& matrix() const noexcept { return rows_; }
    Eigen::VectorXd feature(std::size_t a) const { return rows_.row(static_cast<Eigen::Index>(a)).transpose(); }

private:
    Eigen::MatrixXd rows_;
};

/// Numerical rank with cutoff n * machine_eps * largest singular value.
std::size_t numerical_rank(const Eigen::MatrixXd& m);

/// Dimension of the affine hull of the rows.
std::size_t affine_rank(const Eigen::MatrixXd& rows);

/// Named per-round invariant checks. A flag that is not applicable to the
/// running algorithm stays true.
struct InvariantFlags {
    bool simplex_normalized = true;
    bool gamma_at_most_half = true;
    bool bonus_within_threshold = true;
    bool clip_contained = true;
    bool beta_monotone = true;
    /// h_t <= 8 h_{t-1}; reported, never fatal.
    bool entropy_stable = true;

    bool all_hard() const {
        return simplex_normalized && gamma_at_most_half && bonus_within_threshold && clip_contained &&
               beta_monotone;
    }
};

struct RoundRecord {
    std::size_t t = 0;
    std::optional<SimplexDistribution> q;
    std::optional<SimplexDistribution> p;
    std::size_t chosen_arm = 0;
    double uniform_draw = 0.0;
    double observed_loss = 0.0;
    Vector raw_estimate;
    Vector clipped_estimate;
    Vector bonus;
    double gamma = 0.0;
    Vector clip_thresholds;
    double beta = 0.0;
    /// Learning-rate update inputs; only set by the HT-SPM policy.
    std::optional<double> entropy;
    std::optional<double> z;
    std::optional<double> w;
    std::optional<double> next_beta;
    /// Low-order parts of beta and next_beta when the learning rate is kept
    /// as a compensated sum (beta + beta_lo is the exact running value).
    std::optional<double> beta_lo;
    std::optional<double> next_beta_lo;
    InvariantFlags flags;
};

/// Suboptimality gaps, the optimal arm and the corruption budget of a
/// self-bounding regime.
struct GapProfile {
    Vector gaps;
    std::size_t optimal_arm = 0;
    double corruption_budget = 0.0;

    double min_gap() const;
};

/// |x|^e with |0|^e = 0.
double abs_pow(double x, double e);

using Rng = std::mt19937_64;

/// Uniform on [0, 1) from the top 53 bits of one engine output.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF draw: the first arm whose cumulative weight exceeds u. Arms
/// with zero weight are never returned.
std::size_t sample_arm(const SimplexDistribution& p, double u);

}  // namespace htb
