#include "htb/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace htb {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::AllZero: return "AllZero";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::AffinelyDegenerate: return "AffinelyDegenerate";
        case ErrorCode::NearSingular: return "NearSingular";
        case ErrorCode::ZeroProbability: return "ZeroProbability";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::HorizonTooShort: return "HorizonTooShort";
        case ErrorCode::ZeroEntropy: return "ZeroEntropy";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::NonUniqueOptimum: return "NonUniqueOptimum";
        case ErrorCode::Config: return "Config";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

HeavyTailSpec::HeavyTailSpec(double epsilon, double sigma) : epsilon_(epsilon), sigma_(sigma) {
    if (!(epsilon > 1.0 && epsilon <= 2.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    "epsilon must lie in (1, 2], got " + std::to_string(epsilon));
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::InvalidArgument, "sigma must be positive and finite");
    }
}

namespace {

// Zero out entries below the underflow floor and rescale to unit sum.
Vector clamp_and_rescale(Vector w) {
    double sum = 0.0;
    for (double& x : w) {
        if (x < SimplexDistribution::kUnderflowFloor) x = 0.0;
        sum += x;
    }
    if (!(sum > 0.0)) throw Error(ErrorCode::AllZero, "distribution has no mass");
    for (double& x : w) x /= sum;
    return w;
}

}  // namespace

SimplexDistribution::SimplexDistribution(Vector weights) {
    if (weights.empty()) throw Error(ErrorCode::InvalidArgument, "empty distribution");
    double sum = 0.0;
    for (double x : weights) {
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "non-finite probability");
        if (x < 0.0) throw Error(ErrorCode::InvalidArgument, "negative probability");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kValidationTol) {
        throw Error(ErrorCode::InvalidArgument, "probabilities sum to " + std::to_string(sum));
    }
    weights_ = clamp_and_rescale(std::move(weights));
}

SimplexDistribution SimplexDistribution::uniform(std::size_t k) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "uniform over zero arms");
    return SimplexDistribution(Trusted{}, Vector(k, 1.0 / static_cast<double>(k)));
}

SimplexDistribution SimplexDistribution::dirac(std::size_t k, std::size_t arm) {
    if (arm >= k) throw Error(ErrorCode::InvalidArgument, "dirac arm out of range");
    Vector w(k, 0.0);
    w[arm] = 1.0;
    return SimplexDistribution(Trusted{}, std::move(w));
}

double SimplexDistribution::max() const { return *std::max_element(weights_.begin(), weights_.end()); }

std::size_t SimplexDistribution::argmax() const {
    // max_element returns the first maximal element.
    return static_cast<std::size_t>(std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
}

SimplexDistribution normalize(std::span<const double> weights) {
    if (weights.empty()) throw Error(ErrorCode::InvalidArgument, "empty weight vector");
    for (double x : weights) {
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "non-finite weight");
        if (x < 0.0) throw Error(ErrorCode::InvalidArgument, "negative weight");
    }
    if (std::all_of(weights.begin(), weights.end(), [](double x) { return x == 0.0; })) {
        throw Error(ErrorCode::AllZero, "all weights are zero");
    }
    // Rescale by the max first so huge inputs cannot overflow the sum.
    const double peak = *std::max_element(weights.begin(), weights.end());
    Vector w(weights.begin(), weights.end());
    for (double& x : w) x /= peak;
    w = clamp_and_rescale(std::move(w));
    return SimplexDistribution(SimplexDistribution::Trusted{}, std::move(w));
}

SimplexDistribution mix(const SimplexDistribution& q, const SimplexDistribution& p0, double gamma) {
    if (q.size() != p0.size()) throw Error(ErrorCode::DimensionMismatch, "mix: dimensions differ");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::InvalidArgument, "mix: gamma outside [0, 1]");
    Vector w(q.size());
    for (std::size_t a = 0; a < w.size(); ++a) w[a] = (1.0 - gamma) * q[a] + gamma * p0[a];
    return SimplexDistribution(SimplexDistribution::Trusted{}, std::move(w));
}

std::size_t numerical_rank(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    const double cutoff = static_cast<double>(m.cols()) * std::numeric_limits<double>::epsilon() * s(0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) ++rank;
    }
    return rank;
}

std::size_t affine_rank(const Eigen::MatrixXd& rows) {
    if (rows.rows() <= 1) return 0;
    Eigen::MatrixXd diffs = rows.bottomRows(rows.rows() - 1).rowwise() - rows.row(0);
    return numerical_rank(diffs);
}

FeatureSet::FeatureSet(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
    if (rows_.rows() < 2) throw Error(ErrorCode::InvalidArgument, "feature set needs at least two arms");
    if (rows_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "feature dimension must be positive");
    if (!rows_.allFinite()) throw Error(ErrorCode::NonFinite, "non-finite feature entry");
    const std::size_t rank = numerical_rank(rows_);
    if (rank < static_cast<std::size_t>(rows_.cols())) {
        throw Error(ErrorCode::RankDeficient, "features span rank " + std::to_string(rank) + " < d = " +
                                                  std::to_string(rows_.cols()));
    }
}

FeatureSet FeatureSet::standard_basis(std::size_t k) {
    return FeatureSet(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
}

FeatureSet FeatureSet::from_csv(std::istream& in, bool has_header) {
    std::vector<Vector> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (has_header && line_no == 1) continue;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Vector row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error(ErrorCode::Config, "feature CSV line " + std::to_string(line_no) + ": bad number '" +
                                                   cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw Error(ErrorCode::Config, "feature CSV line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(rows.front().size()) + " columns");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::Config, "feature CSV has no rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return FeatureSet(std::move(m));
}

FeatureSet FeatureSet::from_csv_file(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open feature file " + path);
    return from_csv(in, has_header);
}

double GapProfile::min_gap() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < gaps.size(); ++a) {
        if (a != optimal_arm) best = std::min(best, gaps[a]);
    }
    return best;
}

double abs_pow(double x, double e) {
    if (x == 0.0) return 0.0;
    return std::pow(std::abs(x), e);
}

std::size_t sample_arm(const SimplexDistribution& p, double u) {
    double cum = 0.0;
    std::size_t last = 0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] <= 0.0) continue;
        cum += p[a];
        last = a;
        if (u < cum) return a;
    }
    return last;
}

}  // namespace htb
