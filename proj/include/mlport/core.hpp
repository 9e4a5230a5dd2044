#pragma once

#include "mlport/errors.hpp"
#include "mlport/linalg.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace mlport {

/// Fixed numerical tolerances shared across modules.
namespace tol {
inline constexpr double kNormalization = 1e-12;  // |1'theta| below this has no relative weights
inline constexpr double kConditionLimit = 1e12;  // moment matrices at or beyond are degenerate
inline constexpr double kPositiveEigen = 1e-12;  // PCR: eigenvalues above count as positive
inline constexpr double kZeroVariance = 1e-18;   // portfolio variance at or below is riskless
}  // namespace tol

namespace detail {

inline std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

/// Numeric labels compare as numbers, anything else lexicographically.
inline bool period_less(const std::string& a, const std::string& b) {
  const auto na = parse_number(a);
  const auto nb = parse_number(b);
  if (na && nb) return *na < *nb;
  return a < b;
}

inline std::vector<std::string> numbered_labels(const std::string& prefix, Eigen::Index count, int start) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) out.push_back(prefix + std::to_string(start + i));
  return out;
}

}  // namespace detail

/// An n x m panel of excess returns: rows are periods, columns are assets.
class ReturnsMatrix {
 public:
  ReturnsMatrix(Eigen::MatrixXd data, std::vector<std::string> asset_labels,
                std::vector<std::string> period_index)
      : data_(std::move(data)), assets_(std::move(asset_labels)), periods_(std::move(period_index)) {
    validate();
  }

  /// Labels default to A1..Am and periods to 1..n.
  explicit ReturnsMatrix(Eigen::MatrixXd data)
      : data_(std::move(data)),
        assets_(detail::numbered_labels("A", data_.cols(), 1)),
        periods_(detail::numbered_labels("", data_.rows(), 1)) {
    validate();
  }

  const Eigen::MatrixXd& data() const noexcept { return data_; }
  const std::vector<std::string>& asset_labels() const noexcept { return assets_; }
  const std::vector<std::string>& period_index() const noexcept { return periods_; }
  Eigen::Index n() const noexcept { return data_.rows(); }
  Eigen::Index m() const noexcept { return data_.cols(); }

 private:
  void validate() const {
    if (data_.rows() < 1 || data_.cols() < 1) {
      throw Error(ErrorKind::InvalidArgument, "returns matrix needs at least one row and one column");
    }
    if (!data_.allFinite()) throw Error(ErrorKind::InvalidArgument, "returns matrix has non-finite entries");
    if (assets_.size() != static_cast<std::size_t>(data_.cols())) {
      throw Error(ErrorKind::InvalidArgument, "asset label count does not match column count");
    }
    if (periods_.size() != static_cast<std::size_t>(data_.rows())) {
      throw Error(ErrorKind::InvalidArgument, "period index length does not match row count");
    }
    std::unordered_set<std::string> seen;
    for (const auto& label : assets_) {
      if (!seen.insert(label).second) throw Error(ErrorKind::DuplicateAssetLabel, "duplicate asset label '" + label + "'");
    }
    for (std::size_t i = 1; i < periods_.size(); ++i) {
      if (!detail::period_less(periods_[i - 1], periods_[i])) {
        throw Error(ErrorKind::InvalidArgument,
                    "period index not strictly increasing at '" + periods_[i] + "'");
      }
    }
  }

  Eigen::MatrixXd data_;
  std::vector<std::string> assets_;
  std::vector<std::string> periods_;
};

/// Sample mean, ML covariance (1/n) and Gram matrix X'X.
struct SampleMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::Index n_obs = 0;
  Eigen::MatrixXd gram;
};

inline SampleMoments compute_moments(const Eigen::MatrixXd& x) {
  const double n = static_cast<double>(x.rows());
  SampleMoments out;
  out.n_obs = x.rows();
  out.gram = x.transpose() * x;
  out.mean = x.colwise().sum().transpose() / n;
  out.cov = linalg::symmetrize(out.gram / n - out.mean * out.mean.transpose());
  return out;
}

inline SampleMoments compute_moments(const ReturnsMatrix& returns) { return compute_moments(returns.data()); }

/// Absolute positions theta in the risky assets; the risk-free position is 1 - 1'theta.
struct WeightVector {
  Eigen::VectorXd theta;
  std::vector<std::string> labels;

  double risk_free_position() const { return 1.0 - theta.sum(); }
};

inline Eigen::VectorXd relative_weights(const Eigen::VectorXd& theta) {
  const double gross = theta.sum();
  if (!(std::abs(gross) > tol::kNormalization)) {
    throw Error(ErrorKind::DegenerateNormalization, "sum of positions is numerically zero");
  }
  return theta / gross;
}

inline Eigen::VectorXd relative_weights(const WeightVector& w) { return relative_weights(w.theta); }

/// Ground-truth market: expected excess returns, covariance and ideal return r_bar.
class PopulationSpec {
 public:
  PopulationSpec(Eigen::VectorXd mu, Eigen::MatrixXd sigma, double r_bar)
      : mu_(std::move(mu)), sigma_(std::move(sigma)), r_bar_(r_bar) {
    validate();
  }

  /// r_bar = (1 - alpha r_f) / alpha for quadratic utility with risk aversion alpha.
  static PopulationSpec from_risk_aversion(Eigen::VectorXd mu, Eigen::MatrixXd sigma, double alpha, double r_f) {
    if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "risk aversion must be positive");
    PopulationSpec pop(std::move(mu), std::move(sigma), (1.0 - alpha * r_f) / alpha);
    pop.alpha_ = alpha;
    pop.r_f_ = r_f;
    return pop;
  }

  const Eigen::VectorXd& mu() const noexcept { return mu_; }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  double r_bar() const noexcept { return r_bar_; }
  std::optional<double> alpha() const noexcept { return alpha_; }
  std::optional<double> r_f() const noexcept { return r_f_; }
  Eigen::Index m() const noexcept { return mu_.size(); }

  /// Second-moment matrix A = Sigma + mu mu'.
  Eigen::MatrixXd second_moment() const { return sigma_ + mu_ * mu_.transpose(); }

  /// Population restricted to the leading `count` assets.
  PopulationSpec leading(Eigen::Index count) const {
    if (count < 1 || count > m()) throw Error(ErrorKind::InvalidArgument, "asset subset out of range");
    PopulationSpec out(mu_.head(count), sigma_.topLeftCorner(count, count), r_bar_);
    out.alpha_ = alpha_;
    out.r_f_ = r_f_;
    return out;
  }

 private:
  void validate() const {
    if (mu_.size() < 1) throw Error(ErrorKind::InvalidArgument, "population needs at least one asset");
    if (sigma_.rows() != mu_.size() || sigma_.cols() != mu_.size()) {
      throw Error(ErrorKind::InvalidArgument, "sigma dimensions do not match mu");
    }
    if (!mu_.allFinite() || !sigma_.allFinite()) throw Error(ErrorKind::InvalidArgument, "population moments not finite");
    if (!(r_bar_ > 0.0) || !std::isfinite(r_bar_)) throw Error(ErrorKind::InvalidArgument, "r_bar must be positive");
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, sigma_.cwiseAbs().maxCoeff())) {
      throw Error(ErrorKind::SingularPopulation, "sigma is not symmetric");
    }
    if (!linalg::is_positive_definite(sigma_)) throw Error(ErrorKind::SingularPopulation, "sigma is not positive definite");
  }

  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  double r_bar_;
  std::optional<double> alpha_;
  std::optional<double> r_f_;
};

}  // namespace mlport
