#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aligncheck/alignment.hpp"

namespace aligncheck::stats {

// Median with the lower-midpoint convention: mean of the two central order
// statistics for even n. Throws EmptyInputError.
double median(std::span<const double> values);

// Linear interpolation between closest ranks, position p/100 * (n-1) on the
// sorted sequence. p in [0, 100]. Throws EmptyInputError / POutOfRangeError.
double percentile(std::span<const double> values, double p);

// The duration-comparison sigmoid on [0, inf) x [0, inf). Corrected form is
// antisymmetric with range [-2, 2]; PaperLiteral keeps the published second
// branch 2 - q(b,a), which is discontinuous at a == b and lands in (2, 4].
enum class QSigmoidForm { Corrected, PaperLiteral };
double q_sigmoid(double a, double b, QSigmoidForm form = QSigmoidForm::Corrected);

// Duration-weighted moving average over phone midpoints. For each scored
// phone the output is the weighted mean of the scores of every scored phone
// whose midpoint lies within +-window_s/2 of its own midpoint. Unscored
// phones stay unscored and do not block their neighbours.
std::vector<std::optional<double>> smooth_time_weighted(
    const RecordingAlignment& alignment,
    std::span<const std::optional<double>> scores, double window_s);

// Dense row-major matrix, just big enough for the designs used here.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

struct RegressionFit {
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> p_values;  // two-sided t-test per coefficient
  double r_squared = 0.0;
  std::size_t n_obs = 0;
  std::vector<std::string> design_labels;
};

// Least squares via Householder QR. With intercept=true a constant column is
// appended and labelled "intercept". R^2 is taken about the mean when an
// intercept is present, about zero otherwise. Throws TooFewObservationsError
// when n <= k and RankDeficientError below a 1e-10 relative pivot tolerance.
RegressionFit ols_fit(const Matrix& design, std::span<const double> response,
                      std::vector<std::string> labels, bool intercept);

// P(X >= k) for X ~ Poisson(mean), via the regularized incomplete gamma.
double poisson_upper_tail(std::uint64_t k_observed, double mean);

// Exposed for reuse and testing.
double regularized_incomplete_beta(double a, double b, double x);
double regularized_lower_gamma(double a, double x);
double student_t_two_sided_p(double t, double dof);

}  // namespace aligncheck::stats
