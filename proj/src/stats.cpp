#include "aligncheck/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aligncheck/errors.hpp"

namespace aligncheck::stats {

double median(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("median of empty sequence");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw EmptyInputError("percentile of empty sequence");
  if (!(p >= 0.0 && p <= 100.0)) {
    throw POutOfRangeError("percentile p outside [0,100]: " + std::to_string(p));
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi) return v[lo];
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double q_sigmoid(double a, double b, QSigmoidForm form) {
  if (a < 0.0 || b < 0.0) throw Error("q_sigmoid arguments must be >= 0");
  if (a == 0.0 && b == 0.0) throw BothZeroError("q_sigmoid(0, 0) is undefined");
  if (a <= b) return 2.0 * std::sqrt(a / b) - 2.0;
  if (form == QSigmoidForm::PaperLiteral) {
    return 2.0 - (2.0 * std::sqrt(b / a) - 2.0);
  }
  return -(2.0 * std::sqrt(b / a) - 2.0);
}

std::vector<std::optional<double>> smooth_time_weighted(
    const RecordingAlignment& alignment,
    std::span<const std::optional<double>> scores, double window_s) {
  if (scores.size() != alignment.phones.size()) {
    throw Error("smooth_time_weighted: score count does not match phone count");
  }
  if (!(window_s > 0.0)) throw Error("smooth_time_weighted: window must be > 0");

  // Midpoints of scored phones, in phone order (nondecreasing because
  // phones are sorted and non-overlapping).
  std::vector<std::size_t> scored;
  scored.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].has_value()) scored.push_back(i);
  }

  std::vector<std::optional<double>> out(scores.size());
  if (scored.empty()) return out;

  const double half = 0.5 * window_s;
  std::size_t lo = 0, hi = 0;  // window [lo, hi) into `scored`
  for (std::size_t s = 0; s < scored.size(); ++s) {
    const double mid = alignment.phones[scored[s]].midpoint_s();
    while (lo < scored.size() &&
           alignment.phones[scored[lo]].midpoint_s() < mid - half) {
      ++lo;
    }
    if (hi < lo) hi = lo;
    while (hi < scored.size() &&
           alignment.phones[scored[hi]].midpoint_s() <= mid + half) {
      ++hi;
    }
    double wsum = 0.0, wssum = 0.0, plain = 0.0;
    for (std::size_t t = lo; t < hi; ++t) {
      const auto& ph = alignment.phones[scored[t]];
      const double w = ph.duration_s();
      wsum += w;
      wssum += w * *scores[scored[t]];
      plain += *scores[scored[t]];
    }
    // All-zero durations in the window: fall back to the plain mean.
    out[scored[s]] = wsum > 0.0 ? wssum / wsum
                                : plain / static_cast<double>(hi - lo);
  }
  return out;
}

namespace {

// Compact Householder QR. The upper triangle of `a` ends up holding R; each
// reflector's tail stays below the diagonal of its column with the leading
// element v0 kept separately in `v0s`.
struct QR {
  Matrix a;
  std::vector<double> v0s;
  std::size_t n, k;
};

QR householder_qr(Matrix a) {
  QR qr{std::move(a), {}, 0, 0};
  qr.n = qr.a.rows();
  qr.k = qr.a.cols();
  qr.v0s.assign(qr.k, 0.0);
  for (std::size_t j = 0; j < qr.k; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < qr.n; ++i) norm += qr.a.at(i, j) * qr.a.at(i, j);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;  // rank check happens on R's diagonal
    const double alpha = qr.a.at(j, j) >= 0.0 ? -norm : norm;
    const double v0 = qr.a.at(j, j) - alpha;
    qr.a.at(j, j) = alpha;
    qr.v0s[j] = v0;
    double vnorm2 = v0 * v0;
    for (std::size_t i = j + 1; i < qr.n; ++i) {
      vnorm2 += qr.a.at(i, j) * qr.a.at(i, j);
    }
    if (vnorm2 == 0.0) continue;
    for (std::size_t c = j + 1; c < qr.k; ++c) {
      double dot = v0 * qr.a.at(j, c);
      for (std::size_t i = j + 1; i < qr.n; ++i) {
        dot += qr.a.at(i, j) * qr.a.at(i, c);
      }
      const double f = 2.0 * dot / vnorm2;
      qr.a.at(j, c) -= f * v0;
      for (std::size_t i = j + 1; i < qr.n; ++i) {
        qr.a.at(i, c) -= f * qr.a.at(i, j);
      }
    }
  }
  return qr;
}

void apply_qt(const QR& qr, std::vector<double>& y) {
  for (std::size_t j = 0; j < qr.k; ++j) {
    const double v0 = qr.v0s[j];
    double vnorm2 = v0 * v0;
    for (std::size_t i = j + 1; i < qr.n; ++i) {
      vnorm2 += qr.a.at(i, j) * qr.a.at(i, j);
    }
    if (vnorm2 == 0.0) continue;
    double dot = v0 * y[j];
    for (std::size_t i = j + 1; i < qr.n; ++i) dot += qr.a.at(i, j) * y[i];
    const double f = 2.0 * dot / vnorm2;
    y[j] -= f * v0;
    for (std::size_t i = j + 1; i < qr.n; ++i) y[i] -= f * qr.a.at(i, j);
  }
}

}  // namespace

RegressionFit ols_fit(const Matrix& design, std::span<const double> response,
                      std::vector<std::string> labels, bool intercept) {
  const std::size_t n = design.rows();
  const std::size_t kin = design.cols();
  if (labels.size() != kin) throw Error("ols_fit: label count mismatch");
  if (response.size() != n) throw Error("ols_fit: response length mismatch");
  const std::size_t k = kin + (intercept ? 1 : 0);
  if (n <= k) {
    throw TooFewObservationsError("ols_fit: need more than " +
                                  std::to_string(k) + " observations, got " +
                                  std::to_string(n));
  }

  Matrix x(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kin; ++j) x.at(i, j) = design.at(i, j);
    if (intercept) x.at(i, kin) = 1.0;
  }
  if (intercept) labels.push_back("intercept");

  QR qr = householder_qr(x);

  double maxdiag = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    maxdiag = std::max(maxdiag, std::abs(qr.a.at(j, j)));
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (std::abs(qr.a.at(j, j)) <= 1e-10 * maxdiag || maxdiag == 0.0) {
      throw RankDeficientError("ols_fit: design column '" + labels[j] +
                               "' is linearly dependent");
    }
  }

  std::vector<double> qty(response.begin(), response.end());
  apply_qt(qr, qty);

  // Back substitution on R beta = (Q^T y)[0..k).
  std::vector<double> beta(k, 0.0);
  for (std::size_t jj = k; jj-- > 0;) {
    double s = qty[jj];
    for (std::size_t c = jj + 1; c < k; ++c) s -= qr.a.at(jj, c) * beta[c];
    beta[jj] = s / qr.a.at(jj, jj);
  }

  // Residuals and sums of squares from the original data.
  double ss_res = 0.0, ysum = 0.0;
  std::vector<double> fitted(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double f = intercept ? beta[kin] : 0.0;
    for (std::size_t j = 0; j < kin; ++j) f += design.at(i, j) * beta[j];
    fitted[i] = f;
    const double r = response[i] - f;
    ss_res += r * r;
    ysum += response[i];
  }
  const double ymean = ysum / static_cast<double>(n);
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = intercept ? response[i] - ymean : response[i];
    ss_tot += d * d;
  }
  double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  r2 = std::min(1.0, std::max(0.0, r2));

  // (X'X)^-1 = R^-1 R^-T; diagonal entries are squared row norms of R^-1.
  Matrix rinv(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    rinv.at(j, j) = 1.0 / qr.a.at(j, j);
    for (std::size_t i = j; i-- > 0;) {
      double s = 0.0;
      for (std::size_t c = i + 1; c <= j; ++c) {
        s += qr.a.at(i, c) * rinv.at(c, j);
      }
      rinv.at(i, j) = -s / qr.a.at(i, i);
    }
  }

  const double dof = static_cast<double>(n - k);
  const double sigma2 = ss_res / dof;
  RegressionFit fit;
  fit.coefficients = beta;
  fit.n_obs = n;
  fit.design_labels = std::move(labels);
  fit.r_squared = r2;
  fit.std_errors.resize(k);
  fit.p_values.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    double rownorm2 = 0.0;
    for (std::size_t c = j; c < k; ++c) rownorm2 += rinv.at(j, c) * rinv.at(j, c);
    const double se = std::sqrt(sigma2 * rownorm2);
    fit.std_errors[j] = se;
    if (se > 0.0) {
      fit.p_values[j] = student_t_two_sided_p(beta[j] / se, dof);
    } else {
      fit.p_values[j] = beta[j] == 0.0 ? 1.0 : 0.0;
    }
  }
  return fit;
}

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;
constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw Error("incomplete beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0)) throw Error("incomplete gamma: a must be > 0");
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) {
    // Series expansion.
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < kMaxIter; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // Continued fraction for the upper tail.
  double b = x + 1.0 - a, c = 1.0 / kFpMin, d = 1.0 / b, h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  const double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  return 1.0 - q;
}

double student_t_two_sided_p(double t, double dof) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return regularized_incomplete_beta(0.5 * dof, 0.5, x);
}

double poisson_upper_tail(std::uint64_t k_observed, double mean) {
  if (k_observed == 0) return 1.0;
  if (mean <= 0.0) return 0.0;
  // P(X >= k) equals the regularized lower gamma P(k, mean).
  return regularized_lower_gamma(static_cast<double>(k_observed), mean);
}

}  // namespace aligncheck::stats
