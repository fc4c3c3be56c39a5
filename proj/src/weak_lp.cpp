#include "gapcount/weak_lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace gapcount {

WeightedSequence::WeightedSequence(std::vector<double> values) : values_(std::move(values)) {
  for (double& x : values_) {
    if (std::isnan(x)) throw std::invalid_argument("WeightedSequence: NaN value");
    x = std::abs(x);
  }
  std::sort(values_.begin(), values_.end(), std::greater<>());
}

WeightedSequence WeightedSequence::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return WeightedSequence(std::move(v));
}

WeightedSequence WeightedSequence::prefix(std::size_t n) const {
  n = std::min(n, values_.size());
  return WeightedSequence(std::vector<double>(values_.begin(), values_.begin() + n));
}

WeightedSequence WeightedSequence::merged(const WeightedSequence& other) const {
  std::vector<double> v(values_);
  v.insert(v.end(), other.values_.begin(), other.values_.end());
  return WeightedSequence(std::move(v));
}

std::size_t distribution(const WeightedSequence& seq, double s) {
  const auto vals = seq.values();
  return static_cast<std::size_t>(
      std::lower_bound(vals.begin(), vals.end(), s, std::greater<>()) - vals.begin());
}

double weak_quasinorm(const WeightedSequence& seq, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("weak_quasinorm: p must be > 0");
  double best = 0.0;
  for (std::size_t m = 1; m <= seq.size(); ++m) {
    best = std::max(best, seq[m - 1] * std::pow(static_cast<double>(m), 1.0 / p));
  }
  return best;
}

DpWindowEstimate dp_window(const WeightedSequence& seq, double p, double s_lo, double s_hi) {
  if (!(p > 0.0)) throw std::invalid_argument("dp_window: p must be > 0");
  if (!(s_lo > 0.0) || !(s_lo <= s_hi)) {
    throw std::invalid_argument("dp_window: need 0 < s_lo <= s_hi");
  }
  DpWindowEstimate est;
  est.p = p;
  est.s_lo = s_lo;
  est.s_hi = s_hi;
  // n(s) jumps at every distinct value a; just below a it equals #{>= a}, at a it
  // equals #{> a}. s^p n(s) increases between jumps, so the sup over the window
  // is a left limit at a jump (or at s_hi) and the inf sits at a jump (or s_lo).
  est.sup_est = std::pow(s_hi, p) * static_cast<double>(distribution(seq, s_hi));
  est.inf_est = std::pow(s_lo, p) * static_cast<double>(distribution(seq, s_lo));
  const auto vals = seq.values();
  for (std::size_t i = 0; i < vals.size();) {
    const double a = vals[i];
    std::size_t j = i;
    while (j < vals.size() && vals[j] == a) ++j;  // j = #{>= a}
    if (a > s_lo && a <= s_hi) {
      const double ap = std::pow(a, p);
      est.sup_est = std::max(est.sup_est, ap * static_cast<double>(j));
      est.inf_est = std::min(est.inf_est, ap * static_cast<double>(i));
      ++est.samples;
    }
    i = j;
  }
  est.empty = est.samples == 0;
  return est;
}

DpWindowEstimate dp_window_default(const WeightedSequence& seq, double p) {
  std::size_t rank = 0;
  for (double x : seq.values()) rank += x > 0.0 ? 1 : 0;
  if (rank < 10) throw std::invalid_argument("dp_window_default: need at least 10 nonzero values");
  const auto lo = static_cast<std::size_t>(0.75 * static_cast<double>(rank));
  const auto hi = static_cast<std::size_t>(0.10 * static_cast<double>(rank));
  return dp_window(seq, p, seq[lo], seq[hi]);
}

MembershipVerdicts membership_verdicts(const WeightedSequence& seq, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("membership_verdicts: p must be > 0");
  MembershipVerdicts out;
  const std::size_t n = seq.size();
  if (n < 64) return out;
  for (std::size_t len : {n / 8, n / 4, n / 2, n}) {
    out.prefix_quasinorms.push_back(weak_quasinorm(seq.prefix(len), p));
  }
  const double growth = out.prefix_quasinorms[3] / std::max(out.prefix_quasinorms[2], 1e-300);
  if (growth < 1.1) {
    out.weak = Verdict::yes;
  } else if (growth >= 1.25) {
    out.weak = Verdict::no;
  }

  for (std::size_t lo = 1; lo <= n; lo *= 2) {
    const std::size_t hi = std::min(n, 2 * lo - 1);
    double best = 0.0;
    for (std::size_t m = lo; m <= hi; ++m) {
      best = std::max(best, seq[m - 1] * std::pow(static_cast<double>(m), 1.0 / p));
    }
    out.block_maxima.push_back(best);
  }
  // the last dyadic block may be partial; judge the four full blocks before it
  const std::size_t full = out.block_maxima.size() - 1;
  if (out.weak == Verdict::no) {
    out.small_o = Verdict::no;
  } else if (full >= 4) {
    bool decreasing = true;
    for (std::size_t b = full - 3; b < full; ++b) {
      decreasing = decreasing && out.block_maxima[b] < out.block_maxima[b - 1];
    }
    const double drop = out.block_maxima[full - 1] / out.block_maxima[full - 4];
    if (decreasing && drop < 0.9) {
      out.small_o = Verdict::yes;
    } else if (drop > 0.97) {
      out.small_o = Verdict::no;
    }
  }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::yes:
      return "yes";
    case Verdict::no:
      return "no";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

}  // namespace gapcount
