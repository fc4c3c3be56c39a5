#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gapcount/floquet.hpp"

namespace gapcount {

/// Finite list of magnitudes, sorted descending on construction. Serves both as a
/// lattice function (counting measure) and as a list of s-numbers.
class WeightedSequence {
 public:
  WeightedSequence() = default;
  /// Magnitudes are taken as |x|.
  explicit WeightedSequence(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t m) const { return values_[m]; }

  WeightedSequence scaled(double c) const;
  WeightedSequence prefix(std::size_t n) const;
  /// Multiset union.
  WeightedSequence merged(const WeightedSequence& other) const;

 private:
  std::vector<double> values_;
};

/// mu(s) = #{values > s} (strict).
std::size_t distribution(const WeightedSequence& seq, double s);

/// sup_{s>0} s mu(s)^{1/p} = max_m a_(m) m^{1/p}.
double weak_quasinorm(const WeightedSequence& seq, double p);

struct DpWindowEstimate {
  double p = 0.0;
  double s_lo = 0.0;
  double s_hi = 0.0;
  double sup_est = 0.0;
  double inf_est = 0.0;
  std::size_t samples = 0;
  bool empty = false;  // no jump of n(s) inside the window
};

/// sup/inf of s^p n(s) over s in [s_lo, s_hi], evaluated at the jumps of n(s),
/// where both extremes are attained (sup as a left limit).
DpWindowEstimate dp_window(const WeightedSequence& seq, double p, double s_lo, double s_hi);

/// Window [a_(0.75 r), a_(0.1 r)] in jump-index terms, r = number of nonzero values.
DpWindowEstimate dp_window_default(const WeightedSequence& seq, double p);

struct MembershipVerdicts {
  Verdict weak = Verdict::inconclusive;     // finite weak quasinorm
  Verdict small_o = Verdict::inconclusive;  // a_(m) m^{1/p} -> 0
  std::vector<double> prefix_quasinorms;    // over prefixes of length n/8, n/4, n/2, n
  std::vector<double> block_maxima;         // max of a_(m) m^{1/p} over dyadic blocks of m
};

/// Trend verdicts from nested prefixes (weak class) and dyadic tail blocks
/// (small-o subspace) of the sorted sequence.
MembershipVerdicts membership_verdicts(const WeightedSequence& seq, double p);

const char* to_string(Verdict v);

}  // namespace gapcount
