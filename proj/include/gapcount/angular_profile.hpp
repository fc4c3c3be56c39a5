#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gapcount {

/// A nonnegative-or-not angular profile on the unit sphere S^{d-1}.
///
/// Presets:
///   const:<c>     constant value c
///   cos2          squared cosine of the angle to the first axis
///   table:<path>  rows "u_1 ... u_d value"; evaluation picks the nearest
///                 tabulated direction (largest dot product)
class AngularProfile {
 public:
  static AngularProfile constant(double c);
  static AngularProfile cos2();
  static AngularProfile table(int dim, std::vector<std::vector<double>> directions,
                              std::vector<double> values);
  static AngularProfile load_table(std::string_view path, int dim);
  static AngularProfile parse(std::string_view spec, int dim);

  /// `unit_dir` must already be normalized.
  double operator()(std::span<const double> unit_dir) const;

  double sup() const { return sup_; }
  double inf() const { return inf_; }
  const std::string& name() const { return name_; }

  /// Pointwise multiple c * theta.
  AngularProfile scaled(double c) const;

 private:
  enum class Kind { constant, cos2, table };

  Kind kind_ = Kind::constant;
  double scale_ = 1.0;
  double value_ = 0.0;
  int dim_ = 0;
  std::shared_ptr<const std::vector<std::vector<double>>> directions_;
  std::shared_ptr<const std::vector<double>> values_;
  double sup_ = 0.0;
  double inf_ = 0.0;
  std::string name_;
};

}  // namespace gapcount
