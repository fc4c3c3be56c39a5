#include "gapcount/angular_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gapcount {

AngularProfile AngularProfile::constant(double c) {
  AngularProfile a;
  a.kind_ = Kind::constant;
  a.value_ = c;
  a.sup_ = a.inf_ = c;
  std::ostringstream os;
  os << "const:" << c;
  a.name_ = os.str();
  return a;
}

AngularProfile AngularProfile::cos2() {
  AngularProfile a;
  a.kind_ = Kind::cos2;
  a.sup_ = 1.0;
  a.inf_ = 0.0;
  a.name_ = "cos2";
  return a;
}

AngularProfile AngularProfile::table(int dim, std::vector<std::vector<double>> directions,
                                     std::vector<double> values) {
  if (directions.empty() || directions.size() != values.size()) {
    throw std::invalid_argument("angular table: need one value per direction and at least one row");
  }
  for (auto& u : directions) {
    if (static_cast<int>(u.size()) != dim) {
      throw std::invalid_argument("angular table: direction has wrong dimension");
    }
    double norm = 0.0;
    for (double x : u) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::invalid_argument("angular table: zero direction");
    for (double& x : u) x /= norm;
  }
  AngularProfile a;
  a.kind_ = Kind::table;
  a.dim_ = dim;
  a.sup_ = *std::max_element(values.begin(), values.end());
  a.inf_ = *std::min_element(values.begin(), values.end());
  a.directions_ = std::make_shared<const std::vector<std::vector<double>>>(std::move(directions));
  a.values_ = std::make_shared<const std::vector<double>>(std::move(values));
  a.name_ = "table";
  return a;
}

AngularProfile AngularProfile::load_table(std::string_view path, int dim) {
  std::ifstream in{std::string(path)};
  if (!in) throw std::invalid_argument("angular table: cannot open '" + std::string(path) + "'");
  std::vector<std::vector<double>> dirs;
  std::vector<double> vals;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream row(line);
    std::vector<double> nums;
    double x;
    while (row >> x) nums.push_back(x);
    if (static_cast<int>(nums.size()) != dim + 1) {
      throw std::invalid_argument("angular table " + std::string(path) + ":" +
                                  std::to_string(lineno) + ": expected " +
                                  std::to_string(dim + 1) + " numbers");
    }
    vals.push_back(nums.back());
    nums.pop_back();
    dirs.push_back(std::move(nums));
  }
  auto a = table(dim, std::move(dirs), std::move(vals));
  a.name_ = "table:" + std::string(path);
  return a;
}

AngularProfile AngularProfile::parse(std::string_view spec, int dim) {
  if (spec == "cos2") return cos2();
  if (spec.starts_with("const:")) {
    const std::string num(spec.substr(6));
    std::size_t used = 0;
    double c = 0.0;
    try {
      c = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != num.size() || num.empty()) {
      throw std::invalid_argument("angular profile: bad constant in '" + std::string(spec) + "'");
    }
    return constant(c);
  }
  if (spec.starts_with("table:")) return load_table(spec.substr(6), dim);
  throw std::invalid_argument("angular profile: unknown preset '" + std::string(spec) +
                              "' (expected const:<c>, cos2 or table:<path>)");
}

double AngularProfile::operator()(std::span<const double> unit_dir) const {
  switch (kind_) {
    case Kind::constant:
      return scale_ * value_;
    case Kind::cos2:
      return unit_dir.empty() ? scale_ : scale_ * unit_dir[0] * unit_dir[0];
    case Kind::table: {
      std::size_t best = 0;
      double best_dot = -2.0;
      for (std::size_t r = 0; r < directions_->size(); ++r) {
        const auto& u = (*directions_)[r];
        double dot = 0.0;
        for (std::size_t i = 0; i < u.size() && i < unit_dir.size(); ++i) dot += u[i] * unit_dir[i];
        if (dot > best_dot) {
          best_dot = dot;
          best = r;
        }
      }
      return scale_ * (*values_)[best];
    }
  }
  return 0.0;
}

AngularProfile AngularProfile::scaled(double c) const {
  AngularProfile a = *this;
  a.scale_ *= c;
  a.sup_ = c >= 0 ? c * sup_ : c * inf_;
  a.inf_ = c >= 0 ? c * inf_ : c * sup_;
  return a;
}

}  // namespace gapcount
