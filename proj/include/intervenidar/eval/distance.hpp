#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace intervenidar::eval {

using Vector = std::vector<double>;

// Euclidean distance from every evaluation vector to its nearest training
// vector. Throws Error when the training set is empty or dimensions differ.
std::vector<double> nearest_distances(const std::vector<Vector>& evaluation, const std::vector<Vector>& training);

// Linear interpolation between order statistics (the "type 7" rule):
// h = (n - 1) q, result = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile(std::vector<double> values, double q);

struct DensityCurve {
  double bandwidth = 0.0;
  std::vector<double> x;
  std::vector<double> density;
};

// Gaussian kernel density estimate on `points` evenly spaced abscissae
// spanning [min - 3h, max + 3h]. Bandwidth by Silverman's rule of thumb,
// h = 0.9 min(sd, IQR / 1.34) n^(-1/5); when that is 0 (all values equal)
// h falls back to 1e-3 * max(1, |mean|).
DensityCurve gaussian_kde(const std::vector<double>& values, int points = 128);
double silverman_bandwidth(const std::vector<double>& values);

inline constexpr double kReportQuantiles[] = {0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0};

struct ConditionDistances {
  std::vector<double> distances;  // in evaluation-set order
  std::vector<double> quantiles;  // at kReportQuantiles
  double mean = 0.0;
  DensityCurve density;
};

using DistanceReport = std::map<std::string, ConditionDistances>;

DistanceReport embedding_distance_report(const std::map<std::string, std::vector<Vector>>& evaluation,
                                         const std::vector<Vector>& training);

// quantile table (condition, q, value) and density curves as CSV.
std::string quantiles_csv(const DistanceReport& report);
std::string density_csv(const DistanceReport& report);

}  // namespace intervenidar::eval
