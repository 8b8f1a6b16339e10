#include "intervenidar/eval/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "intervenidar/eval/metrics.hpp"
#include "intervenidar/mdp/error.hpp"

namespace intervenidar::eval {

std::vector<double> nearest_distances(const std::vector<Vector>& evaluation, const std::vector<Vector>& training) {
  if (training.empty()) throw Error("distance: training set is empty");
  const std::size_t dim = training.front().size();
  for (const auto& t : training)
    if (t.size() != dim) throw Error("distance: training vectors have differing dimensions");
  for (const auto& e : evaluation)
    if (e.size() != dim) {
      throw Error("distance: evaluation vector has dimension " + std::to_string(e.size()) + ", training has " +
                  std::to_string(dim));
    }

  std::vector<double> out;
  out.reserve(evaluation.size());
  for (const auto& e : evaluation) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : training) {
      double sum = 0.0;
      // Partial sums only grow, so a candidate can be dropped early.
      for (std::size_t i = 0; i < dim && sum < best; ++i) {
        const double d = e[i] - t[i];
        sum += d * d;
      }
      if (sum < best) best = sum;
    }
    out.push_back(std::sqrt(best));
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of an empty set");
  if (q < 0.0 || q > 1.0) throw Error("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double silverman_bandwidth(const std::vector<double>& values) {
  if (values.empty()) throw Error("bandwidth of an empty set");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double iqr = quantile(values, 0.75) - quantile(values, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  const double h = 0.9 * spread * std::pow(n, -0.2);
  return h > 0.0 ? h : 1e-3 * std::max(1.0, std::abs(mean));
}

DensityCurve gaussian_kde(const std::vector<double>& values, int points) {
  if (points < 2) throw Error("density curve needs at least two points");
  DensityCurve c;
  c.bandwidth = silverman_bandwidth(values);
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn - 3.0 * c.bandwidth;
  const double hi = *mx + 3.0 * c.bandwidth;
  const double norm = 1.0 / (static_cast<double>(values.size()) * c.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    double sum = 0.0;
    for (double v : values) {
      const double z = (x - v) / c.bandwidth;
      sum += std::exp(-0.5 * z * z);
    }
    c.x.push_back(x);
    c.density.push_back(sum * norm);
  }
  return c;
}

DistanceReport embedding_distance_report(const std::map<std::string, std::vector<Vector>>& evaluation,
                                         const std::vector<Vector>& training) {
  DistanceReport report;
  for (const auto& [condition, vectors] : evaluation) {
    if (vectors.empty()) continue;
    ConditionDistances cd;
    cd.distances = nearest_distances(vectors, training);
    for (double q : kReportQuantiles) cd.quantiles.push_back(quantile(cd.distances, q));
    double s = 0.0;
    for (double d : cd.distances) s += d;
    cd.mean = s / static_cast<double>(cd.distances.size());
    cd.density = gaussian_kde(cd.distances);
    report.emplace(condition, std::move(cd));
  }
  return report;
}

std::string quantiles_csv(const DistanceReport& report) {
  std::string out = "condition,count,mean,bandwidth";
  for (double q : kReportQuantiles) out += ",q" + format_real(q);
  out += '\n';
  for (const auto& [condition, cd] : report) {
    out += condition + ',' + std::to_string(cd.distances.size()) + ',' + format_real(cd.mean) + ',' +
           format_real(cd.density.bandwidth);
    for (double v : cd.quantiles) out += ',' + format_real(v);
    out += '\n';
  }
  return out;
}

std::string density_csv(const DistanceReport& report) {
  std::string out = "condition,x,density\n";
  for (const auto& [condition, cd] : report)
    for (std::size_t i = 0; i < cd.density.x.size(); ++i)
      out += condition + ',' + format_real(cd.density.x[i]) + ',' + format_real(cd.density.density[i]) + '\n';
  return out;
}

}  // namespace intervenidar::eval
