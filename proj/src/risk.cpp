#include "invopt/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace invopt {

void RiskSpec::validate() const {
  switch (kind) {
    case Kind::CVaR:
      if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("CVaR level must lie in (0, 1]");
      break;
    case Kind::VaR:
      if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("VaR level must lie in [0, 1]");
      break;
    case Kind::Expectation:
      break;
  }
}

std::string RiskSpec::name() const {
  switch (kind) {
    case Kind::CVaR:
      return "cvar";
    case Kind::VaR:
      return "var";
    case Kind::Expectation:
      return "expectation";
  }
  return "expectation";
}

double empirical_risk(const std::vector<double>& losses, const RiskSpec& spec) {
  spec.validate();
  if (losses.empty()) throw std::invalid_argument("empty loss sample");
  const int N = static_cast<int>(losses.size());
  switch (spec.kind) {
    case RiskSpec::Kind::Expectation:
      return std::accumulate(losses.begin(), losses.end(), 0.0) / N;
    case RiskSpec::Kind::CVaR: {
      std::vector<double> sorted(losses);
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      const double k = spec.alpha * N;  // tail mass in sample units
      const int whole = static_cast<int>(std::floor(k));
      double acc = 0.0;
      for (int i = 0; i < whole; ++i) acc += sorted[i];
      if (whole < N) acc += (k - whole) * sorted[whole];
      return acc / k;
    }
    case RiskSpec::Kind::VaR: {
      std::vector<double> sorted(losses);
      std::sort(sorted.begin(), sorted.end());
      // smallest tau with #{l_i <= tau}/N >= 1 - alpha
      const double need = (1.0 - spec.alpha) * N;
      const int j = static_cast<int>(std::ceil(need - 1e-12));
      if (j <= 0) return sorted.front();
      return sorted[j - 1];
    }
  }
  return 0.0;
}

double weighted_cvar(const std::vector<double>& values,
                     const std::vector<double>& weights, double alpha) {
  if (values.size() != weights.size() || values.empty())
    throw std::invalid_argument("weighted_cvar: bad inputs");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("CVaR level must lie in (0, 1]");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  double remaining = alpha, acc = 0.0;
  for (const auto i : idx) {
    const double take = std::min(remaining, weights[i]);
    acc += take * values[i];
    remaining -= take;
    if (remaining <= 1e-15) break;
  }
  return acc / alpha;
}

void RadiusBudget::validate() const {
  if (!(c1 > 0 && c2 > 0)) throw std::invalid_argument("c1, c2 must be positive");
  if (!(beta > 0 && beta < 1)) throw std::invalid_argument("beta must lie in (0,1)");
  if (p < 1) throw std::invalid_argument("Wasserstein order must be >= 1");
  if (m + n == 2 * p)
    throw std::invalid_argument("radius formula excludes m + n = 2p");
  if (eps0 < 0) throw std::invalid_argument("eps0 must be nonnegative");
}

double eps_n_radius(const RadiusBudget& budget, int N) {
  budget.validate();
  if (N < 1) throw std::invalid_argument("N must be positive");
  const double num = std::log(budget.c1 / budget.beta);
  const double threshold = num / budget.c2;
  const double ratio = num / (budget.c2 * N);
  double eps_n;
  if (static_cast<double>(N) >= threshold) {
    const double expo =
        std::min(static_cast<double>(budget.p) / (budget.m + budget.n), 0.5);
    eps_n = std::pow(ratio, expo);
  } else {
    eps_n = ratio;
  }
  return budget.eps0 + eps_n;
}

}  // namespace invopt
