#include "mta/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

#include "mta/errors.hpp"
#include "mta/model.hpp"

namespace mta {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(const std::vector<double>& x, double mean) {
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

double normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

// Each chain split into first and second half; the middle draw of an odd-length
// chain is dropped.
std::vector<std::vector<double>> split_chains(const PosteriorDraws& draws, std::size_t param) {
  const std::size_t half = draws.n_samples / 2;
  std::vector<std::vector<double>> out;
  for (std::size_t c = 0; c < draws.n_chains; ++c) {
    std::vector<double> first;
    std::vector<double> second;
    for (std::size_t i = 0; i < half; ++i) {
      first.push_back(draws.value(c, i, param));
      second.push_back(draws.value(c, draws.n_samples - half + i, param));
    }
    out.push_back(std::move(first));
    out.push_back(std::move(second));
  }
  return out;
}

std::vector<std::vector<double>> transform(const std::vector<std::vector<double>>& chains,
                                           auto&& fn) {
  auto out = chains;
  for (auto& chain : out) {
    for (double& v : chain) v = fn(v);
  }
  return out;
}

std::vector<double> pooled(const std::vector<std::vector<double>>& chains) {
  std::vector<double> out;
  for (const auto& chain : chains) out.insert(out.end(), chain.begin(), chain.end());
  return out;
}

double pooled_quantile(const std::vector<std::vector<double>>& chains, double prob) {
  std::vector<double> all = pooled(chains);
  std::sort(all.begin(), all.end());
  return quantile_sorted(all, prob);
}

}  // namespace

double Diagnostics::max_rhat() const {
  double worst = 1.0;
  for (std::size_t i = 0; i < rhat.size(); ++i) {
    if (!degenerate[i] && rhat[i] > worst) worst = rhat[i];
  }
  return worst;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw Unsupported("R-hat needs at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 2) throw Unsupported("R-hat needs at least two draws per chain");
  std::vector<double> means(m);
  double within = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = mean_of(chains[j]);
    within += variance_of(chains[j], means[j]);
  }
  within /= static_cast<double>(m);
  const double between_over_n = variance_of(means, mean_of(means));
  if (within <= 0.0) {
    return between_over_n > 0.0 ? std::numeric_limits<double>::infinity() : kNaN;
  }
  const double nd = static_cast<double>(n);
  const double var_plus = (nd - 1.0) / nd * within + between_over_n;
  return std::sqrt(var_plus / within);
}

std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& chains) {
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t j = 0, k = 0; j < chains.size(); ++j) {
    for (double v : chains[j]) order.emplace_back(v, k++);
  }
  std::sort(order.begin(), order.end());
  const double total = static_cast<double>(order.size());
  std::vector<double> ranks(order.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && order[j + 1].first == order[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k].second] = avg_rank;
    i = j + 1;
  }
  auto out = chains;
  std::size_t k = 0;
  for (auto& chain : out) {
    for (double& v : chain) v = normal_quantile((ranks[k++] - 0.375) / (total + 0.25));
  }
  return out;
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  const double total = static_cast<double>(m * n);
  if (n < 4) return kNaN;

  std::vector<double> means(m);
  for (std::size_t j = 0; j < m; ++j) means[j] = mean_of(chains[j]);

  // Mean over chains of the biased autocovariance at `lag`.
  auto mean_autocov = [&](std::size_t lag) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& x = chains[j];
      double acc = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) acc += (x[i] - means[j]) * (x[i + lag] - means[j]);
      sum += acc / static_cast<double>(n);
    }
    return sum / static_cast<double>(m);
  };

  const double nd = static_cast<double>(n);
  const double acov0 = mean_autocov(0);
  const double mean_var = acov0 * nd / (nd - 1.0);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) var_plus += variance_of(means, mean_of(means));
  if (!(var_plus > 0.0)) return kNaN;

  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_autocov(1)) / var_plus;
  rho[1] = rho_odd;
  std::size_t t = 1;
  while (t + 3 < n && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_autocov(t + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_autocov(t + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t + 1] = rho_even;
      rho[t + 2] = rho_odd;
    }
    t += 2;
  }
  const std::size_t max_t = t >= 3 ? t - 2 : 1;
  if (rho_even > 0.0 && max_t + 1 < n) rho[max_t + 1] = rho_even;

  // Initial monotone sequence.
  for (std::size_t k = 1; k + 2 <= max_t; k += 2) {
    if (rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k]) {
      rho[k + 1] = 0.5 * (rho[k - 1] + rho[k]);
      rho[k + 2] = rho[k + 1];
    }
  }
  double tau = -1.0;
  for (std::size_t k = 0; k <= max_t; ++k) tau += 2.0 * rho[k];
  if (max_t + 1 < n) tau += rho[max_t + 1];
  tau = std::max(tau, 1.0 / std::log10(total));
  return std::min(total / tau, total);
}

Diagnostics diagnostics(const PosteriorDraws& draws) {
  if (draws.n_chains < 2) throw Unsupported("diagnostics need at least two chains");
  if (draws.n_samples < 4) throw Unsupported("diagnostics need at least four draws per chain");

  Diagnostics out;
  out.names = draws.names;
  for (std::size_t p = 0; p < draws.n_params(); ++p) {
    const auto chains = split_chains(draws, p);
    const std::vector<double> all = draws.column(p);
    const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
    if (*lo == *hi) {
      out.rhat.push_back(kNaN);
      out.ess_bulk.push_back(kNaN);
      out.ess_tail.push_back(kNaN);
      out.degenerate.push_back(true);
      continue;
    }
    out.degenerate.push_back(false);

    const auto z = rank_normalize(chains);
    const double median = pooled_quantile(chains, 0.5);
    const auto folded = rank_normalize(transform(chains, [&](double v) { return std::abs(v - median); }));
    const double rhat_bulk = split_rhat(z);
    const double rhat_tail = split_rhat(folded);
    out.rhat.push_back(std::isnan(rhat_tail) ? rhat_bulk : std::max(rhat_bulk, rhat_tail));

    out.ess_bulk.push_back(effective_sample_size(z));
    const double q05 = pooled_quantile(chains, 0.05);
    const double q95 = pooled_quantile(chains, 0.95);
    const double ess_lo = effective_sample_size(transform(chains, [&](double v) { return v <= q05 ? 1.0 : 0.0; }));
    const double ess_hi = effective_sample_size(transform(chains, [&](double v) { return v >= q95 ? 1.0 : 0.0; }));
    out.ess_tail.push_back(std::fmin(ess_lo, ess_hi));
  }
  return out;
}

ParameterSummary summarize_values(const std::string& name, std::span<const double> values) {
  if (values.empty()) throw InvalidInput("cannot summarize '" + name + "': no draws");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  ParameterSummary s;
  s.name = name;
  if (sorted.front() == sorted.back()) {
    s.mean = sorted.front();
    s.sd = 0.0;
  } else {
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    s.sd = sorted.size() > 1 ? std::sqrt(variance_of(sorted, s.mean)) : 0.0;
  }
  s.q025 = quantile_sorted(sorted, 0.025);
  s.q25 = quantile_sorted(sorted, 0.25);
  s.q50 = quantile_sorted(sorted, 0.5);
  s.q75 = quantile_sorted(sorted, 0.75);
  s.q975 = quantile_sorted(sorted, 0.975);
  s.width95 = s.q975 - s.q025;

  if (name.rfind("lambda[", 0) == 0) {
    std::vector<double> life;
    life.reserve(sorted.size());
    for (double lam : sorted) life.push_back(mta::half_life(lam));
    std::sort(life.begin(), life.end());
    HalfLifeSummary h;
    h.mean = std::accumulate(life.begin(), life.end(), 0.0) / static_cast<double>(life.size());
    if (life.front() == life.back()) h.mean = life.front();
    h.median = quantile_sorted(life, 0.5);
    h.q025 = quantile_sorted(life, 0.025);
    h.q975 = quantile_sorted(life, 0.975);
    s.half_life = h;
  }
  return s;
}

std::vector<ParameterSummary> summarize(const PosteriorDraws& draws) {
  if (draws.total_draws() == 0) throw InvalidInput("cannot summarize empty draws");
  std::vector<ParameterSummary> out;
  out.reserve(draws.n_params());
  for (std::size_t p = 0; p < draws.n_params(); ++p) {
    out.push_back(summarize_values(draws.names[p], draws.column(p)));
  }
  return out;
}

}  // namespace mta
