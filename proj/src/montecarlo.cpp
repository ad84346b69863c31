#include "rmtedge/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "rmtedge/equilibrium.hpp"
#include "rmtedge/io.hpp"

namespace rmtedge {

namespace {

constexpr int kTuneBatch = 50;  // sweeps between proposal adjustments
constexpr double kCollision = 1e-12;

struct ChainResult {
  std::vector<std::vector<double>> samples;
  double sd = 0.0;
  double acceptance = 0.0;
};

class Chain {
 public:
  Chain(const Potential& p, Beta beta, std::vector<double> x, double sd, std::uint64_t seed)
      : p_(p), beta_(to_int(beta)), wscale_(beta == Beta::orthogonal ? 0.5 : 1.0), x_(std::move(x)),
        sd_(sd), rng_(seed) {}

  // One sweep of single-coordinate updates; returns the number accepted.
  int sweep() {
    int accepted = 0;
    const int n = static_cast<int>(x_.size());
    for (int j = 0; j < n; ++j) accepted += update(j);
    return accepted;
  }

  double& sd() { return sd_; }
  const std::vector<double>& state() const { return x_; }

 private:
  bool update(int j) {
    const double xo = x_[j];
    const double xn = xo + sd_ * normal_(rng_);
    double log_ratio = 0.0, prod = 1.0;
    int pending = 0;
    for (std::size_t k = 0; k < x_.size(); ++k) {
      if (static_cast<int>(k) == j) continue;
      const double num = xn - x_[k];
      if (std::abs(num) < kCollision) return false;
      prod *= num / (xo - x_[k]);
      if (++pending == 16) {
        log_ratio += std::log(std::abs(prod));
        prod = 1.0;
        pending = 0;
      }
    }
    log_ratio += std::log(std::abs(prod));
    const double delta = beta_ * log_ratio - wscale_ * (p_(xn) - p_(xo));
    if (delta >= 0.0 || std::log(uniform_(rng_)) < delta) {
      x_[j] = xn;
      return true;
    }
    return false;
  }

  const Potential& p_;
  double beta_, wscale_;
  std::vector<double> x_;
  double sd_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

// Points at the arcsine quantiles of the equilibrium support, which is where
// the density concentrates for large N.
std::vector<double> initial_state(const Potential& p, Beta beta, int N, double& spacing) {
  const int n_eff = beta == Beta::symplectic ? 2 * N : N;
  const MrsNumbers mrs = mrs_numbers(p, std::max(1, n_eff));
  std::vector<double> x(N);
  for (int j = 0; j < N; ++j)
    x[j] = mrs.d + mrs.c * std::cos(std::numbers::pi * (N - j - 0.5) / N);
  spacing = 2.0 * mrs.c / N;
  return x;
}

ChainResult run_chain(const Potential& p, Beta beta, int N, int count, std::uint64_t seed,
                      const SamplerOptions& opt, int thinning) {
  double spacing = 0.0;
  std::vector<double> x0 = initial_state(p, beta, N, spacing);
  Chain chain(p, beta, std::move(x0), spacing, seed);
  long acc = 0;
  for (int s = 1; s <= opt.burn_in; ++s) {
    acc += chain.sweep();
    if (s % kTuneBatch == 0) {
      const double rate = static_cast<double>(acc) / (static_cast<double>(kTuneBatch) * N);
      chain.sd() *= std::exp(1.5 * (rate - opt.target_acceptance));
      acc = 0;
    }
  }
  ChainResult r;
  r.sd = chain.sd();
  long accepted = 0;
  r.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    for (int s = 0; s < thinning; ++s) accepted += chain.sweep();
    std::vector<double> v = chain.state();
    std::sort(v.begin(), v.end());
    r.samples.push_back(std::move(v));
  }
  const double proposals = static_cast<double>(count) * thinning * N;
  r.acceptance = proposals > 0 ? accepted / proposals : 0.0;
  return r;
}

std::vector<std::vector<double>> chain_series(const EigenSample& e) {
  std::vector<std::vector<double>> out;
  std::size_t pos = 0;
  for (int len : e.chain_lengths) {
    std::vector<double> s;
    for (int i = 0; i < len; ++i) s.push_back(e.samples[pos + i].back());
    pos += len;
    out.push_back(std::move(s));
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> EigenSample::largest() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.back());
  return out;
}

EigenSample sample(const Potential& p, Beta beta, int N, int count, std::uint64_t seed,
                   const SamplerOptions& opt) {
  if (N < 1) throw std::invalid_argument("N must be positive");
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  if (opt.chains < 1) throw std::invalid_argument("need at least one chain");
  EigenSample e;
  e.beta = beta;
  e.N = N;
  e.potential = p;
  e.seed = seed;
  e.burn_in = opt.burn_in;
  e.thinning = opt.thinning > 0 ? opt.thinning : N;
  const int chains = std::min(opt.chains, count);
  std::vector<int> lengths(chains, count / chains);
  for (int c = 0; c < count % chains; ++c) ++lengths[c];

  std::vector<ChainResult> results(chains);
  {
    std::vector<std::jthread> workers;
    for (int c = 0; c < chains; ++c)
      workers.emplace_back([&, c] {
        results[c] = run_chain(p, beta, N, lengths[c], splitmix64(seed + c), opt, e.thinning);
      });
  }
  double acc = 0.0;
  for (int c = 0; c < chains; ++c) {
    e.chain_lengths.push_back(lengths[c]);
    e.proposal_sd.push_back(results[c].sd);
    e.chain_acceptance.push_back(results[c].acceptance);
    acc += results[c].acceptance * lengths[c];
    for (auto& s : results[c].samples) e.samples.push_back(std::move(s));
  }
  e.acceptance_rate = acc / count;
  e.flagged = !(e.acceptance_rate > 0.05 && e.acceptance_rate < 0.8);
  return e;
}

std::vector<double> largest_cdf(const EigenSample& e, const std::vector<double>& s_values) {
  if (e.samples.empty()) throw std::invalid_argument("empty sample set");
  std::vector<double> top = e.largest();
  std::sort(top.begin(), top.end());
  std::vector<double> out;
  for (double s : s_values) {
    const auto it = std::upper_bound(top.begin(), top.end(), s);
    out.push_back(static_cast<double>(it - top.begin()) / top.size());
  }
  return out;
}

double ks_distance(std::vector<double> values, const std::function<double(double)>& model_cdf) {
  if (values.size() < 100) throw std::invalid_argument("KS distance needs at least 100 samples");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    // Ties share the value of the last equal element.
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    d = std::max(d, std::abs((i + 1) / n - model_cdf(values[i])));
  }
  return d;
}

double ks_distance(const EigenSample& e, const std::function<double(double)>& model_cdf) {
  return ks_distance(e.largest(), model_cdf);
}

double split_rhat(const EigenSample& e) {
  std::vector<std::vector<double>> halves;
  for (const auto& s : chain_series(e)) {
    const std::size_t h = s.size() / 2;
    if (h < 2) throw std::invalid_argument("chains too short for split R-hat");
    halves.emplace_back(s.begin(), s.begin() + h);
    halves.emplace_back(s.end() - h, s.end());
  }
  const double n = static_cast<double>(halves.front().size());
  std::vector<double> means;
  double w = 0.0;
  for (const auto& h : halves) {
    const double m = mean(h);
    means.push_back(m);
    double v = 0.0;
    for (double x : h) v += (x - m) * (x - m);
    w += v / (n - 1.0);
  }
  w /= halves.size();
  const double grand = mean(means);
  double b = 0.0;
  for (double m : means) b += (m - grand) * (m - grand);
  b = b * n / (halves.size() - 1.0);
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const EigenSample& e) {
  double ess = 0.0;
  for (const auto& s : chain_series(e)) {
    const int n = static_cast<int>(s.size());
    if (n < 4) {
      ess += n;
      continue;
    }
    const double m = mean(s);
    double c0 = 0.0;
    for (double x : s) c0 += (x - m) * (x - m);
    c0 /= n;
    if (c0 == 0.0) {
      ess += n;
      continue;
    }
    auto rho = [&](int k) {
      double c = 0.0;
      for (int i = 0; i + k < n; ++i) c += (s[i] - m) * (s[i + k] - m);
      return c / n / c0;
    };
    double sum = 0.0;
    for (int k = 1; k + 1 < n; k += 2) {
      const double pair = rho(k) + rho(k + 1);
      if (pair < 0.0) break;
      sum += pair;
    }
    ess += n / (1.0 + 2.0 * sum);
  }
  return ess;
}

void write_samples_csv(const std::filesystem::path& path, const EigenSample& e) {
  std::vector<std::string> header{"chain"};
  for (int j = 1; j <= e.N; ++j) header.push_back("x" + std::to_string(j));
  CsvWriter csv(path, header);
  std::size_t pos = 0;
  for (std::size_t c = 0; c < e.chain_lengths.size(); ++c) {
    for (int i = 0; i < e.chain_lengths[c]; ++i) {
      std::vector<std::string> row{std::to_string(c)};
      for (double x : e.samples[pos + i]) row.push_back(format_double(x));
      csv.row(row);
    }
    pos += e.chain_lengths[c];
  }
}

nlohmann::json manifest(const EigenSample& e) {
  nlohmann::json chains = nlohmann::json::array();
  for (std::size_t c = 0; c < e.chain_lengths.size(); ++c)
    chains.push_back({{"index", c},
                      {"seed", splitmix64(e.seed + c)},
                      {"retained", e.chain_lengths[c]},
                      {"proposal_sd", e.proposal_sd[c]},
                      {"acceptance", e.chain_acceptance[c]}});
  nlohmann::json j = {{"beta", to_int(e.beta)},
                      {"N", e.N},
                      {"potential", to_json(e.potential)},
                      {"seed", e.seed},
                      {"generator", "std::mt19937_64, chain c seeded with splitmix64(seed + c)"},
                      {"burn_in_sweeps", e.burn_in},
                      {"thinning_sweeps", e.thinning},
                      {"samples", e.samples.size()},
                      {"acceptance_rate", e.acceptance_rate},
                      {"flagged", e.flagged},
                      {"chains", chains}};
  if (e.chain_lengths.size() > 1 && e.chain_lengths.back() >= 4) j["split_rhat"] = split_rhat(e);
  j["effective_sample_size"] = effective_sample_size(e);
  return j;
}

}  // namespace rmtedge
