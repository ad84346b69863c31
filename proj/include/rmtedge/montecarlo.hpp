#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <json.hpp>

#include "rmtedge/potential.hpp"

namespace rmtedge {

struct SamplerOptions {
  int chains = 4;
  int burn_in = 5000;            // sweeps, proposal tuned during these
  int thinning = 0;              // sweeps per retained sample, 0 means N
  double target_acceptance = 0.23;
};

/// Retained states of independent Metropolis chains for the density
/// prod_{j<k} |x_j - x_k|^beta prod_j w_beta(x_j). Samples are stored chain
/// by chain; chain c owns chain_lengths[c] consecutive entries.
struct EigenSample {
  Beta beta = Beta::unitary;
  int N = 0;
  Potential potential = Potential::hermite();
  std::vector<std::vector<double>> samples;  // each sorted ascending
  std::vector<int> chain_lengths;
  std::vector<double> proposal_sd;        // frozen value per chain
  std::vector<double> chain_acceptance;   // after burn-in, per chain
  std::uint64_t seed = 0;
  double acceptance_rate = 0.0;
  int burn_in = 0, thinning = 0;
  bool flagged = false;  // acceptance outside (0.05, 0.8)

  std::vector<double> largest() const;
};

/// splitmix64 finalizer; chain c is seeded with splitmix64(seed + c).
std::uint64_t splitmix64(std::uint64_t x);

/// count retained samples of N points, split as evenly as possible over
/// the chains. Chains run on separate threads; the output depends only on
/// the seed and options.
EigenSample sample(const Potential& p, Beta beta, int N, int count, std::uint64_t seed,
                   const SamplerOptions& opt = {});

/// Fraction of samples with lambda_1 <= s, for each s.
std::vector<double> largest_cdf(const EigenSample& e, const std::vector<double>& s_values);

/// max over samples x of |F_emp(x) - model(x)| with the right-continuous
/// empirical CDF. Throws for fewer than 100 samples.
double ks_distance(const EigenSample& e, const std::function<double(double)>& model_cdf);
double ks_distance(std::vector<double> values, const std::function<double(double)>& model_cdf);

/// Split-chain potential scale reduction of lambda_1 over the chains.
double split_rhat(const EigenSample& e);

/// Sum over chains of n / (1 + 2 sum rho_k), autocorrelations of lambda_1
/// truncated at the first negative pair sum.
double effective_sample_size(const EigenSample& e);

/// CSV with columns chain,x1..xN, one row per retained sample.
void write_samples_csv(const std::filesystem::path& path, const EigenSample& e);

/// Seed, generator, tuning and diagnostics.
nlohmann::json manifest(const EigenSample& e);

}  // namespace rmtedge
