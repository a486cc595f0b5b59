#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "topksum/types.hpp"

namespace topksum::bench {

/// SplitMix64 step: advances the state and returns the next 64-bit output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic uniform [0, 1) vector. Same (n, seed) gives an identical
/// vector on every platform; the stream is keyed by seed only, so shorter
/// vectors are prefixes of longer ones with the same seed.
std::vector<double> gen_instance(std::size_t n, std::uint64_t seed);

struct ExperimentGrid {
  std::vector<std::size_t> n_list{1000, 10000, 100000, 1000000};
  std::vector<double> tau_k_list;  ///< defaults to the standard grid
  std::vector<double> tau_r_list;  ///< defaults to the standard grid
  std::size_t reps = 20;
  std::uint64_t seed = 0x6b2d1e6fULL;
};

/// Full fraction grids used by the experiment protocol.
const std::vector<double>& standard_tau_k();
const std::vector<double>& standard_tau_r();

/// k derived from a fraction: max(1, round(tau_k * n)), clamped to n.
std::size_t derive_k(double tau_k, std::size_t n);

struct BenchRecord {
  std::size_t n = 0;
  std::size_t k = 0;
  double tau_k = 0.0;
  double tau_r = 0.0;
  std::string algo;  ///< "eips", "sorted", "grid", or the "sort" pseudo-row
  std::uint64_t seed = 0;
  std::uint64_t elapsed_ns = 0;
  std::size_t init_iters = 0;
  std::size_t pivot_iters = 0;
  std::size_t exact_iters = 0;
  int flag = 0;
  bool kkt_pass = false;
};

/// CSV header shared by run_suite and the CLI.
std::string csv_header();
std::string csv_row(const BenchRecord& rec);

/// Times every selected algorithm on every grid point. Per (grid point,
/// rep): generate the instance, derive r from the untimed top-k sum, run a
/// discarded warm-up, time the solve with a monotonic clock, and verify the
/// certificate (a failure aborts with the offending seed and grid point).
/// A standalone full-comparison-sort timing row ("sort") is appended per
/// point for the sorting-dominance comparison. Records are streamed to
/// `out` as CSV when non-null.
std::vector<BenchRecord> run_suite(const ExperimentGrid& grid,
                                   const std::vector<std::string>& algorithms,
                                   std::ostream* out);

/// Least-squares slope of log(mean elapsed) against log(n) for the given
/// records (already filtered to one algorithm and tau pair). Requires at
/// least three distinct n values.
double estimate_slope(const std::vector<BenchRecord>& records,
                      std::size_t n_min = 0);

/// Mean flag per (tau_k, tau_r) cell; cells without records are absent.
std::map<std::pair<double, double>, double> flag_stats(
    const std::vector<BenchRecord>& records);

/// Heatmap-ready CSV of flag_stats: rows tau_k, columns tau_r, empty cells
/// for missing combinations.
void write_flag_stats_csv(const std::vector<BenchRecord>& records,
                          std::ostream& out);

}  // namespace topksum::bench
