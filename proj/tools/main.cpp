#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "topksum/baselines.hpp"
#include "topksum/bench.hpp"
#include "topksum/core.hpp"
#include "topksum/eips.hpp"
#include "topksum/io.hpp"
#include "topksum/selection.hpp"

namespace {

using namespace topksum;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitVerify = 3;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("TKS_SEED")) {
    return std::strtoull(env, nullptr, 0);
  }
  return 0x6b2d1e6fULL;
}

struct ProjectArgs {
  std::string input;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::optional<std::size_t> k;
  std::optional<double> tau_k;
  std::optional<double> r;
  std::optional<double> tau_r;
  double eps = 1e-8;
  std::string algo = "eips";
  bool verify = false;
  std::string out;
  bool binary = false;
};

ProjectionSolution dispatch(const std::string& algo,
                            const ProblemInstance& inst, double eps) {
  if (algo == "eips") return eips::project(inst, eps);
  if (algo == "grid") return baselines::grid_oracle(inst);
  if (algo == "sorted") return baselines::sorted_solver(inst);
  throw std::invalid_argument("unknown --algo '" + algo + "'");
}

int run_project(const ProjectArgs& args) {
  ProblemInstance inst;
  if (!args.input.empty()) {
    inst.a = io::read_vector(args.input);
  } else if (args.n > 0) {
    inst.a = bench::gen_instance(args.n,
                                 args.seed_set ? args.seed : default_seed());
  } else {
    std::cerr << "project: need --input or --n\n";
    return kExitUsage;
  }
  const std::size_t n = inst.a.size();
  if (n == 0) {
    std::cerr << "project: empty input vector\n";
    return kExitUsage;
  }
  if (args.k) {
    inst.k = *args.k;
  } else if (args.tau_k) {
    inst.k = bench::derive_k(*args.tau_k, n);
  } else {
    std::cerr << "project: need --k or --tau-k\n";
    return kExitUsage;
  }
  if (inst.k < 1 || inst.k > n) {
    std::cerr << "project: k out of range [1, n]\n";
    return kExitUsage;
  }
  if (args.r) {
    inst.r = *args.r;
  } else if (args.tau_r) {
    inst.r = *args.tau_r * topk_sum(inst.a, inst.k);
  } else {
    std::cerr << "project: need --r or --tau-r\n";
    return kExitUsage;
  }
  inst.validate();

  auto t0 = std::chrono::steady_clock::now();
  ProjectionSolution sol = dispatch(args.algo, inst, args.eps);
  auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();

  std::printf("u_star=%.17g\n", sol.u_star);
  std::printf("l_star=%.17g\n", sol.l_star);
  std::printf("lambda=%.17g\n", sol.lambda());
  std::printf("flag=%d\n", flag_value(sol.flag));
  std::printf("init_iters=%zu\n", sol.stats.init_iters);
  std::printf("pivot_iters=%zu\n", sol.stats.pivot_iters);
  std::printf("exact_iters=%zu\n", sol.stats.exact_iters);
  std::printf("gsearch_passes=%zu\n", sol.stats.gsearch_passes);
  std::printf("elapsed_ns=%lld\n", static_cast<long long>(ns));

  if (!args.out.empty()) {
    if (args.binary) {
      io::write_vector_binary(args.out, sol.x);
    } else {
      io::write_vector_text(args.out, sol.x);
    }
  }

  if (args.verify) {
    KktCertificate cert = verify_kkt(inst, sol, default_cert_tol(inst,
                                                                 args.eps));
    std::printf("kkt_pass=%d\n", cert.passed() ? 1 : 0);
    std::printf("kkt_residual_area=%.3e\n", cert.residual_area);
    std::printf("kkt_residual_budget=%.3e\n", cert.residual_budget);
    bool ok = cert.passed();
    if (n <= 10000 && args.algo != "grid") {
      ProjectionSolution ref = baselines::grid_oracle(inst);
      double diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        diff = std::max(diff, std::abs(ref.x[i] - sol.x[i]));
      }
      std::printf("oracle_max_diff=%.3e\n", diff);
      double scale = 1.0;
      for (double v : inst.a) scale = std::max(scale, std::abs(v));
      ok = ok && diff <= 1e-7 * scale;
    }
    if (!ok) return kExitVerify;
  }
  return kExitOk;
}

struct BenchArgs {
  std::vector<std::size_t> n_list;
  std::vector<double> tau_k_list;
  std::vector<double> tau_r_list;
  std::size_t reps = 20;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::string> algos{"eips", "sorted"};
  std::string out;
  std::string flag_stats_out;
};

int run_bench(const BenchArgs& args) {
  bench::ExperimentGrid grid;
  if (!args.n_list.empty()) grid.n_list = args.n_list;
  grid.tau_k_list = args.tau_k_list;
  grid.tau_r_list = args.tau_r_list;
  grid.reps = args.reps;
  grid.seed = args.seed_set ? args.seed : default_seed();

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!args.out.empty()) {
    file.open(args.out);
    if (!file) {
      std::cerr << "bench: cannot open " << args.out << "\n";
      return kExitUsage;
    }
    out = &file;
  }
  auto records = bench::run_suite(grid, args.algos, out);

  if (!args.flag_stats_out.empty()) {
    std::vector<bench::BenchRecord> eips_only;
    for (const auto& r : records) {
      if (r.algo == "eips") eips_only.push_back(r);
    }
    std::ofstream fs(args.flag_stats_out);
    if (!fs) {
      std::cerr << "bench: cannot open " << args.flag_stats_out << "\n";
      return kExitUsage;
    }
    bench::write_flag_stats_csv(eips_only, fs);
  }
  return kExitOk;
}

struct VerifyArgs {
  std::size_t count = 200;
  std::size_t n_max = 400;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double eps = 1e-8;
  unsigned parallel = 1;
};

int run_verify(const VerifyArgs& args) {
  std::uint64_t seq = args.seed_set ? args.seed : default_seed();
  const auto& tks = bench::standard_tau_k();
  const auto& trs = bench::standard_tau_r();

  struct Case {
    ProblemInstance inst;
    std::uint64_t seed;
    double tau_k, tau_r;
  };
  std::vector<Case> cases;
  cases.reserve(args.count);
  for (std::size_t i = 0; i < args.count; ++i) {
    std::uint64_t s = bench::splitmix64(seq);
    std::size_t n = 5 + static_cast<std::size_t>(s % (args.n_max - 4));
    double tk = tks[(i / trs.size()) % tks.size()];
    double tr = trs[i % trs.size()];
    Case c;
    c.seed = s;
    c.tau_k = tk;
    c.tau_r = tr;
    c.inst.a = bench::gen_instance(n, s);
    c.inst.k = bench::derive_k(tk, n);
    c.inst.r = tr * topk_sum(c.inst.a, c.inst.k);
    cases.push_back(std::move(c));
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cases.size()) break;
      const Case& c = cases[i];
      try {
        ProjectionSolution sol = eips::project(c.inst, args.eps);
        KktCertificate cert =
            verify_kkt(c.inst, sol, default_cert_tol(c.inst, args.eps));
        ProjectionSolution ref = baselines::grid_oracle(c.inst);
        double diff = 0.0;
        for (std::size_t j = 0; j < c.inst.n(); ++j) {
          diff = std::max(diff, std::abs(ref.x[j] - sol.x[j]));
        }
        if (!cert.passed() || diff > 1e-7) {
          ++failures;
          std::fprintf(stderr,
                       "verify: FAIL seed=%llu n=%zu k=%zu tau_r=%g "
                       "diff=%.3e\n",
                       static_cast<unsigned long long>(c.seed), c.inst.n(),
                       c.inst.k, c.tau_r, diff);
        }
      } catch (const std::exception& e) {
        ++failures;
        std::fprintf(stderr, "verify: ERROR seed=%llu: %s\n",
                     static_cast<unsigned long long>(c.seed), e.what());
      }
    }
  };
  unsigned nw = std::max(1u, args.parallel);
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < nw; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::printf("verify: %zu cases, %zu failures\n", cases.size(),
              failures.load());
  return failures.load() == 0 ? kExitOk : kExitVerify;
}

struct SlopeArgs {
  std::string input;
  std::string algo = "eips";
  std::size_t n_min = 0;
};

int run_slope(const SlopeArgs& args) {
  std::ifstream in(args.input);
  if (!in) {
    std::cerr << "slope: cannot open " << args.input << "\n";
    return kExitUsage;
  }
  std::string line;
  if (!std::getline(in, line) || line != bench::csv_header()) {
    std::cerr << "slope: unrecognized CSV header\n";
    return kExitUsage;
  }
  std::map<std::pair<double, double>, std::vector<bench::BenchRecord>> groups;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    bench::BenchRecord r;
    char algo_buf[64] = {};
    unsigned long long seed = 0, elapsed = 0;
    int flag = 0, pass = 0;
    int got = std::sscanf(line.c_str(),
                          "%zu,%zu,%lf,%lf,%63[^,],%llu,%llu,%zu,%zu,%zu,%d,%d",
                          &r.n, &r.k, &r.tau_k, &r.tau_r, algo_buf, &seed,
                          &elapsed, &r.init_iters, &r.pivot_iters,
                          &r.exact_iters, &flag, &pass);
    if (got != 12) {
      std::cerr << "slope: malformed CSV at line " << lineno << "\n";
      return kExitUsage;
    }
    r.algo = algo_buf;
    r.elapsed_ns = elapsed;
    if (r.algo == args.algo) groups[{r.tau_k, r.tau_r}].push_back(r);
  }
  if (groups.empty()) {
    std::cerr << "slope: no records for algo '" << args.algo << "'\n";
    return kExitUsage;
  }
  for (const auto& [key, recs] : groups) {
    try {
      double s = bench::estimate_slope(recs, args.n_min);
      std::printf("algo=%s tau_k=%g tau_r=%g slope=%.4f\n", args.algo.c_str(),
                  key.first, key.second, s);
    } catch (const std::invalid_argument&) {
      std::printf("algo=%s tau_k=%g tau_r=%g slope=NA (need >= 3 sizes)\n",
                  args.algo.c_str(), key.first, key.second);
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sort-free Euclidean projection onto the top-k-sum "
               "constraint: solver and benchmark harness"};
  app.require_subcommand(1);

  ProjectArgs pa;
  auto* proj = app.add_subcommand("project", "solve one instance");
  proj->add_option("--input", pa.input, "vector file (text or binary)");
  proj->add_option("--n", pa.n, "generate a uniform instance of this size");
  proj->add_option("--seed", pa.seed, "generator seed")
      ->each([&pa](const std::string&) { pa.seed_set = true; });
  proj->add_option("--k", pa.k, "constraint cardinality");
  proj->add_option("--tau-k", pa.tau_k, "k as a fraction of n");
  proj->add_option("--r", pa.r, "budget");
  proj->add_option("--tau-r", pa.tau_r, "r as a fraction of the top-k sum");
  proj->add_option("--eps", pa.eps, "solver tolerance (default 1e-8)");
  proj->add_option("--algo", pa.algo, "eips|grid|sorted")
      ->check(CLI::IsMember({"eips", "grid", "sorted"}));
  proj->add_flag("--verify", pa.verify, "check the certificate (and the "
                 "exact oracle when n <= 1e4)");
  proj->add_option("--out", pa.out, "write x to this path");
  proj->add_flag("--binary", pa.binary, "write --out in the binary format");

  BenchArgs ba;
  auto* ben = app.add_subcommand("bench", "run the timing suite");
  ben->add_option("--n-list", ba.n_list, "instance sizes");
  ben->add_option("--tau-k-list", ba.tau_k_list, "tau_k grid (default full)");
  ben->add_option("--tau-r-list", ba.tau_r_list, "tau_r grid (default full)");
  ben->add_option("--reps", ba.reps, "repetitions per grid point");
  ben->add_option("--seed", ba.seed, "master seed")
      ->each([&ba](const std::string&) { ba.seed_set = true; });
  ben->add_option("--algos", ba.algos, "algorithms to time");
  ben->add_option("--out", ba.out, "CSV output path (default stdout)");
  ben->add_option("--flag-stats", ba.flag_stats_out,
                  "also write the mean-flag table to this path");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify",
                                 "randomized correctness sweep vs the oracle");
  ver->add_option("--count", va.count, "number of random cases");
  ver->add_option("--n-max", va.n_max, "maximum instance size");
  ver->add_option("--seed", va.seed, "master seed")
      ->each([&va](const std::string&) { va.seed_set = true; });
  ver->add_option("--eps", va.eps, "solver tolerance");
  ver->add_option("--parallel-instances", va.parallel,
                  "worker threads (correctness suite only)");

  SlopeArgs sa;
  auto* slo = app.add_subcommand("slope", "fit log-time vs log-n slopes "
                                 "from a bench CSV");
  slo->add_option("--input", sa.input, "bench CSV")->required();
  slo->add_option("--algo", sa.algo, "algorithm to fit");
  slo->add_option("--n-min", sa.n_min, "ignore records with n below this");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*proj) return run_project(pa);
    if (*ben) return run_bench(ba);
    if (*ver) return run_verify(va);
    if (*slo) return run_slope(sa);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
