#pragma once

// Experiment orchestration behind the benchmark CLI. Every command writes a
// tidy CSV with a fixed header; floats use 17 significant digits. Each
// (grid cell, trial) job draws its target, operator and sampling stream from
// seeds derived from (seed, m, rank, trial), so any row can be regenerated
// alone and results do not depend on thread scheduling.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stotiht/analysis.hpp"
#include "stotiht/hosvd.hpp"
#include "stotiht/parallel.hpp"
#include "stotiht/random.hpp"
#include "stotiht/sensing.hpp"
#include "stotiht/solvers.hpp"
#include "stotiht/tensor.hpp"
#include "stotiht/tensor_io.hpp"

namespace stotiht::harness {

/// A value that is either absolute or a multiple of m ("0.46m", "m", "90").
struct StepRule {
  double value = 1.0;
  bool times_m = true;

  static StepRule parse(std::string_view text) {
    StepRule rule;
    std::string_view num = text;
    rule.times_m = !text.empty() && text.back() == 'm';
    if (rule.times_m) num.remove_suffix(1);
    if (num.empty()) {
      if (!rule.times_m) throw std::invalid_argument("empty step rule");
      rule.value = 1.0;
      return rule;
    }
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), rule.value);
    if (ec != std::errc() || p != num.data() + num.size() || !std::isfinite(rule.value) || rule.value < 0.0)
      throw std::invalid_argument("invalid value '" + std::string(text) + "' (expected e.g. 0.5m or 120)");
    return rule;
  }

  double resolve(std::size_t m) const { return times_m ? value * static_cast<double>(m) : value; }

  std::size_t resolve_batch(std::size_t m) const {
    const double b = std::round(resolve(m));
    if (b < 1.0 || b > static_cast<double>(m))
      throw std::invalid_argument("batch size " + to_string() + " resolves outside [1, m] for m = " + std::to_string(m));
    return static_cast<std::size_t>(b);
  }

  std::string to_string() const {
    if (times_m) return value == 1.0 ? "m" : format_double(value) + "m";
    return format_double(value);
  }
};

struct ExperimentSpec {
  Shape shape{5, 5, 6};
  std::vector<RankTuple> ranks{RankTuple{1, 2, 2}};
  std::vector<std::size_t> ms{360};
  std::vector<StepRule> batches{StepRule{1.0, true}, StepRule{0.5, true}, StepRule{0.25, true}};
  StepRule mu{0.46, true};
  std::size_t trials = 20;
  std::size_t max_epochs = 200;
  std::uint64_t seed = 0;
  double tol = 1e-5;
  double noise = 0.0;  // relative: ||e|| = noise * ||y||
  unsigned threads = 0;
  bool wall_clock = false;

  void validate() const {
    if (ranks.empty() || ms.empty() || batches.empty()) throw std::invalid_argument("empty experiment range");
    if (trials == 0) throw std::invalid_argument("trials must be >= 1");
    if (max_epochs == 0) throw std::invalid_argument("epochs must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (!(noise >= 0.0)) throw std::invalid_argument("noise must be >= 0");
    for (const auto& r : ranks) r.check_fits(shape);
    for (std::size_t m : ms) {
      if (m == 0) throw std::invalid_argument("m must be >= 1");
      for (const auto& b : batches) b.resolve_batch(m);
    }
  }
};

inline std::string algorithm_label(std::size_t b, std::size_t m) { return b == m ? "TIHT" : "StoTIHT"; }

/// Target, operator and measurements of one trial.
struct Instance {
  DenseTensor target;
  SensingOperator op;
  Vector y;
};

/// Additive noise e with ||e|| = level * ||y|| in a Gaussian direction.
inline Vector add_noise(const Vector& y, double level, Rng& rng) {
  if (level == 0.0) return y;
  Vector e(y.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < e.size(); ++i) e[i] = normal(rng);
  const double en = e.norm();
  if (en == 0.0) return y;
  return y + (level * y.norm() / en) * e;
}

/// Measures `target` with a fresh Frobenius-normalised Gaussian operator.
inline Instance measure(DenseTensor target, std::size_t m, double noise, std::uint64_t seed,
                        Normalization norm = Normalization::frobenius) {
  Rng op_rng(derive_seed(seed, {1}));
  SensingOperator op = gaussian_operator(target.shape(), m, op_rng, norm);
  Rng noise_rng(derive_seed(seed, {2}));
  Vector y = add_noise(apply(op, target), noise, noise_rng);
  return Instance{std::move(target), std::move(op), std::move(y)};
}

/// Random Tucker target with Gaussian core and Gaussian bases, then measured.
inline Instance make_instance(const Shape& shape, const RankTuple& rank, std::size_t m, double noise,
                              std::uint64_t seed, Normalization norm = Normalization::frobenius) {
  Rng target_rng(derive_seed(seed, {0}));
  DenseTensor target = reconstruct(random_tucker(shape, rank, target_rng));
  return measure(std::move(target), m, noise, seed, norm);
}

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t m, const RankTuple& rank, std::size_t trial) {
  std::vector<std::uint64_t> coords{m};
  coords.insert(coords.end(), rank.ranks().begin(), rank.ranks().end());
  coords.push_back(trial);
  return derive_seed(base, coords);
}

inline SolverConfig solver_config(const ExperimentSpec& spec, const RankTuple& rank, std::size_t m,
                                  std::size_t b, std::uint64_t seed) {
  SolverConfig cfg{.rank = rank};
  cfg.mu = spec.mu.resolve(m);
  cfg.batch_size = b;
  cfg.max_epochs = spec.max_epochs;
  cfg.success_tol = spec.tol;
  cfg.seed = derive_seed(seed, {3, b});
  return cfg;
}

/// One recovery in a grid sweep.
struct TrialRecord {
  std::string algorithm;
  std::size_t batch_size = 0;
  std::size_t m = 0;
  std::string rank;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::max_epochs;
  bool success = false;               // final rel_error < tol
  std::size_t epochs_to_success = 0;  // max_epochs + 1 when never reached
  double final_rel_error = 0.0;
  double seconds = 0.0;
};

/// Runs every (m, rank, trial) job and every batch rule on it.
/// Records are ordered by (batch rule, rank, m, trial).
inline std::vector<TrialRecord> run_grid(const ExperimentSpec& spec) {
  spec.validate();
  struct Job {
    std::size_t m;
    std::size_t rank_index;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (std::size_t ri = 0; ri < spec.ranks.size(); ++ri)
    for (std::size_t m : spec.ms)
      for (std::size_t t = 0; t < spec.trials; ++t) jobs.push_back({m, ri, t});

  const std::size_t nb = spec.batches.size();
  std::vector<TrialRecord> out(jobs.size() * nb);
  parallel_for(jobs.size(), spec.threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const RankTuple& rank = spec.ranks[job.rank_index];
    const std::uint64_t seed = trial_seed(spec.seed, job.m, rank, job.trial);
    const Instance inst = make_instance(spec.shape, rank, job.m, spec.noise, seed);
    for (std::size_t bi = 0; bi < nb; ++bi) {
      const std::size_t b = spec.batches[bi].resolve_batch(job.m);
      const RunResult res = run(inst.op, inst.y, solver_config(spec, rank, job.m, b, seed), inst.target);
      TrialRecord rec;
      rec.algorithm = algorithm_label(b, job.m);
      rec.batch_size = b;
      rec.m = job.m;
      rec.rank = rank.to_string();
      rec.trial = job.trial;
      rec.seed = seed;
      rec.status = res.trace.status;
      rec.final_rel_error =
          res.trace.epochs.empty() ? 1.0 : res.trace.epochs.back().rel_error.value_or(1.0);
      if (res.trace.status == RunStatus::diverged) rec.final_rel_error = std::numeric_limits<double>::infinity();
      rec.success = rec.final_rel_error < spec.tol;
      rec.epochs_to_success = rec.success ? res.trace.epochs_to_success.value_or(spec.max_epochs + 1) : spec.max_epochs + 1;
      rec.seconds = res.trace.epochs.empty() ? 0.0 : res.trace.epochs.back().seconds;
      out[bi * jobs.size() + j] = std::move(rec);
    }
  });
  return out;
}

namespace detail {

inline std::string csv_join(std::initializer_list<std::string> fields) {
  std::string line;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) line += ',';
    line += f;
    first = false;
  }
  line += '\n';
  return line;
}

// Groups grid records by (algorithm, batch, m, rank) preserving first-seen order.
template <typename Fn>
void for_each_cell(const std::vector<TrialRecord>& records, Fn&& fn) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TrialRecord*>> cells;
  for (const auto& r : records) {
    const std::string key = r.algorithm + "|" + std::to_string(r.batch_size) + "|" + std::to_string(r.m) + "|" + r.rank;
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  for (const auto& key : order) fn(cells.at(key));
}

}  // namespace detail

inline void write_trial_records(const std::vector<TrialRecord>& records, std::ostream& out, bool wall_clock) {
  out << "algorithm,batch_size,m,rank,trial,seed,status,success,epochs_to_success,final_rel_error"
      << (wall_clock ? ",seconds" : "") << '\n';
  for (const auto& r : records) {
    out << r.algorithm << ',' << r.batch_size << ',' << r.m << ',' << r.rank << ',' << r.trial << ',' << r.seed << ','
        << to_string(r.status) << ',' << (r.success ? 1 : 0) << ',' << r.epochs_to_success << ','
        << format_double(r.final_rel_error);
    if (wall_clock) out << ',' << format_double(r.seconds);
    out << '\n';
  }
}

/// CSV: algorithm,batch_size,m,rank,trials,success_fraction
inline void phase_grid(const ExperimentSpec& spec, std::ostream& out, std::ostream* records_out = nullptr) {
  const auto records = run_grid(spec);
  out << "algorithm,batch_size,m,rank,trials,success_fraction\n";
  detail::for_each_cell(records, [&](const std::vector<const TrialRecord*>& cell) {
    const auto successes = std::count_if(cell.begin(), cell.end(), [](const TrialRecord* r) { return r->success; });
    const TrialRecord& r0 = *cell.front();
    out << r0.algorithm << ',' << r0.batch_size << ',' << r0.m << ',' << r0.rank << ',' << cell.size() << ','
        << format_double(static_cast<double>(successes) / static_cast<double>(cell.size())) << '\n';
  });
  if (records_out) write_trial_records(records, *records_out, spec.wall_clock);
}

/// CSV: algorithm,batch_size,m,rank,trials,successes,mean_epochs_to_success
/// Unsuccessful trials count as max_epochs + 1.
inline void epochs_grid(const ExperimentSpec& spec, std::ostream& out, std::ostream* records_out = nullptr) {
  const auto records = run_grid(spec);
  out << "algorithm,batch_size,m,rank,trials,successes,mean_epochs_to_success\n";
  detail::for_each_cell(records, [&](const std::vector<const TrialRecord*>& cell) {
    std::size_t successes = 0;
    double total = 0.0;
    for (const TrialRecord* r : cell) {
      successes += r->success ? 1 : 0;
      total += static_cast<double>(r->epochs_to_success);
    }
    const TrialRecord& r0 = *cell.front();
    out << r0.algorithm << ',' << r0.batch_size << ',' << r0.m << ',' << r0.rank << ',' << cell.size() << ','
        << successes << ',' << format_double(total / static_cast<double>(cell.size())) << '\n';
  });
  if (records_out) write_trial_records(records, *records_out, spec.wall_clock);
}

/// Mean convergence curves. CSV: algorithm,batch_size,epoch,trials,cost,rel_error[,seconds]
/// Runs do not stop at success; `trials` counts the runs that reached the
/// epoch (diverged runs end early).
inline void synthetic_run(const ExperimentSpec& spec, std::ostream& out) {
  spec.validate();
  const std::size_t m = spec.ms.front();
  const RankTuple& rank = spec.ranks.front();
  const std::size_t nb = spec.batches.size();
  std::vector<RunTrace> traces(spec.trials * nb);
  parallel_for(spec.trials, spec.threads, [&](std::size_t t) {
    const std::uint64_t seed = trial_seed(spec.seed, m, rank, t);
    const Instance inst = make_instance(spec.shape, rank, m, spec.noise, seed);
    for (std::size_t bi = 0; bi < nb; ++bi) {
      SolverConfig cfg = solver_config(spec, rank, m, spec.batches[bi].resolve_batch(m), seed);
      cfg.stop_at_success = false;
      traces[bi * spec.trials + t] = run(inst.op, inst.y, cfg, inst.target).trace;
    }
  });

  out << "algorithm,batch_size,epoch,trials,cost,rel_error" << (spec.wall_clock ? ",seconds" : "") << '\n';
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const std::size_t b = spec.batches[bi].resolve_batch(m);
    for (std::size_t e = 0; e < spec.max_epochs; ++e) {
      std::size_t count = 0;
      double cost = 0.0, err = 0.0, secs = 0.0;
      for (std::size_t t = 0; t < spec.trials; ++t) {
        const RunTrace& tr = traces[bi * spec.trials + t];
        if (e >= tr.epochs.size()) continue;
        ++count;
        cost += tr.epochs[e].cost;
        err += tr.epochs[e].rel_error.value_or(0.0);
        secs += tr.epochs[e].seconds;
      }
      if (count == 0) break;
      const double n = static_cast<double>(count);
      out << algorithm_label(b, m) << ',' << b << ',' << (e + 1) << ',' << count << ',' << format_double(cost / n)
          << ',' << format_double(err / n);
      if (spec.wall_clock) out << ',' << format_double(secs / n);
      out << '\n';
    }
  }
}

/// Per-batch-rule wall-clock profile of a single instance.
struct TimingRow {
  std::string algorithm;
  std::size_t batch_size = 0;
  std::size_t iterations_per_epoch = 0;
  double epoch_seconds = 0.0;       // median over epochs
  double iteration_seconds = 0.0;   // epoch_seconds / iterations_per_epoch
  double gradient_seconds = 0.0;    // median per-iteration gradient step
  double projection_seconds = 0.0;  // median per-iteration H_r
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace detail

/// Runs every batch rule for max_epochs epochs (no early stop) on one
/// instance built from (shape, ranks[0], ms[0], seed) and times the phases.
inline std::vector<TimingRow> profile_timing(const ExperimentSpec& spec) {
  spec.validate();
  using Clock = std::chrono::steady_clock;
  const std::size_t m = spec.ms.front();
  const RankTuple& rank = spec.ranks.front();
  const std::uint64_t seed = trial_seed(spec.seed, m, rank, 0);
  const Instance inst = make_instance(spec.shape, rank, m, spec.noise, seed);
  const double mu = spec.mu.resolve(m);

  std::vector<TimingRow> rows;
  for (const StepRule& rule : spec.batches) {
    const std::size_t b = rule.resolve_batch(m);
    const BatchPartition part = BatchPartition::uniform(m, b);
    const bool full = part.count() == 1;
    Rng rng(derive_seed(seed, {3, b}));
    Vector x = Vector::Zero(static_cast<Index>(spec.shape.numel()));
    std::vector<double> epoch_t, grad_t, proj_t;
    for (std::size_t e = 0; e < spec.max_epochs; ++e) {
      const auto e0 = Clock::now();
      for (std::size_t it = 0; it < part.count(); ++it) {
        const auto t0 = Clock::now();
        Vector point = full ? stotiht::detail::tiht_point(inst.op, inst.y, x, mu)
                            : stotiht::detail::stotiht_point(inst.op, part, sample_batch(part, rng), inst.y, x, mu);
        const auto t1 = Clock::now();
        if (!point.allFinite()) point.setZero();
        x = vectorize(project_rank_r(DenseTensor(spec.shape, std::move(point)), rank));
        const auto t2 = Clock::now();
        grad_t.push_back(std::chrono::duration<double>(t1 - t0).count());
        proj_t.push_back(std::chrono::duration<double>(t2 - t1).count());
      }
      epoch_t.push_back(std::chrono::duration<double>(Clock::now() - e0).count());
    }
    TimingRow row;
    row.algorithm = algorithm_label(b, m);
    row.batch_size = b;
    row.iterations_per_epoch = part.count();
    row.epoch_seconds = detail::median(epoch_t);
    row.iteration_seconds = row.epoch_seconds / static_cast<double>(part.count());
    row.gradient_seconds = detail::median(grad_t);
    row.projection_seconds = detail::median(proj_t);
    rows.push_back(row);
  }
  return rows;
}

/// CSV: algorithm,batch_size,iterations_per_epoch,epoch_seconds,iteration_seconds,gradient_seconds,projection_seconds
inline void timing(const ExperimentSpec& spec, std::ostream& out) {
  out << "algorithm,batch_size,iterations_per_epoch,epoch_seconds,iteration_seconds,gradient_seconds,projection_seconds\n";
  for (const auto& r : profile_timing(spec))
    out << r.algorithm << ',' << r.batch_size << ',' << r.iterations_per_epoch << ',' << format_double(r.epoch_seconds)
        << ',' << format_double(r.iteration_seconds) << ',' << format_double(r.gradient_seconds) << ','
        << format_double(r.projection_seconds) << '\n';
}

/// Recovers a user-supplied tensor from fresh Gaussian measurements of it,
/// once per batch rule. Trace CSV: algorithm,batch_size,epoch,cost,rel_error[,seconds]
/// Returns the recovered tensors in batch-rule order.
inline std::vector<DenseTensor> real_tensor(const ExperimentSpec& spec, const DenseTensor& truth, std::ostream& out) {
  ExperimentSpec s = spec;
  s.shape = truth.shape();
  s.validate();
  const std::size_t m = s.ms.front();
  const RankTuple& rank = s.ranks.front();
  const std::uint64_t seed = trial_seed(s.seed, m, rank, 0);
  const Instance inst = measure(truth, m, s.noise, seed);

  out << "algorithm,batch_size,epoch,cost,rel_error" << (s.wall_clock ? ",seconds" : "") << '\n';
  std::vector<DenseTensor> recovered;
  for (const StepRule& rule : s.batches) {
    const std::size_t b = rule.resolve_batch(m);
    const RunResult res = run(inst.op, inst.y, solver_config(s, rank, m, b, seed), inst.target);
    for (const auto& rec : res.trace.epochs) {
      out << algorithm_label(b, m) << ',' << b << ',' << rec.epoch << ',' << format_double(rec.cost) << ','
          << format_double(rec.rel_error.value_or(0.0));
      if (s.wall_clock) out << ',' << format_double(rec.seconds);
      out << '\n';
    }
    recovered.push_back(res.x);
  }
  return recovered;
}

struct ProbeOptions {
  std::size_t probe_trials = 200;
  std::optional<double> delta;  // TRIP constant for kappa; default: empirical at rank 3r
  std::optional<double> eta;    // default: eta_hosvd(d, sqrt_2d_minus_3)
  double c = 1.0;               // sample-bound constant
  std::size_t sigma_trials = 200;
};

struct ProbeReport {
  double delta_full_r = 0.0, delta_batch_r = 0.0;
  double delta_full_3r = 0.0, delta_batch_3r = 0.0;
  double delta_used = 0.0;
  double eta = 1.0;
  double mu_theory = 0.0;
  std::optional<double> kappa;
  std::optional<BoundCheck> bound;
  double sigma = 0.0;
};

/// TRIP probe on the isotropic ensemble (unnormalised N(0,1) entries), where
/// (1/m)||A(X)||^2 concentrates at ||X||^2. The solver's mu maps to the
/// theory's step as mu * m / ||G||_F^2 (about mu / N).
inline ProbeReport probe_trip(const ExperimentSpec& spec, const ProbeOptions& opt) {
  spec.validate();
  const std::size_t m = spec.ms.front();
  const RankTuple& rank = spec.ranks.front();
  const RankTuple rank3 = rank.scaled_clipped(3, spec.shape);
  const std::size_t b = spec.batches.front().resolve_batch(m);
  const std::uint64_t seed = trial_seed(spec.seed, m, rank, 0);
  const Instance inst = make_instance(spec.shape, rank, m, spec.noise, seed, Normalization::isotropic);
  const BatchPartition part = BatchPartition::uniform(m, b);

  ProbeReport rep;
  const TripEstimate at_r = trip_estimate(inst.op, part, rank, opt.probe_trials, derive_seed(seed, {4}));
  const TripEstimate at_3r = trip_estimate(inst.op, part, rank3, opt.probe_trials, derive_seed(seed, {5}));
  rep.delta_full_r = at_r.full;
  rep.delta_batch_r = at_r.batch;
  // Rank-r tensors belong to the rank-3r class, so their samples also bound delta_3r.
  rep.delta_full_3r = std::max(at_3r.full, at_r.full);
  rep.delta_batch_3r = std::max(at_3r.batch, at_r.batch);
  rep.delta_used = opt.delta.value_or(std::max(rep.delta_full_3r, rep.delta_batch_3r));
  rep.eta = opt.eta.value_or(eta_hosvd(spec.shape.order()));
  rep.mu_theory = spec.mu.resolve(m) * static_cast<double>(m) / inst.op.rows().squaredNorm();

  if (rep.delta_used < 1.0) {
    TheoryParams tp;
    tp.delta_3r = rep.delta_used;
    tp.eta = rep.eta;
    tp.mu = rep.mu_theory;
    tp.batches = part.count();
    tp.p_min = part.min_probability();
    if (tp.mu > 0.0) rep.kappa = kappa(tp);
  }
  const double delta_r = std::max(rep.delta_full_r, rep.delta_batch_r);
  if (delta_r <= 1.0) rep.bound = sample_bound_check(m, b, delta_r, *std::max_element(spec.shape.dims().begin(), spec.shape.dims().end()), rank.max(), spec.shape.order(), opt.c);
  rep.sigma = sigma_estimate(inst.op, part, inst.y, inst.target, rep.mu_theory, rep.eta, opt.sigma_trials,
                             derive_seed(seed, {6}));
  return rep;
}

/// CSV: quantity,value
inline void trip_probe(const ExperimentSpec& spec, const ProbeOptions& opt, std::ostream& out) {
  const ProbeReport r = probe_trip(spec, opt);
  const RankTuple rank3 = spec.ranks.front().scaled_clipped(3, spec.shape);
  out << "quantity,value\n";
  out << "rank," << spec.ranks.front().to_string() << '\n';
  out << "rank_3r," << rank3.to_string() << '\n';
  out << "delta_full_r," << format_double(r.delta_full_r) << '\n';
  out << "delta_batch_r," << format_double(r.delta_batch_r) << '\n';
  out << "delta_full_3r," << format_double(r.delta_full_3r) << '\n';
  out << "delta_batch_3r," << format_double(r.delta_batch_3r) << '\n';
  out << "delta_used," << format_double(r.delta_used) << '\n';
  out << "eta," << format_double(r.eta) << '\n';
  out << "mu_theory," << format_double(r.mu_theory) << '\n';
  out << "kappa," << (r.kappa ? format_double(*r.kappa) : std::string("infeasible")) << '\n';
  out << "contraction," << (r.kappa && *r.kappa < 1.0 ? 1 : 0) << '\n';
  if (r.bound) {
    out << "bound_threshold," << format_double(r.bound->threshold) << '\n';
    out << "bound_full_ok," << (r.bound->full_ok ? 1 : 0) << '\n';
    out << "bound_batch_ok," << (r.bound->batch_ok ? 1 : 0) << '\n';
  } else {
    out << "bound_threshold,not_checkable\n";
  }
  out << "sigma," << format_double(r.sigma) << '\n';
}

/// Gnuplot script plotting the CSV of the given command.
inline std::string gnuplot_script(std::string_view command, const std::string& csv_path) {
  std::string s = "set datafile separator ','\nset key outside\nset grid\n";
  const std::string data = "'" + csv_path + "'";
  if (command == "synth-run" || command == "real") {
    s += "set logscale y\nset xlabel 'epoch'\nset ylabel 'relative error'\n";
    s += "plot for [b in system(\"awk -F, 'NR>1{print $2}' " + csv_path + " | sort -un\")] " + data +
         " using ($2==b+0 ? $3 : 1/0):" + (command == "synth-run" ? "6" : "5") +
         " with lines title 'b='.b\n";
  } else if (command == "phase-grid" || command == "epochs-grid") {
    s += "set xlabel 'm'\nset ylabel 'rank'\nset view map\n";
    s += std::string("plot ") + data + " using 3:(column(0)):" + (command == "phase-grid" ? "6" : "7") +
         " with points pointtype 5 pointsize 3 palette notitle\n";
  } else if (command == "timing") {
    s += "set style data histograms\nset style fill solid\nset ylabel 'seconds per epoch'\n";
    s += "plot " + data + " using 4:xtic(sprintf('%s b=%d', strcol(1), $2)) notitle\n";
  } else {
    throw std::invalid_argument("no gnuplot script for command '" + std::string(command) + "'");
  }
  return s;
}

}  // namespace stotiht::harness
