#pragma once

#include "qcapgeo/channels.hpp"
#include "qcapgeo/lower_channel.hpp"
#include "qcapgeo/qmath.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qcapgeo {

inline constexpr const char* kToolVersion = "1.0.0";

enum class Task { upper_state, upper_channel, lower_state, lower_channel, amortization_check };
std::string to_string(Task t);
Task task_from_string(const std::string& s);

// Loaded from a JSON file. Keys (all but task/target/sweep optional):
//   task, target, sweep {param, grid | start/stop/step}, restarts, seed,
//   fd_step, grad_tol, max_iters, flag_dim, env_dim, m_dim, r_dim,
//   n_copies (int or list), samples, variant, out_dir, name, record_seconds
struct ExperimentConfig {
  Task task = Task::upper_state;
  // Channel spec ("gadc:gamma=0.3,N=0.1") or, for state tasks, a state spec:
  // "isotropic:d=2,f=0.9" (also p=1−f or p34=3p/4) or "choi:<channel spec>".
  std::string target;
  std::string sweep_param;
  std::vector<double> grid;
  int restarts = 50;
  std::uint64_t seed = 1;
  double fd_step = 1e-6;
  double grad_tol = 1e-7;
  int max_iters = 500;
  int flag_dim = 2;
  int env_dim = 4;
  int m_dim = 2;
  int r_dim = 2;
  std::vector<int> n_copies{1};
  int samples = 100;
  std::string variant = "coherent_form";
  std::string out_dir = "results";
  std::string name = "experiment";
  // Off by default so identical config + seed give byte-identical CSV;
  // the report JSON always carries wall times.
  bool record_seconds = false;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);  // canonical (sorted keys)
void validate(const ExperimentConfig& cfg);              // throws Error
std::string config_hash(const ExperimentConfig& cfg);    // 16 hex digits

// Target with the sweep parameter substituted.
std::string target_at(const ExperimentConfig& cfg, double param);
DensityOperator parse_state_spec(const std::string& text);

std::vector<std::string> csv_header(Task t);

struct PointRecord {
  double param = 0.0;
  int n = 1;
  std::string status = "ok";  // "ok" or "error: ..."
  std::string target;
  // upper tasks
  double hashing = 0.0;
  double bound_unextended = 0.0;
  double bound_optimized = 0.0;
  double epsilon = 0.0;
  bool baseline_won = true;
  // lower tasks
  double rate = 0.0;
  double baseline_rate = 0.0;
  // amortization
  double ic = 0.0;
  double max_gap = 0.0;
  double margin = 0.0;
  int restarts_used = 0;
  double seconds = 0.0;
  std::string checkpoint;  // relative to the run directory, empty if none
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string config_hash;
  std::string version = kToolVersion;
  std::vector<PointRecord> points;
  std::string dir;  // run directory (out_dir/name)
  std::string csv_path;
  std::string report_path;
};

// Runs every grid point (in a worker pool), writes <out_dir>/<name>/results.csv,
// report.json and checkpoints. A failing point is recorded and skipped.
ExperimentReport run(const ExperimentConfig& cfg);

ExperimentReport load_report(const std::string& path);

struct VerifyCheck {
  std::string invariant;
  int point = -1;
  bool pass = true;
  std::string detail;
};
struct VerifySummary {
  bool pass = true;
  std::vector<VerifyCheck> checks;
  std::vector<std::string> failures() const;
};
// Recomputes values at the persisted checkpoints (no optimization).
VerifySummary verify(const std::string& report_path, double tol = 1e-9);

struct AmortizationReport {
  double ic = 0.0;
  double max_gap = 0.0;
  double margin = 0.0;  // ic − max_gap
  int samples = 0;
  AnsatzParam code;  // n = 1, |R| = |A|
};
AmortizationReport amortization_check(const ChannelRep& ch, int samples, std::uint64_t seed, int restarts = 10);

// Random (ρ, σ) pairs on E ⊗ A; largest finite amortized_gap.
double sampled_max_gap(const ChannelRep& ch, int samples, std::uint64_t seed);

// u_list checkpoint: per unitary a line "k dim_left dim_right", then the
// matrix in qmath text format.
void save_ansatz(const std::string& path, const AnsatzParam& p);
AnsatzParam load_ansatz(const std::string& path);

}  // namespace qcapgeo
