#include "qcapgeo/experiment.hpp"

#include "qcapgeo/entropy.hpp"
#include "qcapgeo/lower_state.hpp"
#include "qcapgeo/manifolds.hpp"
#include "qcapgeo/upper.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <memory>
#include <sstream>
#include <thread>

namespace qcapgeo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no NaN; store it as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? kNan : j.get<double>(); }

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

bool is_upper(Task t) { return t == Task::upper_state || t == Task::upper_channel; }
bool is_state_task(Task t) { return t == Task::upper_state || t == Task::lower_state; }

struct SpecParts {
  std::string head;  // e.g. "isotropic" or "choi:gadc"
  std::vector<std::pair<std::string, std::string>> params;
};

SpecParts split_spec(const std::string& text) {
  SpecParts s;
  auto colon = text.rfind(':');
  std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (colon == std::string::npos || tail.find('=') == std::string::npos) {
    s.head = text;
    if (!tail.empty() || colon == std::string::npos) return s;
    s.head = text.substr(0, colon);
    return s;
  }
  s.head = text.substr(0, colon);
  std::stringstream ss(tail);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("bad spec parameter: " + item);
    s.params.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return s;
}

std::string join_spec(const SpecParts& s) {
  std::string out = s.head;
  char sep = ':';
  for (auto& [k, v] : s.params) {
    out += sep + k + "=" + v;
    sep = ',';
  }
  return out;
}

ChannelRep channel_of(const std::string& text) { return channel_from_spec(parse_channel_spec(text)); }

DensityOperator state_of(const ExperimentConfig& cfg, const std::string& target) {
  (void)cfg;
  return parse_state_spec(target);
}

std::string stem(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "point_%04d", i);
  return buf;
}

void write_sidecar(const std::string& path, int n, int m, std::uint64_t seed, double value) {
  write_file(path, std::to_string(n) + " " + std::to_string(m) + " " + std::to_string(seed) + " " + fmt17(value) + "\n");
}

ExtensionConfig extension_config(const ExperimentConfig& cfg) {
  ExtensionConfig ec;
  ec.restarts = cfg.restarts;
  ec.seed = cfg.seed;
  ec.fd_step = cfg.fd_step;
  ec.grad_tol = cfg.grad_tol;
  ec.max_iters = cfg.max_iters;
  return ec;
}

RgdConfig rgd_config(const ExperimentConfig& cfg) {
  RgdConfig rc;
  rc.max_iters = cfg.max_iters;
  rc.grad_tol = cfg.grad_tol;
  rc.keep_trace = false;
  return rc;
}

ExtensionProblem extension_problem(const ExperimentConfig& cfg, const std::string& target) {
  if (cfg.task == Task::upper_state)
    return ExtensionProblem::for_state(state_of(cfg, target), cfg.flag_dim, cfg.env_dim,
                                       bound_variant_from_string(cfg.variant));
  return ExtensionProblem::for_channel(channel_of(target), cfg.flag_dim, cfg.env_dim);
}

// Bound of the extension at V, minimized over the applicable forms.
struct UpperEval {
  double bound = 0.0;
  double epsilon = 0.0;
};
// Mirrors the certification step of optimize_extension.
UpperEval evaluate_extension(const ExtensionProblem& prob, const Mat& v) {
  if (prob.kind == ExtensionProblem::Kind::state) {
    DensityOperator rho = extended_state(prob, v);
    DegradabilityCertificate cert = dg_state(rho, prob.sdp);
    const double um = state_bound_continuity(rho, cert, BoundVariant::u_m_form);
    const double co = state_bound_continuity(rho, cert, BoundVariant::coherent_form);
    return {std::min(um, co), cert.epsilon};
  }
  ChannelRep ch = extended_channel(prob, v);
  DegradabilityCertificate cert = dg_channel(ch, prob.sdp);
  return {channel_bound_continuity(ch, cert, prob.um), cert.epsilon};
}

UpperEval evaluate_unextended(const ExtensionProblem& prob) {
  if (prob.kind == ExtensionProblem::Kind::state) {
    DegradabilityCertificate cert = dg_state(prob.state, prob.sdp);
    return {std::min(state_bound_continuity(prob.state, cert, BoundVariant::u_m_form),
                     state_bound_continuity(prob.state, cert, BoundVariant::coherent_form)),
            cert.epsilon};
  }
  DegradabilityCertificate cert = dg_channel(prob.channel, prob.sdp);
  return {channel_bound_continuity(prob.channel, cert, prob.um), cert.epsilon};
}

double hashing_of(const ExtensionProblem& prob) {
  if (prob.kind == ExtensionProblem::Kind::state) return coherent_information_state(prob.state, {0});
  return coherent_information_state(choi_state(prob.channel), {0});
}

struct WorkItem {
  double param;
  int n;
};

PointRecord run_point(const ExperimentConfig& cfg, const WorkItem& item, int index, const std::string& dir) {
  auto t0 = std::chrono::steady_clock::now();
  PointRecord rec;
  rec.param = item.param;
  rec.n = item.n;
  rec.target = target_at(cfg, item.param);
  const std::string base = stem(index);
  switch (cfg.task) {
    case Task::upper_state:
    case Task::upper_channel: {
      ExtensionProblem prob = extension_problem(cfg, rec.target);
      UpperBoundResult r = optimize_extension(prob, extension_config(cfg));
      rec.hashing = r.hashing;
      rec.bound_unextended = r.bound_unextended;
      rec.bound_optimized = r.bound;
      rec.epsilon = r.certificate.epsilon;
      rec.baseline_won = r.baseline_won;
      rec.restarts_used = static_cast<int>(r.report.restarts.size());
      if (r.extension_isometry.mat().size() > 0) {
        rec.checkpoint = base + ".iso";
        save_matrix(dir + "/" + rec.checkpoint, r.extension_isometry.mat());
        write_sidecar(dir + "/" + base + ".meta", 1, cfg.flag_dim, cfg.seed, r.bound);
      }
      break;
    }
    case Task::lower_state: {
      InstrumentConfig ic;
      ic.restarts = cfg.restarts;
      ic.seed = cfg.seed;
      ic.rgd = rgd_config(cfg);
      InstrumentResult r = optimize_instrument(state_of(cfg, rec.target), item.n, cfg.m_dim, ic);
      rec.rate = r.rate;
      rec.baseline_rate = r.baseline_rate;
      rec.baseline_won = r.baseline_won;
      rec.restarts_used = static_cast<int>(r.report.restarts.size());
      rec.checkpoint = base + ".unitary";
      save_matrix(dir + "/" + rec.checkpoint, r.best.u);
      write_sidecar(dir + "/" + base + ".meta", item.n, cfg.m_dim, cfg.seed, r.rate);
      break;
    }
    case Task::lower_channel: {
      const ChannelRep ch = channel_of(rec.target);
      CodeStateConfig cc;
      cc.restarts = cfg.restarts;
      cc.seed = cfg.seed;
      cc.rgd = rgd_config(cfg);
      CodeStateResult r = optimize_code_state(ch, item.n, cfg.r_dim, cc);
      rec.rate = r.rate;
      rec.baseline_rate = coherent_information_state(choi_state(ch), {0});
      rec.restarts_used = static_cast<int>(r.report.restarts.size());
      rec.checkpoint = base + ".ulist";
      save_ansatz(dir + "/" + rec.checkpoint, r.best);
      write_sidecar(dir + "/" + base + ".meta", item.n, cfg.r_dim, cfg.seed, r.rate);
      break;
    }
    case Task::amortization_check: {
      const ChannelRep ch = channel_of(rec.target);
      AmortizationReport r = amortization_check(ch, cfg.samples, cfg.seed, cfg.restarts);
      rec.ic = r.ic;
      rec.max_gap = r.max_gap;
      rec.margin = r.margin;
      rec.restarts_used = cfg.restarts;
      rec.checkpoint = base + ".ulist";
      save_ansatz(dir + "/" + rec.checkpoint, r.code);
      write_sidecar(dir + "/" + base + ".meta", 1, r.code.r_dim, cfg.seed, r.ic);
      break;
    }
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::string csv_row(const ExperimentConfig& cfg, const PointRecord& p) {
  const bool ok = p.status == "ok";
  auto v = [&](double x) { return fmt12(ok ? x : kNan); };
  const std::string secs = fmt12(cfg.record_seconds ? p.seconds : 0.0);
  std::string row = fmt12(p.param);
  switch (cfg.task) {
    case Task::upper_state:
    case Task::upper_channel:
      row += "," + v(p.hashing) + "," + v(p.bound_unextended) + "," + v(p.bound_optimized) + "," + v(p.epsilon);
      break;
    case Task::lower_state:
      row += "," + std::to_string(p.n) + "," + std::to_string(cfg.m_dim) + "," + v(p.rate) + "," + v(p.baseline_rate);
      break;
    case Task::lower_channel:
      row += "," + std::to_string(p.n) + "," + std::to_string(cfg.r_dim) + "," + v(p.rate) + "," + v(p.baseline_rate);
      break;
    case Task::amortization_check:
      row += "," + v(p.ic) + "," + v(p.max_gap) + "," + v(p.margin) + "," + std::to_string(cfg.samples);
      break;
  }
  return row + "," + std::to_string(p.restarts_used) + "," + secs;
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["task"] = to_string(c.task);
  j["target"] = c.target;
  j["sweep"] = {{"param", c.sweep_param}, {"grid", c.grid}};
  j["restarts"] = c.restarts;
  j["seed"] = c.seed;
  j["fd_step"] = c.fd_step;
  j["grad_tol"] = c.grad_tol;
  j["max_iters"] = c.max_iters;
  j["flag_dim"] = c.flag_dim;
  j["env_dim"] = c.env_dim;
  j["m_dim"] = c.m_dim;
  j["r_dim"] = c.r_dim;
  j["n_copies"] = c.n_copies;
  j["samples"] = c.samples;
  j["variant"] = c.variant;
  j["out_dir"] = c.out_dir;
  j["name"] = c.name;
  j["record_seconds"] = c.record_seconds;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  static const char* known[] = {"task",     "target",  "sweep",   "restarts", "seed",    "fd_step",
                                "grad_tol", "max_iters", "flag_dim", "env_dim", "m_dim",   "r_dim",
                                "n_copies", "samples", "variant", "out_dir",  "name",    "record_seconds"};
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    for (const char* k : known) found = found || it.key() == k;
    if (!found) throw Error("unknown config key: " + it.key());
  }
  ExperimentConfig c;
  if (!j.contains("task")) throw Error("config: missing task");
  if (!j.contains("target")) throw Error("config: missing target");
  if (!j.contains("sweep")) throw Error("config: missing sweep");
  c.task = task_from_string(j.at("task").get<std::string>());
  c.target = j.at("target").get<std::string>();
  const json& sw = j.at("sweep");
  c.sweep_param = sw.value("param", std::string());
  if (sw.contains("grid")) {
    c.grid = sw.at("grid").get<std::vector<double>>();
  } else if (sw.contains("start")) {
    const double a = sw.at("start").get<double>(), b = sw.at("stop").get<double>(), h = sw.at("step").get<double>();
    if (!(h > 0) || b < a) throw Error("config: sweep range needs step > 0 and stop >= start");
    const int count = static_cast<int>(std::floor((b - a) / h + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) {
      // round to 12 digits so the grid prints cleanly
      c.grid.push_back(std::stod(fmt12(a + i * h)));
    }
  }
  c.restarts = j.value("restarts", c.restarts);
  c.seed = j.value("seed", c.seed);
  c.fd_step = j.value("fd_step", c.fd_step);
  c.grad_tol = j.value("grad_tol", c.grad_tol);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.flag_dim = j.value("flag_dim", c.flag_dim);
  c.env_dim = j.value("env_dim", c.env_dim);
  c.m_dim = j.value("m_dim", c.m_dim);
  c.r_dim = j.value("r_dim", c.r_dim);
  if (j.contains("n_copies")) {
    const json& n = j.at("n_copies");
    c.n_copies = n.is_array() ? n.get<std::vector<int>>() : std::vector<int>{n.get<int>()};
  }
  c.samples = j.value("samples", c.samples);
  c.variant = j.value("variant", c.variant);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.name = j.value("name", c.name);
  c.record_seconds = j.value("record_seconds", c.record_seconds);
  return c;
}

std::vector<WorkItem> work_items(const ExperimentConfig& cfg) {
  std::vector<WorkItem> items;
  const std::vector<int> ns = is_upper(cfg.task) || cfg.task == Task::amortization_check ? std::vector<int>{1}
                                                                                           : cfg.n_copies;
  for (double p : cfg.grid)
    for (int n : ns) items.push_back({p, n});
  return items;
}

json point_json(const PointRecord& p) {
  return {{"param", p.param},
          {"n", p.n},
          {"status", p.status},
          {"target", p.target},
          {"hashing", num(p.hashing)},
          {"bound_unextended", num(p.bound_unextended)},
          {"bound_optimized", num(p.bound_optimized)},
          {"epsilon", num(p.epsilon)},
          {"baseline_won", p.baseline_won},
          {"rate", num(p.rate)},
          {"baseline_rate", num(p.baseline_rate)},
          {"ic", num(p.ic)},
          {"max_gap", num(p.max_gap)},
          {"margin", num(p.margin)},
          {"restarts_used", p.restarts_used},
          {"seconds", p.seconds},
          {"checkpoint", p.checkpoint}};
}

PointRecord point_from_json(const json& j) {
  PointRecord p;
  p.param = j.at("param").get<double>();
  p.n = j.at("n").get<int>();
  p.status = j.at("status").get<std::string>();
  p.target = j.at("target").get<std::string>();
  p.hashing = num(j.at("hashing"));
  p.bound_unextended = num(j.at("bound_unextended"));
  p.bound_optimized = num(j.at("bound_optimized"));
  p.epsilon = num(j.at("epsilon"));
  p.baseline_won = j.at("baseline_won").get<bool>();
  p.rate = num(j.at("rate"));
  p.baseline_rate = num(j.at("baseline_rate"));
  p.ic = num(j.at("ic"));
  p.max_gap = num(j.at("max_gap"));
  p.margin = num(j.at("margin"));
  p.restarts_used = j.at("restarts_used").get<int>();
  p.seconds = j.at("seconds").get<double>();
  p.checkpoint = j.at("checkpoint").get<std::string>();
  return p;
}

}  // namespace

std::string to_string(Task t) {
  switch (t) {
    case Task::upper_state: return "upper_state";
    case Task::upper_channel: return "upper_channel";
    case Task::lower_state: return "lower_state";
    case Task::lower_channel: return "lower_channel";
    case Task::amortization_check: return "amortization_check";
  }
  return "?";
}

Task task_from_string(const std::string& s) {
  for (Task t : {Task::upper_state, Task::upper_channel, Task::lower_state, Task::lower_channel,
                 Task::amortization_check})
    if (to_string(t) == s) return t;
  throw Error("unknown task: " + s);
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c = config_from_json(j);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(); }

std::string config_hash(const ExperimentConfig& cfg) {
  // FNV-1a 64 over the canonical dump
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : config_to_json(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.grid.empty()) throw Error("config: sweep grid is empty");
  if (cfg.sweep_param.empty()) throw Error("config: sweep.param is missing");
  for (double g : cfg.grid)
    if (!std::isfinite(g)) throw Error("config: non-finite grid value");
  if (cfg.restarts < 1) throw Error("config: restarts must be positive");
  if (cfg.max_iters < 1) throw Error("config: max_iters must be positive");
  if (!(cfg.fd_step > 0)) throw Error("config: fd_step must be positive");
  if (!(cfg.grad_tol > 0)) throw Error("config: grad_tol must be positive");
  if (cfg.flag_dim < 1 || cfg.env_dim < 1 || cfg.m_dim < 1 || cfg.r_dim < 1)
    throw Error("config: dimensions must be positive");
  if (cfg.samples < 1) throw Error("config: samples must be positive");
  if (cfg.n_copies.empty()) throw Error("config: n_copies is empty");
  for (int n : cfg.n_copies)
    if (n < 1) throw Error("config: n_copies must be positive");
  if (cfg.name.empty() || cfg.name.find('/') != std::string::npos) throw Error("config: bad name");
  bound_variant_from_string(cfg.variant);
  // the target must parse at every grid point
  for (double g : cfg.grid) {
    const std::string t = target_at(cfg, g);
    if (is_state_task(cfg.task))
      parse_state_spec(t);
    else
      channel_of(t);
  }
}

std::string target_at(const ExperimentConfig& cfg, double param) {
  SpecParts s = split_spec(cfg.target);
  bool replaced = false;
  for (auto& [k, v] : s.params)
    if (k == cfg.sweep_param) {
      v = fmt17(param);
      replaced = true;
    }
  if (!replaced) s.params.emplace_back(cfg.sweep_param, fmt17(param));
  return join_spec(s);
}

DensityOperator parse_state_spec(const std::string& text) {
  if (text.rfind("choi:", 0) == 0) return choi_state(channel_of(text.substr(5)));
  SpecParts s = split_spec(text);
  if (s.head != "isotropic") throw Error("unknown state spec: " + text);
  int d = 2;
  double f = kNan;
  for (auto& [k, v] : s.params) {
    const double x = std::stod(v);
    if (k == "d")
      d = static_cast<int>(x);
    else if (k == "f")
      f = x;
    else if (k == "p" || k == "x")
      f = 1.0 - x;
    else if (k == "p34")
      f = 1.0 - 4.0 * x / 3.0;
    else
      throw Error("unknown isotropic parameter: " + k);
  }
  if (std::isnan(f)) throw Error("isotropic spec needs f, p or p34");
  return isotropic(d, f);
}

std::vector<std::string> csv_header(Task t) {
  switch (t) {
    case Task::upper_state:
    case Task::upper_channel:
      return {"param", "hashing", "bound_unextended", "bound_optimized", "epsilon", "restarts_used", "seconds"};
    case Task::lower_state: return {"param", "n", "m_dim", "rate", "baseline_rate", "restarts_used", "seconds"};
    case Task::lower_channel: return {"param", "n", "r_dim", "rate", "baseline_rate", "restarts_used", "seconds"};
    case Task::amortization_check: return {"param", "ic", "max_gap", "margin", "samples", "restarts_used", "seconds"};
  }
  return {};
}

ExperimentReport run(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport rep;
  rep.config = cfg;
  rep.config_hash = config_hash(cfg);
  rep.dir = (fs::path(cfg.out_dir) / cfg.name).string();
  fs::create_directories(rep.dir);

  const std::vector<WorkItem> items = work_items(cfg);
  rep.points.resize(items.size());
  std::atomic<int> next{0};
  const int nw = std::min<int>(worker_count(), static_cast<int>(items.size()));
  auto work = [&] {
    std::unique_ptr<SerialScope> serial;
    if (nw > 1) serial = std::make_unique<SerialScope>();
    for (int i = next++; i < static_cast<int>(items.size()); i = next++) {
      try {
        rep.points[i] = run_point(cfg, items[i], i, rep.dir);
      } catch (const std::exception& e) {
        PointRecord p;
        p.param = items[i].param;
        p.n = items[i].n;
        p.status = std::string("error: ") + e.what();
        try {
          p.target = target_at(cfg, items[i].param);
        } catch (...) {
        }
        rep.points[i] = p;
      }
    }
  };
  if (nw <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // single-threaded assembly
  std::string csv;
  const auto header = csv_header(cfg.task);
  for (size_t i = 0; i < header.size(); ++i) csv += (i ? "," : "") + header[i];
  csv += "\n";
  for (const PointRecord& p : rep.points) csv += csv_row(cfg, p) + "\n";
  rep.csv_path = rep.dir + "/results.csv";
  write_file(rep.csv_path, csv);

  json j;
  j["version"] = rep.version;
  j["config_hash"] = rep.config_hash;
  j["config"] = config_json(cfg);
  j["points"] = json::array();
  for (const PointRecord& p : rep.points) j["points"].push_back(point_json(p));
  rep.report_path = rep.dir + "/report.json";
  write_file(rep.report_path, j.dump(2) + "\n");
  return rep;
}

ExperimentReport load_report(const std::string& path) {
  ExperimentReport rep;
  try {
    json j = json::parse(read_file(path));
    rep.version = j.at("version").get<std::string>();
    rep.config_hash = j.at("config_hash").get<std::string>();
    rep.config = config_from_json(j.at("config"));
    for (const json& p : j.at("points")) rep.points.push_back(point_from_json(p));
  } catch (const json::exception& e) {
    throw Error("corrupt report " + path + ": " + e.what());
  }
  rep.report_path = path;
  rep.dir = fs::path(path).parent_path().string();
  if (rep.dir.empty()) rep.dir = ".";
  rep.csv_path = rep.dir + "/results.csv";
  return rep;
}

std::vector<std::string> VerifySummary::failures() const {
  std::vector<std::string> out;
  for (const VerifyCheck& c : checks)
    if (!c.pass) out.push_back(c.invariant + " (point " + std::to_string(c.point) + "): " + c.detail);
  return out;
}

VerifySummary verify(const std::string& report_path, double tol) {
  VerifySummary s;
  auto check = [&](const std::string& name, int point, bool pass, const std::string& detail = "") {
    s.checks.push_back({name, point, pass, detail});
    s.pass = s.pass && pass;
  };
  auto agree = [&](const std::string& name, int point, double stored, double recomputed) {
    const bool ok = std::abs(stored - recomputed) <= tol * std::max(1.0, std::abs(stored));
    check(name, point, ok, "stored " + fmt17(stored) + " recomputed " + fmt17(recomputed));
  };

  ExperimentReport rep;
  try {
    rep = load_report(report_path);
  } catch (const std::exception& e) {
    check("report_readable", -1, false, e.what());
    return s;
  }
  check("report_readable", -1, true);
  const ExperimentConfig& cfg = rep.config;
  check("config_hash", -1, config_hash(cfg) == rep.config_hash, "stored " + rep.config_hash);
  const std::vector<WorkItem> items = work_items(cfg);
  check("point_count", -1, items.size() == rep.points.size());

  for (int i = 0; i < static_cast<int>(rep.points.size()); ++i) {
    const PointRecord& p = rep.points[i];
    if (p.status != "ok") {
      check("point_status", i, true, p.status);  // recorded failure, nothing to re-verify
      continue;
    }
    try {
      check("target", i, p.target == target_at(cfg, p.param));
      const std::string ckpt = p.checkpoint.empty() ? "" : rep.dir + "/" + p.checkpoint;
      switch (cfg.task) {
        case Task::upper_state:
        case Task::upper_channel: {
          ExtensionProblem prob = extension_problem(cfg, p.target);
          agree("hashing_agreement", i, p.hashing, hashing_of(prob));
          UpperEval base = evaluate_unextended(prob);
          agree("unextended_bound_agreement", i, p.bound_unextended, base.bound);
          UpperEval best = base;
          if (!ckpt.empty()) {
            Mat v = load_matrix(ckpt);
            const bool shape = v.rows() == prob.flag_dim * prob.env_dim && v.cols() == prob.e_dim;
            check("checkpoint_shape", i, shape);
            if (!shape) break;
            const double defect = isometry_defect(v);
            check("checkpoint_isometry", i, defect <= 1e-8, "defect " + fmt17(defect));
            UpperEval ext = evaluate_extension(prob, v);
            if (ext.bound < best.bound) best = ext;
          }
          agree("bound_agreement", i, p.bound_optimized, best.bound);
          agree("epsilon_agreement", i, p.epsilon, best.epsilon);
          check("bound_ge_hashing", i, p.bound_optimized >= p.hashing - tol);
          check("bound_le_unextended", i, p.bound_optimized <= p.bound_unextended + tol);
          break;
        }
        case Task::lower_state: {
          Mat u = load_matrix(ckpt);
          const double defect = isometry_defect(u);
          check("checkpoint_unitarity", i, u.rows() == u.cols() && defect <= 1e-8, "defect " + fmt17(defect));
          const DensityOperator big = regroup_copies(parse_state_spec(p.target), p.n);
          agree("rate_agreement", i, p.rate, -coh_state_cost(big, {u, cfg.m_dim}) / p.n);
          const double id_cost = coh_state_cost(big, {Mat::Identity(u.rows(), u.cols()), cfg.m_dim});
          agree("baseline_agreement", i, p.baseline_rate, -id_cost / p.n);
          check("rate_ge_baseline", i, p.rate >= p.baseline_rate - tol);
          break;
        }
        case Task::lower_channel:
        case Task::amortization_check: {
          AnsatzParam a = load_ansatz(ckpt);
          double worst = 0.0;
          for (const Mat& u : a.u_list) worst = std::max(worst, isometry_defect(u));
          check("checkpoint_unitarity", i, worst <= 1e-8, "defect " + fmt17(worst));
          const ChannelRep ch = channel_of(p.target);
          const int n = cfg.task == Task::lower_channel ? p.n : 1;
          check("checkpoint_shape", i, a.n_copies == n && a.a_dim == ch.in_dim());
          const double rate = -coh_channel_cost(ch, a) / n;
          if (cfg.task == Task::lower_channel) {
            agree("rate_agreement", i, p.rate, rate);
            agree("baseline_agreement", i, p.baseline_rate, coherent_information_state(choi_state(ch), {0}));
          } else {
            agree("ic_agreement", i, p.ic, rate);
            agree("max_gap_agreement", i, p.max_gap, sampled_max_gap(ch, cfg.samples, cfg.seed));
            agree("margin_agreement", i, p.margin, p.ic - p.max_gap);
            check("amortization_margin", i, p.margin >= -1e-6, "margin " + fmt17(p.margin));
          }
          break;
        }
      }
    } catch (const std::exception& e) {
      check("recompute", i, false, e.what());
    }
  }
  return s;
}

double sampled_max_gap(const ChannelRep& ch, int samples, std::uint64_t seed) {
  const int d = ch.in_dim();
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    // cycle through: both full rank, pure ρ, σ a mixture away from ρ, and
    // σ = ρ pure (gap = I_c(ρ_A, N), the extreme case)
    Mat rho, sigma;
    switch (i % 4) {
      case 0:
        rho = random_density(d * d, rng);
        sigma = random_density(d * d, rng);
        break;
      case 1: {
        Vec v = random_pure(d * d, rng);
        rho = v * v.adjoint();
        sigma = random_density(d * d, rng);
        break;
      }
      case 3: {
        Vec v = random_pure(d * d, rng);
        rho = sigma = v * v.adjoint();
        break;
      }
      default: {
        rho = random_density(d * d, rng);
        const double t = unif(rng);
        sigma = (1.0 - t) * rho + t * random_density(d * d, rng);
        break;
      }
    }
    const double g = amortized_gap(ch, DensityOperator(hermitian_part(rho), {d, d}),
                                   DensityOperator(hermitian_part(sigma), {d, d}));
    if (std::isfinite(g)) best = std::max(best, g);
  }
  return best;
}

AmortizationReport amortization_check(const ChannelRep& ch, int samples, std::uint64_t seed, int restarts) {
  if (samples < 1) throw Error("amortization_check needs samples >= 1");
  CodeStateConfig cc;
  cc.restarts = restarts;
  cc.seed = seed;
  cc.rgd.keep_trace = false;
  CodeStateResult r = optimize_code_state(ch, 1, ch.in_dim(), cc);
  AmortizationReport rep;
  rep.ic = r.rate;
  rep.code = r.best;
  rep.samples = samples;
  rep.max_gap = sampled_max_gap(ch, samples, seed);
  rep.margin = rep.ic - rep.max_gap;
  return rep;
}

void save_ansatz(const std::string& path, const AnsatzParam& p) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  const Dims dims = ansatz_site_dims(p.r_dim, p.a_dim, p.n_copies);
  const std::vector<int> pairs = ansatz_pairs(p.n_copies);
  if (pairs.size() != p.u_list.size()) throw Error("save_ansatz: u_list length mismatch");
  for (size_t k = 0; k < p.u_list.size(); ++k) {
    f << k << ' ' << dims[pairs[k]] << ' ' << dims[pairs[k] + 1] << '\n';
    write_matrix(f, p.u_list[k]);
  }
}

AnsatzParam load_ansatz(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  AnsatzParam p;
  std::vector<std::pair<int, int>> dims;
  long k, l, r;
  while (f >> k >> l >> r) {
    if (k != static_cast<long>(p.u_list.size()) || l < 1 || r < 1) throw Error("u_list: bad block header");
    Mat u = read_matrix(f);
    if (u.rows() != l * r || u.cols() != l * r) throw Error("u_list: block size does not match its header");
    p.u_list.push_back(u);
    dims.emplace_back(static_cast<int>(l), static_cast<int>(r));
  }
  if (!f.eof()) throw Error("u_list: trailing garbage");
  if (p.u_list.empty() || p.u_list.size() % 2 == 0) throw Error("u_list: need 2n-1 blocks");
  p.n_copies = static_cast<int>(p.u_list.size() + 1) / 2;
  p.r_dim = dims[0].first;
  p.a_dim = dims[0].second;
  const Dims site = ansatz_site_dims(p.r_dim, p.a_dim, p.n_copies);
  const std::vector<int> pairs = ansatz_pairs(p.n_copies);
  for (size_t i = 0; i < pairs.size(); ++i)
    if (dims[i].first != site[pairs[i]] || dims[i].second != site[pairs[i] + 1])
      throw Error("u_list: block dims inconsistent with the ansatz");
  return p;
}

}  // namespace qcapgeo
