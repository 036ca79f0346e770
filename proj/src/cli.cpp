#include "fbmlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "fbmlab/config.hpp"
#include "fbmlab/construct_fbm.hpp"
#include "fbmlab/eigen.hpp"
#include "fbmlab/errors.hpp"
#include "fbmlab/io.hpp"
#include "fbmlab/parallel.hpp"
#include "fbmlab/verify.hpp"

namespace fbmlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
};

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json versions() {
  return {{"fbmlab", kVersion},
          {"compiler", __VERSION__},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

config::ExperimentConfig load_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("this subcommand needs --config PATH");
  json j = config::load_file(g.config);
  if (!j.contains("name")) j["name"] = fs::path(g.config).stem().string();
  if (g.seed) j["seed"] = *g.seed;
  return config::from_json(j);
}

fs::path out_root(const Globals& g, const std::optional<std::string>& from_config) {
  if (!g.out.empty()) return g.out;
  if (from_config) return *from_config;
  if (const char* env = std::getenv("FBMLAB_OUT"); env && *env) return env;
  return "fbmlab_out";
}

void write_manifest(const fs::path& dir, json m) {
  m["timestamp"] = timestamp();
  m["versions"] = versions();
  io::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

json base_manifest(const std::string& kind, const config::ExperimentConfig& c) {
  const json eff = c.to_json();
  return {{"kind", kind}, {"name", c.name}, {"seed", c.seed}, {"config", eff},
          {"config_hash", config::config_hash(eff)}};
}

std::string index_name(std::int64_t i, std::int64_t n) {
  const auto width = std::max<std::size_t>(4, std::to_string(std::max<std::int64_t>(n - 1, 0)).size());
  std::string s = std::to_string(i);
  return std::string(width - std::min(width, s.size()), '0') + s;
}

// ---- simulate ----

int cmd_simulate(const Globals& g, std::ostream& out) {
  const auto c = load_config(g);
  if (c.sampler.empty()) throw ConfigError("simulate needs a 'sampler'");
  const PieceSpec spec = sampler_spec(c.sampler, c.params, c.dt);
  const fs::path dir = out_root(g, c.output_dir) / c.name;
  const RngStream root(c.seed, 0);
  const bool binary = c.format == "binary";
  auto results = parallel_map<std::string>(c.n_paths, g.threads, [&](std::int64_t i) -> std::string {
    TwoSidedPath p;
    try {
      p = concat_decomposable(spec, c.neg_pieces, c.pos_pieces, root.child(i));
    } catch (const SafetyCapError& e) {
      return std::string("!") + e.what();
    }
    const std::string file = "path_" + index_name(i, c.n_paths) + (binary ? ".bin" : ".csv");
    if (binary)
      io::write_two_sided_binary(dir / file, p);
    else
      io::write_two_sided_csv(dir / file, p);
    return file;
  });
  json m = base_manifest("simulate", c);
  m["sampler"] = c.sampler;
  json files = json::array(), failed = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].empty() && results[i][0] == '!')
      failed.push_back({{"index", i}, {"error", results[i].substr(1)}});
    else
      files.push_back(results[i]);
  }
  m["files"] = files;
  m["failed_paths"] = failed;
  fs::create_directories(dir);
  write_manifest(dir, m);
  out << "wrote " << files.size() << " paths to " << dir.string() << "\n";
  if (!failed.empty()) out << failed.size() << " paths hit the step cap (listed in manifest)\n";
  return 0;
}

// ---- eigen ----

double parse_bound(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
}

std::string eigen_row(double c1, double c2, double ode_step) {
  const auto r = eigen::lambda0(eigen::Interval{c1, c2}, ode_step);
  return io::fmt17(c1) + "," + io::fmt17(c2) + "," + io::fmt17(r.lambda0) + "," + io::fmt17(r.bisection_width) +
         "," + io::fmt17(r.ode_step) + "\n";
}

struct EigenArgs {
  std::string c1, c2;
  std::vector<double> grid;  // c1_lo c1_hi c2_lo c2_hi n
  bool cprime2 = false;
  double ode_step = 0.0;
};

int cmd_eigen(const Globals& g, EigenArgs a, std::ostream& out) {
  std::optional<config::ExperimentConfig> cfg;
  if (!g.config.empty()) {
    cfg = load_config(g);
    const json& e = cfg->eigen;
    if (a.c1.empty() && e.contains("c1")) a.c1 = io::fmt17(e["c1"].get<double>());
    if (a.c2.empty() && e.contains("c2")) a.c2 = io::fmt17(e["c2"].get<double>());
    if (a.grid.empty() && e.contains("grid")) a.grid = e["grid"].get<std::vector<double>>();
    a.cprime2 = a.cprime2 || e.value("cprime2", false);
    if (a.ode_step == 0.0) a.ode_step = e.value("ode_step", 0.0);
  }
  std::string csv;
  if (a.cprime2) {
    const double tol = 1e-8;
    csv = "cprime2,tolerance\n" + io::fmt17(eigen::find_cprime2(tol)) + "," + io::fmt17(tol) + "\n";
  } else {
    csv = "c1,c2,lambda0,bisection_width,ode_step\n";
    if (!a.grid.empty()) {
      if (a.grid.size() != 5 || a.grid[4] < 1 || a.grid[4] != std::floor(a.grid[4]))
        throw ConfigError("--grid expects c1_lo,c1_hi,c2_lo,c2_hi,n with integer n >= 1");
      const auto n = static_cast<int>(a.grid[4]);
      auto at = [n](double lo, double hi, int i) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };
      std::vector<std::pair<double, double>> cells;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double c1 = at(a.grid[0], a.grid[1], i), c2 = at(a.grid[2], a.grid[3], j);
          if (c1 < 0 && c2 > 0) cells.emplace_back(c1, c2);
        }
      auto rows = parallel_map<std::string>(static_cast<std::int64_t>(cells.size()), g.threads, [&](std::int64_t k) {
        return eigen_row(cells[static_cast<std::size_t>(k)].first, cells[static_cast<std::size_t>(k)].second,
                         a.ode_step);
      });
      for (const auto& r : rows) csv += r;
    } else {
      if (a.c1.empty() || a.c2.empty()) throw ConfigError("eigen needs --c1 and --c2, --grid, or --cprime2");
      csv += eigen_row(parse_bound(a.c1), parse_bound(a.c2), a.ode_step);
    }
  }
  out << csv;
  if (cfg || !g.out.empty()) {
    config::ExperimentConfig c = cfg.value_or(config::ExperimentConfig{});
    if (!cfg) {
      c.name = "eigen";
      c.seed = g.seed.value_or(0);
    }
    const fs::path dir = out_root(g, c.output_dir) / c.name;
    io::write_text(dir / "eigen.csv", csv);
    json m = base_manifest("eigen", c);
    m["files"] = {"eigen.csv"};
    m["plots"] = json::array({{{"type", "eigen"}, {"file", "eigen.csv"}}});
    write_manifest(dir, m);
  }
  return 0;
}

// ---- verify ----

const std::vector<std::string> kSuites{"forwardness", "bessel_marginal", "drift_curve", "lil_envelope"};

template <class T>
T param(const json& p, const char* key, T fallback) {
  if (!p.contains(key)) return fallback;
  try {
    return p.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("suite field '") + key + "' has the wrong type");
  }
}

std::string beta_tag(double b) {
  std::ostringstream os;
  os << b;
  return os.str();
}

struct VerifyArgs {
  std::vector<std::string> suites;
  bool negative_control = false;
};

int cmd_verify(const Globals& g, const VerifyArgs& a, std::ostream& out) {
  const auto c = load_config(g);
  std::vector<std::string> suites = a.suites.empty() ? c.suites : a.suites;
  if (suites.empty()) {
    suites = {"forwardness"};
    if (c.sampler == "bessel_example") suites.push_back("bessel_marginal");
  }
  for (const auto& s : suites)
    if (std::find(kSuites.begin(), kSuites.end(), s) == kSuites.end()) throw ConfigError("unknown suite '" + s + "'");
  const fs::path dir = out_root(g, c.output_dir) / c.name;
  const RngStream root(c.seed, 1);
  auto need_sampler = [&](const std::string& s) {
    if (c.sampler.empty()) throw ConfigError("suite '" + s + "' needs a 'sampler'");
    return sampler_spec(c.sampler, c.params, c.dt);
  };

  std::vector<TestReport> reports;
  json files = json::array(), plots = json::array();
  for (std::size_t si = 0; si < suites.size(); ++si) {
    const std::string& s = suites[si];
    const json p = c.suite_params.value(s, json::object());
    const double alpha = param(p, "alpha", c.alpha);
    const RngStream rs = root.child(static_cast<std::uint64_t>(si));
    if (s == "forwardness") {
      const PieceSpec spec = need_sampler(s);
      ForwardnessOptions o;
      o.alpha = alpha;
      o.lag = param(p, "lag", 1.0);
      o.dither = param(p, "dither", c.sampler == "skew_fbm");
      o.threads = g.threads;
      const auto n_paths = param<std::int64_t>(p, "n_paths", 1000);
      const double horizon = param(p, "horizon", 4.0);
      if (a.negative_control || param(p, "negative_control", false)) {
        o.negative_control = true;
        reports.push_back(test_forwardness(spec, 0, n_paths, horizon, rs, o));
      } else {
        const auto bs = param(p, "boundaries", std::vector<std::int64_t>{-1, -2});
        for (std::size_t b = 0; b < bs.size(); ++b)
          reports.push_back(test_forwardness(spec, bs[b], n_paths, horizon, rs.child(b), o));
      }
    } else if (s == "bessel_marginal") {
      const double t = param(p, "t", 1.0);
      const auto n = param<std::int64_t>(p, "n", 10000);
      const PieceSpec spec = sampler_spec("bessel_example", c.params, c.dt);
      auto xs = parallel_map<double>(n, g.threads, [&](std::int64_t i) {
        try {
          return backward_window(spec, t, rs.child(i)).values.front();
        } catch (const SafetyCapError&) {
          return std::numeric_limits<double>::quiet_NaN();
        }
      });
      const auto capped = std::erase_if(xs, [](double x) { return std::isnan(x); });
      auto r = bessel3_marginal_test(xs, t, alpha);
      if (capped > 0) r.notes = "samples dropped at the step cap: " + std::to_string(capped);
      reports.push_back(r);
    } else if (s == "drift_curve") {
      const auto betas = param(p, "betas", std::vector<double>{-1.0, 0.0, 1.0});
      const auto ts = param(p, "ts", std::vector<double>{0.5, std::numbers::pi / 2, 4.0});
      const auto n_paths = param<std::int64_t>(p, "n_paths", 2000);
      for (std::size_t b = 0; b < betas.size(); ++b) {
        const auto curve = drift_curve(betas[b], ts, n_paths, rs.child(b), c.dt, g.threads);
        const std::string file = "drift_beta_" + beta_tag(betas[b]) + ".csv";
        io::write_text(dir / file, io::drift_csv(curve));
        files.push_back(file);
        plots.push_back({{"type", "drift"}, {"file", file}, {"beta", betas[b]}});
        std::vector<TestReport> parts;
        for (const auto& r : curve) {
          const double z = (r.estimate - r.theory) / r.std_error;
          const double pv = std::erfc(std::abs(z) / std::numbers::sqrt2);
          parts.push_back(TestReport{"t=" + beta_tag(r.t), z, pv, pv > alpha, n_paths, {}});
        }
        reports.push_back(holm("drift_curve@beta=" + beta_tag(betas[b]), parts, alpha));
      }
    } else if (s == "lil_envelope") {
      const PieceSpec spec = need_sampler(s);
      auto res = lil_envelope(spec, param<std::int64_t>(p, "horizon", 10000), param<std::int64_t>(p, "n_paths", 100),
                              rs, param(p, "threshold", 1.1), param(p, "required_fraction", 0.95), g.threads);
      std::string csv = "path,max_ratio\n";
      for (std::size_t i = 0; i < res.max_ratio.size(); ++i) csv += std::to_string(i) + "," + io::fmt17(res.max_ratio[i]) + "\n";
      io::write_text(dir / "lil_max_ratio.csv", csv);
      files.push_back("lil_max_ratio.csv");
      plots.push_back({{"type", "envelope"}, {"file", "lil_max_ratio.csv"}});
      reports.push_back(res.report);
    }
  }
  const bool ok = std::all_of(reports.begin(), reports.end(), [](const TestReport& r) { return r.pass; });
  const std::string table = report_table(reports);
  io::write_text(dir / "reports.json", io::reports_json(reports).dump(2) + "\n");
  io::write_text(dir / "reports.txt", table);
  files.push_back("reports.json");
  files.push_back("reports.txt");
  json m = base_manifest("verify", c);
  m["sampler"] = c.sampler;
  m["suites"] = suites;
  m["reports"] = io::reports_json(reports);
  m["pass"] = ok;
  m["files"] = files;
  m["plots"] = plots;
  write_manifest(dir, m);
  out << table << (ok ? "all tests passed\n" : "verification FAILED\n");
  return ok ? 0 : 1;
}

// ---- report ----

std::string envelope_histogram(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  std::map<int, std::int64_t> bins;
  while (std::getline(is, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError("malformed envelope file");
    const double r = std::stod(line.substr(comma + 1));
    if (!std::isfinite(r)) continue;
    ++bins[static_cast<int>(std::floor(r / 0.1))];
  }
  std::string out = "bin_lo,bin_hi,count\n";
  for (const auto& [b, n] : bins)
    out += io::fmt17(b * 0.1) + "," + io::fmt17((b + 1) * 0.1) + "," + std::to_string(n) + "\n";
  return out;
}

int cmd_report(const Globals& g, const std::string& dir_arg, std::ostream& out) {
  const fs::path dir = dir_arg.empty() ? out_root(g, std::nullopt) : fs::path(dir_arg);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("report: '" + dir.string() + "' is not a readable directory");
  std::vector<fs::path> manifests;
  for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec))
    if (it->is_regular_file() && it->path().filename() == "manifest.json") manifests.push_back(it->path());
  if (ec) throw IoError("report: cannot scan '" + dir.string() + "': " + ec.message());
  std::sort(manifests.begin(), manifests.end());

  struct Entry {
    std::string name, kind, hash, status;
    fs::path where;
    json m;
  };
  std::vector<Entry> entries;
  std::map<std::string, std::set<std::string>> hashes;
  for (const auto& f : manifests) {
    json m;
    try {
      m = json::parse(io::read_text(f));
    } catch (const json::exception& e) {
      throw IoError("report: cannot parse " + f.string() + ": " + e.what());
    }
    Entry e{m.value("name", "?"), m.value("kind", "?"), m.value("config_hash", "?"), "-", f.parent_path(), m};
    if (m.contains("pass")) e.status = m["pass"].get<bool>() ? "pass" : "FAIL";
    hashes[e.name].insert(e.hash);
    entries.push_back(std::move(e));
  }

  std::ostringstream sum;
  sum << "runs: " << entries.size() << "\n";
  for (const auto& e : entries) {
    const bool conflict = hashes[e.name].size() > 1;
    sum << e.name << "  " << e.kind << "  " << e.hash << "  " << e.status << "  "
        << fs::relative(e.where, dir, ec).string() << (conflict ? "  CONFLICT: same name, different config hash" : "")
        << "\n";
    if (e.m.contains("reports")) {
      std::vector<TestReport> rs;
      for (const auto& r : e.m["reports"]) rs.push_back(TestReport::from_json(r));
      std::istringstream t(report_table(rs));
      for (std::string line; std::getline(t, line);) sum << "    " << line << "\n";
    }
    for (const auto& p : e.m.value("plots", json::array())) {
      const std::string file = p.at("file").get<std::string>();
      const std::string data = io::read_text(e.where / file);
      const std::string type = p.value("type", "data");
      const std::string stem = e.name + "_" + e.hash.substr(0, 8) + "_";
      if (type == "envelope")
        io::write_text(dir / "plots" / (stem + "envelope_hist.csv"), envelope_histogram(data));
      else
        io::write_text(dir / "plots" / (stem + file), data);
    }
  }
  io::write_text(dir / "summary.txt", sum.str());
  out << sum.str();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fbmlab: forward Brownian motion samplers, eigenvalues and verification"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Experiment config (TOML subset)");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed, overrides the config");
  app.add_option("--threads", g.threads, "Worker threads (outputs do not depend on it)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");

  auto* sim = app.add_subcommand("simulate", "Sample paths and write them with a manifest");
  auto* eig = app.add_subcommand("eigen", "Principal eigenvalue table");
  EigenArgs ea;
  eig->add_option("--c1", ea.c1, "Left end (may be -inf)");
  eig->add_option("--c2", ea.c2, "Right end (may be inf)");
  eig->add_option("--grid", ea.grid, "c1_lo,c1_hi,c2_lo,c2_hi,n")->delimiter(',')->expected(5);
  eig->add_flag("--cprime2", ea.cprime2, "Root of the closed-form eigenfunction");
  eig->add_option("--ode-step", ea.ode_step, "RK4 step (default 1e-4 of the width)");
  auto* ver = app.add_subcommand("verify", "Run verification suites");
  VerifyArgs va;
  ver->add_option("--suite", va.suites, "Suite to run (repeatable)");
  ver->add_flag("--negative-control", va.negative_control, "Forwardness on backward increments; must fail");
  auto* rep = app.add_subcommand("report", "Merge manifests under a directory");
  std::string rep_dir;
  rep->add_option("dir", rep_dir, "Directory to scan");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) g.seed = seed;
  set_default_threads(g.threads);
  try {
    if (*sim) return cmd_simulate(g, out);
    if (*eig) return cmd_eigen(g, ea, out);
    if (*ver) return cmd_verify(g, va, out);
    if (*rep) return cmd_report(g, rep_dir, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace fbmlab
