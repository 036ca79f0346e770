#include "fbmlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "fbmlab/construct_fbm.hpp"
#include "fbmlab/errors.hpp"
#include "fbmlab/parallel.hpp"

namespace fbmlab {

namespace {

void need(std::size_t n, std::size_t min, const std::string& what) {
  if (n < min)
    throw InsufficientSampleError(what + ": need at least " + std::to_string(min) + " samples, got " +
                                  std::to_string(n));
}

double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

TestReport make(std::string name, double stat, double p, std::int64_t n, double alpha, std::string notes = {}) {
  p = std::clamp(p, 0.0, 1.0);
  return TestReport{std::move(name), stat, p, p > alpha, n, std::move(notes)};
}

int resolve_threads(int t) { return t > 0 ? t : default_threads(); }

}  // namespace

nlohmann::json TestReport::to_json() const {
  return {{"name", name}, {"statistic", statistic}, {"p_value", p_value},
          {"pass", pass},  {"n_samples", n_samples}, {"notes", notes}};
}

TestReport TestReport::from_json(const nlohmann::json& j) {
  return TestReport{j.at("name").get<std::string>(), j.at("statistic").get<double>(),
                    j.at("p_value").get<double>(),   j.at("pass").get<bool>(),
                    j.at("n_samples").get<std::int64_t>(), j.at("notes").get<std::string>()};
}

std::string report_table(const std::vector<TestReport>& reports) {
  std::size_t w = 4;
  for (const auto& r : reports) w = std::max(w, r.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w)) << "name" << "  " << std::setw(12) << "statistic" << "  "
     << std::setw(10) << "p_value" << "  " << std::setw(4) << "pass" << "  " << std::setw(10) << "n" << "  notes\n";
  for (const auto& r : reports) {
    os << std::left << std::setw(static_cast<int>(w)) << r.name << "  " << std::setw(12) << std::setprecision(6)
       << r.statistic << "  " << std::setw(10) << std::setprecision(4) << r.p_value << "  " << std::setw(4)
       << (r.pass ? "yes" : "NO") << "  " << std::setw(10) << r.n_samples << "  " << r.notes << "\n";
  }
  return os.str();
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Jacobi-transformed series, fast for small x.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) s += std::exp(-static_cast<double>((2 * k - 1) * (2 * k - 1)) * c);
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double chi_square_survival(double x, double dof) {
  require(dof > 0, "chi_square_survival: dof must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

double bessel3_cdf(double r, double t) {
  require(t > 0, "bessel3_cdf: t must be positive");
  if (r <= 0.0) return 0.0;
  const double x = r / std::sqrt(t);
  return std::erf(x / std::numbers::sqrt2) - std::sqrt(2.0 / std::numbers::pi) * x * std::exp(-0.5 * x * x);
}

TestReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                   const std::string& name, double alpha) {
  need(samples.size(), 20, "ks_test");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  const double p = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
  return make(name, d, p, static_cast<std::int64_t>(s.size()), alpha);
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, const std::string& name,
                         double alpha) {
  need(a.size(), 20, "ks_two_sample");
  need(b.size(), 20, "ks_two_sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = std::sqrt(nx * ny / (nx + ny));
  const double p = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
  return make(name, d, p, static_cast<std::int64_t>(x.size() + y.size()), alpha);
}

TestReport lag1_test(std::span<const double> x, std::span<const double> y, const std::string& name,
                     double alpha) {
  require(x.size() == y.size(), "lag1_test: size mismatch");
  need(x.size(), 20, "lag1_test");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return make(name, 0.0, 0.0, static_cast<std::int64_t>(n), alpha, "zero variance");
  const double rho = sxy / std::sqrt(sxx * syy);
  return make(name, rho, two_sided_normal_p(rho * std::sqrt(n)), static_cast<std::int64_t>(n), alpha);
}

TestReport runs_test(std::span<const std::int8_t> signs, const std::string& name, double alpha) {
  need(signs.size(), 20, "runs_test");
  double np = 0, nm = 0, runs = 1;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    (signs[i] > 0 ? np : nm) += 1;
    if (i > 0 && signs[i] != signs[i - 1]) runs += 1;
  }
  const double n = np + nm;
  const double mu = 2.0 * np * nm / n + 1.0;
  const double var = (mu - 1.0) * (mu - 2.0) / (n - 1.0);
  if (var <= 0) return make(name, runs, 0.0, static_cast<std::int64_t>(n), alpha, "single sign");
  const double z = (runs - mu) / std::sqrt(var);
  return make(name, z, two_sided_normal_p(z), static_cast<std::int64_t>(n), alpha);
}

TestReport chi_square_counts(std::span<const std::int64_t> counts, std::span<const double> probs,
                             const std::string& name, double alpha) {
  require(counts.size() == probs.size() && counts.size() >= 2, "chi_square_counts: need >= 2 matching cells");
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}));
  require(n > 0, "chi_square_counts: empty sample");
  double stat = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * probs[i];
    require(e > 0, "chi_square_counts: cell with zero expectation");
    stat += (static_cast<double>(counts[i]) - e) * (static_cast<double>(counts[i]) - e) / e;
  }
  const double p = chi_square_survival(stat, static_cast<double>(counts.size() - 1));
  return make(name, stat, p, static_cast<std::int64_t>(n), alpha);
}

TestReport holm(const std::string& name, const std::vector<TestReport>& parts, double alpha) {
  require(!parts.empty(), "holm: no sub-tests");
  const double m = static_cast<double>(parts.size());
  double p_min = 1.0;
  std::int64_t n = 0;
  std::ostringstream notes;
  for (const auto& r : parts) {
    p_min = std::min(p_min, r.p_value);
    n = std::max(n, r.n_samples);
    if (notes.tellp() > 0) notes << "; ";
    notes << r.name << " p=" << std::setprecision(4) << r.p_value;
  }
  // Holm rejects some hypothesis iff the smallest p is <= alpha / m.
  TestReport out{name, p_min, std::min(1.0, m * p_min), p_min > alpha / m, n,
                 "holm over " + std::to_string(parts.size()) + ": " + notes.str()};
  return out;
}

TestReport chi_square_coins(std::span<const std::int8_t> values, double alpha) {
  need(values.size(), 100, "chi_square_coins");
  std::int64_t up = 0;
  for (auto v : values) {
    require(v == 1 || v == -1, "chi_square_coins: values must be +-1");
    up += v > 0;
  }
  const std::int64_t counts[2] = {up, static_cast<std::int64_t>(values.size()) - up};
  const double probs[2] = {0.5, 0.5};
  return holm("coins", {chi_square_counts(counts, probs, "sign_counts", alpha), runs_test(values, "runs", alpha)},
              alpha);
}

TestReport bessel3_marginal_test(std::span<const double> samples, double t, double alpha) {
  require(t > 0, "bessel3_marginal_test: t must be positive");
  return ks_test(samples, [t](double r) { return bessel3_cdf(r, t); }, "bessel3_marginal", alpha);
}

TestReport test_forwardness(const PieceSpec& spec, std::int64_t n, std::int64_t n_paths, double horizon,
                            const RngStream& rng, const ForwardnessOptions& opts) {
  spec.validate();
  require(n_paths >= 1, "test_forwardness: n_paths must be >= 1");
  require(opts.lag > 0 && horizon >= opts.lag, "test_forwardness: need horizon >= lag > 0");
  const std::int64_t h = std::llround(opts.lag / spec.dt);
  require(h >= 1, "test_forwardness: lag shorter than dt");
  const std::int64_t lags = static_cast<std::int64_t>(std::floor(horizon / opts.lag + 1e-9));
  const double scale = 1.0 / std::sqrt(static_cast<double>(h) * spec.dt);

  struct One {
    std::vector<double> inc;
    bool capped = false;
  };
  auto results = parallel_map<One>(n_paths, resolve_threads(opts.threads), [&](std::int64_t i) {
    const RngStream s = rng.child(i);
    One o;
    Path w;
    try {
      w = opts.negative_control ? backward_window(spec, static_cast<double>(lags * h) * spec.dt, s)
                                : forward_window(spec, n, static_cast<double>(lags * h) * spec.dt, s);
    } catch (const SafetyCapError&) {
      o.capped = true;
      return o;
    }
    const auto& v = w.values;
    const auto last = static_cast<std::int64_t>(v.size()) - 1;
    RngCursor jitter(s, 0x6a17);
    for (std::int64_t j = 1; j <= lags; ++j) {
      double d = opts.negative_control ? v[last - j * h] - v[last - (j - 1) * h] : v[j * h] - v[(j - 1) * h];
      if (opts.dither) d += (2.0 * jitter.uniform() - 1.0) * std::sqrt(spec.dt);
      o.inc.push_back(d * scale);
    }
    return o;
  });

  std::vector<double> pooled, a, b;
  std::int64_t capped = 0;
  for (const auto& o : results) {
    capped += o.capped;
    pooled.insert(pooled.end(), o.inc.begin(), o.inc.end());
    for (std::size_t j = 1; j < o.inc.size(); ++j) {
      a.push_back(o.inc[j - 1]);
      b.push_back(o.inc[j]);
    }
  }
  const std::string tag = opts.negative_control ? "backward" : "S_" + std::to_string(n);
  std::vector<TestReport> parts{ks_test(pooled, normal_cdf, "ks_normal", opts.alpha)};
  if (a.size() >= 20) parts.push_back(lag1_test(a, b, "lag1", opts.alpha));
  auto r = holm("forwardness@" + tag, parts, opts.alpha);
  r.n_samples = static_cast<std::int64_t>(pooled.size());
  if (capped > 0) r.notes += "; paths hitting the step cap: " + std::to_string(capped);
  return r;
}

DriftCurve drift_curve(double beta, std::vector<double> ts, std::int64_t n_paths, const RngStream& rng, double dt,
                       int threads) {
  require(!ts.empty(), "drift_curve: no times");
  require(n_paths >= 2, "drift_curve: need at least 2 paths");
  std::sort(ts.begin(), ts.end());
  require(ts.front() > 0, "drift_curve: times must be positive");
  // durations are sums of excursion lengths, so a huge cap costs nothing
  const PieceSpec spec = skew_spec(SkewParams{beta, dt}, std::int64_t{1} << 60);
  const std::int64_t top = std::llround(ts.back() / dt);
  auto samples = parallel_map<std::vector<double>>(n_paths, resolve_threads(threads), [&](std::int64_t i) {
    const Path w = backward_window(spec, static_cast<double>(top) * dt, rng.child(i));
    const auto last = static_cast<std::int64_t>(w.values.size()) - 1;
    std::vector<double> row;
    for (double t : ts) row.push_back(w.values[static_cast<std::size_t>(last - std::llround(t / dt))]);
    return row;
  });
  DriftCurve out;
  const double n = static_cast<double>(n_paths);
  for (std::size_t j = 0; j < ts.size(); ++j) {
    double sum = 0, sq = 0;
    for (const auto& row : samples) sum += row[j];
    const double mean = sum / n;
    for (const auto& row : samples) sq += (row[j] - mean) * (row[j] - mean);
    const double se = std::sqrt(sq / (n - 1) / n);
    out.push_back({ts[j], mean, se > 0 ? se : std::numeric_limits<double>::min(),
                   2.0 * beta * std::sqrt(2.0 * ts[j] / std::numbers::pi)});
  }
  return out;
}

LilResult lil_envelope(const PieceSpec& spec, std::int64_t horizon, std::int64_t n_paths, const RngStream& rng,
                       double threshold, double required_fraction, int threads) {
  require(horizon >= 1000, "lil_envelope: horizon must be >= 1000 piece boundaries");
  require(n_paths >= 1, "lil_envelope: n_paths must be >= 1");
  ConcatOptions opts;
  opts.boundaries_only = true;
  std::int64_t capped = 0;
  auto ratios = parallel_map<double>(n_paths, resolve_threads(threads), [&](std::int64_t i) {
    TwoSidedPath p;
    try {
      p = concat_decomposable(spec, horizon, 0, rng.child(i), opts);
    } catch (const SafetyCapError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < p.boundaries.size(); ++k) {
      const double s = -static_cast<double>(p.boundaries[k]) * spec.dt;
      if (s <= 10.0) continue;
      best = std::max(best, p.boundary_values[k] / std::sqrt(2.0 * s * std::log(std::log(s))));
    }
    return best;
  });
  std::int64_t inside = 0, used = 0;
  for (double r : ratios) {
    if (std::isnan(r)) {
      ++capped;
      continue;
    }
    ++used;
    inside += r <= threshold;
  }
  const double frac = used > 0 ? static_cast<double>(inside) / static_cast<double>(used) : 0.0;
  const bool ok = used > 0 && frac >= required_fraction;
  std::ostringstream notes;
  notes << "finite-horizon relaxation of an almost-sure limsup bound: fraction of paths whose max of "
           "X(S_n)/sqrt(2|S_n| log log |S_n|) over |S_n| > 10 stays <= "
        << threshold << " (required " << required_fraction << "); p_value is 1 on pass, 0 on fail";
  if (capped > 0) notes << "; paths hitting the step cap: " << capped;
  LilResult out;
  out.report = TestReport{"lil_envelope", frac, ok ? 1.0 : 0.0, ok, used, notes.str()};
  for (double r : ratios)
    if (!std::isnan(r)) out.max_ratio.push_back(r);
  return out;
}

TestReport shifted_coins_values(const std::vector<std::vector<std::int8_t>>& heads, double alpha) {
  if (heads.size() < 20) {
    if (heads.size() <= 1) return TestReport{"shifted_coins", 0.0, 1.0, true, 0, "skipped: single seed"};
    throw InsufficientSampleError("shifted_coins_test: need at least 20 seeds, got " + std::to_string(heads.size()));
  }
  const std::size_t width = heads.front().size();
  require(width >= 1 && width <= 10, "shifted_coins_test: pattern width must be in [1, 10]");
  std::vector<std::int64_t> counts(std::size_t{1} << width, 0);
  std::vector<double> first, second;
  for (const auto& h : heads) {
    require(h.size() == width, "shifted_coins_test: ragged patterns");
    std::size_t code = 0;
    for (std::size_t j = 0; j < width; ++j) code = (code << 1) | (h[j] > 0 ? 1u : 0u);
    ++counts[code];
    if (width >= 2) {
      first.push_back(h[0]);
      second.push_back(h[1]);
    }
  }
  const std::vector<double> probs(counts.size(), 1.0 / static_cast<double>(counts.size()));
  std::vector<TestReport> parts{chi_square_counts(counts, probs, "patterns", alpha)};
  if (width >= 2) parts.push_back(lag1_test(first, second, "lag1", alpha));
  auto r = holm("shifted_coins", parts, alpha);
  r.n_samples = static_cast<std::int64_t>(heads.size());
  return r;
}

std::vector<std::int8_t> shifted_coins(const IncrementSeq& seq, std::int64_t level, int width) {
  require(level >= 1, "shifted_coins_test: level must be >= 1");
  require(static_cast<std::int64_t>(seq.levels.size()) >= level, "shifted_coins_test: level not built");
  const LevelRecord& rec = seq.levels[static_cast<std::size_t>(level - 1)];
  // V_k for k = S_{-n}, S_{-n} + 1, ...
  std::vector<std::int8_t> h;
  for (int j = 0; j < width; ++j) h.push_back(seq.at(rec.shifted_start() + j));
  return h;
}

TestReport shifted_coins_test(const std::vector<IncrementSeq>& seqs, std::int64_t level, int width, double alpha) {
  std::vector<std::vector<std::int8_t>> heads;
  for (const auto& s : seqs) heads.push_back(shifted_coins(s, level, width));
  return shifted_coins_values(heads, alpha);
}

}  // namespace fbmlab
