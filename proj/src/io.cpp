#include "fbmlab/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fbmlab/errors.hpp"

namespace fbmlab::io {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(std::string data, std::string name) : d_(std::move(data)), name_(std::move(name)) {}
  std::uint64_t u64() {
    if (pos_ + 8 > d_.size()) throw IoError(name_ + ": truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(d_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void magic(const char* m) {
    if (d_.compare(pos_, 8, m) != 0) throw IoError(name_ + ": bad magic, expected " + m);
    pos_ += 8;
  }
  bool done() const { return pos_ == d_.size(); }

 private:
  std::string d_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::string path_block(std::span<const double> values) {
  std::string out = "FBMPATH1";
  put_u64(out, values.empty() ? 0 : values.size() - 1);
  for (double v : values) put_f64(out, v);
  return out;
}

std::vector<double> read_path_block(Reader& r, const std::string& name) {
  r.magic("FBMPATH1");
  const std::uint64_t n = r.u64();
  if (n > (std::uint64_t{1} << 40)) throw IoError(name + ": implausible step count");
  std::vector<double> v(n + 1);
  for (auto& x : v) x = r.f64();
  return v;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw IoError(where + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::string fmt17(double x) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

void write_text(const fs::path& file, const std::string& text) {
  std::error_code ec;
  if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
  std::ofstream os(file, std::ios::binary);
  if (!os) throw IoError("cannot open '" + file.string() + "' for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("write to '" + file.string() + "' failed");
}

std::string read_text(const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw IoError("cannot read '" + file.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) throw IoError("read of '" + file.string() + "' failed");
  return ss.str();
}

std::string path_csv(const Path& path) {
  std::string out = "t,value\n";
  for (std::size_t i = 0; i < path.values.size(); ++i)
    out += fmt17(path.time(static_cast<std::int64_t>(i))) + "," + fmt17(path.values[i]) + "\n";
  return out;
}

void write_path_csv(const fs::path& file, const Path& path) { write_text(file, path_csv(path)); }

Path read_path_csv(const fs::path& file) {
  std::istringstream is(read_text(file));
  std::string line;
  if (!std::getline(is, line) || line != "t,value") throw IoError(file.string() + ": expected header t,value");
  std::vector<double> t, v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(file.string() + ": malformed row");
    t.push_back(parse_double(line.substr(0, comma), file.string()));
    v.push_back(parse_double(line.substr(comma + 1), file.string()));
  }
  if (v.empty()) throw IoError(file.string() + ": no rows");
  const double dt = t.size() > 1 ? (t.back() - t.front()) / static_cast<double>(t.size() - 1) : 1.0;
  const TimeGrid grid{t.front(), dt, static_cast<std::int64_t>(v.size()) - 1};
  return Path(grid, std::move(v));
}

void write_path_binary(const fs::path& file, const Path& path) { write_text(file, path_block(path.values)); }

Path read_path_binary(const fs::path& file, double t0, double dt) {
  Reader r(read_text(file), file.string());
  auto v = read_path_block(r, file.string());
  if (!r.done()) throw IoError(file.string() + ": trailing bytes");
  const TimeGrid grid{t0, dt, static_cast<std::int64_t>(v.size()) - 1};
  return Path(grid, std::move(v));
}

std::string two_sided_csv(const TwoSidedPath& p) {
  std::string out = "t,value,is_boundary\n";
  if (p.values.empty()) {
    for (std::size_t k = 0; k < p.boundaries.size(); ++k)
      out += fmt17(static_cast<double>(p.boundaries[k]) * p.dt) + "," + fmt17(p.boundary_values[k]) + ",1\n";
    return out;
  }
  std::size_t b = 0;
  while (b < p.boundaries.size() && p.boundaries[b] < 0) ++b;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    bool is_b = false;
    while (b < p.boundaries.size() && p.boundaries[b] == static_cast<std::int64_t>(i)) {
      is_b = true;
      ++b;
    }
    out += fmt17(p.time(static_cast<std::int64_t>(i))) + "," + fmt17(p.values[i]) + (is_b ? ",1\n" : ",0\n");
  }
  return out;
}

void write_two_sided_csv(const fs::path& file, const TwoSidedPath& path) { write_text(file, two_sided_csv(path)); }

void write_two_sided_binary(const fs::path& file, const TwoSidedPath& p) {
  std::string out = path_block(p.values);
  out += "BOUNDARY";
  put_u64(out, static_cast<std::uint64_t>(p.origin_index));
  put_f64(out, p.dt);
  put_u64(out, static_cast<std::uint64_t>(p.first_rank));
  put_u64(out, p.boundaries.size());
  for (auto b : p.boundaries) put_u64(out, static_cast<std::uint64_t>(b));
  for (auto v : p.boundary_values) put_f64(out, v);
  write_text(file, out);
}

TwoSidedPath read_two_sided_binary(const fs::path& file) {
  const std::string name = file.string();
  Reader r(read_text(file), name);
  TwoSidedPath p;
  p.values = read_path_block(r, name);
  r.magic("BOUNDARY");
  p.origin_index = static_cast<std::int64_t>(r.u64());
  p.dt = r.f64();
  p.first_rank = static_cast<std::int64_t>(r.u64());
  const std::uint64_t n = r.u64();
  if (n > (std::uint64_t{1} << 40)) throw IoError(name + ": implausible boundary count");
  p.boundaries.resize(n);
  p.boundary_values.resize(n);
  for (auto& b : p.boundaries) b = static_cast<std::int64_t>(r.u64());
  for (auto& v : p.boundary_values) v = r.f64();
  if (!r.done()) throw IoError(name + ": trailing bytes");
  return p;
}

std::string walk_csv(const WalkPath& w) {
  std::string out = "k,z\n";
  for (std::size_t i = 0; i < w.z.size(); ++i)
    out += std::to_string(w.first_index + static_cast<std::int64_t>(i)) + "," + std::to_string(w.z[i]) + "\n";
  return out;
}

std::string increment_seq_text(const IncrementSeq& s) {
  std::ostringstream os;
  for (const auto& r : s.levels) os << r.n << ' ' << r.a << ' ' << r.b << ' ' << r.c << ' ' << r.d << '\n';
  os << s.levels.size() + 1 << ' ' << s.first << ' ' << s.last() << " 0 0\n";
  for (auto v : s.values) os << (v > 0 ? '+' : '-');
  os << '\n';
  return os.str();
}

IncrementSeq parse_increment_seq(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::array<std::int64_t, 5>> rows;
  std::string values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    // level lines start with n >= 1
    if (line[0] == '+' || line[0] == '-') {
      values = line;
      break;
    }
    std::istringstream ls(line);
    std::array<std::int64_t, 5> r{};
    for (auto& x : r)
      if (!(ls >> x)) throw IoError("increment sequence: malformed level line '" + line + "'");
    rows.push_back(r);
  }
  if (rows.empty()) throw IoError("increment sequence: missing level lines");
  IncrementSeq s;
  s.first = rows.back()[1];
  for (char c : values) {
    if (c != '+' && c != '-') throw IoError("increment sequence: bad value character");
    s.values.push_back(c == '+' ? 1 : -1);
  }
  if (s.last() != rows.back()[2]) throw IoError("increment sequence: value count does not match range");
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    LevelRecord r;
    r.n = rows[i][0];
    r.a = rows[i][1];
    r.b = rows[i][2];
    r.c = rows[i][3];
    r.d = rows[i][4];
    r.ap = r.a - r.d;
    r.bp = r.b + r.d;
    r.next_a = rows[i + 1][1];
    r.next_b = rows[i + 1][2];
    s.levels.push_back(r);
  }
  return s;
}

std::string drift_csv(const DriftCurve& curve) {
  std::string out = "t,estimate,std_error,theory\n";
  for (const auto& r : curve)
    out += fmt17(r.t) + "," + fmt17(r.estimate) + "," + fmt17(r.std_error) + "," + fmt17(r.theory) + "\n";
  return out;
}

nlohmann::json reports_json(const std::vector<TestReport>& reports) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : reports) a.push_back(r.to_json());
  return a;
}

}  // namespace fbmlab::io
