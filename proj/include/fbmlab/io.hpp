#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbmlab/construct_frw.hpp"
#include "fbmlab/path.hpp"
#include "fbmlab/verify.hpp"

namespace fbmlab::io {

namespace fs = std::filesystem;

// Shortest round-trip decimal (17 significant digits).
std::string fmt17(double x);

void write_text(const fs::path& file, const std::string& text);
std::string read_text(const fs::path& file);

// CSV `t,value`.
std::string path_csv(const Path& path);
void write_path_csv(const fs::path& file, const Path& path);
Path read_path_csv(const fs::path& file);

// "FBMPATH1", u64 n_steps, then n_steps + 1 little-endian doubles. The grid
// is not stored; pass it when reading.
void write_path_binary(const fs::path& file, const Path& path);
Path read_path_binary(const fs::path& file, double t0 = 0.0, double dt = 1.0);

// CSV `t,value,is_boundary`. Boundaries-only paths write one row per boundary.
std::string two_sided_csv(const TwoSidedPath& path);
void write_two_sided_csv(const fs::path& file, const TwoSidedPath& path);
// Path block as above, then "BOUNDARY", u64 origin_index, f64 dt, i64 first_rank,
// u64 count, count i64 indices and count f64 values.
void write_two_sided_binary(const fs::path& file, const TwoSidedPath& path);
TwoSidedPath read_two_sided_binary(const fs::path& file);

std::string walk_csv(const WalkPath& walk);

// One line per level `n a_n b_n c_n d_n`, a closing line `N+1 a_{N+1} b_{N+1} 0 0`,
// then the values from a_{N+1} to b_{N+1} as a string of '+' and '-'.
std::string increment_seq_text(const IncrementSeq& seq);
IncrementSeq parse_increment_seq(const std::string& text);

std::string drift_csv(const DriftCurve& curve);
nlohmann::json reports_json(const std::vector<TestReport>& reports);

}  // namespace fbmlab::io
