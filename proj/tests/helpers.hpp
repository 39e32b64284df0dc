#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <ftlearn/ftlearn.hpp>

namespace testutil {

/// Self-cleaning scratch directory for file-based tests.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      auto candidate = base / ("ftlearn_test_" + std::to_string(rng()));
      if (std::filesystem::create_directory(candidate)) {
        path = candidate;
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline ftlearn::FailureColumn failure_col(std::vector<int> v) {
  ftlearn::FailureColumn f{"f", {}};
  for (int x : v) f.values.push_back(static_cast<std::uint8_t>(x));
  return f;
}

inline ftlearn::SensorColumn sensor_col(std::vector<double> v,
                                        std::string name = "s",
                                        ftlearn::Statistic st = ftlearn::Statistic::Min) {
  return ftlearn::SensorColumn{std::move(name), st, std::move(v)};
}

/// Boolean column from -1 (missing) / 0 / 1 entries.
inline ftlearn::BoolColumn bool_col(const std::vector<int>& v) {
  ftlearn::BoolColumn col(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0)
      col.set_missing(i);
    else
      col.set(i, v[i] != 0);
  }
  return col;
}

/// Balanced-dataset wrapper around a plain dataset, for modules that only
/// read the base table.
inline ftlearn::BalancedDataset wrap_balanced(ftlearn::Dataset d,
                                              std::string failure_name) {
  ftlearn::BalancedDataset b;
  b.base = std::move(d);
  b.failure_name = std::move(failure_name);
  return b;
}

}  // namespace testutil
