#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <hjhomog/grid.hpp>
#include <hjhomog/models.hpp>
#include <hjhomog/vec.hpp>

namespace homog::testing {

// Fresh directory under the system temp root, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// Uniform sample grid of a scalar function of one variable.
inline SampledFunction sample_1d(double lo, double hi, int points,
                                 double (*f)(double)) {
  SampledFunction g;
  g.k = 1;
  g.lo = vec1(lo);
  g.hi = vec1(hi);
  g.points = {points, 1};
  g.values.resize(std::size_t(points));
  for (int i = 0; i < points; ++i)
    g.values[std::size_t(i)] = f(lo + (hi - lo) * double(i) / double(points - 1));
  return g;
}

}  // namespace homog::testing
