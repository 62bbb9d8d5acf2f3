#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "quicfl/tables.hpp"

namespace quicfl::test {

// Receiver table for b=2, l=2, m=512, p=1/512 as printed to three digits.
inline QuantTable printed_table() {
  std::vector<double> r = {-5.48, -1.23,  0.164, 1.68,  //
                           -3.04, -0.831, 0.490, 2.18,  //
                           -2.18, -0.490, 0.831, 3.04,  //
                           -1.68, -0.164, 1.23,  5.48};
  return QuantTable(QuantConfig::make(2, 2, 512, Rational{1, 512}), r);
}

// Fresh directory under the system temp dir, removed by the destructor.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("quicfl_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace quicfl::test
