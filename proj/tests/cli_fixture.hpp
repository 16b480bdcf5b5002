#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"

namespace clifix {

namespace fs = std::filesystem;

struct Result {
  int status;
  std::string out, err;
};

inline Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = infwalk::cli::run(std::move(args), out, err);
  return {status, out.str(), err.str()};
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

/// Fresh scratch directory removed on destruction.
class Scratch {
 public:
  explicit Scratch(const std::string& tag) {
    root_ = fs::temp_directory_path() / ("infwalk-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;

  fs::path operator/(const std::string& name) const { return root_ / name; }
  const fs::path& root() const { return root_; }

  std::vector<fs::path> files() const {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root_))
      if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root_));
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  fs::path root_;
};

/// Edge-list text for a graph, one "u v w" line per edge.
inline std::string edge_text(const infwalk::Graph& g) {
  std::ostringstream s;
  infwalk::write_canonical_edges(s, g);
  return s.str();
}

}  // namespace clifix
