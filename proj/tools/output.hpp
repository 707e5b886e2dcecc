#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace robagg::cli {

// Run metadata written as comment lines at the top of every output file.
struct RunInfo {
  std::string version;
  std::uint64_t seed = 0;
  std::string command_line;
};

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const RunInfo& info, const std::string& header);
  template <typename... Ts>
  void row(const Ts&... fields) {
    std::ostringstream os;
    os.precision(12);
    bool first = true;
    ((os << (first ? "" : ",") << fields, first = false), ...);
    out_ << os.str() << '\n';
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Splits a CSV file into a header and rows; '#' lines and blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split(const std::string& text, char sep);

}  // namespace robagg::cli
