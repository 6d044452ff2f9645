#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "structrl/learners.hpp"

namespace structrl {

/// Fixed-decimal rendering shared by every CSV the tools write.
std::string fixed(double x, int decimals = 10);

inline constexpr const char* kTraceHeader = "n,cum_step,sigma_exact,sigma_empirical,threshold,ops";

void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);

/// Minimal CSV table: header plus rows of already formatted cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(const std::filesystem::path& path) const;
  void write(std::ostream& out) const;
};

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace structrl
