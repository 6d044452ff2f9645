#include "structrl/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace structrl {

std::string fixed(double x, int decimals) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // no "-0.000"
  char buf[64];
  const int len = std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  std::string s(buf, static_cast<std::size_t>(len));
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    out << r.n << ',' << fixed(r.cum_step, 6) << ',' << fixed(r.sigma_exact) << ',' << fixed(r.sigma_empirical) << ','
        << fixed(r.threshold, 8) << ',' << r.ops << '\n';
  }
}

namespace {
std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}
}  // namespace

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

void CsvTable::write(const std::filesystem::path& path) const {
  auto out = open_out(path);
  write(out);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace structrl
