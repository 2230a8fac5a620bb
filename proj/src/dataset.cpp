#include "evonet/dataset.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace evonet {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t begin = 0;
  for (;;) {
    const size_t comma = line.find(',', begin);
    out.push_back(line.substr(begin, comma == std::string::npos ? std::string::npos : comma - begin));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  for (std::string& f : out) {
    while (!f.empty() && (f.back() == ' ' || f.back() == '\r')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return out;
}

[[noreturn]] void row_error(size_t line, const std::string& what) {
  throw ValidationError("csv row " + std::to_string(line) + ": " + what);
}

long long parse_int(const std::string& s, size_t line, const char* column) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    row_error(line, std::string("column '") + column + "' is not an integer: '" + s + "'");
  }
  return v;
}

Scalar parse_real(const std::string& s, size_t line, const std::string& column) {
  if (s.empty()) row_error(line, "column '" + column + "' is empty");
  char* end = nullptr;
  errno = 0;
  const Scalar v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    row_error(line, "column '" + column + "' is not a finite real: '" + s + "'");
  }
  return v;
}

std::string fmt17(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

std::vector<Series> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty file");
  const std::vector<std::string> header = split_fields(line);
  if (header.size() < 3 || header[0] != "series_id" || header[1] != "t") {
    throw ValidationError("csv row 1: header must start with series_id,t,dim_0");
  }
  const bool labeled = header.back() == "label";
  const size_t dims = header.size() - 2 - (labeled ? 1 : 0);
  if (dims < 1) throw ValidationError("csv row 1: missing column 'dim_0'");
  for (size_t k = 0; k < dims; ++k) {
    if (header[2 + k] != "dim_" + std::to_string(k)) {
      throw ValidationError("csv row 1: expected column 'dim_" + std::to_string(k) + "', got '" + header[2 + k] + "'");
    }
  }

  struct Builder {
    Series series;
    std::vector<std::vector<Scalar>> rows;
    long long last_t = 0;
  };
  std::vector<Builder> built;
  std::set<std::string> seen;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != header.size()) {
      row_error(line_no, "expected " + std::to_string(header.size()) + " columns, got " + std::to_string(f.size()));
    }
    if (f[0].empty()) row_error(line_no, "empty series_id");
    const long long t = parse_int(f[1], line_no, "t");
    if (built.empty() || built.back().series.id != f[0]) {
      if (!seen.insert(f[0]).second) row_error(line_no, "rows of series '" + f[0] + "' are not contiguous");
      built.push_back(Builder{});
      built.back().series.id = f[0];
      built.back().series.start = static_cast<Index>(t);
    } else {
      const long long last = built.back().last_t;
      if (t == last) row_error(line_no, "duplicate (series_id, t) = (" + f[0] + ", " + f[1] + ")");
      if (t != last + 1) {
        row_error(line_no, "t jumps from " + std::to_string(last) + " to " + f[1] + " in series '" + f[0] + "'");
      }
    }
    Builder& b = built.back();
    b.last_t = t;
    std::vector<Scalar> row(dims);
    for (size_t k = 0; k < dims; ++k) row[k] = parse_real(f[2 + k], line_no, header[2 + k]);
    b.rows.push_back(std::move(row));
    if (labeled) {
      const std::string& y = f.back();
      if (y != "0" && y != "1") row_error(line_no, "label must be 0 or 1, got '" + y + "'");
      b.series.labels.push_back(y == "1" ? 1 : 0);
    }
  }
  if (built.empty()) throw ValidationError("csv: no data rows");

  std::vector<Series> out;
  out.reserve(built.size());
  for (Builder& b : built) {
    b.series.values.resize(static_cast<Index>(b.rows.size()), static_cast<Index>(dims));
    for (size_t r = 0; r < b.rows.size(); ++r) {
      for (size_t c = 0; c < dims; ++c) b.series.values(static_cast<Index>(r), static_cast<Index>(c)) = b.rows[r][c];
    }
    out.push_back(std::move(b.series));
  }
  return out;
}

std::vector<Series> load_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string format_csv(const std::vector<Series>& series) {
  if (series.empty()) throw ValidationError("csv: nothing to write");
  const Index d = series.front().dim();
  const bool labeled = series.front().labeled();
  std::ostringstream out;
  out << "series_id,t";
  for (Index k = 0; k < d; ++k) out << ",dim_" << k;
  if (labeled) out << ",label";
  out << '\n';
  for (const Series& s : series) {
    if (s.dim() != d || s.labeled() != labeled) throw ValidationError("csv: series differ in layout");
    if (labeled && static_cast<Index>(s.labels.size()) != s.length()) {
      throw ValidationError("csv: series '" + s.id + "' has " + std::to_string(s.labels.size()) + " labels for " +
                            std::to_string(s.length()) + " rows");
    }
    for (Index r = 0; r < s.length(); ++r) {
      out << s.id << ',' << s.start + r;
      for (Index k = 0; k < d; ++k) out << ',' << fmt17(s.values(r, k));
      if (labeled) out << ',' << s.labels[static_cast<size_t>(r)];
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace evonet
