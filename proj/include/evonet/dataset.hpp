#ifndef EVONET_DATASET_HPP
#define EVONET_DATASET_HPP

#include "evonet/series.hpp"

#include <string>
#include <vector>

namespace evonet {

/// Whole file as a string; ValidationError when it cannot be opened.
std::string read_file(const std::string& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& text);

/// CSV with header series_id,t,dim_0..dim_{d-1}[,label]. Rows of one series are
/// contiguous with t increasing by one. Errors name the 1-based file line.
std::vector<Series> parse_csv(const std::string& text);
std::vector<Series> load_csv(const std::string& path);

/// Inverse of parse_csv; reals are written with 17 significant digits.
std::string format_csv(const std::vector<Series>& series);

}  // namespace evonet

#endif  // EVONET_DATASET_HPP
