#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nspgds/grid.hpp"
#include "nspgds/model.hpp"

namespace nspgds::io {

// %.17g, enough digits for exact double round-trips.
std::string fmt17(double x);

// Comma-separated V x T nonnegative integer matrix. A non-numeric first line
// is treated as a header and skipped. Ragged rows and negative or non-integer
// cells raise std::runtime_error naming the offending row/column.
Grid<int64_t> load_counts(const std::string& path);

// Companion mask file: one zero-based "v,t" pair per line marking an
// unobserved cell. '#' comments and blank lines allowed.
Grid<uint8_t> load_mask(const std::string& path, int V, int T);

void save_counts_csv(const std::string& path, const Grid<int64_t>& counts);
void save_mask_csv(const std::string& path, const Grid<uint8_t>& mask);
void save_matrix_csv(const std::string& path, const Grid<double>& m);
Grid<double> load_matrix_csv(const std::string& path);

// key=value lines, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_config_file(const std::string& path);

struct MetricsRow {
  std::string task;
  std::string chain;
  uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

// Stable schema: header "task,chain,seed,metric,value", doubles at full
// precision so identical runs produce identical bytes.
std::string metrics_csv(const std::vector<MetricsRow>& rows);
void save_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Standalone SVG heatmap (one colored rect per matrix cell).
void write_heatmap_svg(const std::string& path, const Grid<double>& m,
                       const std::string& title);

}  // namespace nspgds::io
