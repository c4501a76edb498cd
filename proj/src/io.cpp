#include "nspgds/io.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nspgds::io {

namespace {

void io_fail(const std::string& what) { throw std::runtime_error(what); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_int64(const std::string& tok, int64_t& out) {
  const std::string t = trim(tok);
  if (t.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (errno != 0 || end != t.c_str() + t.size()) return false;
  out = v;
  return true;
}

}  // namespace

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Grid<int64_t> load_counts(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open counts file: " + path);
  std::vector<std::vector<int64_t>> rows;
  std::string line;
  int lineno = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto toks = split_csv_line(line);
    std::vector<int64_t> row;
    row.reserve(toks.size());
    bool numeric = true;
    for (size_t c = 0; c < toks.size(); ++c) {
      int64_t v;
      if (!parse_int64(toks[c], v)) {
        if (first_data_line) {
          numeric = false;  // header row, skip it
          break;
        }
        io_fail(path + ": line " + std::to_string(lineno) + ", column " +
                std::to_string(c + 1) + ": not a nonnegative integer: '" +
                trim(toks[c]) + "'");
      }
      if (v < 0)
        io_fail(path + ": line " + std::to_string(lineno) + ", column " +
                std::to_string(c + 1) + ": negative count " + std::to_string(v));
      row.push_back(v);
    }
    if (!numeric) {
      first_data_line = false;
      continue;
    }
    first_data_line = false;
    if (!rows.empty() && row.size() != rows.front().size())
      io_fail(path + ": line " + std::to_string(lineno) + ": ragged row (" +
              std::to_string(row.size()) + " columns, expected " +
              std::to_string(rows.front().size()) + ")");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) io_fail(path + ": no data rows");
  Grid<int64_t> g(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int v = 0; v < g.rows(); ++v)
    for (int t = 0; t < g.cols(); ++t) g(v, t) = rows[v][t];
  return g;
}

Grid<uint8_t> load_mask(const std::string& path, int V, int T) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open mask file: " + path);
  Grid<uint8_t> mask(V, T, 1);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto toks = split_csv_line(t);
    int64_t v = -1, tt = -1;
    if (toks.size() != 2 || !parse_int64(toks[0], v) || !parse_int64(toks[1], tt))
      io_fail(path + ": line " + std::to_string(lineno) +
              ": expected 'v,t' zero-based pair");
    if (v < 0 || v >= V || tt < 0 || tt >= T)
      io_fail(path + ": line " + std::to_string(lineno) + ": cell (" +
              std::to_string(v) + "," + std::to_string(tt) + ") out of range");
    mask(static_cast<int>(v), static_cast<int>(tt)) = 0;
  }
  return mask;
}

void save_counts_csv(const std::string& path, const Grid<int64_t>& counts) {
  std::ofstream out(path);
  if (!out) io_fail("cannot write: " + path);
  for (int v = 0; v < counts.rows(); ++v) {
    for (int t = 0; t < counts.cols(); ++t) {
      if (t) out << ',';
      out << counts(v, t);
    }
    out << '\n';
  }
}

void save_mask_csv(const std::string& path, const Grid<uint8_t>& mask) {
  std::ofstream out(path);
  if (!out) io_fail("cannot write: " + path);
  out << "# zero-based v,t pairs of unobserved cells\n";
  for (int v = 0; v < mask.rows(); ++v)
    for (int t = 0; t < mask.cols(); ++t)
      if (!mask(v, t)) out << v << ',' << t << '\n';
}

void save_matrix_csv(const std::string& path, const Grid<double>& m) {
  std::ofstream out(path);
  if (!out) io_fail("cannot write: " + path);
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << fmt17(m(r, c));
    }
    out << '\n';
  }
}

Grid<double> load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open matrix file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto toks = split_csv_line(line);
    std::vector<double> row;
    for (const auto& tok : toks) row.push_back(std::strtod(tok.c_str(), nullptr));
    if (!rows.empty() && row.size() != rows.front().size())
      io_fail(path + ": ragged matrix");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) io_fail(path + ": empty matrix");
  Grid<double> g(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c) g(r, c) = rows[r][c];
  return g;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      io_fail(path + ": line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty())
      io_fail(path + ": line " + std::to_string(lineno) + ": empty key");
    kv[key] = val;
  }
  return kv;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << "task,chain,seed,metric,value\n";
  for (const auto& r : rows)
    os << r.task << ',' << r.chain << ',' << r.seed << ',' << r.metric << ','
       << fmt17(r.value) << '\n';
  return os.str();
}

void save_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  write_text_file(path, metrics_csv(rows));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) io_fail("cannot write: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail("cannot open: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

// Five-stop blue-to-yellow ramp, linear in cell value.
void ramp_color(double x, int& r, int& g, int& b) {
  static const int stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  x = std::min(std::max(x, 0.0), 1.0) * 4.0;
  const int i = std::min(static_cast<int>(x), 3);
  const double f = x - i;
  r = static_cast<int>(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]));
  g = static_cast<int>(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]));
  b = static_cast<int>(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]));
}

}  // namespace

void write_heatmap_svg(const std::string& path, const Grid<double>& m,
                       const std::string& title) {
  const int cell = 28, pad = 30;
  const int w = pad * 2 + cell * m.cols();
  const int h = pad * 2 + cell * m.rows();
  double lo = m(0, 0), hi = m(0, 0);
  for (const double& x : m.flat()) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\">\n";
  os << "<text x=\"" << pad << "\" y=\"" << pad - 10
     << "\" font-family=\"sans-serif\" font-size=\"12\">" << title << "</text>\n";
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      int cr, cg, cb;
      ramp_color((m(r, c) - lo) / span, cr, cg, cb);
      os << "<rect x=\"" << pad + c * cell << "\" y=\"" << pad + r * cell
         << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb("
         << cr << ',' << cg << ',' << cb << ")\"/>\n";
    }
  }
  os << "</svg>\n";
  write_text_file(path, os.str());
}

}  // namespace nspgds::io
