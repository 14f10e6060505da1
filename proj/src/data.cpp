#include "ivsensa/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ivsensa {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const char* what, std::size_t lineno) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v))
    throw std::runtime_error("csv line " + std::to_string(lineno) + ": bad " +
                             std::string(what) + " value '" + s + "'");
  return v;
}

}  // namespace

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split_line(line);
  int iy = -1, ix = -1, iz = -1, iw = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") iy = static_cast<int>(c);
    else if (header[c] == "x") ix = static_cast<int>(c);
    else if (header[c] == "z") iz = static_cast<int>(c);
    else if (header[c] == "w") iw = static_cast<int>(c);
    else throw std::runtime_error("csv header has unknown column '" + header[c] + "'");
  }
  if (iy < 0 || ix < 0 || iz < 0)
    throw std::runtime_error("csv header must name columns y,x,z");

  Dataset out;
  out.has_weights = iw >= 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("csv line " + std::to_string(lineno) +
                               ": expected " + std::to_string(header.size()) + " fields");
    Observation obs;
    obs.y = parse_number(fields[static_cast<std::size_t>(iy)], "y", lineno);
    obs.x = fields[static_cast<std::size_t>(ix)];
    obs.z = fields[static_cast<std::size_t>(iz)];
    if (iw >= 0) {
      obs.w = parse_number(fields[static_cast<std::size_t>(iw)], "w", lineno);
      if (obs.w < 0.0)
        throw std::runtime_error("csv line " + std::to_string(lineno) + ": negative weight");
    }
    out.rows.push_back(std::move(obs));
  }
  if (out.rows.empty()) throw std::runtime_error("csv has no data rows: " + path);
  return out;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  out << (data.has_weights ? "y,x,z,w\n" : "y,x,z\n");
  char buf[64];
  for (const auto& r : data.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.y);
    out << buf << ',' << r.x << ',' << r.z;
    if (data.has_weights) {
      std::snprintf(buf, sizeof buf, "%.17g", r.w);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing csv file: " + path);
}

double empirical_quantile(const Dataset& data, double q) {
  if (data.rows.empty()) throw std::invalid_argument("quantile of empty dataset");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must be in (0,1)");
  std::vector<std::pair<double, double>> yw;
  yw.reserve(data.rows.size());
  double total = 0.0;
  for (const auto& r : data.rows) {
    yw.emplace_back(r.y, r.w);
    total += r.w;
  }
  if (total <= 0.0) throw std::invalid_argument("quantile with zero total weight");
  std::sort(yw.begin(), yw.end());
  double acc = 0.0;
  for (const auto& [y, w] : yw) {
    acc += w;
    if (acc >= q * total - 1e-12 * total) return y;
  }
  return yw.back().first;
}

DiscretizeResult discretize_outcome(const Dataset& data, double q) {
  auto [mn, mx] = std::minmax_element(data.rows.begin(), data.rows.end(),
                                      [](const auto& a, const auto& b) { return a.y < b.y; });
  if (data.rows.empty() || mn->y == mx->y)
    throw std::invalid_argument("cannot discretize a constant outcome");
  DiscretizeResult out;
  out.cut = empirical_quantile(data, q);
  out.data = data;
  for (auto& r : out.data.rows) r.y = (r.y <= out.cut) ? 1.0 : 0.0;
  return out;
}

RescaleResult rescale_outcome(const Dataset& data) {
  if (data.rows.empty()) throw std::invalid_argument("cannot rescale an empty dataset");
  double lo = data.rows.front().y, hi = lo;
  for (const auto& r : data.rows) {
    lo = std::min(lo, r.y);
    hi = std::max(hi, r.y);
  }
  RescaleResult out;
  out.data = data;
  if (lo >= 0.0 && hi <= 1.0) return out;  // already in the unit interval
  if (hi == lo) throw std::invalid_argument("cannot rescale a constant outcome");
  out.map = {lo, hi - lo};
  for (auto& r : out.data.rows) r.y = (r.y - lo) / (hi - lo);
  return out;
}

}  // namespace ivsensa
