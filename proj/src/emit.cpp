#include "ivsensa/emit.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ivsensa {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& field) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument("curve csv: bad number '" + field + "'");
  return v;
}

}  // namespace

std::string render_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                       std::chars_format::general, 6);
  if (ec != std::errc()) throw std::runtime_error("number rendering failed");
  return std::string(buf, ptr);
}

std::string curve_to_csv(const SensitivityCurve& curve) {
  std::string out = "theta,lower,upper,feasible\n";
  for (const CurveRow& row : curve.rows) {
    out += render_number(row.theta);
    if (row.interval.feasible) {
      out += ',';
      out += render_number(row.interval.lower);
      out += ',';
      out += render_number(row.interval.upper);
      out += ",true\n";
    } else {
      out += ",,,false\n";
    }
  }
  return out;
}

std::string curve_to_json(const SensitivityCurve& curve) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    const CurveRow& row = curve.rows[i];
    out += "  {\"theta\":";
    out += render_number(row.theta);
    if (row.interval.feasible) {
      out += ",\"lower\":";
      out += render_number(row.interval.lower);
      out += ",\"upper\":";
      out += render_number(row.interval.upper);
      out += ",\"feasible\":true}";
    } else {
      out += ",\"lower\":null,\"upper\":null,\"feasible\":false}";
    }
    if (i + 1 < curve.rows.size()) out += ',';
    out += '\n';
  }
  out += "]\n";
  return out;
}

std::string render_curve(const SensitivityCurve& curve, EmitFormat format) {
  return format == EmitFormat::csv ? curve_to_csv(curve) : curve_to_json(curve);
}

SensitivityCurve parse_curve_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "theta,lower,upper,feasible")
    throw std::invalid_argument("curve csv: missing or wrong header");
  SensitivityCurve curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 4) throw std::invalid_argument("curve csv: wrong field count");
    CurveRow row;
    row.theta = parse_double(f[0]);
    if (f[3] == "true") {
      row.interval = IdentifiedInterval::of(parse_double(f[1]), parse_double(f[2]));
    } else if (f[3] == "false") {
      if (!f[1].empty() || !f[2].empty())
        throw std::invalid_argument("curve csv: infeasible row with bounds");
      row.interval = IdentifiedInterval::empty();
    } else {
      throw std::invalid_argument("curve csv: bad feasible flag '" + f[3] + "'");
    }
    curve.rows.push_back(row);
  }
  return curve;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << text;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw std::runtime_error("write failed for " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot move artifact into place at " + path);
  }
}

}  // namespace ivsensa
