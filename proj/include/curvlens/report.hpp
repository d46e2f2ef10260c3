#pragma once
//
// Artifact writers: records as JSON and flattened CSV, minimal SVG line
// plots, and the run manifest.
//

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "curvlens/errors.hpp"

namespace curvlens::report {

using json = nlohmann::json;

inline constexpr const char* library_version = "0.1.0";

// FNV-1a, 64 bit
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// nlohmann::json keeps object keys sorted, so dump() is canonical
inline std::string config_hash(const json& config) { return hex64(fnv1a(config.dump())); }

struct Assertion {
  std::string name;
  int criterion = 0; // 0 for diagnostics outside the acceptance list
  double measured = 0.0;
  double threshold = 0.0;
  std::string comparison; // "<=", ">=", "within"
  double target = 0.0;    // centre for "within"
  bool passed = false;

  json to_json() const {
    json j{{"name", name}, {"measured", measured}, {"threshold", threshold}, {"comparison", comparison},
           {"passed", passed}};
    if (criterion > 0)
      j["criterion"] = criterion;
    if (comparison == "within")
      j["target"] = target;
    return j;
  }
};

inline Assertion at_most(std::string name, int criterion, double measured, double bound) {
  return {std::move(name), criterion, measured, bound, "<=", 0.0, measured <= bound};
}
inline Assertion at_least(std::string name, int criterion, double measured, double bound) {
  return {std::move(name), criterion, measured, bound, ">=", 0.0, measured >= bound};
}
inline Assertion within(std::string name, int criterion, double measured, double target, double tol) {
  return {std::move(name), criterion, measured, tol, "within", target, std::abs(measured - target) <= tol};
}

struct Stage {
  std::string name;
  double wall_seconds = 0.0;
  bool skipped = false;
  std::string reason;

  json to_json() const {
    json j{{"name", name}, {"wall_seconds", wall_seconds}, {"skipped", skipped}};
    if (!reason.empty())
      j["reason"] = reason;
    return j;
  }
};

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct Plot {
  std::string file;
  std::string title, xlabel, ylabel;
  bool logx = true, logy = true;
  std::vector<Series> series;
};

inline std::string csv_cell(const json& v) {
  if (v.is_null())
    return "";
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos)
      return s;
    std::string q = "\"";
    for (char c : s)
      q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(17) << v.get<double>();
    return os.str();
  }
  return v.dump();
}

// Union of keys, "stage" first, the rest sorted.
inline std::string records_csv(const std::vector<json>& records) {
  std::set<std::string> keys;
  for (const json& r : records)
    for (auto it = r.begin(); it != r.end(); ++it)
      if (it.key() != "stage")
        keys.insert(it.key());
  std::vector<std::string> cols{"stage"};
  cols.insert(cols.end(), keys.begin(), keys.end());
  std::ostringstream os;
  for (std::size_t i = 0; i < cols.size(); ++i)
    os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const json& r : records) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      os << (i ? "," : "");
      if (r.contains(cols[i]))
        os << csv_cell(r.at(cols[i]));
    }
    os << '\n';
  }
  return os.str();
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '&': out += "&amp;"; break;
    default: out += c;
    }
  }
  return out;
}

// Polyline plot with markers. Nonpositive values are dropped on log axes.
inline std::string svg_plot(const Plot& p) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 55;
  auto tx = [&](double v) { return p.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return p.logy ? std::log10(v) : v; };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!p.logx || x > 0) && (!p.logy || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Series& s : p.series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i]));
        y1 = std::max(y1, ty(s.y[i]));
      }
  if (!std::isfinite(x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double padx = 0.05 * (x1 - x0), pady = 0.08 * (y1 - y0);
  x0 -= padx;
  x1 += padx;
  y0 -= pady;
  y1 += pady;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << svg_escape(p.title)
     << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double gx = L + (W - L - R) * i / 4.0, gy = H - B - (H - T - B) * i / 4.0;
    const double vx = p.logx ? std::pow(10.0, fx) : fx, vy = p.logy ? std::pow(10.0, fy) : fy;
    os << "<text x=\"" << gx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << std::setprecision(3)
       << vx << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">" << vy << "</text>\n"
       << std::setprecision(6);
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
     << svg_escape(p.xlabel + (p.logx ? " (log)" : "")) << "</text>\n";
  os << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << svg_escape(p.ylabel + (p.logy ? " (log)" : "")) << "</text>\n";
  for (std::size_t si = 0; si < p.series.size(); ++si) {
    const Series& s = p.series[si];
    const char* c = colors[si % 6];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i]))
        os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i]))
        os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\" fill=\"" << c << "\"/>\n";
    os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (si + 1) << "\" text-anchor=\"end\" fill=\"" << c
       << "\">" << svg_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("cannot write " + path.string());
  f << text;
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f)
    throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

} // namespace curvlens::report
