#include "distillery/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace distillery {

std::string format_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string sweep_to_csv(const std::vector<SweepRecord>& rows) {
  std::ostringstream os;
  os << "p,n,v_ed,v_nd,p_succ,delta\n";
  for (const SweepRecord& r : rows) {
    os << format_number(r.p) << "," << r.copies << "," << format_number(r.v_ed)
       << "," << format_number(r.v_nd) << "," << format_number(r.p_succ) << ","
       << format_number(r.delta) << "\n";
  }
  return os.str();
}

std::string sweep_to_json(const std::vector<SweepRecord>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SweepRecord& r : rows) {
    arr.push_back({{"p", r.p},
                   {"n", r.copies},
                   {"v_ed", r.v_ed},
                   {"v_nd", r.v_nd},
                   {"p_succ", r.p_succ},
                   {"delta", r.delta}});
  }
  return arr.dump(2) + "\n";
}

namespace {

struct Frame {
  double x0 = 90, y0 = 40, x1 = 760, y1 = 540;  // plot area in the viewBox
  double p_min, p_max, v_min, v_max;

  double px(double p) const { return x0 + (p - p_min) / (p_max - p_min) * (x1 - x0); }
  double py(double v) const { return y1 - (v - v_min) / (v_max - v_min) * (y1 - y0); }
};

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void polyline(std::ostringstream& os, const Frame& f,
              const std::vector<SweepRecord>& rows, bool ed,
              const char* color) {
  os << "  <polyline fill=\"none\" stroke=\"" << color
     << "\" stroke-width=\"2\" points=\"";
  for (const SweepRecord& r : rows)
    os << coord(f.px(r.p)) << "," << coord(f.py(ed ? r.v_ed : r.v_nd)) << " ";
  os << "\"/>\n";
}

}  // namespace

std::string sweep_to_svg(const std::vector<SweepRecord>& rows,
                         const std::string& title) {
  Frame f;
  f.p_min = rows.front().p;
  f.p_max = rows.back().p;
  f.v_min = 2.0;
  f.v_max = kTsirelsonBound;
  for (const SweepRecord& r : rows) {
    f.v_min = std::min({f.v_min, r.v_ed, r.v_nd});
    f.v_max = std::max({f.v_max, r.v_ed, r.v_nd});
  }

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\">\n";
  os << "  <rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  os << "  <text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << title << "</text>\n";
  // axes
  os << "  <line x1=\"" << coord(f.x0) << "\" y1=\"" << coord(f.y1) << "\" x2=\""
     << coord(f.x1) << "\" y2=\"" << coord(f.y1)
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "  <line x1=\"" << coord(f.x0) << "\" y1=\"" << coord(f.y0) << "\" x2=\""
     << coord(f.x0) << "\" y2=\"" << coord(f.y1)
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  // p ticks every 0.05
  const double first_tick = std::ceil(f.p_min / 0.05 - 1e-9) * 0.05;
  for (double t = first_tick; t <= f.p_max + 1e-9; t += 0.05) {
    const double x = f.px(t);
    os << "  <line x1=\"" << coord(x) << "\" y1=\"" << coord(f.y1) << "\" x2=\""
       << coord(x) << "\" y2=\"" << coord(f.y1 + 6)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "  <text x=\"" << coord(x) << "\" y=\"" << coord(f.y1 + 22)
       << "\" text-anchor=\"middle\" font-size=\"12\">" << coord(t) << "</text>\n";
  }
  // value ticks every 0.1
  const double v_first = std::ceil(f.v_min / 0.1 - 1e-9) * 0.1;
  for (double t = v_first; t <= f.v_max + 1e-9; t += 0.1) {
    const double y = f.py(t);
    os << "  <line x1=\"" << coord(f.x0 - 6) << "\" y1=\"" << coord(y)
       << "\" x2=\"" << coord(f.x0) << "\" y2=\"" << coord(y)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "  <text x=\"" << coord(f.x0 - 10) << "\" y=\"" << coord(y + 4)
       << "\" text-anchor=\"end\" font-size=\"12\">" << coord(t) << "</text>\n";
  }
  polyline(os, f, rows, true, "#1f77b4");
  polyline(os, f, rows, false, "#d62728");
  os << "  <text x=\"650\" y=\"60\" font-size=\"13\" fill=\"#1f77b4\">v_ed</text>\n";
  os << "  <text x=\"650\" y=\"78\" font-size=\"13\" fill=\"#d62728\">v_nd</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string crossover_to_json(const CrossoverReport& report) {
  nlohmann::json j;
  j["n"] = report.copies;
  j["intervals"] = nlohmann::json::array();
  for (const CrossoverInterval& iv : report.intervals)
    j["intervals"].push_back({iv.lo, iv.hi});
  j["roots"] = report.roots;
  if (!report.note.empty()) j["note"] = report.note;
  return j.dump(2) + "\n";
}

}  // namespace distillery
