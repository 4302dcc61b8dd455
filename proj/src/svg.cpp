#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "abcmc/harness.hpp"

namespace abcmc::svg {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 80.0, kRight = 40.0, kTop = 50.0, kBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string num(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

struct Doc {
  std::ostringstream body;

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0) {
    body << "<line x1='" << num(x1) << "' y1='" << num(y1) << "' x2='" << num(x2)
         << "' y2='" << num(y2) << "' stroke='" << stroke << "' stroke-width='"
         << num(width) << "'/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none") {
    body << "<rect x='" << num(x) << "' y='" << num(y) << "' width='" << num(w)
         << "' height='" << num(h) << "' fill='" << fill << "' stroke='" << stroke
         << "'/>\n";
  }
  void circle(double cx, double cy, double r, const std::string& fill) {
    body << "<circle cx='" << num(cx) << "' cy='" << num(cy) << "' r='" << num(r)
         << "' fill='" << fill << "'/>\n";
  }
  void text(double x, double y, const std::string& s, double size = 12.0,
            const std::string& anchor = "start", const std::string& fill = "#222",
            const std::string& extra = "") {
    body << "<text x='" << num(x) << "' y='" << num(y) << "' font-size='"
         << num(size) << "' font-family='sans-serif' text-anchor='" << anchor
         << "' fill='" << fill << "'" << (extra.empty() ? "" : " " + extra) << ">"
         << esc(s) << "</text>\n";
  }
  void save(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write chart '" + path + "'");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(kWidth)
        << "' height='" << num(kHeight) << "' viewBox='0 0 " << num(kWidth) << " "
        << num(kHeight) << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << body.str() << "</svg>\n";
    if (!out.good()) throw IoError("cannot write chart '" + path + "'");
  }
};

std::string value_label(double v) {
  std::ostringstream out;
  out.precision(3);
  out << v;
  return out.str();
}

// log-decade ticks covering [lo, hi]
std::vector<double> decade_ticks(double lo, double hi) {
  std::vector<double> ticks;
  const int first = static_cast<int>(std::floor(std::log10(lo)));
  const int last = static_cast<int>(std::ceil(std::log10(hi)));
  for (int e = first; e <= last; ++e) ticks.push_back(std::pow(10.0, e));
  return ticks;
}

}  // namespace

void write_scatter(const std::string& path, const std::vector<ScatterPoint>& points,
                   const std::string& x_label, const std::string& y_label,
                   const std::string& title) {
  Doc doc;
  doc.text(kWidth / 2, 24, title, 15, "middle");
  const double px0 = kLeft, px1 = kWidth - kRight;
  const double py0 = kHeight - kBottom, py1 = kTop;

  std::vector<ScatterPoint> usable;
  for (const auto& p : points)
    if (p.x > 0 && p.y > 0 && std::isfinite(p.x) && std::isfinite(p.y))
      usable.push_back(p);

  doc.line(px0, py0, px1, py0, "#222");
  doc.line(px0, py0, px0, py1, "#222");
  doc.text((px0 + px1) / 2, kHeight - 16, x_label, 13, "middle");
  doc.text(18, (py0 + py1) / 2, y_label, 13, "middle", "#222",
           "transform='rotate(-90 18 " + num((py0 + py1) / 2) + ")'");

  if (usable.empty()) {
    doc.text((px0 + px1) / 2, (py0 + py1) / 2, "no plottable points", 13, "middle",
             "#888");
    doc.save(path);
    return;
  }

  double xmin = usable[0].x, xmax = usable[0].x, ymin = usable[0].y,
         ymax = usable[0].y;
  for (const auto& p : usable) {
    xmin = std::min(xmin, std::max(p.x - p.dx, p.x * 0.5));
    xmax = std::max(xmax, p.x + p.dx);
    ymin = std::min(ymin, std::max(p.y - p.dy, p.y * 0.5));
    ymax = std::max(ymax, p.y + p.dy);
  }
  xmin *= 0.8, xmax *= 1.25, ymin *= 0.8, ymax *= 1.25;
  const auto sx = [&](double v) {
    return px0 + (std::log10(v) - std::log10(xmin)) /
                     (std::log10(xmax) - std::log10(xmin)) * (px1 - px0);
  };
  const auto sy = [&](double v) {
    return py0 - (std::log10(v) - std::log10(ymin)) /
                     (std::log10(ymax) - std::log10(ymin)) * (py0 - py1);
  };

  for (double t : decade_ticks(xmin, xmax)) {
    if (t < xmin || t > xmax) continue;
    doc.line(sx(t), py0, sx(t), py1, "#eee");
    doc.line(sx(t), py0, sx(t), py0 + 5, "#222");
    std::ostringstream lab;
    lab << "1e" << static_cast<int>(std::llround(std::log10(t)));
    doc.text(sx(t), py0 + 20, lab.str(), 11, "middle");
  }
  for (double t : decade_ticks(ymin, ymax)) {
    if (t < ymin || t > ymax) continue;
    doc.line(px0, sy(t), px1, sy(t), "#eee");
    doc.line(px0 - 5, sy(t), px0, sy(t), "#222");
    std::ostringstream lab;
    lab << "1e" << static_cast<int>(std::llround(std::log10(t)));
    doc.text(px0 - 8, sy(t) + 4, lab.str(), 11, "end");
  }

  std::map<std::string, std::string> color;
  for (const auto& p : usable)
    if (!color.count(p.series))
      color[p.series] = kPalette[color.size() % 6];

  for (const auto& p : usable) {
    const std::string& col = color[p.series];
    if (p.dx > 0 && p.x - p.dx > 0)
      doc.line(sx(p.x - p.dx), sy(p.y), sx(p.x + p.dx), sy(p.y), col, 1.2);
    if (p.dy > 0 && p.y - p.dy > 0)
      doc.line(sx(p.x), sy(p.y - p.dy), sx(p.x), sy(p.y + p.dy), col, 1.2);
    doc.circle(sx(p.x), sy(p.y), 4, col);
  }

  double ly = kTop + 6;
  for (const auto& [series, col] : color) {
    doc.circle(px1 - 120, ly, 4, col);
    doc.text(px1 - 110, ly + 4, series, 12);
    ly += 18;
  }
  doc.save(path);
}

void write_heatmap(const std::string& path, const std::vector<HeatCell>& cells,
                   const std::string& row_label, const std::string& col_label,
                   const std::string& title) {
  Doc doc;
  doc.text(kWidth / 2, 24, title, 15, "middle");
  if (cells.empty()) {
    doc.text(kWidth / 2, kHeight / 2, "no data", 13, "middle", "#888");
    doc.save(path);
    return;
  }

  std::set<double> row_set, col_set;
  double vmin = cells[0].value, vmax = cells[0].value;
  for (const auto& c : cells) {
    row_set.insert(c.row_value);
    col_set.insert(c.col_value);
    vmin = std::min(vmin, c.value);
    vmax = std::max(vmax, c.value);
  }
  const std::vector<double> rows(row_set.begin(), row_set.end());
  const std::vector<double> cols(col_set.begin(), col_set.end());

  // log color scale, viridis-like stops
  const double l0 = std::log10(std::max(vmin, 1e-300));
  const double l1 = std::log10(std::max(vmax, 1e-300));
  const int stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  const auto color_of = [&](double v) {
    double t = l1 > l0 ? (std::log10(std::max(v, 1e-300)) - l0) / (l1 - l0) : 0.5;
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * 4.0;
    const int k = std::min(3, static_cast<int>(pos));
    const double f = pos - k;
    std::ostringstream out;
    out << "rgb(" << static_cast<int>(stops[k][0] + f * (stops[k + 1][0] - stops[k][0]))
        << ',' << static_cast<int>(stops[k][1] + f * (stops[k + 1][1] - stops[k][1]))
        << ',' << static_cast<int>(stops[k][2] + f * (stops[k + 1][2] - stops[k][2]))
        << ')';
    return out.str();
  };

  const double px0 = kLeft, px1 = kWidth - kRight;
  const double py0 = kHeight - kBottom, py1 = kTop;
  const double cw = (px1 - px0) / cols.size();
  const double ch = (py0 - py1) / rows.size();

  for (const auto& c : cells) {
    const std::size_t ri =
        std::lower_bound(rows.begin(), rows.end(), c.row_value) - rows.begin();
    const std::size_t ci =
        std::lower_bound(cols.begin(), cols.end(), c.col_value) - cols.begin();
    const double x = px0 + ci * cw;
    const double y = py0 - (ri + 1) * ch;  // rows ascend upward
    const double t = l1 > l0
        ? std::clamp((std::log10(std::max(c.value, 1e-300)) - l0) / (l1 - l0), 0.0, 1.0)
        : 0.5;
    doc.rect(x, y, cw, ch, color_of(c.value), "white");
    doc.text(x + cw / 2, y + ch / 2 + 4, value_label(c.value), 11, "middle",
             t > 0.55 ? "#222" : "white");
  }
  for (std::size_t ri = 0; ri < rows.size(); ++ri)
    doc.text(px0 - 8, py0 - (ri + 0.5) * ch + 4, value_label(rows[ri]), 11, "end");
  for (std::size_t ci = 0; ci < cols.size(); ++ci)
    doc.text(px0 + (ci + 0.5) * cw, py0 + 18, value_label(cols[ci]), 11, "middle");
  doc.text((px0 + px1) / 2, kHeight - 16, col_label, 13, "middle");
  doc.text(18, (py0 + py1) / 2, row_label, 13, "middle", "#222",
           "transform='rotate(-90 18 " + num((py0 + py1) / 2) + ")'");
  doc.save(path);
}

}  // namespace abcmc::svg
