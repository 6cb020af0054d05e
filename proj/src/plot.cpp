#include "vicfuse/plot.hpp"

#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "vicfuse/errors.hpp"

namespace vicfuse {
namespace {

constexpr double kScale = 8.0;  // px per metre
constexpr double kMargin = 20.0;

struct Canvas {
  Area area;
  double px(double x) const { return kMargin + (x - area.x_min) * kScale; }
  // Vehicle-frame +y points left, so it maps to screen up.
  double py(double y) const { return kMargin + (area.y_max - y) * kScale; }
  double width() const { return 2.0 * kMargin + (area.x_max - area.x_min) * kScale; }
  double height() const { return 2.0 * kMargin + (area.y_max - area.y_min) * kScale; }
};

std::string polygon(const Canvas& c, const BBox3D& box, const char* stroke, double width, const char* extra = "") {
  std::string pts;
  for (const auto& p : bev_corners(box)) {
    if (!pts.empty()) pts += ' ';
    pts += fmt::format("{:.3f},{:.3f}", c.px(p.x()), c.py(p.y()));
  }
  return fmt::format("<polygon points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.3f}\"{}/>\n", pts, stroke,
                     width, extra);
}

}  // namespace

std::string render_bev_svg(const PairArtifact& a, const Area& area) {
  const Canvas c{area};
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.3f}\" height=\"{:.3f}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      c.width(), c.height());
  out += fmt::format("<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"none\" "
                     "stroke=\"gray\" stroke-dasharray=\"4,4\"/>\n",
                     c.px(area.x_min), c.py(area.y_max), (area.x_max - area.x_min) * kScale,
                     (area.y_max - area.y_min) * kScale);
  out += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"12\">pair {} t={:.3f} dt={:.3f}</text>\n", kMargin,
                     kMargin - 6.0, a.pair, a.vehicle_t, a.delta_t);
  out += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"3\" fill=\"red\"/>\n", c.px(0.0), c.py(0.0));
  out += "<g id=\"ground_truth\">\n";
  for (const auto& d : a.ground_truth) out += polygon(c, d.box, "black", 1.0);
  out += "</g>\n<g id=\"vehicle\">\n";
  for (const auto& d : a.vehicle) out += polygon(c, d.box, "orange", 1.5);
  out += "</g>\n<g id=\"infrastructure\">\n";
  for (const auto& d : a.infrastructure) out += polygon(c, d.box, "blue", 3.0, " stroke-opacity=\"0.7\"");
  out += "</g>\n</svg>\n";
  return out;
}

int cmd_plot(const PlotOptions& opts) {
  try {
    const Pipeline pipeline = pipeline_from_string(opts.pipeline);
    const auto path = opts.bench / artifact_file_name(pipeline, opts.k);
    std::ifstream in(path);
    if (!in) throw Error("missing artifact " + path.string() + "; run bench with this pipeline and k first");

    Area area;
    std::ifstream report_in(opts.bench / "report.json");
    if (report_in) {
      const auto report = nlohmann::json::parse(report_in, nullptr, false);
      if (!report.is_discarded() && report.contains("config")) {
        const auto a = report["config"]["eval"]["area"].get<std::vector<double>>();
        area = {a.at(0), a.at(1), a.at(2), a.at(3)};
      }
    }

    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto art = pair_artifact_from_json(nlohmann::json::parse(line));
      if (art.pair != opts.pair) continue;
      std::ofstream out(opts.out, std::ios::binary);
      if (!out) throw Error("cannot write " + opts.out.string());
      out << render_bev_svg(art, area);
      return 0;
    }
    throw Error(fmt::format("pair {} not found in {}", opts.pair, path.string()));
  } catch (const std::exception& e) {
    std::cerr << "vicfuse plot: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace vicfuse
