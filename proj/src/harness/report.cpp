#include "ecosim/harness/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "ecosim/core/rng.hpp"

namespace ecosim::harness {

namespace {

const std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                             "#9467bd", "#ff7f0e", "#8c564b"};

// Fixed two-decimal formatting for SVG coordinates.
std::string fmt2(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  return std::string(buf, r.ptr);
}

std::string fmt_tick(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 4);
  return std::string(buf, r.ptr);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

class SvgBuilder {
 public:
  SvgBuilder(int width, int height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke) {
    body_ += "<rect x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" width=\"" + fmt2(w) +
             "\" height=\"" + fmt2(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke +
             "\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0) {
    body_ += "<line x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" + fmt2(x2) +
             "\" y2=\"" + fmt2(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             fmt2(stroke_width) + "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke, double stroke_width = 1.5) {
    if (pts.size() < 2) return;
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
             fmt2(stroke_width) + "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) body_ += " ";
      body_ += fmt2(pts[i].first) + "," + fmt2(pts[i].second);
    }
    body_ += "\"/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + fmt2(cx) + "\" cy=\"" + fmt2(cy) + "\" r=\"" + fmt2(r) +
             "\" fill=\"" + fill + "\"/>\n";
  }

  void text(double x, double y, const std::string& s, int size,
            const std::string& anchor = "start", const std::string& color = "#222222") {
    body_ += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" font-size=\"" +
             std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
             "\" fill=\"" + color + "\">" + xml_escape(s) + "</text>\n";
  }

  void text_rotated(double x, double y, const std::string& s, int size) {
    body_ += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" font-size=\"" +
             std::to_string(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"middle\" fill=\"#222222\""
             " transform=\"rotate(-90 " +
             fmt2(x) + " " + fmt2(y) + ")\">" + xml_escape(s) + "</text>\n";
  }

  std::string str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\""
           " width=\"" +
           std::to_string(width_) + "\" height=\"" + std::to_string(height_) + "\" viewBox=\"0 0 " +
           std::to_string(width_) + " " + std::to_string(height_) +
           "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n" + body_ + "</svg>\n";
  }

 private:
  int width_;
  int height_;
  std::string body_;
};

struct ChartSeries {
  std::string label;
  std::string color;
  bool line = true;
  std::vector<std::array<double, 3>> points;  // x, y, y error
};

void draw_chart(SvgBuilder& svg, double ox, double oy, double width, double height,
                const std::string& title, const std::string& xlabel,
                const std::string& ylabel, const std::vector<ChartSeries>& series) {
  const double left = ox + 70.0;
  const double right = ox + width - 18.0;
  const double top = oy + 30.0;
  const double bottom = oy + height - 46.0;

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) continue;
      any = true;
      xmin = std::min(xmin, p[0]);
      xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1] - p[2]);
      ymax = std::max(ymax, p[1] + p[2]);
    }
  }
  if (!any) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax == xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax == ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (right - left); };
  const auto sy = [&](double y) { return bottom - (y - ymin) / (ymax - ymin) * (bottom - top); };

  svg.rect(left, top, right - left, bottom - top, "none", "#333333");
  for (int i = 0; i < 5; ++i) {
    const double tx = xmin + (xmax - xmin) * i / 4.0;
    const double ty = ymin + (ymax - ymin) * i / 4.0;
    svg.line(sx(tx), bottom, sx(tx), bottom + 4.0, "#333333");
    svg.text(sx(tx), bottom + 16.0, fmt_tick(tx), 10, "middle");
    svg.line(left - 4.0, sy(ty), left, sy(ty), "#333333");
    svg.text(left - 7.0, sy(ty) + 3.0, fmt_tick(ty), 10, "end");
  }
  svg.text((left + right) / 2.0, oy + 18.0, title, 13, "middle");
  svg.text((left + right) / 2.0, oy + height - 10.0, xlabel, 11, "middle");
  svg.text_rotated(ox + 18.0, (top + bottom) / 2.0, ylabel, 11);

  for (const auto& s : series) {
    std::vector<std::pair<double, double>> mapped;
    for (const auto& p : s.points) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
      mapped.emplace_back(sx(p[0]), sy(p[1]));
      if (std::isfinite(p[2]) && p[2] > 0.0) {
        const double x = sx(p[0]);
        svg.line(x, sy(p[1] - p[2]), x, sy(p[1] + p[2]), s.color);
        svg.line(x - 3.0, sy(p[1] - p[2]), x + 3.0, sy(p[1] - p[2]), s.color);
        svg.line(x - 3.0, sy(p[1] + p[2]), x + 3.0, sy(p[1] + p[2]), s.color);
      }
    }
    if (s.line) svg.polyline(mapped, s.color);
    const double radius = s.line ? 2.5 : 1.8;
    for (const auto& [mx, my] : mapped) svg.circle(mx, my, radius, s.color);
  }
  if (series.size() > 1) {
    double ly = top + 14.0;
    for (const auto& s : series) {
      svg.line(right - 92.0, ly - 4.0, right - 76.0, ly - 4.0, s.color, 2.0);
      svg.text(right - 70.0, ly, s.label, 10);
      ly += 14.0;
    }
  }
}

std::string single_chart_svg(const std::string& title, const std::string& xlabel,
                             const std::string& ylabel,
                             const std::vector<ChartSeries>& series) {
  SvgBuilder svg(640, 420);
  draw_chart(svg, 0, 0, 640, 420, title, xlabel, ylabel, series);
  return svg.str();
}

std::string hash_hex(const std::string& content) {
  const std::uint64_t h = core::fnv1a64(content);
  char buf[17];
  for (int i = 0; i < 16; ++i) {
    buf[15 - i] = "0123456789abcdef"[(h >> (4 * i)) & 0xF];
  }
  buf[16] = '\0';
  return std::string(buf);
}

std::string iso_utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("emit_report: cannot open '" + path.string() + "' for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw std::runtime_error("emit_report: write failed for '" + path.string() + "'");
}

}  // namespace

void emit_report(const SweepResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("emit_report: cannot create directory '" + dir +
                             "': " + ec.message());
  }

  std::vector<const SweepCell*> picks;
  for (std::size_t idx : result.selected) {
    picks.push_back(&result.cells.at(idx));
  }

  const auto num = [](double v) { return format_number(v); };
  std::vector<std::pair<std::string, std::string>> files;

  {
    std::string csv =
        "lambda,provider_reward_mean,provider_reward_se,viable_providers_mean,"
        "viable_providers_se\n";
    for (const SweepCell* cell : picks) {
      csv += num(cell->lambda) + "," + num(cell->eval.provider_reward_sum.mean) + "," +
             num(cell->eval.provider_reward_sum.se) + "," + num(cell->eval.viable_end.mean) +
             "," + num(cell->eval.viable_end.se) + "\n";
    }
    files.emplace_back("fig4_provider_reward.csv", std::move(csv));
  }
  {
    std::string csv =
        "lambda,user_reward_mean,user_reward_se,provider_reward_mean,provider_reward_se\n";
    for (const SweepCell* cell : picks) {
      csv += num(cell->lambda) + "," + num(cell->eval.user_reward_sum.mean) + "," +
             num(cell->eval.user_reward_sum.se) + "," +
             num(cell->eval.provider_reward_sum.mean) + "," +
             num(cell->eval.provider_reward_sum.se) + "\n";
    }
    files.emplace_back("fig5_pareto.csv", std::move(csv));
  }
  {
    std::string csv =
        "lambda,drift_mean,drift_se,recommendation_mean,recommendation_se,feedback_mean,"
        "feedback_se\n";
    for (const SweepCell* cell : picks) {
      csv += num(cell->lambda) + "," + num(cell->eval.drift_part.mean) + "," +
             num(cell->eval.drift_part.se) + "," + num(cell->eval.rec_part.mean) + "," +
             num(cell->eval.rec_part.se) + "," + num(cell->eval.feedback_part.mean) + "," +
             num(cell->eval.feedback_part.se) + "\n";
    }
    files.emplace_back("fig6_decomposition.csv", std::move(csv));
  }
  {
    std::string csv = "lambda,provider_satisfaction,predicted_uplift\n";
    for (const SweepCell* cell : picks) {
      for (const auto& [satisfaction, uplift] : cell->eval.scatter) {
        csv += num(cell->lambda) + "," + num(satisfaction) + "," + num(uplift) + "\n";
      }
    }
    files.emplace_back("fig8_scatter.csv", std::move(csv));
  }
  {
    std::string csv = "lambda,provider_reward_mean,provider_reward_se\n";
    for (const SweepCell* cell : picks) {
      csv += num(cell->lambda) + "," + num(cell->eval.provider_reward_sum.mean) + "," +
             num(cell->eval.provider_reward_sum.se) + "\n";
    }
    files.emplace_back("fig9_linear.csv", std::move(csv));
  }
  {
    std::string csv = "lambda,group,viable_providers_mean,viable_providers_se\n";
    for (const SweepCell* cell : picks) {
      for (const auto& group : cell->eval.groups) {
        csv += num(cell->lambda) + "," + csv_field(group.group) + "," +
               num(group.viable_end.mean) + "," + num(group.viable_end.se) + "\n";
      }
    }
    files.emplace_back("fig11_subgroup.csv", std::move(csv));
  }
  {
    std::string csv = "lambda,group,recommendations_mean,recommendations_se\n";
    for (const SweepCell* cell : picks) {
      for (const auto& group : cell->eval.groups) {
        csv += num(cell->lambda) + "," + csv_field(group.group) + "," +
               num(group.recommendations.mean) + "," + num(group.recommendations.se) + "\n";
      }
    }
    files.emplace_back("fig12_rec_counts.csv", std::move(csv));
  }
  {
    std::string csv =
        "agent,lambda,learning_rate,selected,diverged,epochs_run,objective,"
        "user_reward_sum_mean,user_reward_sum_se,user_reward_per_user_mean,"
        "provider_reward_sum_mean,provider_reward_sum_se,provider_reward_per_provider_mean,"
        "viable_providers_mean,viable_providers_se\n";
    for (const auto& cell : result.cells) {
      csv += "eco," + num(cell.lambda) + "," + num(cell.learning_rate) + "," +
             (cell.selected ? "1" : "0") + "," + (cell.diverged ? "1" : "0") + "," +
             std::to_string(cell.epochs_run) + "," + num(cell.objective) + "," +
             num(cell.eval.user_reward_sum.mean) + "," + num(cell.eval.user_reward_sum.se) +
             "," + num(cell.eval.user_reward_per_user.mean) + "," +
             num(cell.eval.provider_reward_sum.mean) + "," +
             num(cell.eval.provider_reward_sum.se) + "," +
             num(cell.eval.provider_reward_per_provider.mean) + "," +
             num(cell.eval.viable_end.mean) + "," + num(cell.eval.viable_end.se) + "\n";
    }
    const EvalSummary& random = result.random_baseline;
    if (random.n > 0) {
      csv += "random,,,,,,," + num(random.user_reward_sum.mean) + "," +
             num(random.user_reward_sum.se) + "," + num(random.user_reward_per_user.mean) +
             "," + num(random.provider_reward_sum.mean) + "," +
             num(random.provider_reward_sum.se) + "," +
             num(random.provider_reward_per_provider.mean) + "," +
             num(random.viable_end.mean) + "," + num(random.viable_end.se) + "\n";
    }
    files.emplace_back("summary.csv", std::move(csv));
  }

  // SVG plots over the selected cells.
  {
    ChartSeries reward{"provider reward", kPalette[0], true, {}};
    ChartSeries viable{"viable providers", kPalette[1], true, {}};
    for (const SweepCell* cell : picks) {
      reward.points.push_back({cell->lambda, cell->eval.provider_reward_sum.mean,
                               cell->eval.provider_reward_sum.se});
      viable.points.push_back(
          {cell->lambda, cell->eval.viable_end.mean, cell->eval.viable_end.se});
    }
    SvgBuilder svg(640, 760);
    draw_chart(svg, 0, 0, 640, 380, "Provider accumulated reward", "lambda",
               "provider reward", {reward});
    draw_chart(svg, 0, 380, 640, 380, "Viable providers at episode end", "lambda",
               "viable providers", {viable});
    files.emplace_back("fig4.svg", svg.str());
  }
  {
    ChartSeries eco{"eco agent", kPalette[0], true, {}};
    for (const SweepCell* cell : picks) {
      eco.points.push_back({cell->eval.user_reward_sum.mean,
                            cell->eval.provider_reward_sum.mean,
                            cell->eval.provider_reward_sum.se});
    }
    ChartSeries random{"random", kPalette[1], false, {}};
    if (result.random_baseline.n > 0) {
      random.points.push_back({result.random_baseline.user_reward_sum.mean,
                               result.random_baseline.provider_reward_sum.mean,
                               result.random_baseline.provider_reward_sum.se});
    }
    files.emplace_back("fig5.svg",
                       single_chart_svg("User vs provider reward across lambda",
                                        "user accumulated reward",
                                        "provider accumulated reward", {eco, random}));
  }
  {
    ChartSeries drift{"drift", kPalette[0], true, {}};
    ChartSeries rec{"recommendation", kPalette[1], true, {}};
    ChartSeries feedback{"feedback", kPalette[2], true, {}};
    for (const SweepCell* cell : picks) {
      drift.points.push_back(
          {cell->lambda, cell->eval.drift_part.mean, cell->eval.drift_part.se});
      rec.points.push_back({cell->lambda, cell->eval.rec_part.mean, cell->eval.rec_part.se});
      feedback.points.push_back(
          {cell->lambda, cell->eval.feedback_part.mean, cell->eval.feedback_part.se});
    }
    files.emplace_back("fig6.svg",
                       single_chart_svg("Provider reward decomposition", "lambda",
                                        "reward share", {drift, rec, feedback}));
  }
  {
    std::vector<ChartSeries> series;
    for (std::size_t pi = 0; pi < picks.size(); ++pi) {
      const SweepCell* cell = picks[pi];
      ChartSeries s{"lambda=" + format_number(cell->lambda),
                    kPalette[pi % kPalette.size()], false, {}};
      const std::size_t n = cell->eval.scatter.size();
      const std::size_t stride = std::max<std::size_t>(1, n / 2000);
      for (std::size_t i = 0; i < n; i += stride) {
        s.points.push_back({cell->eval.scatter[i].first, cell->eval.scatter[i].second, 0.0});
      }
      series.push_back(std::move(s));
    }
    files.emplace_back("fig8.svg",
                       single_chart_svg("Predicted uplift vs provider satisfaction",
                                        "provider satisfaction", "predicted uplift", series));
  }
  {
    ChartSeries reward{"provider reward", kPalette[0], true, {}};
    for (const SweepCell* cell : picks) {
      reward.points.push_back({cell->lambda, cell->eval.provider_reward_sum.mean,
                               cell->eval.provider_reward_sum.se});
    }
    files.emplace_back("fig9.svg",
                       single_chart_svg("Provider accumulated reward across lambda", "lambda",
                                        "provider reward", {reward}));
  }
  {
    std::vector<ChartSeries> viable_series;
    std::vector<ChartSeries> rec_series;
    if (!picks.empty()) {
      for (std::size_t g = 0; g < picks[0]->eval.groups.size(); ++g) {
        ChartSeries viable{picks[0]->eval.groups[g].group, kPalette[g % kPalette.size()],
                           true, {}};
        ChartSeries recs = viable;
        for (const SweepCell* cell : picks) {
          const GroupStat& group = cell->eval.groups[g];
          viable.points.push_back(
              {cell->lambda, group.viable_end.mean, group.viable_end.se});
          recs.points.push_back(
              {cell->lambda, group.recommendations.mean, group.recommendations.se});
        }
        viable_series.push_back(std::move(viable));
        rec_series.push_back(std::move(recs));
      }
    }
    files.emplace_back("fig11.svg",
                       single_chart_svg("Viable providers per group", "lambda",
                                        "viable providers", viable_series));
    files.emplace_back("fig12.svg",
                       single_chart_svg("Accumulated recommendations per group", "lambda",
                                        "recommendations", rec_series));
  }

  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["scenario"] = result.scenario;
  manifest["generated_at"] = iso_utc_now();
  manifest["files"] = nlohmann::json::array();
  for (const auto& [name, content] : files) {
    write_file(fs::path(dir) / name, content);
    manifest["files"].push_back(
        {{"name", name}, {"bytes", content.size()}, {"fnv1a64", hash_hex(content)}});
  }
  write_file(fs::path(dir) / "manifest.json", manifest.dump(1) + "\n");
}

}  // namespace ecosim::harness
