#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "gradcaps/errors.hpp"
#include "gradcaps/runner.hpp"
#include "gradcaps/util.hpp"

namespace gradcaps {

namespace fs = std::filesystem;

namespace {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Minimal polyline chart; raw CSVs are always emitted alongside for real
// plotting tools.
std::string svg_line_chart(const std::string& title, const std::vector<Series>& series) {
  const double W = 720, H = 400, ml = 60, mr = 20, mt = 40, mb = 40;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << H - mb << "\" stroke=\"#333\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << H - mb << "\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"" << H - mb + 16
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_double(xmin)
      << "</text>\n";
  out << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt_double(xmax) << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt_double(ymin) << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt_double(ymax) << "</text>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    out << "<polyline fill=\"none\" stroke=\"" << colors[k % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << W - mr - 4 << "\" y=\"" << mt + 16 + 16 * k
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
        << colors[k % 8] << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

struct TraceData {
  std::vector<double> step, reference, predicted;
};

TraceData read_wave_trace(const std::string& path) {
  TraceData td;
  std::istringstream in(read_file(path));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (trim(line).empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() < 3) throw ConfigError("trace: malformed row in " + path);
    td.step.push_back(std::stod(parts[0]));
    td.reference.push_back(std::stod(parts[1]));
    td.predicted.push_back(std::stod(parts[2]));
  }
  return td;
}

std::string env_section_of(const std::string& config_toml) {
  // The [env] block of the canonical TOML form identifies comparable runs.
  const size_t begin = config_toml.find("[env]");
  if (begin == std::string::npos) return "";
  const size_t end = config_toml.find("\n[", begin + 1);
  return config_toml.substr(begin, end == std::string::npos ? std::string::npos
                                                            : end - begin);
}

}  // namespace

std::string emit_report(std::span<const std::string> run_dirs,
                        const std::string& out_dir) {
  if (run_dirs.empty()) throw ConfigError("report: need at least one run dir");

  std::vector<RunManifest> manifests;
  for (const std::string& dir : run_dirs) manifests.push_back(load_manifest(dir));

  const std::string env_ref = env_section_of(manifests.front().config_toml);
  for (const auto& m : manifests)
    if (env_section_of(m.config_toml) != env_ref)
      throw ConfigError("report: runs use different environment specs (" +
                        manifests.front().run_id + " vs " + m.run_id + ")");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw RuntimeAbort("cannot create report dir " + out_dir);

  std::ostringstream table;
  table << "method,mean_return,std_return,mean_fluctuation,seeds\n";
  for (const auto& m : manifests) {
    const RunConfig cfg = m.config();
    std::string method = to_string(cfg.agent.regularizer.kind);
    if (cfg.agent.regularizer.kind == RegKind::None) method = "vanilla";
    table << m.run_id << ':' << method << ',' << fmt_double(m.mean_best_return()) << ','
          << fmt_double(m.std_best_return()) << ',' << fmt_double(m.mean_fluctuation())
          << ',' << m.seeds.size() << "\n";
  }
  const std::string table_path = (fs::path(out_dir) / "report.csv").string();
  write_file_atomic(table_path, table.str());

  // Overlay data and charts only make sense for wave runs, which carry a
  // reference column in their traces.
  const bool is_wave = env_ref.find("type = \"wave\"") != std::string::npos;
  if (is_wave) {
    std::ostringstream overlay;
    overlay << "run_id,step,reference,predicted\n";
    std::vector<Series> series;
    bool reference_added = false;
    for (const auto& m : manifests) {
      const auto& s0 = m.seeds.front();
      const TraceData td =
          read_wave_trace((fs::path(m.run_dir) / s0.trace_csv).string());
      for (size_t i = 0; i < td.step.size(); ++i)
        overlay << m.run_id << ',' << fmt_double(td.step[i]) << ','
                << fmt_double(td.reference[i]) << ',' << fmt_double(td.predicted[i])
                << "\n";
      if (!reference_added) {
        series.push_back(Series{"reference", td.step, td.reference});
        reference_added = true;
      }
      series.push_back(Series{m.run_id, td.step, td.predicted});
    }
    write_file_atomic((fs::path(out_dir) / "overlay.csv").string(), overlay.str());
    write_file_atomic((fs::path(out_dir) / "overlay.svg").string(),
                      svg_line_chart("reference vs predicted trajectory", series));
  }
  return table_path;
}

}  // namespace gradcaps
