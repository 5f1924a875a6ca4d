#include "mpmab/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mpmab/errors.hpp"

namespace mpmab {
namespace {

std::string fmt_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ArgumentError("csv: malformed number '" + std::string(s) + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view s) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ArgumentError("csv: malformed integer '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string series_label(const Aggregate& a, bool with_subpar) {
  std::string label = a.algorithm;
  if (a.algorithm == "robustagg" || a.algorithm == "robustagg-adapted") label += "(" + fmt_double(a.eps) + ")";
  if (with_subpar && a.num_subpar) label += " |I|=" + std::to_string(*a.num_subpar);
  return label;
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  std::ostringstream os;
  if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-2)) {
    os.precision(2);
    os << std::scientific << v;
  } else {
    os.precision(6);
    os << v;
  }
  return os.str();
}

}  // namespace

ResultFormat parse_result_format(std::string_view name) {
  if (name == "csv") return ResultFormat::kCsv;
  if (name == "json") return ResultFormat::kJson;
  if (name == "svg") return ResultFormat::kSvg;
  throw ArgumentError("unknown format: " + std::string(name));
}

std::string results_csv(std::span<const Aggregate> aggregates) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const Aggregate& a : aggregates) {
    const std::string prefix = a.algorithm + ',' + fmt_double(a.eps) + ',' +
                               (a.num_subpar ? std::to_string(*a.num_subpar) : std::string()) + ',';
    for (Eigen::Index r = 0; r < a.values.rows(); ++r) {
      for (std::size_t c = 0; c < a.rounds.size(); ++c) {
        out += prefix;
        out += std::to_string(r) + ',' + std::to_string(a.rounds[c]) + ',' +
               fmt_double(a.values(r, static_cast<Eigen::Index>(c))) + '\n';
      }
    }
  }
  return out;
}

std::string results_json(std::span<const Aggregate> aggregates) {
  nlohmann::json doc = nlohmann::json::array();
  for (const Aggregate& a : aggregates) {
    nlohmann::json entry;
    entry["config"] = {{"algorithm", a.algorithm},
                       {"eps", a.eps},
                       {"num_subpar", a.num_subpar ? nlohmann::json(*a.num_subpar) : nlohmann::json()},
                       {"num_players", a.num_players},
                       {"num_arms", a.num_arms},
                       {"horizon", a.horizon},
                       {"num_replications", a.values.rows()},
                       {"base_seed", a.base_seed}};
    const Eigen::VectorXd mu = a.mean();
    const Eigen::VectorXd se = a.stderr_of_mean();
    auto points = nlohmann::json::array();
    for (std::size_t c = 0; c < a.rounds.size(); ++c) {
      const auto i = static_cast<Eigen::Index>(c);
      points.push_back({{"t", a.rounds[c]}, {"mean", mu(i)}, {"stderr", se(i)}});
    }
    entry["checkpoints"] = std::move(points);
    doc.push_back(std::move(entry));
  }
  return doc.dump(2);
}

std::vector<CurveSeries> curves_from(std::span<const Aggregate> aggregates) {
  std::set<std::optional<int>> subpars;
  for (const Aggregate& a : aggregates) subpars.insert(a.num_subpar);
  std::vector<CurveSeries> out;
  for (const Aggregate& a : aggregates) {
    CurveSeries s;
    s.label = series_label(a, subpars.size() > 1);
    const Eigen::VectorXd mu = a.mean();
    const Eigen::VectorXd se = a.stderr_of_mean();
    for (std::size_t c = 0; c < a.rounds.size(); ++c) {
      s.rounds.push_back(static_cast<double>(a.rounds[c]));
      s.mean.push_back(mu(static_cast<Eigen::Index>(c)));
      s.stderr_band.push_back(se(static_cast<Eigen::Index>(c)));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string regret_svg(std::span<const CurveSeries> series, std::string_view title) {
  constexpr double kWidth = 800, kHeight = 500;
  constexpr double kLeft = 90, kRight = 200, kTop = 40, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;

  double x_max = 1.0, y_max = 1e-12;
  for (const CurveSeries& s : series) {
    for (std::size_t i = 0; i < s.rounds.size(); ++i) {
      x_max = std::max(x_max, s.rounds[i]);
      y_max = std::max(y_max, s.mean[i] + s.stderr_band[i]);
    }
  }
  auto sx = [&](double x) { return kLeft + plot_w * x / x_max; };
  auto sy = [&](double y) { return kTop + plot_h * (1.0 - y / y_max); };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
       << escape_xml(title) << "</text>\n";
  }
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
     << kTop + plot_h << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x_max * k / 5.0, yv = y_max * k / 5.0;
    os << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">"
       << tick_label(xv) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << tick_label(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\">rounds</text>\n";
  os << "<text transform=\"translate(20," << kTop + plot_h / 2
     << ") rotate(-90)\" text-anchor=\"middle\">cumulative collective regret</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const CurveSeries& s = series[k];
    const char* color = kPalette[k % kPalette.size()];
    os << "<g class=\"series\">\n<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.rounds.size(); ++i) os << sx(s.rounds[i]) << ',' << sy(s.mean[i] + s.stderr_band[i]) << ' ';
    for (std::size_t i = s.rounds.size(); i-- > 0;) os << sx(s.rounds[i]) << ',' << sy(s.mean[i] - s.stderr_band[i]) << ' ';
    os << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.rounds.size(); ++i) os << sx(s.rounds[i]) << ',' << sy(s.mean[i]) << ' ';
    os << "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    os << "<rect x=\"" << kLeft + plot_w + 15 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" fill=\""
       << color << "\"/>\n<text x=\"" << kLeft + plot_w + 32 << "\" y=\"" << ly + 1 << "\">" << escape_xml(s.label)
       << "</text>\n</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<Aggregate> aggregates_from_csv(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kCsvHeader) throw ArgumentError("csv: missing or wrong header");

  struct Group {
    Aggregate agg;
    std::map<std::pair<int, std::int64_t>, double> cells;
  };
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;

  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto fields = split(lines[n], ',');
    if (fields.size() != 6) throw ArgumentError("csv: line " + std::to_string(n + 1) + " needs 6 fields");
    const std::string key = std::string(fields[0]) + ',' + std::string(fields[1]) + ',' + std::string(fields[2]);
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) {
      Group g;
      g.agg.algorithm = std::string(fields[0]);
      g.agg.eps = parse_double(fields[1]);
      if (!fields[2].empty()) g.agg.num_subpar = parse_int<int>(fields[2]);
      groups.push_back(std::move(g));
    }
    Group& g = groups[it->second];
    g.cells[{parse_int<int>(fields[3]), parse_int<std::int64_t>(fields[4])}] = parse_double(fields[5]);
  }

  std::vector<Aggregate> out;
  for (Group& g : groups) {
    std::set<int> reps;
    std::set<std::int64_t> rounds;
    for (const auto& [cell, v] : g.cells) {
      reps.insert(cell.first);
      rounds.insert(cell.second);
    }
    g.agg.rounds.assign(rounds.begin(), rounds.end());
    if (!rounds.empty()) g.agg.horizon = *rounds.rbegin();
    g.agg.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(reps.size()), static_cast<Eigen::Index>(rounds.size()));
    Eigen::Index r = 0;
    for (int rep : reps) {
      Eigen::Index c = 0;
      for (std::int64_t t : rounds) {
        const auto found = g.cells.find({rep, t});
        if (found == g.cells.end()) throw ArgumentError("csv: replication " + std::to_string(rep) + " lacks t=" + std::to_string(t));
        g.agg.values(r, c++) = found->second;
      }
      ++r;
    }
    out.push_back(std::move(g.agg));
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void emit_results(std::span<const Aggregate> aggregates, ResultFormat format, const std::filesystem::path& path) {
  switch (format) {
    case ResultFormat::kCsv:
      write_text(path, results_csv(aggregates));
      return;
    case ResultFormat::kJson:
      write_text(path, results_json(aggregates));
      return;
    case ResultFormat::kSvg: {
      const auto curves = curves_from(aggregates);
      write_text(path, regret_svg(curves));
      return;
    }
  }
}

}  // namespace mpmab
