#include "kbr/cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "kbr/error.hpp"

namespace kbr::cli {

namespace {

std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::runtime_error(path.string() + ": malformed number '" + s + "'");
  }
  return v;
}

struct CellKey {
  double test_x, test_y, sigma, epsilon, delta;
  bool operator==(const CellKey&) const = default;
};

struct Band {
  double mean, lower, upper;
};

Band band_of(const SweepRow& row) {
  const double half = std::isnan(row.sem) ? 0.0 : row.sem;
  return {row.mean_post_c1, row.mean_post_c1 - half, row.mean_post_c1 + half};
}

const char* kSeriesColors[] = {"#1f77b4", "#2ca02c", "#d62728", "#9467bd"};

std::string render_svg(const std::vector<double>& priors,
                       const std::vector<std::vector<std::optional<Band>>>& series, const std::string& title) {
  constexpr double w = 640, h = 420, left = 60, right = 130, top = 40, bottom = 50;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    for (const auto& b : s) {
      if (b && std::isfinite(b->lower) && std::isfinite(b->upper)) {
        lo = std::min(lo, b->lower);
        hi = std::max(hi, b->upper);
      }
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto sx = [&](double p) { return left + p * (w - left - right); };
  auto sy = [&](double v) { return top + (hi - v) / (hi - lo) * (h - top - bottom); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-size=\"13\" font-family=\"sans-serif\">" << title << "</text>\n";
  os << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(lo) << "\" x2=\"" << sx(1) << "\" y2=\"" << sy(lo)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(lo) << "\" x2=\"" << sx(0) << "\" y2=\"" << sy(hi)
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << sy(v) + 4 << "\" font-size=\"10\" text-anchor=\"end\""
       << " font-family=\"sans-serif\">" << short_real(v) << "</text>\n";
  }
  for (double p : priors) {
    os << "<text x=\"" << sx(p) << "\" y=\"" << h - bottom + 16 << "\" font-size=\"10\" text-anchor=\"middle\""
       << " font-family=\"sans-serif\">" << short_real(p) << "</text>\n";
  }
  os << "<text x=\"" << sx(0.5) << "\" y=\"" << h - 10 << "\" font-size=\"12\" text-anchor=\"middle\""
     << " font-family=\"sans-serif\">prior of C1</text>\n";

  for (std::size_t c = 0; c < series.size(); ++c) {
    const char* color = kSeriesColors[c % std::size(kSeriesColors)];
    std::ostringstream pts;
    for (std::size_t i = 0; i < priors.size(); ++i) {
      const auto& b = series[c][i];
      if (!b || !std::isfinite(b->mean)) continue;
      pts << sx(priors[i]) << "," << sy(b->mean) << " ";
      os << "<line x1=\"" << sx(priors[i]) << "\" y1=\"" << sy(b->lower) << "\" x2=\"" << sx(priors[i])
         << "\" y2=\"" << sy(b->upper) << "\" stroke=\"" << color << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
       << "\"/>\n";
    const double ly = top + 18.0 * static_cast<double>(c);
    os << "<line x1=\"" << w - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << w - right + 40 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << w - right + 46 << "\" y=\"" << ly + 4 << "\" font-size=\"11\" font-family=\"sans-serif\">"
       << to_string(kAllClassifiers[c]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << kSweepHeader << "\n";
  for (const auto& r : result.rows) {
    if (r.test_point.size() != 2) throw InvalidInput("sweep CSV: test points must be 2-dimensional");
    os << to_string(r.classifier) << ',' << format_real(r.prior_c1) << ',' << format_real(r.test_point(0)) << ','
       << format_real(r.test_point(1)) << ',' << format_real(r.sigma) << ',' << format_real(r.epsilon) << ','
       << format_real(r.delta) << ',' << format_real(r.mean_post_c1) << ',' << format_real(r.sem) << ','
       << r.n_replicates << ',' << r.n_errors << "\n";
  }
  return os.str();
}

std::string trial_csv(std::span<const TrialReport> reports) {
  std::ostringstream os;
  os << "name,statistic,threshold,trials,passes,pass_fraction,min_statistic,median_statistic,seed\n";
  for (const auto& r : reports) {
    os << r.name << ',' << r.statistic << ',' << format_real(r.threshold) << ',' << r.trials << ',' << r.passes
       << ',' << format_real(r.pass_fraction()) << ',' << format_real(r.min_statistic) << ','
       << format_real(r.median_statistic) << ',' << r.seed << "\n";
  }
  return os.str();
}

std::string probe_csv(std::span<const ProbeSeries> series) {
  std::ostringstream os;
  os << "target,epsilon,norm,fit_norm\n";
  for (const auto& s : series) {
    const std::string name = describe(s.target);
    for (const auto& p : s.points) {
      os << name << ',' << format_real(p.epsilon) << ',' << format_real(p.norm) << ',' << format_real(p.fit_norm)
         << "\n";
    }
  }
  return os.str();
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  write_file_atomic(path, sweep_csv(result));
}

void emit_csv(std::span<const TrialReport> reports, const std::filesystem::path& path) {
  write_file_atomic(path, trial_csv(reports));
}

void emit_csv(std::span<const ProbeSeries> series, const std::filesystem::path& path) {
  write_file_atomic(path, probe_csv(series));
}

SweepResult read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  SweepResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 11) throw std::runtime_error(path.string() + ": expected 11 fields");
    SweepRow r;
    r.classifier = classifier_from_string(f[0]);
    r.prior_c1 = parse_real(f[1], path);
    r.test_point = Vector(2);
    r.test_point << parse_real(f[2], path), parse_real(f[3], path);
    r.sigma = parse_real(f[4], path);
    r.epsilon = parse_real(f[5], path);
    r.delta = parse_real(f[6], path);
    r.mean_post_c1 = parse_real(f[7], path);
    r.sem = parse_real(f[8], path);
    r.n_replicates = static_cast<std::size_t>(std::stoull(f[9]));
    r.n_errors = static_cast<std::size_t>(std::stoull(f[10]));
    result.rows.push_back(std::move(r));
  }
  return result;
}

void emit_metadata(const Metadata& meta, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& [k, v] : meta) os << k << '=' << v << "\n";
  write_file_atomic(path, os.str());
}

Metadata read_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  Metadata meta;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return meta;
}

std::vector<std::filesystem::path> emit_plot_data(const SweepResult& result, const std::filesystem::path& dir,
                                                  bool svg) {
  if (result.rows.empty()) throw InvalidInput("emit_plot_data: empty result");

  std::vector<CellKey> cells;
  std::vector<std::vector<const SweepRow*>> members;
  for (const auto& r : result.rows) {
    if (r.test_point.size() != 2) throw InvalidInput("emit_plot_data: test points must be 2-dimensional");
    const CellKey key{r.test_point(0), r.test_point(1), r.sigma, r.epsilon, r.delta};
    auto it = std::find(cells.begin(), cells.end(), key);
    if (it == cells.end()) {
      cells.push_back(key);
      members.emplace_back();
      it = cells.end() - 1;
    }
    members[static_cast<std::size_t>(it - cells.begin())].push_back(&r);
  }

  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& key = cells[i];
    std::vector<double> priors;
    for (const auto* r : members[i]) {
      if (std::find(priors.begin(), priors.end(), r->prior_c1) == priors.end()) priors.push_back(r->prior_c1);
    }
    std::vector<std::vector<std::optional<Band>>> series(std::size(kAllClassifiers),
                                                         std::vector<std::optional<Band>>(priors.size()));
    for (const auto* r : members[i]) {
      const auto c = static_cast<std::size_t>(r->classifier);
      const auto p = static_cast<std::size_t>(std::find(priors.begin(), priors.end(), r->prior_c1) - priors.begin());
      series[c][p] = band_of(*r);
    }

    std::ostringstream os;
    os << "prior_c1";
    for (auto id : kAllClassifiers) {
      const auto n = to_string(id);
      os << ',' << n << "_mean," << n << "_lower," << n << "_upper";
    }
    os << "\n";
    for (std::size_t p = 0; p < priors.size(); ++p) {
      os << format_real(priors[p]);
      for (const auto& s : series) {
        const Band b = s[p].value_or(Band{std::nan(""), std::nan(""), std::nan("")});
        os << ',' << format_real(b.mean) << ',' << format_real(b.lower) << ',' << format_real(b.upper);
      }
      os << "\n";
    }

    char idx[24];
    std::snprintf(idx, sizeof idx, "%03zu", i);
    const std::string stem = std::string("cell_") + idx + "_y=" + short_real(key.test_x) + "_" +
                             short_real(key.test_y) + "_sigma=" + short_real(key.sigma) +
                             "_eps=" + short_real(key.epsilon) + "_delta=" + short_real(key.delta);
    const auto table = dir / (stem + ".csv");
    write_file_atomic(table, os.str());
    written.push_back(table);
    if (svg) {
      const std::string title = "y=(" + short_real(key.test_x) + ", " + short_real(key.test_y) +
                                "), sigma=" + short_real(key.sigma) + ", epsilon=" + short_real(key.epsilon) +
                                ", delta=" + short_real(key.delta);
      write_file_atomic(dir / (stem + ".svg"), render_svg(priors, series, title));
    }
  }
  return written;
}

}  // namespace kbr::cli
