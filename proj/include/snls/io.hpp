#pragma once

// Run persistence: CSV tables, JSON sidecars, SVG plots, checksums and the
// manifest that makes a run directory self-describing.

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "snls/config.hpp"
#include "snls/error.hpp"
#include "snls/montecarlo.hpp"
#include "snls/solver.hpp"
#include "snls/trajectory.hpp"

#define SNLS_VERSION "0.1.0"

namespace snls {

namespace fs = std::filesystem;

inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Non-finite reals become strings so the document stays valid JSON.
inline ojson json_real(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

namespace detail {

inline std::string hex(const unsigned char* p, unsigned n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(2 * n);
  for (unsigned i = 0; i < n; ++i) {
    s.push_back(digits[p[i] >> 4]);
    s.push_back(digits[p[i] & 15]);
  }
  return s;
}

inline std::string evp_digest(const EVP_MD* md, std::string_view data) {
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned n = 0;
  if (EVP_Digest(data.data(), data.size(), out, &n, md, nullptr) != 1) {
    throw Error(ErrorCode::Io, "digest computation failed");
  }
  return hex(out, n);
}

}  // namespace detail

inline std::string sha256_hex(std::string_view data) { return detail::evp_digest(EVP_sha256(), data); }

/// Same id `git hash-object` assigns to a blob with this content.
inline std::string git_blob_hash(std::string_view data) {
  std::string blob = "blob " + std::to_string(data.size());
  blob.push_back('\0');
  blob.append(data);
  return detail::evp_digest(EVP_sha1(), blob);
}

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::Io, "cannot create directory " + dir.string());
}

inline std::string trajectory_csv(const Trajectory& tr) {
  std::string s = "t,mass,z_component_1,z_component_2,z_total\n";
  for (std::size_t j = 0; j < tr.size(); ++j) {
    s += format_real(tr.times[j]) + ',' + format_real(tr.running_mass[j]) + ',' + format_real(tr.running_z[0][j]) +
         ',' + format_real(tr.running_z[1][j]) + ',' + format_real(tr.z_total(j)) + '\n';
  }
  return s;
}

inline ojson report_to_json(const SolveReport& rep, const SimConfig& config, std::uint64_t path_index) {
  ojson j;
  j["scheme"] = std::string(to_string(rep.scheme));
  j["seed"] = config.seed;
  j["path_index"] = path_index;
  j["tau"] = json_real(rep.tau);
  j["T"] = config.T;
  j["reached_T"] = rep.tau >= config.T;
  j["truncation_ever_active"] = rep.truncation_ever_active;
  j["critical"] = rep.critical;
  j["max_outer_mass_fraction"] = json_real(rep.max_outer_mass_fraction);
  const Trajectory& tr = rep.trajectory;
  if (tr.size() > 0) {
    j["final_mass"] = json_real(tr.running_mass.back());
    j["initial_mass"] = json_real(tr.running_mass.front());
    j["z_T"] = json_real(tr.z_total(tr.size() - 1));
  }
  ojson w = ojson::array();
  for (const auto& r : rep.windows) {
    w.push_back({{"start", r.start},
                 {"length", r.length},
                 {"iterations", r.iterations},
                 {"contraction_ratio", json_real(r.contraction_ratio)}});
  }
  j["windows"] = std::move(w);
  j["config"] = config_to_json(config);
  return j;
}

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart with one shared x axis; each series is scaled to its own
/// range so curves of different magnitude stay readable.
inline std::string svg_plot(const std::string& title, const std::string& x_label,
                            const std::vector<SvgSeries>& series) {
  const double W = 720, H = 420, left = 70, right = 200, top = 40, bottom = 50;
  const double pw = W - left - right;
  const double ph = H - top - bottom;
  double xmin = INFINITY, xmax = -INFINITY;
  for (const auto& s : series) {
    for (double x : s.x) {
      if (!std::isfinite(x)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  }
  if (!(xmax > xmin)) {
    xmin = 0;
    xmax = 1;
  }
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double px = left + pw * k / 4.0;
    o << "<text x=\"" << px << "\" y=\"" << top + ph + 18 << "\" font-family=\"sans-serif\" font-size=\"11\" "
      << "text-anchor=\"middle\">" << format_real(std::round(xv * 1e4) / 1e4) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10
    << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << x_label << "</text>\n";
  double legend_y = top + 10;
  for (const auto& s : series) {
    double ymin = INFINITY, ymax = -INFINITY;
    for (double y : s.y) {
      if (!std::isfinite(y)) continue;
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
    if (!std::isfinite(ymin)) continue;
    if (!(ymax > ymin)) {
      ymin -= 0.5;
      ymax += 0.5;
    }
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double px = left + pw * (s.x[i] - xmin) / (xmax - xmin);
      const double py = top + ph * (1.0 - (s.y[i] - ymin) / (ymax - ymin));
      o << px << ',' << py << ' ';
    }
    o << "\"/>\n";
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << legend_y << "\" x2=\"" << left + pw + 32 << "\" y2=\""
      << legend_y << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 38 << "\" y=\"" << legend_y + 4
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    o << "<text x=\"" << left + pw + 38 << "\" y=\"" << legend_y + 18
      << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#555\">[" << format_real(ymin) << ", "
      << format_real(ymax) << "]</text>\n";
    legend_y += 40;
  }
  o << "</svg>\n";
  return o.str();
}

inline std::string trajectory_svg(const Trajectory& tr) {
  SvgSeries mass{"mass ||u||_2", "#1f77b4", tr.times, tr.running_mass};
  SvgSeries z{"Z_t", "#d62728", tr.times, {}};
  for (std::size_t j = 0; j < tr.size(); ++j) z.y.push_back(tr.z_total(j));
  return svg_plot("trajectory", "t", {mass, z});
}

struct ManifestEntry {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  ojson config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::string version = SNLS_VERSION;
  std::string started;
  std::string finished;
  std::vector<ManifestEntry> files;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// The config echo serialised the same way the hash sees it.
inline std::string canonical_config_text(const ojson& config) { return config.dump(2) + "\n"; }

inline RunManifest begin_manifest(std::string command, const SimConfig& config, std::uint64_t path_index) {
  RunManifest m;
  m.command = std::move(command);
  m.config = config_to_json(config);
  m.config_hash = git_blob_hash(canonical_config_text(m.config));
  m.seed = config.seed;
  m.path_index = path_index;
  m.started = utc_timestamp();
  return m;
}

/// Writes `content` under `dir` and records it in the inventory.
inline void emit_file(RunManifest& m, const fs::path& dir, const std::string& name, std::string_view content) {
  write_text_file(dir / name, content);
  m.files.push_back({name, sha256_hex(content), content.size()});
}

inline ojson manifest_to_json(const RunManifest& m) {
  ojson j;
  j["artifact_version"] = m.version;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["path_index"] = m.path_index;
  j["config_hash"] = m.config_hash;
  j["started"] = m.started;
  j["finished"] = m.finished;
  ojson files = ojson::array();
  for (const auto& f : m.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["files"] = std::move(files);
  j["config"] = m.config;
  return j;
}

inline void finish_manifest(RunManifest& m, const fs::path& dir) {
  m.finished = utc_timestamp();
  write_text_file(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

inline ojson mean_to_json(const MeanEstimate& e) {
  return {{"mean", json_real(e.mean)}, {"stderr", json_real(e.stderr_)}};
}

inline ojson ensemble_to_json(const EnsembleSummary& s) {
  ojson j;
  j["level"] = json_real(s.level);
  j["n_paths"] = s.n_paths;
  j["n_failed"] = s.n_failed;
  j["seed"] = s.seed;
  j["T"] = s.T;
  j["mean_yt_norm"] = mean_to_json(s.mean_yt_norm);
  ojson sup = ojson::object();
  for (const auto& [p, e] : s.mean_sup_mass_p) sup[std::to_string(p)] = mean_to_json(e);
  j["mean_sup_mass_p"] = std::move(sup);
  j["mean_z_T"] = mean_to_json(s.mean_z_T);
  j["tau_equals_T_frequency"] = mean_to_json(s.tau_equals_T_frequency);
  ojson paths = ojson::array();
  for (const auto& r : s.paths) {
    ojson p;
    p["path_index"] = r.path_index;
    p["ok"] = r.ok;
    if (!r.ok) p["failure"] = r.failure;
    p["tau"] = json_real(r.tau);
    p["z_T"] = json_real(r.z_T);
    p["yt_norm"] = json_real(r.yt_norm);
    p["sup_mass"] = json_real(r.sup_mass);
    paths.push_back(std::move(p));
  }
  j["paths"] = std::move(paths);
  return j;
}

inline std::string levels_csv(const UniformityStudy& study) {
  std::string s =
      "level,mean_yt_norm,stderr_yt_norm,tau_equals_T_frequency,stderr_frequency,mean_z_T,n_paths,n_failed\n";
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    const auto& r = study.rows[i];
    const auto& sm = study.summaries[i];
    s += format_real(r.level) + ',' + format_real(r.mean_yt_norm.mean) + ',' + format_real(r.mean_yt_norm.stderr_) +
         ',' + format_real(r.tau_equals_T_frequency.mean) + ',' + format_real(r.tau_equals_T_frequency.stderr_) + ',' +
         format_real(sm.mean_z_T.mean) + ',' + std::to_string(sm.n_paths) + ',' + std::to_string(r.n_failed) + '\n';
  }
  return s;
}

inline std::string paths_csv(const EnsembleSummary& s) {
  std::string out = "path_index,ok,tau,z_T,yt_norm,sup_mass\n";
  for (const auto& r : s.paths) {
    out += std::to_string(r.path_index) + ',' + (r.ok ? "1" : "0") + ',' + format_real(r.tau) + ',' +
           format_real(r.z_T) + ',' + format_real(r.yt_norm) + ',' + format_real(r.sup_mass) + '\n';
  }
  return out;
}

inline std::string levels_svg(const UniformityStudy& study) {
  SvgSeries yt{"E||u_n||_Y", "#1f77b4", {}, {}};
  SvgSeries freq{"P(tau_n = T)", "#2ca02c", {}, {}};
  for (const auto& r : study.rows) {
    yt.x.push_back(std::log2(r.level));
    yt.y.push_back(r.mean_yt_norm.mean);
    freq.x.push_back(std::log2(r.level));
    freq.y.push_back(r.tau_equals_T_frequency.mean);
  }
  return svg_plot("ensemble statistics by truncation level", "log2(level)", {yt, freq});
}

/// Process exit status for a library error: 2 bad input, 3 solver failure, 4 I/O.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoContraction:
    case ErrorCode::MaxItersExceeded:
    case ErrorCode::NonFinite:
      return 3;
    case ErrorCode::Io:
      return 4;
    default:
      return 2;
  }
}

inline std::string error_json(const Error& e) {
  ojson j;
  j["error"] = std::string(to_string(e.code()));
  j["exit_code"] = exit_code_for(e.code());
  j["reason"] = e.what();
  return j.dump();
}

}  // namespace snls
