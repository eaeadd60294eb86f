#pragma once

// File formats: CSV ingestion, shortest round-trip number formatting, the
// columnar draws file with its JSON manifest, and summary tables.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "convergence.hpp"
#include "data.hpp"
#include "draws.hpp"
#include "error.hpp"

namespace qvp::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootVariable = "QVP_OUTPUT_ROOT";

inline fs::path default_output_root() {
  const char* env = std::getenv(kOutputRootVariable);
  return (env != nullptr && *env != '\0') ? fs::path(env) : fs::path("qvp_output");
}

// ---------------------------------------------------------------------------
// Numbers

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Parse a whole cell as a double; false on any leftover characters.
inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// ---------------------------------------------------------------------------
// CSV reading

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::string(trim(cell)));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  out.push_back(std::string(trim(cell)));
  return out;
}

/// Numeric table with a header row. Rows are numbered as in the file (header = 1).
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;

  int column(const std::string& name_or_index) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name_or_index) return static_cast<int>(j);
    double idx = 0.0;
    if (parse_double(name_or_index, idx) && idx == std::floor(idx) && idx >= 1 && idx <= header.size())
      return static_cast<int>(idx) - 1;
    throw IngestionError("column '" + name_or_index + "' not found in header");
  }
};

inline bool is_missing_token(std::string_view s) {
  static constexpr std::string_view tokens[] = {"", "NA", "na", "N/A", "NaN", "nan", "NAN", "null", "NULL", "."};
  return std::find(std::begin(tokens), std::end(tokens), s) != std::end(tokens);
}

inline CsvTable parse_csv(std::istream& in, const std::string& source = "input") {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(source + ": empty file");
  if (line.size() >= 3 && std::memcmp(line.data(), "\xEF\xBB\xBF", 3) == 0) line.erase(0, 3);
  t.header = split_csv_line(line);
  const std::size_t width = t.header.size();
  for (std::size_t j = 0; j < width; ++j)
    if (t.header[j].empty()) throw IngestionError(source + ": empty header name in column " + std::to_string(j + 1));

  std::vector<double> cells;
  long row = 1, rows = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto parts = split_csv_line(line);
    if (parts.size() != width)
      throw IngestionError(source + ": row " + std::to_string(row) + " has " + std::to_string(parts.size()) +
                           " cells, header has " + std::to_string(width));
    for (std::size_t j = 0; j < width; ++j) {
      const std::string where =
          "row " + std::to_string(row) + ", column " + std::to_string(j + 1) + " ('" + t.header[j] + "')";
      if (is_missing_token(parts[j])) throw IngestionError(source + ": missing value at " + where);
      double v = 0.0;
      if (!parse_double(parts[j], v) || !std::isfinite(v))
        throw IngestionError(source + ": non-numeric value '" + parts[j] + "' at " + where);
      cells.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw IngestionError(source + ": no data rows");
  t.values.resize(rows, static_cast<Eigen::Index>(width));
  for (long i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < width; ++j) t.values(i, static_cast<Eigen::Index>(j)) = cells[i * width + j];
  return t;
}

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'");
  return parse_csv(in, path.string());
}

struct Ingested {
  Dataset dataset;                    ///< design rescaled to [-1, 1]^K
  std::vector<std::string> warnings;  ///< e.g. constant columns
};

/// Response/design split of a table; every other column becomes a covariate.
inline Ingested ingest_table(const CsvTable& t, const std::string& target) {
  const int y = t.column(target);
  if (t.header.size() < 2) throw IngestionError("need a response and at least one covariate column");
  Ingested out;
  Eigen::MatrixXd x(t.values.rows(), t.values.cols() - 1);
  std::vector<std::string> names;
  for (int j = 0, c = 0; j < t.values.cols(); ++j) {
    if (j == y) continue;
    x.col(c++) = t.values.col(j);
    names.push_back(t.header[j]);
  }
  out.dataset = make_dataset(t.values.col(y), std::move(x));
  out.dataset.response_name = t.header[y];
  out.dataset.covariate_names = names;
  for (int j : out.dataset.rescale())
    out.warnings.push_back("column '" + names[j] + "' is constant; rescaled to 0 (degenerate range)");
  return out;
}

inline Ingested ingest_csv(const fs::path& path, const std::string& target) { return ingest_table(read_csv(path), target); }

/// Multivariate ingestion for the QVAR commands: every column is a variable.
inline CsvTable ingest_multivariate(const fs::path& path) {
  CsvTable t = read_csv(path);
  if (t.values.rows() < 3) throw IngestionError(path.string() + ": need at least 3 rows");
  return t;
}

struct ScenarioTable {
  std::vector<std::string> header;
  Eigen::MatrixXd levels;  ///< steps x variables; NaN = level drawn freely
};

/// Stress scenario: one row per step, one column per variable, each cell a
/// quantile level or empty / NA for a freely drawn level.
inline ScenarioTable read_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'");
  ScenarioTable t;
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(path.string() + ": empty file");
  t.header = split_csv_line(line);
  std::vector<std::vector<double>> rows;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto parts = split_csv_line(line);
    if (parts.size() != t.header.size())
      throw IngestionError(path.string() + ": row " + std::to_string(row) + " has the wrong number of cells");
    std::vector<double> r;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!is_missing_token(parts[j]) && (!parse_double(parts[j], v) || !(v > 0.0 && v < 1.0)))
        throw IngestionError(path.string() + ": row " + std::to_string(row) + ", column " + std::to_string(j + 1) +
                             " ('" + t.header[j] + "') is not a quantile level in (0, 1)");
      r.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw IngestionError(path.string() + ": scenario has no steps");
  t.levels.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) t.levels(i, j) = rows[i][j];
  return t;
}

// ---------------------------------------------------------------------------
// Writing

/// Accumulates CSV text; numbers are written in shortest round-trip form.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row(header); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += escape(cells[i]);
    }
    text_ += '\n';
  }

  const std::string& str() const noexcept { return text_; }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  }
  std::string text_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IngestionError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Draws: columnar binary + JSON manifest

/// Column labels of one block, e.g. beta[0.05,x1], alpha[0.5], beta0[x2].
inline std::vector<std::string> block_labels(const std::string& block, const std::vector<double>& taus,
                                             const std::vector<std::string>& covariates) {
  std::vector<std::string> out;
  const auto per_tau_cov = [&] {
    for (double t : taus)
      for (const auto& c : covariates) out.push_back(block + "[" + format_double(t) + "," + c + "]");
  };
  if (block == "beta" || block == "lambda2" || block == "sigma" || block == "beta_tilde") {
    per_tau_cov();
  } else if (block == "alpha" || block == "sigma_y" || block == "nu2") {
    for (double t : taus) out.push_back(block + "[" + format_double(t) + "]");
  } else if (block == "beta0" || block == "lambda0_2") {
    for (const auto& c : covariates) out.push_back(block + "[" + c + "]");
  } else if (block == "nu0_2") {
    out.push_back(block);
  } else {
    throw ParameterError("unknown draws block '" + block + "'");
  }
  return out;
}

inline constexpr const char* kDrawsFormat = "qvp-draws-1";

/// Write draws.bin (little-endian float64) and draws.json. Within a block,
/// each column is one contiguous vector of chains * draws values, chain by chain.
inline void write_draws(const fs::path& dir, const PosteriorDraws& d, const std::vector<std::string>& covariates) {
  if (d.chains.empty()) throw ParameterError("write_draws: no chains");
  if (static_cast<int>(covariates.size()) != d.covariates)
    throw ParameterError("write_draws: covariate names do not match the draws");
  static_assert(std::numeric_limits<double>::is_iec559, "float64 layout required");
  fs::create_directories(dir);
  const int n = d.draws_per_chain(), nc = static_cast<int>(d.chains.size());
  std::string bytes;
  json blocks = json::array();
  std::uint64_t offset = 0;
  const auto blocks0 = d.chains[0].blocks();
  for (std::size_t bi = 0; bi < blocks0.size(); ++bi) {
    const auto& b = blocks0[bi];
    const auto cols = b.values->cols();
    const auto labels = block_labels(b.name, d.taus, covariates);
    if (static_cast<Eigen::Index>(labels.size()) != cols) throw ParameterError("write_draws: block shape mismatch");
    for (Eigen::Index c = 0; c < cols; ++c)
      for (int h = 0; h < nc; ++h) {
        const Eigen::MatrixXd& m = *d.chains[h].blocks()[bi].values;
        for (int s = 0; s < n; ++s) {
          const double v = m(s, c);
          char raw[8];
          std::memcpy(raw, &v, 8);
          if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + 8);
          bytes.append(raw, 8);
        }
      }
    blocks.push_back({{"name", b.name}, {"columns", cols}, {"offset", offset}, {"labels", labels}});
    offset += static_cast<std::uint64_t>(cols) * nc * n * 8;
  }
  json manifest = {{"format", kDrawsFormat},
                   {"dtype", "float64"},
                   {"byte_order", "little"},
                   {"layout", "per block, column by column; each column holds chains x draws values, chain-major"},
                   {"sampler", to_string(d.kind)},
                   {"chains", nc},
                   {"draws_per_chain", n},
                   {"quantiles", d.quantiles},
                   {"covariates", d.covariates},
                   {"taus", d.taus},
                   {"covariate_names", covariates},
                   {"blocks", blocks}};
  write_text(dir / "draws.bin", bytes);
  write_json(dir / "draws.json", manifest);
}

struct LoadedDraws {
  PosteriorDraws draws;
  std::vector<std::string> covariate_names;
};

inline LoadedDraws read_draws(const fs::path& dir) {
  const json m = read_json(dir / "draws.json");
  if (m.value("format", "") != kDrawsFormat) throw IngestionError("draws.json: unknown format");
  std::ifstream in(dir / "draws.bin", std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + (dir / "draws.bin").string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  LoadedDraws out;
  PosteriorDraws& d = out.draws;
  d.kind = sampler_kind_from_string(m.at("sampler").get<std::string>());
  d.quantiles = m.at("quantiles").get<int>();
  d.covariates = m.at("covariates").get<int>();
  d.taus = m.at("taus").get<std::vector<double>>();
  out.covariate_names = m.at("covariate_names").get<std::vector<std::string>>();
  const int nc = m.at("chains").get<int>(), n = m.at("draws_per_chain").get<int>();
  d.chains.resize(nc);
  for (const auto& b : m.at("blocks")) {
    const std::string name = b.at("name").get<std::string>();
    const auto cols = b.at("columns").get<Eigen::Index>();
    const auto offset = b.at("offset").get<std::uint64_t>();
    if (offset + static_cast<std::uint64_t>(cols) * nc * n * 8 > bytes.size())
      throw IngestionError("draws.bin is shorter than the manifest says");
    Eigen::MatrixXd ChainDraws::*member = nullptr;
    for (auto [label, ptr] : std::initializer_list<std::pair<const char*, Eigen::MatrixXd ChainDraws::*>>{
             {"beta", &ChainDraws::beta}, {"beta0", &ChainDraws::beta0}, {"alpha", &ChainDraws::alpha},
             {"sigma_y", &ChainDraws::sigma_y}, {"nu2", &ChainDraws::nu2}, {"lambda2", &ChainDraws::lambda2},
             {"nu0_2", &ChainDraws::nu0_2}, {"lambda0_2", &ChainDraws::lambda0_2}, {"sigma", &ChainDraws::sigma},
             {"beta_tilde", &ChainDraws::beta_tilde}})
      if (name == label) member = ptr;
    if (member == nullptr) throw IngestionError("draws.json: unknown block '" + name + "'");
    for (auto& c : d.chains) (c.*member).resize(n, cols);
    std::uint64_t pos = offset;
    for (Eigen::Index c = 0; c < cols; ++c)
      for (int h = 0; h < nc; ++h)
        for (int s = 0; s < n; ++s, pos += 8) {
          char raw[8];
          std::memcpy(raw, bytes.data() + pos, 8);
          if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + 8);
          double v = 0.0;
          std::memcpy(&v, raw, 8);
          (d.chains[h].*member)(s, c) = v;
        }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

struct ParameterSummary {
  std::string label;
  double mean = 0.0, sd = 0.0, q025 = 0.0, q500 = 0.0, q975 = 0.0;
  ConvergenceReport conv;
};

/// Type-7 empirical quantile of a sorted vector.
inline double sorted_quantile(const std::vector<double>& v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Posterior summaries of every column of every block, with convergence
/// statistics when at least two chains of four or more draws exist.
inline std::vector<ParameterSummary> summarise(const PosteriorDraws& d, const std::vector<std::string>& covariates) {
  std::vector<ParameterSummary> out;
  if (d.chains.empty()) return out;
  const int nc = static_cast<int>(d.chains.size()), n = d.draws_per_chain();
  const auto blocks0 = d.chains[0].blocks();
  for (std::size_t b = 0; b < blocks0.size(); ++b) {
    const auto labels = block_labels(blocks0[b].name, d.taus, covariates);
    for (Eigen::Index c = 0; c < blocks0[b].values->cols(); ++c) {
      Eigen::MatrixXd per_chain(nc, n);
      for (int h = 0; h < nc; ++h) per_chain.row(h) = d.chains[h].blocks()[b].values->col(c).transpose();
      std::vector<double> v(per_chain.data(), per_chain.data() + per_chain.size());
      ParameterSummary s;
      s.label = labels[c];
      double sum = 0.0;
      for (double x : v) sum += x;
      s.mean = sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      std::sort(v.begin(), v.end());
      s.q025 = sorted_quantile(v, 0.025);
      s.q500 = sorted_quantile(v, 0.5);
      s.q975 = sorted_quantile(v, 0.975);
      if (nc >= 2 && n >= 4) s.conv = rank_normalized_rhat_ess(per_chain);
      out.push_back(s);
    }
  }
  return out;
}

inline const std::vector<std::string>& summary_header() {
  static const std::vector<std::string> h{"parameter", "mean", "sd", "q2.5", "q50", "q97.5",
                                          "rhat", "rhat_bulk", "rhat_folded", "ess_bulk"};
  return h;
}

inline std::string summary_csv(const std::vector<ParameterSummary>& rows) {
  CsvWriter w(summary_header());
  for (const auto& s : rows)
    w.row({s.label, format_double(s.mean), format_double(s.sd), format_double(s.q025), format_double(s.q500),
           format_double(s.q975), format_double(s.conv.rhat), format_double(s.conv.rhat_bulk),
           format_double(s.conv.rhat_folded), format_double(s.conv.ess_bulk)});
  return w.str();
}

/// Inverse of summary_csv.
inline std::vector<ParameterSummary> parse_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != summary_header())
    throw IngestionError("summary csv: unexpected header");
  std::vector<ParameterSummary> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != summary_header().size()) throw IngestionError("summary csv: bad row '" + line + "'");
    ParameterSummary s;
    s.label = c[0];
    double* fields[] = {&s.mean, &s.sd, &s.q025, &s.q500, &s.q975,
                        &s.conv.rhat, &s.conv.rhat_bulk, &s.conv.rhat_folded, &s.conv.ess_bulk};
    for (std::size_t i = 0; i < 9; ++i)
      if (!parse_double(c[i + 1], *fields[i])) throw IngestionError("summary csv: bad number '" + c[i + 1] + "'");
    out.push_back(s);
  }
  return out;
}

/// Wide coefficient profile: one row per quantile, mean/lo95/hi95 per covariate.
inline std::string beta_profile_csv(const PosteriorDraws& d, const std::vector<std::string>& covariates) {
  std::vector<std::string> header{"tau"};
  for (const auto& c : covariates)
    for (const char* s : {"_mean", "_lo95", "_hi95"}) header.push_back(c + s);
  CsvWriter w(header);
  const Eigen::MatrixXd pooled = d.pooled(&ChainDraws::beta);
  for (int q = 0; q < d.quantiles; ++q) {
    std::vector<std::string> row{format_double(d.taus[q])};
    for (int j = 0; j < d.covariates; ++j) {
      const Eigen::VectorXd col = pooled.col(q * d.covariates + j);
      std::vector<double> v(col.data(), col.data() + col.size());
      std::sort(v.begin(), v.end());
      row.push_back(format_double(col.mean()));
      row.push_back(format_double(sorted_quantile(v, 0.025)));
      row.push_back(format_double(sorted_quantile(v, 0.975)));
    }
    w.row(row);
  }
  return w.str();
}

/// Long-format profile of beta and alpha for plotting: block, covariate, tau, mean, lo95, hi95.
inline std::string profile_long_csv(const PosteriorDraws& d, const std::vector<std::string>& covariates) {
  CsvWriter w({"block", "covariate", "tau", "mean", "lo95", "hi95"});
  const auto emit = [&](const std::string& block, const std::string& cov, double tau, const Eigen::VectorXd& col) {
    std::vector<double> v(col.data(), col.data() + col.size());
    std::sort(v.begin(), v.end());
    w.row({block, cov, format_double(tau), format_double(col.mean()), format_double(sorted_quantile(v, 0.025)),
           format_double(sorted_quantile(v, 0.975))});
  };
  const Eigen::MatrixXd beta = d.pooled(&ChainDraws::beta), alpha = d.pooled(&ChainDraws::alpha);
  for (int j = 0; j < d.covariates; ++j)
    for (int q = 0; q < d.quantiles; ++q) emit("beta", covariates[j], d.taus[q], beta.col(q * d.covariates + j));
  for (int q = 0; q < d.quantiles; ++q) emit("alpha", "(intercept)", d.taus[q], alpha.col(q));
  return w.str();
}

}  // namespace qvp::io
