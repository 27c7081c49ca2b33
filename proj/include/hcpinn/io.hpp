#pragma once

// Run config files (INI sections per module) and CSV outputs.
//
// Config example:
//
//   [problem]
//   name = low_frequency
//   [constraint]
//   strategy = new_hc
//   [embedding]
//   kind = hc_cosine
//   n_freq = 1
//   [network]
//   hidden = 50,50,50
//   [training]
//   learning_rate = 1e-4
//   iterations = 20000
//   [collocation]
//   n_pde = 4000
//   n_ic = 200
//   n_bc = 200
//   [seeds]
//   weights = 1
//   collocation = 2
//   frequencies = 3
//   [eval]
//   nx = 256
//   nt = 101

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hcpinn/errors.hpp"
#include "hcpinn/harness.hpp"

namespace hcpinn {

/// Shortest decimal that round-trips a double exactly.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::uint64_t parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("not a non-negative integer: '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <class T, class Fmt>
std::string join(const std::vector<T>& v, Fmt fmt) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt(v[i]);
  }
  return s;
}

inline bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + std::string(s) + "'");
}

/// Drops a trailing "; ..." or "# ..." comment that follows whitespace.
inline std::string strip_inline_comment(std::string v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if ((v[i] == ';' || v[i] == '#') && (v[i - 1] == ' ' || v[i - 1] == '\t')) {
      v.erase(i);
      break;
    }
  }
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.pop_back();
  return v;
}

inline RunConfig parse_config(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  auto opt = [&](const std::string& key) -> std::optional<std::string> {
    auto v = tree.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return strip_inline_comment(*v);
  };
  auto req = [&](const std::string& key) {
    auto v = opt(key);
    if (!v) throw ConfigError("config: missing required key '" + key + "'");
    return *v;
  };

  RunConfig c;
  c.iterations.reset();
  c.problem = req("problem.name");
  if (auto v = opt("problem.expression")) {
    c.initial_condition = *v;
    c.diffusivity = parse_double(req("problem.diffusivity"));
  }
  c.strategy = strategy_from_string(req("constraint.strategy"));
  if (auto v = opt("constraint.normalized_shift")) c.normalized_shift = parse_bool(*v);
  c.embedding = embedding_kind_from_string(opt("embedding.kind").value_or("identity"));
  if (auto v = opt("embedding.n_freq")) c.n_freq = parse_uint(*v);
  if (auto v = opt("embedding.sigma")) c.sigma = parse_double(*v);
  if (auto v = opt("embedding.frequencies")) {
    for (const auto& f : split(*v, ',')) c.frequencies.push_back(parse_double(f));
  }
  if (auto v = opt("network.hidden")) {
    c.hidden.clear();
    for (const auto& h : split(*v, ',')) c.hidden.push_back(parse_uint(h));
  }
  if (auto v = opt("training.learning_rate")) c.learning_rate = parse_double(*v);
  if (auto v = opt("training.iterations")) c.iterations = parse_uint(*v);
  if (auto v = opt("training.wall_clock_seconds")) c.wall_clock_seconds = parse_double(*v);
  if (auto v = opt("training.resample_collocation")) c.resample_collocation = parse_bool(*v);
  if (auto v = opt("training.lambda_pde")) c.weights.pde = parse_double(*v);
  if (auto v = opt("training.lambda_ic")) c.weights.ic = parse_double(*v);
  if (auto v = opt("training.lambda_bc")) c.weights.bc = parse_double(*v);
  if (auto v = opt("collocation.n_pde")) c.counts.pde = parse_uint(*v);
  if (auto v = opt("collocation.n_ic")) c.counts.ic = parse_uint(*v);
  if (auto v = opt("collocation.n_bc")) c.counts.bc = parse_uint(*v);
  c.seed_weights = parse_uint(req("seeds.weights"));
  c.seed_collocation = parse_uint(req("seeds.collocation"));
  c.seed_frequencies = parse_uint(req("seeds.frequencies"));
  if (auto v = opt("eval.nx")) c.eval_nx = parse_uint(*v);
  if (auto v = opt("eval.nt")) c.eval_nt = parse_uint(*v);
  if (auto v = opt("eval.series_terms")) c.series_terms = parse_uint(*v);
  c.validate();
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return parse_config(is);
}

inline std::string emit_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[problem]\nname = " << c.problem << '\n';
  if (!c.initial_condition.empty()) {
    os << "expression = " << c.initial_condition << "\ndiffusivity = " << format_double(c.diffusivity) << '\n';
  }
  os << "\n[constraint]\nstrategy = " << to_string(c.strategy)
     << "\nnormalized_shift = " << (c.normalized_shift ? "true" : "false") << '\n';
  os << "\n[embedding]\nkind = " << to_string(c.embedding) << "\nn_freq = " << c.n_freq
     << "\nsigma = " << format_double(c.sigma) << '\n';
  if (!c.frequencies.empty()) os << "frequencies = " << join(c.frequencies, format_double) << '\n';
  os << "\n[network]\nhidden = " << join(c.hidden, [](std::size_t h) { return std::to_string(h); }) << '\n';
  os << "\n[training]\nlearning_rate = " << format_double(c.learning_rate) << '\n';
  if (c.iterations) os << "iterations = " << *c.iterations << '\n';
  if (c.wall_clock_seconds) os << "wall_clock_seconds = " << format_double(*c.wall_clock_seconds) << '\n';
  os << "resample_collocation = " << (c.resample_collocation ? "true" : "false") << '\n'
     << "lambda_pde = " << format_double(c.weights.pde) << "\nlambda_ic = " << format_double(c.weights.ic)
     << "\nlambda_bc = " << format_double(c.weights.bc) << '\n';
  os << "\n[collocation]\nn_pde = " << c.counts.pde << "\nn_ic = " << c.counts.ic << "\nn_bc = " << c.counts.bc
     << '\n';
  os << "\n[seeds]\nweights = " << c.seed_weights << "\ncollocation = " << c.seed_collocation
     << "\nfrequencies = " << c.seed_frequencies << '\n';
  os << "\n[eval]\nnx = " << c.eval_nx << "\nnt = " << c.eval_nt << "\nseries_terms = " << c.series_terms << '\n';
  return os.str();
}

/// Scales a desk-size config up to the published hyperparameters.
inline void apply_full_scale(RunConfig& c) {
  c.hidden = {100, 100, 100};
  c.counts = CollocationCounts::full();
  if (c.iterations) c.iterations = 1000000;
}

/// Applies "key=value" with key one of weights, collocation, frequencies.
inline void apply_seed_override(RunConfig& c, std::string_view kv) {
  const auto eq = kv.find('=');
  if (eq == std::string_view::npos) throw ConfigError("seed override must be key=value");
  const auto key = kv.substr(0, eq);
  const auto value = parse_uint(kv.substr(eq + 1));
  if (key == "weights") {
    c.seed_weights = value;
  } else if (key == "collocation") {
    c.seed_collocation = value;
  } else if (key == "frequencies") {
    c.seed_frequencies = value;
  } else {
    throw ConfigError("unknown seed '" + std::string(key) + "'");
  }
}

// ---- metrics CSV -----------------------------------------------------------

inline constexpr std::string_view kMetricsHeader =
    "problem,strategy,embedding_kind,n_freq,sigma,seed_w,seed_c,seed_f,iters,ms_per_iter,best_loss,rel_l2,"
    "improvement_pct";

/// Fields of one metrics CSV row.
struct MetricsRow {
  std::string problem;
  std::string strategy;
  std::string embedding_kind;
  std::size_t n_freq = 0;
  double sigma = 0.0;
  std::uint64_t seed_w = 0, seed_c = 0, seed_f = 0;
  std::size_t iters = 0;
  double ms_per_iter = 0.0;
  double best_loss = 0.0;
  double rel_l2 = 0.0;
  double improvement_pct = 0.0;

  friend bool operator==(const MetricsRow& a, const MetricsRow& b) {
    auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    return a.problem == b.problem && a.strategy == b.strategy && a.embedding_kind == b.embedding_kind &&
           a.n_freq == b.n_freq && same(a.sigma, b.sigma) && a.seed_w == b.seed_w && a.seed_c == b.seed_c &&
           a.seed_f == b.seed_f && a.iters == b.iters && same(a.ms_per_iter, b.ms_per_iter) &&
           same(a.best_loss, b.best_loss) && same(a.rel_l2, b.rel_l2) &&
           same(a.improvement_pct, b.improvement_pct);
  }
};

inline MetricsRow metrics_row(const RunMetrics& m) {
  const auto& c = m.config;
  const std::size_t n_freq = c.embedding == EmbeddingKind::identity ? 0 : m.frequencies.size();
  return {c.problem, std::string(to_string(c.strategy)), std::string(to_string(c.embedding)), n_freq, c.sigma,
          c.seed_weights, c.seed_collocation, c.seed_frequencies, m.iterations, m.ms_per_iter, m.best_loss,
          m.rel_l2, m.improvement_pct};
}

inline std::string emit_metrics_line(const MetricsRow& r) {
  std::ostringstream os;
  os << r.problem << ',' << r.strategy << ',' << r.embedding_kind << ',' << r.n_freq << ','
     << format_double(r.sigma) << ',' << r.seed_w << ',' << r.seed_c << ',' << r.seed_f << ',' << r.iters << ','
     << format_double(r.ms_per_iter) << ',' << format_double(r.best_loss) << ',' << format_double(r.rel_l2)
     << ',' << format_double(r.improvement_pct);
  return os.str();
}

inline std::string emit_metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string s(kMetricsHeader);
  s += '\n';
  for (const auto& r : rows) s += emit_metrics_line(r) + '\n';
  return s;
}

inline std::vector<MetricsRow> parse_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMetricsHeader) throw ConfigError("metrics CSV: bad header");
  std::vector<MetricsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 13) throw ConfigError("metrics CSV: expected 13 fields, got " + std::to_string(f.size()));
    rows.push_back({f[0], f[1], f[2], parse_uint(f[3]), parse_double(f[4]), parse_uint(f[5]), parse_uint(f[6]),
                    parse_uint(f[7]), parse_uint(f[8]), parse_double(f[9]), parse_double(f[10]),
                    parse_double(f[11]), parse_double(f[12])});
  }
  return rows;
}

inline std::string emit_history_csv(const std::vector<HistoryRow>& h) {
  std::string s = "iteration,total,pde,ic,bc\n";
  for (const auto& r : h) {
    s += std::to_string(r.iteration) + ',' + format_double(r.total) + ',' + format_double(r.pde) + ',' +
         format_double(r.ic) + ',' + format_double(r.bc) + '\n';
  }
  return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os << text;
}

}  // namespace hcpinn
