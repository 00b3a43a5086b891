#include "qdpd/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "qdpd/errors.hpp"

namespace qdpd {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ' ' || ch == '\t' || ch == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

class Reader {
 public:
  Reader(std::map<std::string, Section> sections, std::string origin)
      : sections_(std::move(sections)), origin_(std::move(origin)) {}

  const Entry* find(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto e = s->second.find(key);
    return e == s->second.end() ? nullptr : &e->second;
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return e->value;
  }

  std::optional<double> number(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return parse_double(e->value, section + "." + key, e->line);
  }

  std::optional<std::int64_t> integer(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::int64_t v = 0;
    const char* b = e->value.data();
    const char* end = b + e->value.size();
    const auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) {
      throw ConfigError(where(e->line) + section + "." + key + " expects an integer, got '" +
                        e->value + "'");
    }
    return v;
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError(where(e->line) + section + "." + key + " expects a boolean, got '" +
                      e->value + "'");
  }

  double parse_double(const std::string& s, const std::string& key, int line) const {
    double v = 0.0;
    const char* b = s.data();
    const char* end = b + s.size();
    const auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) {
      throw ConfigError(where(line) + key + " expects a finite number, got '" + s + "'");
    }
    return v;
  }

  std::vector<double> numbers(const std::string& raw, const std::string& key, int line) const {
    std::vector<double> out;
    for (const std::string& t : tokens(raw)) out.push_back(parse_double(t, key, line));
    return out;
  }

  std::vector<std::string> unknown_keys() const {
    std::vector<std::string> out;
    for (const auto& [name, section] : sections_) {
      for (const auto& [key, entry] : section) {
        if (!used_.count(name + "." + key)) out.push_back(name + "." + key);
      }
    }
    return out;
  }

  std::string where(int line) const {
    return origin_ + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": ";
  }

 private:
  std::map<std::string, Section> sections_;
  std::string origin_;
  std::set<std::string> used_;
};

const std::set<std::string> kSections{"problem", "topology", "params", "run"};

std::map<std::string, Section> tokenize(const std::string& text, const std::string& origin) {
  std::map<std::string, Section> sections;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(number) + ": malformed section header");
      }
      current = trim(std::string_view(body).substr(1, body.size() - 2));
      if (!kSections.count(current)) {
        throw ConfigError(origin + ":" + std::to_string(number) + ": unknown section [" +
                          current + "]");
      }
      sections[current];
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
    }
    if (current.empty()) {
      throw ConfigError(origin + ":" + std::to_string(number) +
                        ": key outside of any section");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": empty key");
    }
    if (!sections[current].emplace(key, Entry{value, number}).second) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": duplicate key " +
                        current + "." + key);
    }
  }
  return sections;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

std::vector<PiecewiseQuadCoefficients> parse_piecewise(Reader& r, const Entry& e) {
  std::vector<PiecewiseQuadCoefficients> rows;
  for (const std::string& row : split(e.value, ';')) {
    const std::vector<double> v = r.numbers(row, "problem.coefficients", e.line);
    if (v.size() != 4) {
      throw ConfigError(r.where(e.line) +
                        "problem.coefficients rows need four numbers 'a b c d'");
    }
    rows.push_back({v[0], v[1], v[2], v[3]});
  }
  return rows;
}

std::vector<Eigen::VectorXd> parse_rows(Reader& r, const Entry& e, const std::string& key) {
  std::vector<Eigen::VectorXd> rows;
  for (const std::string& row : split(e.value, ';')) {
    const std::vector<double> v = r.numbers(row, key, e.line);
    if (v.empty()) throw ConfigError(r.where(e.line) + key + " has an empty row");
    rows.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return rows;
}

std::vector<Edge> parse_edges(Reader& r, const Entry& e) {
  std::vector<Edge> edges;
  for (const std::string& item : split(e.value, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      throw ConfigError(r.where(e.line) + "topology.edges items look like '1-2'");
    }
    const double u = r.parse_double(trim(item.substr(0, dash)), "topology.edges", e.line);
    const double v = r.parse_double(trim(item.substr(dash + 1)), "topology.edges", e.line);
    if (u != std::floor(u) || v != std::floor(v) || u < 1 || v < 1) {
      throw ConfigError(r.where(e.line) + "topology.edges uses 1-based integer node ids");
    }
    edges.push_back({static_cast<int>(u) - 1, static_cast<int>(v) - 1});
  }
  return edges;
}

std::string join_numbers(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += format_double(v[k]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  Reader r(tokenize(text, origin), origin);
  RunConfig cfg;
  std::vector<std::string> missing;

  // [problem]
  if (auto name = r.text("problem", "name")) cfg.problem.name = *name;
  if (cfg.problem.name != "table1" && cfg.problem.name != "inline") {
    throw ConfigError(origin + ": problem.name must be 'table1' or 'inline'");
  }
  if (auto family = r.text("problem", "family")) cfg.problem.family = *family;
  if (cfg.problem.family != "piecewise" && cfg.problem.family != "quadratic") {
    throw ConfigError(origin + ": problem.family must be 'piecewise' or 'quadratic'");
  }
  if (cfg.problem.name == "inline") {
    if (cfg.problem.family == "piecewise") {
      if (const Entry* e = r.find("problem", "coefficients")) {
        cfg.problem.piecewise = parse_piecewise(r, *e);
      } else {
        missing.push_back("problem.coefficients");
      }
    } else {
      const Entry* w = r.find("problem", "weights");
      const Entry* c = r.find("problem", "centers");
      if (!w) missing.push_back("problem.weights");
      if (!c) missing.push_back("problem.centers");
      if (w && c) {
        const auto ws = parse_rows(r, *w, "problem.weights");
        const auto cs = parse_rows(r, *c, "problem.centers");
        if (ws.size() != cs.size()) {
          throw ConfigError(origin + ": problem.weights and problem.centers disagree on the agent count");
        }
        for (std::size_t i = 0; i < ws.size(); ++i) {
          if (ws[i].size() != cs[i].size() || ws[i].size() != ws[0].size()) {
            throw ConfigError(origin + ": quadratic rows must share one dimension");
          }
          cfg.problem.quadratic.push_back({ws[i], cs[i]});
        }
      }
    }
  }

  // [topology]
  if (auto kind = r.text("topology", "kind")) cfg.topology.kind = *kind;
  if (cfg.topology.kind != "ring" && cfg.topology.kind != "complete" &&
      cfg.topology.kind != "edges") {
    throw ConfigError(origin + ": topology.kind must be 'ring', 'complete' or 'edges'");
  }
  if (auto nodes = r.integer("topology", "nodes")) {
    cfg.topology.nodes = static_cast<int>(*nodes);
  } else if (cfg.problem.name == "table1") {
    cfg.topology.nodes = 12;
  } else if (cfg.problem.family == "piecewise") {
    cfg.topology.nodes = static_cast<int>(cfg.problem.piecewise.size());
  } else {
    cfg.topology.nodes = static_cast<int>(cfg.problem.quadratic.size());
  }
  if (cfg.topology.kind == "edges") {
    if (const Entry* e = r.find("topology", "edges")) {
      cfg.topology.edges = parse_edges(r, *e);
    } else {
      missing.push_back("topology.edges");
    }
  }

  // [params]
  if (auto mode = r.text("params", "mode")) cfg.params.mode = *mode;
  if (cfg.params.mode != "manual" && cfg.params.mode != "derived") {
    throw ConfigError(origin + ": params.mode must be 'manual' or 'derived'");
  }
  ParamsConfig& p = cfg.params;
  p.T = r.number("params", "T");
  if (auto v = r.integer("params", "levels")) p.levels = static_cast<int>(*v);
  if (p.mode == "manual") {
    p.l0 = r.number("params", "l0");
    p.decay_per_step = r.number("params", "decay_per_step");
    p.eta = r.number("params", "eta");
    if (!p.T) missing.push_back("params.T");
    if (!p.l0) missing.push_back("params.l0");
    if (!p.decay_per_step) missing.push_back("params.decay_per_step");
    if (!p.levels) missing.push_back("params.levels");
  } else {
    p.kappa = r.number("params", "kappa");
    p.beta = r.number("params", "beta");
    p.c1 = r.number("params", "c1");
    p.c2 = r.number("params", "c2");
    p.rho0 = r.number("params", "rho0");
    if (!p.kappa) missing.push_back("params.kappa");
    if (!p.beta) missing.push_back("params.beta");
    if (!p.c1) missing.push_back("params.c1");
    if (!p.c2) missing.push_back("params.c2");
    if (!p.rho0) missing.push_back("params.rho0");
  }

  // [run]
  RunSection& run = cfg.run;
  if (auto v = r.number("run", "alpha")) run.alpha = *v;
  if (auto v = r.integer("run", "horizon_periods")) {
    run.horizon_periods = *v;
  } else {
    missing.push_back("run.horizon_periods");
  }
  if (auto v = r.integer("run", "substeps")) run.substeps = static_cast<int>(*v);
  if (auto v = r.integer("run", "seed")) run.seed = static_cast<std::uint64_t>(*v);
  if (auto v = r.text("run", "output")) run.output = *v;
  if (const Entry* e = r.find("run", "x0")) {
    const std::vector<double> v = r.numbers(e->value, "run.x0", e->line);
    run.x0 = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else {
    missing.push_back("run.x0");
  }
  if (auto v = r.boolean("run", "compare_exact")) run.compare_exact = *v;
  if (auto v = r.number("run", "blowup_guard")) run.blowup_guard = *v;

  if (p.mode == "manual") {
    for (const char* k : {"kappa", "beta", "c1", "c2", "rho0"}) {
      if (r.text("params", k)) {
        throw ConfigError(origin + ": params." + k + " is only valid in derived mode");
      }
    }
  } else {
    for (const char* k : {"l0", "decay_per_step", "eta"}) {
      if (r.text("params", k)) {
        throw ConfigError(origin + ": params." + k + " is only valid in manual mode");
      }
    }
  }
  if (cfg.problem.name == "table1") {
    for (const char* k : {"coefficients", "weights", "centers"}) {
      if (r.text("problem", k)) {
        throw ConfigError(origin + ": problem." + std::string(k) +
                          " is only valid for inline problems");
      }
    }
  }

  const std::vector<std::string> unknown = r.unknown_keys();
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError(origin + ": unknown keys: " + list);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError(origin + ": missing required keys: " + list);
  }

  require(run.alpha > 0, "run.alpha must be positive");
  require(run.horizon_periods >= 1, "run.horizon_periods must be at least 1");
  require(run.substeps >= 1, "run.substeps must be at least 1");
  require(run.blowup_guard > 0, "run.blowup_guard must be positive");
  require(cfg.topology.nodes >= 1, "topology.nodes must be positive");
  if (p.T) require(*p.T > 0, "params.T must be positive");
  if (p.levels) require(*p.levels >= 2, "params.levels must be at least 2");
  if (p.l0) require(*p.l0 > 0, "params.l0 must be positive");
  if (p.decay_per_step) require(*p.decay_per_step > 0, "params.decay_per_step must be positive");
  if (p.eta) require(*p.eta > 0, "params.eta must be positive");
  if (p.kappa) require(*p.kappa > 0, "params.kappa must be positive");
  if (p.beta) require(*p.beta > 0 && *p.beta < 1, "params.beta must lie in (0, 1)");
  if (p.c1) require(*p.c1 > 0 && *p.c1 < 1, "params.c1 must lie in (0, 1)");
  if (p.c2 && p.c1) require(*p.c2 > 0 && *p.c2 < 1 - *p.c1, "params.c2 must lie in (0, 1 - c1)");
  if (p.rho0) require(*p.rho0 > 1, "params.rho0 must exceed 1");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string canonical_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[problem]\n";
  out << "name = " << cfg.problem.name << "\n";
  if (cfg.problem.name == "inline") {
    out << "family = " << cfg.problem.family << "\n";
    if (cfg.problem.family == "piecewise") {
      out << "coefficients = ";
      for (std::size_t i = 0; i < cfg.problem.piecewise.size(); ++i) {
        const auto& k = cfg.problem.piecewise[i];
        out << (i ? " ; " : "") << format_double(k.a) << ' ' << format_double(k.b) << ' '
            << format_double(k.c) << ' ' << format_double(k.d);
      }
      out << "\n";
    } else {
      out << "weights = ";
      for (std::size_t i = 0; i < cfg.problem.quadratic.size(); ++i) {
        out << (i ? " ; " : "") << join_numbers(cfg.problem.quadratic[i].weights);
      }
      out << "\ncenters = ";
      for (std::size_t i = 0; i < cfg.problem.quadratic.size(); ++i) {
        out << (i ? " ; " : "") << join_numbers(cfg.problem.quadratic[i].centers);
      }
      out << "\n";
    }
  }
  out << "\n[topology]\n";
  out << "kind = " << cfg.topology.kind << "\n";
  out << "nodes = " << cfg.topology.nodes << "\n";
  if (cfg.topology.kind == "edges") {
    out << "edges = ";
    for (std::size_t i = 0; i < cfg.topology.edges.size(); ++i) {
      const Edge& e = cfg.topology.edges[i];
      out << (i ? ", " : "") << e.u + 1 << '-' << e.v + 1;
    }
    out << "\n";
  }
  const ParamsConfig& p = cfg.params;
  out << "\n[params]\n";
  out << "mode = " << p.mode << "\n";
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) out << key << " = " << format_double(*v) << "\n";
  };
  opt("T", p.T);
  opt("l0", p.l0);
  opt("decay_per_step", p.decay_per_step);
  if (p.levels) out << "levels = " << *p.levels << "\n";
  opt("eta", p.eta);
  opt("kappa", p.kappa);
  opt("beta", p.beta);
  opt("c1", p.c1);
  opt("c2", p.c2);
  opt("rho0", p.rho0);
  const RunSection& run = cfg.run;
  out << "\n[run]\n";
  out << "alpha = " << format_double(run.alpha) << "\n";
  out << "horizon_periods = " << run.horizon_periods << "\n";
  out << "substeps = " << run.substeps << "\n";
  out << "seed = " << run.seed << "\n";
  out << "output = " << run.output << "\n";
  out << "x0 = " << join_numbers(run.x0) << "\n";
  out << "compare_exact = " << (run.compare_exact ? "true" : "false") << "\n";
  out << "blowup_guard = " << format_double(run.blowup_guard) << "\n";
  return out.str();
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GlobalProblem build_problem(const ProblemConfig& cfg) {
  if (cfg.name == "table1") return table1_problem();
  if (cfg.family == "piecewise") return piecewise_problem(cfg.piecewise);
  std::vector<std::shared_ptr<const LocalCost>> costs;
  for (const QuadraticRow& row : cfg.quadratic) {
    costs.push_back(std::make_shared<DiagonalQuadraticCost>(row.weights, row.centers));
  }
  return GlobalProblem(std::move(costs));
}

NetworkGraph build_graph(const TopologyConfig& cfg) {
  if (cfg.kind == "ring") return NetworkGraph::ring(cfg.nodes);
  if (cfg.kind == "complete") return NetworkGraph::complete(cfg.nodes);
  return NetworkGraph(cfg.nodes, cfg.edges);
}

}  // namespace qdpd
