#include "csprop/formats.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "csprop/dynamics.hpp"

namespace csprop {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return trim(pos == std::string::npos ? line : line.substr(0, pos));
}

Rep parse_rep(const std::string& s) {
  if (s == "P" || s == "p") return Rep::P;
  if (s == "Q" || s == "q") return Rep::Q;
  if (s == "W" || s == "w") return Rep::W;
  throw ConfigError("unknown representation '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t' || c == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

ParsedOperatorFile parse_operator_text(std::istream& in) {
  ParsedOperatorFile out;
  std::string line;
  bool have_header = false;
  std::string rep_tag;
  TermMap terms;
  while (std::getline(in, line)) {
    line = strip_comment(line);
    if (line.empty()) continue;
    if (!have_header) {
      if (line.rfind("rep:", 0) != 0)
        throw ConfigError("operator file must start with 'rep: P|Q|W|op'");
      rep_tag = trim(line.substr(4));
      have_header = true;
      continue;
    }
    std::istringstream ls(line);
    int m = 0, n = 0;
    double re = 0.0, im = 0.0;
    if (!(ls >> m >> n >> re >> im) || m < 0 || n < 0)
      throw ConfigError("bad operator term line: '" + line + "'");
    if (re != 0.0 || im != 0.0) terms[{m, n}] += Complex{re, im};
  }
  if (!have_header) throw ConfigError("empty operator file");
  if (rep_tag == "op") {
    out.is_operator = true;
    out.op = NormalOrderedOperator(terms);
  } else {
    out.is_operator = false;
    out.sym = SymbolPolynomial(terms, parse_rep(rep_tag));
  }
  return out;
}

ParsedOperatorFile read_operator_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open operator file '" + path + "'");
  return parse_operator_text(in);
}

void write_symbol_text(std::ostream& out, const SymbolPolynomial& sym) {
  out << "rep: " << rep_name(sym.rep()) << "\n";
  for (const auto& [key, c] : sym.terms())
    out << key.m << " " << key.n << " " << format_g17(c.real()) << " "
        << format_g17(c.imag()) << "\n";
}

SpinOperator parse_spin_operator_text(std::istream& in) {
  std::string line;
  bool have_header = false;
  int two_j = 0;
  std::vector<std::tuple<int, int, int, Complex>> monomials;
  while (std::getline(in, line)) {
    line = strip_comment(line);
    if (line.empty()) continue;
    if (!have_header) {
      if (line.rfind("spin two_j:", 0) != 0)
        throw ConfigError("spin file must start with 'spin two_j: <int>'");
      two_j = std::stoi(trim(line.substr(11)));
      if (two_j < 1) throw ConfigError("two_j must be >= 1");
      have_header = true;
      continue;
    }
    std::istringstream ls(line);
    int p = 0, q = 0, r = 0;
    double re = 0.0, im = 0.0;
    if (!(ls >> p >> q >> r >> re >> im) || p < 0 || q < 0 || r < 0)
      throw ConfigError("bad spin term line: '" + line + "'");
    monomials.emplace_back(p, q, r, Complex{re, im});
  }
  if (!have_header) throw ConfigError("empty spin operator file");
  return spin_operator_from_monomials(SpinQuantum{two_j}, monomials);
}

SpinOperator read_spin_operator_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spin operator file '" + path + "'");
  return parse_spin_operator_text(in);
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string csv_complex(Complex c) {
  return format_g17(c.real()) + "," + format_g17(c.imag());
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_comment(line);
    if (line.empty()) continue;
    const auto pos = line.find(':');
    if (pos == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key: value'");
    const std::string key = trim(line.substr(0, pos));
    const std::string value = trim(line.substr(pos + 1));
    if (key == "task") {
      cfg.task = value;
    } else if (key == "system") {
      cfg.system = value;
    } else if (key == "operator") {
      cfg.operator_path = value;
    } else if (key == "rep" || key == "reps") {
      for (const auto& r : split_list(value)) cfg.reps.push_back(parse_rep(r));
    } else if (key == "point") {
      std::istringstream ls(value);
      double a, b, c, d;
      if (!(ls >> a >> b >> c >> d))
        throw ConfigError("point needs 4 reals: re_zi im_zi re_zbarf im_zbarf");
      cfg.points.push_back({{a, b}, {c, d}});
    } else if (key == "T") {
      for (const auto& t : split_list(value)) cfg.times.push_back(std::stod(t));
    } else if (key == "M") {
      cfg.M = std::stoi(value);
    } else if (key == "two_j") {
      cfg.two_j = std::stoi(value);
    } else if (key == "nmax") {
      cfg.nmax = std::stoi(value);
    } else if (key == "tol") {
      cfg.tol = std::stod(value);
    } else if (key == "out") {
      cfg.out_path = value;
    } else if (key == "target") {
      cfg.target = parse_rep(value);
    } else if (key == "schemes") {
      cfg.schemes = split_list(value);
    } else if (key == "Mlist") {
      for (const auto& m : split_list(value)) cfg.m_list.push_back(std::stoi(m));
    } else if (key == "threads") {
      cfg.threads = std::stoi(value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void write_trajectory_csv(std::ostream& out, const ClassicalTrajectory& traj) {
  out << "t,re_z,im_z,re_zbar,im_zbar,re_v,im_v\n";
  for (int k = 0; k <= traj.grid.M; ++k) {
    const double t = traj.grid.delta() * k;
    out << format_g17(t) << "," << csv_complex(traj.z[k]) << ","
        << csv_complex(traj.zbar[k]) << "," << csv_complex(traj.v[k]) << "\n";
  }
}

}  // namespace csprop
