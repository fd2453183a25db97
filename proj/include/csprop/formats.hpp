// Text formats: operator/symbol files, spin operator files, run configs,
// and fixed-precision CSV helpers.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "csprop/operator_algebra.hpp"
#include "csprop/spin.hpp"
#include "csprop/symbols.hpp"
#include "csprop/types.hpp"

namespace csprop {

/// Operator/symbol text: header line `rep: P|Q|W|op`, then one term per
/// line `m n re im` (powers of adag/zbar then a/z), `#` comments.
struct ParsedOperatorFile {
  bool is_operator = true;  // header `rep: op`
  NormalOrderedOperator op;
  SymbolPolynomial sym;
};

ParsedOperatorFile parse_operator_text(std::istream& in);
ParsedOperatorFile read_operator_file(const std::string& path);
void write_symbol_text(std::ostream& out, const SymbolPolynomial& sym);

/// Spin operator text: header `spin two_j: <int>`, then lines
/// `p q r re im` for J+^p Jz^q J-^r terms (applied in that order).
SpinOperator parse_spin_operator_text(std::istream& in);
SpinOperator read_spin_operator_file(const std::string& path);

/// 17-significant-digit fixed formatting for deterministic CSV output.
std::string format_g17(double x);
std::string csv_complex(Complex c);  // "re,im" with g17 fields

struct BoundaryPoint {
  Complex z_i, zbar_f;
};

struct RunConfig {
  std::string task;            // transform|propagate|compare|discrete-check|sweep
  std::string system = "particle";
  std::string operator_path;
  std::vector<Rep> reps;
  std::vector<BoundaryPoint> points;
  std::vector<double> times;
  int M = 400;
  int two_j = 0;               // informative for spin; file header is binding
  int nmax = 64;
  double tol = 1e-10;
  std::string out_path;
  Rep target = Rep::W;         // transform
  std::vector<std::string> schemes;  // discrete-check
  std::vector<int> m_list;           // discrete-check
  int threads = 1;
};

RunConfig parse_config(std::istream& in);
RunConfig read_config_file(const std::string& path);

struct ClassicalTrajectory;

/// Trajectory CSV: t, Re z, Im z, Re zbar, Im zbar, Re v, Im v.
void write_trajectory_csv(std::ostream& out, const ClassicalTrajectory& traj);

}  // namespace csprop
