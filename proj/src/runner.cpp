#include "csprop/runner.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "csprop/discrete.hpp"
#include "csprop/exact.hpp"
#include "csprop/propagator.hpp"

namespace csprop {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

std::ofstream open_out(const RunConfig& cfg) {
  require(!cfg.out_path.empty(), "config needs 'out: <path>'");
  std::ofstream out(cfg.out_path);
  require(static_cast<bool>(out),
          "cannot open output file '" + cfg.out_path + "'");
  return out;
}

int run_transform(const RunConfig& cfg) {
  const ParsedOperatorFile parsed = read_operator_file(cfg.operator_path);
  const SymbolPolynomial sym =
      parsed.is_operator
          ? convert_symbol(q_symbol_of_operator(parsed.op), cfg.target)
          : convert_symbol(parsed.sym, cfg.target);
  std::ofstream out = open_out(cfg);
  write_symbol_text(out, sym);
  return 0;
}

struct RowResult {
  std::string text;
  bool failed = false;
};

/// One propagate/compare row; never throws (failures become tagged rows).
RowResult propagate_row(const RunConfig& cfg, const ParsedOperatorFile& pop,
                        const SpinOperator* sop, Rep rep,
                        const BoundaryPoint& pt, double T, bool with_exact) {
  RowResult row;
  std::ostringstream os;
  const bool spin = (sop != nullptr);
  os << (spin ? "spin" : "particle") << "," << rep_name(rep) << ","
     << csv_complex(pt.z_i) << "," << csv_complex(pt.zbar_f) << ","
     << format_g17(T);
  try {
    PropagatorResult res =
        spin ? propagate_spin(*sop, rep, pt.z_i, pt.zbar_f, T, cfg.M)
             : propagate_particle(pop.op, rep, pt.z_i, pt.zbar_f, T, cfg.M);
    os << "," << csv_complex(res.value) << "," << csv_complex(res.iS) << ","
       << csv_complex(res.skPhase) << ","
       << format_g17(res.diagnostics.at("bvp_residual"));
    if (with_exact) {
      const Complex ex =
          spin ? exact_propagator_spin(*sop, pt.zbar_f, pt.z_i, T)
               : exact_propagator_particle(pop.op, pt.zbar_f, pt.z_i, T,
                                           cfg.nmax, cfg.tol);
      os << "," << csv_complex(ex) << "," << format_g17(std::abs(res.value - ex));
    }
    os << ",ok";
  } catch (const NumericalError& err) {
    const int ncols = with_exact ? 10 : 7;
    for (int i = 0; i < ncols; ++i) os << "," << format_g17(kNan);
    os << "," << err.tag();
    row.failed = true;
  }
  row.text = os.str();
  return row;
}

int run_propagate(const RunConfig& cfg, std::ostream& log, bool with_exact,
                  bool threaded) {
  require(!cfg.points.empty(), "config needs at least one 'point:'");
  require(!cfg.times.empty(), "config needs 'T:'");
  require(!cfg.reps.empty(), "config needs 'reps:'");
  require(cfg.M >= 2, "config needs M >= 2");
  const bool spin = (cfg.system == "spin");
  require(spin || cfg.system == "particle",
          "system must be 'particle' or 'spin'");

  ParsedOperatorFile pop;
  SpinOperator sop;
  if (spin) {
    sop = read_spin_operator_file(cfg.operator_path);
    require(cfg.two_j == 0 || cfg.two_j == sop.j.two_j,
            "config two_j disagrees with the operator file header");
  } else {
    pop = read_operator_file(cfg.operator_path);
    require(pop.is_operator,
            "propagation needs an operator file (header 'rep: op')");
  }

  struct Job {
    BoundaryPoint pt;
    double T;
    Rep rep;
  };
  std::vector<Job> jobs;
  for (const auto& pt : cfg.points)
    for (double T : cfg.times)
      for (Rep rep : cfg.reps) jobs.push_back({pt, T, rep});

  std::vector<RowResult> rows(jobs.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < jobs.size(); i += stride)
      rows[i] = propagate_row(cfg, pop, spin ? &sop : nullptr, jobs[i].rep,
                              jobs[i].pt, jobs[i].T, with_exact);
  };
  const int nthreads = threaded ? std::max(1, cfg.threads) : 1;
  if (nthreads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back(work, static_cast<std::size_t>(t), nthreads);
    for (auto& th : pool) th.join();
  }

  std::ofstream out = open_out(cfg);
  out << "system,rep,re_zi,im_zi,re_zbarf,im_zbarf,T,re_K,im_K,re_iS,im_iS,"
         "re_sk,im_sk,residual";
  if (with_exact) out << ",re_Kexact,im_Kexact,abs_error";
  out << ",status\n";
  bool any_failed = false;
  for (const auto& row : rows) {
    out << row.text << "\n";
    any_failed = any_failed || row.failed;
  }
  if (any_failed) log << "csprop: some rows failed; see " << cfg.out_path
                      << "\n";
  return any_failed ? 1 : 0;
}

int run_discrete_check(const RunConfig& cfg, std::ostream& log) {
  require(cfg.system == "particle", "discrete-check supports system: particle");
  require(!cfg.points.empty(), "config needs at least one 'point:'");
  require(!cfg.times.empty(), "config needs 'T:'");
  require(!cfg.schemes.empty(), "config needs 'schemes:'");
  require(!cfg.m_list.empty(), "config needs 'Mlist:'");
  const ParsedOperatorFile pop = read_operator_file(cfg.operator_path);
  require(pop.is_operator, "discrete-check needs an operator file");
  const BoundaryPoint pt = cfg.points.front();
  const double T = cfg.times.front();

  std::ofstream out = open_out(cfg);
  out << "scheme,M,re_detF,im_detF,re_gammaSK,im_gammaSK,re_vM1,im_vM1,"
         "identityResidual,re_kRed,im_kRed,status\n";
  bool any_failed = false;
  for (const auto& sname : cfg.schemes) {
    Scheme scheme;
    if (sname == "Qrep") scheme = Scheme::Qrep;
    else if (sname == "Prep") scheme = Scheme::Prep;
    else if (sname == "Alternating") scheme = Scheme::Alternating;
    else throw ConfigError("unknown scheme '" + sname + "'");
    for (int M : cfg.m_list) {
      out << sname << "," << M;
      try {
        DiscretePipeline pipe =
            discrete_pipeline(pop.op, scheme, pt.z_i, pt.zbar_f, T, M);
        DiscreteFluctuationReport rep =
            verify_identity(pipe.action, pipe.nodes);
        out << "," << csv_complex(rep.detF) << "," << csv_complex(rep.gammaSK)
            << "," << csv_complex(rep.vM1) << ","
            << format_g17(rep.identityResidual) << ","
            << csv_complex(rep.kRed) << ",ok\n";
      } catch (const NumericalError& err) {
        for (int i = 0; i < 9; ++i) out << "," << format_g17(kNan);
        out << "," << err.tag() << "\n";
        any_failed = true;
      }
    }
  }
  if (any_failed) log << "csprop: some rows failed; see " << cfg.out_path
                      << "\n";
  return any_failed ? 1 : 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
  try {
    if (cfg.task == "transform") return run_transform(cfg);
    if (cfg.task == "propagate") return run_propagate(cfg, log, false, false);
    if (cfg.task == "compare") return run_propagate(cfg, log, true, false);
    if (cfg.task == "sweep") return run_propagate(cfg, log, false, true);
    if (cfg.task == "discrete-check") return run_discrete_check(cfg, log);
    throw ConfigError("unknown task '" + cfg.task + "'");
  } catch (const ConfigError& err) {
    log << "csprop: config error: " << err.what() << "\n";
    return 2;
  }
}

}  // namespace csprop
