// Continuum semiclassical propagators for particles and spins in the P, Q,
// and Weyl representations, with the representation-correct SK correction.
#pragma once

#include <map>
#include <string>

#include "csprop/dynamics.hpp"
#include "csprop/operator_algebra.hpp"
#include "csprop/spin.hpp"
#include "csprop/types.hpp"

namespace csprop {

enum class Method { continuum, discrete, exact };

struct PropagatorResult {
  Complex value{0.0};      // prefactor * exp(iS + skPhase), by construction
  Complex iS{0.0};
  Complex prefactor{1.0};
  Complex skPhase{0.0};    // +-(i/2) int A dt; identically 0 for W
  Rep rep = Rep::W;
  SystemKind system = SystemKind::particle;
  Method method = Method::continuum;
  std::map<std::string, double> diagnostics;
};

PropagatorResult propagate_particle(const NormalOrderedOperator& op, Rep rep,
                                    Complex z_i, Complex zbar_f, double T,
                                    int M = 400);

PropagatorResult propagate_spin(const SpinOperator& op, Rep rep, Complex z_i,
                                Complex zbar_f, double T, int M = 400);

/// Shared assembly: solve the BVP under the flow, evaluate iS, the branch-
/// tracked prefactor, and the SK phase for the given representation.
PropagatorResult propagate_with_flow(const HamiltonianFlow& flow, Rep rep,
                                     Complex z_i, Complex zbar_f, TimeGrid grid);

}  // namespace csprop
