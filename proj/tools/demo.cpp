// Library walk-through: conductance sequence, a trace check, one resistance
// and the Dirichlet spectrum at a small level.

#include <iostream>

#include "gasket/conductance.hpp"
#include "gasket/format.hpp"
#include "gasket/graphform.hpp"
#include "gasket/resistance.hpp"
#include "gasket/spectra.hpp"

int main() {
  using namespace gasket;
  const ConductanceTriple t0(2.0, 1.0, 1.0);
  const SequenceReport seq = conductance_sequence(t0, 4, Variant::standard);
  for (const auto& l : seq.levels) {
    std::cout << "level " << l.level << ": a=" << format_double(l.conductance.a())
              << " b=" << format_double(l.conductance.b()) << '\n';
  }

  const TraceCheck tc = trace_check(seq, 3);
  std::cout << "trace residual at level 3: " << format_double(tc.deviation.max_relative) << '\n';

  const LevelGraph g = build_graph(Variant::standard, 3);
  const EnergyForm f = assemble_energy(g, seq.conductance(3));
  const auto b = g.boundary();
  std::cout << "R(p2,p3) at level 3: " << format_double(effective_resistance(f, b[1], b[2]))
            << '\n';

  const auto eigs = level_spectrum(Variant::standard, t0, 3, BoundaryCondition::dirichlet);
  std::cout << "Dirichlet eigenvalues at level 3: " << eigs.size() << ", smallest "
            << format_double(eigs.front()) << '\n';
}
