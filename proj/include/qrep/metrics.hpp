#pragma once

// Entanglement and success-probability figures of merit for the two-term
// post-selected pair states, plus the partial-trace purity used to validate
// them.

#include "qrep/hilbert.hpp"
#include "qrep/measurement.hpp"

namespace qrep {

/// Success probability of an unnormalized two-term branch.
inline double success_probability(complex_t c1, complex_t c2) {
  return std::norm(c1) + std::norm(c2);
}

/// Linear entropy of the reduced single-atom state of c1|13> + c2|31>:
/// 1 - (|c1|^4 + |c2|^4) / (|c1|^2 + |c2|^2)^2. Ranges over [0, 0.5] with the
/// maximum at equal magnitudes.
inline double linear_entropy_two_term(complex_t c1, complex_t c2) {
  const double p = success_probability(c1, c2);
  if (p == 0.0) throw std::invalid_argument("both amplitudes vanish; entropy undefined");
  const double n1 = std::norm(c1), n2 = std::norm(c2);
  return 1.0 - (n1 * n1 + n2 * n2) / (p * p);
}

/// Unnormalized pair amplitudes together with their figures of merit. A
/// zero-weight branch carries E = 0 by convention.
struct PairStateSummary {
  complex_t c1{};
  complex_t c2{};
  double p = 0.0;
  double e = 0.0;
};

inline PairStateSummary summarize_pair(complex_t c1, complex_t c2) {
  PairStateSummary s;
  s.c1 = c1;
  s.c2 = c2;
  s.p = success_probability(c1, c2);
  s.e = (s.p > 0.0) ? linear_entropy_two_term(c1, c2) : 0.0;
  return s;
}

/// Tr(rho_kept^2) of the reduced state over the kept subsystems.
inline double reduced_purity(const StateVector& state, const SubsystemSet& kept) {
  if (std::abs(state.squared_norm() - 1.0) > 1e-9)
    throw std::invalid_argument("reduced_purity expects a normalized state");
  const SpaceDescriptor& space = state.space();
  const auto lay = detail::measured_layout(space, kept);

  // amplitudes reshaped as M(kept, rest); purity = ||M M^dag||_F^2, computed
  // from whichever Gram matrix is smaller
  const std::int64_t d_kept = space.dimension() / lay.reduced.dimension();
  Matrix m = Matrix::Zero(d_kept, lay.reduced.dimension());
  std::vector<int> labels(space.subsystem_count());
  for (std::int64_t i = 0; i < space.dimension(); ++i) {
    const complex_t amp = state.amplitude(i);
    if (amp == complex_t{}) continue;
    space.decode(i, labels);
    m(lay.mini_index(labels), lay.reduced_index(labels)) += amp;
  }
  if (d_kept <= lay.reduced.dimension()) {
    const Matrix rho = m * m.adjoint();
    return rho.squaredNorm();
  }
  const Matrix gram = m.adjoint() * m;
  return gram.squaredNorm();
}

}  // namespace qrep
