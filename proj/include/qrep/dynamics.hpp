#pragma once

// State propagation and the closed-form amplitude sets of the two protocol
// stages. The stage-A amplitudes solve two small constant-coefficient linear
// systems (a 3x3 block that appears twice and a 4x4 block); both are
// exponentiated directly. The stage-B amplitudes follow from the two-atom
// exchange block in closed form.

#include "qrep/models.hpp"

#include <Eigen/Eigenvalues>

#include <functional>

namespace qrep {

/// Amplitudes of the eleven-ket stage-A ansatz at interaction time t.
/// a[0]..a[10] correspond to kets 1..11 of stage_a_kets().
struct StageASolution {
  double t = 0.0;
  std::array<complex_t, 11> a{};

  /// 1-based accessor: coeff(2) is the amplitude of the second ket.
  complex_t coeff(int k) const { return a.at(static_cast<std::size_t>(k) - 1); }
};

/// Amplitudes of the six-ket stage-B ansatz for one initial-state case.
/// b[0]..b[5] correspond to kets 1..6 of stage_b_kets().
struct StageBSolution {
  int case_id = 1;
  double tau = 0.0;
  std::array<complex_t, 6> b{};

  complex_t coeff(int k) const { return b.at(static_cast<std::size_t>(k) - 1); }
};

/// Prepared propagator exp(-i H t) for a fixed hermitian generator; the
/// eigendecomposition is reused across times.
class Propagator {
 public:
  explicit Propagator(const OperatorMatrix& h) : space_(h.space()) {
    if (!h.hermitian()) throw std::invalid_argument("propagation requires a hermitian generator");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.entries());
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("eigendecomposition failed");
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
  }

  const SpaceDescriptor& space() const { return space_; }

  Vector apply(const Vector& amplitudes, double t) const {
    Vector coeffs = eigenvectors_.adjoint() * amplitudes;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k)
      coeffs(k) *= std::exp(-imag_unit * eigenvalues_(k) * t);
    return eigenvectors_ * coeffs;
  }

  StateVector at(const StateVector& psi0, double t) const {
    if (!(psi0.space() == space_))
      throw std::invalid_argument("state space does not match the generator space");
    return StateVector(space_, apply(psi0.amplitudes(), t));
  }

 private:
  SpaceDescriptor space_;
  Eigen::VectorXd eigenvalues_;
  Matrix eigenvectors_;
};

/// One-shot exp(-i H t) |psi0>.
inline StateVector propagate(const OperatorMatrix& h, const StateVector& psi0, double t) {
  return Propagator(h).at(psi0, t);
}

struct OdeResult {
  StateVector state;
  double norm_drift;  // | ||psi(t)||^2 - ||psi0||^2 |
};

/// Classic fixed-step fourth-order integration of i d/dt psi = H(t) psi from
/// time 0 to t. Independent of the matrix-exponential route; global error
/// scales as (step size)^4.
inline OdeResult integrate_ode(const std::function<OperatorMatrix(double)>& h_of_t,
                               const StateVector& psi0, double t, int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  const double h = t / steps;

  auto generator = [&](double time) -> Matrix {
    OperatorMatrix op = h_of_t(time);
    if (!op.hermitian())
      throw std::invalid_argument("integration requires a hermitian generator");
    if (!(op.space() == psi0.space()))
      throw std::invalid_argument("generator space does not match the state space");
    return op.entries();
  };

  Vector y = psi0.amplitudes();
  for (int s = 0; s < steps; ++s) {
    const double t0 = s * h;
    const Matrix h0 = generator(t0);
    const Matrix hm = generator(t0 + 0.5 * h);
    const Matrix h1 = generator(t0 + h);
    const Vector k1 = -imag_unit * (h0 * y);
    const Vector k2 = -imag_unit * (hm * (y + 0.5 * h * k1));
    const Vector k3 = -imag_unit * (hm * (y + 0.5 * h * k2));
    const Vector k4 = -imag_unit * (h1 * (y + h * k3));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const double drift = std::abs(y.squaredNorm() - psi0.amplitudes().squaredNorm());
  return OdeResult{StateVector(psi0.space(), std::move(y)), drift};
}

namespace detail {

// v(t) = exp(-i M t) v0 for a small real-symmetric generator M
template <typename MatrixT, typename VectorT>
Eigen::VectorXcd evolve_small(const MatrixT& m, const VectorT& v0, double t) {
  Eigen::SelfAdjointEigenSolver<MatrixT> solver(m);
  Eigen::VectorXcd coeffs = (solver.eigenvectors().transpose() * v0).template cast<complex_t>();
  for (Eigen::Index k = 0; k < coeffs.size(); ++k)
    coeffs(k) *= std::exp(-imag_unit * solver.eigenvalues()(k) * t);
  return solver.eigenvectors().template cast<complex_t>() * coeffs;
}

}  // namespace detail

/// Closed-form stage-A amplitudes at interaction time t. The first amplitude
/// is constant at 1/2; the (a2,a3,a4) and (a9,a10,a11) blocks share one
/// generator and initial data, so they stay identical, as do a6 and a7.
inline StageASolution stage_a_coefficients(const ModelParams& params, double t) {
  params.validate();
  const double l = params.lambda1, g = params.g, w = params.omega_m;
  const double ll = l * l, gl = g * l, gg = g * g;

  Eigen::Matrix3d m1;
  m1 << ll, ll, -gl,
        ll, ll, -gl,
        -gl, -gl, -(2.0 * ll + gg);
  m1 /= w;
  Eigen::Matrix4d m2;
  m2 << 2.0 * ll, -gl, -gl, 0.0,
        -gl, ll - gg, ll, -2.0 * gl,
        -gl, ll, ll - gg, -2.0 * gl,
        0.0, -2.0 * gl, -2.0 * gl, -4.0 * (ll + gg);
  m2 /= w;

  const Eigen::VectorXcd v1 = detail::evolve_small(m1, Eigen::Vector3d(0.5, 0.0, 0.0), t);
  const Eigen::VectorXcd v2 = detail::evolve_small(m2, Eigen::Vector4d(0.5, 0.0, 0.0, 0.0), t);

  StageASolution sol;
  sol.t = t;
  sol.a[0] = complex_t{0.5, 0.0};
  for (int k = 0; k < 3; ++k) sol.a[1 + k] = v1(k);
  for (int k = 0; k < 4; ++k) sol.a[4 + k] = v2(k);
  for (int k = 0; k < 3; ++k) sol.a[8 + k] = v1(k);
  return sol;
}

/// Closed-form stage-B amplitudes. The four cases select which half of each
/// swapped pair enters the final cavity; tau >= t is the total elapsed time,
/// so the exchange phase is theta = 2 lambda1^2 (tau - t) / omega_m.
inline StageBSolution stage_b_coefficients(const StageASolution& sa, const ModelParams& params,
                                           int case_id, double tau) {
  params.validate();
  if (case_id < 1 || case_id > 4) throw std::invalid_argument("case_id must be in 1..4");
  if (tau < sa.t) throw std::invalid_argument("tau must be >= the stage-A time");

  const complex_t a2 = sa.a[1], a10 = sa.a[9];
  const double p = std::norm(a2) + std::norm(a10);
  const double theta = 2.0 * params.lambda1 * params.lambda1 * (tau - sa.t) / params.omega_m;
  const complex_t ph = std::exp(-imag_unit * theta);
  const complex_t stay = 0.5 * (1.0 + ph);
  const complex_t flip = -0.5 * (1.0 - ph);

  StageBSolution sol;
  sol.case_id = case_id;
  sol.tau = tau;
  auto& b = sol.b;
  switch (case_id) {
    case 1:
      b[0] = b[4] = a2 * a10 / p * stay;
      b[1] = b[5] = a2 * a10 / p * flip;
      b[2] = a2 * a2 / p;
      b[3] = a10 * a10 / p * ph;
      break;
    case 2:
      b[0] = b[4] = a2 * a10 / p * stay;
      b[1] = b[5] = a2 * a10 / p * flip;
      b[2] = a10 * a10 / p;
      b[3] = a2 * a2 / p * ph;
      break;
    case 3:
      b[0] = a2 * a2 / p * stay;
      b[1] = a2 * a2 / p * flip;
      b[2] = a2 * a10 / p;
      b[3] = a2 * a10 / p * ph;
      b[4] = a10 * a10 / p * stay;
      b[5] = a10 * a10 / p * flip;
      break;
    case 4:
      b[0] = a10 * a10 / p * stay;
      b[1] = a10 * a10 / p * flip;
      b[2] = a2 * a10 / p;
      b[3] = a2 * a10 / p * ph;
      b[4] = a2 * a2 / p * stay;
      b[5] = a2 * a2 / p * flip;
      break;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// ansatz bases
// ---------------------------------------------------------------------------

/// Default stage-A space: photon/phonon caps (2,0) each and the four atoms of
/// one chain segment, ordered (edge, cavity, cavity, edge). Dimension 729.
inline SpaceDescriptor stage_a_space() { return build_space({2, 0}, {2, 0}, 4); }

/// Cavity atoms within stage_a_space(): the two interior atoms.
inline constexpr CavityAtoms stage_a_cavity_atoms{1, 2};

/// The eleven basis kets spanning the invariant subspace the stage-A
/// effective dynamics explores from the initial product state. Order matches
/// StageASolution::a.
inline const std::array<CompositeBasisState, 11>& stage_a_kets() {
  using L = AtomLevel;
  static const std::array<CompositeBasisState, 11> kets = {{
      {{0, 0}, {0, 0}, {L::L1, L::L3, L::L3, L::L1}},
      {{0, 0}, {0, 0}, {L::L1, L::L3, L::L1, L::L3}},
      {{0, 0}, {0, 0}, {L::L1, L::L1, L::L3, L::L3}},
      {{1, 0}, {1, 0}, {L::L1, L::L3, L::L3, L::L3}},
      {{0, 0}, {0, 0}, {L::L3, L::L1, L::L1, L::L3}},
      {{1, 0}, {1, 0}, {L::L3, L::L3, L::L1, L::L3}},
      {{1, 0}, {1, 0}, {L::L3, L::L1, L::L3, L::L3}},
      {{2, 0}, {2, 0}, {L::L3, L::L3, L::L3, L::L3}},
      {{0, 0}, {0, 0}, {L::L3, L::L1, L::L3, L::L1}},
      {{0, 0}, {0, 0}, {L::L3, L::L3, L::L1, L::L1}},
      {{1, 0}, {1, 0}, {L::L3, L::L3, L::L3, L::L1}},
  }};
  return kets;
}

inline std::array<std::int64_t, 11> stage_a_ket_indices(const SpaceDescriptor& space) {
  std::array<std::int64_t, 11> idx{};
  const auto& kets = stage_a_kets();
  for (std::size_t k = 0; k < kets.size(); ++k) idx[k] = space.index_of(kets[k]);
  return idx;
}

/// Places the eleven amplitudes onto their kets in the given space.
inline StateVector embed_stage_a(const StageASolution& sol, const SpaceDescriptor& space) {
  Vector amp = Vector::Zero(space.dimension());
  const auto idx = stage_a_ket_indices(space);
  for (std::size_t k = 0; k < idx.size(); ++k) amp(idx[k]) = sol.a[k];
  return StateVector(space, amp);
}

/// Initial state of a stage-A run: both adjacent pairs maximally entangled,
/// all modes in vacuum. Equals embed_stage_a of the t = 0 solution.
inline StateVector stage_a_initial_state(const SpaceDescriptor& space) {
  StageASolution sol;
  sol.t = 0.0;
  sol.a[0] = sol.a[1] = sol.a[4] = sol.a[8] = complex_t{0.5, 0.0};
  return embed_stage_a(sol, space);
}

/// Default stage-B space: the four atoms (1,4,5,8) that remain after the two
/// swapping measurements, no field modes. Dimension 81.
inline SpaceDescriptor stage_b_space() { return build_space({}, {}, 4); }

/// Cavity atoms within stage_b_space(): atoms 4 and 5, i.e. positions 1 and 2.
inline constexpr CavityAtoms stage_b_cavity_atoms{1, 2};

/// The six basis kets of the stage-B ansatz over atoms (1,4,5,8). Order
/// matches StageBSolution::b.
inline const std::array<CompositeBasisState, 6>& stage_b_kets() {
  using L = AtomLevel;
  static const std::array<CompositeBasisState, 6> kets = {{
      {{}, {}, {L::L1, L::L3, L::L1, L::L3}},
      {{}, {}, {L::L1, L::L1, L::L3, L::L3}},
      {{}, {}, {L::L1, L::L3, L::L3, L::L1}},
      {{}, {}, {L::L3, L::L1, L::L1, L::L3}},
      {{}, {}, {L::L3, L::L1, L::L3, L::L1}},
      {{}, {}, {L::L3, L::L3, L::L1, L::L1}},
  }};
  return kets;
}

inline std::array<std::int64_t, 6> stage_b_ket_indices(const SpaceDescriptor& space) {
  std::array<std::int64_t, 6> idx{};
  const auto& kets = stage_b_kets();
  for (std::size_t k = 0; k < kets.size(); ++k) idx[k] = space.index_of(kets[k]);
  return idx;
}

inline StateVector embed_stage_b(const StageBSolution& sol, const SpaceDescriptor& space) {
  Vector amp = Vector::Zero(space.dimension());
  const auto idx = stage_b_ket_indices(space);
  for (std::size_t k = 0; k < idx.size(); ++k) amp(idx[k]) = sol.b[k];
  return StateVector(space, amp);
}

/// Product of the two post-selected pair states that enters the final cavity
/// for the given case, written over the stage-B space. Built directly from
/// the pair amplitudes, independent of the closed-form stage-B route.
inline StateVector stage_b_initial_state(const StageASolution& sa, int case_id,
                                         const SpaceDescriptor& space) {
  if (case_id < 1 || case_id > 4) throw std::invalid_argument("case_id must be in 1..4");
  const complex_t a2 = sa.a[1], a10 = sa.a[9];
  const double root_p = std::sqrt(std::norm(a2) + std::norm(a10));
  const std::array<complex_t, 2> swapped{a2 / root_p, a10 / root_p};   // |13> , |31>
  const std::array<complex_t, 2> mirrored{a10 / root_p, a2 / root_p};
  const auto& left = (case_id == 1 || case_id == 3) ? swapped : mirrored;
  const auto& right = (case_id == 2 || case_id == 3) ? swapped : mirrored;

  using L = AtomLevel;
  const std::array<std::array<L, 2>, 2> pair_kets{{{L::L1, L::L3}, {L::L3, L::L1}}};
  Vector amp = Vector::Zero(space.dimension());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CompositeBasisState s;
      s.atom_levels = {pair_kets[i][0], pair_kets[i][1], pair_kets[j][0], pair_kets[j][1]};
      amp(space.index_of(s)) = left[i] * right[j];
    }
  return StateVector(space, amp);
}

}  // namespace qrep
