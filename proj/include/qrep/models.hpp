#pragma once

// Hamiltonians of the repeater chain: the full atom-field-mirror model of the
// swapping cavities, its interaction picture, the optical cavity of the final
// stage, and the two effective Hamiltonians that drive the closed-form
// dynamics.

#include "qrep/hilbert.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <sstream>

namespace qrep {

/// Thrown when a builder requires the simplified parameter preset and the
/// supplied parameters violate it.
class assumption_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coupling rates and bare frequencies of the model. The two atoms inside a
/// cavity carry the unprimed and primed symbols respectively.
struct ModelParams {
  double lambda1 = 1.0;   // atom-photon coupling, mode 1, first atom
  double lambda2 = 1.0;   // atom-photon coupling, mode 2, first atom
  double lambda1p = 1.0;  // primed couplings, second atom
  double lambda2p = 1.0;
  double g = 1.0;   // optomechanical coupling, cavity 1
  double gp = 1.0;  // optomechanical coupling, cavity 2
  double omega_m = 1.0;
  std::array<double, 3> atom_freqs{0.0, 0.0, 0.0};    // levels 1..3, first atom
  std::array<double, 3> atom_freqs_p{0.0, 0.0, 0.0};  // levels 1..3, second atom
  std::array<double, 2> photon_freqs{0.0, 0.0};
  std::array<double, 2> phonon_freqs{0.0, 0.0};

  /// Simplified preset: primed couplings equal unprimed ones, degenerate
  /// mechanical frequencies, and bare frequencies chosen so that both optical
  /// transitions sit exactly one mechanical quantum above their mode:
  /// level3 = 0, Omega_1 = Omega_2 = 10*lambda1, level1/2 = Omega + omega_m.
  /// Only frequency differences enter any observable.
  static ModelParams simplified(double lambda1, double g, double omega_m,
                                std::optional<double> lambda2 = std::nullopt) {
    ModelParams p;
    p.lambda1 = lambda1;
    p.lambda2 = lambda2.value_or(lambda1);
    p.lambda1p = p.lambda1;
    p.lambda2p = p.lambda2;
    p.g = g;
    p.gp = g;
    p.omega_m = omega_m;
    const double cavity = 10.0 * lambda1;
    p.photon_freqs = {cavity, cavity};
    p.phonon_freqs = {omega_m, omega_m};
    p.atom_freqs = {cavity + omega_m, cavity + omega_m, 0.0};
    p.atom_freqs_p = p.atom_freqs;
    p.validate();
    return p;
  }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
    };
    positive(lambda1, "lambda1");
    positive(lambda2, "lambda2");
    positive(lambda1p, "lambda1p");
    positive(lambda2p, "lambda2p");
    positive(g, "g");
    positive(gp, "gp");
    positive(omega_m, "omega_m");
  }

  /// Lists every equality of the simplified preset violated beyond rel_tol.
  std::vector<std::string> simplification_violations(double rel_tol = 1e-12) const {
    std::vector<std::string> out;
    auto close = [rel_tol](double a, double b) {
      const double scale = std::max({std::abs(a), std::abs(b), 1.0});
      return std::abs(a - b) <= rel_tol * scale;
    };
    auto check = [&](bool ok, const char* what) {
      if (!ok) out.emplace_back(what);
    };
    check(close(lambda1, lambda1p), "lambda1 != lambda1'");
    check(close(lambda2, lambda2p), "lambda2 != lambda2'");
    check(close(g, gp), "g != g'");
    for (int i = 0; i < 3; ++i)
      check(close(atom_freqs[i], atom_freqs_p[i]), "atom frequency differs from primed partner");
    check(close(phonon_freqs[0], omega_m) && close(phonon_freqs[1], omega_m),
          "phonon frequencies != omega_m");
    check(close(atom_freqs[0] - atom_freqs[2] - photon_freqs[0], omega_m),
          "level1 - level3 - Omega_1 != omega_m");
    check(close(atom_freqs[1] - atom_freqs[2] - photon_freqs[1], omega_m),
          "level2 - level3 - Omega_2 != omega_m");
    return out;
  }

  void require_simplification(double rel_tol = 1e-12) const {
    const auto violations = simplification_violations(rel_tol);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "simplified parameter preset violated:";
    for (const auto& v : violations) msg << " [" << v << "]";
    throw assumption_error(msg.str());
  }
};

/// The two atoms sitting inside a cavity, as indices into the space's atom
/// list. `first` carries the unprimed couplings, `second` the primed ones.
struct CavityAtoms {
  int first;
  int second;
};

namespace detail {

inline void check_cavity_atoms(const SpaceDescriptor& space, CavityAtoms atoms) {
  space.atom_position(atoms.first);
  space.atom_position(atoms.second);
  if (atoms.first == atoms.second)
    throw std::invalid_argument("cavity atoms must be two distinct atoms");
}

inline void check_four_modes(const SpaceDescriptor& space) {
  if (space.photon_mode_count() < 2 || space.phonon_mode_count() < 2)
    throw std::invalid_argument("space needs two photon and two phonon modes");
}

inline OpFactor number_create(ModeId m) { return OpFactor::create(m); }

// n_hat = a^dag a as a factor pair (create after annihilate keeps amplitudes
// exact within the truncation)
inline void append_number(std::vector<OpFactor>& f, ModeId m) {
  f.push_back(OpFactor::create(m));
  f.push_back(OpFactor::annihilate(m));
}

}  // namespace detail

/// Free Hamiltonian: bare atomic level energies of the two cavity atoms plus
/// photon and phonon mode energies. Diagonal in the canonical basis.
inline OperatorMatrix h_free(const ModelParams& params, const SpaceDescriptor& space,
                             CavityAtoms atoms) {
  params.validate();
  detail::check_cavity_atoms(space, atoms);
  detail::check_four_modes(space);

  std::vector<ProductTerm> terms;
  for (int l = 0; l < 3; ++l) {
    terms.push_back({params.atom_freqs[l],
                     {OpFactor::transition(atoms.first, level_from_index(l), level_from_index(l))}});
    terms.push_back({params.atom_freqs_p[l],
                     {OpFactor::transition(atoms.second, level_from_index(l), level_from_index(l))}});
  }
  for (int j = 0; j < 2; ++j) {
    ProductTerm photon{params.photon_freqs[j], {}};
    detail::append_number(photon.factors, photon_mode(j));
    terms.push_back(photon);
    ProductTerm phonon{params.phonon_freqs[j], {}};
    detail::append_number(phonon.factors, phonon_mode(j));
    terms.push_back(phonon);
  }
  return OperatorMatrix(space, build_matrix(space, terms), true);
}

/// Interaction Hamiltonian: both cavity atoms exchange excitations with the
/// two photon modes, and each photon number pushes on its mirror mode.
inline OperatorMatrix h_coupling(const ModelParams& params, const SpaceDescriptor& space,
                                 CavityAtoms atoms) {
  params.validate();
  detail::check_cavity_atoms(space, atoms);
  detail::check_four_modes(space);

  std::vector<ProductTerm> terms;
  auto exchange = [&](double rate, ModeId mode, int atom, AtomLevel upper) {
    push_with_conjugate(terms, {rate,
                                {OpFactor::annihilate(mode),
                                 OpFactor::transition(atom, upper, AtomLevel::L3)}});
  };
  exchange(params.lambda1, photon_mode(0), atoms.first, AtomLevel::L1);
  exchange(params.lambda2, photon_mode(1), atoms.first, AtomLevel::L2);
  exchange(params.lambda1p, photon_mode(0), atoms.second, AtomLevel::L1);
  exchange(params.lambda2p, photon_mode(1), atoms.second, AtomLevel::L2);

  auto pressure = [&](double rate, ModeId cavity, ModeId mirror) {
    ProductTerm down{-rate, {}};
    detail::append_number(down.factors, cavity);
    down.factors.push_back(OpFactor::annihilate(mirror));
    push_with_conjugate(terms, down);
  };
  pressure(params.g, photon_mode(0), phonon_mode(0));
  pressure(params.gp, photon_mode(1), phonon_mode(1));

  return OperatorMatrix(space, build_matrix(space, terms), true);
}

/// Interaction-picture Hamiltonian under the simplified preset: the coupling
/// terms oscillate with a single frequency omega_m.
inline OperatorMatrix h_interaction_picture(const ModelParams& params,
                                            const SpaceDescriptor& space, CavityAtoms atoms,
                                            double t) {
  params.validate();
  params.require_simplification();
  detail::check_cavity_atoms(space, atoms);
  detail::check_four_modes(space);

  const complex_t phase = std::exp(imag_unit * params.omega_m * t);
  std::vector<ProductTerm> terms;
  for (int atom : {atoms.first, atoms.second}) {
    push_with_conjugate(terms, {params.lambda1 * phase,
                                {OpFactor::annihilate(photon_mode(0)),
                                 OpFactor::transition(atom, AtomLevel::L1, AtomLevel::L3)}});
    push_with_conjugate(terms, {params.lambda2 * phase,
                                {OpFactor::annihilate(photon_mode(1)),
                                 OpFactor::transition(atom, AtomLevel::L2, AtomLevel::L3)}});
  }
  for (int j = 0; j < 2; ++j) {
    ProductTerm term{-params.g * phase, {}};
    detail::append_number(term.factors, photon_mode(j));
    term.factors.push_back(OpFactor::create(phonon_mode(j)));
    push_with_conjugate(terms, term);
  }
  return OperatorMatrix(space, build_matrix(space, terms), true);
}

/// Effective Hamiltonian of a swapping cavity: Stark shifts, an excitation
/// exchange between the two atoms, a photon-number Kerr term, a cross-mode
/// photon swap, and the photon-phonon pair conversion that feeds the mirror.
inline OperatorMatrix h_eff_stage_a(const ModelParams& params, const SpaceDescriptor& space,
                                    CavityAtoms atoms) {
  params.validate();
  detail::check_cavity_atoms(space, atoms);
  detail::check_four_modes(space);

  const double w = params.omega_m;
  const double k1 = params.lambda1 * params.lambda1 / w;
  const double k2 = params.lambda2 * params.lambda2 / w;
  auto sigma = [](int atom, AtomLevel l, AtomLevel m) { return OpFactor::transition(atom, l, m); };

  std::vector<ProductTerm> terms;
  for (int atom : {atoms.first, atoms.second}) {
    // Stark terms: k * [sigma_uu + n * (sigma_uu - sigma_33)]
    auto stark = [&](double k, ModeId mode, AtomLevel upper) {
      terms.push_back({k, {sigma(atom, upper, upper)}});
      ProductTerm plus{k, {}};
      detail::append_number(plus.factors, mode);
      plus.factors.push_back(sigma(atom, upper, upper));
      terms.push_back(plus);
      ProductTerm minus{-k, {}};
      detail::append_number(minus.factors, mode);
      minus.factors.push_back(sigma(atom, AtomLevel::L3, AtomLevel::L3));
      terms.push_back(minus);
    };
    stark(k1, photon_mode(0), AtomLevel::L1);
    stark(k2, photon_mode(1), AtomLevel::L2);
  }

  // excitation exchange between the two atoms
  push_with_conjugate(terms, {k1,
                              {sigma(atoms.first, AtomLevel::L1, AtomLevel::L3),
                               sigma(atoms.second, AtomLevel::L3, AtomLevel::L1)}});
  push_with_conjugate(terms, {k2,
                              {sigma(atoms.first, AtomLevel::L2, AtomLevel::L3),
                               sigma(atoms.second, AtomLevel::L3, AtomLevel::L2)}});

  // Kerr terms -(g^2/w) n^2 per cavity
  for (int j = 0; j < 2; ++j) {
    ProductTerm kerr{-params.g * params.g / w, {}};
    detail::append_number(kerr.factors, photon_mode(j));
    detail::append_number(kerr.factors, photon_mode(j));
    terms.push_back(kerr);
  }

  // cross-mode photon swap with an atomic 1<->2 flip
  for (int atom : {atoms.first, atoms.second}) {
    push_with_conjugate(terms, {params.lambda1 * params.lambda2 / w,
                                {OpFactor::annihilate(photon_mode(0)),
                                 OpFactor::create(photon_mode(1)),
                                 sigma(atom, AtomLevel::L1, AtomLevel::L2)}});
  }

  // photon-phonon pair conversion
  for (int atom : {atoms.first, atoms.second}) {
    push_with_conjugate(terms, {-params.g * params.lambda1 / w,
                                {OpFactor::annihilate(photon_mode(0)),
                                 OpFactor::annihilate(phonon_mode(0)),
                                 sigma(atom, AtomLevel::L1, AtomLevel::L3)}});
    push_with_conjugate(terms, {-params.g * params.lambda2 / w,
                                {OpFactor::annihilate(photon_mode(1)),
                                 OpFactor::annihilate(phonon_mode(1)),
                                 sigma(atom, AtomLevel::L2, AtomLevel::L3)}});
  }

  return OperatorMatrix(space, build_matrix(space, terms), true);
}

/// Full Hamiltonian of the final optical cavity: two atoms, two photon modes,
/// no mirror.
inline OperatorMatrix h_stage_b(const ModelParams& params, const SpaceDescriptor& space,
                                CavityAtoms atoms) {
  params.validate();
  detail::check_cavity_atoms(space, atoms);
  if (space.photon_mode_count() < 2)
    throw std::invalid_argument("space needs two photon modes");

  std::vector<ProductTerm> terms;
  for (int l = 0; l < 3; ++l) {
    terms.push_back({params.atom_freqs[l],
                     {OpFactor::transition(atoms.first, level_from_index(l), level_from_index(l))}});
    terms.push_back({params.atom_freqs_p[l],
                     {OpFactor::transition(atoms.second, level_from_index(l), level_from_index(l))}});
  }
  for (int j = 0; j < 2; ++j) {
    ProductTerm photon{params.photon_freqs[j], {}};
    detail::append_number(photon.factors, photon_mode(j));
    terms.push_back(photon);
  }
  auto exchange = [&](double rate, ModeId mode, int atom, AtomLevel upper) {
    push_with_conjugate(terms, {rate,
                                {OpFactor::annihilate(mode),
                                 OpFactor::transition(atom, upper, AtomLevel::L3)}});
  };
  exchange(params.lambda1, photon_mode(0), atoms.first, AtomLevel::L1);
  exchange(params.lambda2, photon_mode(1), atoms.first, AtomLevel::L2);
  exchange(params.lambda1p, photon_mode(0), atoms.second, AtomLevel::L1);
  exchange(params.lambda2p, photon_mode(1), atoms.second, AtomLevel::L2);

  return OperatorMatrix(space, build_matrix(space, terms), true);
}

/// Effective Hamiltonian of the final cavity with the field projected out:
/// Stark shifts plus a direct excitation exchange between the two atoms.
/// Works on purely atomic spaces.
inline OperatorMatrix h_eff_stage_b(const ModelParams& params, const SpaceDescriptor& space,
                                    CavityAtoms atoms) {
  params.validate();
  detail::check_cavity_atoms(space, atoms);

  const double w = params.omega_m;
  const double k1 = params.lambda1 * params.lambda1 / w;
  const double k2 = params.lambda2 * params.lambda2 / w;
  auto sigma = [](int atom, AtomLevel l, AtomLevel m) { return OpFactor::transition(atom, l, m); };

  std::vector<ProductTerm> terms;
  for (int atom : {atoms.first, atoms.second}) {
    terms.push_back({k1, {sigma(atom, AtomLevel::L1, AtomLevel::L1)}});
    terms.push_back({k2, {sigma(atom, AtomLevel::L2, AtomLevel::L2)}});
  }
  push_with_conjugate(terms, {k1,
                              {sigma(atoms.first, AtomLevel::L1, AtomLevel::L3),
                               sigma(atoms.second, AtomLevel::L3, AtomLevel::L1)}});
  push_with_conjugate(terms, {k2,
                              {sigma(atoms.first, AtomLevel::L2, AtomLevel::L3),
                               sigma(atoms.second, AtomLevel::L3, AtomLevel::L2)}});
  return OperatorMatrix(space, build_matrix(space, terms), true);
}

}  // namespace qrep
