#pragma once

// Projective measurements on occupation numbers and atomic levels: collapse
// onto one outcome, or enumerate every outcome branch of measuring a chosen
// set of subsystems.

#include "qrep/hilbert.hpp"

#include <map>
#include <optional>

namespace qrep {

/// Requested measurement outcome: occupancies for some modes, levels for some
/// atoms. Keys are mode/atom indices within the state's space.
struct ProjectorSpec {
  std::map<int, int> photon_outcomes;
  std::map<int, int> phonon_outcomes;
  std::map<int, AtomLevel> atom_outcomes;

  bool empty() const {
    return photon_outcomes.empty() && phonon_outcomes.empty() && atom_outcomes.empty();
  }

  SubsystemSet measured() const {
    SubsystemSet s;
    for (const auto& [mode, n] : photon_outcomes) s.photon_modes.push_back(mode);
    for (const auto& [mode, n] : phonon_outcomes) s.phonon_modes.push_back(mode);
    for (const auto& [atom, l] : atom_outcomes) s.atoms.push_back(atom);
    return s;
  }
};

struct MeasurementOutcome {
  ProjectorSpec spec;
  double probability = 0.0;
  /// Normalized post-measurement state over the unmeasured subsystems; absent
  /// when the outcome carries no weight.
  std::optional<StateVector> post_state;
};

inline constexpr double outcome_weight_floor = 1e-14;

namespace detail {

struct MeasuredLayout {
  std::vector<int> positions;          // flat label positions of measured subsystems
  std::vector<std::int64_t> strides;   // mini-index strides, canonical order
  std::vector<int> keep_positions;     // complement, in canonical order
  SpaceDescriptor reduced;             // space over the unmeasured subsystems

  std::int64_t mini_index(std::span<const int> labels) const {
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) idx += labels[positions[i]] * strides[i];
    return idx;
  }

  std::int64_t reduced_index(std::span<const int> labels) const {
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < keep_positions.size(); ++i)
      idx = idx * reduced.radix(static_cast<int>(i)) + labels[keep_positions[i]];
    return idx;
  }
};

inline MeasuredLayout measured_layout(const SpaceDescriptor& space, const SubsystemSet& measured) {
  if (measured.empty()) throw std::invalid_argument("measured subsystem set is empty");

  auto sorted_unique = [](std::vector<int> v, int count, const char* what) {
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end())
      throw std::invalid_argument(std::string("duplicate ") + what + " in subsystem set");
    for (int i : v)
      if (i < 0 || i >= count)
        throw std::invalid_argument(std::string(what) + " index out of range");
    return v;
  };
  const auto photons = sorted_unique(measured.photon_modes, space.photon_mode_count(), "photon mode");
  const auto phonons = sorted_unique(measured.phonon_modes, space.phonon_mode_count(), "phonon mode");
  const auto atoms = sorted_unique(measured.atoms, space.atom_count(), "atom");

  MeasuredLayout lay{{}, {}, {}, space};  // reduced rebuilt below
  std::vector<int> kept_photon_caps, kept_phonon_caps;
  std::vector<int> radices;
  for (int m = 0; m < space.photon_mode_count(); ++m) {
    if (std::binary_search(photons.begin(), photons.end(), m)) {
      lay.positions.push_back(space.photon_offset() + m);
      radices.push_back(space.photon_cap(m) + 1);
    } else {
      lay.keep_positions.push_back(space.photon_offset() + m);
      kept_photon_caps.push_back(space.photon_cap(m));
    }
  }
  for (int m = 0; m < space.phonon_mode_count(); ++m) {
    if (std::binary_search(phonons.begin(), phonons.end(), m)) {
      lay.positions.push_back(space.phonon_offset() + m);
      radices.push_back(space.phonon_cap(m) + 1);
    } else {
      lay.keep_positions.push_back(space.phonon_offset() + m);
      kept_phonon_caps.push_back(space.phonon_cap(m));
    }
  }
  int kept_atoms = 0;
  for (int a = 0; a < space.atom_count(); ++a) {
    if (std::binary_search(atoms.begin(), atoms.end(), a)) {
      lay.positions.push_back(space.atom_position(a));
      radices.push_back(3);
    } else {
      lay.keep_positions.push_back(space.atom_position(a));
      ++kept_atoms;
    }
  }

  lay.strides.assign(radices.size(), 1);
  for (int i = static_cast<int>(radices.size()) - 2; i >= 0; --i)
    lay.strides[i] = lay.strides[i + 1] * radices[i + 1];

  lay.reduced = SpaceDescriptor(kept_photon_caps, kept_phonon_caps, kept_atoms);
  return lay;
}

inline ProjectorSpec spec_from_mini_index(const SubsystemSet& set, const MeasuredLayout& lay,
                                          std::int64_t mini) {
  // measured subsystems appear in lay.positions in canonical order:
  // photons, phonons, atoms
  ProjectorSpec spec;
  std::size_t slot = 0;
  auto next_label = [&]() {
    const std::int64_t v = mini / lay.strides[slot];
    mini %= lay.strides[slot];
    ++slot;
    return static_cast<int>(v);
  };
  std::vector<int> photons = set.photon_modes, phonons = set.phonon_modes, atoms = set.atoms;
  std::sort(photons.begin(), photons.end());
  std::sort(phonons.begin(), phonons.end());
  std::sort(atoms.begin(), atoms.end());
  for (int m : photons) spec.photon_outcomes[m] = next_label();
  for (int m : phonons) spec.phonon_outcomes[m] = next_label();
  for (int a : atoms) spec.atom_outcomes[a] = level_from_index(next_label());
  return spec;
}

}  // namespace detail

/// Collapses the state onto the requested outcome. Keeps exactly the
/// amplitudes whose labels match every constraint; the post state is
/// re-indexed over the remaining subsystems and normalized.
inline MeasurementOutcome project(const StateVector& state, const ProjectorSpec& spec) {
  if (spec.empty()) throw std::invalid_argument("projector spec is empty");
  const SpaceDescriptor& space = state.space();

  for (const auto& [mode, n] : spec.photon_outcomes)
    if (n < 0 || n > space.photon_cap(mode))
      throw std::invalid_argument("requested photon occupancy outside the truncation");
  for (const auto& [mode, n] : spec.phonon_outcomes)
    if (n < 0 || n > space.phonon_cap(mode))
      throw std::invalid_argument("requested phonon occupancy outside the truncation");
  for (const auto& [atom, l] : spec.atom_outcomes) space.atom_position(atom);

  const auto lay = detail::measured_layout(space, spec.measured());

  // target mini-index of the requested labels
  std::vector<int> full(space.subsystem_count(), 0);
  for (const auto& [mode, n] : spec.photon_outcomes) full[space.photon_offset() + mode] = n;
  for (const auto& [mode, n] : spec.phonon_outcomes) full[space.phonon_offset() + mode] = n;
  for (const auto& [atom, l] : spec.atom_outcomes)
    full[space.atom_position(atom)] = level_index(l);
  const std::int64_t target = lay.mini_index(full);

  Vector post = Vector::Zero(lay.reduced.dimension());
  double weight = 0.0;
  std::vector<int> labels(space.subsystem_count());
  for (std::int64_t i = 0; i < space.dimension(); ++i) {
    const complex_t amp = state.amplitude(i);
    if (amp == complex_t{}) continue;
    space.decode(i, labels);
    if (lay.mini_index(labels) != target) continue;
    weight += std::norm(amp);
    post(lay.reduced_index(labels)) += amp;
  }

  MeasurementOutcome out;
  out.spec = spec;
  out.probability = weight;
  if (weight > outcome_weight_floor)
    out.post_state = StateVector(lay.reduced, post / std::sqrt(weight));
  return out;
}

/// All outcome branches of measuring the given subsystems, ordered by the
/// canonical index of the outcome labels. Branches below the weight floor are
/// suppressed.
inline std::vector<MeasurementOutcome> enumerate_outcomes(
    const StateVector& state, const SubsystemSet& measured,
    double weight_floor = outcome_weight_floor) {
  const SpaceDescriptor& space = state.space();
  const auto lay = detail::measured_layout(space, measured);

  std::map<std::int64_t, double> weights;
  std::vector<int> labels(space.subsystem_count());
  for (std::int64_t i = 0; i < space.dimension(); ++i) {
    const complex_t amp = state.amplitude(i);
    if (amp == complex_t{}) continue;
    space.decode(i, labels);
    weights[lay.mini_index(labels)] += std::norm(amp);
  }

  std::vector<MeasurementOutcome> outcomes;
  outcomes.reserve(weights.size());
  for (const auto& [mini, w] : weights) {
    if (w < weight_floor) continue;
    outcomes.push_back(project(state, detail::spec_from_mini_index(measured, lay, mini)));
  }
  return outcomes;
}

}  // namespace qrep
