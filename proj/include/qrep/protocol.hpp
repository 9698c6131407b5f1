#pragma once

// Orchestration of the full repeater run: the two swapping stages on the
// interior atom pairs, the final optical-cavity stage, and the bookkeeping of
// every measurement branch with its probabilities and figures of merit.

#include "qrep/dynamics.hpp"
#include "qrep/measurement.hpp"
#include "qrep/metrics.hpp"

#include <sstream>

namespace qrep {

enum class Stage { a_left, a_right, b };

enum class BranchClass { success, heralded_bell, failure };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::a_left: return "A(1-4)";
    case Stage::a_right: return "A(5-8)";
    case Stage::b: return "B";
  }
  return "?";
}

inline const char* to_string(BranchClass c) {
  switch (c) {
    case BranchClass::success: return "success";
    case BranchClass::heralded_bell: return "heralded_bell";
    case BranchClass::failure: return "failure";
  }
  return "?";
}

/// Compact label such as "a0=1 b0=1 atom1=3 atom2=3".
inline std::string format_spec(const ProjectorSpec& spec) {
  std::ostringstream out;
  bool first = true;
  auto sep = [&]() { return std::exchange(first, false) ? "" : " "; };
  for (const auto& [mode, n] : spec.photon_outcomes) out << sep() << "a" << mode << "=" << n;
  for (const auto& [mode, n] : spec.phonon_outcomes) out << sep() << "b" << mode << "=" << n;
  for (const auto& [atom, l] : spec.atom_outcomes)
    out << sep() << "atom" << atom << "=" << (level_index(l) + 1);
  return out.str();
}

struct BranchRecord {
  Stage stage = Stage::a_left;
  int case_id = 0;  // 0 for the swapping stages, 1..4 for the final stage
  ProjectorSpec outcome_label;
  double conditional_probability = 0.0;
  double cumulative_probability = 0.0;
  std::optional<PairStateSummary> pair_summary;
  BranchClass classification = BranchClass::failure;
};

struct SymmetryReport {
  struct Entry {
    std::string identity;
    double deviation;
  };
  std::vector<Entry> entries;

  double max_deviation() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.deviation);
    return m;
  }
  bool all_within(double tol) const { return max_deviation() <= tol; }
};

struct ProtocolTree {
  ModelParams params;
  double t = 0.0;
  double tau = 0.0;
  StageASolution stage_a;
  std::vector<BranchRecord> branches;
  /// Figures of merit of the target pair per case and final outcome; keys are
  /// "case<i>/psi" (atoms (4,5) found in (1,3)) and "case<i>/psi_prime"
  /// (atoms (4,5) found in (3,1)).
  std::map<std::string, PairStateSummary> final_results;
  SymmetryReport symmetry;
};

namespace detail {

// pair amplitudes (unnormalized) of the two-ket component c1|13> + c2|31> of
// a post-state whose space is a pair of atoms plus possibly empty modes;
// returns nothing when weight leaks off those two kets
inline std::optional<PairStateSummary> pair_summary_of(const MeasurementOutcome& outcome) {
  if (!outcome.post_state) return std::nullopt;
  const StateVector& post = *outcome.post_state;
  const SpaceDescriptor& space = post.space();
  if (space.atom_count() != 2) return std::nullopt;

  CompositeBasisState ket;
  ket.photon_occupancies.assign(space.photon_mode_count(), 0);
  ket.phonon_occupancies.assign(space.phonon_mode_count(), 0);
  ket.atom_levels = {AtomLevel::L1, AtomLevel::L3};
  const complex_t c1 = post.amplitude(space.index_of(ket));
  ket.atom_levels = {AtomLevel::L3, AtomLevel::L1};
  const complex_t c2 = post.amplitude(space.index_of(ket));
  if (std::abs(std::norm(c1) + std::norm(c2) - 1.0) > 1e-9) return std::nullopt;

  const double scale = std::sqrt(outcome.probability);
  return summarize_pair(c1 * scale, c2 * scale);
}

inline ProjectorSpec stage_a_label(int photons, int phonons, AtomLevel first, AtomLevel second) {
  ProjectorSpec spec;
  spec.photon_outcomes[0] = photons;
  spec.phonon_outcomes[0] = phonons;
  spec.atom_outcomes[stage_a_cavity_atoms.first] = first;
  spec.atom_outcomes[stage_a_cavity_atoms.second] = second;
  return spec;
}

inline bool same_label(const ProjectorSpec& a, const ProjectorSpec& b) {
  return a.photon_outcomes == b.photon_outcomes && a.phonon_outcomes == b.phonon_outcomes &&
         a.atom_outcomes == b.atom_outcomes;
}

}  // namespace detail

/// All outcome branches of the swapping measurement: field modes (a0; b0) and
/// the two cavity atoms. The three tracked branches (the two swapped-pair
/// outcomes and the balanced photon-phonon one) are always present, at zero
/// probability if need be.
inline std::vector<BranchRecord> run_stage_a(const ModelParams& params, double t) {
  if (t < 0.0) throw std::invalid_argument("t must be >= 0");
  const StageASolution sa = stage_a_coefficients(params, t);
  const SpaceDescriptor space = stage_a_space();
  const StateVector psi = embed_stage_a(sa, space);

  SubsystemSet measured;
  measured.photon_modes = {0};
  measured.phonon_modes = {0};
  measured.atoms = {stage_a_cavity_atoms.first, stage_a_cavity_atoms.second};

  std::vector<MeasurementOutcome> outcomes = enumerate_outcomes(psi, measured);

  // force the tracked labels into the list, keeping canonical order
  const std::array<ProjectorSpec, 3> tracked = {
      detail::stage_a_label(0, 0, AtomLevel::L1, AtomLevel::L3),
      detail::stage_a_label(0, 0, AtomLevel::L3, AtomLevel::L1),
      detail::stage_a_label(1, 1, AtomLevel::L3, AtomLevel::L3),
  };
  for (const auto& spec : tracked) {
    const bool present = std::any_of(outcomes.begin(), outcomes.end(), [&](const auto& o) {
      return detail::same_label(o.spec, spec);
    });
    if (!present) {
      MeasurementOutcome zero;
      zero.spec = spec;
      outcomes.push_back(zero);
    }
  }
  auto label_key = [](const ProjectorSpec& s) {
    return std::array<int, 4>{s.photon_outcomes.at(0), s.phonon_outcomes.at(0),
                              level_index(s.atom_outcomes.at(stage_a_cavity_atoms.first)),
                              level_index(s.atom_outcomes.at(stage_a_cavity_atoms.second))};
  };
  std::sort(outcomes.begin(), outcomes.end(),
            [&](const auto& a, const auto& b) { return label_key(a.spec) < label_key(b.spec); });

  std::vector<BranchRecord> records;
  records.reserve(outcomes.size());
  for (const auto& outcome : outcomes) {
    BranchRecord rec;
    rec.stage = Stage::a_left;
    rec.outcome_label = outcome.spec;
    rec.conditional_probability = outcome.probability;
    rec.cumulative_probability = outcome.probability;

    const auto key = label_key(outcome.spec);
    const bool balanced = (key == std::array<int, 4>{1, 1, 2, 2});
    const bool swapped = (key == std::array<int, 4>{0, 0, 2, 0}) ||
                         (key == std::array<int, 4>{0, 0, 0, 2});
    rec.classification = balanced  ? BranchClass::heralded_bell
                         : swapped ? BranchClass::success
                                   : BranchClass::failure;
    if (balanced || swapped) rec.pair_summary = detail::pair_summary_of(outcome);
    records.push_back(std::move(rec));
  }
  return records;
}

/// Checks the branch identities that hold between the final-stage cases.
inline SymmetryReport verify_symmetries(const ProtocolTree& tree) {
  auto res = [&](int c, bool primed) -> const PairStateSummary& {
    return tree.final_results.at("case" + std::to_string(c) + (primed ? "/psi_prime" : "/psi"));
  };
  SymmetryReport report;
  auto add = [&](std::string name, double a, double b) {
    report.entries.push_back({std::move(name), std::abs(a - b)});
  };
  add("E1=E1'", res(1, false).e, res(1, true).e);
  add("P1=P1'", res(1, false).p, res(1, true).p);
  add("E2=E2'", res(2, false).e, res(2, true).e);
  add("P2=P2'", res(2, false).p, res(2, true).p);
  add("E1=E2", res(1, false).e, res(2, false).e);
  add("P1=P2", res(1, false).p, res(2, false).p);
  add("E3=E4'", res(3, false).e, res(4, true).e);
  add("P3=P4'", res(3, false).p, res(4, true).p);
  add("E4=E3'", res(4, false).e, res(3, true).e);
  add("P4=P3'", res(4, false).p, res(3, true).p);
  return report;
}

/// Runs both swapping stages and all four final-stage cases, recording every
/// branch. The right swapping run is numerically identical to the left one
/// (same generator, same initial state), so its records are mirrored.
inline ProtocolTree run_full_protocol(const ModelParams& params, double t, double tau) {
  if (tau < t) throw std::invalid_argument("tau must be >= t");

  ProtocolTree tree;
  tree.params = params;
  tree.t = t;
  tree.tau = tau;
  tree.stage_a = stage_a_coefficients(params, t);

  std::vector<BranchRecord> left = run_stage_a(params, t);
  double pair_probability = 0.0;
  for (const auto& rec : left)
    if (rec.classification == BranchClass::success) pair_probability = rec.conditional_probability;

  for (const auto& rec : left) tree.branches.push_back(rec);
  for (BranchRecord rec : left) {
    rec.stage = Stage::a_right;
    tree.branches.push_back(std::move(rec));
  }

  const SpaceDescriptor space = stage_b_space();
  SubsystemSet measured;
  measured.atoms = {stage_b_cavity_atoms.first, stage_b_cavity_atoms.second};

  for (int case_id = 1; case_id <= 4; ++case_id) {
    const StageBSolution sb = stage_b_coefficients(tree.stage_a, params, case_id, tau);
    const StateVector psi = embed_stage_b(sb, space);
    std::vector<MeasurementOutcome> outcomes = enumerate_outcomes(psi, measured);

    auto tracked_spec = [&](AtomLevel a, AtomLevel b) {
      ProjectorSpec spec;
      spec.atom_outcomes[stage_b_cavity_atoms.first] = a;
      spec.atom_outcomes[stage_b_cavity_atoms.second] = b;
      return spec;
    };
    for (const auto& spec :
         {tracked_spec(AtomLevel::L1, AtomLevel::L3), tracked_spec(AtomLevel::L3, AtomLevel::L1)}) {
      const bool present = std::any_of(outcomes.begin(), outcomes.end(), [&](const auto& o) {
        return detail::same_label(o.spec, spec);
      });
      if (!present) {
        MeasurementOutcome zero;
        zero.spec = spec;
        outcomes.push_back(zero);
      }
    }
    auto label_key = [&](const ProjectorSpec& s) {
      return std::array<int, 2>{level_index(s.atom_outcomes.at(stage_b_cavity_atoms.first)),
                                level_index(s.atom_outcomes.at(stage_b_cavity_atoms.second))};
    };
    std::sort(outcomes.begin(), outcomes.end(),
              [&](const auto& a, const auto& b) { return label_key(a.spec) < label_key(b.spec); });

    for (const auto& outcome : outcomes) {
      BranchRecord rec;
      rec.stage = Stage::b;
      rec.case_id = case_id;
      rec.outcome_label = outcome.spec;
      rec.conditional_probability = outcome.probability;
      rec.cumulative_probability = pair_probability * pair_probability * outcome.probability;

      const auto key = label_key(outcome.spec);
      const bool tracked_psi = (key == std::array<int, 2>{0, 2});        // atoms (4,5) in (1,3)
      const bool tracked_psi_prime = (key == std::array<int, 2>{2, 0});  // atoms (4,5) in (3,1)
      rec.classification = (tracked_psi || tracked_psi_prime) ? BranchClass::success
                                                              : BranchClass::failure;
      if (tracked_psi || tracked_psi_prime) {
        auto summary = detail::pair_summary_of(outcome);
        rec.pair_summary = summary ? summary : summarize_pair(complex_t{}, complex_t{});
        const std::string key_name = "case" + std::to_string(case_id) +
                                     (tracked_psi ? "/psi" : "/psi_prime");
        tree.final_results[key_name] = *rec.pair_summary;
      }
      tree.branches.push_back(std::move(rec));
    }
  }

  tree.symmetry = verify_symmetries(tree);
  return tree;
}

/// Named invariant checks over a completed tree; used by the --check path.
struct InvariantCheck {
  std::string name;
  double deviation;
  bool pass;
};

inline std::vector<InvariantCheck> run_invariant_checks(const ProtocolTree& tree,
                                                        double tol = 1e-10) {
  std::vector<InvariantCheck> checks;
  auto add = [&](std::string name, double deviation) {
    checks.push_back({std::move(name), deviation, deviation <= tol});
  };

  double sum_left = 0.0, sum_right = 0.0;
  std::array<double, 4> case_sums{0.0, 0.0, 0.0, 0.0};
  double balanced_failure = -1.0;
  for (const auto& rec : tree.branches) {
    switch (rec.stage) {
      case Stage::a_left: sum_left += rec.conditional_probability; break;
      case Stage::a_right: sum_right += rec.conditional_probability; break;
      case Stage::b: case_sums[rec.case_id - 1] += rec.conditional_probability; break;
    }
    if (rec.stage == Stage::a_left && rec.classification == BranchClass::failure &&
        rec.outcome_label.photon_outcomes.at(0) == 0 &&
        rec.outcome_label.phonon_outcomes.at(0) == 0 &&
        rec.outcome_label.atom_outcomes.at(stage_a_cavity_atoms.first) == AtomLevel::L3 &&
        rec.outcome_label.atom_outcomes.at(stage_a_cavity_atoms.second) == AtomLevel::L3)
      balanced_failure = rec.conditional_probability;
  }
  add("stage A(1-4) branch probabilities sum to 1", std::abs(sum_left - 1.0));
  add("stage A(5-8) branch probabilities sum to 1", std::abs(sum_right - 1.0));
  for (int c = 1; c <= 4; ++c)
    add("stage B case " + std::to_string(c) + " branch probabilities sum to 1",
        std::abs(case_sums[c - 1] - 1.0));
  add("constant-amplitude failure branch has probability 1/4",
      balanced_failure < 0.0 ? 1.0 : std::abs(balanced_failure - 0.25));

  double norm_a = 0.0;
  for (const auto& c : tree.stage_a.a) norm_a += std::norm(c);
  add("stage-A amplitudes are normalized", std::abs(norm_a - 1.0));

  for (const auto& entry : tree.symmetry.entries)
    add("symmetry " + entry.identity, entry.deviation);
  return checks;
}

}  // namespace qrep
