#include "qrep/protocol.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace qrep;

namespace {

const ModelParams params = ModelParams::simplified(1.0, 2.0, 0.5);

const BranchRecord& find_branch(const std::vector<BranchRecord>& branches, Stage stage,
                                int photons, AtomLevel a, AtomLevel b, int case_id = 0) {
  for (const auto& rec : branches) {
    if (rec.stage != stage || rec.case_id != case_id) continue;
    if (stage != Stage::b && rec.outcome_label.photon_outcomes.at(0) != photons) continue;
    const int first = (stage == Stage::b) ? stage_b_cavity_atoms.first : stage_a_cavity_atoms.first;
    const int second =
        (stage == Stage::b) ? stage_b_cavity_atoms.second : stage_a_cavity_atoms.second;
    if (rec.outcome_label.atom_outcomes.at(first) == a &&
        rec.outcome_label.atom_outcomes.at(second) == b)
      return rec;
  }
  throw std::runtime_error("branch not found");
}

}  // namespace

TEST_CASE("swapping branches at t = 0") {
  const auto branches = run_stage_a(params, 0.0);

  const auto& swap1 = find_branch(branches, Stage::a_left, 0, AtomLevel::L3, AtomLevel::L1);
  const auto& swap2 = find_branch(branches, Stage::a_left, 0, AtomLevel::L1, AtomLevel::L3);
  const auto& balanced = find_branch(branches, Stage::a_left, 1, AtomLevel::L3, AtomLevel::L3);
  const auto& constant = find_branch(branches, Stage::a_left, 0, AtomLevel::L3, AtomLevel::L3);
  const auto& upper = find_branch(branches, Stage::a_left, 0, AtomLevel::L1, AtomLevel::L1);

  CHECK(std::abs(swap1.conditional_probability - 0.25) < 1e-12);
  CHECK(std::abs(swap2.conditional_probability - 0.25) < 1e-12);
  CHECK(balanced.conditional_probability == 0.0);
  CHECK(std::abs(constant.conditional_probability - 0.25) < 1e-12);
  CHECK(std::abs(upper.conditional_probability - 0.25) < 1e-12);

  CHECK(swap1.classification == BranchClass::success);
  CHECK(swap2.classification == BranchClass::success);
  CHECK(balanced.classification == BranchClass::heralded_bell);
  CHECK(constant.classification == BranchClass::failure);
  CHECK(upper.classification == BranchClass::failure);

  // the swapped pairs are products at t = 0
  REQUIRE(swap1.pair_summary.has_value());
  CHECK(swap1.pair_summary->e == 0.0);
  REQUIRE(swap2.pair_summary.has_value());
  CHECK(swap2.pair_summary->e == 0.0);
}

TEST_CASE("swapping branch probabilities always sum to one") {
  for (double t : {0.0, 0.4, 1.0, 3.7, 8.2}) {
    const auto branches = run_stage_a(params, t);
    double sum = 0.0;
    for (const auto& rec : branches) sum += rec.conditional_probability;
    CHECK(std::abs(sum - 1.0) < 1e-10);
  }
}

TEST_CASE("swapping branch figures match the propagation + projection oracle") {
  const double t = 1.0;
  const auto space = stage_a_space();
  const auto h = h_eff_stage_a(params, space, stage_a_cavity_atoms);
  const auto psi = propagate(h, stage_a_initial_state(space), t);

  ProjectorSpec spec;
  spec.photon_outcomes[0] = 0;
  spec.phonon_outcomes[0] = 0;
  spec.atom_outcomes[stage_a_cavity_atoms.first] = AtomLevel::L3;
  spec.atom_outcomes[stage_a_cavity_atoms.second] = AtomLevel::L1;
  const auto oracle = project(psi, spec);
  REQUIRE(oracle.post_state.has_value());
  const auto& reduced = oracle.post_state->space();
  const complex_t c1 =
      oracle.post_state->amplitude(reduced.index_of({{0}, {0}, {AtomLevel::L1, AtomLevel::L3}}));
  const complex_t c2 =
      oracle.post_state->amplitude(reduced.index_of({{0}, {0}, {AtomLevel::L3, AtomLevel::L1}}));

  const auto branches = run_stage_a(params, t);
  const auto& swap1 = find_branch(branches, Stage::a_left, 0, AtomLevel::L3, AtomLevel::L1);
  REQUIRE(swap1.pair_summary.has_value());
  CHECK(std::abs(swap1.conditional_probability - oracle.probability) < 1e-8);
  CHECK(std::abs(swap1.pair_summary->e - linear_entropy_two_term(c1, c2)) < 1e-8);
  CHECK(std::abs(swap1.pair_summary->p - oracle.probability) < 1e-8);
}

TEST_CASE("full protocol at tau = t leaves the target pair unentangled") {
  const auto tree = run_full_protocol(params, 1.0, 1.0);
  for (int c = 1; c <= 4; ++c) {
    CHECK(tree.final_results.at("case" + std::to_string(c) + "/psi").e < 1e-12);
    CHECK(tree.final_results.at("case" + std::to_string(c) + "/psi_prime").e < 1e-12);
  }
}

TEST_CASE("case-1 success probability is independent of tau") {
  const auto sa = stage_a_coefficients(params, 1.0);
  const double expected = std::norm(sa.a[1] * sa.a[9]) /
                          std::pow(std::norm(sa.a[1]) + std::norm(sa.a[9]), 2);
  for (double tau : {1.0, 1.5, 2.0, 5.0, 11.0}) {
    const auto tree = run_full_protocol(params, 1.0, tau);
    CHECK(std::abs(tree.final_results.at("case1/psi").p - expected) < 1e-10);
  }
}

TEST_CASE("case-1 entropy follows the half-sine-squared law") {
  const double t = 1.0;
  for (double dtau : {0.1, 0.35, 0.9, 2.0}) {
    const auto tree = run_full_protocol(params, t, t + dtau);
    const double theta = 2.0 * params.lambda1 * params.lambda1 * dtau / params.omega_m;
    const double expected = 0.5 * std::sin(theta) * std::sin(theta);
    CHECK(std::abs(tree.final_results.at("case1/psi").e - expected) < 1e-10);
  }
  // theta = pi/2 maximizes the entanglement
  const double quarter = t + M_PI * params.omega_m / (4.0 * params.lambda1 * params.lambda1);
  const auto tree = run_full_protocol(params, t, quarter);
  CHECK(std::abs(tree.final_results.at("case1/psi").e - 0.5) < 1e-10);
}

TEST_CASE("symmetry identities hold and a corrupted tree is flagged") {
  auto tree = run_full_protocol(params, 1.0, 2.3);
  CHECK(tree.symmetry.all_within(1e-10));

  tree.final_results.at("case1/psi").e += 1e-3;
  const auto report = verify_symmetries(tree);
  CHECK_FALSE(report.all_within(1e-10));
  bool flagged = false;
  for (const auto& entry : report.entries)
    if (entry.identity == "E1=E1'" && entry.deviation > 1e-4) flagged = true;
  CHECK(flagged);
}

TEST_CASE("probability conservation at every tree node") {
  const auto tree = run_full_protocol(params, 1.0, 2.0);
  const auto checks = run_invariant_checks(tree);
  for (const auto& check : checks) {
    INFO(check.name << " deviation " << check.deviation);
    CHECK(check.pass);
  }
}

TEST_CASE("the right swapping run mirrors the left one") {
  const auto tree = run_full_protocol(params, 1.0, 2.0);
  std::vector<const BranchRecord*> left, right;
  for (const auto& rec : tree.branches) {
    if (rec.stage == Stage::a_left) left.push_back(&rec);
    if (rec.stage == Stage::a_right) right.push_back(&rec);
  }
  REQUIRE(left.size() == right.size());
  for (std::size_t i = 0; i < left.size(); ++i) {
    CHECK(left[i]->conditional_probability == right[i]->conditional_probability);
    CHECK(left[i]->classification == right[i]->classification);
  }
}

TEST_CASE("every figure of merit survives a joint time-frequency rescaling") {
  for (double s : {2.0, 3.0}) {
    const auto base = run_full_protocol(ModelParams::simplified(1.0, 2.0, 0.5), 1.0, 2.4);
    const auto scaled =
        run_full_protocol(ModelParams::simplified(1.0, 2.0, 0.5 * s), 1.0 * s, 2.4 * s);
    for (const auto& [key, summary] : base.final_results) {
      CHECK(std::abs(summary.e - scaled.final_results.at(key).e) < 1e-10);
      CHECK(std::abs(summary.p - scaled.final_results.at(key).p) < 1e-10);
    }
  }
}

TEST_CASE("protocol argument validation") {
  CHECK_THROWS_AS(run_full_protocol(params, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(run_stage_a(params, -1.0), std::invalid_argument);
}

TEST_CASE("cumulative probabilities multiply along the path") {
  const auto tree = run_full_protocol(params, 1.0, 2.0);
  const auto sa = tree.stage_a;
  const double pair_p = std::norm(sa.a[1]) + std::norm(sa.a[9]);
  for (const auto& rec : tree.branches) {
    if (rec.stage != Stage::b) continue;
    CHECK(std::abs(rec.cumulative_probability -
                   pair_p * pair_p * rec.conditional_probability) < 1e-12);
  }
}
