#include "qrep/dynamics.hpp"

#include "oracle_utils.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace qrep;

namespace {

const ModelParams default_params = ModelParams::simplified(1.0, 2.0, 0.5);

StateVector basis_vector(const SpaceDescriptor& space, std::int64_t index) {
  Vector v = Vector::Zero(space.dimension());
  v(index) = 1.0;
  return StateVector(space, v);
}

double max_coeff_error(const StageASolution& sol, const StateVector& psi,
                       std::span<const std::int64_t> kets) {
  double err = 0.0;
  for (std::size_t k = 0; k < kets.size(); ++k)
    err = std::max(err, std::abs(sol.a[k] - psi.amplitude(kets[k])));
  return err;
}

}  // namespace

TEST_CASE("propagate: identity at t = 0 and exact phases for diagonal generators") {
  const auto space = build_space({2}, {}, 0);
  Matrix diag = Matrix::Zero(3, 3);
  diag(0, 0) = 0.5;
  diag(1, 1) = -1.5;
  diag(2, 2) = 3.0;
  const OperatorMatrix h(space, diag, true);

  Vector amp(3);
  amp << complex_t{0.5, 0.0}, complex_t{0.0, 0.5}, complex_t{-0.5, 0.5};
  const StateVector psi(space, amp);

  const auto same = propagate(h, psi, 0.0);
  CHECK((same.amplitudes() - amp).cwiseAbs().maxCoeff() < 1e-14);

  const double t = 1.7;
  const auto evolved = propagate(h, psi, t);
  for (int k = 0; k < 3; ++k) {
    const complex_t expected = amp(k) * std::exp(-imag_unit * diag(k, k).real() * t);
    CHECK(std::abs(evolved.amplitude(k) - expected) < 1e-13);
  }
  CHECK(std::abs(evolved.squared_norm() - psi.squared_norm()) < 1e-10);
}

TEST_CASE("propagate rejects non-hermitian generators and mismatched spaces") {
  const auto space = build_space({2}, {}, 0);
  const auto a = mode_annihilator(space, photon_mode(0));
  const auto psi = basis_vector(space, 0);
  CHECK_THROWS_AS(propagate(a, psi, 1.0), std::invalid_argument);

  const auto other = build_space({1}, {}, 1);
  const OperatorMatrix h(space, Matrix::Zero(3, 3), true);
  CHECK_THROWS_AS(Propagator(h).at(basis_vector(other, 0), 1.0), std::invalid_argument);
}

TEST_CASE("two-level exchange block evolves with the closed-form amplitudes") {
  const auto p = default_params;
  const auto space = build_space({}, {}, 2);
  const auto h = h_eff_stage_b(p, space, {0, 1});

  CompositeBasisState start{{}, {}, {AtomLevel::L3, AtomLevel::L1}};
  CompositeBasisState flipped{{}, {}, {AtomLevel::L1, AtomLevel::L3}};
  const auto psi0 = basis_vector(space, space.index_of(start));

  for (double t : {0.2, 0.9, 2.5}) {
    const auto psi = propagate(h, psi0, t);
    const double theta = 2.0 * p.lambda1 * p.lambda1 * t / p.omega_m;
    const complex_t stay = 0.5 * (1.0 + std::exp(-imag_unit * theta));
    const complex_t flip = -0.5 * (1.0 - std::exp(-imag_unit * theta));
    CHECK(std::abs(psi.amplitude(space.index_of(start)) - stay) < 1e-12);
    CHECK(std::abs(psi.amplitude(space.index_of(flipped)) - flip) < 1e-12);
  }
}

TEST_CASE("integrate_ode: zero generator is the identity") {
  const auto space = build_space({1}, {}, 1);
  const OperatorMatrix zero(space, Matrix::Zero(space.dimension(), space.dimension()), true);
  Vector amp = Vector::Zero(space.dimension());
  amp(1) = complex_t{0.6, 0.3};
  const StateVector psi(space, amp);
  const auto result = integrate_ode([&](double) { return zero; }, psi, 3.0, 10);
  CHECK((result.state.amplitudes() - amp).cwiseAbs().maxCoeff() == 0.0);
  CHECK(result.norm_drift == 0.0);
}

TEST_CASE("integrate_ode converges at fourth order") {
  const auto p = default_params;
  const auto space = build_space({}, {}, 2);
  const auto h = h_eff_stage_b(p, space, {0, 1});
  const auto psi0 = basis_vector(space, space.index_of({{}, {}, {AtomLevel::L3, AtomLevel::L1}}));
  const double t = 1.0;

  const auto exact = propagate(h, psi0, t);
  auto error_with = [&](int steps) {
    const auto r = integrate_ode([&](double) { return h; }, psi0, t, steps);
    return (r.state.amplitudes() - exact.amplitudes()).cwiseAbs().maxCoeff();
  };
  const double coarse = error_with(8);
  const double fine = error_with(16);
  CHECK(coarse / fine > 8.0);
  CHECK(coarse / fine < 40.0);
  CHECK_THROWS_AS(integrate_ode([&](double) { return h; }, psi0, 1.0, 0),
                  std::invalid_argument);
}

TEST_CASE("integrate_ode agrees with the matrix exponential on the invariant block") {
  const auto p = default_params;
  const auto space = stage_a_space();
  const auto h = h_eff_stage_a(p, space, stage_a_cavity_atoms);
  const auto kets = stage_a_ket_indices(space);
  const auto restricted = testing::restrict_operator(h, kets);
  const auto psi0 =
      testing::restrict_state(stage_a_initial_state(space), restricted.carrier, kets);

  const auto exact = propagate(restricted.op, psi0, 1.0);
  const auto stepped = integrate_ode([&](double) { return restricted.op; }, psi0, 1.0, 10000);
  CHECK((exact.amplitudes() - stepped.state.amplitudes()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(stepped.norm_drift < 1e-10);
}

TEST_CASE("stage-A amplitudes start from the entangled-pair product") {
  const auto sol = stage_a_coefficients(default_params, 0.0);
  CHECK(sol.a[0] == complex_t{0.5, 0.0});
  CHECK(std::abs(sol.a[1] - complex_t{0.5, 0.0}) < 1e-15);
  CHECK(std::abs(sol.a[4] - complex_t{0.5, 0.0}) < 1e-15);
  CHECK(std::abs(sol.a[8] - complex_t{0.5, 0.0}) < 1e-15);
  double norm = 0.0;
  for (const auto& c : sol.a) norm += std::norm(c);
  CHECK(std::abs(norm - 1.0) < 1e-12);
}

TEST_CASE("stage-A amplitude identities and conservation laws") {
  for (double t : {0.1, 0.7, 1.0, 3.3, 9.9}) {
    const auto sol = stage_a_coefficients(default_params, t);
    CHECK(sol.a[0] == complex_t{0.5, 0.0});
    // duplicated blocks
    CHECK(std::abs(sol.a[1] - sol.a[8]) == 0.0);
    CHECK(std::abs(sol.a[2] - sol.a[9]) == 0.0);
    CHECK(std::abs(sol.a[3] - sol.a[10]) == 0.0);
    CHECK(std::abs(sol.a[5] - sol.a[6]) < 1e-10);
    // the difference of the first two amplitudes is a constant of motion
    CHECK(std::abs(sol.a[1] - sol.a[2] - complex_t{0.5, 0.0}) < 1e-10);
    double norm = 0.0;
    for (const auto& c : sol.a) norm += std::norm(c);
    CHECK(std::abs(norm - 1.0) < 1e-10);
  }
}

TEST_CASE("stage-A closed form matches full-space propagation") {
  const auto p = default_params;
  const auto space = stage_a_space();
  const auto h = h_eff_stage_a(p, space, stage_a_cavity_atoms);
  const Propagator prop(h);
  const auto kets = stage_a_ket_indices(space);
  const auto psi0 = stage_a_initial_state(space);

  for (double t : {0.5, 1.0, 2.0}) {
    const auto psi = prop.at(psi0, t);
    const auto sol = stage_a_coefficients(p, t);
    CHECK(max_coeff_error(sol, psi, kets) < 1e-10);
  }
}

TEST_CASE("full-space effective evolution never leaves the eleven kets") {
  const auto space = stage_a_space();
  const auto h = h_eff_stage_a(default_params, space, stage_a_cavity_atoms);
  const Propagator prop(h);
  const auto kets = stage_a_ket_indices(space);
  const auto psi0 = stage_a_initial_state(space);

  for (double t : {0.5, 2.5, 7.0}) {
    const auto psi = prop.at(psi0, t);
    double inside = 0.0;
    for (const auto k : kets) inside += std::norm(psi.amplitude(k));
    CHECK(std::abs(psi.squared_norm() - inside) < 1e-10);
  }
}

TEST_CASE("stage-A time axis rescales with the mechanical frequency") {
  for (double s : {2.0, 3.0}) {
    const auto base = stage_a_coefficients(ModelParams::simplified(1.0, 2.0, 0.5), 1.3);
    const auto scaled = stage_a_coefficients(ModelParams::simplified(1.0, 2.0, 0.5 * s), 1.3 * s);
    for (int k = 0; k < 11; ++k) CHECK(std::abs(base.a[k] - scaled.a[k]) < 1e-10);
  }
}

TEST_CASE("rotating-frame variables obey the first-order equations") {
  const double lambda = 1.0, g = 2.0, w = 0.5;
  const auto p = ModelParams::simplified(lambda, g, w);
  const double ll = lambda * lambda, gl = g * lambda, gg = g * g;
  const double h = 1e-5;

  auto at = [&](double t) { return stage_a_coefficients(p, t); };
  for (double t : {0.3, 1.1, 2.9}) {
    const auto lo = at(t - h), hi = at(t + h);
    auto phase = [&](double rate) { return std::exp(imag_unit * rate * t / w); };

    // first block: variables (a2 + a3) and a4 in their rotating frames
    auto tilde23 = [&](const StageASolution& s, double tt) {
      return (s.a[1] + s.a[2]) * std::exp(imag_unit * 2.0 * ll * tt / w);
    };
    auto tilde4 = [&](const StageASolution& s, double tt) {
      return s.a[3] * std::exp(-imag_unit * (2.0 * ll + gg) * tt / w);
    };
    const complex_t d23 = (tilde23(hi, t + h) - tilde23(lo, t - h)) / (2.0 * h);
    const complex_t d4 = (tilde4(hi, t + h) - tilde4(lo, t - h)) / (2.0 * h);
    const auto mid = at(t);
    CHECK(std::abs(d23 - 2.0 * imag_unit * (gl / w) * tilde4(mid, t) * phase(4.0 * ll + gg)) <
          1e-6);
    CHECK(std::abs(d4 - imag_unit * (gl / w) * tilde23(mid, t) * phase(-(4.0 * ll + gg))) < 1e-6);

    // second block: a5, (a6 + a7) and a8
    auto tilde5 = [&](const StageASolution& s, double tt) {
      return s.a[4] * std::exp(imag_unit * 2.0 * ll * tt / w);
    };
    auto tilde67 = [&](const StageASolution& s, double tt) {
      return (s.a[5] + s.a[6]) * std::exp(imag_unit * (2.0 * ll - gg) * tt / w);
    };
    auto tilde8 = [&](const StageASolution& s, double tt) {
      return s.a[7] * std::exp(-imag_unit * 4.0 * (ll + gg) * tt / w);
    };
    const complex_t d5 = (tilde5(hi, t + h) - tilde5(lo, t - h)) / (2.0 * h);
    const complex_t d67 = (tilde67(hi, t + h) - tilde67(lo, t - h)) / (2.0 * h);
    const complex_t d8 = (tilde8(hi, t + h) - tilde8(lo, t - h)) / (2.0 * h);
    CHECK(std::abs(d5 - imag_unit * (gl / w) * tilde67(mid, t) * phase(gg)) < 1e-6);
    CHECK(std::abs(d67 - 2.0 * imag_unit * (gl / w) * tilde5(mid, t) * phase(-gg) -
                   4.0 * imag_unit * (gl / w) * tilde8(mid, t) * phase(6.0 * ll + 3.0 * gg)) <
          1e-6);
    CHECK(std::abs(d8 - 2.0 * imag_unit * (gl / w) * tilde67(mid, t) * phase(-(6.0 * ll + 3.0 * gg))) <
          1e-6);
  }
}

TEST_CASE("stage-B amplitudes at tau = t reduce to the initial product") {
  const auto p = default_params;
  const double t = 1.0;
  const auto sa = stage_a_coefficients(p, t);
  const complex_t a2 = sa.a[1], a10 = sa.a[9];
  const double prob = std::norm(a2) + std::norm(a10);

  for (int c = 1; c <= 4; ++c) {
    const auto sb = stage_b_coefficients(sa, p, c, t);
    CHECK(std::abs(sb.b[1]) == 0.0);
    CHECK(std::abs(sb.b[5]) == 0.0);
  }
  const auto sb1 = stage_b_coefficients(sa, p, 1, t);
  CHECK(std::abs(sb1.b[0] - a2 * a10 / prob) < 1e-14);
  CHECK(std::abs(sb1.b[2] - a2 * a2 / prob) < 1e-14);
  CHECK(std::abs(sb1.b[3] - a10 * a10 / prob) < 1e-14);
}

TEST_CASE("stage-B amplitudes at half period") {
  const auto p = default_params;
  const double t = 1.0;
  const auto sa = stage_a_coefficients(p, t);
  const complex_t a2 = sa.a[1], a10 = sa.a[9];
  const double prob = std::norm(a2) + std::norm(a10);

  // theta = pi  <=>  tau - t = pi * omega_m / (2 lambda1^2)
  const double tau = t + M_PI * p.omega_m / (2.0 * p.lambda1 * p.lambda1);
  const auto sb = stage_b_coefficients(sa, p, 1, tau);
  CHECK(std::abs(sb.b[0]) < 1e-12);
  CHECK(std::abs(sb.b[4]) < 1e-12);
  CHECK(std::abs(sb.b[3] + a10 * a10 / prob) < 1e-12);
}

TEST_CASE("stage-B closed forms match propagation from the case product") {
  const auto p = default_params;
  const auto space = stage_b_space();
  const Propagator prop(h_eff_stage_b(p, space, stage_b_cavity_atoms));
  const auto kets = stage_b_ket_indices(space);

  const double t = 1.0;
  const auto sa = stage_a_coefficients(p, t);
  for (int c = 1; c <= 4; ++c) {
    const auto psi0 = stage_b_initial_state(sa, c, space);
    for (double dtau : {0.0, 0.8, 3.1}) {
      const auto psi = prop.at(psi0, dtau);
      const auto sb = stage_b_coefficients(sa, p, c, t + dtau);
      double norm = 0.0;
      for (int k = 0; k < 6; ++k) {
        CHECK(std::abs(sb.b[k] - psi.amplitude(kets[k])) < 1e-12);
        norm += std::norm(sb.b[k]);
      }
      CHECK(std::abs(norm - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("stage-B argument validation") {
  const auto p = default_params;
  const auto sa = stage_a_coefficients(p, 1.0);
  CHECK_THROWS_AS(stage_b_coefficients(sa, p, 0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(stage_b_coefficients(sa, p, 5, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(stage_b_coefficients(sa, p, 1, 0.5), std::invalid_argument);
}
