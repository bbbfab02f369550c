#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "dmawpt/beamforming.hpp"
#include "dmawpt/materials.hpp"
#include "oracles.hpp"

using namespace dmawpt;

namespace {

Eigen::VectorXcd randvec(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (auto& x : v) x = cplx(g(rng), g(rng)) * scale;
  return v;
}

ChannelVector make_channel(const Eigen::VectorXcd& c, int k = 0) {
  ChannelVector ch;
  ch.user_index = k;
  ch.coefficients = c;
  return ch;
}

PropagationMatrix unit_h(int n) {
  PropagationMatrix h;
  h.entries = Eigen::VectorXcd::Ones(n);
  h.inter_element_spacing_m = 0.006;
  return h;
}

Scenario desk_scene(int users, std::uint64_t seed, double L = 0.1, double f = 10e9) {
  const double lambda = oracle::c0 / f;
  Scenario sc;
  sc.geometry = build_array_geometry(L, lambda, 3.0);
  const auto m = MaterialDatabase::builtin().get(kDefaultMaterial);
  sc.propagation = propagation_matrix(attenuation_and_beta(m, f), sc.geometry);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Vec3> pos;
  for (int k = 0; k < users; ++k) pos.emplace_back(u(rng), u(rng), 0.0);
  sc.channels = channel_set(sc.geometry.element_positions, pos, lambda, 2.0);
  sc.thresholds.assign(users, 1e-4);
  return sc;
}

}  // namespace

TEST_CASE("scalar power examples") {
  Eigen::VectorXd phase(1);
  phase << kPi / 2.0;
  const auto dma = build_q_matrix(phase, 1, 1);
  const auto h = unit_h(1);
  Eigen::VectorXcd w(1);
  w << 2.0;
  auto p = PrecoderSet::from_factors({w}, 1, 1);
  CHECK(transmit_power(p, h, dma) == doctest::Approx(4.0));
  CHECK(transmit_power(PrecoderSet::from_factors({}, 1, 1), h, dma) == 0.0);
  w << 1.0;
  p = PrecoderSet::from_factors({w}, 1, 1);
  CHECK(received_power(make_channel(Eigen::VectorXcd::Ones(1)), h, dma, p) == doctest::Approx(1.0));
  CHECK(received_power(make_channel(Eigen::VectorXcd::Zero(1)), h, dma, p) == 0.0);
}

TEST_CASE("power identities agree on random instances") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const int nv = 1 + t % 4;
    const int nh = 1 + (t / 4) % 6;
    const int n = nv * nh;
    const auto dma = build_q_matrix(random_phases(n, 1000 + t), nv, nh);
    PropagationMatrix h;
    h.entries = randvec(n, rng);
    const int m = 1 + t % nv;
    std::vector<Eigen::VectorXcd> ws;
    for (int i = 0; i < m; ++i) ws.push_back(randvec(nv, rng));
    const auto p = PrecoderSet::from_factors(ws, m, nv);
    const auto ch = make_channel(randvec(n, rng));

    // direct sums written out elementwise
    double rx = 0.0, tx = 0.0;
    for (const auto& w : ws) {
      cplx acc = 0.0;
      for (int e = 0; e < n; ++e) {
        const cplx x = h.entries[e] * dma.weights[e] * w[e / nh];
        acc += std::conj(ch.coefficients[e]) * x;
        tx += std::norm(x);
      }
      rx += std::norm(acc);
    }
    CHECK(received_power(ch, h, dma, p) == doctest::Approx(rx).epsilon(1e-9));
    CHECK(received_power_gram(ch, h, dma, p) == doctest::Approx(rx).epsilon(1e-9));
    CHECK(received_power_vectorized(ch, h, dma, p) == doctest::Approx(rx).epsilon(1e-9));
    CHECK(transmit_power(p, h, dma) == doctest::Approx(tx).epsilon(1e-9));
    CHECK(transmit_power_gram(p, h, dma) == doctest::Approx(tx).epsilon(1e-9));

    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(nv, nv);
    for (const auto& w : ws) gram += w * w.adjoint();
    CHECK((p.gram - gram).norm() <= 1e-9 * gram.norm());
  }
}

TEST_CASE("dimension checks") {
  const auto dma = build_q_matrix(random_phases(6, 1), 2, 3);
  const auto p = PrecoderSet::from_factors({}, 1, 2);
  CHECK_THROWS_AS(transmit_power(p, unit_h(5), dma), DimensionMismatch);
  CHECK_THROWS_AS(received_power(make_channel(Eigen::VectorXcd::Ones(4)), unit_h(6), dma, p),
                  DimensionMismatch);
  const auto bad = PrecoderSet::from_factors({Eigen::VectorXcd::Ones(3)}, 1, 3);
  CHECK_THROWS_AS(transmit_power(bad, unit_h(6), dma), DimensionMismatch);
}

TEST_CASE("precoder SDP in the fully digital limit is MRT") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const int n = 2 + t;
    Eigen::VectorXd phases = Eigen::VectorXd::Constant(n, kPi / 2.0);
    const auto dma = build_q_matrix(phases, n, 1);  // HQ = jI
    const auto gam = randvec(n, rng, 1e-3);
    const auto res = solve_precoder_sdp({make_channel(gam)}, unit_h(n), dma, {1e-4});
    CHECK(res.transmit_power_w == doctest::Approx(1e-4 / gam.squaredNorm()).epsilon(1e-5));
    CHECK(res.received_powers_w[0] >= 1e-4 * (1.0 - 1e-9));
    CHECK(res.precoders.num_streams == 1);
  }
}

TEST_CASE("zero thresholds give zero precoders") {
  const auto dma = build_q_matrix(random_phases(6, 3), 2, 3);
  std::mt19937_64 rng(3);
  const auto res = solve_precoder_sdp({make_channel(randvec(6, rng)), make_channel(randvec(6, rng))},
                                      unit_h(6), dma, {0.0, 0.0});
  CHECK(res.transmit_power_w == 0.0);
  CHECK(res.precoders.gram.norm() == 0.0);
}

TEST_CASE("doubling thresholds doubles the optimum") {
  std::mt19937_64 rng(4);
  const auto dma = build_q_matrix(random_phases(12, 4), 3, 4);
  PropagationMatrix h;
  h.entries = randvec(12, rng);
  const std::vector<ChannelVector> ch{make_channel(randvec(12, rng)), make_channel(randvec(12, rng))};
  SdpOptions o;
  o.tol = 1e-9;
  const auto a = solve_precoder_sdp(ch, h, dma, {1.0, 2.0}, o);
  const auto b = solve_precoder_sdp(ch, h, dma, {2.0, 4.0}, o);
  CHECK(b.transmit_power_w == doctest::Approx(2.0 * a.transmit_power_w).epsilon(1e-6));
  for (int k = 0; k < 2; ++k) CHECK(a.received_powers_w[k] >= (1.0 + k) * (1 - 1e-9));
  CHECK(a.precoders.precoders.size() == 2);
}

TEST_CASE("unreachable user is infeasible") {
  const auto dma = build_q_matrix(random_phases(4, 5), 2, 2);
  CHECK_THROWS_AS(solve_precoder_sdp({make_channel(Eigen::VectorXcd::Zero(4))}, unit_h(4), dma, {1e-4}),
                  InfeasibleProblem);
  PropagationMatrix dead;
  dead.entries = Eigen::VectorXcd::Zero(4);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(solve_precoder_sdp({make_channel(randvec(4, rng))}, dead, dma, {1e-4}),
                  InfeasibleProblem);
}

TEST_CASE("generic min-power design matches the whitened closed form for one user") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const int n = 3 + t % 3;
    Eigen::MatrixXcd G(n + 2, n);
    for (int i = 0; i < G.size(); ++i) G(i) = randvec(1, rng)[0];
    const Eigen::MatrixXcd F = G.adjoint() * G;
    const auto b = randvec(n, rng);
    const auto res = solve_min_power_precoders(F, {b}, {2.0}, 1);
    const double expect = 2.0 / b.dot(F.ldlt().solve(b)).real();
    CHECK(res.transmit_power_w == doctest::Approx(expect).epsilon(1e-5));
  }
}

TEST_CASE("weight SDP scalar case") {
  Eigen::VectorXd ph(1);
  ph << 0.3;
  PropagationMatrix h;
  h.entries = Eigen::VectorXcd::Constant(1, cplx(0.8, -0.2));
  const auto ch = make_channel(Eigen::VectorXcd::Constant(1, cplx(0.5, 0.5)));
  Eigen::VectorXcd w(1);
  w << cplx(1.5, 0.0);
  const auto p = PrecoderSet::from_factors({w}, 1, 1);
  const auto z = weight_domain_vectors(ch, h, p, 1, 1);
  const auto r = solve_weight_sdp({ch}, h, p, 1, 1);
  REQUIRE(r.status == SdpStatus::Optimal);
  CHECK(r.min_power == doctest::Approx(z[0].squaredNorm()).epsilon(1e-5));
  CHECK(r.trace == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(std::abs(r.unconstrained[0]) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("weight vectors reproduce the received power") {
  std::mt19937_64 rng(8);
  const int nv = 3, nh = 4, n = 12;
  const auto dma = build_q_matrix(random_phases(n, 8), nv, nh);
  PropagationMatrix h;
  h.entries = randvec(n, rng);
  const auto ch = make_channel(randvec(n, rng));
  const auto p = PrecoderSet::from_factors({randvec(nv, rng), randvec(nv, rng)}, 2, nv);
  const auto z = weight_domain_vectors(ch, h, p, nv, nh);
  double viaz = 0.0;
  for (const auto& v : z) viaz += std::norm(v.dot(dma.weights));
  CHECK(viaz == doctest::Approx(received_power(ch, h, dma, p)).epsilon(1e-12));
}

TEST_CASE("weight SDP single user equals N times the top eigenvalue") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 5; ++t) {
    const int nv = 2, nh = 3, n = 6;
    PropagationMatrix h;
    h.entries = randvec(n, rng);
    const auto ch = make_channel(randvec(n, rng));
    const auto p = PrecoderSet::from_factors({randvec(nv, rng), randvec(nv, rng)}, 2, nv);
    const auto z = weight_domain_vectors(ch, h, p, nv, nh);
    Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& v : z) Z += v * v.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Z);
    const auto r = solve_weight_sdp({ch}, h, p, nv, nh);
    CHECK(r.min_power == doctest::Approx(n * es.eigenvalues().maxCoeff()).epsilon(1e-5));
    CHECK(r.trace <= n * (1.0 + 1e-5));
  }
}

TEST_CASE("weight SDP two users respects the trace cap") {
  std::mt19937_64 rng(10);
  const int nv = 2, nh = 4, n = 8;
  PropagationMatrix h;
  h.entries = randvec(n, rng);
  const std::vector<ChannelVector> ch{make_channel(randvec(n, rng)), make_channel(randvec(n, rng), 1)};
  const auto p = PrecoderSet::from_factors({randvec(nv, rng), randvec(nv, rng)}, 2, nv);
  const auto r = solve_weight_sdp(ch, h, p, nv, nh);
  REQUIRE(r.status == SdpStatus::Optimal);
  CHECK(r.trace <= n * (1.0 + 1e-5));
  // Q̃ = I is feasible, so the max-min value is at least min_k Tr(Z̃_k).
  double floor_value = 1e300;
  for (const auto& c : ch) {
    double tr = 0.0;
    for (const auto& v : weight_domain_vectors(c, h, p, nv, nh)) tr += v.squaredNorm();
    floor_value = std::min(floor_value, tr);
  }
  CHECK(r.min_power >= floor_value * (1.0 - 1e-5));
}

TEST_CASE("weight SDP with silent channels falls back to the first element") {
  const auto p = PrecoderSet::from_factors({Eigen::VectorXcd::Ones(2)}, 1, 2);
  const auto r = solve_weight_sdp({make_channel(Eigen::VectorXcd::Zero(6))}, unit_h(6), p, 2, 3);
  CHECK(r.min_power == 0.0);
  CHECK(r.unconstrained == Eigen::VectorXcd::Unit(6, 0));
}

TEST_CASE("alternating optimisation contract") {
  const auto sc = desk_scene(2, 77);
  AlternatingOptions o;
  o.seed = 5;
  const auto a = alternating_optimize(sc, o);
  const auto b = alternating_optimize(sc, o);
  CHECK(a.feasible);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].transmit_power_w == b.trace[i].transmit_power_w);
    CHECK(a.trace[i].best_transmit_power_w == b.trace[i].best_transmit_power_w);
    if (i > 0) CHECK(a.trace[i].best_transmit_power_w <= a.trace[i - 1].best_transmit_power_w);
  }
  CHECK(a.transmit_power_w == doctest::Approx(a.trace.back().best_transmit_power_w).epsilon(1e-12));
  for (int k = 0; k < 2; ++k) {
    CHECK(received_power(sc.channels[k], sc.propagation, a.dma, a.precoders) >=
          sc.thresholds[k] * (1.0 - 1e-6));
  }
  for (Eigen::Index e = 0; e < a.dma.weights.size(); ++e) {
    CHECK(a.dma.weights[e] == lorentzian_weight(a.dma.phases[e]));
  }
  CHECK(a.precoders.num_streams == sc.num_streams());
  CHECK(a.trace.size() == static_cast<std::size_t>(a.iterations_used + 1));
}

TEST_CASE("no stall budget returns the initial solution") {
  const auto sc = desk_scene(1, 3, 0.05);
  AlternatingOptions o;
  o.seed = 11;
  o.stall_limit = 0;
  const auto a = alternating_optimize(sc, o);
  CHECK(a.iterations_used == 0);
  const auto init = solve_precoder_sdp(sc.channels, sc.propagation,
                                       build_q_matrix(random_phases(24, 11), 3, 8), sc.thresholds);
  CHECK(a.transmit_power_w == doctest::Approx(init.transmit_power_w).epsilon(1e-12));
}

TEST_CASE("tiny array never ends worse than it started") {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const double lambda = oracle::c0 / 10e9;
    auto sc = desk_scene(1, s, lambda / 2.0);
    REQUIRE(sc.geometry.total_elements == 2);
    AlternatingOptions o;
    o.seed = s;
    const auto r = alternating_optimize(sc, o);
    CHECK(r.transmit_power_w <= r.trace.front().transmit_power_w);
  }
}

TEST_CASE("scene nobody can hear is infeasible") {
  auto sc = desk_scene(1, 1, 0.05);
  sc.channels[0].coefficients.setZero();
  AlternatingOptions o;
  o.init_retries = 2;
  CHECK_THROWS_AS(alternating_optimize(sc, o), InfeasibleProblem);
}
