#include <cmath>

#include "doctest.h"
#include "wpmec/model.hpp"

using namespace wpmec;

namespace {

ChannelSet simple_channels() {
  // h₁ = (1e-3, 0), h₂ = (0, 2e-3 i); uplink gains 1e-6 and 4e-6.
  return ChannelSet({ComplexVector{{1e-3, 0.0}, {0.0, 0.0}}, ComplexVector{{0.0, 0.0}, {0.0, 2e-3}}},
                    {ComplexVector{{1e-3, 0.0}, {0.0, 0.0}}, ComplexVector{{0.0, 0.0}, {2e-3, 0.0}}});
}

SystemParams two_users() {
  auto p = SystemParams::homogeneous(2, 0.2, 2e4);
  p.antennas = 2;
  return p;
}

}  // namespace

TEST_CASE("beta and its derivative") {
  const double s2 = 1e-9, B = 2e6;
  CHECK(beta(0.0, s2, B) == 0.0);
  CHECK(beta(B, s2, B) == doctest::Approx(s2).epsilon(1e-14));
  CHECK(beta(3.0 * B, s2, B) == doctest::Approx(7.0 * s2).epsilon(1e-14));
  for (double x : {1e3, 1e5, 1e6, 8e6}) {
    const double h = 1e-4 * x;
    const double fd = (beta(x + h, s2, B) - beta(x - h, s2, B)) / (2.0 * h);
    CHECK(beta_prime(x, s2, B) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("offload_energy edge cases and closed form") {
  const double g = 1e-6, pc = 1e-4, s2 = 1e-9, B = 2e6;
  CHECK(offload_energy(0.0, 0.0, g, pc, s2, B) == 0.0);
  CHECK(offload_energy(0.1, 0.0, g, pc, s2, B) == doctest::Approx(pc * 0.1));
  CHECK(offload_energy(0.0, 100.0, g, pc, s2, B) == kInfeasibleEnergy);
  // ℓ/t = B ⇒ β = σ²
  CHECK(offload_energy(0.01, 0.01 * B, g, pc, s2, B) == doctest::Approx(0.01 / g * s2 + pc * 0.01).epsilon(1e-13));
}

TEST_CASE("offloading energy is jointly convex in (t, ℓ)") {
  const double g = 2e-7, pc = 1e-4, s2 = 1e-9, B = 2e6;
  auto e = [&](double t, double l) { return offload_energy(t, l, g, pc, s2, B); };
  for (double t1 : {0.01, 0.05, 0.2})
    for (double l1 : {1e3, 1e4, 3e4})
      for (double t2 : {0.02, 0.1})
        for (double l2 : {5e2, 2e4}) {
          const double mid = e(0.5 * (t1 + t2), 0.5 * (l1 + l2));
          CHECK(mid <= 0.5 * (e(t1, l1) + e(t2, l2)) * (1.0 + 1e-12));
        }
}

TEST_CASE("local computing energy and frequency") {
  UserParams u;
  u.task_bits = 2e4;
  const double T = 0.2;
  const auto lc = local_energy(5e3, u, T);
  const double f = u.cycles_per_bit * 1.5e4 / T;
  CHECK(lc.frequency == doctest::Approx(f));
  CHECK(lc.energy == doctest::Approx(u.capacitance * std::pow(u.cycles_per_bit, 3) * std::pow(1.5e4, 3) / (T * T)));
  CHECK(lc.within_max_frequency);
  CHECK(local_energy(u.task_bits, u, T).energy == 0.0);
}

TEST_CASE("min_offloaded_bits from the CPU cap") {
  UserParams u;
  u.task_bits = 2e4;
  u.max_frequency = 5e7;  // 5e7 · 0.2 / 1e3 = 1e4 bits locally at most
  CHECK(min_offloaded_bits(u, 0.2) == doctest::Approx(1e4));
  u.max_frequency = 1e10;
  CHECK(min_offloaded_bits(u, 0.2) == 0.0);
  CHECK_FALSE(local_energy(0.0, [] {
                UserParams v;
                v.task_bits = 2e4;
                v.max_frequency = 5e7;
                return v;
              }(),
                           0.2)
                  .within_max_frequency);
}

TEST_CASE("make_allocation bookkeeping") {
  const auto p = two_users();
  const auto ch = simple_channels();
  HermitianMatrix q(2);
  q.set(0, 0, 2.0);
  q.set(1, 1, 0.5);
  const auto a = make_allocation(q, {0.05, 0.0}, {1e3, 0.0}, p, ch);
  CHECK(a.objective == doctest::Approx(p.block_length * 2.5 + p.energy_per_bit * 1e3));
  CHECK(a.energy[0].harvested == doctest::Approx(p.block_length * p.eh_efficiency * 2.0 * 1e-6));
  CHECK(a.energy[1].harvested == doctest::Approx(p.block_length * p.eh_efficiency * 0.5 * 4e-6));
  CHECK(a.energy[1].offload == 0.0);
  CHECK(a.energy[0].local == doctest::Approx(local_energy(1e3, p.users[0], p.block_length).energy));
  CHECK_THROWS_AS(make_allocation(q, {0.1}, {0.0, 0.0}, p, ch), InvalidParameters);
}

TEST_CASE("check_feasible reports violations in natural units") {
  const auto p = two_users();
  const auto ch = simple_channels();
  HermitianMatrix q(2);
  q.set(0, 0, 1e3);
  q.set(1, 1, 1e3);
  auto a = make_allocation(q, {0.1, 0.1}, {1e4, 1e4}, p, ch);
  auto rep = check_feasible(a, p, ch);
  CHECK(rep.feasible(1e-12));
  a = make_allocation(q, {0.15, 0.1}, {1e4, 1e4}, p, ch);
  rep = check_feasible(a, p, ch);
  CHECK(rep.time_budget == doctest::Approx(0.05));
  CHECK_FALSE(rep.feasible(1e-9));
  a = make_allocation(HermitianMatrix(2), {0.1, 0.1}, {1e4, 1e4}, p, ch);
  rep = check_feasible(a, p, ch);
  CHECK(rep.energy_harvest[0] > 0.0);
  CHECK_FALSE(rep.feasible(1e-12));
  a = make_allocation(q, {0.0, 0.1}, {1e4, 1e4}, p, ch);
  CHECK(check_feasible(a, p, ch).infinite_energy);
}

TEST_CASE("parameter validation") {
  auto p = SystemParams::homogeneous(2);
  CHECK_NOTHROW(p.validate());
  p.block_length = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameters);
  p = SystemParams::homogeneous(2);
  p.users[1].task_bits = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameters);
  p = SystemParams::homogeneous(2);
  p.eh_efficiency = 1.5;
  CHECK_THROWS_AS(p.validate(), InvalidParameters);
  CHECK_THROWS_AS(SystemParams::homogeneous(0).validate(), InvalidParameters);
  CHECK_THROWS_AS(ChannelSet({ComplexVector(2)}, {ComplexVector(3)}), InvalidParameters);
  const auto ch = simple_channels();
  CHECK_THROWS_AS(ch.validate(SystemParams::homogeneous(2)), InvalidParameters);  // N = 4 ≠ 2
}
