#include <cmath>
#include <functional>

#include "doctest.h"
#include "support.hpp"
#include "wpmec/benchmarks.hpp"
#include "wpmec/harness.hpp"

using namespace wpmec;

namespace {

double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi, c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 300; ++it) {
    if (fc < fd) b = d, d = c, fd = fc, c = b - r * (b - a), fc = f(c);
    else a = c, c = d, fc = fd, d = a + r * (b - a), fd = f(d);
  }
  return std::min({f(0.5 * (a + b)), f(lo), f(hi)});
}

}  // namespace

TEST_CASE("scheme ids") {
  for (auto id : kSchemeIds) CHECK(is_scheme_id(id));
  CHECK_FALSE(is_scheme_id("greedy"));
  const auto p = SystemParams::homogeneous(1);
  const auto ch = gen_channels(1, p);
  CHECK_THROWS_AS(run_scheme("greedy", p, ch), std::invalid_argument);
}

TEST_CASE("no tasks cost nothing under every scheme") {
  const auto p = SystemParams::homogeneous(3, 0.1, 0.0);
  const auto ch = gen_channels(2, p);
  for (auto id : kSchemeIds) {
    const auto r = run_scheme(id, p, ch);
    CAPTURE(id);
    CHECK(r.feasible);
    CHECK(r.objective == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("local_only single user closed form") {
  const auto p = SystemParams::homogeneous(1, 0.1, 2e4);
  const auto ch = gen_channels(3, p);
  const auto& u = p.users[0];
  const double c = u.capacitance * std::pow(u.cycles_per_bit * u.task_bits, 3) / (p.block_length * p.block_length);
  const auto r = local_only(p, ch);
  CHECK(testing::rel(r.objective, c / (p.eh_efficiency * ch.downlink_gain(0))) <= 1e-6);
  CHECK(r.allocation.offloaded[0] == 0.0);
  CHECK(r.allocation.time[0] == 0.0);
}

TEST_CASE("local_only is infeasible when the CPU cap binds") {
  auto p = SystemParams::homogeneous(2, 0.1, 2e4);
  p.users[1].max_frequency = 1e8;
  const auto ch = gen_channels(3, p);
  const auto r = local_only(p, ch);
  CHECK_FALSE(r.feasible);
  CHECK(r.status == SolveStatus::infeasible);
}

TEST_CASE("offload_only single user matches a golden-section search over t") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (double T : {0.02, 0.1, 0.5}) {
      const auto p = SystemParams::homogeneous(1, T, 2e4);
      const auto ch = gen_channels(seed, p);
      const auto& u = p.users[0];
      const double g = ch.uplink_gain(0), w = p.eh_efficiency * ch.downlink_gain(0);
      auto cost = [&](double t) {
        return offload_energy(t, u.task_bits, g, u.circuit_power, p.noise_power, p.bandwidth) / w +
               p.energy_per_bit * u.task_bits;
      };
      const double ref = golden_min(cost, 1e-9, T);
      const auto r = offload_only(p, ch);
      CAPTURE(T);
      CHECK(r.feasible);
      CHECK(testing::rel(r.objective, ref) <= 1e-4);
      CHECK(r.allocation.offloaded[0] == u.task_bits);
    }
  }
}

TEST_CASE("isotropic equals joint with one antenna and one user") {
  auto p = SystemParams::homogeneous(1, 0.1, 2e4);
  p.antennas = 1;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto ch = gen_channels(seed, p);
    CHECK(testing::rel(isotropic_wpt(p, ch).objective, joint_design(p, ch).objective) <= 1e-5);
  }
}

TEST_CASE("equal_time_bits matches a golden-section search over ℓ") {
  const auto p = SystemParams::homogeneous(1, 0.1, 2e4);
  const auto& u = p.users[0];
  for (double lambda : {1e3, 1e5, 1e6}) {
    for (double slot : {0.01, 0.05}) {
      const double g = 2e-5;
      auto f = [&](double l) { return p.energy_per_bit * l + lambda * required_energy(u, p, g, slot, l); };
      const double l = equal_time_bits(lambda, slot, u, g, p);
      CHECK(f(l) <= golden_min(f, 0.0, u.task_bits) + 1e-10 * (1.0 + std::abs(f(l))));
    }
  }
}

TEST_CASE("schemes respect their restrictions and never beat joint") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    for (double T : {0.05, 0.3}) {
      const auto p = SystemParams::homogeneous(4, T, 2e4);
      const auto ch = gen_channels(seed, p);
      const auto joint = joint_design(p, ch);
      for (auto id : kSchemeIds) {
        const auto r = run_scheme(id, p, ch);
        CAPTURE(id);
        CAPTURE(seed);
        CAPTURE(T);
        REQUIRE(r.feasible);
        CHECK(r.objective >= joint.objective - 1e-6 * (1.0 + joint.objective));
        CHECK(check_feasible(r.allocation, p, ch).feasible(1e-10));
        const auto& a = r.allocation;
        for (std::size_t i = 0; i < 4; ++i) {
          if (id == "local_only") CHECK(a.offloaded[i] == 0.0);
          if (id == "offload_only") CHECK(a.offloaded[i] == p.users[i].task_bits);
          if (id == "equal_time") CHECK((a.time[i] == doctest::Approx(T / 4) || a.time[i] == 0.0));
        }
        if (id == "isotropic") {
          const double d = a.covariance(0, 0).real();
          for (std::size_t m = 0; m < p.antennas; ++m)
            for (std::size_t n = 0; n < p.antennas; ++n)
              CHECK(std::abs(a.covariance(m, n) - (m == n ? d : 0.0)) <= 1e-12 * d);
        }
      }
    }
  }
}

TEST_CASE("separate design ignores the server cost per bit") {
  // Raising α cannot change what the users choose, only the reported objective.
  auto p = SystemParams::homogeneous(2, 0.1, 2e4);
  const auto ch = gen_channels(5, p);
  const auto a = separate_design(p, ch);
  p.energy_per_bit *= 10.0;
  const auto b = separate_design(p, ch);
  for (std::size_t i = 0; i < 2; ++i) CHECK(a.allocation.offloaded[i] == doctest::Approx(b.allocation.offloaded[i]));
  double bits = 0.0;
  for (double l : a.allocation.offloaded) bits += l;
  CHECK(b.objective - a.objective == doctest::Approx(9.0 * 1e-4 * bits).epsilon(1e-6));
}
