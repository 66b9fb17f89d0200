#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "nufocus/config.hpp"
#include "nufocus/errors.hpp"
#include "nufocus/nuclear.hpp"
#include "nufocus/pipeline.hpp"
#include "dense_oracle.hpp"

using namespace nufocus;

namespace {

FlipRates constant_rates(std::size_t n, double wp, double wm) {
  FlipRates r;
  r.w_plus.assign(n, wp);
  r.w_minus.assign(n, wm);
  return r;
}

FlipRates random_rates(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  FlipRates r;
  for (std::size_t k = 0; k < n; ++k) {
    r.w_plus.push_back(u(rng));
    r.w_minus.push_back(u(rng));
  }
  return r;
}

struct OpticalRates {
  SimulationConfig config;
  PolarizationGrid grid;
  FlipRates rates;
};

OpticalRates optical_rates(double detuning, int helicity = 1, int N = 2000) {
  OpticalRates o;
  o.config.pulse.detuning = detuning;
  o.config.pulse.helicity_sign = helicity;
  o.config.bath.N_nuclei = N;
  o.grid = PolarizationGrid::make(o.config.bath, o.config.dot, o.config.numerics.omega_min);
  std::vector<double> w;
  for (double n : o.grid.values()) w.push_back(precession_frequency(n, o.config.dot, o.config.bath));
  const auto gs = spin_on_grid(o.config, w, 1);
  o.rates = flip_rates(o.grid, w, gs.spin, gs.alpha, o.config.bath, o.config.dot);
  return o;
}

double total(const std::vector<double>& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

}  // namespace

TEST_CASE("polarization grid") {
  const auto g = PolarizationGrid::symmetric(2000, 0.3);
  CHECK(g.size() == 601);
  CHECK(g.n(0) == doctest::Approx(-0.3));
  CHECK(g.n(300) == 0.0);
  CHECK(g.step() == 1e-3);
  for (std::size_t k = 0; k < g.size(); k += 37) {
    CHECK(g.n_up(k) + g.n_down(k) == 2000);
    CHECK(g.n_up(k) == doctest::Approx(1000 * (1 + g.n(k))));
  }
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g.n(k) - g.n(k - 1) == doctest::Approx(2.0 / 2000).epsilon(1e-12));

  BathParams bath;
  bath.N_nuclei = 2000;
  DotParams dot;
  const auto full = PolarizationGrid::make(bath, dot, Numerics{}.omega_min);
  CHECK(full.m_lo == -300);
  CHECK(full.m_hi == 300);

  // At 1 T the low end of the window reaches zero precession and is clipped.
  dot.B_field = 1.0;
  bath.n_window = 0.5;
  const double wmin = Numerics{}.omega_min;
  const auto clipped = PolarizationGrid::make(bath, dot, wmin);
  CHECK(clipped.m_lo > -500);
  CHECK(clipped.m_hi == 500);
  CHECK(precession_frequency(clipped.n(0), dot, bath, 0.0) > wmin);
  const PolarizationGrid below{clipped.N, clipped.m_lo - 1, clipped.m_hi};
  CHECK_FALSE(precession_frequency(below.n(0), dot, bath, 0.0) > wmin);

  dot.B_field = 0.0;
  bath.n_window = 0.001;
  CHECK_THROWS_AS(PolarizationGrid::make(bath, dot, wmin), NonpositiveFrequency);
}

TEST_CASE("flip rate examples") {
  const auto g = PolarizationGrid::symmetric(100, 0.1);
  BathParams bath;
  DotParams dot;
  std::vector<double> w(g.size(), zeeman_frequency(dot));
  std::vector<BlochState> spin(g.size());
  std::vector<ExcitationAsymmetry> alpha(g.size(), ExcitationAsymmetry{1.3, 0.7});

  SUBCASE("no excitation leaves only depolarization") {
    const auto r = flip_rates(g, w, spin, alpha, bath, dot);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(r.w_plus[k] == bath.gamma_depol);
      CHECK(r.w_minus[k] == bath.gamma_depol);
    }
  }
  SUBCASE("symmetric optical pumping gives equal rates") {
    for (auto& s : spin) s.trion_yield = 0.3;
    std::fill(alpha.begin(), alpha.end(), ExcitationAsymmetry{1.0, 1.0});
    const auto r = flip_rates(g, w, spin, alpha, bath, dot);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(r.w_plus[k] == r.w_minus[k]);
      CHECK(r.w_plus[k] > bath.gamma_depol);
    }
  }
  SUBCASE("general point") {
    spin[3].s = Vec3(0.2, 0, 0);
    spin[3].trion_yield = 0.1;
    const auto r = flip_rates(g, w, spin, alpha, bath, dot);
    const double pre = flip_prefactor(w[3], bath, 100);
    CHECK(r.w_plus[3] == doctest::Approx(pre * 1.3 * 0.1 / dot.T_R * 1.2 + bath.gamma_depol).epsilon(1e-14));
    CHECK(r.w_minus[3] == doctest::Approx(pre * 0.7 * 0.1 / dot.T_R * 0.8 + bath.gamma_depol).epsilon(1e-14));
    CHECK(r.s_x[3] == 0.2);
    CHECK(r.alpha_plus[3] == 1.3);
    CHECK(r.omega[3] == w[3]);
  }
  SUBCASE("misaligned tables") {
    spin.pop_back();
    CHECK_THROWS_AS(flip_rates(g, w, spin, alpha, bath, dot), MisalignedTables);
  }
}

TEST_CASE("hyperfine prefactor") {
  BathParams bath;
  // 49.7 ueV precession energy, N = 2e4.
  CHECK(flip_prefactor(units::energy_to_angular(49.7e-3), bath, 20000) == doctest::Approx(1.012108871e-8).epsilon(1e-9));
  CHECK(flip_prefactor(zeeman_frequency(DotParams{}), bath, 20000) ==
        doctest::Approx(1.0088550368688449e-8).epsilon(1e-12));
}

TEST_CASE("mean drift") {
  CHECK(mean_drift(0.1, 2.0, 2.0) == doctest::Approx(-0.4));
  CHECK(mean_drift(0.0, 3.0, 1.0) == 2.0);
  const auto g = PolarizationGrid::symmetric(10, 1.0);
  const auto d = mean_drift(g, constant_rates(g.size(), 1.0, 1.0));
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(d[k] == doctest::Approx(-2 * g.n(k)));
}

TEST_CASE("detailed balance matches the dense null space") {
  std::mt19937_64 rng(17);
  const auto g = PolarizationGrid::symmetric(50, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = random_rates(g.size(), rng);
    const auto p = steady_distribution(g, r).p;
    const auto ref = oracle::dense_stationary(g, r);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(p[k] / ref[k] - 1) < 1e-8);
    CHECK(generator_residual(chain_rates(g, r), p) < 1e-12);
    CHECK(total(p) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("uniform rates give the binomial") {
  const auto g = PolarizationGrid::symmetric(2000, 0.3);
  const auto binom = binomial_distribution(g);
  for (double w : {2e-2, 1.0, 3e5}) {
    const auto p = steady_distribution(g, constant_rates(g.size(), w, w)).p;
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k] == doctest::Approx(binom.p[k]).epsilon(1e-9));
    const auto m = moments(g, p);
    CHECK(std::abs(m.mean) < 1e-12);
    CHECK(m.variance == doctest::Approx(1.0 / 2000).epsilon(0.02));
  }
  CHECK_THROWS_AS(steady_distribution(g, constant_rates(g.size(), 0.0, 1.0)), ZeroRate);
}

TEST_CASE("evolution") {
  std::mt19937_64 rng(23);
  const auto g = PolarizationGrid::symmetric(200, 0.5);
  const auto r = random_rates(g.size(), rng);
  const auto c = chain_rates(g, r);
  const double dt = 0.4 * max_stable_dt(c);

  SUBCASE("stationary distribution stays put") {
    const auto st = steady_distribution(g, r);
    const auto tr = evolve_distribution(g, r, st, dt, 1000, 1000);
    REQUIRE(tr.p.size() == 2);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(tr.p.back().p[k] - st.p[k]) < 1e-8);
  }
  SUBCASE("probability is conserved at every step") {
    NuclearDistribution p0{std::vector<double>(g.size())};
    std::uniform_real_distribution<double> u(0, 1);
    for (double& x : p0.p) x = u(rng);
    const double s = total(p0.p);
    for (double& x : p0.p) x /= s;
    const auto tr = evolve_distribution(g, r, p0, dt, 300);
    CHECK(tr.p.size() == 301);
    for (const auto& p : tr.p) {
      CHECK(std::abs(total(p.p) - 1.0) < 1e-12);
      for (double x : p.p) CHECK(x >= 0.0);
    }
  }
  SUBCASE("first moment follows the drift equation") {
    NuclearDistribution p0{std::vector<double>(g.size(), 0.0)};
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t k = 1; k + 1 < g.size(); ++k) p0.p[k] = u(rng);
    const double s = total(p0.p);
    for (double& x : p0.p) x /= s;
    const auto tr = evolve_distribution(g, r, p0, dt, 1);
    const double rate = (moments(g, tr.p[1].p).mean - moments(g, p0.p).mean) / dt;
    const auto d = mean_drift(g, r);
    double expect = 0;
    for (std::size_t k = 0; k < g.size(); ++k) expect += p0.p[k] * d[k];
    CHECK(rate == doctest::Approx(expect).epsilon(1e-6));
  }
  SUBCASE("unstable step reports the admissible dt") {
    try {
      evolve_distribution(g, r, binomial_distribution(g), 2 * max_stable_dt(c), 1);
      FAIL("expected UnstableStep");
    } catch (const UnstableStep& e) {
      CHECK(e.max_dt() == doctest::Approx(max_stable_dt(c)));
      CHECK(e.tag() == "UnstableStep");
    }
  }
}

TEST_CASE("delta at n = 0 relaxes monotonically toward the stationary mean") {
  const auto o = optical_rates(0.4);
  const auto c = chain_rates(o.grid, o.rates);
  const double dt = 0.4 * max_stable_dt(c);
  const auto p0 = delta_distribution(o.grid, 0.0);
  const auto tr = evolve_distribution(o.grid, o.rates, p0, dt, 200000, 2000);
  const double target = moments(o.grid, steady_distribution(o.grid, o.rates).p).mean;
  REQUIRE(target < 0);

  double prev = 0.0;
  for (std::size_t i = 1; i < tr.p.size(); ++i) {
    const double m = moments(o.grid, tr.p[i].p).mean;
    CHECK(m < prev);
    CHECK(m > target - 1e-6);
    prev = m;
  }
  CHECK(prev == doctest::Approx(target).epsilon(0.01));

  // Early times: nbar(t) from the drift at n = 0.
  const auto early = evolve_distribution(o.grid, o.rates, p0, dt, 10);
  const auto k0 = static_cast<std::size_t>(-o.grid.m_lo);
  const double slope = mean_drift(0.0, o.rates.w_plus[k0], o.rates.w_minus[k0]);
  CHECK(moments(o.grid, early.p.back().p).mean == doctest::Approx(slope * 10 * dt).epsilon(1e-3));
}

TEST_CASE("moments") {
  const auto g = PolarizationGrid::symmetric(100, 0.2);
  const auto d = delta_distribution(g, 0.06);
  const auto m = moments(g, d.p);
  CHECK(m.mean == doctest::Approx(0.06));
  CHECK(m.variance == 0.0);
  std::vector<double> sym(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) sym[k] = 1.0 + std::cos(5 * g.n(k));
  CHECK(std::abs(moments(g, sym).mean) < 1e-15);
  CHECK(delta_distribution(g, 5.0).p.back() == 1.0);
}

TEST_CASE("flipping helicity leaves the flip rates unchanged") {
  for (double delta : {0.4, -0.25}) {
    const auto a = optical_rates(delta, +1, 400);
    const auto b = optical_rates(delta, -1, 400);
    REQUIRE(a.rates.size() == b.rates.size());
    for (std::size_t k = 0; k < a.rates.size(); ++k) {
      CHECK(b.rates.w_plus[k] == doctest::Approx(a.rates.w_plus[k]).epsilon(1e-12));
      CHECK(b.rates.w_minus[k] == doctest::Approx(a.rates.w_minus[k]).epsilon(1e-12));
    }
  }
}
