#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "infrasteer/metrics.hpp"
#include "infrasteer/rng.hpp"

using namespace infrasteer;

namespace {

SampleSeries series(const std::vector<std::pair<double, double>>& pts) {
  SampleSeries s;
  for (const auto& [t, v] : pts) {
    s.push(t, v);
  }
  return s;
}

} // namespace

TEST_CASE("correction_metric examples") {
  CHECK(correction_metric(100, 100) == 0.0);
  CHECK(correction_metric(38, 161) == 61.5);
  CHECK(correction_metric(125, 75) == -25.0);
}

TEST_CASE("summarize examples") {
  const std::vector<double> v{3, -4};
  const RunSummary s = summarize(v);
  CHECK(s.mean_abs == 3.5);
  CHECK(s.std_abs == 0.5);
  CHECK(s.count == 2);
  CHECK(s.sem == doctest::Approx(0.5 / std::sqrt(2.0)));
  CHECK_THROWS_AS(summarize(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("summaries scale with the data") {
  Rng rng(4);
  for (int n = 0; n < 500; ++n) {
    std::vector<double> v(1 + rng.uniform_int(0, 40));
    for (auto& x : v) {
      x = rng.uniform(-10, 10);
    }
    const double a = rng.uniform(-5, 5);
    std::vector<double> w;
    for (double x : v) {
      w.push_back(a * x);
    }
    const RunSummary s = summarize(v);
    const RunSummary t = summarize(w);
    CHECK(t.mean_abs == doctest::Approx(std::abs(a) * s.mean_abs));
    CHECK(t.std_abs == doctest::Approx(std::abs(a) * s.std_abs).epsilon(1e-9).scale(1.0));
    CHECK(s.std_abs >= 0.0);
  }
}

TEST_CASE("sample series keeps time strictly increasing") {
  SampleSeries s;
  s.push(0.0, 1.0);
  s.push(0.0, 2.0);
  CHECK(s.size() == 1);
  CHECK(s.values()[0] == 2.0);
  CHECK_THROWS_AS(s.push(-1.0, 0.0), std::invalid_argument);
}

TEST_CASE("post_outage_window examples") {
  const SampleSeries s =
      series({{0.0, 1}, {0.1, 2}, {0.2, 3}, {0.3, 4}, {0.4, 5}, {0.5, 6}, {0.6, 7}});
  const std::vector<double> ends{0.1};
  const SampleSeries w = post_outage_window(s, ends, 3);
  CHECK(w.values() == std::vector<double>{3, 4, 5});

  // Overlapping windows share no samples.
  const std::vector<double> close{0.1, 0.2};
  CHECK(post_outage_window(s, close, 3).values() == std::vector<double>{3, 4, 5, 6, 7});

  const std::vector<double> late{0.55};
  CHECK(post_outage_window(s, late, 5).values() == std::vector<double>{7});
  const std::vector<double> none{};
  CHECK(post_outage_window(s, none, 5).empty());
}

TEST_CASE("detect_crash examples") {
  SampleSeries ok;
  SampleSeries spike;
  SampleSeries off;
  for (int k = 0; k <= 3000; ++k) {
    const double t = k * 0.005;
    ok.push(t, 0.1);
    spike.push(t, (k >= 1000 && k < 1050) ? 0.4 : 0.0);
    off.push(t, t >= 10.0 ? 0.3 : 0.0);
  }
  CHECK_FALSE(detect_crash(ok, 0.25, 0.5));
  CHECK_FALSE(detect_crash(spike, 0.25, 0.5));
  const auto crash = detect_crash(off, 0.25, 0.5);
  REQUIRE(crash);
  CHECK(*crash == doctest::Approx(10.5));
}

TEST_CASE("a larger deviation never crashes later") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    SampleSeries a;
    SampleSeries b;
    for (int k = 0; k < 600; ++k) {
      const double v = rng.uniform(-0.4, 0.4);
      a.push(k * 0.01, v);
      b.push(k * 0.01, v * 1.5);
    }
    const auto ca = detect_crash(a, 0.25, 0.1);
    const auto cb = detect_crash(b, 0.25, 0.1);
    if (ca) {
      REQUIRE(cb);
      CHECK(*cb <= *ca);
    }
  }
}
