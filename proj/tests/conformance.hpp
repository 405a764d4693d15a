#pragma once

// Randomized conformance checks shared by the unit tests and the
// acceptance binary. Each returns the number of mismatches and a short
// description of the first one.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "infrasteer/control.hpp"
#include "infrasteer/fusion.hpp"
#include "infrasteer/perception.hpp"
#include "infrasteer/rng.hpp"
#include "infrasteer/wire.hpp"
#include "oracles.hpp"

namespace conformance {

struct Outcome {
  long checked = 0;
  long mismatches = 0;
  std::string first;

  bool ok() const { return mismatches == 0 && checked > 0; }

  void expect(bool good, const std::string& what) {
    ++checked;
    if (!good) {
      if (mismatches == 0) {
        first = what;
      }
      ++mismatches;
    }
  }
};

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

inline double oracle_robot_angle_normalized(double gx, double gy, double ox, double oy) {
  const double a = oracle::robot_angle(gx, gy, ox, oy);
  return a == 360.0 ? 0.0 : a;
}

inline double circular_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

// Four perception functions against the transliterated branches, on an
// integer grid (exact) and on real-valued inputs (1e-9).
inline Outcome perception(std::uint64_t seed, int samples) {
  using namespace infrasteer;
  Outcome out;
  Rng rng(seed);
  const auto label = [](const char* fn, bool grid, std::vector<double> args) {
    std::string s = std::string(fn) + (grid ? " grid(" : " real(");
    for (std::size_t i = 0; i < args.size(); ++i) {
      s += (i ? "," : "") + fmt(args[i]);
    }
    return s + ")";
  };

  for (int n = 0; n < samples; ++n) {
    const bool grid = n % 2 == 0;
    const auto draw = [&](double lo, double hi) {
      return grid ? static_cast<double>(rng.uniform_int(static_cast<int>(lo), static_cast<int>(hi)))
                  : rng.uniform(lo, hi);
    };
    const double tol = grid ? 0.0 : 1e-9;

    // compute_robot_angle
    double gx = draw(0, 1280), gy = draw(0, 720), ox = draw(0, 1280), oy = draw(0, 720);
    if (n % 7 == 0) {
      ox = gx;  // exercise the vertical branch
    }
    if (gx == ox && gy == oy) {
      oy = gy + 1.0;
    }
    {
      const double got = compute_robot_angle({gx, gy}, {ox, oy});
      const double want = oracle_robot_angle_normalized(gx, gy, ox, oy);
      out.expect(got >= 0.0 && got < 360.0 && circular_gap(got, want) <= tol,
                 label("compute_robot_angle", grid, {gx, gy, ox, oy}) + " = " + fmt(got) +
                     ", oracle " + fmt(want));
    }

    // disambiguate_line_angle
    {
      double w = draw(0, 120), h = draw(0, 120);
      if (n % 5 == 0) {
        h = w;
      }
      const double raw = draw(-90, 0);
      const double ang = draw(0, 359);
      const double got = disambiguate_line_angle(w, h, raw, ang);
      const double want = oracle::line_angle(w, h, raw, ang);
      out.expect(std::abs(got - want) <= tol,
                 label("disambiguate_line_angle", grid, {w, h, raw, ang}) + " = " + fmt(got) +
                     ", oracle " + fmt(want));
    }

    // direction_fix
    {
      const double line = draw(0, 360);
      const double ang = draw(0, 360);
      const double got = direction_fix(line, ang);
      const double want = oracle::d_fix(line, ang);
      out.expect(std::abs(got - want) <= tol,
                 label("direction_fix", grid, {line, ang}) + " = " + fmt(got) + ", oracle " +
                     fmt(want));
    }

    // position_fix: the crop is centered on the front, so in crop
    // coordinates the front is (c, c).
    {
      const double c = 75.0;
      double xm = draw(0, 150), ym = draw(0, 150);
      if (n % 11 == 0) {
        xm = c;
      }
      if (xm == c && ym == c) {
        ym = c + 1.0;  // coincident points are a separate case
      }
      const double ang = draw(0, 359);
      PixelPoint front{c, c};
      PixelPoint line{xm, ym};
      if (grid) {
        // Integer offsets keep the image-space arithmetic exact.
        const double bx = draw(75, 1205), by = draw(75, 645);
        front = {bx, by};
        line = {xm + bx - c, ym + by - c};
      }
      const double got = position_fix(front, line, ang);
      const double want = oracle::p_fix(xm, ym, c, ang);
      out.expect(std::abs(got - want) <= tol,
                 label("position_fix", grid, {xm, ym, ang}) + " = " + fmt(got) + ", oracle " +
                     fmt(want));
    }
  }
  return out;
}

struct PidReport {
  Outcome outcome;
  double limit_gap = 0.0;  // |correction - 10| after 200 unit errors
  double max_integral_ratio = 0.0;
};

inline PidReport pid(std::uint64_t seed, long random_steps) {
  using namespace infrasteer;
  PidReport r;
  Outcome& out = r.outcome;

  {
    const PidStep s = pid_update({}, {1.0, 0.0, 0.0}, 7.0);
    out.expect(s.correction == 7.0, "pure proportional gave " + fmt(s.correction));
  }
  {
    const PidStep s = pid_update({}, PidGains::onboard_default(), 10.0);
    out.expect(s.state.integral == 10.0 && s.derivative == 10.0 &&
                   std::abs(s.correction - 61.5) <= 1e-12,
               "61.5 case gave " + fmt(s.correction));
  }
  {
    const PidStep s = pid_update({}, PidGains::infrastructure_default(), 10.0, 4.0);
    out.expect(std::abs(s.correction - 12.2) <= 1e-12, "infrastructure case gave " +
                                                           fmt(s.correction));
  }
  {
    PidState st;
    double c = 0.0;
    std::vector<double> errors;
    for (int n = 0; n < 200; ++n) {
      const PidStep s = pid_update(st, {0.0, 1.0, 0.0}, 1.0);
      st = s.state;
      c = s.correction;
      errors.push_back(1.0);
    }
    const double hand = 10.0 * (1.0 - std::pow(0.9, 200));
    out.expect(std::abs(c - hand) <= 1e-9, "geometric series after 200 steps gave " + fmt(c) +
                                               ", hand evaluation " + fmt(hand));
    out.expect(std::abs(c - oracle::pid_correction(errors, 0.0, 1.0, 0.0, 0.9)) <= 1e-9,
               "geometric series disagrees with the direct sum");
    r.limit_gap = std::abs(c - 10.0);
  }

  // Direct-sum oracle on short random sequences.
  Rng rng(seed);
  for (int trial = 0; trial < 200; ++trial) {
    const PidGains g{rng.uniform(0.0, 3.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 5.0)};
    PidState st;
    std::vector<double> errors;
    for (int n = 0; n < 40; ++n) {
      const double e = rng.uniform(-50.0, 50.0);
      errors.push_back(e);
      const PidStep s = pid_update(st, g, e);
      st = s.state;
      const double want = oracle::pid_correction(errors, g.kp, g.ki, g.kd, 0.9);
      out.expect(std::abs(s.correction - want) <= 1e-9 * (1.0 + std::abs(want)),
                 "random sequence step " + std::to_string(n) + " gave " + fmt(s.correction) +
                     ", oracle " + fmt(want));
    }
  }

  // Bounded error keeps the integral within M / (1 - decay).
  const double bound = 40.0;
  PidState st;
  for (long n = 0; n < random_steps; ++n) {
    const double e = n % 1000 < 300 ? bound : rng.uniform(-bound, bound);
    st = pid_update(st, {1.0, 0.1, 0.5}, e).state;
    const double ratio = std::abs(st.integral) / (bound / (1.0 - st.decay));
    r.max_integral_ratio = std::max(r.max_integral_ratio, ratio);
    out.expect(ratio <= 1.0 + 1e-12, "integral bound exceeded at step " + std::to_string(n));
  }
  return r;
}

// Random registry of `size` sources built from raw wire commands.
struct RandomRegistry {
  infrasteer::SourceRegistry registry;
  std::vector<oracle::Source> sources;
};

inline RandomRegistry random_registry(infrasteer::Rng& rng, std::size_t size,
                                      bool uniform_confidence = false) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < size; ++i) {
    names.push_back("s" + std::to_string(i));
  }
  RandomRegistry out{infrasteer::SourceRegistry(names), {}};
  const double shared = rng.uniform_int(1, 100);
  for (std::size_t i = 0; i < size; ++i) {
    infrasteer::SteeringCommand raw;
    if (rng.uniform() < 0.25) {
      raw = infrasteer::SteeringCommand::zero_report();
    } else {
      raw.left = rng.uniform_int(0, 220);
      raw.right = rng.uniform_int(0, 220);
      if (raw.left == 0 && raw.right == 0) {
        raw.right = 1;
      }
      raw.confidence = uniform_confidence ? shared : rng.uniform_int(0, 100);
      raw.p = rng.uniform(-90, 90);
      raw.i = rng.uniform(-900, 900);
      raw.d = rng.uniform(-90, 90);
    }
    out.registry.ingest(static_cast<int>(i), raw);
    oracle::Source s;
    s.active = raw.left > 0 || raw.right > 0;
    if (s.active) {
      s.left = raw.left / 3.0;
      s.right = raw.right / 3.0;
      s.confidence = raw.confidence / 3.0;
    }
    out.sources.push_back(s);
  }
  return out;
}

inline Outcome fusion(std::uint64_t seed, int registries) {
  using namespace infrasteer;
  Outcome out;
  Rng rng(seed);
  const auto same = [](const std::optional<Powers>& a, const std::optional<oracle::Fused>& b) {
    if (a.has_value() != b.has_value()) {
      return false;
    }
    return !a || (std::abs(a->left - b->left) <= 1e-9 && std::abs(a->right - b->right) <= 1e-9);
  };

  for (int n = 0; n < registries; ++n) {
    const std::size_t size = static_cast<std::size_t>(rng.uniform_int(1, 5));
    const RandomRegistry rr = random_registry(rng, size);
    out.expect(same(fuse_weighted(rr.registry), oracle::weighted(rr.sources)),
               "weighted differs on registry " + std::to_string(n));
    out.expect(same(fuse_simple_avg(rr.registry), oracle::simple(rr.sources)),
               "simple average differs on registry " + std::to_string(n));
    const auto pick = oracle::max_pick(rr.sources);
    out.expect(max_confidence_source(rr.registry) == pick,
               "max pick differs on registry " + std::to_string(n));
    std::optional<oracle::Fused> want_max;
    if (pick) {
      want_max = oracle::Fused{rr.sources[*pick].left, rr.sources[*pick].right};
    }
    out.expect(same(fuse_max(rr.registry), want_max),
               "max output differs on registry " + std::to_string(n));

    // Uniform confidences reduce the weighted average to the simple one.
    const RandomRegistry uni = random_registry(rng, size, true);
    out.expect(same(fuse_weighted(uni.registry), oracle::simple(uni.sources)) &&
                   same(fuse_weighted(uni.registry),
                        [&]() -> std::optional<oracle::Fused> {
                          const auto s = fuse_simple_avg(uni.registry);
                          if (!s) {
                            return std::nullopt;
                          }
                          return oracle::Fused{s->left, s->right};
                        }()),
               "uniform-confidence weighted differs from simple on registry " +
                   std::to_string(n));
  }

  // Exhaustive three-source tie grid.
  const double levels[] = {0.0, 15.0, 30.0, 60.0};
  for (double c0 : levels) {
    for (double c1 : levels) {
      for (double c2 : levels) {
        SourceRegistry reg({"a", "b", "c"});
        std::vector<oracle::Source> src;
        const double conf[] = {c0, c1, c2};
        for (int i = 0; i < 3; ++i) {
          SteeringCommand raw{30.0 + 10.0 * i, 90.0 - 10.0 * i, conf[i], 0, 0, 0};
          reg.ingest(i, raw);
          src.push_back({raw.left / 3.0, raw.right / 3.0, conf[i] / 3.0, true});
        }
        const auto want = oracle::max_pick(src);
        const auto got = max_confidence_source(reg);
        out.expect(got == want, "tie grid (" + fmt(c0) + "," + fmt(c1) + "," + fmt(c2) + ")");
        if (want) {
          const double top = std::max({c0, c1, c2});
          std::size_t last = 0;
          for (std::size_t i = 0; i < 3; ++i) {
            if (conf[i] == top) {
              last = i;
            }
          }
          out.expect(*got == last, "tie grid latest-wins (" + fmt(c0) + "," + fmt(c1) + "," +
                                       fmt(c2) + ")");
        }
      }
    }
  }
  return out;
}

struct WireReport {
  Outcome outcome;
  double delivery_rate = 0.0;
  double loss = 0.0;
};

inline WireReport wire(std::uint64_t seed, int commands, int datagrams) {
  using namespace infrasteer;
  WireReport r;
  Outcome& out = r.outcome;
  Rng rng(seed);

  for (int n = 0; n < commands; ++n) {
    SteeringCommand c;
    if (n % 10 == 0) {
      c = SteeringCommand::zero_report();
    } else {
      const bool integral = n % 3 == 0;
      const auto v = [&](double lo, double hi) {
        const double x = rng.uniform(lo, hi);
        return integral ? std::trunc(x) : x;
      };
      c = {v(-50, 300), v(-50, 300), v(0, 100), v(-90, 90), v(-1e3, 1e3), v(-90, 90)};
    }
    const std::string text = encode_command(c);
    SteeringCommand back;
    bool parsed = true;
    try {
      back = decode_command(text);
    } catch (const MalformedDatagram&) {
      parsed = false;
    }
    out.expect(parsed && back == c, "roundtrip failed for \"" + text + "\"");
  }

  out.expect(decode_command("0;0;0;0;0;0").is_zero_report(), "\"0;0;0;0;0;0\" not a zero-report");

  r.loss = 0.3;
  const auto schedule = [&](std::uint64_t channel_seed) {
    SimChannel ch({r.loss, 0.0, 0.02, channel_seed});
    std::vector<Delivery> got;
    for (int n = 0; n < datagrams; ++n) {
      const double t = n * 0.005;
      ch.send(n % 3, "1;1;1;0;0;" + std::to_string(n), t);
      for (auto& d : ch.poll(t)) {
        got.push_back(std::move(d));
      }
    }
    for (auto& d : ch.poll(1e9)) {
      got.push_back(std::move(d));
    }
    return got;
  };
  const auto a = schedule(seed ^ 0x5eedu);
  const auto b = schedule(seed ^ 0x5eedu);
  r.delivery_rate = static_cast<double>(a.size()) / datagrams;
  out.expect(std::abs(r.delivery_rate - (1.0 - r.loss)) <= 0.01 * (1.0 - r.loss),
             "delivery rate " + fmt(r.delivery_rate));
  bool identical = a.size() == b.size();
  for (std::size_t i = 0; identical && i < a.size(); ++i) {
    identical = a[i].source_id == b[i].source_id && a[i].datagram == b[i].datagram &&
                a[i].delivered_at == b[i].delivered_at && a[i].sent_at == b[i].sent_at;
  }
  out.expect(identical, "same seed gave a different delivery schedule");
  return r;
}

} // namespace conformance
