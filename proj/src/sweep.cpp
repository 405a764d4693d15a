#include "infrasteer/sweep.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "infrasteer/rng.hpp"
#include "infrasteer/wire.hpp"

namespace infrasteer {

namespace {

// Pools the samples of all repetitions: each run weighs by its count.
struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  std::size_t runs = 0;

  void add(const std::optional<RunSummary>& s) {
    if (s && s->count > 0) {
      const auto n = static_cast<double>(s->count);
      sum += n * s->mean_abs;
      sum_sq += n * (s->std_abs * s->std_abs + s->mean_abs * s->mean_abs);
      count += s->count;
      ++runs;
    }
  }

  MetricStat stat() const {
    if (count == 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      return {nan, nan, 0, 0};
    }
    const auto n = static_cast<double>(count);
    const double mean = sum / n;
    return {mean, std::sqrt(std::max(0.0, sum_sq / n - mean * mean)), runs, count};
  }
};

std::optional<RunSummary> main_summary(const RunSummary& s, const SampleSeries& series) {
  return series.empty() ? std::nullopt : std::optional(s);
}

} // namespace

const char* to_string(SweepAxis axis) {
  switch (axis) {
  case SweepAxis::kp:
    return "kp";
  case SweepAxis::ki:
    return "ki";
  case SweepAxis::kd:
    return "kd";
  case SweepAxis::outage_duration:
    return "outage_duration";
  case SweepAxis::outage_threshold:
    return "outage_threshold";
  }
  return "?";
}

std::optional<SweepAxis> parse_sweep_axis(const std::string& text) {
  for (auto axis : {SweepAxis::kp, SweepAxis::ki, SweepAxis::kd, SweepAxis::outage_duration,
                    SweepAxis::outage_threshold}) {
    if (text == to_string(axis)) {
      return axis;
    }
  }
  return std::nullopt;
}

void SweepSpec::validate() const {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ConfigError("values: must be finite");
    }
  }
  if (repetitions < 1) {
    throw ConfigError("reps: must be at least 1");
  }
}

Scenario apply_axis(const Scenario& scenario, SweepAxis axis, double value) {
  Scenario out = scenario;
  bool applied = false;
  for (auto& s : out.sensors) {
    switch (axis) {
    case SweepAxis::kp:
      s.gains.kp = value;
      applied = true;
      break;
    case SweepAxis::ki:
      s.gains.ki = value;
      applied = true;
      break;
    case SweepAxis::kd:
      s.gains.kd = value;
      applied = true;
      break;
    case SweepAxis::outage_duration:
      if (auto* p = std::get_if<PeriodicOutage>(&s.outage)) {
        p->duration = value;
        applied = true;
      }
      break;
    case SweepAxis::outage_threshold:
      if (auto* p = std::get_if<ProbabilisticOutage>(&s.outage)) {
        if (value != std::floor(value)) {
          throw ConfigError("values: outage_threshold must be an integer percent");
        }
        p->threshold = static_cast<int>(value);
        applied = true;
      }
      break;
    }
  }
  if (!applied) {
    throw ConfigError(std::string("axis: no sensor has a parameter for ") + to_string(axis));
  }
  return out;
}

std::uint64_t repetition_seed(std::uint64_t seed, double value, int repetition) {
  return mix_seed(mix_seed(seed, std::bit_cast<std::uint64_t>(value + 0.0)),
                  static_cast<std::uint64_t>(repetition));
}

SweepTable sweep(const Scenario& scenario, const SweepSpec& spec, const SweepOptions& options) {
  spec.validate();
  const std::size_t reps = static_cast<std::size_t>(spec.repetitions);

  std::vector<Scenario> jobs;
  for (double v : spec.values) {
    const Scenario base = apply_axis(scenario, spec.axis, v);
    base.validate();
    for (std::size_t r = 0; r < reps; ++r) {
      Scenario sc = base;
      sc.seed = repetition_seed(scenario.seed, v, static_cast<int>(r));
      jobs.push_back(std::move(sc));
    }
  }

  std::vector<std::optional<RunResult>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      RunResult res = run(jobs[i]);
      if (options.out_dir) {
        const std::size_t vi = i / reps;
        const auto dir = *options.out_dir /
                         (std::string(to_string(spec.axis)) + "_" +
                          format_number(spec.values[vi])) /
                         ("rep" + std::to_string(i % reps));
        write_artifacts(res, dir);
      }
      // Only the summaries are kept; the logs are on disk when requested.
      res.log_csv.clear();
      res.log_csv.shrink_to_fit();
      results[i] = std::move(res);
    }
  };
  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }

  SweepTable table;
  table.axis = spec.axis;
  for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
    SweepRow row;
    row.value = spec.values[vi];
    Accumulator dev, corr, pdev, pcorr;
    std::size_t crashes = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const RunResult& res = *results[vi * reps + r];
      dev.add(main_summary(res.deviation_summary, res.deviation));
      corr.add(main_summary(res.correction_summary, res.correction));
      pdev.add(res.post_outage_deviation);
      pcorr.add(res.post_outage_correction);
      if (res.crashed()) {
        ++crashes;
      }
      row.repetitions.push_back({res.seed, res.crash_time, res.deviation_summary.mean_abs,
                                 res.correction_summary.mean_abs});
    }
    row.crash_rate = static_cast<double>(crashes) / static_cast<double>(reps);
    row.deviation = dev.stat();
    row.correction = corr.stat();
    row.post_outage_deviation = pdev.stat();
    row.post_outage_correction = pcorr.stat();
    table.rows.push_back(std::move(row));
  }
  return table;
}

const MetricStat& metric_of(const SweepRow& row, const std::string& metric) {
  if (metric == "deviation") {
    return row.deviation;
  }
  if (metric == "correction") {
    return row.correction;
  }
  if (metric == "post_outage_deviation") {
    return row.post_outage_deviation;
  }
  if (metric == "post_outage_correction") {
    return row.post_outage_correction;
  }
  throw std::invalid_argument("unknown metric: " + metric);
}

std::vector<std::filesystem::path> emit_plot_data(const SweepTable& table,
                                                  const std::filesystem::path& dir,
                                                  const std::string& prefix) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& metric : plot_metrics()) {
    const auto path = dir / (prefix + metric + ".dat");
    std::ofstream out(path);
    if (!out) {
      throw std::runtime_error("cannot write " + path.string());
    }
    out << "# " << to_string(table.axis) << " " << metric << "\n";
    out << "# value mean std crash_rate\n";
    for (const auto& row : table.rows) {
      const MetricStat& m = metric_of(row, metric);
      out << format_number(row.value) << ' ' << format_number(m.mean) << ' '
          << format_number(m.std) << ' ' << format_number(row.crash_rate) << '\n';
    }
    written.push_back(path);
  }
  return written;
}

std::vector<PlotRow> parse_plot_data(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot read " + file.string());
  }
  std::vector<PlotRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::istringstream fields(line);
    std::string a, b, c, d;
    if (!(fields >> a >> b >> c >> d)) {
      throw std::runtime_error("bad plot row: " + line);
    }
    const auto num = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
    rows.push_back({num(a), num(b), num(c), num(d)});
  }
  return rows;
}

std::string format_table(const SweepTable& table) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %10s %10s %10s %10s %10s %7s\n", to_string(table.axis),
                "dev_mean", "dev_std", "corr_mean", "post_dev", "post_corr", "crash");
  out << buf;
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof buf, "%-16g %10.5f %10.5f %10.4f %10.5f %10.4f %7.3f\n",
                  row.value, row.deviation.mean, row.deviation.std, row.correction.mean,
                  row.post_outage_deviation.mean, row.post_outage_correction.mean,
                  row.crash_rate);
    out << buf;
  }
  return out.str();
}

} // namespace infrasteer
