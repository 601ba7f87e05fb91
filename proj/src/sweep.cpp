#include "bigen/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "bigen/analytics.hpp"
#include "bigen/generator.hpp"
#include "bigen/io.hpp"
#include "bigen/rng.hpp"

namespace bigen {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string canonicalAxis(std::string_view name) {
  if (name == "alpha" || name == "beta" || name == "p" || name == "u" || name == "v" ||
      name == "uv") {
    return std::string(name);
  }
  if (name == "b" || name == "bounce") return "b";
  if (name == "T" || name == "iterations") return "T";
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

bool integerAxis(const std::string& name) {
  return name == "u" || name == "v" || name == "uv" || name == "T";
}

void applyAxis(GeneratorParams& params, const std::string& name, double value) {
  if (integerAxis(name)) {
    if (value < 0 || value != std::floor(value) || value > 4294967295.0) {
      throw std::invalid_argument("axis " + name + " needs nonnegative integer values");
    }
  }
  if (name == "alpha") params.alpha = value;
  else if (name == "beta") params.beta = value;
  else if (name == "b") params.bounce = value;
  else if (name == "p") params.p = value;
  else if (name == "u") params.u = static_cast<std::uint32_t>(value);
  else if (name == "v") params.v = static_cast<std::uint32_t>(value);
  else if (name == "uv") params.u = params.v = static_cast<std::uint32_t>(value);
  else if (name == "T") params.iterations = static_cast<std::uint64_t>(value);
}

std::vector<std::string> measureColumns(Measure m) {
  switch (m) {
    case Measure::DegreeFit:
      return {"user_exponent", "user_power_r2", "user_exp_rate", "user_exp_r2",
              "item_exponent", "item_power_r2", "item_exp_rate", "item_exp_r2"};
    case Measure::BlccMean:
      return {"blcc_user", "blcc_item"};
    case Measure::SimilarUsers:
      return {"similar_users"};
    case Measure::NeighborItems:
      return {"neighbor_items"};
  }
  return {};
}

void writeNumber(std::ostream& out, double x) {
  if (std::isfinite(x)) out << x;
}

}  // namespace

Measure parseMeasure(std::string_view name) {
  if (name == "degree_fit") return Measure::DegreeFit;
  if (name == "blcc_mean") return Measure::BlccMean;
  if (name == "similar_users") return Measure::SimilarUsers;
  if (name == "neighbor_items") return Measure::NeighborItems;
  throw std::invalid_argument("unknown measure '" + std::string(name) + "'");
}

std::string_view label(Measure m) {
  switch (m) {
    case Measure::DegreeFit: return "degree_fit";
    case Measure::BlccMean: return "blcc_mean";
    case Measure::SimilarUsers: return "similar_users";
    case Measure::NeighborItems: return "neighbor_items";
  }
  return "";
}

SweepAxis parseAxis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw std::invalid_argument("axis must look like name=v1,v2,...");
  }
  SweepAxis axis;
  axis.name = canonicalAxis(text.substr(0, eq));
  std::string_view rest = text.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string token(rest.substr(0, comma));
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size()) {
      throw std::invalid_argument("axis " + axis.name + ": bad value '" + token + "'");
    }
    axis.values.push_back(value);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (axis.values.empty()) throw std::invalid_argument("axis " + axis.name + " has no values");
  return axis;
}

std::vector<GeneratorParams> expandCells(const SweepSpec& spec) {
  std::vector<GeneratorParams> cells{spec.base};
  for (const auto& raw : spec.axes) {
    const std::string name = canonicalAxis(raw.name);
    std::vector<GeneratorParams> next;
    next.reserve(cells.size() * raw.values.size());
    for (const auto& cell : cells) {
      for (double value : raw.values) {
        GeneratorParams p = cell;
        applyAxis(p, name, value);
        next.push_back(p);
      }
    }
    cells = std::move(next);
  }
  return cells;
}

void validate(const SweepSpec& spec) {
  if (spec.axes.empty() || spec.axes.size() > 2) {
    throw std::invalid_argument("a sweep needs one or two axes");
  }
  for (const auto& axis : spec.axes) {
    if (axis.values.empty()) throw std::invalid_argument("axis " + axis.name + " has no values");
  }
  if (spec.seedsPerCell == 0) throw std::invalid_argument("seeds per cell must be >= 1");
  if (spec.measures.empty()) throw std::invalid_argument("a sweep needs at least one measure");
  for (const auto& cell : expandCells(spec)) ensureValid(cell);
}

std::uint64_t sweepSeed(const SweepSpec& spec, std::size_t cellIndex, std::size_t seedIndex) {
  return deriveSeed(spec.masterSeed, cellIndex, seedIndex);
}

std::size_t SweepResult::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("no sweep column '" + std::string(name) + "'");
}

namespace {

SweepRun executeRun(const SweepResult& shape, std::size_t cell, std::size_t seedIndex) {
  const SweepSpec& spec = shape.spec;
  SweepRun out;
  out.cell = cell;
  out.seedIndex = seedIndex;
  out.seed = sweepSeed(spec, cell, seedIndex);
  out.values.assign(shape.columns.size(), kNaN);

  const GeneratorParams& params = shape.cells[cell];
  RunState state(params, out.seed);
  if (spec.growth) {
    const std::uint64_t every = std::max<std::uint64_t>(1, params.iterations / 20);
    while (state.t() < params.iterations) {
      state.step();
      if (state.t() % every == 0 || state.t() == params.iterations) {
        const auto hood = neighborhoodReport(state.graph());
        out.growth.push_back({state.t(), hood.meanSimilarUsers, hood.meanNeighborItems});
      }
    }
  } else {
    state.runToEnd();
  }
  const Bigraph& g = state.graph();

  auto set = [&](std::string_view name, double value) {
    out.values[shape.column(name)] = value;
  };
  bool hoodDone = false;
  NeighborhoodReport hood;
  for (Measure m : spec.measures) {
    switch (m) {
      case Measure::DegreeFit:
        for (Modality mod : {Modality::User, Modality::Item}) {
          const std::string prefix(label(mod));
          try {
            const auto fit = fitDistributionShape(degreeHistogram(g, mod));
            set(prefix + "_exponent", fit.powerLawExponent);
            set(prefix + "_power_r2", fit.powerLawR2);
            set(prefix + "_exp_rate", fit.exponentialRate);
            set(prefix + "_exp_r2", fit.exponentialR2);
          } catch (const InsufficientSupportError&) {
          }
        }
        break;
      case Measure::BlccMean: {
        const auto users = blccMean(g, Modality::User);
        const auto items = blccMean(g, Modality::Item);
        set("blcc_user", users.mean.value_or(kNaN));
        set("blcc_item", items.mean.value_or(kNaN));
        break;
      }
      case Measure::SimilarUsers:
      case Measure::NeighborItems:
        if (!hoodDone) {
          hood = neighborhoodReport(g);
          hoodDone = true;
        }
        if (m == Measure::SimilarUsers) set("similar_users", hood.meanSimilarUsers);
        else set("neighbor_items", hood.meanNeighborItems);
        break;
    }
  }
  return out;
}

}  // namespace

SweepResult runSweep(const SweepSpec& spec) {
  validate(spec);
  SweepResult result;
  result.spec = spec;
  for (auto& axis : result.spec.axes) axis.name = canonicalAxis(axis.name);
  result.cells = expandCells(result.spec);
  auto& measures = result.spec.measures;
  if (spec.growth) {
    for (Measure m : {Measure::SimilarUsers, Measure::NeighborItems}) {
      if (std::find(measures.begin(), measures.end(), m) == measures.end()) measures.push_back(m);
    }
  }
  for (Measure m : measures) {
    for (auto& c : measureColumns(m)) {
      if (std::find(result.columns.begin(), result.columns.end(), c) == result.columns.end()) {
        result.columns.push_back(std::move(c));
      }
    }
  }

  const std::size_t jobs = result.cells.size() * spec.seedsPerCell;
  result.runs.resize(jobs);
  unsigned threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      try {
        result.runs[job] = executeRun(result, job / spec.seedsPerCell, job % spec.seedsPerCell);
      } catch (...) {
        std::lock_guard lock(failureMutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t cell = 0; cell < result.cells.size(); ++cell) {
    SweepAggregate agg;
    agg.cell = cell;
    for (std::size_t col = 0; col < result.columns.size(); ++col) {
      double sum = 0, sumSq = 0;
      std::size_t n = 0;
      for (std::size_t s = 0; s < spec.seedsPerCell; ++s) {
        const double x = result.runs[cell * spec.seedsPerCell + s].values[col];
        if (std::isfinite(x)) {
          sum += x;
          sumSq += x * x;
          ++n;
        }
      }
      const double mean = n ? sum / n : kNaN;
      double sd = kNaN;
      if (n > 1) sd = std::sqrt(std::max(0.0, (sumSq - n * mean * mean) / (n - 1)));
      agg.mean.push_back(mean);
      agg.stddev.push_back(sd);
    }
    result.aggregates.push_back(std::move(agg));
  }
  return result;
}

void writeSweepCsv(std::ostream& out, const SweepResult& result) {
  const auto& axes = result.spec.axes;
  out << "row_type,cell,seed_index,seed";
  for (const auto& a : axes) out << ',' << a.name;
  out << ",t";
  for (const auto& c : result.columns) out << ',' << c;
  for (const auto& c : result.columns) out << ',' << c << "_sd";
  out << '\n';

  auto axisValues = [&](std::size_t cell) {
    // Recover the axis coordinates from the row-major cell index.
    std::vector<double> coords(axes.size());
    std::size_t rest = cell;
    for (std::size_t i = axes.size(); i-- > 0;) {
      coords[i] = axes[i].values[rest % axes[i].values.size()];
      rest /= axes[i].values.size();
    }
    return coords;
  };
  auto prefix = [&](const char* type, std::size_t cell, const std::string& seedIndex,
                    const std::string& seed, std::uint64_t t) {
    out << type << ',' << cell << ',' << seedIndex << ',' << seed;
    for (double v : axisValues(cell)) out << ',' << v;
    out << ',' << t;
  };

  for (const auto& run : result.runs) {
    const auto t = result.cells[run.cell].iterations;
    prefix("run", run.cell, std::to_string(run.seedIndex), std::to_string(run.seed), t);
    for (double v : run.values) {
      out << ',';
      writeNumber(out, v);
    }
    for (std::size_t i = 0; i < result.columns.size(); ++i) out << ',';
    out << '\n';
  }
  for (const auto& agg : result.aggregates) {
    prefix("aggregate", agg.cell, "", "", result.cells[agg.cell].iterations);
    for (double v : agg.mean) {
      out << ',';
      writeNumber(out, v);
    }
    for (double v : agg.stddev) {
      out << ',';
      writeNumber(out, v);
    }
    out << '\n';
  }
  for (const auto& run : result.runs) {
    for (const auto& sample : run.growth) {
      prefix("growth", run.cell, std::to_string(run.seedIndex), std::to_string(run.seed),
             sample.t);
      for (const auto& c : result.columns) {
        out << ',';
        if (c == "similar_users") writeNumber(out, sample.similarUsers);
        if (c == "neighbor_items") writeNumber(out, sample.neighborItems);
      }
      for (std::size_t i = 0; i < result.columns.size(); ++i) out << ',';
      out << '\n';
    }
  }
  if (!out) throw IoError("sweep CSV write failed");
}

}  // namespace bigen
