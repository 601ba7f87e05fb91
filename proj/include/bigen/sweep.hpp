#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bigen/params.hpp"

namespace bigen {

enum class Measure { DegreeFit, BlccMean, SimilarUsers, NeighborItems };

Measure parseMeasure(std::string_view name);  // degree_fit, blcc_mean, ...
std::string_view label(Measure m);

// One swept parameter. Names: alpha, beta, b (or bounce), p, u, v, uv (u and
// v set together), T (or iterations).
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

// "alpha=0,0.5,0.9" -> {alpha, {0, 0.5, 0.9}}. Throws std::invalid_argument.
SweepAxis parseAxis(std::string_view text);

struct SweepSpec {
  GeneratorParams base;
  std::vector<SweepAxis> axes;  // 1 or 2
  std::uint32_t seedsPerCell = 10;
  std::vector<Measure> measures = {Measure::DegreeFit, Measure::BlccMean,
                                   Measure::SimilarUsers, Measure::NeighborItems};
  std::uint64_t masterSeed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
  // Also record similar_users / neighbor_items every T/20 iterations.
  bool growth = false;
};

// Throws ParamError / std::invalid_argument describing the first problem.
void validate(const SweepSpec& spec);

// Cell parameters in row-major order (first axis outermost).
std::vector<GeneratorParams> expandCells(const SweepSpec& spec);

// Seed of run `seedIndex` in cell `cellIndex`:
// deriveSeed(masterSeed, cellIndex, seedIndex).
std::uint64_t sweepSeed(const SweepSpec& spec, std::size_t cellIndex,
                        std::size_t seedIndex);

struct GrowthSample {
  std::uint64_t t = 0;
  double similarUsers = 0;
  double neighborItems = 0;
};

struct SweepRun {
  std::size_t cell = 0;
  std::size_t seedIndex = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;  // one per SweepResult::columns, NaN if absent
  std::vector<GrowthSample> growth;
};

struct SweepAggregate {
  std::size_t cell = 0;
  std::vector<double> mean;  // over runs with a finite value
  std::vector<double> stddev;  // sample standard deviation
};

struct SweepResult {
  SweepSpec spec;
  std::vector<GeneratorParams> cells;
  std::vector<std::string> columns;
  std::vector<SweepRun> runs;  // cell-major, then seed index
  std::vector<SweepAggregate> aggregates;

  // Column index by name, throws std::out_of_range.
  std::size_t column(std::string_view name) const;
};

// Cells and seeds run on a worker pool; results are merged in deterministic
// (cell, seed) order so the output does not depend on the thread count.
SweepResult runSweep(const SweepSpec& spec);

// Columns: row_type,cell,seed_index,seed,<axes>,t,<measures>,<measures>_sd.
// row_type is run, aggregate or growth.
void writeSweepCsv(std::ostream& out, const SweepResult& result);

}  // namespace bigen
