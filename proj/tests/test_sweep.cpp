#include <cmath>
#include <sstream>

#include "bigen/analytics.hpp"
#include "bigen/generator.hpp"
#include "bigen/sweep.hpp"
#include "doctest.h"

using namespace bigen;

namespace {

std::vector<std::vector<std::string>> csvRows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

SweepSpec quick() {
  SweepSpec spec;
  spec.base.iterations = 500;
  spec.seedsPerCell = 3;
  return spec;
}

}  // namespace

TEST_CASE("axis parsing") {
  auto a = parseAxis("alpha=0,0.5,0.9");
  CHECK(a.name == "alpha");
  CHECK(a.values == std::vector<double>{0, 0.5, 0.9});
  CHECK(parseAxis("bounce=0.1").name == "b");
  CHECK(parseAxis("iterations=10,20").name == "T");
  CHECK(parseAxis("uv=3,6").values.size() == 2);
  CHECK_THROWS_AS(parseAxis("alpha"), std::invalid_argument);
  CHECK_THROWS_AS(parseAxis("gamma=1"), std::invalid_argument);
  CHECK_THROWS_AS(parseAxis("alpha="), std::invalid_argument);
  CHECK_THROWS_AS(parseAxis("alpha=0,x"), std::invalid_argument);
  CHECK_THROWS_AS(parseAxis("alpha=0.5abc"), std::invalid_argument);

  CHECK(parseMeasure("blcc_mean") == Measure::BlccMean);
  CHECK_THROWS_AS(parseMeasure("lcc"), std::invalid_argument);
}

TEST_CASE("cells expand row-major") {
  SweepSpec spec = quick();
  spec.axes = {parseAxis("alpha=0,1"), parseAxis("uv=3,4,5")};
  const auto cells = expandCells(spec);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].alpha == 0);
  CHECK(cells[0].u == 3);
  CHECK(cells[2].v == 5);
  CHECK(cells[3].alpha == 1);
  CHECK(cells[3].u == 3);
  for (const auto& c : cells) CHECK(c.iterations == 500);
}

TEST_CASE("invalid specs") {
  SweepSpec spec = quick();
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);  // no axes
  spec.axes = {parseAxis("alpha=0"), parseAxis("beta=0"), parseAxis("p=0.5")};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.axes = {parseAxis("alpha=0,1.5")};
  CHECK_THROWS_AS(validate(spec), ParamError);
  spec.axes = {parseAxis("uv=0,3")};
  CHECK_THROWS_AS(validate(spec), ParamError);
  spec.axes = {parseAxis("uv=2.5")};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.axes = {SweepAxis{"alpha", {}}};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.axes = {parseAxis("alpha=0")};
  spec.seedsPerCell = 0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.seedsPerCell = 1;
  spec.measures.clear();
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
}

TEST_CASE("seeds are derived from the master seed") {
  SweepSpec spec = quick();
  spec.masterSeed = 77;
  CHECK(sweepSeed(spec, 2, 5) == deriveSeed(77, 2, 5));
  spec.axes = {parseAxis("alpha=0,1")};
  spec.measures = {Measure::BlccMean};
  const auto result = runSweep(spec);
  REQUIRE(result.runs.size() == 6);
  for (const auto& run : result.runs) {
    CHECK(run.seed == deriveSeed(77, run.cell, run.seedIndex));
    // each run equals an independent generation from its seed
    const auto state = bigen::run(result.cells[run.cell], run.seed);
    CHECK(run.values[result.column("blcc_user")] ==
          *blccMean(state.graph(), Modality::User).mean);
  }
}

TEST_CASE("results do not depend on the thread count") {
  SweepSpec spec = quick();
  spec.axes = {parseAxis("beta=0,0.5"), parseAxis("b=0,0.5")};
  spec.threads = 1;
  const auto one = runSweep(spec);
  spec.threads = 4;
  const auto four = runSweep(spec);
  std::ostringstream a, b;
  writeSweepCsv(a, one);
  writeSweepCsv(b, four);
  CHECK(a.str() == b.str());
}

TEST_CASE("CSV layout") {
  SweepSpec spec = quick();
  spec.axes = {parseAxis("alpha=0,0.9"), parseAxis("beta=0.5")};
  spec.measures = {Measure::BlccMean, Measure::SimilarUsers};
  const auto result = runSweep(spec);
  std::ostringstream out;
  writeSweepCsv(out, result);
  const auto rows = csvRows(out.str());
  REQUIRE(rows.size() == 1 + 6 + 2);
  CHECK(rows[0] == std::vector<std::string>{"row_type", "cell", "seed_index", "seed", "alpha",
                                            "beta", "t", "blcc_user", "blcc_item",
                                            "similar_users", "blcc_user_sd", "blcc_item_sd",
                                            "similar_users_sd"});
  for (std::size_t r = 1; r <= 6; ++r) {
    CHECK(rows[r][0] == "run");
    CHECK(rows[r].size() == rows[0].size());
  }
  CHECK(rows[7][0] == "aggregate");
  CHECK(rows[8][4] == "0.9");

  // aggregates are the mean and sample standard deviation of the runs
  const std::size_t col = result.column("similar_users");
  double sum = 0, sumSq = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double x = result.runs[3 + s].values[col];
    sum += x;
    sumSq += x * x;
  }
  const double mean = sum / 3;
  CHECK(result.aggregates[1].mean[col] == doctest::Approx(mean));
  CHECK(result.aggregates[1].stddev[col] ==
        doctest::Approx(std::sqrt((sumSq - 3 * mean * mean) / 2)));
}

TEST_CASE("growth sampling") {
  SweepSpec spec = quick();
  spec.base.iterations = 400;
  spec.axes = {parseAxis("uv=3")};
  spec.measures = {Measure::BlccMean};
  spec.seedsPerCell = 2;
  spec.growth = true;
  const auto result = runSweep(spec);
  CHECK_NOTHROW(result.column("similar_users"));
  for (const auto& run : result.runs) {
    REQUIRE(run.growth.size() == 20);
    CHECK(run.growth.front().t == 20);
    CHECK(run.growth.back().t == 400);
    CHECK(run.growth.back().similarUsers == run.values[result.column("similar_users")]);
  }
  std::ostringstream out;
  writeSweepCsv(out, result);
  std::size_t growthRows = 0;
  for (const auto& row : csvRows(out.str())) growthRows += row[0] == "growth";
  CHECK(growthRows == 40);
}

TEST_CASE("clustering grows with the preferential shares") {
  SweepSpec spec;
  spec.axes = {parseAxis("alpha=0,0.5,0.9"), parseAxis("beta=0,0.5,0.9")};
  spec.measures = {Measure::BlccMean};
  const auto result = runSweep(spec);
  const std::size_t col = result.column("blcc_user");
  auto at = [&](std::size_t a, std::size_t b) { return result.aggregates[a * 3 + b].mean[col]; };
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      if (a + 1 < 3) CHECK(at(a, b) < at(a + 1, b));
      if (b + 1 < 3) CHECK(at(a, b) < at(a, b + 1));
    }
  }
}

TEST_CASE("clustering grows with bouncing") {
  SweepSpec spec;
  spec.axes = {parseAxis("b=0,0.3,0.6,0.9")};
  spec.measures = {Measure::BlccMean};
  const auto result = runSweep(spec);
  const std::size_t col = result.column("blcc_user");
  for (std::size_t c = 0; c + 1 < 4; ++c) {
    CHECK(result.aggregates[c].mean[col] < result.aggregates[c + 1].mean[col]);
  }
}

TEST_CASE("neighborhoods grow with density") {
  SweepSpec spec;
  spec.base.iterations = 2000;
  spec.seedsPerCell = 3;
  spec.axes = {parseAxis("uv=3,6,12")};
  spec.measures = {Measure::SimilarUsers, Measure::NeighborItems};
  const auto result = runSweep(spec);
  for (const char* name : {"similar_users", "neighbor_items"}) {
    const std::size_t col = result.column(name);
    for (std::size_t c = 0; c + 1 < 3; ++c) {
      CHECK(result.aggregates[c].mean[col] < result.aggregates[c + 1].mean[col]);
    }
  }
}

TEST_CASE("degree fit columns") {
  SweepSpec spec = quick();
  spec.base.iterations = 3000;
  spec.seedsPerCell = 1;
  spec.axes = {parseAxis("beta=0.5")};
  spec.measures = {Measure::DegreeFit};
  const auto result = runSweep(spec);
  const double exponent = result.runs[0].values[result.column("user_exponent")];
  CHECK(std::isfinite(exponent));
  CHECK(exponent > 1);
  CHECK_THROWS_AS(result.column("blcc_user"), std::out_of_range);
}
