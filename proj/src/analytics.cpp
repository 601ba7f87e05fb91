#include "bigen/analytics.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace bigen {

DegreeHistogram histogramFromCounts(Modality m,
                                    std::map<std::uint32_t, std::uint64_t> counts) {
  DegreeHistogram h;
  h.modality = m;
  h.counts = std::move(counts);
  long double sum = 0, sumSq = 0;
  for (const auto& [k, c] : h.counts) {
    h.nodes += c;
    sum += static_cast<long double>(k) * c;
    sumSq += static_cast<long double>(k) * k * c;
  }
  if (h.nodes > 0) {
    h.mean = static_cast<double>(sum / h.nodes);
    h.meanSq = static_cast<double>(sumSq / h.nodes);
  }
  return h;
}

DegreeHistogram degreeHistogram(const Bigraph& g, Modality m) {
  std::map<std::uint32_t, std::uint64_t> counts;
  for (std::uint32_t n = 0; n < g.nodeCount(m); ++n) {
    ++counts[static_cast<std::uint32_t>(g.degree({m, n}))];
  }
  return histogramFromCounts(m, std::move(counts));
}

// --- scanner ---------------------------------------------------------------

NeighborhoodScanner::NeighborhoodScanner(const Bigraph& g) : g_(g) {
  marks_[0].assign(g.userCount(), 0);
  marks_[1].assign(g.itemCount(), 0);
}

std::uint32_t NeighborhoodScanner::nextStamp(std::size_t side) {
  if (++stamp_[side] == 0) {
    std::fill(marks_[side].begin(), marks_[side].end(), 0);
    stamp_[side] = 1;
  }
  return stamp_[side];
}

std::size_t NeighborhoodScanner::secondNeighborCount(NodeRef j) {
  const std::size_t side = slot(j.modality);
  const Modality mid = opposite(j.modality);
  const std::uint32_t stamp = nextStamp(side);
  auto& marks = marks_[side];
  marks[j.index] = stamp;
  std::size_t count = 0;
  for (std::uint32_t i : g_.neighbors(j)) {
    for (std::uint32_t w : g_.neighbors({mid, i})) {
      if (marks[w] != stamp) {
        marks[w] = stamp;
        ++count;
      }
    }
  }
  return count;
}

std::uint64_t NeighborhoodScanner::walkBound(NodeRef j) const {
  const Modality mid = opposite(j.modality);
  std::uint64_t bound = 0;
  for (std::uint32_t i : g_.neighbors(j)) bound += g_.degree({mid, i}) - 1;
  return bound;
}

std::optional<double> NeighborhoodScanner::blcc(NodeRef j) {
  const std::uint64_t bound = walkBound(j);
  if (bound == 0) return std::nullopt;
  const auto n2 = secondNeighborCount(j);
  return 1.0 - static_cast<double>(n2) / static_cast<double>(bound);
}

std::pair<std::size_t, std::size_t> NeighborhoodScanner::similarity(std::uint32_t user) {
  const std::uint32_t userStamp = nextStamp(0);
  const std::uint32_t itemStamp = nextStamp(1);
  auto& userMarks = marks_[0];
  auto& itemMarks = marks_[1];
  const std::size_t itemTotal = g_.itemCount();

  userMarks[user] = userStamp;
  std::vector<std::uint32_t> similar;
  for (std::uint32_t i : g_.neighbors({Modality::User, user})) {
    for (std::uint32_t w : g_.neighbors({Modality::Item, i})) {
      if (userMarks[w] != userStamp) {
        userMarks[w] = userStamp;
        similar.push_back(w);
      }
    }
  }
  std::size_t items = 0;
  for (std::uint32_t w : similar) {
    if (items == itemTotal) break;
    for (std::uint32_t i : g_.neighbors({Modality::User, w})) {
      if (itemMarks[i] != itemStamp) {
        itemMarks[i] = itemStamp;
        ++items;
      }
    }
  }
  return {similar.size(), items};
}

std::optional<double> blcc(const Bigraph& g, NodeRef j) {
  NeighborhoodScanner scanner(g);
  return scanner.blcc(j);
}

namespace {

struct MeanAccumulator {
  double sum = 0;
  std::size_t defined = 0;

  void add(const std::optional<double>& value) {
    if (value) {
      sum += *value;
      ++defined;
    }
  }
  std::optional<double> mean() const {
    if (defined == 0) return std::nullopt;
    return sum / static_cast<double>(defined);
  }
};

// Uniform sample without replacement (partial Fisher-Yates).
std::vector<std::uint32_t> sampleIndices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

BlccReport blccReport(const Bigraph& g) {
  BlccReport report;
  NeighborhoodScanner scanner(g);
  for (Modality m : {Modality::User, Modality::Item}) {
    auto& values = m == Modality::User ? report.users : report.items;
    values.resize(g.nodeCount(m));
    MeanAccumulator acc;
    for (std::uint32_t n = 0; n < values.size(); ++n) {
      values[n] = scanner.blcc({m, n});
      acc.add(values[n]);
    }
    if (m == Modality::User) {
      report.meanUser = acc.mean();
      report.definedUser = acc.defined;
    } else {
      report.meanItem = acc.mean();
      report.definedItem = acc.defined;
    }
  }
  return report;
}

BlccMean blccMean(const Bigraph& g, Modality m) {
  NeighborhoodScanner scanner(g);
  MeanAccumulator acc;
  for (std::uint32_t n = 0; n < g.nodeCount(m); ++n) acc.add(scanner.blcc({m, n}));
  return {acc.mean(), acc.defined, g.nodeCount(m), false};
}

BlccMean blccMeanSampled(const Bigraph& g, Modality m, std::size_t sampleSize, Rng& rng) {
  if (g.nodeCount(m) <= sampleSize) return blccMean(g, m);
  NeighborhoodScanner scanner(g);
  MeanAccumulator acc;
  const auto picks = sampleIndices(g.nodeCount(m), sampleSize, rng);
  for (std::uint32_t n : picks) acc.add(scanner.blcc({m, n}));
  return {acc.mean(), acc.defined, picks.size(), true};
}

SecondNeighborStats secondNeighborStats(const Bigraph& g, Modality m) {
  if (g.nodeCount(m) == 0 || g.nodeCount(opposite(m)) == 0) {
    throw std::invalid_argument("second-neighbor statistics need both modalities nonempty");
  }
  NeighborhoodScanner scanner(g);
  double total = 0;
  for (std::uint32_t n = 0; n < g.nodeCount(m); ++n) {
    total += static_cast<double>(scanner.secondNeighborCount({m, n}));
  }
  SecondNeighborStats stats;
  stats.realMean = total / static_cast<double>(g.nodeCount(m));

  const auto own = degreeHistogram(g, m);
  const auto other = degreeHistogram(g, opposite(m));
  if (other.mean > 0) stats.theoreticMean = own.mean * (other.meanSq / other.mean - 1.0);
  if (stats.theoreticMean != 0) stats.ratio = stats.realMean / stats.theoreticMean;
  return stats;
}

DegreeSums degreeSums(const Bigraph& g) {
  DegreeSums sums;
  for (Modality m : {Modality::User, Modality::Item}) {
    for (std::uint32_t n = 0; n < g.nodeCount(m); ++n) {
      const std::uint64_t k = g.degree({m, n});
      sums.sum += k;
      sums.sumSq += k * k;
      ++sums.nodes;
    }
  }
  return sums;
}

double neighborExpectedDegree(const Bigraph& g) {
  if (g.edgeCount() == 0) {
    throw std::invalid_argument("neighbor expected degree is undefined without edges");
  }
  const auto sums = degreeSums(g);
  return static_cast<double>(sums.sumSq) / static_cast<double>(sums.sum);
}

Similarity similarityNeighborhood(const Bigraph& g, std::uint32_t user) {
  if (user >= g.userCount()) throw std::out_of_range("user index out of range");
  NeighborhoodScanner scanner(g);
  const auto [users, items] = scanner.similarity(user);
  return {users, items};
}

NeighborhoodReport neighborhoodReport(const Bigraph& g, bool keepPerUser) {
  NeighborhoodReport report;
  NeighborhoodScanner scanner(g);
  double users = 0, items = 0;
  if (keepPerUser) report.perUser.reserve(g.userCount());
  for (std::uint32_t n = 0; n < g.userCount(); ++n) {
    const auto [su, ni] = scanner.similarity(n);
    users += static_cast<double>(su);
    items += static_cast<double>(ni);
    if (keepPerUser) report.perUser.push_back({su, ni});
  }
  report.examined = g.userCount();
  if (report.examined > 0) {
    report.meanSimilarUsers = users / static_cast<double>(report.examined);
    report.meanNeighborItems = items / static_cast<double>(report.examined);
  }
  return report;
}

NeighborhoodReport neighborhoodReportSampled(const Bigraph& g, std::size_t sampleSize,
                                             Rng& rng) {
  if (g.userCount() <= sampleSize) return neighborhoodReport(g);
  NeighborhoodReport report;
  NeighborhoodScanner scanner(g);
  double users = 0, items = 0;
  for (std::uint32_t n : sampleIndices(g.userCount(), sampleSize, rng)) {
    const auto [su, ni] = scanner.similarity(n);
    users += static_cast<double>(su);
    items += static_cast<double>(ni);
  }
  report.examined = sampleSize;
  report.sampled = true;
  report.meanSimilarUsers = users / static_cast<double>(sampleSize);
  report.meanNeighborItems = items / static_cast<double>(sampleSize);
  return report;
}

// --- closed forms ------------------------------------------------------------

double combinedKernel(double k, double t, const GeneratorParams& params) {
  if (!(t > 0)) throw std::invalid_argument("combinedKernel needs t > 0");
  if (k < 0) throw std::invalid_argument("combinedKernel needs k >= 0");
  const double eta = derive(params).eta;
  double value = 0;
  if (params.beta > 0) {
    if (params.p <= 0) throw std::invalid_argument("combinedKernel is singular at p = 0");
    value += params.beta / (params.p * t);
  }
  if (params.beta < 1) {
    if (eta <= 0) throw std::invalid_argument("combinedKernel needs eta > 0");
    value += (1.0 - params.beta) * k / (eta * t);
  }
  return value;
}

double attachmentProbability(double k, std::size_t nodeCount, std::size_t edgeCount,
                             double preferential) {
  double value = 0;
  if (preferential < 1) value += (1.0 - preferential) / static_cast<double>(nodeCount);
  if (preferential > 0) value += preferential * k / static_cast<double>(edgeCount);
  return value;
}

namespace {

void checkPdfDomain(double k, const GeneratorParams& params) {
  if (!(params.p > 0 && params.p < 1)) {
    throw std::invalid_argument("theoretical pdf needs 0 < p < 1");
  }
  if (k < params.u) throw std::invalid_argument("theoretical pdf is supported on k >= u");
}

}  // namespace

double theoreticalPdf(double k, const GeneratorParams& params) {
  checkPdfDomain(k, params);
  if (!(params.beta < 1)) {
    throw std::invalid_argument(
        "theoretical pdf diverges at beta = 1; use exponentialLimitPdf");
  }
  const double eta = derive(params).eta;
  const double p = params.p;
  const double keep = 1.0 - params.beta;
  const double a = eta / ((1.0 - p) * keep * params.v);
  const double c = params.beta * eta + p * keep * params.u;
  const double x = (params.beta * eta + p * keep * k) / c;
  return a * p * keep / c * std::pow(x, -a - 1.0);
}

double theoreticalPowerLawExponent(const GeneratorParams& params) {
  if (!(params.p > 0 && params.p < 1)) {
    throw std::invalid_argument("power-law exponent needs 0 < p < 1");
  }
  return derive(params).eta / ((1.0 - params.p) * params.v) + 1.0;
}

double exponentialLimitRate(const GeneratorParams& params) {
  if (!(params.p > 0 && params.p < 1)) {
    throw std::invalid_argument("exponential limit needs 0 < p < 1");
  }
  return params.p / ((1.0 - params.p) * params.v);
}

double exponentialLimitPdf(double k, const GeneratorParams& params) {
  checkPdfDomain(k, params);
  const double lambda = exponentialLimitRate(params);
  return lambda * std::exp(-lambda * (k - params.u));
}

ClusteringPair fcGc(double c, double kMean, double kSqMean) {
  if (!(kMean > 1)) throw std::invalid_argument("fcGc needs <k> > 1");
  if (kSqMean < kMean * kMean) throw std::invalid_argument("fcGc needs <k^2> >= <k>^2");
  if (c < 0) throw std::invalid_argument("fcGc needs c >= 0");
  return {2.0 * c / (kMean * kMean - kMean), 2.0 * c / (kSqMean - kMean)};
}

// --- shape fitting -----------------------------------------------------------

namespace {

struct LineFit {
  double slope = 0;
  double r2 = 0;
};

LineFit leastSquares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace

ShapeFit fitDistributionShape(const DegreeHistogram& h) {
  std::vector<std::pair<std::uint32_t, std::uint64_t>> support;
  std::uint64_t total = 0;
  for (const auto& [k, c] : h.counts) {
    if (k > 0 && c > 0) {
      support.emplace_back(k, c);
      total += c;
    }
  }
  if (support.size() < kMinFitSupport) {
    throw InsufficientSupportError("shape fit needs at least " +
                                   std::to_string(kMinFitSupport) +
                                   " distinct positive degrees, got " +
                                   std::to_string(support.size()));
  }

  std::vector<double> k, logK, logCcdf;
  std::uint64_t remaining = total;
  for (const auto& [degree, count] : support) {
    const double ccdf = static_cast<double>(remaining) / static_cast<double>(total);
    k.push_back(degree);
    logK.push_back(std::log(static_cast<double>(degree)));
    logCcdf.push_back(std::log(ccdf));
    remaining -= count;
  }

  const LineFit power = leastSquares(logK, logCcdf);
  const LineFit expo = leastSquares(k, logCcdf);
  ShapeFit fit;
  fit.points = support.size();
  fit.powerLawExponent = std::abs(power.slope) + 1.0;
  fit.powerLawR2 = power.r2;
  fit.exponentialRate = -expo.slope;
  fit.exponentialR2 = expo.r2;
  return fit;
}

}  // namespace bigen
