#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bigen/bigraph.hpp"
#include "bigen/params.hpp"

namespace bigen {

// ---------------------------------------------------------------------------
// Measured quantities
// ---------------------------------------------------------------------------

struct DegreeHistogram {
  Modality modality = Modality::User;
  std::map<std::uint32_t, std::uint64_t> counts;  // degree -> node count
  std::uint64_t nodes = 0;
  double mean = 0;    // <k>
  double meanSq = 0;  // <k^2>
};

DegreeHistogram degreeHistogram(const Bigraph& g, Modality m);
// Builds a histogram (with moments) from explicit counts.
DegreeHistogram histogramFromCounts(Modality m,
                                    std::map<std::uint32_t, std::uint64_t> counts);

// Reusable scratch for distance-2/3 expansions. One instance per thread.
class NeighborhoodScanner {
 public:
  explicit NeighborhoodScanner(const Bigraph& g);

  // Distinct nodes at distance exactly 2 from `j`.
  std::size_t secondNeighborCount(NodeRef j);
  // Number of length-2 walks leaving j through a neighbor, sum of (k_i - 1).
  std::uint64_t walkBound(NodeRef j) const;
  // 1 - |N2| / sum(k_i - 1); nullopt when the denominator is zero.
  std::optional<double> blcc(NodeRef j);
  // (distinct users sharing an item with j, distinct items adjacent to them).
  std::pair<std::size_t, std::size_t> similarity(std::uint32_t user);

 private:
  std::uint32_t nextStamp(std::size_t side);

  const Bigraph& g_;
  std::vector<std::uint32_t> marks_[2];
  std::uint32_t stamp_[2] = {0, 0};
};

std::optional<double> blcc(const Bigraph& g, NodeRef j);

struct BlccReport {
  // Per node, indexed by NodeRef::index within each modality.
  std::vector<std::optional<double>> users;
  std::vector<std::optional<double>> items;
  std::optional<double> meanUser;  // over defined values
  std::optional<double> meanItem;
  std::size_t definedUser = 0;
  std::size_t definedItem = 0;

  std::size_t definedCount() const { return definedUser + definedItem; }
};

BlccReport blccReport(const Bigraph& g);

// Mean BLCC over a modality, either exact or over a uniform sample (without
// replacement) of `sampleSize` nodes.
struct BlccMean {
  std::optional<double> mean;
  std::size_t defined = 0;
  std::size_t examined = 0;
  bool sampled = false;
};
BlccMean blccMean(const Bigraph& g, Modality m);
BlccMean blccMeanSampled(const Bigraph& g, Modality m, std::size_t sampleSize, Rng& rng);

struct SecondNeighborStats {
  double realMean = 0;
  double theoreticMean = 0;
  std::optional<double> ratio;  // absent when theoreticMean == 0
};

// Real mean of |N2| over `m` against <a>(<b^2>/<b> - 1), where a is the
// queried modality's degree and b the opposite one's.
SecondNeighborStats secondNeighborStats(const Bigraph& g, Modality m);

// <k^2>/<k> over all nodes of both modalities. Throws on an edgeless graph.
double neighborExpectedDegree(const Bigraph& g);

// Exact sum of k and sum of k^2 over all nodes; their quotient equals the
// mean degree seen from a uniform edge endpoint.
struct DegreeSums {
  std::uint64_t sum = 0;
  std::uint64_t sumSq = 0;
  std::uint64_t nodes = 0;
};
DegreeSums degreeSums(const Bigraph& g);

struct Similarity {
  std::size_t similarUsers = 0;
  std::size_t neighborItems = 0;
  bool operator==(const Similarity&) const = default;
};

Similarity similarityNeighborhood(const Bigraph& g, std::uint32_t user);

struct NeighborhoodReport {
  double meanSimilarUsers = 0;
  double meanNeighborItems = 0;
  std::size_t examined = 0;
  bool sampled = false;
  std::vector<Similarity> perUser;  // filled only on request (exact mode)
};

// Means over all users; users with empty neighborhoods count as zero.
NeighborhoodReport neighborhoodReport(const Bigraph& g, bool keepPerUser = false);
NeighborhoodReport neighborhoodReportSampled(const Bigraph& g, std::size_t sampleSize,
                                             Rng& rng);

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

// Probability that an item-originated edge lands on a user of degree k at
// iteration t: beta/(p t) + (1-beta) k/(eta t).
double combinedKernel(double k, double t, const GeneratorParams& params);

// Same mixture with the actual population sizes in place of p t and eta t.
double attachmentProbability(double k, std::size_t nodeCount, std::size_t edgeCount,
                             double preferential);

// Normalized user-degree density on k >= u from the continuum solution:
//   a = eta / ((1-p)(1-beta) v),  c = beta eta + p(1-beta) u,
//   P(k) = a p (1-beta) / c * ((beta eta + p(1-beta) k) / c)^(-a-1).
// Requires beta < 1, 0 < p < 1, k >= u.
double theoreticalPdf(double k, const GeneratorParams& params);
// Power-law exponent of theoreticalPdf at beta = 0: eta/((1-p) v) + 1.
double theoreticalPowerLawExponent(const GeneratorParams& params);
// beta -> 1 limit: lambda exp(-lambda (k - u)), lambda = p / ((1-p) v).
double exponentialLimitPdf(double k, const GeneratorParams& params);
double exponentialLimitRate(const GeneratorParams& params);

struct ClusteringPair {
  double f = 0;  // unipartite LCC estimate 2c / (<k>^2 - <k>)
  double g = 0;  // BLCC estimate 2c / (<k^2> - <k>)
};

// Requires kMean > 1 and kSqMean >= kMean^2.
ClusteringPair fcGc(double c, double kMean, double kSqMean);

// ---------------------------------------------------------------------------
// Distribution shape
// ---------------------------------------------------------------------------

struct ShapeFit {
  double powerLawExponent = 0;  // |slope of log CCDF vs log k| + 1
  double powerLawR2 = 0;
  double exponentialRate = 0;   // -(slope of log CCDF vs k)
  double exponentialR2 = 0;
  std::size_t points = 0;
};

inline constexpr std::size_t kMinFitSupport = 10;

class InsufficientSupportError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Least-squares fits of the empirical CCDF P(K >= k), one point per distinct
// positive degree. Throws InsufficientSupportError with fewer than
// kMinFitSupport distinct positive degrees.
ShapeFit fitDistributionShape(const DegreeHistogram& h);

}  // namespace bigen
