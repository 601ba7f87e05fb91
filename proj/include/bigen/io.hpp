#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bigen/analytics.hpp"
#include "bigen/bigraph.hpp"
#include "bigen/params.hpp"

#include "json.hpp"

namespace bigen {

inline constexpr int kReportFormatVersion = 1;
inline constexpr std::string_view kReportFormatTag = "bigen-report";

enum class Delimiter { Tab, Comma, Whitespace };

Delimiter parseDelimiter(std::string_view text);  // "tab", "comma", "whitespace"

struct EdgeListFormat {
  Delimiter delimiter = Delimiter::Tab;
  bool header = false;
  std::size_t userColumn = 0;
  std::size_t itemColumn = 1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedGraph {
  Bigraph graph;
  std::vector<std::string> userLabels;  // dense index -> token
  std::vector<std::string> itemLabels;
  std::uint64_t duplicateLines = 0;
};

// Streams `in` line by line. Labels get dense indices in order of first
// appearance, independently per column. Blank lines and lines starting with
// '#' are skipped. Throws ParseError (1-based line number) on a malformed
// line, std::invalid_argument on a bad format.
LoadedGraph loadEdgeList(std::istream& in, const EdgeListFormat& fmt = {});
LoadedGraph loadEdgeListFile(const std::string& path, const EdgeListFormat& fmt = {});

// One line per edge ordered by user index then item index. Writes labels
// when given, otherwise the dense indices. Whitespace format uses a single
// space. Throws IoError when the sink fails.
void saveEdgeList(const Bigraph& g, std::ostream& out, const EdgeListFormat& fmt = {},
                  const std::vector<std::string>* userLabels = nullptr,
                  const std::vector<std::string>* itemLabels = nullptr);
void saveEdgeListFile(const Bigraph& g, const std::string& path,
                      const EdgeListFormat& fmt = {});

struct DatasetRow {
  std::string name;
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t edges = 0;
  double realSecondNeighbors = 0;
  double theoreticSecondNeighbors = 0;
  std::optional<double> ratio;
};

DatasetRow datasetStats(const Bigraph& g, const std::string& name,
                        Modality modality = Modality::User);

inline constexpr std::string_view kStatsCsvHeader =
    "name,users,items,edges,real_n2,theoretic_n2,ratio";
void writeStatsCsv(std::ostream& out, const std::vector<DatasetRow>& rows);

// --- JSON -------------------------------------------------------------------

nlohmann::json toJson(const GeneratorParams& params);
// Reads a full parameter object; missing fields keep their defaults.
GeneratorParams paramsFromJson(const nlohmann::json& j);
// Throws ParamError on unknown fields or values of the wrong type.
ParamPatch patchFromJson(const nlohmann::json& j);
nlohmann::json toJson(const ParamPatch& patch);

nlohmann::json toJson(const DegreeHistogram& h);
nlohmann::json toJson(const ShapeFit& fit);
nlohmann::json toJson(const DatasetRow& row);

struct AnalysisOptions {
  Modality secondNeighborModality = Modality::User;
  bool perNode = false;
};

// Report JSON: {format, format_version, params, t, counts, histograms, fits,
// blcc, second_neighbors, neighborhood[, per_node]}. `params` and `t` are
// null for ingested graphs.
nlohmann::json analysisReport(const Bigraph& g, const AnalysisOptions& opts,
                              const GeneratorParams* params = nullptr,
                              std::optional<std::uint64_t> t = std::nullopt);

}  // namespace bigen
