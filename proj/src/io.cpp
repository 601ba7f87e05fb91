#include "bigen/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace bigen {

using nlohmann::json;

Delimiter parseDelimiter(std::string_view text) {
  if (text == "tab") return Delimiter::Tab;
  if (text == "comma") return Delimiter::Comma;
  if (text == "whitespace") return Delimiter::Whitespace;
  throw std::invalid_argument("unknown delimiter '" + std::string(text) +
                              "' (expected tab, comma or whitespace)");
}

ParseError::ParseError(std::size_t l, const std::string& what)
    : std::runtime_error("line " + std::to_string(l) + ": " + what), line(l) {}

namespace {

std::vector<std::string_view> splitFields(std::string_view line, Delimiter d) {
  std::vector<std::string_view> fields;
  if (d == Delimiter::Whitespace) {
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos == line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
      fields.push_back(line.substr(pos, end - pos));
      pos = end;
    }
    return fields;
  }
  const char sep = d == Delimiter::Tab ? '\t' : ',';
  std::size_t pos = 0;
  for (;;) {
    const std::size_t end = line.find(sep, pos);
    fields.push_back(line.substr(pos, end == std::string_view::npos ? end : end - pos));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return fields;
}

char separator(Delimiter d) {
  switch (d) {
    case Delimiter::Tab: return '\t';
    case Delimiter::Comma: return ',';
    case Delimiter::Whitespace: return ' ';
  }
  return '\t';
}

class LabelIndex {
 public:
  std::uint32_t intern(std::string_view token, Bigraph& g, Modality m) {
    auto it = index_.find(std::string(token));
    if (it != index_.end()) return it->second;
    const NodeRef node = g.addNode(m);
    labels_.emplace_back(token);
    index_.emplace(labels_.back(), node.index);
    return node.index;
  }
  std::vector<std::string> release() { return std::move(labels_); }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> labels_;
};

}  // namespace

LoadedGraph loadEdgeList(std::istream& in, const EdgeListFormat& fmt) {
  if (fmt.userColumn == fmt.itemColumn) {
    throw std::invalid_argument("user and item columns must differ");
  }
  LoadedGraph loaded;
  LabelIndex users, items;
  std::unordered_set<std::uint64_t> seen;
  const std::size_t needed = std::max(fmt.userColumn, fmt.itemColumn) + 1;
  bool headerPending = fmt.header;

  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    if (headerPending) {
      headerPending = false;
      continue;
    }
    const auto fields = splitFields(view, fmt.delimiter);
    if (fields.size() < needed) {
      throw ParseError(lineNo, "expected at least " + std::to_string(needed) +
                                   " fields, found " + std::to_string(fields.size()));
    }
    const auto userToken = fields[fmt.userColumn];
    const auto itemToken = fields[fmt.itemColumn];
    if (userToken.empty() || itemToken.empty()) throw ParseError(lineNo, "empty node label");

    const std::uint32_t u = users.intern(userToken, loaded.graph, Modality::User);
    const std::uint32_t i = items.intern(itemToken, loaded.graph, Modality::Item);
    const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | i;
    if (!seen.insert(key).second) {
      ++loaded.duplicateLines;
      continue;
    }
    loaded.graph.addEdge(u, i);
  }
  if (in.bad()) throw IoError("read failure after line " + std::to_string(lineNo));
  loaded.userLabels = users.release();
  loaded.itemLabels = items.release();
  return loaded;
}

LoadedGraph loadEdgeListFile(const std::string& path, const EdgeListFormat& fmt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return loadEdgeList(in, fmt);
}

void saveEdgeList(const Bigraph& g, std::ostream& out, const EdgeListFormat& fmt,
                  const std::vector<std::string>* userLabels,
                  const std::vector<std::string>* itemLabels) {
  const char sep = separator(fmt.delimiter);
  const bool userFirst = fmt.userColumn < fmt.itemColumn;
  if (fmt.header) out << (userFirst ? "user" : "item") << sep << (userFirst ? "item" : "user") << '\n';
  auto label = [](const std::vector<std::string>* labels, std::uint32_t index) {
    return labels ? (*labels)[index] : std::to_string(index);
  };
  for (const auto& [u, i] : g.sortedEdges()) {
    const std::string a = label(userLabels, u);
    const std::string b = label(itemLabels, i);
    if (userFirst) {
      out << a << sep << b << '\n';
    } else {
      out << b << sep << a << '\n';
    }
  }
  out.flush();
  if (!out) throw IoError("edge list write failed");
}

void saveEdgeListFile(const Bigraph& g, const std::string& path, const EdgeListFormat& fmt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  saveEdgeList(g, out, fmt);
  out.close();
  if (!out) throw IoError("closing '" + path + "' failed");
}

DatasetRow datasetStats(const Bigraph& g, const std::string& name, Modality modality) {
  if (g.userCount() == 0 || g.itemCount() == 0) {
    throw std::invalid_argument("dataset statistics need a nonempty graph");
  }
  const auto stats = secondNeighborStats(g, modality);
  DatasetRow row;
  row.name = name;
  row.users = g.userCount();
  row.items = g.itemCount();
  row.edges = g.edgeCount();
  row.realSecondNeighbors = stats.realMean;
  row.theoreticSecondNeighbors = stats.theoreticMean;
  row.ratio = stats.ratio;
  return row;
}

void writeStatsCsv(std::ostream& out, const std::vector<DatasetRow>& rows) {
  out << kStatsCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.name << ',' << r.users << ',' << r.items << ',' << r.edges << ','
        << r.realSecondNeighbors << ',' << r.theoreticSecondNeighbors << ',';
    if (r.ratio) out << *r.ratio;
    out << '\n';
  }
  if (!out) throw IoError("stats CSV write failed");
}

// --- JSON ---------------------------------------------------------------------

namespace {

json optionalNumber(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct FieldSpec {
  const char* name;
  const char* alias;
  bool integer;
};

constexpr FieldSpec kFields[] = {
    {"m", nullptr, true},          {"iterations", "T", true}, {"p", nullptr, false},
    {"u", nullptr, true},          {"v", nullptr, true},      {"alpha", nullptr, false},
    {"beta", nullptr, false},      {"bounce", "b", false},
};

const FieldSpec* findField(const std::string& key) {
  for (const auto& f : kFields) {
    if (key == f.name || (f.alias && key == f.alias)) return &f;
  }
  return nullptr;
}

}  // namespace

json toJson(const GeneratorParams& p) {
  return {{"m", p.m},         {"iterations", p.iterations}, {"p", p.p},
          {"u", p.u},         {"v", p.v},                   {"alpha", p.alpha},
          {"beta", p.beta},   {"bounce", p.bounce}};
}

ParamPatch patchFromJson(const json& j) {
  if (!j.is_object()) throw ParamError("patch", "must be a JSON object");
  ParamPatch patch;
  std::vector<FieldError> errors;
  for (const auto& [key, value] : j.items()) {
    const FieldSpec* field = findField(key);
    if (!field) {
      errors.push_back({key, "is not a generator parameter"});
      continue;
    }
    const std::string name = field->name;
    if (field->integer) {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
        errors.push_back({name, "must be a nonnegative integer"});
        continue;
      }
      const auto n = value.get<std::uint64_t>();
      if (name == "iterations") {
        patch.iterations = n;
      } else {
        if (n > 0xffffffffULL) {
          errors.push_back({name, "is too large"});
          continue;
        }
        const auto small = static_cast<std::uint32_t>(n);
        if (name == "m") patch.m = small;
        if (name == "u") patch.u = small;
        if (name == "v") patch.v = small;
      }
    } else {
      if (!value.is_number()) {
        errors.push_back({name, "must be a number"});
        continue;
      }
      const double x = value.get<double>();
      if (name == "p") patch.p = x;
      if (name == "alpha") patch.alpha = x;
      if (name == "beta") patch.beta = x;
      if (name == "bounce") patch.bounce = x;
    }
  }
  if (!errors.empty()) throw ParamError(std::move(errors));
  return patch;
}

json toJson(const ParamPatch& patch) {
  json j = json::object();
  if (patch.m) j["m"] = *patch.m;
  if (patch.iterations) j["iterations"] = *patch.iterations;
  if (patch.p) j["p"] = *patch.p;
  if (patch.u) j["u"] = *patch.u;
  if (patch.v) j["v"] = *patch.v;
  if (patch.alpha) j["alpha"] = *patch.alpha;
  if (patch.beta) j["beta"] = *patch.beta;
  if (patch.bounce) j["bounce"] = *patch.bounce;
  return j;
}

GeneratorParams paramsFromJson(const json& j) {
  // Intermediate states are not validated here; callers run ensureValid.
  const ParamPatch patch = patchFromJson(j);
  GeneratorParams params;
  if (patch.m) params.m = *patch.m;
  if (patch.iterations) params.iterations = *patch.iterations;
  if (patch.p) params.p = *patch.p;
  if (patch.u) params.u = *patch.u;
  if (patch.v) params.v = *patch.v;
  if (patch.alpha) params.alpha = *patch.alpha;
  if (patch.beta) params.beta = *patch.beta;
  if (patch.bounce) params.bounce = *patch.bounce;
  return params;
}

json toJson(const DegreeHistogram& h) {
  json bins = json::array();
  for (const auto& [k, c] : h.counts) bins.push_back({k, c});
  return {{"modality", label(h.modality)},
          {"nodes", h.nodes},
          {"mean", h.mean},
          {"mean_sq", h.meanSq},
          {"bins", std::move(bins)}};
}

json toJson(const ShapeFit& fit) {
  return {{"power_law_exponent", fit.powerLawExponent},
          {"power_law_r2", fit.powerLawR2},
          {"exponential_rate", fit.exponentialRate},
          {"exponential_r2", fit.exponentialR2},
          {"points", fit.points}};
}

json toJson(const DatasetRow& row) {
  return {{"name", row.name},
          {"users", row.users},
          {"items", row.items},
          {"edges", row.edges},
          {"real_n2", row.realSecondNeighbors},
          {"theoretic_n2", row.theoreticSecondNeighbors},
          {"ratio", optionalNumber(row.ratio)}};
}

json analysisReport(const Bigraph& g, const AnalysisOptions& opts,
                    const GeneratorParams* params, std::optional<std::uint64_t> t) {
  json report;
  report["format"] = kReportFormatTag;
  report["format_version"] = kReportFormatVersion;
  report["params"] = params ? toJson(*params) : json(nullptr);
  report["t"] = t ? json(*t) : json(nullptr);
  report["counts"] = {{"users", g.userCount()},
                      {"items", g.itemCount()},
                      {"edges", g.edgeCount()}};

  json histograms, fits;
  for (Modality m : {Modality::User, Modality::Item}) {
    const auto h = degreeHistogram(g, m);
    histograms[std::string(label(m))] = toJson(h);
    try {
      fits[std::string(label(m))] = toJson(fitDistributionShape(h));
    } catch (const InsufficientSupportError&) {
      fits[std::string(label(m))] = nullptr;
    }
  }
  report["histograms"] = std::move(histograms);
  report["fits"] = std::move(fits);

  const auto blcc = blccReport(g);
  report["blcc"] = {
      {"user", {{"mean", optionalNumber(blcc.meanUser)}, {"defined", blcc.definedUser}}},
      {"item", {{"mean", optionalNumber(blcc.meanItem)}, {"defined", blcc.definedItem}}},
  };

  if (g.userCount() > 0 && g.itemCount() > 0) {
    auto row = toJson(datasetStats(g, "graph", opts.secondNeighborModality));
    row["modality"] = label(opts.secondNeighborModality);
    report["second_neighbors"] = std::move(row);
  } else {
    report["second_neighbors"] = nullptr;
  }

  const auto hood = neighborhoodReport(g, opts.perNode);
  report["neighborhood"] = {{"similar_users_mean", hood.meanSimilarUsers},
                            {"neighbor_items_mean", hood.meanNeighborItems}};

  if (opts.perNode) {
    NeighborhoodScanner scanner(g);
    json nodes = json::array();
    for (Modality m : {Modality::User, Modality::Item}) {
      const auto& values = m == Modality::User ? blcc.users : blcc.items;
      for (std::uint32_t n = 0; n < g.nodeCount(m); ++n) {
        json entry = {{"modality", label(m)},
                      {"index", n},
                      {"degree", g.degree({m, n})},
                      {"second_neighbors", scanner.secondNeighborCount({m, n})},
                      {"blcc", optionalNumber(values[n])}};
        if (m == Modality::User) {
          entry["similar_users"] = hood.perUser[n].similarUsers;
          entry["neighbor_items"] = hood.perUser[n].neighborItems;
        }
        nodes.push_back(std::move(entry));
      }
    }
    report["per_node"] = std::move(nodes);
  }
  return report;
}

}  // namespace bigen
