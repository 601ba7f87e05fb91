#include "bigen/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bigen/generator.hpp"
#include "bigen/io.hpp"
#include "bigen/server.hpp"
#include "bigen/sweep.hpp"

namespace bigen {

namespace {

using nlohmann::json;

struct CommonFormat {
  std::string delimiter = "tab";
  bool header = false;
  std::size_t userColumn = 0;
  std::size_t itemColumn = 1;

  EdgeListFormat get() const {
    EdgeListFormat f;
    f.delimiter = parseDelimiter(delimiter);
    f.header = header;
    f.userColumn = userColumn;
    f.itemColumn = itemColumn;
    return f;
  }
};

void addParamFlags(CLI::App* app, GeneratorParams& p) {
  app->add_option("--m", p.m, "initial user-item pairs");
  app->add_option("--iters", p.iterations, "iterations T");
  app->add_option("--p", p.p, "probability that a new node is a user");
  app->add_option("--u", p.u, "edges per new user");
  app->add_option("--v", p.v, "edges per new item");
  app->add_option("--alpha", p.alpha, "preferential probability, user side");
  app->add_option("--beta", p.beta, "preferential probability, item side");
  app->add_option("--bounce", p.bounce, "bounce probability b");
}

void addFormatFlags(CLI::App* app, CommonFormat& f) {
  app->add_option("--format", f.delimiter, "edge list delimiter")
      ->check(CLI::IsMember({"tab", "comma", "whitespace"}));
  app->add_flag("--header", f.header, "edge list has a header line");
  app->add_option("--user-column", f.userColumn, "0-based user column");
  app->add_option("--item-column", f.itemColumn, "0-based item column");
}

void printFieldErrors(std::ostream& err, const ParamError& e) {
  if (e.errors.empty()) {
    err << "error: " << e.what() << "\n";
    return;
  }
  for (const auto& f : e.errors) err << "error: " << f.field << ": " << f.message << "\n";
}

std::ostream* openOut(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return &fallback;
  file.open(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  return &file;
}

int doGenerate(const GeneratorParams& params, std::uint64_t seed, const std::string& outPath,
               const CommonFormat& fmtFlags, std::ostream& out) {
  ensureValid(params);
  const EdgeListFormat fmt = fmtFlags.get();
  const auto start = std::chrono::steady_clock::now();
  RunState state(params, seed);
  state.runToEnd();
  const auto genDone = std::chrono::steady_clock::now();

  std::ofstream file;
  std::ostream* sink = openOut(outPath, file, out);
  saveEdgeList(state.graph(), *sink, fmt);
  if (file.is_open()) {
    file.close();
    if (!file) throw IoError("write to '" + outPath + "' failed");
  }
  const auto end = std::chrono::steady_clock::now();
  using ms = std::chrono::duration<double, std::milli>;

  if (sink == &out) return kExitOk;  // edge list went to stdout, no summary
  const Bigraph& g = state.graph();
  json summary = {{"format", kReportFormatTag},
                  {"format_version", kReportFormatVersion},
                  {"out", outPath},
                  {"seed", seed},
                  {"t", state.t()},
                  {"params", toJson(params)},
                  {"counts",
                   {{"users", g.userCount()}, {"items", g.itemCount()}, {"edges", g.edgeCount()}}},
                  {"realized_edges", state.realizedEdges()},
                  {"fallback_edges", state.fallbackEdges()},
                  {"shortfall_iterations", state.shortfallIterations()},
                  {"runtime_ms",
                   {{"generate", ms(genDone - start).count()}, {"write", ms(end - genDone).count()}}}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int doAnalyze(const std::string& inPath, const CommonFormat& fmtFlags,
              const std::string& modality, bool perNode, const std::string& outPath,
              const std::string& statsPath, std::ostream& out) {
  const EdgeListFormat fmt = fmtFlags.get();
  std::ifstream in;
  std::istream* src = &std::cin;
  if (inPath != "-") {
    in.open(inPath, std::ios::binary);
    if (!in) throw IoError("cannot open '" + inPath + "'");
    src = &in;
  }
  LoadedGraph loaded = loadEdgeList(*src, fmt);
  if (in.is_open() && in.bad()) throw IoError("read from '" + inPath + "' failed");

  AnalysisOptions opts;
  opts.secondNeighborModality = parseModality(modality);
  opts.perNode = perNode;
  json report = analysisReport(loaded.graph, opts);
  report["source"] = {{"path", inPath}, {"duplicate_lines", loaded.duplicateLines}};

  if (!statsPath.empty()) {
    const std::string name = inPath == "-" ? "stdin" : std::filesystem::path(inPath).stem().string();
    std::ofstream csv(statsPath, std::ios::binary);
    if (!csv) throw IoError("cannot open '" + statsPath + "' for writing");
    writeStatsCsv(csv, {datasetStats(loaded.graph, name, opts.secondNeighborModality)});
    if (!csv) throw IoError("write to '" + statsPath + "' failed");
  }

  std::ofstream file;
  std::ostream* sink = openOut(outPath, file, out);
  *sink << report.dump(2) << "\n";
  if (file.is_open()) {
    file.close();
    if (!file) throw IoError("write to '" + outPath + "' failed");
  }
  return kExitOk;
}

std::vector<std::string> splitCommas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bipartite random graph generator and analysis toolkit", "bigen"};
  app.require_subcommand(1);

  GeneratorParams params;
  std::uint64_t seed = 1;
  std::string outPath;
  CommonFormat fmt;

  auto* gen = app.add_subcommand("generate", "grow a bigraph and write its edge list");
  addParamFlags(gen, params);
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--out", outPath, "edge list path ('-' for stdout)")->required();
  addFormatFlags(gen, fmt);

  std::string inPath;
  std::string modality = "user";
  bool perNode = false;
  std::string statsPath;
  auto* analyze = app.add_subcommand("analyze", "report statistics of an edge list");
  analyze->add_option("input", inPath, "edge list path ('-' for stdin)")->required();
  addFormatFlags(analyze, fmt);
  analyze->add_option("--modality", modality, "modality for second-neighbor stats")
      ->check(CLI::IsMember({"user", "item"}));
  analyze->add_flag("--per-node", perNode, "include per-node BLCC and degrees");
  analyze->add_option("--out", outPath, "report path (default stdout)");
  analyze->add_option("--stats-csv", statsPath, "also write a dataset stats CSV row");

  SweepSpec spec;
  std::vector<std::string> axisTexts;
  std::string measures;
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid and write CSV");
  addParamFlags(sweep, spec.base);
  sweep->add_option("--axis", axisTexts, "name=v1,v2,... (one or two)")->required();
  sweep->add_option("--seeds-per-cell", spec.seedsPerCell, "runs per grid cell");
  sweep->add_option("--measures", measures,
                    "comma list of degree_fit, blcc_mean, similar_users, neighbor_items");
  sweep->add_option("--seed", spec.masterSeed, "master seed");
  sweep->add_option("--threads", spec.threads, "worker threads (0: all cores)");
  sweep->add_flag("--growth", spec.growth, "sample neighborhood measures every T/20");
  sweep->add_option("--out", outPath, "CSV path (default stdout)");

  ServerOptions serverOpts;
  auto* serve = app.add_subcommand("serve", "run the websocket steering service");
  serve->add_option("--port", serverOpts.port, "TCP port");
  serve->add_option("--address", serverOpts.address, "bind address");
  serve->add_option("--max-sessions", serverOpts.maxSessions, "concurrent session limit")
      ->check(CLI::PositiveNumber);
  serve->add_option("--snapshot-every", serverOpts.session.snapshotEvery,
                    "iterations between periodic snapshots")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (app.get_subcommands().empty()) err << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return doGenerate(params, seed, outPath, fmt, out);
    if (analyze->parsed()) {
      return doAnalyze(inPath, fmt, modality, perNode, outPath, statsPath, out);
    }
    if (sweep->parsed()) {
      for (const auto& a : axisTexts) spec.axes.push_back(parseAxis(a));
      if (!measures.empty()) {
        spec.measures.clear();
        for (const auto& name : splitCommas(measures)) spec.measures.push_back(parseMeasure(name));
      }
      validate(spec);
      std::ofstream file;
      std::ostream* sink = openOut(outPath, file, out);
      SweepResult result = runSweep(spec);
      writeSweepCsv(*sink, result);
      if (file.is_open()) {
        file.close();
        if (!file) throw IoError("write to '" + outPath + "' failed");
      }
      return kExitOk;
    }
    if (serve->parsed()) {
      SteeringServer server(serverOpts);
      server.start();
      err << "listening on ws://" << serverOpts.address << ":" << server.port() << "\n";
      server.runUntilSignal();
      return kExitOk;
    }
  } catch (const ParamError& e) {
    printFieldErrors(err, e);
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::system_error& e) {
    // bind failures and the like
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace bigen
