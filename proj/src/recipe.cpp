#include "mvg/recipe.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "json.hpp"

#include "mvg/errors.hpp"
#include "mvg/graph.hpp"
#include "mvg/io.hpp"
#include "mvg/solvers.hpp"
#include "mvg/synthetics.hpp"

namespace mvg {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Dataset {
  VertexFunction clean;
  Eigen::MatrixXd positions;
};

Dataset makeData(const json& spec) {
  const std::string kind = spec.at("kind");
  const auto shape = spec.at("shape").get<std::vector<int>>();
  auto grid = [&]() -> std::pair<int, int> {
    if (shape.size() != 2) throw ConfigError(kind + " data needs a 2-D shape");
    return {shape[0], shape[1]};
  };
  if (kind == "s2whirl") {
    auto [h, w] = grid();
    return {genS2Whirl(h, w), {}};
  }
  if (kind == "phase") {
    auto [h, w] = grid();
    return {genPhaseImage(h, w), {}};
  }
  if (kind == "spd-grid") {
    auto [h, w] = grid();
    return {genSpdGrid(h, w), {}};
  }
  if (kind == "spd-sphere") {
    if (shape.size() != 1) throw ConfigError("spd-sphere data needs a 1-D shape");
    auto d = genSpdOnSphere(shape[0]);
    return {std::move(d.f), std::move(d.positions)};
  }
  throw ConfigError("unknown data kind '" + kind + "'");
}

WeightedGraph makeGraph(const json& spec, const Dataset& data, const VertexFunction& noisy) {
  const std::string kind = spec.at("kind");
  if (kind == "grid4" || kind == "grid8") {
    const auto [h, w] = noisy.gridSize();
    return gridGraph(h, w, kind == "grid4" ? 4 : 8, noisy.mask);
  }
  if (kind == "knn-patch") {
    KnnOptions opts;
    opts.k = spec.value("k", opts.k);
    opts.patchRadius = spec.value("patch", opts.patchRadius);
    opts.window = spec.value("window", opts.window);
    return knnPatchGraph(noisy, opts);
  }
  if (kind == "eps-ball") {
    if (data.positions.size() == 0) throw ConfigError("eps-ball graphs need positions");
    const std::string metric = spec.value("metric", "arc");
    const std::string weights = spec.value("weights", "inverse-square");
    return epsilonBallGraph(data.positions, spec.at("eps").get<double>(),
                            metric == "arc" ? PositionMetric::Arc : PositionMetric::Euclidean,
                            weights == "unit" ? WeightRule::Unit : WeightRule::InverseSquare,
                            noisy.mask);
  }
  throw ConfigError("unknown graph kind '" + kind + "'");
}

SolverConfig makeConfig(const json& run) {
  SolverConfig cfg;
  cfg.model = parseModel(run.value("model", "aniso"));
  cfg.scheme = parseScheme(run.value("scheme", "explicit"));
  cfg.p = run.at("p").get<double>();
  cfg.lambda = run.at("lambda").get<double>();
  cfg.dt = run.value("dt", cfg.dt);
  cfg.epsSmooth = run.value("eps_smooth", cfg.epsSmooth);
  cfg.maxIters = run.value("max_iters", cfg.maxIters);
  cfg.stopTol = run.value("tol", cfg.stopTol);
  cfg.backoff = run.value("backoff", false);
  cfg.validate();
  return cfg;
}

}  // namespace

std::vector<RecipeLine> runRecipe(const std::string& path, std::ostream& out,
                                  const std::string& outDir) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open recipe " + path);
  json recipe;
  try {
    recipe = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("malformed recipe " + path + ": " + e.what());
  }

  std::vector<RecipeLine> lines;
  try {
    const std::string name = recipe.value("name", std::filesystem::path(path).stem().string());
    const Dataset data = makeData(recipe.at("data"));
    VertexFunction noisy = data.clean;
    if (recipe.contains("noise")) {
      const auto& n = recipe["noise"];
      NoiseSpec spec;
      spec.sigma = n.at("sigma").get<double>();
      spec.seed = n.value("seed", std::uint64_t{0});
      noisy = addNoise(data.clean, spec);
    }
    out << name << " noisy mse=" << fmt(mse(noisy, data.clean)) << '\n';
    if (!outDir.empty()) {
      std::filesystem::create_directories(outDir);
      saveMvd(outDir + "/" + name + "-clean.mvd", data.clean);
      saveMvd(outDir + "/" + name + "-noisy.mvd", noisy);
    }

    const json defaultGraph = recipe.value("graph", json::object());
    std::string cachedKey;
    WeightedGraph graph;
    for (const auto& run : recipe.at("runs")) {
      const json graphSpec = run.value("graph", defaultGraph);
      if (graphSpec.dump() != cachedKey) {
        graph = makeGraph(graphSpec, data, noisy);
        cachedKey = graphSpec.dump();
      }
      const SolverConfig cfg = makeConfig(run);
      const std::string label = run.at("label");
      auto result = solve(graph, noisy, cfg);
      RecipeLine line{label, mse(result.f, data.clean), result.report.iterations};
      out << name << ' ' << label << " mse=" << fmt(line.mse)
          << " iterations=" << line.iterations << " stop=" << toString(result.report.reason)
          << '\n';
      if (!outDir.empty()) saveMvd(outDir + "/" + name + "-" + label + ".mvd", result.f);
      lines.push_back(line);
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad recipe " + path + ": " + e.what());
  }
  return lines;
}

}  // namespace mvg
