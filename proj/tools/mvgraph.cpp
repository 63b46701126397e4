// mvgraph: command line front end for generating data, building graphs,
// denoising and evaluating manifold-valued signals.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numerical or
// domain failure (including injectivity violations).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mvg/calculus.hpp"
#include "mvg/errors.hpp"
#include "mvg/graph.hpp"
#include "mvg/io.hpp"
#include "mvg/recipe.hpp"
#include "mvg/solvers.hpp"
#include "mvg/synthetics.hpp"

using namespace mvg;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::pair<int, int> shape2(const std::vector<int>& shape, const std::string& kind) {
  if (shape.size() != 2) throw ConfigError(kind + " needs --shape HEIGHT WIDTH");
  return {shape[0], shape[1]};
}

int cmdGenerate(const std::string& kind, const std::vector<int>& shape, const std::string& out,
                const std::string& positions) {
  for (int s : shape)
    if (s < 1) throw ConfigError("--shape entries must be positive");
  if (kind == "spd-sphere") {
    if (shape.size() != 1) throw ConfigError("spd-sphere needs --shape N");
    if (shape[0] < 12) throw ConfigError("spd-sphere needs at least 12 points");
    const auto data = genSpdOnSphere(shape[0]);
    saveMvd(out, data.f);
    savePositions(positions.empty() ? out + ".positions.tsv" : positions, data.positions);
    return 0;
  }
  const auto [h, w] = shape2(shape, kind);
  if (kind == "s2whirl") {
    if (h < 8 || w < 8) throw ConfigError("s2whirl needs a shape of at least 8 x 8");
    saveMvd(out, genS2Whirl(h, w));
  } else if (kind == "phase") {
    saveMvd(out, genPhaseImage(h, w));
  } else if (kind == "spd-grid") {
    if (h < 8 || w < 8) throw ConfigError("spd-grid needs a shape of at least 8 x 8");
    saveMvd(out, genSpdGrid(h, w));
  } else {
    throw ConfigError("unknown --kind " + kind);
  }
  return 0;
}

int cmdDenoise(const std::string& in, const std::string& graphPath, const SolverConfig& cfg,
               const std::string& trace, const std::string& out) {
  const VertexFunction f0 = loadMvd(in);
  const WeightedGraph g = loadEdgeList(graphPath);
  if (g.numVertices() != f0.size())
    throw ConfigError("graph and data disagree on the vertex count");
  SolverConfig run = cfg;
  run.recordEnergy = !trace.empty();
  const auto result = solve(g, f0, run);
  saveMvd(out, result.f);
  const auto& rep = result.report;
  if (!trace.empty()) {
    std::ofstream os(trace);
    if (!os) throw IoError("cannot open " + trace + " for writing");
    os << "iter,energy,avg_rel_change\n";
    for (std::size_t i = 0; i < rep.energyTrace.size(); ++i)
      os << i << ',' << fmt(rep.energyTrace[i]) << ','
         << fmt(i == 0 ? 0.0 : rep.changeTrace[i - 1]) << '\n';
  }
  std::cout << "iterations=" << rep.iterations << " stop=" << toString(rep.reason)
            << " avg_rel_change=" << fmt(rep.finalChange)
            << " residual_max=" << fmt(rep.residualMaxNorm);
  if (rep.backoffs) std::cout << " backoffs=" << rep.backoffs;
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Denoising and smoothing of manifold-valued data on weighted graphs"};
  app.require_subcommand(1);

  // generate
  std::string genKind, genOut, genPositions;
  std::vector<int> genShape;
  auto* generate = app.add_subcommand("generate", "Write a synthetic data set");
  generate->add_option("--kind", genKind, "s2whirl, phase, spd-sphere or spd-grid")
      ->required()
      ->check(CLI::IsMember({"s2whirl", "phase", "spd-sphere", "spd-grid"}));
  generate->add_option("--shape", genShape, "Grid extents or point count")->required();
  generate->add_option("--out", genOut, "Output .mvd file")->required();
  generate->add_option("--positions", genPositions, "Positions TSV (spd-sphere)");

  // noise
  std::string noiseIn, noiseOut;
  double noiseSigma = 0;
  std::uint64_t noiseSeed = 0;
  auto* noise = app.add_subcommand("noise", "Add Riemannian Gaussian noise");
  noise->add_option("--in", noiseIn)->required();
  noise->add_option("--sigma", noiseSigma)->required()->check(CLI::NonNegativeNumber);
  noise->add_option("--seed", noiseSeed);
  noise->add_option("--out", noiseOut)->required();

  // build-graph
  std::string bgKind, bgIn, bgOut, bgPositions, bgMetric = "arc", bgWeights = "inverse-square";
  KnnOptions knn;
  double bgEps = 0;
  auto* build = app.add_subcommand("build-graph", "Construct a weighted graph");
  build->add_option("--kind", bgKind)
      ->required()
      ->check(CLI::IsMember({"grid4", "grid8", "knn-patch", "eps-ball"}));
  build->add_option("--in", bgIn, "Data the graph is built for")->required();
  build->add_option("--out", bgOut, "Edge list TSV")->required();
  build->add_option("--k", knn.k, "Neighbors per vertex (knn-patch)");
  build->add_option("--patch", knn.patchRadius, "Patch radius s (knn-patch)");
  build->add_option("--window", knn.window, "Search window half-width, 0 = whole image");
  build->add_option("--eps", bgEps, "Ball radius (eps-ball)");
  build->add_option("--positions", bgPositions, "Positions TSV (eps-ball)");
  build->add_option("--metric", bgMetric)->check(CLI::IsMember({"arc", "euclidean"}));
  build->add_option("--weights", bgWeights)->check(CLI::IsMember({"inverse-square", "unit"}));

  // denoise
  std::string dnIn, dnGraph, dnOut, dnTrace, dnModel = "aniso", dnScheme = "explicit";
  SolverConfig dn;
  dn.stopTol = 0;
  auto* denoise = app.add_subcommand("denoise", "Minimize the denoising energy");
  denoise->add_option("--in", dnIn, "Noisy data")->required();
  denoise->add_option("--graph", dnGraph, "Edge list TSV")->required();
  denoise->add_option("--out", dnOut)->required();
  denoise->add_option("--model", dnModel)->check(CLI::IsMember({"aniso", "iso"}));
  denoise->add_option("--p", dn.p)->required();
  denoise->add_option("--lambda", dn.lambda)->required();
  denoise->add_option("--scheme", dnScheme)->check(CLI::IsMember({"explicit", "jacobi"}));
  denoise->add_option("--dt", dn.dt, "Time step (explicit)");
  denoise->add_option("--eps-smooth", dn.epsSmooth);
  denoise->add_option("--max-iters", dn.maxIters);
  denoise->add_option("--tol", dn.stopTol, "Stop when the average change drops below");
  denoise->add_option("--trace", dnTrace, "CSV with energy and change per iteration");
  denoise->add_flag("--backoff", dn.backoff, "Halve dt for sweeps that leave the domain");

  // eval
  std::string evA, evB;
  auto* eval = app.add_subcommand("eval", "Mean squared geodesic error between two files");
  eval->add_option("--a", evA)->required();
  eval->add_option("--b", evB)->required();

  // export
  std::string exIn, exOut, exFormat, exPositions;
  auto* exportCmd = app.add_subcommand("export", "Write CSV or PLY");
  exportCmd->add_option("--in", exIn)->required();
  exportCmd->add_option("--format", exFormat)->required()->check(CLI::IsMember({"csv", "ply"}));
  exportCmd->add_option("--out", exOut)->required();
  exportCmd->add_option("--positions", exPositions, "Positions TSV for PLY output");

  // import
  std::string imIn, imOut, imManifold;
  int imParam = 0;
  std::vector<int> imShape;
  auto* importCmd = app.add_subcommand("import", "Read a CSV into an .mvd file");
  importCmd->add_option("--in", imIn)->required();
  importCmd->add_option("--manifold", imManifold)
      ->required()
      ->check(CLI::IsMember({"euclidean", "circle", "sphere2", "spd"}));
  importCmd->add_option("--param", imParam, "m for euclidean (default: column count), n for spd");
  importCmd->add_option("--shape", imShape);
  importCmd->add_option("--out", imOut)->required();

  // recipe
  std::string rcFile, rcOutDir;
  auto* recipe = app.add_subcommand("recipe", "Run an experiment recipe");
  recipe->add_option("--file", rcFile)->required();
  recipe->add_option("--out-dir", rcOutDir, "Save clean, noisy and denoised data here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) return cmdGenerate(genKind, genShape, genOut, genPositions);

    if (*noise) {
      const VertexFunction f = loadMvd(noiseIn);
      NoiseSpec spec;
      spec.kind = f.manifold.kind() == ManifoldKind::Circle ? NoiseKind::WrappedGaussian
                                                             : NoiseKind::RiemannianGaussian;
      spec.sigma = noiseSigma;
      spec.seed = noiseSeed;
      saveMvd(noiseOut, addNoise(f, spec));
      return 0;
    }

    if (*build) {
      const VertexFunction f = loadMvd(bgIn);
      WeightedGraph g;
      if (bgKind == "grid4" || bgKind == "grid8") {
        const auto [h, w] = f.gridSize();
        g = gridGraph(h, w, bgKind == "grid4" ? 4 : 8, f.mask);
      } else if (bgKind == "knn-patch") {
        if (f.shape.size() != 2) throw ConfigError("knn-patch needs grid data");
        g = knnPatchGraph(f, knn);
      } else {
        if (bgPositions.empty()) throw ConfigError("eps-ball needs --positions");
        if (!(bgEps > 0)) throw ConfigError("eps-ball needs --eps > 0");
        const Eigen::MatrixXd pos = loadPositions(bgPositions);
        if (pos.cols() != f.size()) throw ConfigError("positions and data disagree in size");
        g = epsilonBallGraph(pos, bgEps,
                             bgMetric == "arc" ? PositionMetric::Arc : PositionMetric::Euclidean,
                             bgWeights == "unit" ? WeightRule::Unit : WeightRule::InverseSquare,
                             f.mask);
        const auto isolated = g.isolatedVertices();
        if (!isolated.empty())
          std::cerr << "warning: " << isolated.size() << " isolated vertices\n";
      }
      saveEdgeList(bgOut, g);
      return 0;
    }

    if (*denoise) {
      dn.model = parseModel(dnModel);
      dn.scheme = parseScheme(dnScheme);
      dn.validate();
      return cmdDenoise(dnIn, dnGraph, dn, dnTrace, dnOut);
    }

    if (*eval) {
      const VertexFunction a = loadMvd(evA), b = loadMvd(evB);
      if (!a.sameDomain(b)) throw ConfigError("files hold different manifolds or sizes");
      std::cout << "mse=" << fmt(mse(a, b)) << '\n';
      return 0;
    }

    if (*exportCmd) {
      const VertexFunction f = loadMvd(exIn);
      if (exFormat == "csv") {
        exportCsv(exOut, f);
      } else {
        std::optional<Eigen::MatrixXd> pos;
        if (!exPositions.empty()) pos = loadPositions(exPositions);
        exportPly(exOut, f, pos);
      }
      return 0;
    }

    if (*importCmd) {
      saveMvd(imOut, importCsv(imIn, imManifold, imParam, imShape));
      return 0;
    }

    if (*recipe) {
      runRecipe(rcFile, std::cout, rcOutDir);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InjectivityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
