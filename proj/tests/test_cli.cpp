#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mvg/graph.hpp"
#include "mvg/io.hpp"
#include "mvg/synthetics.hpp"

using namespace mvg;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::current_path() / "cli_scratch";

std::string at(const std::string& name) { return (kDir / name).string(); }

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

Run mvgraph(const std::string& args) {
  fs::create_directories(kDir);
  const std::string cmd = std::string("\"") + MVGRAPH_EXE + "\" " + args + " >" + at("stdout") +
                          " 2>" + at("stderr");
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(at("stdout")), slurp(at("stderr"))};
}

double parseMse(const std::string& out) {
  const auto pos = out.find("mse=");
  REQUIRE(pos != std::string::npos);
  return std::stod(out.substr(pos + 4));
}

}  // namespace

TEST_CASE("generate") {
  REQUIRE(mvgraph("generate --kind phase --shape 32 32 --out " + at("phase.mvd")).code == 0);
  const auto phase = loadMvd(at("phase.mvd"));
  CHECK(phase.manifold == Manifold::circle());
  CHECK(phase.values == genPhaseImage(32, 32).values);

  REQUIRE(mvgraph("generate --kind s2whirl --shape 16 16 --out " + at("whirl.mvd")).code == 0);
  const auto whirl = loadMvd(at("whirl.mvd"));
  for (int u = 0; u < whirl.size(); ++u) CHECK(std::abs(whirl.values.col(u).norm() - 1) < 1e-12);

  REQUIRE(mvgraph("generate --kind spd-sphere --shape 480 --out " + at("sphere.mvd") +
                  " --positions " + at("sphere.tsv"))
              .code == 0);
  CHECK(loadMvd(at("sphere.mvd")).size() == 480);
  CHECK(loadPositions(at("sphere.tsv")).cols() == 480);

  CHECK(mvgraph("generate --kind phase --shape 0 4 --out " + at("x.mvd")).code == 2);
  CHECK(mvgraph("generate --kind phase --shape 4 4 4 --out " + at("x.mvd")).code == 2);
  CHECK(mvgraph("generate --kind torus --shape 4 4 --out " + at("x.mvd")).code == 2);
  CHECK(mvgraph("generate --shape 4 4").code == 2);
  CHECK(mvgraph("frobnicate").code == 2);
}

TEST_CASE("noise and eval") {
  REQUIRE(mvgraph("generate --kind phase --shape 256 256 --out " + at("clean.mvd")).code == 0);
  REQUIRE(mvgraph("noise --in " + at("clean.mvd") + " --sigma 0 --seed 3 --out " + at("same.mvd"))
              .code == 0);
  CHECK(slurp(at("same.mvd")) == slurp(at("clean.mvd")));

  REQUIRE(mvgraph("noise --in " + at("clean.mvd") + " --sigma 0.3 --seed 1 --out " + at("n1.mvd"))
              .code == 0);
  REQUIRE(mvgraph("noise --in " + at("clean.mvd") + " --sigma 0.3 --seed 1 --out " + at("n2.mvd"))
              .code == 0);
  CHECK(slurp(at("n1.mvd")) == slurp(at("n2.mvd")));

  const Run e = mvgraph("eval --a " + at("n1.mvd") + " --b " + at("clean.mvd"));
  REQUIRE(e.code == 0);
  CHECK(std::abs(parseMse(e.out) - 0.090) < 0.05 * 0.090);

  const Run self = mvgraph("eval --a " + at("n1.mvd") + " --b " + at("n1.mvd"));
  CHECK(self.out == "mse=0\n");

  CHECK(mvgraph("noise --in " + at("clean.mvd") + " --sigma -1 --out " + at("x.mvd")).code == 2);
  CHECK(mvgraph("eval --a " + at("missing.mvd") + " --b " + at("clean.mvd")).code == 3);
}

TEST_CASE("build-graph") {
  REQUIRE(mvgraph("generate --kind phase --shape 3 3 --out " + at("g3.mvd")).code == 0);
  REQUIRE(mvgraph("build-graph --kind grid4 --in " + at("g3.mvd") + " --out " + at("g3.tsv"))
              .code == 0);
  CHECK(loadEdgeList(at("g3.tsv")).numEdges() == 24);

  REQUIRE(mvgraph("generate --kind s2whirl --shape 32 32 --out " + at("w32.mvd")).code == 0);
  REQUIRE(mvgraph("build-graph --kind knn-patch --k 10 --patch 1 --in " + at("w32.mvd") +
                  " --out " + at("knn.tsv"))
              .code == 0);
  const auto knn = loadEdgeList(at("knn.tsv"));
  for (int u = 0; u < knn.numVertices(); ++u) CHECK(knn.degree(u) >= 10);
  CHECK(knn.hasSymmetricEdgeSet());

  REQUIRE(mvgraph("generate --kind spd-sphere --shape 480 --out " + at("s.mvd") +
                  " --positions " + at("s.tsv"))
              .code == 0);
  REQUIRE(mvgraph("build-graph --kind eps-ball --eps 0.2618 --positions " + at("s.tsv") +
                  " --in " + at("s.mvd") + " --out " + at("eps.tsv"))
              .code == 0);
  CHECK(slurp(at("eps.tsv")).rfind("# mvgraph-edges v1 n=480 symmetric=1\n", 0) == 0);

  CHECK(mvgraph("build-graph --kind eps-ball --in " + at("s.mvd") + " --out " + at("x.tsv"))
            .code == 2);
  CHECK(mvgraph("build-graph --kind ring --in " + at("s.mvd") + " --out " + at("x.tsv")).code ==
        2);
}

TEST_CASE("denoise") {
  REQUIRE(mvgraph("generate --kind s2whirl --shape 16 16 --out " + at("c.mvd")).code == 0);
  REQUIRE(mvgraph("noise --in " + at("c.mvd") + " --sigma 0.2 --seed 4 --out " + at("n.mvd"))
              .code == 0);
  REQUIRE(mvgraph("build-graph --kind grid4 --in " + at("n.mvd") + " --out " + at("g.tsv"))
              .code == 0);
  const std::string base = "denoise --in " + at("n.mvd") + " --graph " + at("g.tsv") + " ";

  SUBCASE("huge lambda keeps the data") {
    REQUIRE(mvgraph(base + "--p 1 --lambda 1e8 --scheme jacobi --max-iters 1 --out " + at("d.mvd"))
                .code == 0);
    const Run e = mvgraph("eval --a " + at("d.mvd") + " --b " + at("n.mvd"));
    CHECK(parseMse(e.out) < 1e-10);
  }

  SUBCASE("pure flow flattens the data") {
    const Run r = mvgraph(base + "--p 2 --lambda 0 --dt 0.05 --max-iters 3000 --trace " +
                          at("trace.csv") + " --out " + at("flat.mvd"));
    REQUIRE(r.code == 0);
    CHECK(r.out.find("iterations=3000") != std::string::npos);
    const auto noisy = loadMvd(at("n.mvd"));
    const auto flat = loadMvd(at("flat.mvd"));
    auto spread = [](const VertexFunction& f) {
      double s = 0;
      for (int u = 0; u < f.size(); ++u)
        s = std::max(s, f.manifold.dist(f.point(0), f.point(u)));
      return s;
    };
    CHECK(spread(flat) < 0.5 * spread(noisy));

    std::ifstream is(at("trace.csv"));
    std::string line;
    std::getline(is, line);
    CHECK(line == "iter,energy,avg_rel_change");
    double prev = INFINITY;
    int rows = 0, rises = 0;
    while (std::getline(is, line)) {
      std::stringstream ss(line);
      std::string it, en;
      std::getline(ss, it, ',');
      std::getline(ss, en, ',');
      const double e = std::stod(en);
      if (e > prev + 1e-12) ++rises;
      prev = e;
      ++rows;
    }
    CHECK(rows == 3001);
    CHECK(rises == 0);
  }

  SUBCASE("configuration errors") {
    CHECK(mvgraph(base + "--p 2 --lambda 0 --scheme jacobi --out " + at("x.mvd")).code == 2);
    CHECK(mvgraph(base + "--p 0 --lambda 1 --out " + at("x.mvd")).code == 2);
    CHECK(mvgraph(base + "--p 2 --lambda 1 --model tv --out " + at("x.mvd")).code == 2);
    CHECK(mvgraph(base + "--lambda 1 --out " + at("x.mvd")).code == 2);
  }

  SUBCASE("leaving the domain reports the vertex") {
    std::ofstream(at("two.csv")) << "0\n3\n";
    REQUIRE(mvgraph("import --in " + at("two.csv") + " --manifold circle --shape 1 2 --out " +
                    at("two.mvd"))
                .code == 0);
    REQUIRE(mvgraph("build-graph --kind grid4 --in " + at("two.mvd") + " --out " + at("two.tsv"))
                .code == 0);
    char dt[64];
    std::snprintf(dt, sizeof dt, "%.17g", (3 + std::numbers::pi) / 6);
    const Run r = mvgraph("denoise --in " + at("two.mvd") + " --graph " + at("two.tsv") +
                          " --p 2 --lambda 0 --max-iters 1 --dt " + dt + " --out " + at("x.mvd"));
    CHECK(r.code == 3);
    CHECK(r.err.find("vertex") != std::string::npos);
  }
}

TEST_CASE("export and import") {
  REQUIRE(mvgraph("generate --kind spd-sphere --shape 60 --out " + at("e.mvd") + " --positions " +
                  at("e.tsv"))
              .code == 0);
  REQUIRE(mvgraph("export --in " + at("e.mvd") + " --format csv --out " + at("e.csv")).code == 0);
  std::ifstream is(at("e.csv"));
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 60);
  REQUIRE(mvgraph("export --in " + at("e.mvd") + " --format ply --positions " + at("e.tsv") +
                  " --out " + at("e.ply"))
              .code == 0);
  CHECK(slurp(at("e.ply")).rfind("ply\n", 0) == 0);

  std::ofstream(at("r3.csv")) << "0.1,2,-3.5\n1e-300,0.30000000000000004,7\n";
  REQUIRE(mvgraph("import --in " + at("r3.csv") + " --manifold euclidean --out " + at("r3.mvd"))
              .code == 0);
  REQUIRE(mvgraph("export --in " + at("r3.mvd") + " --format csv --out " + at("r3b.csv")).code ==
          0);
  REQUIRE(mvgraph("import --in " + at("r3b.csv") + " --manifold euclidean --out " +
                  at("r3b.mvd"))
              .code == 0);
  const auto a = loadMvd(at("r3.mvd")), b = loadMvd(at("r3b.mvd"));
  CHECK(a.values.rows() == 3);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK(mvgraph("export --in " + at("e.mvd") + " --format png --out " + at("x")).code == 2);
}

TEST_CASE("recipes") {
  const fs::path dir = MVG_RECIPES_DIR;
  REQUIRE(fs::exists(dir / "s2-flow.json"));
  std::ofstream(at("tiny.json")) << R"({
    "name": "tiny",
    "data": {"kind": "phase", "shape": [12, 12]},
    "noise": {"sigma": 0.3, "seed": 5},
    "graph": {"kind": "grid4"},
    "runs": [
      {"label": "tv", "model": "aniso", "scheme": "jacobi", "p": 1, "lambda": 4,
       "max_iters": 50, "tol": 1e-7},
      {"label": "knn", "scheme": "jacobi", "p": 2, "lambda": 4, "max_iters": 20,
       "graph": {"kind": "knn-patch", "k": 6, "patch": 1}}
    ]
  })";
  const Run a = mvgraph("recipe --file " + at("tiny.json"));
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("tiny noisy mse=", 0) == 0);
  CHECK(a.out.find("tiny tv mse=") != std::string::npos);
  CHECK(a.out.find("tiny knn mse=") != std::string::npos);
  CHECK(mvgraph("recipe --file " + at("tiny.json")).out == a.out);

  std::ofstream(at("broken.json")) << R"({"data": {"kind": "phase"}})";
  CHECK(mvgraph("recipe --file " + at("broken.json")).code == 2);
  std::ofstream(at("junk.json")) << "{";
  CHECK(mvgraph("recipe --file " + at("junk.json")).code == 2);
}
