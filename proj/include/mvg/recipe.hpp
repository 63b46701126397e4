#pragma once

// Experiment recipes: a JSON file naming a synthetic data set, a noise model,
// a graph construction and a list of solver runs. Running a recipe prints one
// line per run with the MSE against the clean data.

#include <iosfwd>
#include <string>
#include <vector>

namespace mvg {

struct RecipeLine {
  std::string label;
  double mse = 0;
  int iterations = 0;
};

/// Runs every entry of the recipe in `path`, printing progress lines to `out`.
/// When `outDir` is non-empty the clean, noisy and denoised data are saved
/// there as MVD files.
std::vector<RecipeLine> runRecipe(const std::string& path, std::ostream& out,
                                  const std::string& outDir = {});

}  // namespace mvg
