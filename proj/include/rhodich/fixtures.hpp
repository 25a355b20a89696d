#ifndef RHODICH_FIXTURES_HPP
#define RHODICH_FIXTURES_HPP

#include <optional>
#include <string>
#include <vector>

#include "rhodich/dichotomy.hpp"
#include "rhodich/family.hpp"
#include "rhodich/funcspaces.hpp"

namespace rhodich {

// Bundled family + recommended rate + ground-truth annotations used by the
// scenario runner and the acceptance suite.
struct Fixture {
    std::string name;
    EvolutionFamily family;
    RateFunction rate;
    NormFamily norms;
    SubspaceZ Z;
    bool discontinuous = false;
    std::optional<double> known_lambda;
    std::optional<MatrixXd> known_P;
    bool expect_dichotomy = true;
    bool expect_y1_admissible = true;
    bool expect_yinf_admissible = true;
};

// Names: example1, example2, diag2d, scalar_exp, scalar_poly,
// nonuniform_scalar. scalar_exp accepts an optional decay rate (default 2).
Fixture builtin_fixture(const std::string& name, double param = 0.0);
std::vector<std::string> fixture_names();

}  // namespace rhodich

#endif
