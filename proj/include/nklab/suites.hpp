#ifndef NKLAB_SUITES_HPP
#define NKLAB_SUITES_HPP

// Deterministic verification suites. Each suite owns one seeded stream and
// forks a named substream per check, so adding or reordering checks never
// perturbs the samples any other check draws. Records come back in a fixed
// declaration order; rendering them with the same RunConfig is therefore
// byte-stable.

#include <string>
#include <vector>

#include "nklab/report.hpp"

namespace nklab {

// Ambient-structure identities: the almost complex structure, the product
// structure, their compatibilities with the metric, the covariant-derivative
// identities, the constant-type formula, the curvature closed form with the
// first Bianchi identity, and the flat-coordinate embedding checks
// (including the second-order convergence of the finite-difference scheme).
std::vector<CheckRecord> suite_structure(const RunConfig& cfg);

// Isometry-group checks: the six permutation isometries recover their
// declared (sign, angle) labels, inner translations (including the
// determinant -1 branch) act trivially on the labels, random group elements
// preserve the metric, and the permutation set closes under composition.
std::vector<CheckRecord> suite_isometries(const RunConfig& cfg);

// Catalog checks for the selected immersions: Lagrangian and minimality
// residuals, detected type and angles against the expected profile, named
// frame constants, constant sectional curvature where the profile states
// one, totally geodesic rows, compatibility residuals of the induced
// curvature, generating-subgroup bracket tables, and constancy of the frame
// invariants across a parameter grid. id_filter is an id token ("psl",
// "f_lambda", ...) or empty for every row; the lambda family expands over
// cfg.lambda_grid. Throws UnknownImmersion for an unrecognized token.
std::vector<CheckRecord> suite_catalog(const RunConfig& cfg,
                                       const std::string& id_filter = "");

// JSON description of every catalog row: id token, row number, parameter
// domain, expected type, angles, curvature, and named constants. The lambda
// family lists cfg.lambda_grid and keys its constants per grid value.
std::string catalog_entries_json(const RunConfig& cfg);

}  // namespace nklab

#endif
