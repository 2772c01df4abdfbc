#ifndef NKLAB_ERRORS_HPP
#define NKLAB_ERRORS_HPP

// Exception hierarchy shared by all nklab modules. Every error carries a
// human-readable message with the offending values, so callers can log the
// failure without re-deriving context.

#include <stdexcept>
#include <string>

namespace nklab {

// Base class so callers can catch all library errors at once.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A constructor or operation received a value outside its documented domain
// (non-unimodular point, non-traceless algebra element, bad parameters, ...).
struct InvalidInput : Error {
  using Error::Error;
};

// solve_conjugation: the two bases do not have matching pairwise inner
// products, so no inner-product-preserving conjugation can exist.
struct GramMismatch : Error {
  using Error::Error;
};

// solve_conjugation: the linear system has no one-dimensional kernel (either
// empty or ambiguous), so no usable conjugating matrix was found.
struct NoSolution : Error {
  using Error::Error;
};

// A Gram matrix that must be inverted is numerically singular.
struct SingularGram : Error {
  using Error::Error;
};

// compose: the pointwise product of two isometries could not be normalised
// back into the canonical (a,b,c,reflector,permutation) form.
struct CompositionError : Error {
  using Error::Error;
};

// catalog: parameters outside the documented chart domain of an immersion.
struct DomainError : Error {
  using Error::Error;
};

// catalog: the requested data (e.g. a subalgebra basis) does not exist for
// this immersion.
struct NotApplicable : Error {
  using Error::Error;
};

// pushforward: the result triple is numerically degenerate (left-translation
// trace residual persists after one step refinement, or the g-Gram of the
// triple is singular).
struct DegenerateError : Error {
  using Error::Error;
};

// cli: an immersion identifier that names no catalog row.
struct UnknownImmersion : Error {
  using Error::Error;
};

// report: the output file could not be written.
struct IoError : Error {
  using Error::Error;
};

// lag_analysis: the combined tangent/J-tangent Gram matrix is singular, so
// the tangential/normal split cannot be solved.
struct DegenerateGram : Error {
  using Error::Error;
};

// lag_analysis: the frame gauge condition could not be imposed (division by a
// vanishing invariant).
struct GaugeFailure : Error {
  using Error::Error;
};

// lag_analysis: the eigenvalue structure of the shape pair sits in the gray
// zone between two classification types; reported with the measured gaps
// rather than silently forced into a type.
struct UnresolvedType : Error {
  using Error::Error;
};

// sectional curvature: the plane spanned by the two vectors is degenerate
// (the Gram determinant of the pair is below threshold).
struct DegeneratePlane : Error {
  using Error::Error;
};

}  // namespace nklab

#endif
