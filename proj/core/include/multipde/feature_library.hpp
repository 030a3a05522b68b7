#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "multipde/approximator.hpp"
#include "multipde/synthetic_data.hpp"

namespace multipde {

// Candidate-term matrix Theta and target du/dt for one experiment. Columns
// are u^a * d^b(u)/dx^b in poly-degree-major order: column a*(max_order+1)+b.
struct TermLibrary {
  Eigen::MatrixXd theta;  // n x p
  Eigen::VectorXd dudt;   // n
  std::vector<std::string> labels;
  std::string experiment_id;

  int p() const { return static_cast<int>(theta.cols()); }
  Eigen::Index n() const { return theta.rows(); }
};

// Per-experiment libraries sharing one label set; group g = column label
// across all experiments.
struct StackedLibrary {
  std::vector<TermLibrary> experiments;
  std::vector<std::string> labels;

  int q() const { return static_cast<int>(experiments.size()); }
  int p() const { return static_cast<int>(labels.size()); }

  static StackedLibrary from(std::vector<TermLibrary> libs);  // checks label equality
};

// Fixed label convention: "1", "u_x", ..., "u", "u·u_x", ..., "u^5·u_xxxxx".
std::vector<std::string> term_labels(int max_poly, int max_order);

// Column index of a label, -1 if absent.
int label_index(const std::vector<std::string>& labels, const std::string& label);

// theta[:, a*(max_order+1)+b] = u^a * derivs.dx[b-1] (b=0 column uses 1).
// dudt = derivs.dt. Defaults give the standard p = 36 library.
TermLibrary build_library(const Eigen::VectorXd& u, const DerivativeBundle& derivs,
                          int max_poly = 5, int max_order = 5);

struct NormalizedLibrary {
  TermLibrary lib;             // columns scaled to unit L2 norm
  Eigen::VectorXd scales;      // original column norms (1 for flagged zero columns)
  std::vector<int> zero_columns;
};

NormalizedLibrary normalize_columns(const TermLibrary& lib);

// ---- oracle path -----------------------------------------------------------

// Finite-difference weights on a uniform grid (Fornberg), exposed for tests.
// Returns stencil weights for the m-th derivative at the center of a
// (2*half+1)-point symmetric stencil with spacing h.
Eigen::VectorXd fd_central_weights(int m, int half, double h);

// Derivatives of a gridded field by high-order central finite differences,
// evaluated at every interior grid point (margin rows/columns trimmed).
// This is the training-free path used when the field is noiseless.
struct GridDerivatives {
  Eigen::VectorXd u;    // flattened interior samples
  DerivativeBundle derivs;
  Eigen::MatrixXd xt;   // interior sample coordinates
};

GridDerivatives grid_fd_derivatives(const Experiment& exp, int max_order, int margin = 0);

// Library from the closed-form derivatives of an analytic solution, exact at
// the sample coordinates and unaffected by stored noise.
TermLibrary build_library_analytic(const Experiment& exp, int max_poly = 5, int max_order = 5);

// Library from finite-difference derivatives of the gridded field.
TermLibrary build_library_fd(const Experiment& exp, int max_poly = 5, int max_order = 5,
                             int margin = 0);

// Labeled CSV export for offline inspection.
void export_library_csv(const TermLibrary& lib, const std::string& path);

}  // namespace multipde
