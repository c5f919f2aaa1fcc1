#pragma once

// Resource-constrained marker selection by exhaustive enumeration.

#include "tda/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace tda {

struct ResourceProblem {
    Eigen::VectorXd delta;
    /// J x J correlation matrix.
    Eigen::MatrixXd sigma;
    /// K x J nonnegative usage, row k for resource k.
    Eigen::MatrixXd a;
    /// K nonnegative budgets.
    Eigen::VectorXd b;
    std::vector<std::string> marker_names;
    std::vector<std::string> resource_names;

    int n_markers() const { return static_cast<int>(delta.size()); }
    /// Throws std::invalid_argument on bad shapes, negative entries or a
    /// correlation matrix that is not positive definite.
    void validate() const;
};

struct SubsetResult {
    /// s[j] = 1 when marker j is selected.
    std::vector<int> s;
    std::vector<int> selected;
    double auc = 0.5;
    /// delta_s' Sigma_ss^-1 delta_s.
    double q = 0.0;
    Eigen::VectorXd usage;
    std::uint64_t n_feasible = 0;
};

/// Phi(sqrt(q / 2)) with q evaluated on the selected sub-vector and
/// sub-matrix; 0.5 for the empty selection.
double subset_auc(const ResourceProblem& problem, const std::vector<int>& s);

/// Best feasible selection. Ties go to fewer markers, then to the
/// lexicographically smallest s. Throws TooManyMarkers for J > 25.
SubsetResult optimize_subset(const ResourceProblem& problem);

/// Problem from a Location/Global model plus resource tables.
///   resources: header "resource,<marker names>", one row per resource
///   budgets:   header "resource,budget", one row per resource
/// Markers missing from the resource table use nothing. Throws ParseError on
/// malformed tables and UnsupportedFamily for other model families.
ResourceProblem problem_from_model(const FittedTda& model, const std::string& resources_csv,
                                   const std::string& budgets_csv);
ResourceProblem load_problem(const FittedTda& model, const std::string& resources_path,
                             const std::string& budgets_path);

} // namespace tda
