#pragma once

// Transformation discriminant models: definition, likelihood and fitting.

#include "tda/core_math.hpp"
#include "tda/data.hpp"
#include "tda/optim.hpp"
#include "tda/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace tda {

enum class MarginalFamily { Free, Location, LocationScale };
enum class CorrelationScope { Global, PerDisease };

struct ModelSpec {
    MarginalFamily family = MarginalFamily::Location;
    CorrelationScope scope = CorrelationScope::Global;
    int order = 6;
    /// Per-marker support (l, u).
    std::vector<std::pair<double, double>> bounds;

    int n_markers() const { return static_cast<int>(bounds.size()); }
    BernsteinBasis basis(int j) const;
    bool shared_transform() const { return family != MarginalFamily::Free; }
    int n_scopes() const { return scope == CorrelationScope::Global ? 1 : 2; }
    /// Throws std::invalid_argument on an invalid order or empty/inverted bounds.
    void validate() const;
};

/// sTDA, lTDA, lsTDA, with a "_d" suffix for per-disease correlation.
std::string variant_name(const ModelSpec& spec);
/// Parses the names produced by variant_name (TDA is accepted for lTDA).
ModelSpec spec_from_variant(const std::string& name, int order = 6);

MarginalFamily parse_family(const std::string& s);
CorrelationScope parse_scope(const std::string& s);
std::string family_name(MarginalFamily f);
std::string scope_name(CorrelationScope s);

/// Pooled per-marker min/max widened by 10% of the range on each side.
std::vector<std::pair<double, double>> default_bounds(const CaseControlData& data);

/// Length of the flat parameter vector.
Eigen::Index n_parameters(const ModelSpec& spec);

struct FitOptions {
    BfgsOptions bfgs;
};

/// Immutable fitted model.
///
/// coeffs[d][j] holds the Bernstein coefficients used for class d; for the
/// shared families both entries hold the same h_j and the class-1
/// transformation is (h_j - delta_j) / exp(gamma_j).
struct FittedTda {
    ModelSpec spec;
    std::array<std::vector<MonotoneCoeffs>, 2> coeffs;
    Eigen::VectorXd delta;
    Eigen::VectorXd gamma;
    std::vector<CorrelationParam> corr;
    std::vector<std::string> marker_names;
    double loglik = 0.0;
    Eigen::Index n_params = 0;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;

    int n_markers() const { return spec.n_markers(); }
    const CorrelationParam& corr_for(int d) const { return corr[corr.size() == 1 ? 0 : static_cast<std::size_t>(d)]; }
    const Eigen::MatrixXd& sigma(int d) const { return corr_for(d).sigma(); }

    /// h_dj(y) and its derivative.
    TransformValue transform(int d, int j, double y) const;
    /// Solves h_dj(y) = z.
    double inverse_transform(int d, int j, double z) const;
};

/// Flat unconstrained parameters. Layout: raw Bernstein parameters (per class
/// then marker for Free, per marker otherwise), delta, gamma, then lambda per
/// correlation scope.
Eigen::VectorXd encode(const FittedTda& model);
FittedTda decode(const Eigen::VectorXd& params, const ModelSpec& spec);

/// Joint log-likelihood; rows with missing markers contribute the marginal
/// density of their observed coordinates. Returns -inf if some h' <= 0.
double log_likelihood(const Eigen::VectorXd& params, const CaseControlData& data, const ModelSpec& spec);
/// Same, also filling the analytic gradient with respect to params.
double log_likelihood(const Eigen::VectorXd& params, const CaseControlData& data, const ModelSpec& spec,
                      Eigen::VectorXd& grad);

/// Log density of class d at y over its observed (non-NaN) coordinates.
double log_density(const FittedTda& model, int d, const Eigen::VectorXd& y);

/// Starting values used by fit.
Eigen::VectorXd initial_parameters(const CaseControlData& data, const ModelSpec& spec);

/// Maximum likelihood fit. A spec without bounds receives default_bounds(data).
/// Throws DegenerateData when a marker is constant within a class and
/// InsufficientData when a class has fewer than J + 2 rows. On
/// non-convergence the best parameters are returned with converged = false.
FittedTda fit(const CaseControlData& data, ModelSpec spec, const FitOptions& opts = {});

/// Phi(h_dj(y)).
double marginal_cdf(const FittedTda& model, int d, int j, double y);

/// Draws n rows from class d of the model.
Eigen::MatrixXd sample_class(const FittedTda& model, int d, Eigen::Index n, Rng& rng);
/// Draws a case-control sample with n0 controls followed by n1 cases.
CaseControlData simulate(const FittedTda& model, Eigen::Index n0, Eigen::Index n1, Rng& rng);

} // namespace tda
