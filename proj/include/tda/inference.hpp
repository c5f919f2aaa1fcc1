#pragma once

#include "tda/model.hpp"
#include "tda/score.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tda {

/// Scalar extracted from a fitted model.
struct NamedStatistic {
    std::string name;
    std::function<double(const FittedTda&)> fn;
};

/// Parses a statistic name against a model:
///   delta:<marker>  gamma:<marker>  sigma:<class>:<marker>:<marker>
///   auc  auc:<marker>,<marker>,...
/// Markers are given by name or 1-based index.
NamedStatistic parse_statistic(const std::string& name, const FittedTda& model, const RocOptions& roc = {});

struct BootstrapResult {
    std::string statistic;
    double estimate = 0.0;
    std::vector<double> replicates;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.95;
    int B = 0;
    int n_failed = 0;
};

/// Percentile bootstrap: B samples of n0 controls and n1 cases are drawn from
/// `model` and refitted with the same spec and bounds. Replicate b uses
/// stream b of `seed`. Non-converged or failed refits are excluded and
/// counted; more than B/10 failures throw TooManyFailures.
std::vector<BootstrapResult> parametric_bootstrap(const FittedTda& model, Eigen::Index n0, Eigen::Index n1, int B,
                                                  const std::vector<NamedStatistic>& stats, double level,
                                                  std::uint64_t seed, const FitOptions& opts = {});
BootstrapResult parametric_bootstrap(const FittedTda& model, Eigen::Index n0, Eigen::Index n1, int B,
                                     const NamedStatistic& stat, double level, std::uint64_t seed,
                                     const FitOptions& opts = {});

/// Percentile interval of `values` at the given level (linear interpolation
/// between order statistics).
std::pair<double, double> percentile_interval(std::vector<double> values, double level);

std::string bootstrap_to_csv(const std::vector<BootstrapResult>& results);

} // namespace tda
