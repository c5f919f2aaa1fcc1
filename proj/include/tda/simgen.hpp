#pragma once

// Simulation scenarios, copula samplers, baseline methods and the
// repeated-holdout evaluation harness.

#include "tda/data.hpp"
#include "tda/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tda {

enum class Scenario { A, B1, B2, C_normal, C_skewed, D_clayton, D_gumbel, E_linear, E_interaction };

std::string scenario_name(Scenario s);
/// Accepts the names produced by scenario_name.
Scenario parse_scenario(const std::string& s);
std::vector<Scenario> all_scenarios();

/// Printed scenario constants.
namespace scenario_params {
Eigen::MatrixXd sigma_a();
Eigen::VectorXd mu1_a();
Eigen::MatrixXd sigma0_c();
Eigen::MatrixXd sigma1_c();
constexpr double clayton_theta = 0.4146;
constexpr double gumbel_theta = 1.3170;
constexpr double e_beta0 = 0.5;
Eigen::VectorXd e_beta();
} // namespace scenario_params

/// Draws n0 controls then n1 cases. Scenarios E draw n0 + n1 rows and label
/// them by Bernoulli sampling, so class sizes are random.
CaseControlData generate(Scenario scenario, Eigen::Index n0, Eigen::Index n1, std::uint64_t seed);

/// Copula samples on (0,1)^J by frailty construction: gamma frailty for
/// Clayton, positive stable frailty for Gumbel. The Gumbel sampler also
/// returns 1 - U without cancellation when `upper` is given.
Eigen::MatrixXd sample_clayton(double theta, int dim, Eigen::Index n, Rng& rng);
Eigen::MatrixXd sample_gumbel(double theta, int dim, Eigen::Index n, Rng& rng, Eigen::MatrixXd* upper = nullptr);

double clayton_log_density(double theta, const Eigen::VectorXd& u);
double gumbel_log_density(double theta, const Eigen::VectorXd& u);

/// A strictly increasing function of the true likelihood ratio of the
/// scenario at y (the log-LR itself except for Scenario E, where the logit
/// is returned).
double true_log_lr(Scenario scenario, const Eigen::VectorXd& y);

/// Monte-Carlo AUC of the true likelihood ratio from `n` draws per class
/// (n total rows for Scenario E).
double true_optimal_auc(Scenario scenario, Eigen::Index n = 1000000, std::uint64_t seed = 1);
/// Phi(sqrt(delta' Sigma^-1 delta / 2)) for Scenario A (and B1).
double scenario_a_closed_form_auc();

/// Fits on `train` and scores every row of `test` (NaN for unscorable rows).
struct Method {
    std::string name;
    std::function<Eigen::VectorXd(const CaseControlData& train, const CaseControlData& test)> run;
};

/// lda, qda, logistic, constant, or a TDA variant (sTDA, lTDA, lsTDA, with _d).
Method make_method(const std::string& name, int order = 6);

struct HoldoutResult {
    std::vector<std::string> methods;
    /// auc[m][r]; NaN when the method failed on replication r.
    std::vector<std::vector<double>> auc;
    std::vector<int> n_failed;

    /// Quartiles (q25, median, q75) of the non-NaN AUCs of method m.
    std::array<double, 3> quartiles(std::size_t m) const;
};

/// Repeated stratified 50/50 split: fit on one half, AUC on the other.
HoldoutResult holdout_eval(const CaseControlData& data, const std::vector<Method>& methods, int reps,
                           std::uint64_t seed);

/// Declarative simulation study: fresh training data of size n (n/2 per class)
/// and an independent test set of size test_n per replication.
struct StudyConfig {
    Scenario scenario = Scenario::A;
    std::vector<Eigen::Index> n{200};
    Eigen::Index test_n = 10000;
    int reps = 100;
    std::uint64_t seed = 1;
    int order = 6;
    std::vector<std::string> methods{"lTDA", "lda"};
};

/// Parses "key = value" lines (scenario, n, test_n, reps, seed, order,
/// methods); lists are comma separated, '#' starts a comment.
StudyConfig parse_study_config(const std::string& text);

struct StudyRow {
    std::string scenario;
    std::string method;
    Eigen::Index n = 0;
    int rep = 0;
    double oos_auc = 0.0;
};

std::vector<StudyRow> run_study(const StudyConfig& config);
/// Tidy CSV: scenario,method,N,rep,oos_auc.
std::string study_to_csv(const std::vector<StudyRow>& rows);
std::string holdout_to_csv(const HoldoutResult& result);

} // namespace tda
