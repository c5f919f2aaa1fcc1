#pragma once

#include "tda/data.hpp"
#include "tda/model.hpp"

#include <string>
#include <vector>

namespace tda {

/// Rosenblatt probability integral transforms of the complete class-d rows.
struct RosenblattReport {
    int d = 0;
    /// Marker indices in conditioning order.
    std::vector<int> order;
    std::vector<std::string> marker_names;
    /// u[j][i]: coordinate j of row i, in (0, 1).
    std::vector<std::vector<double>> u;
    std::vector<double> ks_stat;
    std::vector<double> ks_pvalue;
    Eigen::Index n_used = 0;
    Eigen::Index n_skipped = 0;
};

/// U_1 = Phi(h_d1(y_1)), U_j = Phi(sum_{k<=j} Lt_jk h_dk(y_k)) with Lt the
/// standardized Cholesky factor of the class-d precision in the given marker
/// order (column order when empty). Rows with missing markers are skipped.
/// Throws InsufficientData with fewer than 10 complete rows.
RosenblattReport rosenblatt(const FittedTda& model, const CaseControlData& data, int d, std::vector<int> order = {});

/// One-sample Kolmogorov statistic of `u` against Uniform(0, 1).
double ks_uniform_statistic(std::vector<double> u);
/// Asymptotic Kolmogorov p-value P(sqrt(n) D > lambda).
double kolmogorov_pvalue(double lambda);

/// Per-coordinate ECDF points: coordinate,marker,u,ecdf.
std::string rosenblatt_to_csv(const RosenblattReport& report);

} // namespace tda
