#include "tda/subset_opt.hpp"

#include "tda/data.hpp"
#include "tda/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tda {

namespace {

constexpr int kMaxMarkers = 25;

double q_of_mask(const ResourceProblem& p, std::uint64_t mask, Eigen::VectorXd& ds, Eigen::MatrixXd& ss) {
    std::vector<int> cols;
    for (int j = 0; j < p.n_markers(); ++j)
        if (mask & (std::uint64_t{1} << j)) cols.push_back(j);
    if (cols.empty()) return 0.0;
    const auto k = static_cast<Eigen::Index>(cols.size());
    ds.resize(k);
    ss.resize(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
        ds[r] = p.delta[cols[static_cast<std::size_t>(r)]];
        for (Eigen::Index c = 0; c < k; ++c) ss(r, c) = p.sigma(cols[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    }
    return ds.dot(ss.llt().solve(ds));
}

bool feasible(const ResourceProblem& p, std::uint64_t mask) {
    for (Eigen::Index k = 0; k < p.a.rows(); ++k) {
        double use = 0.0;
        for (int j = 0; j < p.n_markers(); ++j)
            if (mask & (std::uint64_t{1} << j)) use += p.a(k, j);
        if (use > p.b[k] * (1.0 + 1e-12)) return false;
    }
    return true;
}

// Lexicographic order of s = (s_1, ..., s_J): the lowest differing marker decides.
bool lex_less(std::uint64_t x, std::uint64_t y) {
    const std::uint64_t diff = x ^ y;
    if (diff == 0) return false;
    const std::uint64_t lowest = diff & (~diff + 1);
    return (x & lowest) == 0;
}

struct Candidate {
    std::uint64_t mask = 0;
    double q = 0.0;
    bool valid = false;
};

bool better(const Candidate& x, const Candidate& y) {
    if (!y.valid) return x.valid;
    if (!x.valid) return false;
    const double tol = 1e-12 * (1.0 + std::max(x.q, y.q));
    if (x.q > y.q + tol) return true;
    if (y.q > x.q + tol) return false;
    const int cx = std::popcount(x.mask), cy = std::popcount(y.mask);
    if (cx != cy) return cx < cy;
    return lex_less(x.mask, y.mask);
}

double auc_of_q(double q) { return boost::math::cdf(boost::math::normal(), std::sqrt(std::max(q, 0.0) / 2.0)); }

std::vector<std::vector<std::string>> read_table(const std::string& text, const std::string& what) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.empty()) throw ParseError(what + ": empty table");
    for (std::size_t r = 1; r < rows.size(); ++r)
        if (rows[r].size() != rows[0].size())
            throw ParseError(what + ": row " + std::to_string(r + 1) + " has the wrong number of fields");
    return rows;
}

double parse_nonneg(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::logic_error&) {
        throw ParseError(what + ": bad number '" + s + "'");
    }
    if (pos != s.size() || !std::isfinite(v) || v < 0.0) throw ParseError(what + ": bad number '" + s + "'");
    return v;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

void ResourceProblem::validate() const {
    const Eigen::Index J = delta.size();
    if (sigma.rows() != J || sigma.cols() != J) throw std::invalid_argument("resource problem: sigma must be J x J");
    if (a.cols() != J || a.rows() != b.size()) throw std::invalid_argument("resource problem: a must be K x J with K budgets");
    if ((a.array() < 0.0).any() || (b.array() < 0.0).any())
        throw std::invalid_argument("resource problem: usage and budgets must be nonnegative");
    if ((sigma.diagonal().array() - 1.0).abs().maxCoeff() > 1e-8 || !sigma.isApprox(sigma.transpose()) ||
        sigma.llt().info() != Eigen::Success)
        throw std::invalid_argument("resource problem: sigma must be a positive definite correlation matrix");
}

double subset_auc(const ResourceProblem& problem, const std::vector<int>& s) {
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < s.size(); ++j)
        if (s[j]) mask |= std::uint64_t{1} << j;
    Eigen::VectorXd ds;
    Eigen::MatrixXd ss;
    return auc_of_q(q_of_mask(problem, mask, ds, ss));
}

SubsetResult optimize_subset(const ResourceProblem& problem) {
    if (problem.n_markers() > kMaxMarkers)
        throw TooManyMarkers("optimize_subset: at most " + std::to_string(kMaxMarkers) + " markers");
    problem.validate();
    const int J = problem.n_markers();
    const std::uint64_t total = std::uint64_t{1} << J;

    Candidate best;
    std::uint64_t n_feasible = 0;
#pragma omp parallel
    {
        Candidate local;
        std::uint64_t local_feasible = 0;
        Eigen::VectorXd ds;
        Eigen::MatrixXd ss;
#pragma omp for schedule(static) nowait
        for (std::int64_t m = 0; m < static_cast<std::int64_t>(total); ++m) {
            const auto mask = static_cast<std::uint64_t>(m);
            if (!feasible(problem, mask)) continue;
            ++local_feasible;
            const Candidate c{mask, q_of_mask(problem, mask, ds, ss), true};
            if (better(c, local)) local = c;
        }
#pragma omp critical
        {
            if (better(local, best)) best = local;
            n_feasible += local_feasible;
        }
    }

    SubsetResult res;
    res.n_feasible = n_feasible;
    res.s.assign(static_cast<std::size_t>(J), 0);
    res.usage = Eigen::VectorXd::Zero(problem.a.rows());
    for (int j = 0; j < J; ++j) {
        if (!(best.mask & (std::uint64_t{1} << j))) continue;
        res.s[static_cast<std::size_t>(j)] = 1;
        res.selected.push_back(j);
        res.usage += problem.a.col(j);
    }
    res.q = best.q;
    res.auc = auc_of_q(best.q);
    return res;
}

ResourceProblem problem_from_model(const FittedTda& model, const std::string& resources_csv,
                                   const std::string& budgets_csv) {
    if (model.spec.family != MarginalFamily::Location || model.spec.scope != CorrelationScope::Global)
        throw UnsupportedFamily("subset selection needs a location-family model with a global correlation");
    ResourceProblem p;
    p.delta = model.delta;
    p.sigma = model.sigma(0);
    p.marker_names = model.marker_names;
    const int J = model.spec.n_markers();

    const auto res = read_table(resources_csv, "resources");
    const auto bud = read_table(budgets_csv, "budgets");
    if (bud[0].size() != 2) throw ParseError("budgets: expected two columns, resource and budget");

    std::vector<int> col_marker;
    for (std::size_t c = 1; c < res[0].size(); ++c) {
        const auto it = std::find(p.marker_names.begin(), p.marker_names.end(), res[0][c]);
        if (it == p.marker_names.end()) throw ParseError("resources: unknown marker '" + res[0][c] + "'");
        col_marker.push_back(static_cast<int>(it - p.marker_names.begin()));
    }
    const auto K = static_cast<Eigen::Index>(res.size() - 1);
    p.a = Eigen::MatrixXd::Zero(K, J);
    std::map<std::string, Eigen::Index> index;
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& row = res[static_cast<std::size_t>(k + 1)];
        if (!index.emplace(row[0], k).second) throw ParseError("resources: duplicate resource '" + row[0] + "'");
        p.resource_names.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) p.a(k, col_marker[c - 1]) = parse_nonneg(row[c], "resources");
    }
    p.b = Eigen::VectorXd::Constant(K, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t r = 1; r < bud.size(); ++r) {
        const auto it = index.find(bud[r][0]);
        if (it == index.end()) throw ParseError("budgets: unknown resource '" + bud[r][0] + "'");
        p.b[it->second] = parse_nonneg(bud[r][1], "budgets");
    }
    for (Eigen::Index k = 0; k < K; ++k)
        if (std::isnan(p.b[k])) throw ParseError("budgets: no budget for resource '" + p.resource_names[static_cast<std::size_t>(k)] + "'");
    p.validate();
    return p;
}

ResourceProblem load_problem(const FittedTda& model, const std::string& resources_path,
                             const std::string& budgets_path) {
    return problem_from_model(model, slurp(resources_path), slurp(budgets_path));
}

} // namespace tda
