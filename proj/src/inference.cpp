#include "tda/inference.hpp"

#include "tda/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tda {

namespace {

int marker_index(const std::string& key, const FittedTda& model) {
    for (std::size_t j = 0; j < model.marker_names.size(); ++j)
        if (model.marker_names[j] == key) return static_cast<int>(j);
    try {
        std::size_t used = 0;
        const int j = std::stoi(key, &used);
        if (used == key.size() && j >= 1 && j <= model.n_markers()) return j - 1;
    } catch (const std::exception&) {
    }
    throw ParseError("unknown marker '" + key + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

} // namespace

NamedStatistic parse_statistic(const std::string& name, const FittedTda& model, const RocOptions& roc) {
    const auto parts = split(name, ':');
    if (parts.empty()) throw ParseError("empty statistic name");
    const std::string& kind = parts[0];
    if ((kind == "delta" || kind == "gamma") && parts.size() == 2) {
        const int j = marker_index(parts[1], model);
        if (kind == "delta") return {name, [j](const FittedTda& m) { return m.delta[j]; }};
        return {name, [j](const FittedTda& m) { return m.gamma[j]; }};
    }
    if (kind == "sigma" && parts.size() == 4) {
        const int d = parts[1] == "1" ? 1 : 0;
        if (parts[1] != "0" && parts[1] != "1") throw ParseError("sigma class must be 0 or 1");
        const int a = marker_index(parts[2], model), b = marker_index(parts[3], model);
        return {name, [d, a, b](const FittedTda& m) { return m.sigma(d)(a, b); }};
    }
    if (kind == "auc" && parts.size() == 1) return {name, [roc](const FittedTda& m) { return model_auc(m, roc); }};
    if (kind == "auc" && parts.size() == 2) {
        std::vector<int> idx;
        for (const auto& k : split(parts[1], ',')) idx.push_back(marker_index(k, model));
        return {name, [idx, roc](const FittedTda& m) { return model_auc(subset_model(m, idx), roc); }};
    }
    throw ParseError("unknown statistic '" + name + "'");
}

std::pair<double, double> percentile_interval(std::vector<double> v, double level) {
    if (v.empty()) throw std::invalid_argument("percentile_interval: no values");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("percentile_interval: level must lie in (0, 1)");
    std::sort(v.begin(), v.end());
    auto q = [&](double p) {
        const double h = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    const double alpha = 1.0 - level;
    return {q(alpha / 2.0), q(1.0 - alpha / 2.0)};
}

std::vector<BootstrapResult> parametric_bootstrap(const FittedTda& model, Eigen::Index n0, Eigen::Index n1, int B,
                                                  const std::vector<NamedStatistic>& stats, double level,
                                                  std::uint64_t seed, const FitOptions& opts) {
    if (B < 100) throw std::invalid_argument("parametric_bootstrap: B must be at least 100");
    if (n0 < 1 || n1 < 1) throw std::invalid_argument("parametric_bootstrap: class sizes must be positive");
    const std::size_t S = stats.size();
    std::vector<std::vector<double>> values(static_cast<std::size_t>(B));
    std::vector<char> ok(static_cast<std::size_t>(B), 0);

#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < B; ++b) {
        try {
            Rng rng = make_rng(seed, static_cast<std::uint64_t>(b));
            const CaseControlData data = simulate(model, n0, n1, rng);
            const FittedTda refit = fit(data, model.spec, opts);
            if (!refit.converged) continue;
            std::vector<double> row;
            for (const auto& s : stats) row.push_back(s.fn(refit));
            values[static_cast<std::size_t>(b)] = std::move(row);
            ok[static_cast<std::size_t>(b)] = 1;
        } catch (const std::exception&) {
            // counted as a failed replicate below
        }
    }

    int failed = 0;
    for (char c : ok) failed += c ? 0 : 1;
    if (failed > B / 10)
        throw TooManyFailures(std::to_string(failed) + " of " + std::to_string(B) + " bootstrap refits failed");

    std::vector<BootstrapResult> out(S);
    for (std::size_t s = 0; s < S; ++s) {
        BootstrapResult& r = out[s];
        r.statistic = stats[s].name;
        r.estimate = stats[s].fn(model);
        r.level = level;
        r.B = B;
        r.n_failed = failed;
        for (int b = 0; b < B; ++b)
            if (ok[static_cast<std::size_t>(b)]) r.replicates.push_back(values[static_cast<std::size_t>(b)][s]);
        std::tie(r.ci_low, r.ci_high) = percentile_interval(r.replicates, level);
    }
    return out;
}

BootstrapResult parametric_bootstrap(const FittedTda& model, Eigen::Index n0, Eigen::Index n1, int B,
                                     const NamedStatistic& stat, double level, std::uint64_t seed,
                                     const FitOptions& opts) {
    return parametric_bootstrap(model, n0, n1, B, std::vector<NamedStatistic>{stat}, level, seed, opts).front();
}

std::string bootstrap_to_csv(const std::vector<BootstrapResult>& results) {
    std::ostringstream out;
    out << "statistic,estimate,low,high,level,B,n_failed\n";
    for (const auto& r : results)
        // Multi-marker AUC names contain commas.
        out << (r.statistic.find(',') == std::string::npos ? r.statistic : '"' + r.statistic + '"') << ','
            << format_real(r.estimate) << ',' << format_real(r.ci_low) << ','
            << format_real(r.ci_high) << ',' << format_real(r.level) << ',' << r.B << ',' << r.n_failed << '\n';
    return out.str();
}

} // namespace tda
