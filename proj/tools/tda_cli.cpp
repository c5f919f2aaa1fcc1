// Command-line front end: fit, score, roc, auc, bootstrap, simulate, holdout,
// assess, select and study.

#include "tda/assess.hpp"
#include "tda/data.hpp"
#include "tda/error.hpp"
#include "tda/inference.hpp"
#include "tda/model.hpp"
#include "tda/score.hpp"
#include "tda/serialize.hpp"
#include "tda/simgen.hpp"
#include "tda/subset_opt.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;
constexpr int kNotConverged = 3;
constexpr int kBadData = 4;

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tda::ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw tda::ParseError("cannot write '" + path + "'");
    out << text;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    for (auto& cell : tda::split_csv_line(s))
        if (!cell.empty()) out.push_back(cell);
    return out;
}

// Marker names or 1-based indices to 0-based indices.
std::vector<int> resolve_markers(const std::string& list, const std::vector<std::string>& names) {
    std::vector<int> idx;
    for (const auto& tok : split_commas(list)) {
        int found = -1;
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == tok) found = static_cast<int>(j);
        if (found < 0) {
            std::size_t pos = 0;
            int k = 0;
            try {
                k = std::stoi(tok, &pos);
            } catch (const std::logic_error&) {
                pos = 0;
            }
            if (pos != tok.size() || k < 1 || k > static_cast<int>(names.size()))
                throw tda::ParseError("unknown marker '" + tok + "'");
            found = k - 1;
        }
        idx.push_back(found);
    }
    return idx;
}

// Marker matrix for a model from a CSV whose columns are matched by name. The
// disease column is optional here.
struct ScoreInput {
    Eigen::MatrixXd y;
    std::vector<std::optional<int>> disease;
};

ScoreInput read_markers(const std::string& path, const std::vector<std::string>& names, const std::string& disease_col) {
    std::istringstream in(slurp(path));
    std::string line;
    if (!std::getline(in, line)) throw tda::ParseError("csv: empty input");
    const auto header = tda::split_csv_line(line);
    std::vector<int> col(names.size(), -1);
    int dcol = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == disease_col) dcol = static_cast<int>(c);
        for (std::size_t j = 0; j < names.size(); ++j)
            if (header[c] == names[j]) col[j] = static_cast<int>(c);
    }
    for (std::size_t j = 0; j < names.size(); ++j)
        if (col[j] < 0) throw tda::ParseError("csv: marker column '" + names[j] + "' not found");

    ScoreInput out;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto cells = tda::split_csv_line(line);
        if (cells.size() != header.size())
            throw tda::ParseError("csv: line " + std::to_string(lineno) + " has the wrong number of fields");
        std::vector<double> row;
        for (int c : col) {
            const auto& cell = cells[static_cast<std::size_t>(c)];
            if (cell == "NA") {
                row.push_back(std::nan(""));
                continue;
            }
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::logic_error&) {
                pos = 0;
            }
            if (cell.empty() || pos != cell.size() || !std::isfinite(v))
                throw tda::ParseError("csv: line " + std::to_string(lineno) + ": non-numeric marker value '" + cell + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
        if (dcol < 0) {
            out.disease.emplace_back();
        } else {
            const auto& d = cells[static_cast<std::size_t>(dcol)];
            if (d != "0" && d != "1")
                throw tda::ParseError("csv: line " + std::to_string(lineno) + ": disease value must be 0 or 1");
            out.disease.emplace_back(d == "1" ? 1 : 0);
        }
    }
    out.y.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < names.size(); ++j)
            out.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return out;
}

void print_kv(const std::string& key, const std::string& value) { std::cout << key << '=' << value << '\n'; }
void print_kv(const std::string& key, double value) { print_kv(key, tda::format_real(value)); }

std::string join(const std::vector<std::string>& v, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : std::string()) + v[i];
    return out;
}

tda::FittedTda maybe_subset(const tda::FittedTda& model, const std::string& markers) {
    if (markers.empty()) return model;
    return tda::subset_model(model, resolve_markers(markers, model.marker_names));
}

// Options shared by several subcommands.
struct Options {
    std::string data, model, out, disease_col = "disease";
    std::string family = "loc", corr = "global", markers, scenario, methods = "lsTDA,lda,logistic,qda";
    std::string resources, budgets, config, stats;
    int order = 6, grid = 2001, bootstrap = 0, reps = 100, cls = 0;
    long long n = 0, n0 = -1, n1 = -1;
    double level = 0.95;
    std::optional<double> threshold;
    std::optional<std::uint64_t> seed;
    std::string assess_order;
};

std::uint64_t need_seed(const Options& o, const char* cmd) {
    if (!o.seed) throw Usage(std::string(cmd) + ": --seed is required");
    return *o.seed;
}

int cmd_fit(const Options& o) {
    if (o.order < 1) throw Usage("fit: --order must be at least 1");
    const tda::CaseControlData data = tda::read_csv(o.data, o.disease_col);
    tda::ModelSpec spec;
    spec.family = tda::parse_family(o.family);
    spec.scope = tda::parse_scope(o.corr);
    spec.order = o.order;
    const tda::FittedTda model = tda::fit(data, spec);
    tda::save_model(model, o.out);
    print_kv("variant", tda::variant_name(model.spec));
    print_kv("loglik", model.loglik);
    print_kv("n_params", std::to_string(model.n_params));
    print_kv("converged", model.converged ? "true" : "false");
    print_kv("iterations", std::to_string(model.iterations));
    if (!model.converged) {
        std::cerr << "tda fit: optimizer did not converge; model written with converged=false\n";
        return kNotConverged;
    }
    return kOk;
}

int cmd_score(const Options& o) {
    const tda::FittedTda model = tda::load_model(o.model);
    const ScoreInput in = read_markers(o.data, model.marker_names, o.disease_col);
    const tda::Scorer scorer(model);
    std::ostringstream csv;
    const bool has_d = !in.disease.empty() && in.disease.front().has_value();
    csv << "row" << (has_d ? "," + o.disease_col : "") << ",log_lr" << (o.threshold ? ",decision" : "") << '\n';
    Eigen::Index n_missing = 0;
    for (Eigen::Index i = 0; i < in.y.rows(); ++i) {
        const Eigen::VectorXd y = in.y.row(i).transpose();
        double s = std::nan("");
        if (y.array().isNaN().all()) ++n_missing;
        else s = scorer(y.data());
        csv << i + 1;
        if (has_d) csv << ',' << *in.disease[static_cast<std::size_t>(i)];
        csv << ',' << tda::format_real(s);
        if (o.threshold) csv << ',' << (std::isnan(s) ? "NA" : (s > *o.threshold ? "1" : "0"));
        csv << '\n';
    }
    write_text(o.out, csv.str());
    print_kv("rows", std::to_string(in.y.rows()));
    print_kv("all_missing", std::to_string(n_missing));
    return kOk;
}

tda::RocOptions roc_options(const Options& o, const tda::FittedTda& model, const char* cmd) {
    tda::RocOptions ro;
    if (model.spec.family == tda::MarginalFamily::Free) ro.seed = need_seed(o, cmd);
    return ro;
}

int cmd_roc(const Options& o) {
    if (o.grid < 2) throw Usage("roc: --grid must be at least 2");
    const tda::FittedTda model = maybe_subset(tda::load_model(o.model), o.markers);
    const tda::RocOptions ro = roc_options(o, model, "roc");
    const tda::RocCurve roc = tda::model_roc(model, tda::uniform_grid(o.grid), ro);
    tda::write_roc_csv(roc, o.out);
    print_kv("markers", join(model.marker_names));
    print_kv("auc_trapezoid", roc.auc);
    print_kv("auc", tda::model_auc(model, ro));
    return kOk;
}

std::pair<Eigen::Index, Eigen::Index> class_sizes(const Options& o, const char* cmd) {
    if (!o.data.empty()) {
        const tda::CaseControlData data = tda::read_csv(o.data, o.disease_col);
        return {data.count(0), data.count(1)};
    }
    if (o.n0 < 1 || o.n1 < 1) throw Usage(std::string(cmd) + ": give --data or both --n0 and --n1");
    return {o.n0, o.n1};
}

void print_bootstrap(const tda::BootstrapResult& r) {
    const std::string p = r.statistic + ".";
    print_kv(p + "estimate", r.estimate);
    print_kv(p + "ci_low", r.ci_low);
    print_kv(p + "ci_high", r.ci_high);
    print_kv(p + "n_failed", std::to_string(r.n_failed));
}

int cmd_auc(const Options& o) {
    const tda::FittedTda model = tda::load_model(o.model);
    const tda::FittedTda sub = maybe_subset(model, o.markers);
    const tda::RocOptions ro = roc_options(o, model, "auc");
    print_kv("markers", join(sub.marker_names));
    print_kv("auc", tda::model_auc(sub, ro));
    if (o.bootstrap == 0) return kOk;
    const std::uint64_t seed = need_seed(o, "auc");
    const auto [n0, n1] = class_sizes(o, "auc");
    const tda::NamedStatistic stat = tda::parse_statistic(o.markers.empty() ? "auc" : "auc:" + o.markers, model, ro);
    const tda::BootstrapResult r = tda::parametric_bootstrap(model, n0, n1, o.bootstrap, stat, o.level, seed);
    if (!o.out.empty()) write_text(o.out, tda::bootstrap_to_csv({r}));
    print_kv("level", o.level);
    print_kv("B", std::to_string(r.B));
    print_kv("ci_low", r.ci_low);
    print_kv("ci_high", r.ci_high);
    print_kv("n_failed", std::to_string(r.n_failed));
    return kOk;
}

int cmd_bootstrap(const Options& o) {
    const tda::FittedTda model = tda::load_model(o.model);
    const std::uint64_t seed = need_seed(o, "bootstrap");
    const auto [n0, n1] = class_sizes(o, "bootstrap");
    std::vector<std::string> names = split_commas(o.stats);
    if (names.empty()) {
        for (const auto& m : model.marker_names) names.push_back("delta:" + m);
        if (model.spec.family == tda::MarginalFamily::LocationScale)
            for (const auto& m : model.marker_names) names.push_back("gamma:" + m);
    }
    const tda::RocOptions ro = roc_options(o, model, "bootstrap");
    std::vector<tda::NamedStatistic> stats;
    for (const auto& n : names) stats.push_back(tda::parse_statistic(n, model, ro));
    const auto res = tda::parametric_bootstrap(model, n0, n1, o.bootstrap, stats, o.level, seed);
    write_text(o.out, tda::bootstrap_to_csv(res));
    print_kv("B", std::to_string(o.bootstrap));
    for (const auto& r : res) print_bootstrap(r);
    return kOk;
}

int cmd_simulate(const Options& o) {
    const std::uint64_t seed = need_seed(o, "simulate");
    if (o.n < 2) throw Usage("simulate: --n must be at least 2");
    const tda::Scenario sc = tda::parse_scenario(o.scenario);
    const auto n = static_cast<Eigen::Index>(o.n);
    const tda::CaseControlData data = tda::generate(sc, n / 2, n - n / 2, seed);
    tda::write_csv(data, o.out, o.disease_col);
    print_kv("scenario", tda::scenario_name(sc));
    print_kv("n0", std::to_string(data.count(0)));
    print_kv("n1", std::to_string(data.count(1)));
    return kOk;
}

void print_quartiles(const std::vector<std::string>& methods, const std::vector<std::array<double, 3>>& q,
                     const std::vector<int>& failed) {
    for (std::size_t m = 0; m < methods.size(); ++m) {
        print_kv(methods[m] + ".q25", q[m][0]);
        print_kv(methods[m] + ".median", q[m][1]);
        print_kv(methods[m] + ".q75", q[m][2]);
        print_kv(methods[m] + ".n_failed", std::to_string(failed[m]));
    }
}

int cmd_holdout(const Options& o) {
    const std::uint64_t seed = need_seed(o, "holdout");
    if (o.reps < 1) throw Usage("holdout: --reps must be at least 1");
    const tda::CaseControlData data = tda::read_csv(o.data, o.disease_col);
    std::vector<tda::Method> methods;
    for (const auto& name : split_commas(o.methods)) methods.push_back(tda::make_method(name, o.order));
    const tda::HoldoutResult res = tda::holdout_eval(data, methods, o.reps, seed);
    write_text(o.out, tda::holdout_to_csv(res));
    std::vector<std::array<double, 3>> q;
    for (std::size_t m = 0; m < methods.size(); ++m) q.push_back(res.quartiles(m));
    print_quartiles(res.methods, q, res.n_failed);
    return kOk;
}

int cmd_assess(const Options& o) {
    if (o.cls != 0 && o.cls != 1) throw Usage("assess: --class must be 0 or 1");
    const tda::FittedTda model = tda::load_model(o.model);
    tda::CaseControlData data = tda::read_csv(o.data, o.disease_col);
    std::vector<int> cols;
    for (const auto& name : model.marker_names) {
        const auto it = std::find(data.marker_names.begin(), data.marker_names.end(), name);
        if (it == data.marker_names.end()) throw tda::ParseError("assess: marker '" + name + "' not in data");
        cols.push_back(static_cast<int>(it - data.marker_names.begin()));
    }
    data = data.markers(cols);
    const std::vector<int> order = o.assess_order.empty() ? std::vector<int>{}
                                                          : resolve_markers(o.assess_order, model.marker_names);
    const tda::RosenblattReport rep = tda::rosenblatt(model, data, o.cls, order);
    write_text(o.out, tda::rosenblatt_to_csv(rep));
    print_kv("class", std::to_string(rep.d));
    print_kv("n_used", std::to_string(rep.n_used));
    print_kv("n_skipped", std::to_string(rep.n_skipped));
    for (std::size_t j = 0; j < rep.ks_stat.size(); ++j) {
        print_kv(rep.marker_names[j] + ".ks", rep.ks_stat[j]);
        print_kv(rep.marker_names[j] + ".p", rep.ks_pvalue[j]);
    }
    return kOk;
}

int cmd_select(const Options& o) {
    const tda::FittedTda model = tda::load_model(o.model);
    const tda::ResourceProblem p = tda::load_problem(model, o.resources, o.budgets);
    const tda::SubsetResult r = tda::optimize_subset(p);
    std::vector<std::string> chosen;
    for (int j : r.selected) chosen.push_back(p.marker_names[static_cast<std::size_t>(j)]);
    std::ostringstream usage;
    for (Eigen::Index k = 0; k < r.usage.size(); ++k)
        usage << (k ? "," : "") << p.resource_names[static_cast<std::size_t>(k)] << ':' << tda::format_real(r.usage[k])
              << '/' << tda::format_real(p.b[k]);
    std::cout << "selected=" << join(chosen) << " auc=" << tda::format_real(r.auc) << " usage=" << usage.str()
              << '\n';
    return kOk;
}

int cmd_study(const Options& o) {
    tda::StudyConfig cfg = tda::parse_study_config(slurp(o.config));
    if (o.seed) cfg.seed = *o.seed;
    const auto rows = tda::run_study(cfg);
    write_text(o.out, tda::study_to_csv(rows));
    for (auto n : cfg.n) {
        for (const auto& name : cfg.methods) {
            std::vector<double> v;
            for (const auto& r : rows)
                if (r.n == n && r.method == name && !std::isnan(r.oos_auc)) v.push_back(r.oos_auc);
            std::sort(v.begin(), v.end());
            const double med = v.empty() ? std::nan("")
                                         : (v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]));
            print_kv(name + ".N" + std::to_string(n) + ".median", med);
        }
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transformation discriminant analysis for case-control biomarker data"};
    app.require_subcommand(1);
    Options o;

    auto data_opts = [&](CLI::App* c, bool required) {
        auto* opt = c->add_option("--data", o.data, "Case-control CSV");
        if (required) opt->required();
        c->add_option("--disease-col", o.disease_col, "Name of the 0/1 disease column")->capture_default_str();
    };
    auto seed_opt = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Random seed"); };

    auto* fit = app.add_subcommand("fit", "Fit a model and write it as JSON");
    data_opts(fit, true);
    fit->add_option("--family", o.family, "free | loc | locscale")->capture_default_str();
    fit->add_option("--corr", o.corr, "global | per-disease")->capture_default_str();
    fit->add_option("--order", o.order, "Bernstein order M")->capture_default_str();
    fit->add_option("--out", o.out, "Model JSON path")->required();

    auto* score = app.add_subcommand("score", "Per-row log likelihood ratio");
    score->add_option("--model", o.model)->required();
    data_opts(score, true);
    score->add_option("--out", o.out, "Scores CSV path")->required();
    score->add_option("--threshold", o.threshold, "Also emit decision = log_lr > threshold");

    auto* roc = app.add_subcommand("roc", "Model-based ROC curve");
    roc->add_option("--model", o.model)->required();
    roc->add_option("--markers", o.markers, "Comma-separated marker subset");
    roc->add_option("--grid", o.grid, "Number of false-positive rates")->capture_default_str();
    roc->add_option("--out", o.out, "ROC CSV path")->required();
    seed_opt(roc);

    auto* auc = app.add_subcommand("auc", "Model-based AUC, optionally with a bootstrap interval");
    auc->add_option("--model", o.model)->required();
    auc->add_option("--markers", o.markers, "Comma-separated marker subset");
    auc->add_option("--bootstrap", o.bootstrap, "Parametric bootstrap replicates (>= 100)");
    auc->add_option("--level", o.level, "Interval level")->capture_default_str();
    data_opts(auc, false);
    auc->add_option("--n0", o.n0, "Controls per bootstrap sample");
    auc->add_option("--n1", o.n1, "Cases per bootstrap sample");
    auc->add_option("--out", o.out, "Bootstrap summary CSV path");
    seed_opt(auc);

    auto* boot = app.add_subcommand("bootstrap", "Parametric bootstrap intervals for model statistics");
    boot->add_option("--model", o.model)->required();
    boot->add_option("--stat", o.stats, "Comma-separated statistics (default: every delta and gamma)");
    boot->add_option("--B", o.bootstrap, "Replicates (>= 100)")->required();
    boot->add_option("--level", o.level, "Interval level")->capture_default_str();
    data_opts(boot, false);
    boot->add_option("--n0", o.n0, "Controls per bootstrap sample");
    boot->add_option("--n1", o.n1, "Cases per bootstrap sample");
    boot->add_option("--out", o.out, "Interval summary CSV path")->required();
    seed_opt(boot);

    auto* sim = app.add_subcommand("simulate", "Draw a simulation scenario");
    sim->add_option("--scenario", o.scenario, "A B1 B2 C_normal C_skewed D_clayton D_gumbel E_linear E_interaction")
        ->required();
    sim->add_option("--n", o.n, "Total rows, split evenly between classes")->required();
    sim->add_option("--disease-col", o.disease_col)->capture_default_str();
    sim->add_option("--out", o.out, "CSV path")->required();
    seed_opt(sim);

    auto* hold = app.add_subcommand("holdout", "Repeated 50/50 holdout comparison");
    data_opts(hold, true);
    hold->add_option("--methods", o.methods, "Comma-separated methods")->capture_default_str();
    hold->add_option("--reps", o.reps)->capture_default_str();
    hold->add_option("--order", o.order, "Bernstein order for TDA methods")->capture_default_str();
    hold->add_option("--out", o.out, "Per-replication AUC CSV path")->required();
    seed_opt(hold);

    auto* assess = app.add_subcommand("assess", "Rosenblatt transform and Kolmogorov tests");
    assess->add_option("--model", o.model)->required();
    data_opts(assess, true);
    assess->add_option("--class", o.cls, "Class 0 or 1")->capture_default_str();
    assess->add_option("--order", o.assess_order, "Conditioning order of markers");
    assess->add_option("--out", o.out, "Transformed values CSV path")->required();

    auto* sel = app.add_subcommand("select", "Best marker subset under resource budgets");
    sel->add_option("--model", o.model, "Location/global model JSON")->required();
    sel->add_option("--resources", o.resources, "CSV: resource,<markers...>")->required();
    sel->add_option("--budgets", o.budgets, "CSV: resource,budget")->required();

    auto* study = app.add_subcommand("study", "Run a simulation study from a config file");
    study->add_option("--config", o.config)->required();
    study->add_option("--out", o.out, "Tidy results CSV path")->required();
    seed_opt(study);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        if (name == "fit") return cmd_fit(o);
        if (name == "score") return cmd_score(o);
        if (name == "roc") return cmd_roc(o);
        if (name == "auc") return cmd_auc(o);
        if (name == "bootstrap") return cmd_bootstrap(o);
        if (name == "simulate") return cmd_simulate(o);
        if (name == "holdout") return cmd_holdout(o);
        if (name == "assess") return cmd_assess(o);
        if (name == "select") return cmd_select(o);
        if (name == "study") return cmd_study(o);
    } catch (const Usage& e) {
        std::cerr << "tda " << e.what() << '\n';
        return kUsage;
    } catch (const tda::ParseError& e) {
        std::cerr << "tda " << name << ": " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "tda " << name << ": " << e.what() << '\n';
        return kUsage;
    } catch (const tda::DegenerateData& e) {
        std::cerr << "tda " << name << ": " << e.what() << '\n';
        return kBadData;
    } catch (const tda::InsufficientData& e) {
        std::cerr << "tda " << name << ": " << e.what() << '\n';
        return kBadData;
    } catch (const std::exception& e) {
        std::cerr << "tda " << name << ": " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
