#include "tda/serialize.hpp"

#include "tda/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace tda {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

std::string model_to_json(const FittedTda& m) {
    json doc;
    doc["format"] = "tda-model";
    doc["version"] = kFormatVersion;
    json spec;
    spec["family"] = family_name(m.spec.family);
    spec["scope"] = scope_name(m.spec.scope);
    spec["order"] = m.spec.order;
    spec["variant"] = variant_name(m.spec);
    json bounds = json::array();
    for (const auto& b : m.spec.bounds) bounds.push_back({b.first, b.second});
    spec["bounds"] = bounds;
    doc["spec"] = spec;
    doc["marker_names"] = m.marker_names;

    json theta = json::array();
    const int sets = m.spec.shared_transform() ? 1 : 2;
    for (int t = 0; t < sets; ++t) {
        json per_marker = json::array();
        for (const auto& c : m.coeffs[static_cast<std::size_t>(t)]) per_marker.push_back(to_vec(c.values()));
        theta.push_back(per_marker);
    }
    doc["theta"] = theta;
    doc["delta"] = to_vec(m.delta);
    doc["gamma"] = to_vec(m.gamma);
    json lambda = json::array();
    for (const auto& c : m.corr) lambda.push_back(to_vec(c.lambda()));
    doc["lambda"] = lambda;
    doc["loglik"] = m.loglik;
    doc["n_params"] = m.n_params;
    doc["convergence"] = {{"converged", m.converged}, {"iterations", m.iterations}, {"grad_norm", m.grad_norm}};
    return doc.dump(2) + "\n";
}

FittedTda model_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("format").get<std::string>() != "tda-model") throw ParseError("model: not a tda-model document");
        if (doc.at("version").get<int>() != kFormatVersion)
            throw ParseError("model: unsupported version " + std::to_string(doc.at("version").get<int>()));
        FittedTda m;
        const json& spec = doc.at("spec");
        m.spec.family = parse_family(spec.at("family").get<std::string>());
        m.spec.scope = parse_scope(spec.at("scope").get<std::string>());
        m.spec.order = spec.at("order").get<int>();
        for (const auto& b : spec.at("bounds")) m.spec.bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
        m.spec.validate();
        const int J = m.spec.n_markers();
        m.marker_names = doc.at("marker_names").get<std::vector<std::string>>();

        const json& theta = doc.at("theta");
        const std::size_t sets = m.spec.shared_transform() ? 1 : 2;
        if (theta.size() != sets) throw ParseError("model: wrong number of coefficient sets");
        for (std::size_t t = 0; t < sets; ++t) {
            if (theta[t].size() != static_cast<std::size_t>(J)) throw ParseError("model: wrong number of markers in theta");
            for (const auto& c : theta[t]) {
                Eigen::VectorXd v = from_vec(c);
                if (v.size() != m.spec.order + 1) throw ParseError("model: coefficient vector has the wrong length");
                m.coeffs[t].emplace_back(std::move(v));
            }
        }
        if (sets == 1) m.coeffs[1] = m.coeffs[0];
        m.delta = from_vec(doc.at("delta"));
        m.gamma = from_vec(doc.at("gamma"));
        if (m.delta.size() != J || m.gamma.size() != J) throw ParseError("model: delta/gamma have the wrong length");
        const json& lambda = doc.at("lambda");
        if (lambda.size() != static_cast<std::size_t>(m.spec.n_scopes())) throw ParseError("model: wrong number of lambda sets");
        for (const auto& l : lambda) m.corr.emplace_back(from_vec(l), J);
        if (m.marker_names.size() != static_cast<std::size_t>(J)) throw ParseError("model: wrong number of marker names");
        m.loglik = doc.at("loglik").get<double>();
        m.n_params = doc.at("n_params").get<Eigen::Index>();
        const json& conv = doc.at("convergence");
        m.converged = conv.at("converged").get<bool>();
        m.iterations = conv.at("iterations").get<int>();
        m.grad_norm = conv.at("grad_norm").get<double>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
}

void save_model(const FittedTda& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << model_to_json(model);
}

FittedTda load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

} // namespace tda
