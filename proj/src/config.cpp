#include "lqmfg/config.hpp"

#include "lqmfg/csv.hpp"
#include "lqmfg/nare.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace lqmfg {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const std::string& where)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
    for (const auto& k : required)
        if (!obj.contains(k))
            throw std::invalid_argument("missing key '" + k + "' in " + where);
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& name)
{
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw std::invalid_argument(name + " must be a nested (row-major) array");
    const int rows = (int)j.size(), cols = (int)j[0].size();
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if ((int)j[i].size() != cols)
            throw std::invalid_argument(name + " has ragged rows");
        for (int c = 0; c < cols; ++c) {
            if (!j[i][c].is_number())
                throw std::invalid_argument(name + " entries must be numbers");
            m(i, c) = j[i][c].get<double>();
        }
    }
    return m;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& name)
{
    if (!j.is_array()) throw std::invalid_argument(name + " must be an array");
    Eigen::VectorXd v(j.size());
    for (int i = 0; i < (int)j.size(); ++i) {
        if (!j[i].is_number()) throw std::invalid_argument(name + " entries must be numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

json matrix_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const Eigen::VectorXd& v)
{
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

InitialLaw parse_initial(const json& j, int n)
{
    require_keys(j, {"kind", "values", "mean", "cov"}, {"kind"}, "sim.initial");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "deterministic") {
        InitialLaw law;
        law.kind = InitialLaw::Kind::deterministic;
        for (const auto& row : j.at("values"))
            law.values.push_back(parse_vector(row, "sim.initial.values[]"));
        return law;
    }
    if (kind == "gaussian") {
        Eigen::MatrixXd cov = j.contains("cov") ? parse_matrix(j.at("cov"), "sim.initial.cov")
                                                : Eigen::MatrixXd::Identity(n, n);
        return InitialLaw::gaussian(parse_vector(j.at("mean"), "sim.initial.mean"), cov);
    }
    throw std::invalid_argument("sim.initial.kind must be 'deterministic' or 'gaussian'");
}

}  // namespace

ScenarioConfig parse_config(const std::string& text)
{
    json root = json::parse(text);
    require_keys(root, {"model", "x0", "finite_n", "sim", "kappa"}, {"model"}, "config root");

    const json& jm = root.at("model");
    require_keys(jm,
                 {"A", "B", "G", "D", "Q", "R", "Gamma", "eta", "Qf", "Gammaf", "etaf", "T"},
                 {"A", "B", "G", "D", "Q", "R", "Gamma", "eta", "Qf", "Gammaf", "etaf", "T"},
                 "model");

    Eigen::MatrixXd A = parse_matrix(jm.at("A"), "A");
    const int n = (int)A.rows();
    Eigen::MatrixXd B = parse_matrix(jm.at("B"), "B");
    Eigen::MatrixXd G = parse_matrix(jm.at("G"), "G");
    Eigen::MatrixXd D = parse_matrix(jm.at("D"), "D");
    Eigen::MatrixXd Q = parse_matrix(jm.at("Q"), "Q");
    Eigen::MatrixXd R = parse_matrix(jm.at("R"), "R");
    Eigen::MatrixXd Gamma = parse_matrix(jm.at("Gamma"), "Gamma");
    Eigen::VectorXd eta = parse_vector(jm.at("eta"), "eta");
    Eigen::MatrixXd Gammaf = parse_matrix(jm.at("Gammaf"), "Gammaf");
    Eigen::VectorXd etaf = parse_vector(jm.at("etaf"), "etaf");
    const double T = jm.at("T").get<double>();

    ScenarioConfig cfg;
    Eigen::MatrixXd Qf;
    if (jm.at("Qf").is_string()) {
        if (jm.at("Qf").get<std::string>() != "stationary")
            throw std::invalid_argument("Qf must be a matrix or the string 'stationary'");
        cfg.qf_stationary = true;
        // placeholder weight so the model assembles; replaced right below
        Qf = Eigen::MatrixXd::Zero(n, n);
    } else {
        Qf = parse_matrix(jm.at("Qf"), "Qf");
    }

    cfg.model = GameModel::make(A, B, G, D, Q, R, Gamma, eta, Qf, Gammaf, etaf, T);
    if (cfg.qf_stationary) {
        AREResult are = solve_are(cfg.model);
        cfg.model.Qf = are.lambda1_inf;
    }

    cfg.x0 = root.contains("x0") ? parse_vector(root.at("x0"), "x0")
                                 : Eigen::VectorXd::Zero(n);
    if (cfg.x0.size() != n) throw std::invalid_argument("x0 dimension mismatch");

    if (root.contains("finite_n")) {
        require_keys(root.at("finite_n"), {"Ns"}, {"Ns"}, "finite_n");
        for (const auto& v : root.at("finite_n").at("Ns")) {
            if (!v.is_number_integer()) throw std::invalid_argument("finite_n.Ns must be integers");
            cfg.finite_n_Ns.push_back(v.get<int>());
        }
    }

    if (root.contains("sim")) {
        const json& js = root.at("sim");
        require_keys(js, {"N", "paths", "dt", "seed", "profile", "initial"},
                     {"N", "paths", "dt", "initial"}, "sim");
        ScenarioConfig::Sim sim;
        sim.N = js.at("N").get<int>();
        sim.paths = js.at("paths").get<int>();
        sim.dt = js.at("dt").get<double>();
        sim.seed = js.value("seed", (std::uint64_t)0);
        sim.profile = js.value("profile", std::string("exact_nash"));
        if (sim.profile != "exact_nash" && sim.profile != "direct_decentralized" &&
            sim.profile != "fixed_point")
            throw std::invalid_argument("unknown sim.profile '" + sim.profile + "'");
        sim.initial_law = parse_initial(js.at("initial"), n);
        cfg.sim = sim;
    }

    if (root.contains("kappa")) {
        require_keys(root.at("kappa"), {"nodes"}, {}, "kappa");
        cfg.kappa_nodes = root.at("kappa").value("nodes", 401);
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open config file " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_model(const GameModel& m, const Eigen::VectorXd& x0)
{
    json jm;
    jm["A"] = matrix_json(m.A);
    jm["B"] = matrix_json(m.B);
    jm["G"] = matrix_json(m.G);
    jm["D"] = matrix_json(m.D);
    jm["Q"] = matrix_json(m.Q);
    jm["R"] = matrix_json(m.R);
    jm["Gamma"] = matrix_json(m.Gamma);
    jm["eta"] = vector_json(m.eta);
    jm["Qf"] = matrix_json(m.Qf);
    jm["Gammaf"] = matrix_json(m.Gammaf);
    jm["etaf"] = vector_json(m.etaf);
    jm["T"] = m.T;
    json root;
    root["model"] = jm;
    root["x0"] = vector_json(x0);
    return root.dump(2);
}

}  // namespace lqmfg
