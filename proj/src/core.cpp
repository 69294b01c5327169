#include "mjls/core.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mjls {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void Model::validate() const {
    require(n_modes >= 1, "n_modes must be >= 1");
    require(ns >= 1 && na >= 0 && ny >= 1, "bad dimensions");
    require((int)A.size() == n_modes && (int)B.size() == n_modes &&
                (int)C.size() == n_modes,
            "A/B/C must have one matrix per mode");
    for (int i = 0; i < n_modes; ++i) {
        require(A[i].rows() == ns && A[i].cols() == ns, "A[i] must be ns x ns");
        require(B[i].rows() == ns && B[i].cols() == na, "B[i] must be ns x na");
        require(C[i].rows() == ny && C[i].cols() == ns, "C[i] must be ny x ns");
    }
    if (P) {
        require(P->rows() == n_modes && P->cols() == n_modes,
                "P must be n_modes x n_modes");
        require(is_stochastic(*P), "P must be row-stochastic");
    }
}

bool is_stochastic(const Matrix& P, double tol) {
    if (P.rows() != P.cols()) return false;
    for (int i = 0; i < P.rows(); ++i) {
        if (P.row(i).minCoeff() < -tol) return false;
        if (std::abs(P.row(i).sum() - 1.0) > tol) return false;
    }
    return true;
}

bool is_ergodic(const Matrix& P) {
    const int n = (int)P.rows();
    Matrix Q = P;
    for (int k = 1; k <= n * n; ++k) {
        if (Q.minCoeff() > 0) return true;
        Q = Q * P;
    }
    return false;
}

PathAlgebra PathAlgebra::start(const Model& m, int mode0) {
    PathAlgebra pa;
    pa.model = &m;
    pa.path = {mode0};
    pa.O = m.C[mode0];
    pa.G = Matrix::Zero(m.ny, 0);
    pa.Phi = Matrix::Identity(m.ns, m.ns);
    return pa;
}

PathAlgebra PathAlgebra::build(const Model& m, const Path& path) {
    if (path.empty()) throw std::invalid_argument("empty path");
    PathAlgebra pa = start(m, path[0]);
    for (size_t k = 1; k < path.size(); ++k) pa = pa.extended(path[k]);
    return pa;
}

PathAlgebra PathAlgebra::extended(int mode) const {
    const Model& m = *model;
    PathAlgebra pa;
    pa.model = model;
    pa.path = path;
    pa.path.push_back(mode);
    const int N = (int)path.size();  // new path has N+1 entries, N controls
    pa.Phi = m.A[path.back()] * Phi;
    pa.O.resize((N + 1) * m.ny, m.ns);
    pa.O.topRows(N * m.ny) = O;
    pa.O.bottomRows(m.ny) = m.C[mode] * pa.Phi;
    // New block row of G: y_N gains C_{mode} A_{th_{N-1}}..A_{th_{l+1}} B_{th_l} u_l.
    pa.G = Matrix::Zero((N + 1) * m.ny, N * m.na);
    pa.G.topLeftCorner(N * m.ny, (N - 1) * m.na) = G;
    Matrix tail = m.C[mode];  // running product C_{mode} A_{th_{N-1}} .. A_{th_{l+1}}
    for (int l = N - 1; l >= 0; --l) {
        pa.G.block(N * m.ny, l * m.na, m.ny, m.na) = tail * m.B[path[l]];
        if (l > 0) tail = tail * m.A[path[l]];
    }
    return pa;
}

Matrix obs_matrix(const Model& m, const Path& path) {
    return PathAlgebra::build(m, path).O;
}

Matrix input_effect(const Model& m, const Path& path) {
    return PathAlgebra::build(m, path).G;
}

Vector predict_outputs(const Model& m, const Path& path, const Vector& x0,
                       const Vector& u) {
    PathAlgebra pa = PathAlgebra::build(m, path);
    if (x0.size() != m.ns || u.size() != pa.G.cols())
        throw std::invalid_argument("predict_outputs: shape mismatch");
    return pa.O * x0 + pa.G * u;
}

std::vector<int> sample_chain(const Matrix& P, int theta0, int T,
                              std::uint64_t seed) {
    if (!is_stochastic(P)) throw std::invalid_argument("P not stochastic");
    if (theta0 < 0 || theta0 >= P.rows())
        throw std::invalid_argument("bad initial mode");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> seq(T + 1);
    seq[0] = theta0;
    for (int t = 1; t <= T; ++t) {
        const double r = unif(rng);
        double acc = 0.0;
        int next = (int)P.cols() - 1;
        for (int j = 0; j < P.cols(); ++j) {
            acc += P(seq[t - 1], j);
            if (r <= acc) {
                next = j;
                break;
            }
        }
        seq[t] = next;
    }
    return seq;
}

namespace {

Matrix json_matrix(const nlohmann::json& j, int rows, int cols,
                   const std::string& name) {
    require(j.is_array() && (int)j.size() == rows, name + ": bad row count");
    Matrix M(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const auto& row = j[r];
        require(row.is_array() && (int)row.size() == cols,
                name + ": bad column count");
        for (int c = 0; c < cols; ++c) {
            require(row[c].is_number(), name + ": non-numeric entry");
            M(r, c) = row[c].get<double>();
        }
    }
    return M;
}

nlohmann::json matrix_json(const Matrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < M.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

Model parse_model(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("model JSON parse error: ") +
                                    e.what());
    }
    Model m;
    for (const char* key : {"n_modes", "ns", "na", "ny"})
        require(j.contains(key) && j[key].is_number_integer(),
                std::string("missing integer field ") + key);
    m.n_modes = j["n_modes"].get<int>();
    m.ns = j["ns"].get<int>();
    m.na = j["na"].get<int>();
    m.ny = j["ny"].get<int>();
    require(j.contains("A") && j.contains("B") && j.contains("C"),
            "missing A/B/C");
    auto read_list = [&](const char* key, int rows, int cols) {
        std::vector<Matrix> out;
        const auto& arr = j[key];
        require(arr.is_array() && (int)arr.size() == m.n_modes,
                std::string(key) + ": need one matrix per mode");
        for (int i = 0; i < m.n_modes; ++i)
            out.push_back(json_matrix(arr[i], rows, cols,
                                      std::string(key) + "[" +
                                          std::to_string(i + 1) + "]"));
        return out;
    };
    m.A = read_list("A", m.ns, m.ns);
    m.B = read_list("B", m.ns, m.na);
    m.C = read_list("C", m.ny, m.ns);
    if (j.contains("P") && !j["P"].is_null())
        m.P = json_matrix(j["P"], m.n_modes, m.n_modes, "P");
    m.validate();
    return m;
}

Model load_model(const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in) throw std::invalid_argument("cannot open model file " + file_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string model_to_json(const Model& m) {
    nlohmann::json j;
    j["n_modes"] = m.n_modes;
    j["ns"] = m.ns;
    j["na"] = m.na;
    j["ny"] = m.ny;
    for (const char* key : {"A", "B", "C"}) j[key] = nlohmann::json::array();
    for (int i = 0; i < m.n_modes; ++i) {
        j["A"].push_back(matrix_json(m.A[i]));
        j["B"].push_back(matrix_json(m.B[i]));
        j["C"].push_back(matrix_json(m.C[i]));
    }
    if (m.P) j["P"] = matrix_json(*m.P);
    return j.dump(2);
}

}  // namespace mjls
