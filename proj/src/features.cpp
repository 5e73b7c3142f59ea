#include "pbgd/features.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pbgd/errors.hpp"

namespace pbgd {

int feature_dim(int n) {
    if (n < 1) throw std::invalid_argument("feature_dim: n must be >= 1");
    return n * (n + 1) / 2 + n + 1;
}

void kernel_map_into(std::span<const double> x, std::span<double> out) {
    const int n = static_cast<int>(x.size());
    std::size_t idx = 0;
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) out[idx++] = x[j] * x[k];
    for (int j = 0; j < n; ++j) out[idx++] = x[j];
    out[idx++] = 1.0;
}

Vec kernel_map(const Vec& x) {
    if (x.empty()) throw std::invalid_argument("kernel_map: empty input");
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("kernel_map: non-finite input");
    Vec out(feature_dim(static_cast<int>(x.size())));
    kernel_map_into(x, out);
    return out;
}

namespace {

void check_dims(const Vec& theta, int n, const char* who) {
    if (static_cast<int>(theta.size()) != feature_dim(n))
        throw std::invalid_argument(std::string(who) + ": theta length " +
                                    std::to_string(theta.size()) + " does not match feature_dim(" +
                                    std::to_string(n) + ")");
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double objective(const Vec& theta, const Dataset& data, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("objective: lambda must be > 0");
    if (data.examples.empty()) throw std::invalid_argument("objective: empty dataset");
    check_dims(theta, data.n, "objective");
    const int l = static_cast<int>(theta.size());
    Vec phi(l);
    double acc = 0.0;
    for (const Example& e : data.examples) {
        kernel_map_into(e.x, phi);
        const double r = dot(theta, phi) - e.y;
        acc += r * r;
    }
    return acc / static_cast<double>(data.m()) + lambda * dot(theta, theta);
}

Vec gradient(const Vec& theta, std::span<const Example> subset, double lambda) {
    if (subset.empty()) throw std::invalid_argument("gradient: empty subset");
    const int n = static_cast<int>(subset.front().x.size());
    check_dims(theta, n, "gradient");
    const int l = static_cast<int>(theta.size());
    Vec phi(l);
    Vec acc(l, 0.0);
    for (const Example& e : subset) {
        if (static_cast<int>(e.x.size()) != n)
            throw std::invalid_argument("gradient: ragged subset");
        kernel_map_into(e.x, phi);
        const double r = dot(theta, phi) - e.y;
        for (int c = 0; c < l; ++c) acc[c] += r * phi[c];
    }
    const double inv = 1.0 / static_cast<double>(subset.size());
    Vec g(l);
    for (int c = 0; c < l; ++c) g[c] = acc[c] * inv + lambda * theta[c];
    return g;
}

Vec solve_closed_form(const Dataset& data, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("solve_closed_form: lambda must be > 0");
    if (data.examples.empty()) throw std::invalid_argument("solve_closed_form: empty dataset");
    const int l = feature_dim(data.n);
    const int m = data.m();

    Eigen::MatrixXd phi(m, l);
    Eigen::VectorXd y(m);
    Vec row(l);
    for (int i = 0; i < m; ++i) {
        kernel_map_into(data.examples[i].x, row);
        for (int c = 0; c < l; ++c) phi(i, c) = row[c];
        y(i) = data.examples[i].y;
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    Eigen::MatrixXd a = (phi.transpose() * phi) * inv_m;
    a.diagonal().array() += lambda;
    Eigen::VectorXd b = (phi.transpose() * y) * inv_m;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("solve_closed_form: LDLT factorization failed, rcond=" +
                             std::to_string(ldlt.rcond()));
    Eigen::VectorXd sol = ldlt.solve(b);

    Vec theta(sol.data(), sol.data() + l);
    // Residual check in the gradient metric: gradient(theta*) = A theta* - b.
    const double resid = (a * sol - b).norm();
    if (!(resid <= 1e-8 * (1.0 + b.norm())))
        throw NumericalError("solve_closed_form: residual " + std::to_string(resid) +
                             " exceeds tolerance, rcond=" + std::to_string(ldlt.rcond()));
    return theta;
}

DataBounds compute_bounds(const Dataset& data) {
    if (data.examples.empty()) throw std::invalid_argument("compute_bounds: empty dataset");
    const int l = feature_dim(data.n);
    Vec phi(l);
    DataBounds b;
    for (const Example& e : data.examples) {
        kernel_map_into(e.x, phi);
        double sq = 0.0;
        for (double v : phi) {
            b.k_max = std::max(b.k_max, std::fabs(v));
            sq += v * v;
        }
        b.lip_hat = std::max(b.lip_hat, sq);
        b.y_max = std::max(b.y_max, std::fabs(e.y));
    }
    return b;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

Dataset load_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty dataset file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "y")
        throw ConfigError("bad dataset header (want x1,...,xn,y): " + path.string());
    const int n = static_cast<int>(header.size()) - 1;
    for (int j = 0; j < n; ++j)
        if (header[j] != "x" + std::to_string(j + 1))
            throw ConfigError("bad dataset header column '" + header[j] + "' in " + path.string());

    Dataset data;
    data.n = n;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != n + 1)
            throw ConfigError("dataset row " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, want " +
                              std::to_string(n + 1));
        Example e;
        e.x.resize(n);
        for (int j = 0; j <= n; ++j) {
            char* end = nullptr;
            const std::string& f = fields[j];
            double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0' || !std::isfinite(v))
                throw ConfigError("dataset row " + std::to_string(lineno) +
                                  ": bad value '" + f + "'");
            if (j < n)
                e.x[j] = v;
            else
                e.y = v;
        }
        data.examples.push_back(std::move(e));
    }
    if (data.examples.empty()) throw ConfigError("dataset has no rows: " + path.string());
    return data;
}

namespace {

std::string format_double_value(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void save_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write dataset file: " + path.string());
    for (int j = 0; j < data.n; ++j) out << 'x' << (j + 1) << ',';
    out << "y\n";
    for (const Example& e : data.examples) {
        for (double v : e.x) out << format_double_value(v) << ',';
        out << format_double_value(e.y) << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path.string());
}

}  // namespace pbgd
