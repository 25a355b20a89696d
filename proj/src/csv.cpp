#include "rhodich/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <fstream>
#include <sstream>

namespace rhodich {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

// header + numeric rows; blank lines skipped
std::vector<std::vector<double>> read_rows(const std::string& path,
                                           std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open CSV file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw ArgumentError("empty CSV file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    header = split_row(line);
    std::vector<std::vector<double>> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_row(line);
        if (cells.size() != header.size()) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected " << header.size()
               << " columns, got " << cells.size();
            throw ArgumentError(os.str());
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                size_t pos = 0;
                row.push_back(std::stod(c, &pos));
                if (pos != c.size()) throw std::invalid_argument(c);
            } catch (const std::exception&) {
                std::ostringstream os;
                os << path << ":" << lineno << ": bad numeric cell '" << c << "'";
                throw ArgumentError(os.str());
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ArgumentError("CSV has no data rows: " + path);
    return rows;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

SampledFunction read_sampled_function(const std::string& path) {
    std::vector<std::string> header;
    auto rows = read_rows(path, header);
    if (header.size() < 2 || header[0] != "t")
        throw ArgumentError("sampled-function CSV needs header t,x1,...: " + path);
    const size_t d = header.size() - 1;
    std::vector<double> grid(rows.size());
    MatrixXd values(static_cast<Eigen::Index>(d),
                    static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        grid[i] = rows[i][0];
        for (size_t j = 0; j < d; ++j)
            values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                rows[i][j + 1];
    }
    return SampledFunction(std::move(grid), std::move(values));
}

void write_sampled_function(const std::string& path, const SampledFunction& f) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write CSV file: " + path);
    out << "t";
    for (int j = 1; j <= f.dim(); ++j) out << ",x" << j;
    out << "\n";
    const auto& g = f.grid();
    for (size_t i = 0; i < g.size(); ++i) {
        out << fmt(g[i]);
        for (int j = 0; j < f.dim(); ++j)
            out << "," << fmt(f.values()(j, static_cast<Eigen::Index>(i)));
        out << "\n";
    }
}

SubspaceZ read_subspace(const std::string& path) {
    std::vector<std::string> header;
    auto rows = read_rows(path, header);
    const size_t k = header.size();
    std::vector<VectorXd> cols(k, VectorXd(static_cast<Eigen::Index>(rows.size())));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < k; ++j)
            cols[j](static_cast<Eigen::Index>(i)) = rows[i][j];
    return SubspaceZ::span(cols);
}

void write_subspace(const std::string& path, const SubspaceZ& Z) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write CSV file: " + path);
    for (int j = 0; j < Z.rank(); ++j) out << (j ? "," : "") << "b" << (j + 1);
    if (Z.rank() == 0) out << "b0";  // keeps a header even for the trivial space
    out << "\n";
    for (int i = 0; i < Z.dim(); ++i) {
        for (int j = 0; j < Z.rank(); ++j)
            out << (j ? "," : "") << fmt(Z.basis(i, j));
        if (Z.rank() == 0) out << "0";
        out << "\n";
    }
}

EvolutionFamily read_ode_family(const std::string& path, double tol) {
    std::vector<std::string> header;
    auto rows = read_rows(path, header);
    if (header.size() < 2 || header[0] != "t")
        throw ArgumentError("matrix-family CSV needs header t,a11,a12,...: " + path);
    const size_t entries = header.size() - 1;
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(
        static_cast<double>(entries))));
    if (static_cast<size_t>(d) * static_cast<size_t>(d) != entries)
        throw ArgumentError("matrix-family CSV column count is not t + d*d: " + path);
    auto grid = std::make_shared<std::vector<double>>();
    auto mats = std::make_shared<std::vector<MatrixXd>>();
    for (const auto& row : rows) {
        if (!grid->empty() && row[0] <= grid->back())
            throw ArgumentError("matrix-family CSV times must strictly increase: " +
                                path);
        grid->push_back(row[0]);
        MatrixXd A(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                A(i, j) = row[1 + static_cast<size_t>(i * d + j)];
        mats->push_back(std::move(A));
    }
    auto A_of_t = [grid, mats](double t) -> MatrixXd {
        if (t <= grid->front()) return mats->front();
        if (t >= grid->back()) return mats->back();
        auto it = std::upper_bound(grid->begin(), grid->end(), t);
        size_t hi = static_cast<size_t>(it - grid->begin());
        size_t lo = hi - 1;
        double w = (t - (*grid)[lo]) / ((*grid)[hi] - (*grid)[lo]);
        return (1.0 - w) * (*mats)[lo] + w * (*mats)[hi];
    };
    return EvolutionFamily::ode(static_cast<int>(d), A_of_t, tol);
}

std::pair<std::vector<double>, std::vector<double>> read_mu_samples(
    const std::string& path) {
    std::vector<std::string> header;
    auto rows = read_rows(path, header);
    if (header.size() != 2 || header[0] != "t" || header[1] != "mu")
        throw ArgumentError("rate-density CSV needs header t,mu: " + path);
    std::vector<double> ts, mus;
    for (const auto& row : rows) {
        ts.push_back(row[0]);
        mus.push_back(row[1]);
    }
    return {std::move(ts), std::move(mus)};
}

}  // namespace rhodich
