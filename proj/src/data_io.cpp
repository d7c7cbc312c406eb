#include "latnkm/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

namespace latnkm {

Matrix Standardizer::transform_x(const Matrix& x) const {
    return (x.rowwise() - x_mean.transpose()).array().rowwise() /
           x_std.transpose().array();
}

Vector Standardizer::transform_y(const Vector& y) const {
    return (y.array() - y_mean) / y_std;
}

Vector Standardizer::untransform_y(const Vector& y) const {
    return y.array() * y_std + y_mean;
}

double Standardizer::untransform_y(double y) const { return y * y_std + y_mean; }

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    const auto where = "row " + std::to_string(row) + ", column " + std::to_string(col);
    std::size_t used = 0;
    double value;
    try {
        value = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw FormatError("non-numeric cell at " + where);
    }
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
    if (used != cell.size()) throw FormatError("non-numeric cell at " + where);
    if (!std::isfinite(value)) throw FormatError("non-finite value at " + where);
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 2) throw FormatError("need at least one feature and one target column");

    std::size_t target = header.size() - 1;
    if (!target_column.empty()) {
        const auto it = std::find(header.begin(), header.end(), target_column);
        if (it == header.end())
            throw FormatError("target column not found: " + target_column);
        target = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw FormatError("row " + std::to_string(row_no) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(header.size()));
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) values[c] = parse_cell(cells[c], row_no, c + 1);
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw FormatError("no data rows in " + path);

    Dataset ds;
    ds.name = path;
    ds.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(header.size() - 1));
    ds.y.resize(static_cast<Index>(rows.size()));
    for (std::size_t n = 0; n < rows.size(); ++n) {
        Index col = 0;
        for (std::size_t c = 0; c < rows[n].size(); ++c) {
            if (c == target)
                ds.y[static_cast<Index>(n)] = rows[n][c];
            else
                ds.X(static_cast<Index>(n), col++) = rows[n][c];
        }
    }
    return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, std::uint64_t seed,
                                  bool standardize, bool drop_constant) {
    if (!(train_frac > 0 && train_frac < 1)) throw ConfigError("train_frac must lie in (0, 1)");
    const Index n = ds.X.rows();
    const Index n_train = static_cast<Index>(train_frac * static_cast<double>(n));
    if (n_train < 1 || n_train >= n) throw InvalidData("degenerate split");

    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    Dataset train, test;
    train.name = ds.name + "/train";
    test.name = ds.name + "/test";
    train.X.resize(n_train, ds.X.cols());
    train.y.resize(n_train);
    test.X.resize(n - n_train, ds.X.cols());
    test.y.resize(n - n_train);
    for (Index i = 0; i < n_train; ++i) {
        train.X.row(i) = ds.X.row(perm[static_cast<std::size_t>(i)]);
        train.y[i] = ds.y[perm[static_cast<std::size_t>(i)]];
    }
    for (Index i = n_train; i < n; ++i) {
        test.X.row(i - n_train) = ds.X.row(perm[static_cast<std::size_t>(i)]);
        test.y[i - n_train] = ds.y[perm[static_cast<std::size_t>(i)]];
    }

    if (!standardize) return {train, test};

    Vector mean = train.X.colwise().mean();
    Vector sd(train.X.cols());
    for (Index c = 0; c < train.X.cols(); ++c) {
        const double var =
            (train.X.col(c).array() - mean[c]).square().sum() / static_cast<double>(n_train);
        sd[c] = std::sqrt(var);
    }

    std::vector<Index> keep;
    for (Index c = 0; c < sd.size(); ++c) {
        if (sd[c] > 0) {
            keep.push_back(c);
        } else if (!drop_constant) {
            throw InvalidData("constant feature column " + std::to_string(c) +
                              " in training split (use drop_constant to remove)");
        }
    }
    if (static_cast<Index>(keep.size()) < sd.size()) {
        auto select = [&](const Matrix& m) {
            Matrix out(m.rows(), static_cast<Index>(keep.size()));
            for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Index>(j)) = m.col(keep[j]);
            return out;
        };
        train.X = select(train.X);
        test.X = select(test.X);
        Vector mean2(static_cast<Index>(keep.size())), sd2(static_cast<Index>(keep.size()));
        for (std::size_t j = 0; j < keep.size(); ++j) {
            mean2[static_cast<Index>(j)] = mean[keep[j]];
            sd2[static_cast<Index>(j)] = sd[keep[j]];
        }
        mean = mean2;
        sd = sd2;
    }

    Standardizer st;
    st.x_mean = mean;
    st.x_std = sd;
    st.y_mean = train.y.mean();
    const double y_var =
        (train.y.array() - st.y_mean).square().sum() / static_cast<double>(n_train);
    st.y_std = std::sqrt(y_var);
    if (st.y_std <= 0) throw InvalidData("constant target in training split");

    train.X = st.transform_x(train.X);
    train.y = st.transform_y(train.y);
    test.X = st.transform_x(test.X);
    test.y = st.transform_y(test.y);
    train.standardizer = st;
    test.standardizer = st;
    return {train, test};
}

std::pair<Dataset, Dataset> gen_cubic(std::uint64_t seed, bool noiseless) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> train_x(-4.0, 4.0);
    std::uniform_real_distribution<double> test_x(-5.0, 5.0);
    std::normal_distribution<double> noise(0.0, 3.0);

    auto make = [&](Index n, auto& xdist, const std::string& name) {
        Dataset ds;
        ds.name = name;
        ds.X.resize(n, 1);
        ds.y.resize(n);
        // Inputs first, noise second: the noiseless switch leaves X unchanged.
        for (Index i = 0; i < n; ++i) ds.X(i, 0) = xdist(rng);
        for (Index i = 0; i < n; ++i) {
            const double x = ds.X(i, 0);
            ds.y[i] = x * x * x + (noiseless ? 0.0 : noise(rng));
        }
        return ds;
    };
    Dataset train = make(20, train_x, "synthetic-cubic/train");
    Dataset test = make(100, test_x, "synthetic-cubic/test");
    return {train, test};
}

}  // namespace latnkm
