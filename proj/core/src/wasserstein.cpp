#include "steinw/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace steinw {

double wp_1d(std::span<const double> x, std::span<const double> y, double p) {
    if (x.size() != y.size())
        throw std::invalid_argument("wp_1d: sample counts must be equal");
    if (x.empty()) throw std::invalid_argument("wp_1d: empty samples");
    if (p < 1.0) throw std::invalid_argument("wp_1d: p must be >= 1");
    std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        acc += std::pow(std::abs(xs[i] - ys[i]), p);
    return std::pow(acc / static_cast<double>(xs.size()), 1.0 / p);
}

// Dense Jonker-Volgenant: column reduction, reduction transfer, two rounds of
// augmenting row reduction, then shortest augmenting paths.
double lap_assignment(const Eigen::MatrixXd& cost, std::vector<int>* out_row_to_col) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n || n < 1)
        throw std::invalid_argument("lap_assignment: cost matrix must be square, n >= 1");
    if (n == 1) {
        if (out_row_to_col) *out_row_to_col = {0};
        return cost(0, 0);
    }
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<int> x(n, -1), y(n, -1), matches(n, 0), free_rows(n);
    std::vector<double> v(n, 0.0);

    // Column reduction (reverse column order).
    for (int j = n - 1; j >= 0; --j) {
        double vj = cost(0, j);
        int imin = 0;
        for (int i = 1; i < n; ++i)
            if (cost(i, j) < vj) {
                vj = cost(i, j);
                imin = i;
            }
        v[j] = vj;
        if (++matches[imin] == 1) {
            x[imin] = j;
            y[j] = imin;
        }
    }

    // Reduction transfer.
    int numfree = 0;
    for (int i = 0; i < n; ++i) {
        if (matches[i] == 0) {
            free_rows[numfree++] = i;
        } else if (matches[i] == 1 && n > 1) {
            const int j1 = x[i];
            double mu = kInf;
            for (int j = 0; j < n; ++j)
                if (j != j1) mu = std::min(mu, cost(i, j) - v[j]);
            v[j1] -= mu;
        }
    }

    // Augmenting row reduction, two passes.
    for (int loop = 0; loop < 2; ++loop) {
        int k = 0;
        const int prevnumfree = numfree;
        numfree = 0;
        while (k < prevnumfree) {
            const int i = free_rows[k++];
            double umin = cost(i, 0) - v[0], usubmin = kInf;
            int j1 = 0, j2 = -1;
            for (int j = 1; j < n; ++j) {
                const double h = cost(i, j) - v[j];
                if (h < usubmin) {
                    if (h >= umin) {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        j2 = j1;
                        umin = h;
                        j1 = j;
                    }
                }
            }
            int i0 = y[j1];
            if (umin < usubmin) {
                v[j1] -= usubmin - umin;
            } else if (i0 >= 0 && j2 >= 0) {
                j1 = j2;
                i0 = y[j1];
            }
            x[i] = j1;
            y[j1] = i;
            if (i0 >= 0) {
                if (umin < usubmin)
                    free_rows[--k] = i0;
                else
                    free_rows[numfree++] = i0;
            }
        }
    }

    // Shortest augmenting paths for the remaining free rows.
    std::vector<double> d(n);
    std::vector<int> pred(n), collist(n);
    for (int f = 0; f < numfree; ++f) {
        const int freerow = free_rows[f];
        for (int j = 0; j < n; ++j) {
            d[j] = cost(freerow, j) - v[j];
            pred[j] = freerow;
            collist[j] = j;
        }
        int low = 0, up = 0, last = -1, endofpath = -1;
        double min_d = 0.0;
        bool found = false;
        while (!found) {
            if (up == low) {
                last = low - 1;
                min_d = d[collist[up++]];
                for (int k = up; k < n; ++k) {
                    const int j = collist[k];
                    const double h = d[j];
                    if (h <= min_d) {
                        if (h < min_d) {
                            up = low;
                            min_d = h;
                        }
                        collist[k] = collist[up];
                        collist[up++] = j;
                    }
                }
                for (int k = low; k < up && !found; ++k) {
                    const int j = collist[k];
                    if (y[j] < 0) {
                        endofpath = j;
                        found = true;
                    }
                }
            }
            if (found) break;
            const int j1 = collist[low++];
            const int i = y[j1];
            const double u1 = cost(i, j1) - v[j1] - min_d;
            for (int k = up; k < n; ++k) {
                const int j = collist[k];
                const double h = cost(i, j) - v[j] - u1;
                if (h < d[j]) {
                    d[j] = h;
                    pred[j] = i;
                    if (h == min_d) {
                        if (y[j] < 0) {
                            endofpath = j;
                            found = true;
                            break;
                        }
                        collist[k] = collist[up];
                        collist[up++] = j;
                    }
                }
            }
        }
        for (int k = 0; k <= last; ++k) {
            const int j = collist[k];
            v[j] += d[j] - min_d;
        }
        int i;
        do {
            i = pred[endofpath];
            y[endofpath] = i;
            const int j1 = x[i];
            x[i] = endofpath;
            endofpath = j1;
        } while (i != freerow);
    }

    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost(i, x[i]);
    if (out_row_to_col) *out_row_to_col = x;
    return total;
}

namespace {

Eigen::MatrixXd cost_matrix(const EmpiricalMeasure& x, const EmpiricalMeasure& y, double p) {
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXd c(n, n);
    const bool squared = std::abs(p - 2.0) < 1e-15;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double sq = (x.row(i) - y.row(j)).squaredNorm();
            c(i, j) = squared ? sq : std::pow(sq, 0.5 * p);
        }
    }
    return c;
}

}  // namespace

double wp_exact(const EmpiricalMeasure& x, const EmpiricalMeasure& y, double p, int cap) {
    if (x.rows() != y.rows()) throw std::invalid_argument("wp_exact: sample counts must be equal");
    if (x.cols() != y.cols()) throw std::invalid_argument("wp_exact: dimension mismatch");
    if (x.rows() < 1) throw std::invalid_argument("wp_exact: empty samples");
    if (p < 1.0) throw std::invalid_argument("wp_exact: p must be >= 1");
    if (x.rows() > cap)
        throw std::runtime_error(
            "wp_exact: sample count exceeds the exact-solver cap; use wp_sinkhorn");
    const Eigen::MatrixXd c = cost_matrix(x, y, p);
    const double total = lap_assignment(c);
    return std::pow(total / static_cast<double>(x.rows()), 1.0 / p);
}

SinkhornResult wp_sinkhorn(const EmpiricalMeasure& x, const EmpiricalMeasure& y, double p,
                           double eps, int max_iter) {
    if (x.rows() != y.rows())
        throw std::invalid_argument("wp_sinkhorn: sample counts must be equal");
    if (eps <= 0.0) throw std::invalid_argument("wp_sinkhorn: eps must be > 0");
    if (p < 1.0) throw std::invalid_argument("wp_sinkhorn: p must be >= 1");
    const int n = static_cast<int>(x.rows());
    const Eigen::MatrixXd c = cost_matrix(x, y, p);
    const double log_n = std::log(static_cast<double>(n));

    Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(n);
    auto logsumexp_rows = [&](const Eigen::MatrixXd& m) {
        Eigen::VectorXd out(n);
        for (int i = 0; i < n; ++i) {
            const double mx = m.row(i).maxCoeff();
            out(i) = mx + std::log((m.row(i).array() - mx).exp().sum());
        }
        return out;
    };

    SinkhornResult res;
    Eigen::MatrixXd work(n, n);
    for (int it = 1; it <= max_iter; ++it) {
        // f_i <- -eps (LSE_j[(g_j - C_ij)/eps] - log n)
        work = ((-c).rowwise() + g.transpose()) / eps;
        f = -eps * (logsumexp_rows(work).array() - log_n).matrix();
        work = ((-c).colwise() + f).transpose() / eps;
        g = -eps * (logsumexp_rows(work).array() - log_n).matrix();
        res.iterations = it;

        if (it % 5 == 0 || it == max_iter) {
            // After a g-update the column marginals are exact; check rows.
            work = (((-c).colwise() + f).rowwise() + g.transpose()) / eps;
            const Eigen::MatrixXd plan =
                work.array().exp().matrix() / (static_cast<double>(n) * n);
            double viol = 0.0;
            for (int i = 0; i < n; ++i)
                viol += std::abs(plan.row(i).sum() - 1.0 / n) +
                        std::abs(plan.col(i).sum() - 1.0 / n);
            res.marginal_violation = viol;
            if (viol < 1e-6) {
                res.converged = true;
                res.value = std::pow(plan.cwiseProduct(c).sum(), 1.0 / p);
                return res;
            }
        }
    }
    work = (((-c).colwise() + f).rowwise() + g.transpose()) / eps;
    const Eigen::MatrixXd plan = work.array().exp().matrix() / (static_cast<double>(n) * n);
    res.value = std::pow(plan.cwiseProduct(c).sum(), 1.0 / p);
    return res;
}

EmpiricalMeasure gaussian_sample(int d, int n, std::mt19937_64& rng) {
    if (d < 1 || n < 1) throw std::invalid_argument("gaussian_sample: d, n must be >= 1");
    EmpiricalMeasure m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = std_normal(rng);
    return m;
}

void write_samples_csv(const EmpiricalMeasure& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_samples_csv: cannot open " + path);
    const int d = static_cast<int>(samples.cols());
    for (int j = 0; j < d; ++j) out << (j ? ",x" : "x") << (j + 1);
    out << '\n';
    char buf[32];
    for (int i = 0; i < samples.rows(); ++i) {
        for (int j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", samples(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

EmpiricalMeasure read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_samples_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_samples_csv: empty file");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("read_samples_csv: no data rows");
    EmpiricalMeasure m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::runtime_error("read_samples_csv: ragged rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    return m;
}

}  // namespace steinw
