#include "steinw/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace steinw {

namespace {

bool is_even_integer(double x) {
    const double r = std::round(x);
    return std::abs(x - r) < 1e-12 && std::llround(r) % 2 == 0;
}

// E[(sum_j x_j^2)^m] for i.i.d. coordinates with even moments mu2[j] =
// E[x^{2j}], expanded by the multinomial theorem.
double iid_even_norm_moment(const std::vector<double>& mu2, int d, int m) {
    if (m == 0) return 1.0;
    if (static_cast<int>(mu2.size()) <= m)
        throw std::invalid_argument("iid_even_norm_moment: moment table too short");
    double total = 0.0;
    for (const auto& a : enumerate_multi_indices(d, m)) {
        double term = multinomial_weight(a);
        for (int i = 0; i < d; ++i) term *= mu2[static_cast<std::size_t>(a[i])];
        total += term;
    }
    return total;
}

SymTensor diagonal_tensor(int d, double value) {
    SymTensor t(d, 2);
    const auto& idx = t.basis().indices();
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (int i = 0; i < d; ++i)
            if (idx[r][i] == 2) t[static_cast<int>(r)] = value;
    }
    return t;
}

// Product models with i.i.d. standardized coordinates share the same moment
// structure: E[X^{(x)2} ||X||^2] = (mu4 + d - 1) I.
std::function<std::optional<SymTensor>(double)> product_wcov(int d, double mu4) {
    return [d, mu4](double l) -> std::optional<SymTensor> {
        if (std::abs(l) < 1e-12) return diagonal_tensor(d, 1.0);
        if (std::abs(l - 2.0) < 1e-12) return diagonal_tensor(d, mu4 + d - 1.0);
        return std::nullopt;
    };
}

std::function<std::optional<double>(double)> product_absmom(std::vector<double> mu2, int d) {
    return [mu2 = std::move(mu2), d](double r) -> std::optional<double> {
        if (!is_even_integer(r)) return std::nullopt;
        const int m = static_cast<int>(std::llround(r)) / 2;
        if (m >= static_cast<int>(mu2.size())) return std::nullopt;
        return iid_even_norm_moment(mu2, d, m);
    };
}

DistributionModel make_rademacher(int d) {
    DistributionModel m;
    m.name = "rademacher";
    m.dim = d;
    m.identity_cov = true;
    m.draw = [d](std::mt19937_64& g, std::span<double> out) {
        for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = rademacher(g);
    };
    // ||X|| = sqrt(d) almost surely.
    m.absmom = [d](double r) -> std::optional<double> { return std::pow(d, 0.5 * r); };
    m.wcov = [d](double l) -> std::optional<SymTensor> {
        return diagonal_tensor(d, std::pow(d, 0.5 * l));
    };
    return m;
}

DistributionModel make_gaussian(int d) {
    DistributionModel m;
    m.name = "gaussian";
    m.dim = d;
    m.identity_cov = true;
    m.draw = [d](std::mt19937_64& g, std::span<double> out) {
        for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = std_normal(g);
    };
    auto absmom = [d](double r) -> std::optional<double> {
        if (r < 0.0) return std::nullopt;
        return std::exp(0.5 * r * std::log(2.0) + std::lgamma(0.5 * (d + r)) -
                        std::lgamma(0.5 * d));
    };
    m.absmom = absmom;
    m.wcov = [d, absmom](double l) -> std::optional<SymTensor> {
        // E[X_i X_j ||X||^l] = delta_ij E[||X||^{l+2}] / d by symmetry.
        auto a = absmom(l + 2.0);
        if (!a) return std::nullopt;
        return diagonal_tensor(d, *a / d);
    };
    return m;
}

DistributionModel make_uniform(int d) {
    // Coordinates uniform on [-sqrt(3), sqrt(3)]: mean 0, variance 1,
    // E[x^{2j}] = 3^j / (2j + 1).
    DistributionModel m;
    m.name = "uniform";
    m.dim = d;
    m.identity_cov = true;
    const double half_width = std::sqrt(3.0);
    m.draw = [d, half_width](std::mt19937_64& g, std::span<double> out) {
        for (int i = 0; i < d; ++i)
            out[static_cast<std::size_t>(i)] = half_width * (2.0 * uniform01(g) - 1.0);
    };
    std::vector<double> mu2;
    for (int j = 0; j <= 8; ++j) mu2.push_back(std::pow(3.0, j) / (2 * j + 1));
    m.absmom = product_absmom(mu2, d);
    m.wcov = product_wcov(d, mu2[2]);
    return m;
}

DistributionModel make_exponential(int d) {
    // Coordinates Exp(1) - 1: mean 0, variance 1, skewed. Central moments of
    // Exp(1) are the derangement numbers: mu2=1, mu4=9, mu6=265, ...
    DistributionModel m;
    m.name = "exponential";
    m.dim = d;
    m.identity_cov = true;
    m.draw = [d](std::mt19937_64& g, std::span<double> out) {
        for (int i = 0; i < d; ++i)
            out[static_cast<std::size_t>(i)] = -std::log1p(-uniform01(g)) - 1.0;
    };
    std::vector<double> derangement = {1.0, 0.0, 1.0, 2.0, 9.0, 44.0, 265.0, 1854.0, 14833.0};
    std::vector<double> mu2;  // even central moments only
    for (std::size_t j = 0; 2 * j < derangement.size(); ++j) mu2.push_back(derangement[2 * j]);
    m.absmom = product_absmom(mu2, d);
    m.wcov = product_wcov(d, 9.0);
    return m;
}

DistributionModel make_sphere(int d) {
    // Uniform on the sphere of radius sqrt(d); bounded with ||X|| = sqrt(d).
    DistributionModel m;
    m.name = "sphere";
    m.dim = d;
    m.identity_cov = true;
    const double radius = std::sqrt(static_cast<double>(d));
    m.draw = [d, radius](std::mt19937_64& g, std::span<double> out) {
        double norm_sq = 0.0;
        for (int i = 0; i < d; ++i) {
            out[static_cast<std::size_t>(i)] = std_normal(g);
            norm_sq += out[static_cast<std::size_t>(i)] * out[static_cast<std::size_t>(i)];
        }
        const double norm = std::sqrt(norm_sq);
        if (norm == 0.0) {
            out[0] = radius;
            for (int i = 1; i < d; ++i) out[static_cast<std::size_t>(i)] = 0.0;
            return;
        }
        for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] *= radius / norm;
    };
    m.absmom = [d](double r) -> std::optional<double> { return std::pow(d, 0.5 * r); };
    m.wcov = [d](double l) -> std::optional<SymTensor> {
        return diagonal_tensor(d, std::pow(d, 0.5 * l));
    };
    return m;
}

}  // namespace

DistributionModel make_model(const std::string& name, int dim) {
    if (dim < 1) throw std::invalid_argument("make_model: dim must be >= 1");
    if (name == "rademacher") return make_rademacher(dim);
    if (name == "gaussian") return make_gaussian(dim);
    if (name == "uniform") return make_uniform(dim);
    if (name == "exponential") return make_exponential(dim);
    if (name == "sphere") return make_sphere(dim);
    throw std::invalid_argument("make_model: unknown model '" + name + "'");
}

std::vector<std::string> model_names() {
    return {"rademacher", "gaussian", "uniform", "exponential", "sphere"};
}

double MomentTable::cov_hs_norm() const { return hs_norm(cov.tensor); }

double MomentTable::wcov_hs_norm(double l) const {
    auto it = wcov.find(l);
    if (it == wcov.end())
        throw std::invalid_argument("MomentTable: missing weighted covariance at l=" +
                                    std::to_string(l));
    return hs_norm(it->second.tensor);
}

double MomentTable::absmom_at(double r) const {
    auto it = absmom.find(r);
    if (it == absmom.end())
        throw std::invalid_argument("MomentTable: missing absolute moment at r=" +
                                    std::to_string(r));
    return it->second.value;
}

nlohmann::json MomentTable::to_json() const {
    auto tensor_json = [](const TensorMomentEntry& e) {
        return nlohmann::json{{"coeffs", std::vector<double>(e.tensor.coeffs().begin(),
                                                             e.tensor.coeffs().end())},
                              {"hs_norm", hs_norm(e.tensor)},
                              {"std_error", e.std_error},
                              {"analytic", e.analytic}};
    };
    nlohmann::json jw = nlohmann::json::object();
    for (const auto& [l, e] : wcov) jw[std::to_string(l)] = tensor_json(e);
    nlohmann::json ja = nlohmann::json::object();
    for (const auto& [r, e] : absmom)
        ja[std::to_string(r)] = {{"value", e.value}, {"std_error", e.std_error},
                                 {"analytic", e.analytic}};
    return {{"dim", dim},
            {"identity_cov", identity_cov},
            {"cov", tensor_json(cov)},
            {"wcov", jw},
            {"absmom", ja}};
}

MomentTable moment_stats(const DistributionModel& model, std::span<const double> l_grid,
                         std::span<const double> r_grid, long n_mc, std::uint64_t seed) {
    MomentTable table;
    table.dim = model.dim;
    table.identity_cov = model.identity_cov;

    std::vector<double> mc_l, mc_r;
    std::optional<SymTensor> c;
    if (model.wcov) c = model.wcov(0.0);
    if (c)
        table.cov = {*c, 0.0, true};
    else
        mc_l.push_back(0.0);
    for (double l : l_grid) {
        std::optional<SymTensor> w;
        if (model.wcov) w = model.wcov(l);
        if (w)
            table.wcov[l] = {*w, 0.0, true};
        else
            mc_l.push_back(l);
    }
    for (double r : r_grid) {
        std::optional<double> a;
        if (model.absmom) a = model.absmom(r);
        if (a)
            table.absmom[r] = {*a, 0.0, true};
        else
            mc_r.push_back(r);
    }

    if (!mc_l.empty() || !mc_r.empty()) {
        const int d = model.dim;
        const int tensor_size = static_cast<int>(multi_index_count(d, 2));
        const int slots = static_cast<int>(mc_l.size()) * tensor_size +
                          static_cast<int>(mc_r.size());
        SymTensor proto(d, 2);
        McOptions opt;
        opt.n_samples = n_mc;
        opt.seed = seed;
        auto est = mc_mean_vec(opt, slots, [&](std::mt19937_64& g, std::span<double> out) {
            std::vector<double> x(static_cast<std::size_t>(d));
            model.draw(g, x);
            double nsq = 0.0;
            for (double v : x) nsq += v * v;
            int pos = 0;
            const auto& idx = proto.basis().indices();
            for (double l : mc_l) {
                const double w = std::pow(nsq, 0.5 * l);
                for (int r = 0; r < tensor_size; ++r) {
                    const auto& a = idx[static_cast<std::size_t>(r)];
                    double prod = w;
                    for (int i = 0; i < d; ++i)
                        for (int e = 0; e < a[i]; ++e) prod *= x[static_cast<std::size_t>(i)];
                    out[static_cast<std::size_t>(pos++)] = prod;
                }
            }
            for (double r : mc_r)
                out[static_cast<std::size_t>(pos++)] = std::pow(nsq, 0.5 * r);
        });
        int pos = 0;
        for (double l : mc_l) {
            TensorMomentEntry entry{SymTensor(d, 2), 0.0, false};
            for (int r = 0; r < tensor_size; ++r) {
                entry.tensor[r] = est[static_cast<std::size_t>(pos)].value;
                entry.std_error = std::max(entry.std_error,
                                           est[static_cast<std::size_t>(pos)].std_error);
                ++pos;
            }
            if (l == 0.0)
                table.cov = entry;
            else
                table.wcov[l] = entry;
        }
        for (double r : mc_r) {
            table.absmom[r] = {est[static_cast<std::size_t>(pos)].value,
                               est[static_cast<std::size_t>(pos)].std_error, false};
            ++pos;
        }
    }
    if (table.cov.tensor.size() == 0 && model.identity_cov)
        table.cov = {identity_tensor(model.dim), 0.0, true};
    return table;
}

}  // namespace steinw
