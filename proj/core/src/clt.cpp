#include "steinw/clt.hpp"

#include <cmath>
#include <stdexcept>

#include "steinw/ou_kernel.hpp"

namespace steinw {

namespace {

constexpr int kSeriesCap = 60;

// Uniform index in {0, .., n-1}, one generator call.
int uniform_index(std::mt19937_64& g, int n) {
    const int i = static_cast<int>(uniform01(g) * n);
    return i >= n ? n - 1 : i;
}

}  // namespace

nlohmann::json CltConstants::to_json() const {
    return {{"sum4", sum4},   {"sum16", sum16},    {"tail4", tail4},
            {"tail16", tail16}, {"c", c},          {"c_prime", c_prime}};
}

CltConstants clt_constants() {
    CltConstants out;
    // sum_{k>=1} 4^k/(k k!), ratio 4k/(k+1)^2.
    {
        long double term = 4.0L, sum = 0.0L;
        int k = 1;
        for (; k <= 200; ++k) {
            sum += term;
            const long double r = 4.0L / (k + 2);
            if (r < 0.5L && term * r / (1.0L - r) < 1e-16L * sum) break;
            term *= 4.0L * k / ((k + 1.0L) * (k + 1.0L));
        }
        const long double r = 4.0L / (k + 2);
        out.sum4 = static_cast<double>(sum);
        out.tail4 = static_cast<double>(term * r / (1.0L - r));
    }
    // sum_{k>=1} 16^k/(2k (2k)!), ratio 16*2k/((2k+2)(2k+1)(2k+2)).
    {
        long double term = 4.0L, sum = 0.0L;  // k=1: 16/(2*2!) = 4
        int k = 1;
        for (; k <= 200; ++k) {
            sum += term;
            const long double r = 16.0L / ((2.0L * k + 1.0L) * (2.0L * k + 2.0L));
            if (r < 0.5L && term * r / (1.0L - r) < 1e-16L * sum) break;
            term *= 16.0L * (2.0L * k) /
                    ((2.0L * k + 2.0L) * (2.0L * k + 1.0L) * (2.0L * k + 2.0L));
        }
        const long double r = 16.0L / ((2.0L * k + 1.0L) * (2.0L * k + 2.0L));
        out.sum16 = static_cast<double>(sum);
        out.tail16 = static_cast<double>(term * r / (1.0L - r));
    }
    out.c = 8.0 + out.sum4;
    out.c_prime = std::sqrt(out.c) + std::sqrt(2.0) +
                  2.0 * std::pow(out.sum16, 0.25) * std::pow(12.0 + out.sum16, 0.25);
    return out;
}

CltDraw clt_draw(const DistributionModel& model, int n, std::mt19937_64& rng) {
    if (n < 1) throw std::invalid_argument("clt_draw: n must be >= 1");
    CltDraw d;
    d.x.resize(model.dim, n);
    d.xp.resize(model.dim, n);
    std::vector<double> buf(static_cast<std::size_t>(model.dim));
    for (int i = 0; i < n; ++i) {
        model.draw(rng, buf);
        for (int j = 0; j < model.dim; ++j) d.x(j, i) = buf[static_cast<std::size_t>(j)];
        model.draw(rng, buf);
        for (int j = 0; j < model.dim; ++j) d.xp(j, i) = buf[static_cast<std::size_t>(j)];
    }
    d.index = uniform_index(rng, n);
    return d;
}

PairSample clt_pair_at(const CltDraw& draw, double t) {
    const int n = static_cast<int>(draw.x.cols());
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    PairSample ps;
    ps.t = t;
    ps.x0 = draw.x.rowwise().sum() * inv_sqrt_n;
    const double thresh_sq = n * delta(t);
    const int i = draw.index;
    const double norm_sq = std::max(draw.x.col(i).squaredNorm(), draw.xp.col(i).squaredNorm());
    ps.xt = ps.x0;
    if (norm_sq <= thresh_sq)
        ps.xt += (draw.xp.col(i) - draw.x.col(i)) * inv_sqrt_n;
    return ps;
}

PairSample clt_sample_pair(const DistributionModel& model, int n, double t,
                           std::mt19937_64& rng) {
    return clt_pair_at(clt_draw(model, n, rng), t);
}

PairProcess clt_pair_process(const DistributionModel& model, int n) {
    PairProcess proc;
    proc.dim = model.dim;
    proc.scale = 1.0 / static_cast<double>(n);
    proc.exchangeable = true;
    proc.sample = [model, n](double t, std::mt19937_64& rng) {
        return clt_sample_pair(model, n, t, rng);
    };
    proc.displacement_bound = [](double t) { return 2.0 * std::sqrt(delta(t)); };
    return proc;
}

namespace {

// Per-draw evaluation of the surrogate R(t). The k > 2 series is accumulated
// on displacements rescaled by the indicator threshold, which keeps every
// term of the form ||A_k||^2 c_k with
//   c_k = 4^k delta / (k k!)                      (p = 2)
//   c_k = (p-1)^{k-1} 4^{k-1} delta / ((k-1)!)    (p > 2)
// free of overflow for any t. Dropped terms are replaced by the scalar
// majorant sum_i ||u_i||^k >= ||A_k||, so each sample dominates R(t).
class RtEvaluator {
public:
    RtEvaluator(const DistributionModel& model, int n, double p, double trunc_tol)
        : model_(model), n_(n), p_(p), trunc_tol_(trunc_tol) {
        if (n < 1) throw std::invalid_argument("r_t_sample: n must be >= 1");
        if (p < 2.0) throw std::invalid_argument("r_t_sample: p must be >= 2");
        d_ = model.dim;
        chaos_ = std::max(1.0, p - 1.0);
        cov2n_ = moment_cov(model);
        cov2n_ *= 2.0 * static_cast<double>(n);
        buf_.resize(static_cast<std::size_t>(d_));
        u_.resize(static_cast<std::size_t>(d_));
        disp_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(d_), 0.0);
        wnorm_.assign(static_cast<std::size_t>(n), 0.0);
        t2_ = SymTensor(d_, 2);
        pow_table_.assign(static_cast<std::size_t>((kSeriesCap + 1) * d_), 0.0);
    }

    // Certified series depth. The indicator bounds the rescaled displacement
    // norms by 1, so the relative tail structure is time-independent.
    int certified_depth() const {
        if (p_ == 2.0) return steinw::truncation_depth(2.0, 1.0, 1.0, trunc_tol_);
        return truncation_depth_exchangeable(2.0, 1.0, 1.0, trunc_tol_, chaos_);
    }

    double sample(double t, std::mt19937_64& rng) {
        if (t <= 0.0) throw std::invalid_argument("r_t_sample: t must be > 0");
        const double dlt = delta(t);
        const double thresh_sq = n_ * dlt;
        const double scale = 2.0 * std::sqrt(thresh_sq);  // displacement bound

        Eigen::VectorXd drift = Eigen::VectorXd::Zero(d_);
        t2_.set_zero();
        int n_keep = 0;
        double max_w = 0.0;
        for (int i = 0; i < n_; ++i) {
            model_.draw(rng, buf_);
            double nx = 0.0;
            for (int j = 0; j < d_; ++j) {
                u_[static_cast<std::size_t>(j)] = buf_[static_cast<std::size_t>(j)];
                nx += buf_[static_cast<std::size_t>(j)] * buf_[static_cast<std::size_t>(j)];
            }
            model_.draw(rng, buf_);
            double nxp = 0.0;
            for (int j = 0; j < d_; ++j) nxp += buf_[static_cast<std::size_t>(j)] * buf_[static_cast<std::size_t>(j)];

            if (std::max(nx, nxp) <= thresh_sq) {
                // u = x' - x, rescaled by the almost-sure bound 2 sqrt(n delta).
                double wsq = 0.0;
                auto* row = &disp_[static_cast<std::size_t>(n_keep) * static_cast<std::size_t>(d_)];
                for (int j = 0; j < d_; ++j) {
                    const double uj = buf_[static_cast<std::size_t>(j)] - u_[static_cast<std::size_t>(j)];
                    row[j] = uj / scale;
                    wsq += row[j] * row[j];
                }
                const double w = std::sqrt(wsq);
                wnorm_[static_cast<std::size_t>(n_keep)] = w;
                max_w = std::max(max_w, w);
                ++n_keep;
                // Unscaled second-moment accumulation.
                std::span<double> pt(pow_table_.data(), static_cast<std::size_t>(3 * d_));
                for (int j = 0; j < d_; ++j) u_[static_cast<std::size_t>(j)] = row[j] * scale;
                add_tensor_power(t2_, u_, 1.0, pt);
            } else {
                // Complement indicator: drift group.
                for (int j = 0; j < d_; ++j)
                    drift(j) += u_[static_cast<std::size_t>(j)] - buf_[static_cast<std::size_t>(j)];
            }
        }

        double total = drift.squaredNorm() / n_;
        t2_ -= cov2n_;
        total += chaos_ * hs_norm_sq(t2_) / (4.0 * static_cast<double>(n_) *
                                             static_cast<double>(n_) * dlt);
        total += series(dlt, n_keep, max_w, total);
        return total;
    }

private:
    static SymTensor moment_cov(const DistributionModel& model) {
        std::optional<SymTensor> cov;
        if (model.wcov) cov = model.wcov(0.0);
        if (!cov) {
            if (!model.identity_cov)
                throw std::invalid_argument(
                    "r_t_sample: model must provide an analytic covariance");
            cov = identity_tensor(model.dim);
        }
        SymTensor c = *cov;
        return c;
    }

    double series_coeff(int k, double dlt) const {
        if (p_ == 2.0) {
            // 4^k delta / (k k!)
            double c = dlt;
            for (int j = 1; j <= k; ++j) c *= 4.0 / j;
            return c / k;
        }
        // (p-1)^{k-1} 4^{k-1} delta / ((k-1)!)
        double c = dlt;
        for (int j = 1; j <= k - 1; ++j) c *= 4.0 * chaos_ / j;
        return c;
    }

    double series(double dlt, int n_keep, double max_w, double base) {
        if (n_keep == 0) return 0.0;
        // Scalar majorants sum_i w_i^k, advanced incrementally.
        scpow_.assign(static_cast<std::size_t>(n_keep), 0.0);
        for (int i = 0; i < n_keep; ++i) {
            const double w = wnorm_[static_cast<std::size_t>(i)];
            scpow_[static_cast<std::size_t>(i)] = w * w;
        }
        double out = 0.0;
        const double floor = std::max(base, 1e-300);
        for (int k = 3; k <= kSeriesCap; ++k) {
            double sc = 0.0;
            for (int i = 0; i < n_keep; ++i) {
                scpow_[static_cast<std::size_t>(i)] *= wnorm_[static_cast<std::size_t>(i)];
                sc += scpow_[static_cast<std::size_t>(i)];
            }
            const double ck = series_coeff(k, dlt);
            const double majorant = ck * sc * sc;
            if (majorant < trunc_tol_ * std::max(out + floor, floor)) {
                // Replace the remaining series by its majorant tail.
                out += tail_majorant(k, dlt, sc, max_w);
                return out;
            }
            // Exact tensor term.
            if (static_cast<int>(acc_.size()) < k - 2) acc_.emplace_back(d_, k);
            SymTensor& a = acc_[static_cast<std::size_t>(k - 3)];
            a.set_zero();
            std::span<double> pt(pow_table_.data(), static_cast<std::size_t>((k + 1) * d_));
            for (int i = 0; i < n_keep; ++i) {
                std::span<const double> row(
                    &disp_[static_cast<std::size_t>(i) * static_cast<std::size_t>(d_)],
                    static_cast<std::size_t>(d_));
                add_tensor_power(a, row, 1.0, pt);
            }
            out += ck * hs_norm_sq(a);
        }
        throw TruncationError("r_t_sample: series cap K=60 reached without convergence");
    }

    // sum_{j >= k} c_j (sum_i w_i^j)^2 bounded via sum_i w_i^j <= sc * max_w^{j-k}.
    double tail_majorant(int k, double dlt, double sc, double max_w) {
        double out = 0.0;
        double scj = sc;
        for (int j = k; j <= kSeriesCap; ++j) {
            const double cj = series_coeff(j, dlt);
            const double term = cj * scj * scj;
            out += term;
            // Geometric remainder once the per-step ratio is under 1/2.
            const double step = max_w * max_w * coeff_ratio(j);
            if (step < 0.5) {
                out += term * step / (1.0 - step);
                return out;
            }
            scj *= max_w;
        }
        throw TruncationError("r_t_sample: tail majorant did not converge by K=60");
    }

    // series_coeff(j+1)/series_coeff(j), decreasing in j.
    double coeff_ratio(int j) const {
        if (p_ == 2.0) return 4.0 * j / ((j + 1.0) * (j + 1.0));
        return 4.0 * chaos_ / j;
    }

    DistributionModel model_;
    int n_, d_ = 1;
    double p_, chaos_ = 1.0, trunc_tol_;
    SymTensor cov2n_;  // 2 n E[X^{(x)2}]
    std::vector<double> buf_, u_, disp_, wnorm_, scpow_, pow_table_;
    std::vector<SymTensor> acc_;
    SymTensor t2_;
};

}  // namespace

double r_t_sample(const DistributionModel& model, int n, double t, double p,
                  std::mt19937_64& rng, double trunc_tol) {
    RtEvaluator ev(model, n, p, trunc_tol);
    return ev.sample(t, rng);
}

SurrogateOracle clt_surrogate(const DistributionModel& model, int n, double p,
                              double trunc_tol) {
    SurrogateOracle oracle;
    oracle.sample = [model, n, p, trunc_tol](double t, std::mt19937_64& rng) {
        RtEvaluator ev(model, n, p, trunc_tol);
        return ev.sample(t, rng);
    };
    oracle.make_sampler = [model, n, p, trunc_tol]() {
        auto ev = std::make_shared<RtEvaluator>(model, n, p, trunc_tol);
        return [ev](double t, std::mt19937_64& rng) { return ev->sample(t, rng); };
    };
    const int depth = RtEvaluator(model, n, p, trunc_tol).certified_depth();
    oracle.series_depth = [depth](double) { return depth; };
    return oracle;
}

double bound_w2_general(const MomentTable& moments, long n, double m,
                        const W2BoundOptions& opt) {
    if (n <= 4) throw std::invalid_argument("bound_w2_general: requires n > 4");
    if (!(m > 0.0 && m <= 2.0))
        throw std::invalid_argument("bound_w2_general: m must lie in (0, 2]");
    const CltConstants cc = clt_constants();
    const double nn = static_cast<double>(n);
    const double cov2 = moments.cov_hs_norm() * moments.cov_hs_norm();

    const double term1 = std::sqrt(cc.c * nn * moments.absmom_at(2.0 + m)) /
                         std::pow(nn, 0.25 * (2.0 + m));
    const double term2 = std::sqrt(2.0 * nn * cov2) / nn;

    const double m0_sq = cc.sum16 * cov2;
    auto msq = [&](double l) {
        const double w = moments.wcov_hs_norm(l);
        const double a = moments.absmom_at(l);
        if (opt.ml_derivation_variant)
            return m0_sq + 4.0 * w * w + 8.0 * moments.cov_hs_norm() * a;
        return m0_sq + 8.0 * cov2 * a * a + 4.0 * w * w;
    };

    double term3;
    if (m < 1.0) {
        term3 = std::sqrt(2.0 * m0_sq) / std::sqrt(nn) +
                std::sqrt(msq(m)) * std::log(nn) / (2.0 * std::pow(nn, 0.5 * m));
    } else if (m < 2.0) {
        term3 = std::sqrt(2.0 * m0_sq) / std::sqrt(nn) +
                std::sqrt(msq(1.0)) * std::log(nn) / (2.0 * std::sqrt(nn));
    } else {
        term3 = 2.0 * std::sqrt(std::sqrt(m0_sq) * std::sqrt(msq(2.0)) / nn);
    }
    return term1 + term2 + term3;
}

double bound_w2_identity_cov(const MomentTable& moments, long n) {
    if (n < 1) throw std::invalid_argument("bound_w2_identity_cov: n must be >= 1");
    const bool audited = moments.identity_cov ||
                         hs_norm(moments.cov.tensor - identity_tensor(moments.dim)) <=
                             4.0 * moments.cov.std_error + 1e-12;
    if (!audited)
        throw std::invalid_argument(
            "bound_w2_identity_cov: covariance is not the identity (use bound_w2_general)");
    const CltConstants cc = clt_constants();
    const double d = static_cast<double>(moments.dim);
    return cc.c_prime *
           std::sqrt(std::sqrt(d) * moments.wcov_hs_norm(2.0) / static_cast<double>(n));
}

double bound_wp(const MomentTable& moments, long n, double p, double q, double c_p) {
    if (n < 1) throw std::invalid_argument("bound_wp: n must be >= 1");
    if (p <= 2.0) throw std::invalid_argument("bound_wp: requires p > 2");
    if (q < 0.0 || q > 2.0) throw std::invalid_argument("bound_wp: q must lie in [0, 2]");
    if (c_p <= 0.0) throw std::invalid_argument("bound_wp: c_p must be > 0");
    const double m = std::min(2.0, p + q - 2.0);
    const double nn = static_cast<double>(n);
    const double cov = moments.cov_hs_norm();
    const double cov2 = cov * cov;

    auto msq = [&](double l) {
        if (l == 0.0) return 2.0 * cov2;  // absmom(0) = 1, wcov(0) = cov
        const double w = moments.wcov_hs_norm(l);
        const double a = moments.absmom_at(l);
        return cov2 * a * a + w * w;
    };

    double bracket = std::pow(nn * moments.absmom_at(p + q), 1.0 / p) /
                     std::pow(nn, 0.5 + 0.5 * q / p);
    bracket += std::sqrt(nn * moments.absmom_at(2.0 + m)) / std::pow(nn, 0.5 + 0.25 * m);
    bracket += std::sqrt(nn * cov2) / nn;
    const double m0 = std::sqrt(msq(0.0));
    if (m < 1.0) {
        bracket += m0 / std::sqrt(nn) + std::sqrt(msq(m)) * std::log(nn) / std::pow(nn, 0.5 * m);
    } else if (m < 2.0) {
        bracket += m0 / std::sqrt(nn) + std::sqrt(msq(1.0)) * std::log(nn) / std::sqrt(nn);
    } else {
        bracket += std::sqrt(m0 * std::sqrt(msq(2.0)) / nn);
    }
    return bracket / c_p;
}

MomentTable clt_moment_table(const DistributionModel& model, double m, double p, double q,
                             long n_mc, std::uint64_t seed) {
    std::vector<double> l_grid = {1.0, 2.0};
    if (m > 0.0 && m != 1.0 && m != 2.0) l_grid.push_back(m);
    std::vector<double> r_grid = {1.0, 2.0, 2.0 + m};
    if (m != 1.0 && m != 2.0 && m > 0.0) r_grid.push_back(m);
    if (p > 2.0) {
        r_grid.push_back(p + q);
        const double mp = std::min(2.0, p + q - 2.0);
        r_grid.push_back(2.0 + mp);
        if (mp != 1.0 && mp != 2.0) {
            r_grid.push_back(mp);
            l_grid.push_back(mp);
        }
    }
    std::sort(l_grid.begin(), l_grid.end());
    l_grid.erase(std::unique(l_grid.begin(), l_grid.end()), l_grid.end());
    std::sort(r_grid.begin(), r_grid.end());
    r_grid.erase(std::unique(r_grid.begin(), r_grid.end()), r_grid.end());
    return moment_stats(model, l_grid, r_grid, n_mc, seed);
}

}  // namespace steinw
