#include "steinw/stein_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "steinw/quadrature.hpp"

namespace steinw {

namespace {

constexpr int kSeriesCap = 60;

double log_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

// log of the series weight multiplying ||E[(X_t-X_0)^{(x)k}|X_0]||^2:
//   plain:        chaos^{k-1} / (s^2 k k! Delta^{k-1})
//   exchangeable: chaos^{k-1} / (4 s^2 (k-1)! Delta^{k-1})
double log_series_weight(int k, double s, double log_delta, double chaos, bool exch) {
    const double base = (k - 1) * (std::log(chaos) - log_delta) - 2.0 * std::log(s);
    if (exch) return base - std::log(4.0) - log_factorial(k - 1);
    return base - std::log(static_cast<double>(k)) - log_factorial(k);
}

// Geometric ratio dominating term_{j+1}/term_j for all j >= k when terms are
// bounded by B^{2k} * weight_k.
double tail_ratio(int k, double B, double Delta, double chaos, bool exch) {
    const double r = chaos * B * B / Delta;
    return exch ? r / static_cast<double>(k) : r / static_cast<double>(k + 1);
}

struct DepthResult {
    int depth = 0;
    double log_tail = -std::numeric_limits<double>::infinity();  // certified remainder
};

// Smallest K >= 3 whose certified tail is below tol times the partial sum of
// the B-bounded terms. Throws when the cap binds.
DepthResult certified_depth(double B, double Delta, double s, double tol, double chaos,
                            bool exch) {
    if (B < 0.0 || Delta <= 0.0 || s <= 0.0 || tol <= 0.0)
        throw std::invalid_argument("truncation_depth: B >= 0 and Delta, s, tol > 0 required");
    if (B == 0.0) return {3, -std::numeric_limits<double>::infinity()};
    const double log_delta = std::log(Delta);
    const double log_b2 = 2.0 * std::log(B);
    double ref = 0.0;       // log of the k = 3 term, used as normalization
    double partial = 0.0;   // sum of exp(log_term - ref)
    for (int k = 3; k <= kSeriesCap; ++k) {
        const double log_term = k * log_b2 + log_series_weight(k, s, log_delta, chaos, exch);
        if (k == 3) ref = log_term;
        partial += std::exp(log_term - ref);
        const double r = tail_ratio(k, B, Delta, chaos, exch);
        if (r < 0.5) {
            const double log_tail = log_term + std::log(r / (1.0 - r));
            if (std::exp(log_tail - ref) < tol * partial)
                return {k, log_tail};
        }
    }
    throw TruncationError(
        "truncation not certified: series cap K=60 reached before the tail ratio "
        "dropped below 1/2 (almost-sure displacement bound too weak)");
}

struct SeriesSpec {
    double chaos = 1.0;         // max(1, p-1)
    bool exch_weights = false;  // (k-1)!-type weights instead of k k!-type
};

// Per-draw value of the bound integrand S_p(t) at one X_0 sample.
// Exact conditional moments are used up to oracle.max_k; any certified
// remainder (B-bounded terms plus geometric tail) is added on top so the
// upper-bound direction is preserved.
class IntegrandEvaluator {
public:
    IntegrandEvaluator(const PairProcess& process, const ConditionalMomentOracle& oracle,
                       double t, const BoundOptions& opt, SeriesSpec spec)
        : process_(process), oracle_(oracle), t_(t), opt_(opt), spec_(spec) {
        if (t <= 0.0) throw std::invalid_argument("integrand: t must be > 0");
        delta_ = std::expm1(2.0 * t);
        log_delta_ = std::log(delta_);
        id_ = identity_tensor(process.dim);
        has_bound_ = static_cast<bool>(process.displacement_bound);
        if (has_bound_) b_ = process.displacement_bound(t);

        if (opt.depth_override > 0) {
            depth_ = opt.depth_override;
        } else if (has_bound_) {
            auto dr = certified_depth(b_, delta_, process.scale, opt.trunc_tol, spec.chaos,
                                      spec.exch_weights);
            depth_ = dr.depth;
            log_tail_ = dr.log_tail;
        } else {
            depth_ = oracle.max_k;  // empirical convergence mode
        }
        if (has_bound_ && b_ > 0.0) {
            // Certified tail beyond depth_ (recomputed when depth was overridden).
            const double r = tail_ratio(depth_, b_, delta_, spec_.chaos, spec_.exch_weights);
            if (r < 1.0) {
                const double log_term = 2.0 * depth_ * std::log(b_) +
                                        log_series_weight(depth_, process.scale, log_delta_,
                                                          spec_.chaos, spec_.exch_weights);
                log_tail_ = log_term + std::log(r / std::max(1e-300, 1.0 - r));
            }
        }
    }

    int depth() const { return depth_; }

    double value(const Eigen::VectorXd& x0) const {
        const double s = process_.scale;
        // Drift group.
        SymTensor m1 = oracle_.moment(x0, t_, 1);
        double drift = 0.0;
        for (int i = 0; i < process_.dim; ++i) {
            const double v = m1[i] / s + x0(i);
            drift += v * v;
        }
        // Centered second-moment group.
        SymTensor m2 = oracle_.moment(x0, t_, 2);
        m2 *= 1.0 / (2.0 * s);
        m2 -= id_;
        double total = drift + spec_.chaos / delta_ * hs_norm_sq(m2);
        // Higher-order series.
        double partial = 0.0;
        double prev_term = -1.0;
        for (int k = 3; k <= depth_; ++k) {
            const double lw = log_series_weight(k, s, log_delta_, spec_.chaos, spec_.exch_weights);
            double term;
            if (k <= oracle_.max_k) {
                const double hsq = hs_norm_sq(oracle_.moment(x0, t_, k));
                term = hsq > 0.0 ? std::exp(std::log(hsq) + lw) : 0.0;
            } else if (has_bound_) {
                // ||E[D^{(x)k}|X_0]|| <= B^k almost surely.
                term = std::exp(2.0 * k * std::log(b_) + lw);
            } else {
                throw std::runtime_error(
                    "series not certifiable: conditional moments exhausted at k=" +
                    std::to_string(oracle_.max_k) + " without a displacement bound");
            }
            partial += term;
            if (!has_bound_ && opt_.depth_override == 0) {
                // Empirical convergence: stop once two consecutive terms are
                // negligible and decreasing.
                if (term < opt_.trunc_tol * std::max(partial, total) && prev_term >= 0.0 &&
                    term < 0.5 * prev_term)
                    break;
                if (k == depth_)
                    throw std::runtime_error(
                        "series not certifiable: moment series did not converge within "
                        "max_k and no displacement bound was given");
            }
            prev_term = term;
        }
        total += partial;
        if (std::isfinite(log_tail_)) total += std::exp(log_tail_);
        return total;
    }

private:
    const PairProcess& process_;
    const ConditionalMomentOracle& oracle_;
    double t_;
    const BoundOptions& opt_;
    SeriesSpec spec_;
    double delta_ = 0.0, log_delta_ = 0.0;
    double b_ = 0.0;
    bool has_bound_ = false;
    int depth_ = 0;
    double log_tail_ = -std::numeric_limits<double>::infinity();
    SymTensor id_;
};

McOptions mc_options_of(const BoundOptions& opt) {
    McOptions mc;
    mc.n_samples = opt.n_mc;
    mc.chunk_size = opt.chunk_size;
    mc.seed = opt.seed;
    mc.workers = opt.workers;
    return mc;
}

SeriesSpec spec_for(const PairProcess& process, double p) {
    if (p < 1.0) throw std::invalid_argument("bound integrand: p must be >= 1");
    SeriesSpec spec;
    spec.chaos = std::max(1.0, p - 1.0);
    if (process.dim > 1 && p != 2.0) {
        if (!process.exchangeable)
            throw std::invalid_argument(
                "sp_integrand: d > 1 requires an exchangeable pair process "
                "((X_0, X_t) and (X_t, X_0) equal in law)");
        spec.exch_weights = true;
    }
    return spec;
}

// Mean of g(S_p(t)) over X_0 draws.
McEstimate oracle_mean(const PairProcess& process, const ConditionalMomentOracle& oracle,
                       double t, const BoundOptions& opt, SeriesSpec spec,
                       const std::function<double(double)>& g) {
    IntegrandEvaluator ev(process, oracle, t, opt, spec);
    auto mc = mc_options_of(opt);
    return mc_mean(mc, [&](std::mt19937_64& rng) {
        const PairSample ps = process.sample(t, rng);
        return g(ev.value(ps.x0));
    });
}

}  // namespace

int truncation_depth(double B, double Delta, double s, double tol) {
    return certified_depth(B, Delta, s, tol, 1.0, false).depth;
}

int truncation_depth_exchangeable(double B, double Delta, double s, double tol, double chaos) {
    return certified_depth(B, Delta, s, tol, std::max(1.0, chaos), true).depth;
}

McEstimate s2_integrand(const PairProcess& process, const ConditionalMomentOracle& oracle,
                        double t, const BoundOptions& opt) {
    return oracle_mean(process, oracle, t, opt, spec_for(process, 2.0),
                       [](double v) { return v; });
}

namespace {

// Mean of g(R(t)) over surrogate draws, with chunk-private samplers when the
// oracle provides a factory.
McEstimate surrogate_mean(const SurrogateOracle& oracle, double t, const BoundOptions& opt,
                          const std::function<double(double)>& g) {
    if (t <= 0.0) throw std::invalid_argument("surrogate integrand: t must be > 0");
    auto mc = mc_options_of(opt);
    return mc_mean_chunked(mc, [&]() -> std::function<double(std::mt19937_64&)> {
        auto sampler = oracle.make_sampler ? oracle.make_sampler() : oracle.sample;
        return [sampler = std::move(sampler), t, &g](std::mt19937_64& rng) {
            const double r = sampler(t, rng);
            if (r < 0.0) throw std::runtime_error("surrogate sample must be non-negative");
            return g(r);
        };
    });
}

}  // namespace

McEstimate s2_integrand(const PairProcess& process, const SurrogateOracle& oracle, double t,
                        const BoundOptions& opt) {
    (void)process;
    return surrogate_mean(oracle, t, opt, [](double r) { return r; });
}

McEstimate sp_integrand(const PairProcess& process, const ConditionalMomentOracle& oracle,
                        double t, double p, const BoundOptions& opt) {
    const double half_p = 0.5 * p;
    McEstimate m = oracle_mean(process, oracle, t, opt, spec_for(process, p),
                               [half_p](double v) { return std::pow(v, half_p); });
    if (m.value <= 0.0) return {0.0, 0.0};
    const double root = std::pow(m.value, 1.0 / p);
    return {root, m.std_error * root / (p * m.value)};
}

McEstimate sp_integrand(const PairProcess& process, const SurrogateOracle& oracle, double t,
                        double p, const BoundOptions& opt) {
    (void)spec_for(process, p);  // validates the p/d/exchangeability contract
    const double half_p = 0.5 * p;
    McEstimate m = surrogate_mean(oracle, t, opt,
                                  [half_p](double r) { return std::pow(r, half_p); });
    if (m.value <= 0.0) return {0.0, 0.0};
    const double root = std::pow(m.value, 1.0 / p);
    return {root, m.std_error * root / (p * m.value)};
}

TimeIntegral integrate_time(const std::function<McEstimate(double)>& f, double tol,
                            double t_split) {
    if (t_split <= 0.0) throw std::invalid_argument("integrate_time: t_split must be > 0");
    TimeIntegral out;

    // (0, t_split]: t = u^2 removes the Delta^{-1/2} endpoint singularity.
    auto near = adaptive_gauss(
        [&](double u) {
            const double t = u * u;
            const McEstimate e = f(t);
            const double jac = 2.0 * u * std::exp(-t);
            return std::pair{jac * e.value, jac * e.std_error};
        },
        0.0, std::sqrt(t_split), tol, tol * 1e-4);

    // [t_split, inf): v = e^{-t} absorbs the e^{-t} factor exactly.
    auto far = adaptive_gauss(
        [&](double v) {
            const double t = -std::log(v);
            const McEstimate e = f(t);
            return std::pair{e.value, e.std_error};
        },
        0.0, std::exp(-t_split), tol, tol * 1e-4);

    out.value = near.value + far.value;
    out.quad_error = near.error + far.error;
    out.mc_error = near.se + far.se;
    out.nodes.reserve(near.points.size() + far.points.size());
    for (const auto& pt : near.points) {
        const double t = pt.x * pt.x;
        const double jac = 2.0 * pt.x * std::exp(-t);
        out.nodes.push_back({t, jac > 0.0 ? pt.f / jac : 0.0,
                             jac > 0.0 ? pt.se / jac : 0.0, pt.weight * jac});
    }
    for (const auto& pt : far.points) {
        const double t = -std::log(pt.x);
        out.nodes.push_back({t, pt.f, pt.se, pt.weight});
    }
    std::sort(out.nodes.begin(), out.nodes.end(),
              [](const QuadNode& a, const QuadNode& b) { return a.t < b.t; });
    return out;
}

namespace {

BoundReport assemble_report(const TimeIntegral& integral, const BoundOptions& opt,
                            const PairProcess& process, int depth, bool surrogate) {
    BoundReport rep;
    rep.bound = std::max(0.0, integral.value);
    rep.per_node = integral.nodes;
    rep.truncation_depth = depth;
    rep.quad_error = integral.quad_error;
    rep.mc_error = integral.mc_error;
    rep.via_jensen_surrogate = surrogate;
    rep.config = {{"p", opt.p},
                  {"quad_tol", opt.quad_tol},
                  {"trunc_tol", opt.trunc_tol},
                  {"n_mc", opt.n_mc},
                  {"chunk_size", opt.chunk_size},
                  {"seed", opt.seed},
                  {"t_split", opt.t_split},
                  {"dim", process.dim},
                  {"scale", process.scale},
                  {"exchangeable", process.exchangeable},
                  {"route", surrogate ? "jensen_surrogate" : "conditional_moments"}};
    return rep;
}

}  // namespace

BoundReport w_bound(const PairProcess& process, const ConditionalMomentOracle& oracle,
                    const BoundOptions& opt) {
    const SeriesSpec spec = spec_for(process, opt.p);
    int max_depth = 0;
    std::mutex depth_mutex;
    auto integrand_root = [&](double t) -> McEstimate {
        {
            IntegrandEvaluator probe(process, oracle, t, opt, spec);
            std::lock_guard<std::mutex> lk(depth_mutex);
            max_depth = std::max(max_depth, probe.depth());
        }
        if (opt.p == 2.0) {
            McEstimate m = s2_integrand(process, oracle, t, opt);
            if (m.value <= 0.0) return {0.0, 0.0};
            const double root = std::sqrt(m.value);
            return {root, m.std_error / (2.0 * root)};
        }
        return sp_integrand(process, oracle, t, opt.p, opt);
    };
    const TimeIntegral integral = integrate_time(integrand_root, opt.quad_tol, opt.t_split);
    return assemble_report(integral, opt, process, max_depth, false);
}

BoundReport w_bound(const PairProcess& process, const SurrogateOracle& oracle,
                    const BoundOptions& opt) {
    (void)spec_for(process, opt.p);
    auto integrand_root = [&](double t) -> McEstimate {
        if (opt.p == 2.0) {
            McEstimate m = s2_integrand(process, oracle, t, opt);
            if (m.value <= 0.0) return {0.0, 0.0};
            const double root = std::sqrt(m.value);
            return {root, m.std_error / (2.0 * root)};
        }
        return sp_integrand(process, oracle, t, opt.p, opt);
    };
    const TimeIntegral integral = integrate_time(integrand_root, opt.quad_tol, opt.t_split);
    int depth = 0;
    if (oracle.series_depth)
        for (const auto& node : integral.nodes)
            depth = std::max(depth, oracle.series_depth(node.t));
    return assemble_report(integral, opt, process, depth, true);
}

nlohmann::json BoundReport::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : per_node)
        nodes.push_back({{"t", n.t},
                         {"integrand", n.integrand},
                         {"std_error", n.std_error},
                         {"weight", n.weight}});
    return {{"bound", bound},
            {"per_node", nodes},
            {"truncation_depth", truncation_depth},
            {"quad_error", quad_error},
            {"mc_error", mc_error},
            {"via_jensen_surrogate", via_jensen_surrogate},
            {"config", config}};
}

}  // namespace steinw
