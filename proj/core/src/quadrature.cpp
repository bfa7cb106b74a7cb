#include "steinw/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace steinw {

namespace {

GaussRule compute_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
        // Chebyshev-angle initial guess, then Newton on P_n.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return rule;
}

std::mutex g_rule_mutex;

struct Panel {
    double a, b;
    double value;
    double se;
    std::vector<EvalPoint> pts;
};

Panel eval_panel(const std::function<std::pair<double, double>(double)>& f, double a, double b,
                 const GaussRule& rule) {
    Panel p{a, b, 0.0, 0.0, {}};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    p.pts.reserve(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = mid + half * rule.nodes[i];
        const auto [fx, se] = f(x);
        if (!std::isfinite(fx))
            throw std::runtime_error("adaptive_gauss: non-finite integrand value");
        const double w = half * rule.weights[i];
        p.value += w * fx;
        p.se += std::abs(w) * se;
        p.pts.push_back({x, fx, se, w});
    }
    return p;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    if (order < 2 || order > 128) throw std::invalid_argument("gauss_legendre: order out of range");
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

AdaptiveResult adaptive_gauss(const std::function<std::pair<double, double>(double)>& f,
                              double a, double b, double rel_tol, double abs_tol,
                              int order, int max_depth) {
    const GaussRule& rule = gauss_legendre(order);
    AdaptiveResult out;
    const double total_width = b - a;
    // First pass for scale.
    Panel root = eval_panel(f, a, b, rule);
    double scale = std::abs(root.value);

    struct Work {
        Panel panel;
        int depth;
    };
    std::vector<Work> stack;
    stack.push_back({std::move(root), 0});

    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();
        const double mid = 0.5 * (w.panel.a + w.panel.b);
        Panel left = eval_panel(f, w.panel.a, mid, rule);
        Panel right = eval_panel(f, mid, w.panel.b, rule);
        const double refined = left.value + right.value;
        const double err = std::abs(w.panel.value - refined);
        scale = std::max(scale, std::abs(refined));
        // Error budget proportional to panel width.
        const double frac = (w.panel.b - w.panel.a) / total_width;
        const double tol = std::max(abs_tol, rel_tol * scale) * frac;
        if (err < tol || w.depth >= max_depth) {
            out.value += refined;
            out.error += err;
            out.se += left.se + right.se;
            out.points.insert(out.points.end(), left.pts.begin(), left.pts.end());
            out.points.insert(out.points.end(), right.pts.begin(), right.pts.end());
        } else {
            stack.push_back({std::move(right), w.depth + 1});
            stack.push_back({std::move(left), w.depth + 1});
        }
    }
    return out;
}

}  // namespace steinw
