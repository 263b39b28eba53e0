#include "ehlearn/direct.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ehlearn {

int OptimizationTrace::best_index() const {
    if (costs.empty()) throw std::logic_error("trace: empty");
    return static_cast<int>(std::min_element(costs.begin(), costs.end()) -
                            costs.begin());
}

void OptimizationTrace::validate() const {
    if (points.size() != costs.size())
        throw std::logic_error("trace: points/costs size mismatch");
    for (std::size_t i = 1; i < shots_cum.size(); ++i)
        if (shots_cum[i] < shots_cum[i - 1])
            throw std::logic_error("trace: cumulative shots decreased");
}

namespace {

struct Rect {
    Eigen::VectorXd center;  // unit-cube coordinates
    std::vector<int> levels; // side length 3^-level per dimension
    double f = 0.0;

    double half_diameter() const {
        double s = 0.0;
        for (int k : levels) s += std::pow(3.0, -2.0 * k);
        return 0.5 * std::sqrt(s);
    }
};

}  // namespace

std::pair<Eigen::VectorXd, OptimizationTrace> direct_optimize(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const std::vector<std::pair<double, double>>& bounds, long eval_budget,
    const DirectOptions& options) {
    const int d = static_cast<int>(bounds.size());
    if (d == 0) throw std::invalid_argument("direct: empty bounds");
    if (eval_budget < 1) throw std::invalid_argument("direct: budget >= 1 required");
    for (const auto& [lo, hi] : bounds)
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("direct: invalid box bounds");

    OptimizationTrace trace;
    auto to_real = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i)
            x(i) = bounds[i].first + u(i) * (bounds[i].second - bounds[i].first);
        return x;
    };
    auto evaluate = [&](const Eigen::VectorXd& u) {
        const auto t0 = std::chrono::steady_clock::now();
        const Eigen::VectorXd x = to_real(u);
        const double f = objective(x);
        const auto t1 = std::chrono::steady_clock::now();
        trace.points.push_back(x);
        trace.costs.push_back(f);
        trace.shots_cum.push_back(static_cast<long>(trace.costs.size()) *
                                  options.shots_per_eval);
        trace.wall_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        return f;
    };
    auto evals_left = [&]() {
        return eval_budget - static_cast<long>(trace.costs.size());
    };

    for (const auto& x0 : options.extra_points) {
        if (evals_left() <= 0) break;
        Eigen::VectorXd u(d);
        for (int i = 0; i < d; ++i) {
            u(i) = (x0(i) - bounds[i].first) / (bounds[i].second - bounds[i].first);
            if (u(i) < 0.0 || u(i) > 1.0)
                throw std::invalid_argument("direct: start point outside bounds");
        }
        evaluate(u);
    }

    std::vector<Rect> rects;
    if (evals_left() > 0) {
        Rect r0{Eigen::VectorXd::Constant(d, 0.5), std::vector<int>(d, 0), 0.0};
        r0.f = evaluate(r0.center);
        rects.push_back(std::move(r0));
    }

    const int max_level = 30;
    while (evals_left() > 0 && !rects.empty()) {
        const double fmin = *std::min_element(trace.costs.begin(), trace.costs.end());

        // min-f representative per diameter class
        std::map<long long, int> rep;  // quantized diameter -> rect index
        for (std::size_t i = 0; i < rects.size(); ++i) {
            const long long key =
                static_cast<long long>(std::llround(std::log(rects[i].half_diameter()) * 1e9));
            auto it = rep.find(key);
            if (it == rep.end() || rects[i].f < rects[it->second].f)
                rep[key] = static_cast<int>(i);
        }
        std::vector<int> cand;  // ascending diameter
        for (const auto& [key, idx] : rep) cand.push_back(idx);

        // lower convex hull over (diameter, f)
        std::vector<int> hull;
        for (int idx : cand) {
            const double dx = rects[idx].half_diameter(), fx = rects[idx].f;
            while (hull.size() >= 2) {
                const auto& a = rects[hull[hull.size() - 2]];
                const auto& b = rects[hull[hull.size() - 1]];
                const double cross = (b.half_diameter() - a.half_diameter()) * (fx - a.f) -
                                     (dx - a.half_diameter()) * (b.f - a.f);
                if (cross <= 0.0)
                    hull.pop_back();
                else
                    break;
            }
            hull.push_back(idx);
        }

        std::vector<int> selected;
        for (std::size_t j = 0; j < hull.size(); ++j) {
            const Rect& r = rects[hull[j]];
            if (j + 1 == hull.size()) {
                selected.push_back(hull[j]);  // largest rectangle always divides
                continue;
            }
            const Rect& nxt = rects[hull[j + 1]];
            const double K =
                (nxt.f - r.f) / (nxt.half_diameter() - r.half_diameter());
            if (K >= 0.0 &&
                r.f - K * r.half_diameter() <= fmin - options.eps * std::abs(fmin))
                selected.push_back(hull[j]);
        }
        if (selected.empty()) selected.push_back(hull.back());

        bool divided_any = false;
        for (int si : selected) {
            if (evals_left() <= 0) break;
            Rect& parent = rects[si];
            const int kmin = *std::min_element(parent.levels.begin(), parent.levels.end());
            if (kmin >= max_level) continue;
            std::vector<int> long_dims;
            for (int i = 0; i < d; ++i)
                if (parent.levels[i] == kmin) long_dims.push_back(i);

            struct Probe {
                int dim;
                double w;
                Eigen::VectorXd lo_c, hi_c;
                double lo_f = 0.0, hi_f = 0.0;
                bool complete = false;
            };
            const double delta = std::pow(3.0, -(kmin + 1));
            std::vector<Probe> probes;
            for (int dim : long_dims) {
                if (evals_left() <= 0) break;
                Probe p;
                p.dim = dim;
                p.lo_c = parent.center;
                p.lo_c(dim) -= delta;
                p.hi_c = parent.center;
                p.hi_c(dim) += delta;
                p.lo_f = evaluate(p.lo_c);
                if (evals_left() <= 0) {
                    p.hi_f = p.lo_f;  // budget died mid-pair; keep the sampled point
                    probes.push_back(p);
                    break;
                }
                p.hi_f = evaluate(p.hi_c);
                p.complete = true;
                p.w = std::min(p.lo_f, p.hi_f);
                probes.push_back(p);
            }
            if (probes.empty()) continue;
            divided_any = true;
            std::stable_sort(probes.begin(), probes.end(),
                             [](const Probe& a, const Probe& b) { return a.w < b.w; });
            for (const Probe& p : probes) {
                // push_back may reallocate rects; re-index the parent each time
                rects[si].levels[p.dim] += 1;
                Rect lo{p.lo_c, rects[si].levels, p.lo_f};
                Rect hi{p.hi_c, rects[si].levels, p.hi_f};
                rects.push_back(std::move(lo));
                if (p.complete) rects.push_back(std::move(hi));
            }
        }
        if (!divided_any) break;  // depth cap reached everywhere
    }

    trace.validate();
    const int best = trace.best_index();
    return {trace.points[best], trace};
}

}  // namespace ehlearn
