#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace rbshadow {

struct DecaySample {
    int m = 0;
    double value = 0.0;
    std::uint64_t shot = 0;
};

struct LengthSummary {
    int m = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t shots = 0;
};

// Per-length means in increasing m. Values are sorted within each length before
// summation so the result does not depend on shot order.
inline std::vector<LengthSummary> summarize(const std::vector<DecaySample>& samples) {
    std::map<int, std::vector<double>> by_m;
    for (const auto& s : samples) {
        if (!std::isfinite(s.value)) throw std::invalid_argument("non-finite sample value");
        by_m[s.m].push_back(s.value);
    }
    std::vector<LengthSummary> out;
    for (auto& [m, v] : by_m) {
        std::sort(v.begin(), v.end());
        const double n = static_cast<double>(v.size());
        double acc = 0;
        for (double x : v) acc += x;
        const double mean = acc / n;
        double sq = 0;
        for (double x : v) sq += (x - mean) * (x - mean);
        out.push_back({m, mean, v.size() > 1 ? std::sqrt(sq / (n - 1) / n) : 0.0, v.size()});
    }
    return out;
}

enum class DecayModel { Exponential, ExponentialOffset };

struct DecayFit {
    DecayModel model = DecayModel::Exponential;
    double a = 0, lambda = 0, b = 0;
    double sigma_a = 0, sigma_lambda = 0, sigma_b = 0;
    double residual = 0;  // weighted sum of squared residuals
    double r2 = 0;
    bool converged = false;
    bool lambda_in_range = true;
    int iterations = 0;

    double operator()(double m) const { return a * std::pow(lambda, m) + b; }
};

namespace detail {

struct FitProblem {
    std::vector<double> m, y, w;
    bool offset = false;

    int k() const { return offset ? 3 : 2; }

    double model(const Eigen::Vector3d& t, double mi) const { return t(0) * std::pow(t(1), mi) + (offset ? t(2) : 0.0); }

    double ssr(const Eigen::Vector3d& t) const {
        double s = 0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double r = y[i] - model(t, m[i]);
            s += w[i] * r * r;
        }
        return s;
    }

    void normal_equations(const Eigen::Vector3d& t, Eigen::MatrixXd& H, Eigen::VectorXd& g) const {
        H = Eigen::MatrixXd::Zero(k(), k());
        g = Eigen::VectorXd::Zero(k());
        Eigen::VectorXd J(k());
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double p = std::pow(t(1), m[i]);
            J(0) = p;
            J(1) = m[i] == 0 ? 0.0 : t(0) * m[i] * std::pow(t(1), m[i] - 1);
            if (offset) J(2) = 1.0;
            const double r = y[i] - model(t, m[i]);
            H += w[i] * J * J.transpose();
            g += w[i] * r * J;
        }
    }
};

inline constexpr double kLambdaLo = -0.1, kLambdaHi = 1.1;

struct LmResult {
    Eigen::Vector3d t;
    double ssr;
    bool converged;
    int iterations;
};

inline LmResult levenberg_marquardt(const FitProblem& P, Eigen::Vector3d t) {
    const int max_iter = 1000;
    double cur = P.ssr(t);
    double mu = -1;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::MatrixXd H;
        Eigen::VectorXd g;
        P.normal_equations(t, H, g);
        if (mu < 0) mu = 1e-3 * std::max(1e-300, H.diagonal().maxCoeff());
        if (cur == 0.0 || g.norm() <= 1e-300) return {t, cur, true, it};
        bool accepted = false;
        while (mu < 1e30) {
            Eigen::MatrixXd A = H;
            for (int i = 0; i < P.k(); ++i) A(i, i) += mu * std::max(H(i, i), 1e-300);
            const Eigen::VectorXd step = A.ldlt().solve(g);
            Eigen::Vector3d cand = t;
            cand.head(P.k()) += step;
            cand(1) = std::clamp(cand(1), kLambdaLo, kLambdaHi);
            const double next = P.ssr(cand);
            if (std::isfinite(next) && next <= cur) {
                const double rel_step = (cand - t).head(P.k()).norm() / (t.head(P.k()).norm() + 1e-300);
                t = cand;
                cur = next;
                mu = std::max(mu / 3, 1e-300);
                accepted = true;
                if (rel_step < 1e-14) return {t, cur, true, it};
                break;
            }
            mu *= 4;
        }
        if (!accepted) return {t, cur, true, it};  // no descent direction left: stationary point
    }
    return {t, cur, false, max_iter};
}

// Ordinary least squares for (a, b) at fixed lambda.
inline Eigen::Vector3d linear_at(const FitProblem& P, double lambda) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(P.m.size()), P.offset ? 2 : 1);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(P.m.size()));
    for (std::size_t i = 0; i < P.m.size(); ++i) {
        const double sw = std::sqrt(P.w[i]);
        A(static_cast<Eigen::Index>(i), 0) = sw * std::pow(lambda, P.m[i]);
        if (P.offset) A(static_cast<Eigen::Index>(i), 1) = sw;
        rhs(static_cast<Eigen::Index>(i)) = sw * P.y[i];
    }
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);
    return Eigen::Vector3d(sol(0), lambda, P.offset ? sol(1) : 0.0);
}

inline Eigen::Vector3d log_linear_init(const FitProblem& P) {
    const double b0 = P.offset ? P.y.back() : 0.0;
    std::vector<double> xs, ls;
    double sign = 1;
    const std::size_t usable = P.offset ? P.m.size() - 1 : P.m.size();
    for (std::size_t i = 0; i < usable; ++i) {
        const double v = P.y[i] - b0;
        if (std::abs(v) > 1e-300) {
            if (xs.empty()) sign = v < 0 ? -1 : 1;
            xs.push_back(P.m[i]);
            ls.push_back(std::log(std::abs(v)));
        }
    }
    if (xs.size() < 2) return Eigen::Vector3d(P.y.front() - b0, 0.9, b0);
    double mx = 0, ml = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        ml += ls[i];
    }
    mx /= static_cast<double>(xs.size());
    ml /= static_cast<double>(xs.size());
    double sxx = 0, sxl = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxl += (xs[i] - mx) * (ls[i] - ml);
    }
    const double slope = sxx > 0 ? sxl / sxx : std::log(0.9);
    const double lam = std::clamp(std::exp(slope), 0.01, 1.0);
    return Eigen::Vector3d(sign * std::exp(ml - slope * mx), lam, b0);
}

inline DecayFit solve(const FitProblem& P, bool scale_by_residual) {
    std::vector<Eigen::Vector3d> starts{log_linear_init(P)};
    if (P.offset) {
        FitProblem Q = P;
        Q.offset = false;
        auto s = log_linear_init(Q);
        s(2) = 0;
        starts.push_back(s);
    }
    {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Vector3d bt;
        for (int i = 1; i <= 200; ++i) {
            const auto t = linear_at(P, 0.005 * i);
            const double s = P.ssr(t);
            if (s < best) {
                best = s;
                bt = t;
            }
        }
        starts.push_back(bt);
    }
    LmResult best{Eigen::Vector3d::Zero(), std::numeric_limits<double>::infinity(), false, 0};
    for (const auto& s : starts) {
        const auto r = levenberg_marquardt(P, s);
        if (r.ssr < best.ssr || (r.ssr == best.ssr && r.converged && !best.converged)) best = r;
    }
    DecayFit f;
    f.model = P.offset ? DecayModel::ExponentialOffset : DecayModel::Exponential;
    f.a = best.t(0);
    f.lambda = best.t(1);
    f.b = P.offset ? best.t(2) : 0.0;
    f.residual = best.ssr;
    f.converged = best.converged;
    f.iterations = best.iterations;
    f.lambda_in_range = f.lambda >= 0.0 && f.lambda <= 1.0;

    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    P.normal_equations(best.t, H, g);
    const auto N = static_cast<double>(P.m.size());
    double s2 = 1.0;
    if (scale_by_residual) s2 = N > P.k() ? best.ssr / (N - P.k()) : 0.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
    if (lu.isInvertible()) {
        const Eigen::MatrixXd cov = lu.inverse() * s2;
        f.sigma_a = std::sqrt(std::max(0.0, cov(0, 0)));
        f.sigma_lambda = std::sqrt(std::max(0.0, cov(1, 1)));
        if (P.offset) f.sigma_b = std::sqrt(std::max(0.0, cov(2, 2)));
    } else {
        f.sigma_a = f.sigma_lambda = f.sigma_b = std::numeric_limits<double>::infinity();
    }

    double ybar = 0;
    for (double v : P.y) ybar += v;
    ybar /= N;
    double ss_tot = 0, ss_res = 0;
    for (std::size_t i = 0; i < P.m.size(); ++i) {
        ss_tot += (P.y[i] - ybar) * (P.y[i] - ybar);
        const double r = P.y[i] - P.model(best.t, P.m[i]);
        ss_res += r * r;
    }
    if (ss_tot > 0) f.r2 = 1 - ss_res / ss_tot;
    else f.r2 = ss_res <= 1e-28 * (1 + ybar * ybar) ? 1.0 : 0.0;
    return f;
}

}  // namespace detail

// Weighted least squares on per-length means. Lengths with zero standard error
// (exact data, or identical shots) switch to unit weights scaled by the residual variance.
inline DecayFit fit_decay(const std::vector<LengthSummary>& lengths, DecayModel model) {
    if (lengths.size() < 3) throw std::invalid_argument("fit needs at least 3 distinct lengths");
    for (std::size_t i = 1; i < lengths.size(); ++i)
        if (lengths[i].m <= lengths[i - 1].m) throw std::invalid_argument("lengths must be distinct and increasing");
    bool all_zero = true, weighted = true;
    for (const auto& l : lengths) {
        if (!std::isfinite(l.mean)) throw std::invalid_argument("non-finite mean");
        if (l.mean != 0.0) all_zero = false;
        if (!(l.stderr_ > 0)) weighted = false;
    }
    if (all_zero) throw std::invalid_argument("all means are zero");
    detail::FitProblem P;
    for (const auto& l : lengths) {
        P.m.push_back(l.m);
        P.y.push_back(l.mean);
        P.w.push_back(weighted ? 1.0 / (l.stderr_ * l.stderr_) : 1.0);
    }
    P.offset = false;
    DecayFit plain = detail::solve(P, !weighted);
    if (model == DecayModel::Exponential) return plain;
    // Offset degeneracy: keep the offset-free fit whenever it is exact.
    double scale = 0;
    for (std::size_t i = 0; i < P.y.size(); ++i) scale += P.w[i] * P.y[i] * P.y[i];
    if (plain.residual <= 1e-26 * scale) {
        plain.model = DecayModel::ExponentialOffset;
        return plain;
    }
    P.offset = true;
    return detail::solve(P, !weighted);
}

inline DecayFit fit_decay(const std::vector<DecaySample>& samples, DecayModel model) {
    return fit_decay(summarize(samples), model);
}

}  // namespace rbshadow
