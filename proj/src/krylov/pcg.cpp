#include "precsel/krylov/pcg.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace precsel {
namespace {

using Clock = std::chrono::steady_clock;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int iteration_cap(const SparseMatrix& a, const PcgOptions& opts) {
    return opts.max_iter >= 0 ? opts.max_iter : 10 * a.n();
}

double true_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b, double bnorm,
                     std::vector<double>& scratch) {
    a.multiply(x, scratch);
    for (std::size_t i = 0; i < b.size(); ++i) scratch[i] = b[i] - scratch[i];
    return norm2(scratch) / bnorm;
}

SolveResult finish(SolveResult res, const SparseMatrix& a, std::span<const double> b, double bnorm,
                   Clock::time_point t0) {
    std::vector<double> scratch(b.size());
    res.rel_residual = true_residual(a, res.x, b, bnorm, scratch);
    if (!std::isfinite(res.rel_residual)) {
        res.status = SolveStatus::diverged;
        res.converged = false;
    }
    res.wall_time = seconds_since(t0);
    return res;
}

SolveResult pcg_standard(const SparseMatrix& a, std::span<const double> b, const Preconditioner& m,
                         const PcgOptions& opts, double bnorm, Clock::time_point t0) {
    const std::size_t n = b.size();
    const int cap = iteration_cap(a, opts);
    SolveResult res;
    res.x.assign(n, 0.0);
    std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
    m.apply(r, z);
    p = z;
    double rz = dot(r, z);

    for (int k = 1; k <= cap; ++k) {
        if (seconds_since(t0) > opts.time_limit) {
            res.status = SolveStatus::time_limit;
            break;
        }
        a.multiply(p, q);
        const double pq = dot(p, q);
        if (!std::isfinite(pq)) {
            res.status = SolveStatus::diverged;
            break;
        }
        if (pq <= opts.indefinite_threshold) {
            res.status = SolveStatus::indefinite;
            break;
        }
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res.iterations = k;
        double rnorm = norm2(r);
        if (!std::isfinite(rnorm)) {
            res.status = SolveStatus::diverged;
            break;
        }
        m.apply(r, z);
        double rz_new = dot(r, z);
        if (opts.observer) opts.observer({k, res.x, rnorm, std::sqrt(std::max(rz_new, 0.0))});
        if (rnorm / bnorm <= opts.rtol) {
            if (true_residual(a, res.x, b, bnorm, q) <= opts.rtol) {
                res.status = SolveStatus::converged;
                res.converged = true;
                break;
            }
            // Recursive residual drifted; restart the recurrence from the true residual.
            for (std::size_t i = 0; i < n; ++i) r[i] = q[i];
            m.apply(r, z);
            rz_new = dot(r, z);
        }
        const double beta = rz_new / rz;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_new;
    }
    return finish(std::move(res), a, b, bnorm, t0);
}

/// CG on C^{-1} A' C^{-T} with A' = D^{-1/2} A D^{-1/2} and C = I + omega L'.
/// One operator application costs two triangular solves and no product with A.
SolveResult pcg_eisenstat(const SparseMatrix& a, std::span<const double> b, const SsorPreconditioner& m,
                          const PcgOptions& opts, double bnorm, Clock::time_point t0) {
    const std::size_t n = b.size();
    const int cap = iteration_cap(a, opts);
    const double omega = m.omega();
    const double scale = omega * (2.0 - omega);
    const auto s = m.inv_sqrt_diag();

    std::vector<double> rh(n), y(n, 0.0), p(n), q(n), t(n), tmp(n), xs(n);
    for (std::size_t i = 0; i < n; ++i) rh[i] = s[i] * b[i];
    m.scaled_lower_solve(rh);
    p = rh;
    double rho = dot(rh, rh);

    auto apply_operator = [&](std::span<const double> v, std::span<double> out) {
        for (std::size_t i = 0; i < n; ++i) t[i] = v[i];
        m.scaled_upper_solve(t);
        for (std::size_t i = 0; i < n; ++i) out[i] = v[i] / omega + (1.0 - 2.0 / omega) * t[i];
        m.scaled_lower_solve(out);
        for (std::size_t i = 0; i < n; ++i) out[i] += t[i] / omega;
    };
    auto recover_x = [&](std::span<double> x) {
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i];
        m.scaled_upper_solve(x);
        for (std::size_t i = 0; i < n; ++i) x[i] *= s[i];
    };
    auto residual_norm = [&] {
        m.scaled_lower_multiply(rh, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] /= s[i];
        return norm2(tmp);
    };

    SolveResult res;
    for (int k = 1; k <= cap; ++k) {
        if (seconds_since(t0) > opts.time_limit) {
            res.status = SolveStatus::time_limit;
            break;
        }
        apply_operator(p, q);
        const double pq = dot(p, q);
        if (!std::isfinite(pq)) {
            res.status = SolveStatus::diverged;
            break;
        }
        if (pq <= opts.indefinite_threshold) {
            res.status = SolveStatus::indefinite;
            break;
        }
        const double alpha = rho / pq;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += alpha * p[i];
            rh[i] -= alpha * q[i];
        }
        res.iterations = k;
        double rnorm = residual_norm();
        if (!std::isfinite(rnorm)) {
            res.status = SolveStatus::diverged;
            break;
        }
        double rho_new = dot(rh, rh);
        if (opts.observer) {
            recover_x(xs);
            opts.observer({k, xs, rnorm, std::sqrt(scale * rho_new)});
        }
        if (rnorm / bnorm <= opts.rtol) {
            recover_x(xs);
            if (true_residual(a, xs, b, bnorm, tmp) <= opts.rtol) {
                res.status = SolveStatus::converged;
                res.converged = true;
                break;
            }
            for (std::size_t i = 0; i < n; ++i) rh[i] = s[i] * tmp[i];
            m.scaled_lower_solve(rh);
            rho_new = dot(rh, rh);
        }
        const double beta = rho_new / rho;
        for (std::size_t i = 0; i < n; ++i) p[i] = rh[i] + beta * p[i];
        rho = rho_new;
    }
    res.x.assign(n, 0.0);
    recover_x(res.x);
    return finish(std::move(res), a, b, bnorm, t0);
}

}  // namespace

SolveResult pcg_solve(const SparseMatrix& a, std::span<const double> b, const Preconditioner& m,
                      const PcgOptions& opts) {
    const auto t0 = Clock::now();
    if (b.size() != static_cast<std::size_t>(a.n()) || m.size() != a.n())
        throw ShapeError("pcg_solve: dimension mismatch");
    const double bnorm = norm2(b);
    if (!std::isfinite(bnorm)) {
        SolveResult res;
        res.x.assign(b.size(), 0.0);
        res.status = SolveStatus::diverged;
        res.wall_time = seconds_since(t0);
        return res;
    }
    if (bnorm == 0.0) {
        SolveResult res;
        res.x.assign(b.size(), 0.0);
        res.rel_residual = 0.0;
        res.converged = true;
        res.status = SolveStatus::converged;
        res.wall_time = seconds_since(t0);
        return res;
    }
    if (m.kind() == PrecondKind::EISENSTAT) {
        if (const auto* ssor = dynamic_cast<const SsorPreconditioner*>(&m))
            return pcg_eisenstat(a, b, *ssor, opts, bnorm, t0);
    }
    return pcg_standard(a, b, m, opts, bnorm, t0);
}

double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b) {
    if (x.size() != b.size() || b.size() != static_cast<std::size_t>(a.n()))
        throw ShapeError("relative_residual: dimension mismatch");
    const double bnorm = norm2(b);
    if (bnorm == 0.0) throw UndefinedMeasure("relative residual undefined for b = 0");
    std::vector<double> scratch(b.size());
    return true_residual(a, x, b, bnorm, scratch);
}

double relative_error(std::span<const double> x, std::span<const double> x_star) {
    if (x.size() != x_star.size()) throw ShapeError("relative_error: dimension mismatch");
    const double xnorm = norm2(x_star);
    if (xnorm == 0.0) throw UndefinedMeasure("relative error undefined for x* = 0");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - x_star[i]) * (x[i] - x_star[i]);
    return std::sqrt(s) / xnorm;
}

}  // namespace precsel
