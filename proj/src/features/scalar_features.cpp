#include "precsel/features/scalar_features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "precsel/krylov/pcg.hpp"

namespace precsel {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm1(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// CG on A^2 y = A rhs. Slow, but well defined for symmetric indefinite A.
bool normal_cg(const SparseMatrix& a, std::span<const double> rhs, double tol, int max_iter, std::vector<double>& out) {
    const index_t n = a.n();
    std::vector<double> r(n), p(n), t(n), q(n);
    a.multiply(rhs, r);
    out.assign(n, 0.0);
    const double r0 = norm2(r);
    if (r0 == 0.0) return true;
    p = r;
    double rr = dot(r, r);
    for (int k = 0; k < max_iter; ++k) {
        a.multiply(p, t);
        a.multiply(t, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) return false;
        const double alpha = rr / pq;
        for (index_t i = 0; i < n; ++i) {
            out[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        const double rr_new = dot(r, r);
        if (std::sqrt(rr_new) <= tol * r0) break;
        for (index_t i = 0; i < n; ++i) p[i] = r[i] + rr_new / rr * p[i];
        rr = rr_new;
    }
    return relative_residual(a, out, rhs) <= std::sqrt(tol);
}

/// Inner solver for the estimators: Jacobi-preconditioned CG, falling back
/// to plain CG when the diagonal scaling is unusable, and to CG on the
/// normal equations when A is indefinite.
class InverseApplier {
public:
    InverseApplier(const SparseMatrix& a, double tol) : a_(a), none_(build_preconditioner(a, PrecondKind::NONE)) {
        opts_.rtol = tol;
        opts_.max_iter = std::max<int>(1000, 20 * a.n());
        try {
            jacobi_ = build_preconditioner(a, PrecondKind::JACOBI);
        } catch (const SetupFailure&) {
        }
    }

    /// Returns false when no inner solve reached the tolerance.
    bool solve(std::span<const double> rhs, std::vector<double>& out) const {
        if (jacobi_) {
            SolveResult r = pcg_solve(a_, rhs, *jacobi_, opts_);
            if (r.converged) {
                out = std::move(r.x);
                return true;
            }
        }
        SolveResult r = pcg_solve(a_, rhs, *none_, opts_);
        if (r.converged) {
            out = std::move(r.x);
            return true;
        }
        if (r.status == SolveStatus::indefinite || r.status == SolveStatus::max_iterations)
            return normal_cg(a_, rhs, opts_.rtol, opts_.max_iter, out);
        out = std::move(r.x);
        return false;
    }

private:
    const SparseMatrix& a_;
    std::unique_ptr<Preconditioner> none_;
    std::unique_ptr<Preconditioner> jacobi_;
    PcgOptions opts_;
};

std::vector<double> start_vector(index_t n) {
    std::vector<double> v(n);
    for (index_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + i);
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    return v;
}


std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::array<double, ScalarFeatures::kCount> ScalarFeatures::as_array() const {
    return {density, static_cast<double>(n), static_cast<double>(nnz), row_nnz, condest, min_eig, max_eig, ddom, ddeg};
}

const std::array<const char*, ScalarFeatures::kCount>& ScalarFeatures::names() {
    static const std::array<const char*, kCount> n{"density", "n",       "nnz",  "row_nnz", "condest",
                                                   "min_eig", "max_eig", "ddom", "ddeg"};
    return n;
}

ScalarFeatures basic_features(const SparseMatrix& a) {
    ScalarFeatures f;
    f.n = a.n();
    f.nnz = a.nnz();
    const double n = static_cast<double>(a.n());
    f.density = static_cast<double>(a.nnz()) / (n * n);
    f.row_nnz = static_cast<double>(a.nnz()) / n;

    index_t dominated = 0;
    double min_ratio = kInf;
    for (index_t i = 0; i < a.n(); ++i) {
        auto cols = a.row_cols(i);
        auto vals = a.row_values(i);
        double d = 0.0, off = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == i)
                d = std::abs(vals[k]);
            else
                off += std::abs(vals[k]);
        }
        if (d > off) ++dominated;
        if (off > 0.0) min_ratio = std::min(min_ratio, d / off);
    }
    f.ddom = static_cast<double>(dominated) / n;
    f.ddeg = std::isinf(min_ratio) ? kDdegCap : min_ratio;
    return f;
}

double estimate_condest(const SparseMatrix& a, double solver_tol) {
    const index_t n = a.n();
    const double anorm = a.norm1();
    InverseApplier inv(a, solver_tol);
    std::vector<double> x(n, 1.0 / n), y, z, sign(n);
    auto apply = [&](std::span<const double> rhs, std::vector<double>& out) {
        if (!inv.solve(rhs, out)) throw ConditionUnavailable("condest: inner solve did not converge");
    };

    double est = 0.0;
    constexpr int kMaxSweeps = 5;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        apply(x, y);
        const double ynorm = norm1(y);
        if (sweep > 0 && ynorm <= est) break;
        est = ynorm;
        for (index_t i = 0; i < n; ++i) sign[i] = y[i] >= 0.0 ? 1.0 : -1.0;
        apply(sign, z);
        index_t j = 0;
        for (index_t i = 1; i < n; ++i)
            if (std::abs(z[i]) > std::abs(z[j])) j = i;
        if (std::abs(z[j]) <= dot(z, x)) break;
        std::fill(x.begin(), x.end(), 0.0);
        x[j] = 1.0;
    }

    if (n > 1) {
        for (index_t i = 0; i < n; ++i) x[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / (n - 1));
        apply(x, y);
        const double alt = 2.0 * norm1(y) / (3.0 * n);
        // Ignore rounding-level gains so exact cases stay exact.
        if (alt > est * (1.0 + 1e-12)) est = alt;
    }
    return anorm * est;
}

EigenEstimate estimate_extreme_eigs(const SparseMatrix& a, double tol, int max_iter, double solver_tol) {
    const index_t n = a.n();
    EigenEstimate out;
    std::vector<double> w(n);

    {
        std::vector<double> v = start_vector(n);
        double prev = 0.0;
        for (int k = 0; k < max_iter; ++k) {
            a.multiply(v, w);
            const double lambda = dot(v, w);
            out.max_eig = lambda;
            out.max_iterations = k + 1;
            if (k > 0 && std::abs(lambda - prev) <= tol * std::abs(lambda)) {
                out.max_converged = true;
                break;
            }
            const double wn = norm2(w);
            if (wn == 0.0) {
                out.max_converged = true;
                break;
            }
            for (index_t i = 0; i < n; ++i) v[i] = w[i] / wn;
            prev = lambda;
        }
    }

    {
        InverseApplier inv(a, solver_tol);
        std::vector<double> v = start_vector(n), sol;
        double prev = 0.0;
        for (int k = 0; k < max_iter; ++k) {
            a.multiply(v, w);
            const double lambda = dot(v, w);
            out.min_eig = lambda;
            out.min_iterations = k + 1;
            if (k > 0 && std::abs(lambda - prev) <= tol * std::abs(lambda)) {
                out.min_converged = true;
                break;
            }
            if (!inv.solve(v, sol)) break;
            const double sn = norm2(sol);
            if (!(sn > 0.0) || !std::isfinite(sn)) break;
            for (index_t i = 0; i < n; ++i) v[i] = sol[i] / sn;
            prev = lambda;
        }
    }
    return out;
}

ScalarFeatures compute_features(const SparseMatrix& a, const FeatureOptions& opts) {
    ScalarFeatures f = basic_features(a);
    try {
        f.condest = estimate_condest(a, opts.solver_tol);
        f.condest_converged = std::isfinite(f.condest);
    } catch (const ConditionUnavailable&) {
        f.condest = std::numeric_limits<double>::quiet_NaN();
        f.condest_converged = false;
    }
    EigenEstimate e = estimate_extreme_eigs(a, opts.eig_tol, opts.eig_max_iter, opts.solver_tol);
    f.min_eig = e.min_eig;
    f.max_eig = e.max_eig;
    f.eigs_converged = e.converged();
    return f;
}

void write_feature_table(const std::filesystem::path& path, const std::map<std::string, ScalarFeatures>& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "matrix_id";
    for (const char* name : ScalarFeatures::names()) out << ',' << name;
    out << ",condest_converged,eigs_converged\n";
    for (const auto& [id, f] : table) {
        out << id;
        for (double v : f.as_array()) out << ',' << format_double(v);
        out << ',' << (f.condest_converged ? 1 : 0) << ',' << (f.eigs_converged ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::map<std::string, ScalarFeatures> read_feature_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("matrix_id,density", 0) != 0) throw ParseError("unexpected feature table header in " + path.string());
    std::map<std::string, ScalarFeatures> table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 12) throw ParseError("feature row must have 12 fields: '" + line + "'");
        auto num = [&](int i) { return std::strtod(f[i].c_str(), nullptr); };
        ScalarFeatures s;
        s.density = num(1);
        s.n = static_cast<index_t>(num(2));
        s.nnz = static_cast<index_t>(num(3));
        s.row_nnz = num(4);
        s.condest = num(5);
        s.min_eig = num(6);
        s.max_eig = num(7);
        s.ddom = num(8);
        s.ddeg = num(9);
        s.condest_converged = f[10] == "1";
        s.eigs_converged = f[11] == "1";
        table[f[0]] = s;
    }
    return table;
}

}  // namespace precsel
