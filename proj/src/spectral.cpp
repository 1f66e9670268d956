#include "skyrmion/spectral.hpp"

#include "skyrmion/diagnostics.hpp"
#include "skyrmion/errors.hpp"
#include "skyrmion/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace skyrmion {

namespace {

constexpr std::size_t kDenseBelow = 600;

double w_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b,
             std::span<const double> c, std::span<const double> d) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * (a[i] * c[i] + b[i] * d[i]);
    return s;
}

// Cell coefficient mid/h of the gradient term, cells 0..N-1.
std::vector<double> cell_coefficients(const RadialGrid& g) {
    std::vector<double> c(g.size());
    for (std::size_t j = 0; j < g.size(); ++j)
        c[j] = g.cell_mid(j) / g.cell_width(j);
    return c;
}

} // namespace

ModePotentials mode_potentials(const Profile& f) {
    f.validate();
    const auto& g = *f.grid;
    const double r = f.params.r, b2 = f.params.beta * f.params.beta;
    ModePotentials p;
    p.fprime = derivative(g, f.values, Profile::origin_value);
    const std::size_t n = f.size();
    p.g1.resize(n), p.g2.resize(n), p.coupling.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double rho = g.node(i), fp = p.fprime[i];
        double s = std::sin(f.values[i]), c = std::cos(f.values[i]);
        double sh = std::sin(0.5 * f.values[i]), omc = 2.0 * sh * sh;
        double common = c * omc + b2 * c * (1.0 + c);
        p.g1[i] = c * c / (rho * rho) - fp * fp - 2.0 * r * fp - 2.0 * r * s * c / rho + common;
        p.g2[i] = (c * c - s * s) / (rho * rho) - 4.0 * r * s * c / rho + (1.0 - b2) * s * s + common;
        p.coupling[i] = c / (rho * rho) - r * s / rho;
    }
    return p;
}

ModeOperator::ModeOperator(int n, const Profile& f) : n_(n), profile_(f) {
    if (n < 0)
        throw ValidationError("mode index must be >= 0");
    if (f.size() < 8)
        throw ValidationError("ModeOperator: grid too small");
    pot_ = mode_potentials(f);
    const auto& g = *f.grid;
    const std::size_t m = f.size() - 1;
    auto c = cell_coefficients(g);
    const bool free_origin = n == 1;
    const double nn = double(n) * n;
    aa.resize(m), bb.resize(m), ab.resize(m), link.resize(m - 1), mass.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double rho = g.node(i), w = g.weight(i);
        double grad = c[i + 1] + ((i > 0 || !free_origin) ? c[i] : 0.0);
        aa[i] = grad + w * (nn / (rho * rho) + pot_.g1[i]);
        bb[i] = grad + w * (nn / (rho * rho) + pot_.g2[i]);
        ab[i] = w * 2.0 * n * pot_.coupling[i];
        mass[i] = w;
        if (i + 1 < m)
            link[i] = c[i + 1];
    }
}

double ModeOperator::form(std::span<const double> a, std::span<const double> b) const {
    const auto& g = *profile_.grid;
    const std::size_t N = g.size();
    if (a.size() != N || b.size() != N)
        throw ValidationError("ModeOperator::form: vectors must cover every node");
    const double nn = double(n_) * n_;
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        if (j == 0 && n_ == 1)
            continue;
        double h = g.cell_width(j), mid = g.cell_mid(j);
        double da = a[j] - (j ? a[j - 1] : 0.0), db = b[j] - (j ? b[j - 1] : 0.0);
        s += mid / h * (da * da + db * db);
    }
    for (std::size_t i = 0; i < N; ++i) {
        double rho = g.node(i);
        s += g.weight(i) * (nn / (rho * rho) * (a[i] * a[i] + b[i] * b[i]) + 4.0 * n_ * pot_.coupling[i] * a[i] * b[i] +
                            pot_.g1[i] * a[i] * a[i] + pot_.g2[i] * b[i] * b[i]);
    }
    return s;
}

void ModeOperator::apply(std::span<const double> a, std::span<const double> b, std::vector<double>& ya,
                         std::vector<double>& yb) const {
    const std::size_t m = size();
    ya.assign(m, 0.0);
    yb.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        ya[i] = aa[i] * a[i] + ab[i] * b[i];
        yb[i] = ab[i] * a[i] + bb[i] * b[i];
        if (i > 0) {
            ya[i] -= link[i - 1] * a[i - 1];
            yb[i] -= link[i - 1] * b[i - 1];
        }
        if (i + 1 < m) {
            ya[i] -= link[i] * a[i + 1];
            yb[i] -= link[i] * b[i + 1];
        }
    }
}

double ModeOperator::matrix_form(std::span<const double> a, std::span<const double> b) const {
    if (a.size() != size() || b.size() != size())
        throw ValidationError("ModeOperator::matrix_form: size mismatch");
    std::vector<double> ya, yb;
    apply(a, b, ya, yb);
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        s += a[i] * ya[i] + b[i] * yb[i];
    return s;
}

SymTridiag ModeOperator::a_block() const {
    SymTridiag t(size());
    t.diag = aa;
    for (std::size_t i = 0; i < link.size(); ++i)
        t.off[i] = -link[i];
    return t;
}

SymTridiag ModeOperator::b_block() const {
    SymTridiag t(size());
    t.diag = bb;
    for (std::size_t i = 0; i < link.size(); ++i)
        t.off[i] = -link[i];
    return t;
}

std::vector<double> ModeOperator::dense() const {
    const std::size_t m = size(), d = 2 * m;
    std::vector<double> M(d * d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        M[(2 * i) * d + 2 * i] = aa[i];
        M[(2 * i + 1) * d + 2 * i + 1] = bb[i];
        M[(2 * i) * d + 2 * i + 1] = ab[i];
        M[(2 * i + 1) * d + 2 * i] = ab[i];
        if (i + 1 < m)
            for (std::size_t k = 0; k < 2; ++k) {
                M[(2 * i + k) * d + 2 * (i + 1) + k] = -link[i];
                M[(2 * (i + 1) + k) * d + 2 * i + k] = -link[i];
            }
    }
    return M;
}

std::size_t ModeOperator::count_below(double shift) const {
    // Block LDL^T of M - shift W; Sylvester's law counts the negative eigenvalues of the pivots.
    std::size_t neg = 0;
    double p0 = 0.0, q0 = 0.0, t0 = 0.0; // inverse of the previous pivot block
    for (std::size_t i = 0; i < size(); ++i) {
        double p = aa[i] - shift * mass[i], q = ab[i], t = bb[i] - shift * mass[i];
        if (i > 0) {
            double l2 = link[i - 1] * link[i - 1];
            p -= l2 * p0;
            q -= l2 * q0;
            t -= l2 * t0;
        }
        double det = p * t - q * q;
        if (det == 0.0)
            det = std::numeric_limits<double>::min() * (std::abs(p) + std::abs(t) + 1.0);
        if (det < 0.0)
            neg += 1;
        else if (p < 0.0 || (p == 0.0 && t < 0.0))
            neg += 2;
        p0 = t / det;
        q0 = -q / det;
        t0 = p / det;
    }
    return neg;
}

double ModeOperator::gershgorin_low() const {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) {
        double off = std::abs(ab[i]) / mass[i];
        if (i > 0)
            off += link[i - 1] / std::sqrt(mass[i] * mass[i - 1]);
        if (i + 1 < size())
            off += link[i] / std::sqrt(mass[i] * mass[i + 1]);
        lo = std::min({lo, aa[i] / mass[i] - off, bb[i] / mass[i] - off});
    }
    return lo;
}

double ModeOperator::gershgorin_high() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) {
        double off = std::abs(ab[i]) / mass[i];
        if (i > 0)
            off += link[i - 1] / std::sqrt(mass[i] * mass[i - 1]);
        if (i + 1 < size())
            off += link[i] / std::sqrt(mass[i] * mass[i + 1]);
        hi = std::max({hi, aa[i] / mass[i] + off, bb[i] / mass[i] + off});
    }
    return hi;
}

namespace {

// k-th smallest eigenvalue (0-based) from inertia counts.
template <class Count>
double bisect(Count count, std::size_t k, double lo, double hi) {
    for (int it = 0; it < 400; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (count(mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double pencil_residual(const ModeOperator& op, const EigenPair& e) {
    std::vector<double> ya, yb;
    op.apply(e.a, e.b, ya, yb);
    double num = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) {
        double ra = ya[i] - e.value * op.mass[i] * e.a[i];
        double rb = yb[i] - e.value * op.mass[i] * e.b[i];
        num += (ra * ra + rb * rb) / op.mass[i];
    }
    double den = w_dot(op.mass, e.a, e.b, e.a, e.b);
    return std::sqrt(num / den);
}

void normalize(const ModeOperator& op, EigenPair& e) {
    double nrm = std::sqrt(w_dot(op.mass, e.a, e.b, e.a, e.b));
    for (auto& v : e.a)
        v /= nrm;
    for (auto& v : e.b)
        v /= nrm;
}

} // namespace

std::vector<EigenPair> min_eigenpairs_dense(const ModeOperator& op, int count) {
    const std::size_t m = op.size(), d = 2 * m;
    auto M = op.dense();
    Eigen::MatrixXd S(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            S(i, j) = M[i * d + j] / std::sqrt(op.mass[i / 2] * op.mass[j / 2]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success)
        throw NumericalError("dense eigensolver failed");
    std::vector<EigenPair> out;
    for (int k = 0; k < count && std::size_t(k) < d; ++k) {
        EigenPair e;
        e.value = es.eigenvalues()(k);
        e.a.resize(m), e.b.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            e.a[i] = es.eigenvectors()(2 * i, k) / std::sqrt(op.mass[i]);
            e.b[i] = es.eigenvectors()(2 * i + 1, k) / std::sqrt(op.mass[i]);
        }
        normalize(op, e);
        e.residual = pencil_residual(op, e);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<EigenPair> min_eigenpairs(const ModeOperator& op, int count) {
    if (count < 1)
        throw ValidationError("min_eigenpairs: count must be >= 1");
    if (op.size() < kDenseBelow)
        return min_eigenpairs_dense(op, count);
    const std::size_t m = op.size();
    const double lo = op.gershgorin_low(), hi = op.gershgorin_high();
    const double scale = std::max(std::abs(lo), std::abs(hi));
    auto counter = [&](double s) { return op.count_below(s); };
    std::vector<EigenPair> out;
    for (int k = 0; k < count && std::size_t(k) < 2 * m; ++k) {
        EigenPair e;
        double lambda = bisect(counter, std::size_t(k), lo, hi);
        // Inverse iteration at the bisected value; nudge the shift if the factorization breaks down.
        double shift = lambda;
        BandMatrix lu(2 * m, 2, 2);
        for (int attempt = 0;; ++attempt) {
            lu = BandMatrix(2 * m, 2, 2);
            for (std::size_t i = 0; i < m; ++i) {
                lu.at(2 * i, 2 * i) = op.aa[i] - shift * op.mass[i];
                lu.at(2 * i + 1, 2 * i + 1) = op.bb[i] - shift * op.mass[i];
                lu.at(2 * i, 2 * i + 1) = lu.at(2 * i + 1, 2 * i) = op.ab[i];
                if (i + 1 < m)
                    for (std::size_t c = 0; c < 2; ++c)
                        lu.at(2 * i + c, 2 * i + 2 + c) = lu.at(2 * i + 2 + c, 2 * i + c) = -op.link[i];
            }
            if (lu.factorize())
                break;
            if (attempt == 5)
                throw NumericalError("inverse iteration: shifted factorization failed repeatedly");
            shift += 1e-13 * std::max(scale, 1.0) * (attempt + 1);
        }
        std::vector<double> v(2 * m);
        for (std::size_t i = 0; i < 2 * m; ++i)
            v[i] = 1.0 + 0.1 * std::sin(0.37 * double(i));
        e.a.resize(m), e.b.resize(m);
        for (int it = 0; it < 8; ++it) {
            std::vector<double> rhs(2 * m);
            for (std::size_t i = 0; i < m; ++i) {
                rhs[2 * i] = op.mass[i] * v[2 * i];
                rhs[2 * i + 1] = op.mass[i] * v[2 * i + 1];
            }
            v = lu.solve(rhs);
            for (std::size_t i = 0; i < m; ++i)
                e.a[i] = v[2 * i], e.b[i] = v[2 * i + 1];
            for (const auto& prev : out) { // deflate earlier pairs
                double p = w_dot(op.mass, e.a, e.b, prev.a, prev.b);
                for (std::size_t i = 0; i < m; ++i)
                    e.a[i] -= p * prev.a[i], e.b[i] -= p * prev.b[i];
            }
            normalize(op, e);
            e.value = op.matrix_form(e.a, e.b);
            e.residual = pencil_residual(op, e);
            for (std::size_t i = 0; i < m; ++i)
                v[2 * i] = e.a[i], v[2 * i + 1] = e.b[i];
            if (it >= 1 && e.residual <= 1e-10 * std::max(1.0, std::abs(e.value)))
                break;
        }
        if (!std::isfinite(e.value) || !(e.residual <= 1e-8))
            throw NumericalError("inverse iteration did not converge (residual " + std::to_string(e.residual) + ")");
        out.push_back(std::move(e));
    }
    return out;
}

double min_eigenvalue(const SymTridiag& m, std::span<const double> mass) {
    const std::size_t n = m.size();
    if (n == 0 || mass.size() != n)
        throw ValidationError("min_eigenvalue: size mismatch");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        if (i > 0)
            off += std::abs(m.off[i - 1]) / std::sqrt(mass[i] * mass[i - 1]);
        if (i + 1 < n)
            off += std::abs(m.off[i]) / std::sqrt(mass[i] * mass[i + 1]);
        lo = std::min(lo, m.diag[i] / mass[i] - off);
        hi = std::max(hi, m.diag[i] / mass[i] + off);
    }
    return bisect([&](double s) { return count_below(m, mass, s); }, 0, lo, hi);
}

double zero_mode_residual(const ModeOperator& mode1) {
    if (mode1.mode() != 1)
        throw ValidationError("zero_mode_residual needs the n = 1 operator");
    const auto& f = mode1.profile();
    const auto& g = *f.grid;
    std::vector<double> a(f.size()), b(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        a[i] = std::sin(f.values[i]) / g.node(i);
        b[i] = -mode1.potentials().fprime[i];
    }
    double nrm = w_dot(g.weights(), a, b, a, b);
    return std::abs(mode1.form(a, b)) / nrm;
}

double near_zero_window(double beta) { return std::min(1e-3, beta * beta); }

std::string verdict_name(Verdict v) {
    switch (v) {
    case Verdict::stable:
        return "stable";
    case Verdict::zero_mode_only:
        return "zero-mode-only";
    case Verdict::unstable:
        return "unstable";
    }
    return "unknown";
}

ModeSpectrum analyze_mode(const Profile& f, int n) {
    ModeOperator op(n, f);
    auto pairs = min_eigenpairs(op, 2);
    ModeSpectrum s;
    s.n = n;
    s.lambda_min = pairs[0].value;
    s.lambda_second = pairs.size() > 1 ? pairs[1].value : pairs[0].value;
    s.eig_residual = pairs[0].residual;
    if (pairs.size() > 1)
        s.eig_residual = std::max(s.eig_residual, pairs[1].residual);
    if (n == 0) {
        s.lambda_a = min_eigenvalue(op.a_block(), op.mass);
        s.lambda_b = min_eigenvalue(op.b_block(), op.mass);
        s.b_near_zero = std::abs(*s.lambda_b) <= near_zero_window(f.params.beta);
    }
    if (n == 1)
        s.zero_mode_residual = zero_mode_residual(op);
    s.lowest = std::move(pairs[0]);
    return s;
}

SpectrumSummary spectrum(const Profile& f, std::span<const int> modes) {
    if (modes.empty())
        throw ValidationError("spectrum: empty modes list");
    for (int n : modes)
        if (n < 0 || n > 8)
            throw ValidationError("spectrum: modes must lie in 0..8");
    std::vector<std::optional<ModeSpectrum>> res(modes.size());
    std::vector<std::string> err(modes.size());
    parallel_for(modes.size(), [&](std::size_t k) {
        try {
            res[k] = analyze_mode(f, modes[k]);
        } catch (const std::exception& e) {
            err[k] = e.what();
        }
    });
    SpectrumSummary out;
    const double window = near_zero_window(f.params.beta);
    out.lambda_min = std::numeric_limits<double>::infinity();
    int near_zero = 0;
    bool translation_seen = false;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (!res[k]) {
            out.errors.push_back(std::to_string(modes[k]) + ": " + err[k]);
            continue;
        }
        const auto& m = *res[k];
        out.lambda_min = std::min(out.lambda_min, m.lambda_min);
        for (double v : {m.lambda_min, m.lambda_second})
            if (std::abs(v) <= window)
                ++near_zero;
        if (m.n == 1 && std::abs(m.lambda_min) <= window)
            translation_seen = true;
        out.modes.push_back(m);
    }
    if (out.modes.empty())
        throw NumericalError("spectrum: every mode failed");
    if (out.lambda_min < kNegativeThreshold)
        out.verdict = Verdict::unstable;
    else if (near_zero > (translation_seen ? 1 : 0))
        out.verdict = Verdict::zero_mode_only;
    else
        out.verdict = Verdict::stable;
    return out;
}

double operator_identity_error(const Profile& f) {
    ModeOperator op(0, f);
    const auto& g = *f.grid;
    const auto& fp = op.potentials().fprime;
    const std::size_t m = op.size();
    std::vector<double> s(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        s[i] = std::sin(f.values[i]);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        // Row i of A^(0) with the boundary node's actual value.
        double as = op.aa[i] * s[i];
        if (i > 0)
            as -= op.link[i - 1] * s[i - 1];
        as -= (i + 1 < m ? op.link[i] : g.cell_mid(m) / g.cell_width(m)) * s[i + 1];
        double lhs = as / g.weight(i);
        double rhs = -2.0 * f.params.r * fp[i] * s[i];
        num += g.weight(i) * (lhs - rhs) * (lhs - rhs);
        den += g.weight(i) * rhs * rhs;
    }
    if (den == 0.0)
        throw NumericalError("operator_identity_error: vanishing reference");
    return std::sqrt(num / den);
}

FactorizedA0 factorized_a0(const Profile& f, const std::function<double(double)>& xi) {
    ModeOperator op(0, f);
    const auto& g = *f.grid;
    const auto& fp = op.potentials().fprime;
    const std::size_t m = op.size();
    const double r = f.params.r;
    std::vector<double> s(m), x(m), a(m), zero(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        s[i] = std::sin(f.values[i]);
        x[i] = xi(g.node(i));
        a[i] = s[i] * x[i];
    }
    FactorizedA0 out{};
    out.matrix_value = op.matrix_form(a, zero);
    auto A = op.a_block();
    auto As = A.apply(s);
    double disc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        disc += x[i] * x[i] * s[i] * As[i];
        if (i + 1 < m)
            disc += op.link[i] * s[i] * s[i + 1] * (x[i + 1] - x[i]) * (x[i + 1] - x[i]);
    }
    out.discrete_value = disc;
    // Independent quadrature: sin^2 at cell midpoints, derivative terms from the smooth profile.
    double cont = 0.0, xprev = xi(0.0), fprev = Profile::origin_value;
    for (std::size_t j = 0; j <= m; ++j) {
        double xj = j < m ? x[j] : 0.0;
        double fj = f.values[j];
        double h = g.cell_width(j), mid = g.cell_mid(j);
        double sm = std::sin(0.5 * (fj + fprev));
        double dx = (xj - xprev) / h;
        cont += mid * h * sm * sm * dx * dx;
        xprev = xj;
        fprev = fj;
    }
    for (std::size_t i = 0; i < m; ++i)
        cont += g.weight(i) * (-2.0 * r * s[i] * s[i] * fp[i] * x[i] * x[i]);
    out.continuous_value = cont;
    return out;
}

MonotonicityProbe mode_monotonicity_probe(const Profile& f, int k_max, int trials, std::uint64_t seed) {
    if (k_max < 2)
        throw ValidationError("mode_monotonicity_probe: k_max must be >= 2");
    if (trials < 1)
        throw ValidationError("mode_monotonicity_probe: trials must be >= 1");
    const auto& g = *f.grid;
    const std::size_t N = f.size();
    std::vector<ModeOperator> ops;
    for (int k = 1; k <= k_max; ++k)
        ops.emplace_back(k, f);
    const auto& coupling = ops[0].potentials().coupling;
    MonotonicityProbe out;
    out.pass = true;
    out.worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < N; ++i) {
        double v = std::abs(f.params.r * g.node(i) * std::sin(f.values[i]) - std::cos(f.values[i]));
        out.coefficient_max = std::max(out.coefficient_max, v);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        std::vector<double> a(N, 0.0), b(N, 0.0);
        for (std::size_t i = 0; i + 1 < N; ++i) {
            a[i] = normal(rng);
            // Every other trial aligns b with a, the sign the coupling penalizes near the origin.
            b[i] = (t % 2) ? a[i] : normal(rng);
        }
        double nrm = w_dot(g.weights(), a, b, a, b);
        std::vector<double> forms;
        for (const auto& op : ops)
            forms.push_back(op.form(a, b));
        for (int k = 1; k < k_max; ++k) {
            double diff = forms[k] - forms[k - 1];
            double explicit_diff = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                double rho = g.node(i);
                explicit_diff += g.weight(i) * ((2.0 * k + 1.0) * (a[i] * a[i] + b[i] * b[i]) / (rho * rho) +
                                                4.0 * coupling[i] * a[i] * b[i]);
            }
            if (k == 1) // mode 1 leaves the origin free, so mode 2 adds the first-cell gradient
                explicit_diff += g.cell_mid(0) / g.cell_width(0) * (a[0] * a[0] + b[0] * b[0]);
            double scale = std::max({std::abs(diff), std::abs(explicit_diff), 1e-300});
            out.difference_defect = std::max(out.difference_defect, std::abs(diff - explicit_diff) / scale);
            out.worst = std::min(out.worst, diff / nrm);
            if (diff < -1e-10 * nrm)
                out.pass = false;
        }
    }
    return out;
}

InstabilityDirection instability_direction(const Profile& f) {
    std::vector<std::optional<ModeSpectrum>> res(5);
    std::vector<std::string> err(5);
    parallel_for(5, [&](std::size_t n) {
        try {
            res[n] = analyze_mode(f, int(n));
        } catch (const std::exception& e) {
            err[n] = e.what();
        }
    });
    InstabilityDirection out;
    out.pair.value = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int n = 0; n < 5; ++n) {
        if (!res[n])
            continue;
        any = true;
        if (res[n]->lambda_min < out.pair.value) {
            out.mode = n;
            out.pair = res[n]->lowest;
        }
    }
    if (!any)
        throw NumericalError("instability_direction: every mode failed (" + err[0] + ")");
    if (!(out.pair.value < kNegativeThreshold))
        throw NumericalError("numerically stable at this resolution (lowest eigenvalue " +
                             std::to_string(out.pair.value) + " in mode " + std::to_string(out.mode) + ")");
    ModeOperator op(out.mode, f);
    out.form_value = op.matrix_form(out.pair.a, out.pair.b);
    return out;
}

double splitting_potential(double rho, double r) {
    double d = rho * rho + 4.0 * r * r;
    return -32.0 * r * r / (d * d);
}

LinearizedOperator::LinearizedOperator(GridPtr grid, const RadialFunction& xi_fn, double beta_, double r_)
    : beta(beta_), r(r_), grid_(std::move(grid)) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ValidationError("LinearizedOperator: beta must be > 0");
    if (!(r > 0.0) || !std::isfinite(r))
        throw ValidationError("LinearizedOperator: r must be > 0");
    const auto& g = *grid_;
    const std::size_t N = g.size(), m = N - 1;
    xi.resize(N), xi_bar.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        xi[i] = xi_fn(g.node(i));
        if (!std::isfinite(xi[i]))
            throw ValidationError("LinearizedOperator: xi not finite");
        xi_bar[i] = xi[i] + 4.0 * r / std::sqrt(g.node(i) * g.node(i) + 4.0 * r * r);
    }
    double xn = x_norm(g, xi);
    if (xn > 0.5)
        throw ValidationError("LinearizedOperator: ||xi||_X = " + std::to_string(xn) + " exceeds 0.5");
    matrix = SymTridiag(m);
    mass.assign(g.weights().begin(), g.weights().begin() + m);
    for (std::size_t j = 0; j < N; ++j) {
        double h = g.cell_width(j), mid = g.cell_mid(j);
        double q = std::cos(theta(mid, r)) / mid;
        double alpha = 1.0 / h + 0.5 * q, gamma = -1.0 / h + 0.5 * q;
        double c = mid * h;
        // (F u) on cell j = alpha u_j + gamma u_{j-1}; u_{-1} = u_{N-1} = 0.
        if (j < m)
            matrix.diag[j] += c * alpha * alpha;
        if (j > 0)
            matrix.diag[j - 1] += c * gamma * gamma;
        if (j > 0 && j < m)
            matrix.off[j - 1] += c * alpha * gamma;
    }
    for (std::size_t i = 0; i < m; ++i)
        matrix.diag[i] += mass[i] * (0.5 * xi_bar[i] * xi_bar[i] + beta * beta);
}

double LinearizedOperator::smallest_ritz() const { return min_eigenvalue(matrix, mass); }

std::vector<double> LinearizedOperator::solve(std::span<const double> source) const {
    const std::size_t N = grid_->size(), m = N - 1;
    if (source.size() != N)
        throw ValidationError("LinearizedOperator::solve: source must cover every node");
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i)
        rhs[i] = mass[i] * source[i];
    auto u = solve_tridiagonal(matrix, rhs);
    u.push_back(0.0);
    return u;
}

double LinearizedOperator::splitting_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid_->size(); ++i) {
        double rho = grid_->node(i), th = theta(rho, r);
        // F*F = -d^2 - (1/rho) d + (cos^2 theta - rho (cos theta)')/rho^2
        double coef = std::cos(th) * std::cos(th) / (rho * rho) + std::sin(th) * theta_prime(rho, r) / rho;
        double split = 1.0 / (rho * rho) + splitting_potential(rho, r);
        worst = std::max(worst, std::abs(coef - split) * rho * rho);
    }
    return worst;
}

ResolventResult resolvent_probe(double r, const RadialFunction& xi, std::span<const double> betas, double s,
                                const std::vector<RadialFunction>& sources, int grid_points) {
    if (betas.size() < 2)
        throw ValidationError("resolvent_probe: need at least two betas");
    for (std::size_t k = 0; k < betas.size(); ++k) {
        if (!(betas[k] > 0.0 && betas[k] <= 0.5))
            throw ValidationError("resolvent_probe: betas must lie in (0, 0.5]");
        if (k && !(betas[k] < betas[k - 1]))
            throw ValidationError("resolvent_probe: betas must be strictly descending");
    }
    if (!(s >= 0.0 && s <= 1.0))
        throw ValidationError("resolvent_probe: s must lie in [0, 1]");
    if (sources.empty())
        throw ValidationError("resolvent_probe: no sources");
    ResolventResult out;
    out.samples.resize(betas.size());
    parallel_for(betas.size(), [&](std::size_t k) {
        double beta = betas[k];
        auto grid = make_grid(beta, grid_points, r);
        LinearizedOperator op(grid, xi, beta, r);
        ResolventSample smp{beta, 0.0, {}, {}, op.smallest_ritz()};
        for (const auto& src : sources) {
            std::vector<double> gvals(grid->size());
            double nrm = 0.0;
            for (std::size_t i = 0; i < grid->size(); ++i) {
                double rho = grid->node(i);
                gvals[i] = src(rho);
                double weighted = std::pow(rho, s) * gvals[i];
                nrm += grid->weight(i) * weighted * weighted;
            }
            if (!(nrm > 0.0) || !std::isfinite(nrm))
                throw ValidationError("resolvent_probe: source has zero or infinite weighted norm");
            auto u = op.solve(gvals);
            double un = x_norm(*grid, std::span(u));
            double ratio = un / std::sqrt(nrm);
            smp.solution_norms.push_back(un);
            smp.ratios.push_back(ratio);
            smp.max_ratio = std::max(smp.max_ratio, ratio);
        }
        out.samples[k] = std::move(smp);
    });
    std::vector<double> x, y;
    for (const auto& smp : out.samples) {
        x.push_back(std::log(1.0 / smp.beta));
        y.push_back(std::log(smp.max_ratio));
    }
    out.fit = fit_line(x, y);
    return out;
}

} // namespace skyrmion
