#include "n4d/kron.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace n4d {

int DirectPolyMatrix::max_power() const {
    int mp = 0;
    for (auto& t : terms_)
        for (int e : t.pow) mp = std::max(mp, e);
    return mp;
}

void DirectPolyMatrix::add_term(Rational z, std::array<int, 4> pow) {
    for (int e : pow)
        if (e < 0) throw std::invalid_argument("add_term: negative exponent");
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
        if (it->pow == pow) {
            it->z += z;
            if (it->z == Rational(0)) terms_.erase(it);
            return;
        }
    }
    if (z != Rational(0)) terms_.push_back({z, pow});
}

DirectPolyMatrix& DirectPolyMatrix::operator+=(const DirectPolyMatrix& o) {
    if (o.n_ != n_) throw std::invalid_argument("DirectPolyMatrix: size mismatch");
    for (auto& t : o.terms_) add_term(t.z, t.pow);
    return *this;
}

DirectPolyMatrix DirectPolyMatrix::scaled(Rational s) const {
    DirectPolyMatrix r(n_);
    for (auto& t : terms_) r.add_term(t.z * s, t.pow);
    return r;
}

DirectPolyMatrix operator+(DirectPolyMatrix a, const DirectPolyMatrix& b) {
    a += b;
    return a;
}

Eigen::MatrixXd build_A(int n) {
    if (n < 1) throw std::invalid_argument("build_A: n must be >= 1");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = 1.0;
    return a;
}

Eigen::MatrixXd build_Aprime(int n) {
    if (n < 2) throw std::invalid_argument("build_Aprime: n must be >= 2");
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 2 < n; ++i) a(i, i + 2) = a(i + 2, i) = 1.0;
    a(0, 0) = -1.0;
    a(n - 1, n - 1) -= 1.0;
    return a;
}

void apply_A_axis(const GridFunction& x, GridFunction& y, int n, int axis) {
    std::size_t st = 1;
    for (int a = 0; a < axis; ++a) st *= n;
    const std::size_t blk = st * n;
    const std::size_t total = x.size();
    y.assign(total, 0.0);
    for (std::size_t base = 0; base < total; base += blk) {
        const double* xb = x.data() + base;
        double* yb = y.data() + base;
        // y_j = x_{j-1} + x_{j+1} along the axis; inner loop over the faster indices
        for (int j = 0; j < n; ++j) {
            double* yr = yb + j * st;
            if (j > 0) {
                const double* xr = xb + (j - 1) * st;
                for (std::size_t s = 0; s < st; ++s) yr[s] += xr[s];
            }
            if (j + 1 < n) {
                const double* xr = xb + (j + 1) * st;
                for (std::size_t s = 0; s < st; ++s) yr[s] += xr[s];
            }
        }
    }
}

GridFunction DirectPolyMatrix::matvec(const GridFunction& f) const {
    if (f.size() != dim()) throw std::invalid_argument("matvec: size mismatch");
    GridFunction out(f.size(), 0.0);
    std::vector<int> idx(terms_.size());
    for (std::size_t t = 0; t < idx.size(); ++t) idx[t] = static_cast<int>(t);

    // Terms sharing the exponents of the slow axes reuse the partial products.
    std::function<void(int, const GridFunction&, std::vector<int>&)> rec =
        [&](int axis, const GridFunction& g, std::vector<int>& sel) {
            if (axis < 0) {
                double z = 0.0;
                for (int t : sel) z += terms_[t].value();
                if (z != 0.0)
                    for (std::size_t mu = 0; mu < out.size(); ++mu) out[mu] += z * g[mu];
                return;
            }
            int maxp = 0;
            for (int t : sel) maxp = std::max(maxp, terms_[t].pow[axis]);
            GridFunction cur = g, next;
            for (int p = 0; p <= maxp; ++p) {
                if (p > 0) {
                    apply_A_axis(cur, next, n_, axis);
                    cur.swap(next);
                }
                std::vector<int> sub;
                for (int t : sel)
                    if (terms_[t].pow[axis] == p) sub.push_back(t);
                if (!sub.empty()) rec(axis - 1, cur, sub);
            }
        };
    rec(3, f, idx);
    return out;
}

double DirectPolyMatrix::eigenvalue(const std::array<int, 4>& k) const {
    double s = 0.0;
    for (auto& t : terms_) {
        double v = t.value();
        for (int a = 0; a < 4; ++a) v *= std::pow(2.0 * std::cos(k[a] * std::numbers::pi / (n_ + 1)), t.pow[a]);
        s += v;
    }
    return s;
}

namespace {

// elementary symmetric polynomial of degree r in the four per-axis factors
DirectPolyMatrix elementary(int n, int r, Rational z) {
    DirectPolyMatrix m(n);
    for (int mask = 0; mask < 16; ++mask) {
        if (__builtin_popcount(mask) != r) continue;
        std::array<int, 4> p{};
        for (int a = 0; a < 4; ++a) p[a] = (mask >> a) & 1;
        m.add_term(z, p);
    }
    return m;
}

}  // namespace

DirectPolyMatrix build_Mi(int i, int n) {
    if (i < 1 || i > 4) throw std::invalid_argument("build_Mi: i must be in 1..4");
    if (n < 2) throw std::invalid_argument("build_Mi: n must be >= 2");
    static const int center[5] = {0, 8, 24, 32, 24};
    DirectPolyMatrix m = elementary(n, i, Rational(1));
    m.add_term(Rational(-center[i]), {0, 0, 0, 0});
    if (i == 4) {
        // sum of A' = A^2 - 2E over the four axes
        for (int a = 0; a < 4; ++a) {
            std::array<int, 4> p{};
            p[a] = 2;
            m.add_term(Rational(1), p);
        }
        m.add_term(Rational(-8), {0, 0, 0, 0});
    }
    return m;
}

DirectPolyMatrix build_lhs_bracket(int n, const StencilCoefficients& c) {
    DirectPolyMatrix m(n);
    const Rational w[4] = {c.alpha, c.beta, c.gamma, c.delta};
    for (int j = 0; j < 4; ++j)
        if (w[j] != Rational(0)) m += build_Mi(j + 1, n).scaled(w[j]);
    return m;
}

DirectPolyMatrix build_rhs(int n, const StencilCoefficients& c) {
    DirectPolyMatrix m(n);
    m.add_term(c.rhs_identity(), {0, 0, 0, 0});
    const Rational w[4] = {c.alpha_p, c.beta_p, c.gamma_p, c.delta_p};
    for (int j = 0; j < 4; ++j)
        if (w[j] != Rational(0)) m += build_Mi(j + 1, n).scaled(w[j]);
    return m;
}

DirectPolyMatrix build_M(int n) {
    return build_lhs_bracket(n, default_coefficients()).scaled(Rational(-1, 30));
}

DirectPolyMatrix build_N(int n, Rational gamma_p) {
    return build_rhs(n, solve_coefficient_systems(Rational(1), Rational(0), gamma_p));
}

namespace {

struct Entry {
    int r, c;
    double v;
};

std::vector<std::vector<Entry>> power_patterns(int n, int maxp) {
    std::vector<std::vector<Entry>> pats(maxp + 1);
    Eigen::MatrixXd a = build_A(n), p = Eigen::MatrixXd::Identity(n, n);
    for (int e = 0; e <= maxp; ++e) {
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                if (p(r, c) != 0.0) pats[e].push_back({r, c, p(r, c)});
        p = p * a;
    }
    return pats;
}

}  // namespace

double csr_assembly_estimate(const DirectPolyMatrix& m) {
    auto pats = power_patterns(m.n(), m.max_power());
    double trip = 0.0;
    for (auto& t : m.terms()) {
        double c = 1.0;
        for (int a = 0; a < 4; ++a) c *= static_cast<double>(pats[t.pow[a]].size());
        trip += c;
    }
    // triplets plus the compressed result (bounded by the triplet count)
    return trip * (sizeof(Eigen::Triplet<double, std::int64_t>) + 16.0);
}

SparseRM assemble_csr(const DirectPolyMatrix& m, const CsrOptions& opt) {
    const double est = csr_assembly_estimate(m);
    if (est > opt.budget_bytes) {
        std::ostringstream os;
        os << "assemble_csr: estimated " << est / (1024.0 * 1024.0) << " MiB exceeds budget of "
           << opt.budget_bytes / (1024.0 * 1024.0) << " MiB";
        throw std::runtime_error(os.str());
    }
    const int n = m.n();
    const std::int64_t N = static_cast<std::int64_t>(m.dim());
    const std::int64_t s1 = n, s2 = s1 * n, s3 = s2 * n;
    auto pats = power_patterns(n, m.max_power());
    std::vector<Eigen::Triplet<double, std::int64_t>> trip;
    for (auto& t : m.terms()) {
        const double z = t.value();
        for (auto& e3 : pats[t.pow[3]])
            for (auto& e2 : pats[t.pow[2]])
                for (auto& e1 : pats[t.pow[1]])
                    for (auto& e0 : pats[t.pow[0]]) {
                        std::int64_t r = e0.r + s1 * e1.r + s2 * e2.r + s3 * e3.r;
                        std::int64_t c = e0.c + s1 * e1.c + s2 * e2.c + s3 * e3.c;
                        trip.emplace_back(r, c, z * e0.v * e1.v * e2.v * e3.v);
                    }
    }
    SparseRM s(N, N);
    s.setFromTriplets(trip.begin(), trip.end());
    s.prune([](std::int64_t, std::int64_t, double v) { return v != 0.0; });
    s.makeCompressed();
    return s;
}

Eigen::MatrixXd assemble_dense(const DirectPolyMatrix& m) {
    return Eigen::MatrixXd(assemble_csr(m));
}

void dump_coordinate(const SparseRM& m, std::ostream& os) {
    char buf[96];
    for (std::int64_t r = 0; r < m.outerSize(); ++r)
        for (SparseRM::InnerIterator it(m, r); it; ++it) {
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row() + 1),
                          static_cast<long long>(it.col() + 1), it.value());
            os << buf;
        }
}

double NnzReport::memory_gib() const {
    return static_cast<double>(total()) * 16.0 / (1024.0 * 1024.0 * 1024.0);
}

NnzReport nnz_formulas(int n) {
    NnzReport r;
    r.n = n;
    const std::int64_t N = n, n1 = N - 1, n2 = N - 2, n4 = N * N * N * N;
    r.mi[0] = 8 * n1 * N * N * N + n4;
    r.mi[1] = 24 * n1 * n1 * N * N + n4;
    r.mi[2] = 32 * n1 * n1 * n1 * N + n4;
    r.mi[3] = 16 * n1 * n1 * n1 * n1 + 8 * n2 * N * N * N + n4;
    r.m = 8 * n1 * N * N * N + 24 * n1 * n1 * N * N + 32 * n1 * n1 * n1 * N + n4;
    r.nmat = r.m + 16 * n1 * n1 * n1 * n1 + 8 * n2 * N * N * N;
    r.lhs = r.nmat;
    return r;
}

NnzReport nnz_counted(int n, const CsrOptions& opt) {
    NnzReport r;
    r.n = n;
    for (int i = 1; i <= 4; ++i) r.mi[i - 1] = assemble_csr(build_Mi(i, n), opt).nonZeros();
    r.m = assemble_csr(build_M(n), opt).nonZeros();
    r.nmat = assemble_csr(build_N(n, default_gamma_prime()), opt).nonZeros();
    // the left-hand matrix adds a diagonal product to h^-2 M, pattern union with N
    auto lhs = build_M(n) + build_N(n, default_gamma_prime());
    r.lhs = assemble_csr(lhs, opt).nonZeros();
    return r;
}

double SpectralOracle::omega(int k) const { return 2.0 * std::cos(k * std::numbers::pi / (n_ + 1)); }

double SpectralOracle::mi(int i, const std::array<int, 4>& k) const {
    for (int a : k)
        if (a < 1 || a > n_) throw std::out_of_range("SpectralOracle: k out of range");
    double w[4];
    for (int a = 0; a < 4; ++a) w[a] = omega(k[a]);
    double e1 = 0, e2 = 0, e3 = 0, e4 = w[0] * w[1] * w[2] * w[3], sq = 0;
    for (int a = 0; a < 4; ++a) {
        e1 += w[a];
        sq += w[a] * w[a];
        for (int b = a + 1; b < 4; ++b) {
            e2 += w[a] * w[b];
            for (int c = b + 1; c < 4; ++c) e3 += w[a] * w[b] * w[c];
        }
    }
    switch (i) {
    case 1: return e1 - 8.0;
    case 2: return e2 - 24.0;
    case 3: return e3 - 32.0;
    case 4: return e4 + sq - 32.0;
    }
    throw std::invalid_argument("SpectralOracle::mi: i must be in 1..4");
}

double SpectralOracle::theta(const std::array<int, 4>& k) const {
    return -(12.0 * mi(1, k) + mi(2, k) + mi(3, k)) / 30.0;
}

double SpectralOracle::lambda(const std::array<int, 4>& k) const {
    const double g = to_double(gp_);
    return 1.0 + (12.0 * g - 1.0 / 30.0) * mi(1, k) + (1.0 / 36.0 - 4.0 * g) * mi(2, k) + g * mi(3, k) -
           mi(4, k) / 240.0;
}

double SpectralOracle::spectrum(Which w, const std::array<int, 4>& k) const {
    switch (w) {
    case Which::M1: return mi(1, k);
    case Which::M2: return mi(2, k);
    case Which::M3: return mi(3, k);
    case Which::M4: return mi(4, k);
    case Which::M: return theta(k);
    case Which::N: return lambda(k);
    case Which::Laplacian: return double(n_ + 1) * (n_ + 1) * theta(k) / lambda(k);
    }
    return 0.0;
}

double SpectralOracle::cos1() const { return std::cos(std::numbers::pi / (n_ + 1)); }

double SpectralOracle::theta_corner(int i) const {
    const double c = cos1(), c2 = c * c, c3 = c2 * c;
    switch (i) {
    case 1: return -16.0 / 15 * c3 - 4.0 / 5 * c2 - 16.0 / 5 * c + 76.0 / 15;
    case 2: return 8.0 / 15 * c3 - 8.0 / 5 * c + 76.0 / 15;
    case 3: return 4.0 / 15 * c2 + 76.0 / 15;
    case 4: return -8.0 / 15 * c3 + 8.0 / 5 * c + 76.0 / 15;
    case 5: return 16.0 / 15 * c3 - 4.0 / 5 * c2 + 16.0 / 5 * c + 76.0 / 15;
    }
    throw std::invalid_argument("theta_corner: i must be in 1..5");
}

double SpectralOracle::lambda_corner(int i) const {
    const double g = to_double(gp_);
    const double c = cos1(), c2 = c * c, c3 = c2 * c, c4 = c3 * c;
    const double k0 = 11.0 / 15 - 32 * g;
    switch (i) {
    case 1: return -c4 / 15 + 32 * g * c3 + (3.0 / 5 - 96 * g) * c2 + (96 * g - 4.0 / 15) * c + k0;
    case 2: return c4 / 15 - 16 * g * c3 - c2 / 15 + (48 * g - 2.0 / 15) * c + k0;
    case 3: return -c4 / 15 + (32 * g - 13.0 / 45) * c2 + k0;
    case 4: return c4 / 15 + 16 * g * c3 - c2 / 15 + (2.0 / 15 - 48 * g) * c + k0;
    case 5: return -c4 / 15 - 32 * g * c3 + (3.0 / 5 - 96 * g) * c2 + (4.0 / 15 - 96 * g) * c + k0;
    }
    throw std::invalid_argument("lambda_corner: i must be in 1..5");
}

double SpectralOracle::theta_min() const {
    double v = theta_corner(1);
    for (int i = 2; i <= 5; ++i) v = std::min(v, theta_corner(i));
    return v;
}
double SpectralOracle::theta_max() const {
    double v = theta_corner(1);
    for (int i = 2; i <= 5; ++i) v = std::max(v, theta_corner(i));
    return v;
}
double SpectralOracle::lambda_min() const {
    double v = lambda_corner(1);
    for (int i = 2; i <= 5; ++i) v = std::min(v, lambda_corner(i));
    return v;
}
double SpectralOracle::lambda_max() const {
    double v = lambda_corner(1);
    for (int i = 2; i <= 5; ++i) v = std::max(v, lambda_corner(i));
    return v;
}

double SpectralOracle::ground_state() const {
    return double(n_ + 1) * (n_ + 1) * theta_min() / lambda_max();
}

double ground_state_asymptotic_error(int n) {
    return 703.0 / 60480.0 * std::pow(std::numbers::pi, 6) / std::pow(double(n), 6);
}

}  // namespace n4d
