#include "n4d/oscillator.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace n4d {

OscillatorSpec OscillatorSpec::from_omega2_half(double omega2_half, double b, int levels) {
    if (!(omega2_half > 0.0)) throw std::invalid_argument("oscillator: omega^2/2 must be positive");
    OscillatorSpec s;
    s.omega = std::sqrt(2.0 * omega2_half);
    s.b = b;
    s.n_levels = levels;
    return s;
}

long double kummer_M(long double a, long double b, long double z, const KummerOptions& opt) {
    if (b <= 0 && std::floor(b) == b) throw std::domain_error("kummer_M: b is a nonpositive integer");
    long double term = 1.0L, sum = 1.0L;
    int small = 0;
    for (int k = 0; k < opt.max_terms; ++k) {
        term *= (a + k) / (b + k) * z / (k + 1);
        sum += term;
        if (std::fabs(term) < opt.tol * std::fabs(sum)) {
            if (++small == 3) return sum;
        } else {
            small = 0;
        }
    }
    std::ostringstream os;
    os << "kummer_M: no convergence after " << opt.max_terms << " terms (a=" << static_cast<double>(a)
       << ", b=" << static_cast<double>(b) << ", z=" << static_cast<double>(z)
       << ", last term=" << static_cast<double>(term) << ")";
    throw std::runtime_error(os.str());
}

long double level_condition(long double nu, int parity, const OscillatorSpec& spec) {
    const long double z = static_cast<long double>(spec.omega) * spec.b * spec.b / 2.0L;
    if (parity > 0) return kummer_M(-nu / 2.0L, 0.5L, z);
    return kummer_M(0.5L - nu / 2.0L, 1.5L, z);
}

namespace {

std::vector<long double> roots_of(int parity, int count, const OscillatorSpec& spec) {
    std::vector<long double> out;
    if (count <= 0) return out;
    const long double step = 0.25L;
    // the confined levels exceed the free ones, which grow by 2 per parity
    // class; the quadratic box asymptotics bound them from above
    const long double pi = 3.14159265358979323846264338327950288L;
    const long double top = 2.0L * count + 4.0L +
                            pi * pi * (2.0L * count + 2.0L) * (2.0L * count + 2.0L) /
                                (4.0L * spec.b * spec.b * spec.omega);
    long double lo = -0.5L, flo = level_condition(lo, parity, spec);
    while (static_cast<int>(out.size()) < count) {
        long double hi = lo + step;
        if (hi > top) {
            std::ostringstream os;
            os << "find_levels: bracketing range exhausted before level with parity "
               << (parity > 0 ? "even" : "odd") << " number " << out.size();
            throw std::runtime_error(os.str());
        }
        long double fhi = level_condition(hi, parity, spec);
        if (flo == 0.0L) {
            out.push_back(lo);
        } else if ((flo < 0) != (fhi < 0)) {
            long double a = lo, b = hi, fa = flo;
            for (int it = 0; it < 200 && b - a > 0; ++it) {
                long double c = 0.5L * (a + b);
                if (c <= a || c >= b) break;
                long double fc = level_condition(c, parity, spec);
                if (fc == 0.0L) {
                    a = b = c;
                    break;
                }
                if ((fa < 0) == (fc < 0)) {
                    a = c;
                    fa = fc;
                } else {
                    b = c;
                }
            }
            out.push_back(0.5L * (a + b));
        }
        lo = hi;
        flo = fhi;
    }
    return out;
}

}  // namespace

OscillatorBasis find_levels(const OscillatorSpec& spec) {
    if (spec.n_levels < 1) throw std::invalid_argument("find_levels: need at least one level");
    if (!(spec.omega > 0.0) || !(spec.b > 0.0)) throw std::invalid_argument("find_levels: omega and b must be positive");
    const int m = spec.n_levels;
    auto even = roots_of(+1, (m + 1) / 2, spec);
    auto odd = roots_of(-1, m / 2, spec);
    OscillatorBasis basis;
    basis.spec = spec;
    for (int i = 0; i < m; ++i) {
        basis.nu.push_back(i % 2 == 0 ? even[i / 2] : odd[i / 2]);
        basis.parity.push_back(i % 2 == 0 ? 1 : -1);
    }
    for (int i = 1; i < m; ++i)
        if (!(basis.nu[i] > basis.nu[i - 1]))
            throw std::runtime_error("find_levels: level parameters not interleaved by parity");
    return basis;
}

long double oscillator_wavefunction(long double nu, int parity, double omega, long double x) {
    const long double w = omega;
    const long double g = std::exp(-w * x * x / 4.0L);
    const long double z = w * x * x / 2.0L;
    if (parity > 0) return g * kummer_M(-nu / 2.0L, 0.5L, z);
    return std::sqrt(w) * x * g * kummer_M(0.5L - nu / 2.0L, 1.5L, z);
}

void sample_wavefunctions(OscillatorBasis& basis, const GridSpec& grid) {
    const int n = grid.n, m = basis.m();
    basis.grid = grid;
    basis.phi.resize(n, m);
    basis.norms.assign(m, 0.0);
    for (int lv = 0; lv < m; ++lv) {
        std::vector<long double> v(n);
        // evaluate on the left half and mirror, so parity holds bit for bit
        for (int p = 1; p <= n; ++p) {
            int q = n + 1 - p;
            if (q < p) {
                v[p - 1] = basis.parity[lv] * v[q - 1];
                continue;
            }
            long double x = -static_cast<long double>(grid.b) + p * (2.0L * grid.b / (n + 1));
            if (q == p) x = 0.0L;
            v[p - 1] = oscillator_wavefunction(basis.nu[lv], basis.parity[lv], basis.spec.omega, x);
        }
        long double s = 0.0L;
        for (auto e : v) s += e * e;
        long double nr = std::sqrt(s);
        basis.norms[lv] = static_cast<double>(nr);
        for (int p = 0; p < n; ++p) basis.phi(p, lv) = static_cast<double>(v[p] / nr);
    }
}

OscillatorBasis make_basis(const OscillatorSpec& spec, const GridSpec& grid) {
    if (std::fabs(spec.b - grid.b) > 1e-14 * spec.b) throw std::invalid_argument("make_basis: box widths differ");
    auto basis = find_levels(spec);
    sample_wavefunctions(basis, grid);
    return basis;
}

double noninteracting_energy(const std::array<int, 4>& k, const OscillatorBasis& basis) {
    long double s = 2.0L;
    for (int a : k) {
        if (a < 0 || a >= basis.m()) throw std::out_of_range("noninteracting_energy: level index out of range");
        s += basis.nu[a];
    }
    return static_cast<double>(s);
}

void write_levels_csv(const OscillatorBasis& basis, std::ostream& os) {
    os << "index,parity,nu,E_over_omega\n";
    char buf[128];
    for (int i = 0; i < basis.m(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.12f,%.12f\n", i, basis.parity[i] > 0 ? "even" : "odd",
                      static_cast<double>(basis.nu[i]), static_cast<double>(basis.nu[i] + 0.5L));
        os << buf;
    }
}

}  // namespace n4d
