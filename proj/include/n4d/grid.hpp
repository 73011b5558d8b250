#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace n4d {

// Uniform interior lattice of the hypercube [-b,b]^4.  Lattice indices are
// 1-based (p = 1..n) as in the usual finite difference notation; flat storage
// is 0-based with p running fastest, then i, k, l.
struct GridSpec {
    int n = 0;
    double b = 1.0;

    GridSpec() = default;
    GridSpec(int n_, double b_) : n(n_), b(b_) {
        if (n < 1) throw std::invalid_argument("GridSpec: n must be positive");
        if (!(b > 0.0)) throw std::invalid_argument("GridSpec: b must be positive");
    }

    double h() const { return 2.0 * b / (n + 1); }
    double x(int p) const { return -b + p * h(); }
    std::size_t size() const {
        std::size_t s = static_cast<std::size_t>(n);
        return s * s * s * s;
    }
    std::size_t flat(int p, int i, int k, int l) const {
        std::size_t s = static_cast<std::size_t>(n);
        return static_cast<std::size_t>(p - 1) + s * (i - 1) + s * s * (k - 1) + s * s * s * (l - 1);
    }
    std::array<int, 4> unflat(std::size_t mu) const {
        std::array<int, 4> q{};
        for (int a = 0; a < 4; ++a) {
            q[a] = static_cast<int>(mu % n) + 1;
            mu /= n;
        }
        return q;
    }
    std::size_t stride(int axis) const {
        std::size_t s = 1;
        for (int a = 0; a < axis; ++a) s *= n;
        return s;
    }
};

using GridFunction = std::vector<double>;

}  // namespace n4d
