#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hedgehog {

/// Composite Simpson rule with n uniform panels on [a, b]. n must be even
/// and at least 2. Degree-3 exactness, O(1/n^4) error on smooth integrands.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("simpson: panel count must be even and >= 2");
    const double dx = (b - a) / n;
    double odd = 0.0, even = 0.0;
    for (int i = 1; i < n; i += 2) odd += f(a + i * dx);
    for (int i = 2; i < n; i += 2) even += f(a + i * dx);
    return dx / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

/// Simpson value together with a two-resolution error estimate
/// |I_2n - I_n| / 15 (the leading-order Richardson error of I_2n).
struct QuadResult {
    double value = 0.0;  ///< I_2n (the finer rule)
    double error = 0.0;
};

template <class F>
QuadResult simpson_with_error(F&& f, double a, double b, int n) {
    const double coarse = simpson(f, a, b, n);
    const double fine = simpson(f, a, b, 2 * n);
    return {fine, std::abs(fine - coarse) / 15.0};
}

/// Composite Simpson on tabulated samples over a uniform grid. Handles an
/// odd panel count by finishing with the 3/8 rule on the last three panels.
inline double simpson_tabulated(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 3)
        throw std::invalid_argument("simpson_tabulated: need matching arrays with >= 3 samples");
    const std::size_t panels = n - 1;
    const double dx = (x.back() - x.front()) / static_cast<double>(panels);
    if (std::abs(x[1] - x[0] - dx) > 1e-9 * (std::abs(dx) + 1.0))
        throw std::invalid_argument("simpson_tabulated: grid must be uniform");
    std::size_t stop = panels;  // first sample index not covered by paired panels
    double tail = 0.0;
    if (panels % 2 != 0) {
        if (panels < 3)
            throw std::invalid_argument("simpson_tabulated: cannot place a 3/8 closure on < 3 panels");
        stop = panels - 3;
        tail = 3.0 * dx / 8.0 * (y[stop] + 3.0 * y[stop + 1] + 3.0 * y[stop + 2] + y[stop + 3]);
    }
    double s = 0.0;
    for (std::size_t i = 0; i + 2 <= stop; i += 2)
        s += dx / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
    return s + tail;
}

}  // namespace hedgehog
