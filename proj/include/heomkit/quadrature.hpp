#ifndef HEOMKIT_QUADRATURE_HPP
#define HEOMKIT_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "heomkit/core.hpp"

namespace heomkit::quad
{

struct Options
{
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    std::size_t max_intervals = 20000;
    std::size_t initial_intervals = 1;
};

template <typename T>
struct Result
{
    T value{};
    double error = 0.0;
    std::size_t intervals = 0;
    bool converged = false;
};

namespace detail
{
// 7-point Gauss / 15-point Kronrod pair (QUADPACK tables).
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Segment
{
    double a, b;
    T value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename T, typename F>
Segment<T> kronrod15(F& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T kronrod = fc * wgk[7];
    T gauss = fc * wg[3];
    for(int j = 0; j < 7; ++j)
    {
        const double dx = h * xgk[j];
        const T sum = f(c - dx) + f(c + dx);
        kronrod += sum * wgk[j];
        if(j % 2 == 1) gauss += sum * wg[j / 2];
    }
    kronrod *= h;
    gauss *= h;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}
}  // namespace detail

// Globally adaptive Gauss-Kronrod integration of f over the given breakpoints
// (at least two, increasing). Each initial piece is further split into
// opts.initial_intervals equal parts before refinement starts.
template <typename T, typename F>
Result<T> integrate(F&& f, const std::vector<double>& breakpoints, const Options& opts = {})
{
    require(breakpoints.size() >= 2, "quadrature needs at least two breakpoints");
    std::priority_queue<detail::Segment<T>> heap;
    T total{};
    double err = 0.0;
    for(std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    {
        const double a = breakpoints[i], b = breakpoints[i + 1];
        require(b > a, "quadrature breakpoints must be strictly increasing");
        const std::size_t pieces = std::max<std::size_t>(1, opts.initial_intervals);
        for(std::size_t p = 0; p < pieces; ++p)
        {
            const double lo = a + (b - a) * double(p) / double(pieces);
            const double hi = (p + 1 == pieces) ? b : a + (b - a) * double(p + 1) / double(pieces);
            auto s = detail::kronrod15<T>(f, lo, hi);
            total += s.value;
            err += s.error;
            heap.push(s);
        }
    }

    auto tolerance = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
    while(err > tolerance() && heap.size() < opts.max_intervals)
    {
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if(!(mid > worst.a && mid < worst.b))
        {
            // interval cannot be split further in double precision
            heap.push(worst);
            break;
        }
        auto left = detail::kronrod15<T>(f, worst.a, mid);
        auto right = detail::kronrod15<T>(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // re-sum to shed accumulated rounding from the incremental updates
    Result<T> r;
    r.intervals = heap.size();
    r.value = T{};
    r.error = 0.0;
    while(!heap.empty())
    {
        r.value += heap.top().value;
        r.error += heap.top().error;
        heap.pop();
    }
    r.converged = r.error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(r.value));
    return r;
}

template <typename T, typename F>
Result<T> integrate(F&& f, double a, double b, const Options& opts = {})
{
    return integrate<T>(std::forward<F>(f), std::vector<double>{a, b}, opts);
}

// Throws not_converged carrying the error estimate when the tolerance was not met.
template <typename T>
T value_or_throw(const Result<T>& r, const char* what)
{
    if(!r.converged)
    {
        std::ostringstream os;
        os << what << ": quadrature did not converge (error estimate " << r.error << ", " << r.intervals
           << " intervals)";
        fail(ErrorCode::not_converged, os.str());
    }
    return r.value;
}

}  // namespace heomkit::quad

#endif
