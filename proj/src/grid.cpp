#include "sequest/grid.hpp"

#include <cmath>

namespace sequest {

void GridAxis::validate() const {
    if (!(lo < hi)) throw DomainError("grid axis: lower bound must be below upper bound");
    if (count < 2) throw DomainError("grid axis: need at least two nodes");
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("grid axis: bounds must be finite");
}

void GridSpec::validate() const {
    if (axes.empty() || axes.size() > 2) throw DomainError("grid: only 1-D and 2-D grids are supported");
    for (const auto& a : axes) a.validate();
}

GridFunction::GridFunction(GridSpec g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) throw DomainError("grid function: value count does not match grid size");
}

double interpolate(const GridFunction& f, double x) {
    const auto& ax = f.grid.axes[0];
    const auto [k, a] = ax.locate(x);
    return (1.0 - a) * f.values[static_cast<std::size_t>(k)] +
           a * f.values[static_cast<std::size_t>(k) + 1];
}

double interpolate(const GridFunction& f, double x, double y) {
    const auto& ax = f.grid.axes[0];
    const auto& ay = f.grid.axes[1];
    const auto [kx, a] = ax.locate(x);
    const auto [ky, b] = ay.locate(y);
    const std::size_t n1 = static_cast<std::size_t>(ay.count);
    const std::size_t base = static_cast<std::size_t>(kx) * n1 + static_cast<std::size_t>(ky);
    const double f00 = f.values[base];
    const double f01 = f.values[base + 1];
    const double f10 = f.values[base + n1];
    const double f11 = f.values[base + n1 + 1];
    return (1.0 - a) * ((1.0 - b) * f00 + b * f01) + a * ((1.0 - b) * f10 + b * f11);
}

double interpolate(const GridFunction& f, std::span<const double> point) {
    if (f.grid.dim() == 1) return interpolate(f, point[0]);
    return interpolate(f, point[0], point[1]);
}

std::vector<double> trapezoid_weights(const GridAxis& axis) {
    std::vector<double> w(static_cast<std::size_t>(axis.count), axis.step());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

double integrate(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size())
        throw DomainError("quadrature: integrand and weights must be aligned");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * weights[i];
    return s;
}

double normalize_density(std::span<double> density, std::span<const double> weights) {
    const double mass = integrate(density, weights);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw DegenerateDensityError("density has nonpositive or non-finite mass on the grid");
    const double inv = 1.0 / mass;
    for (auto& d : density) d *= inv;
    return mass;
}

double integrate_against_density(std::span<const double> values, std::span<const double> density,
                                 std::span<const double> weights) {
    const double mass = integrate(density, weights);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw DegenerateDensityError("density has nonpositive or non-finite mass on the grid");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * density[i] * weights[i];
    return s / mass;
}

}  // namespace sequest
