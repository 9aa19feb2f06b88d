#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "sequest/common.hpp"

namespace sequest {

/// Uniformly spaced axis [lo, hi] with count nodes.
struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    int count = 2;

    double step() const { return (hi - lo) / static_cast<double>(count - 1); }
    double node(int k) const { return lo + step() * static_cast<double>(k); }
    void validate() const;

    /// Fractional position of x, clamped into [0, count-1].
    /// Returns (index of the left node, weight of the right node).
    std::pair<int, double> locate(double x) const {
        double u = (x - lo) / step();
        if (!(u > 0.0)) return {0, 0.0};
        if (u >= static_cast<double>(count - 1)) return {count - 2, 1.0};
        int k = static_cast<int>(u);
        if (k > count - 2) k = count - 2;
        return {k, u - static_cast<double>(k)};
    }

    bool operator==(const GridAxis&) const = default;
};

/// 1-D or 2-D uniform grid. Node index is axis-0 major.
struct GridSpec {
    std::vector<GridAxis> axes;

    int dim() const { return static_cast<int>(axes.size()); }
    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= static_cast<std::size_t>(a.count);
        return n;
    }
    std::size_t flat_index(int i0, int i1 = 0) const {
        if (dim() == 1) return static_cast<std::size_t>(i0);
        return static_cast<std::size_t>(i0) * static_cast<std::size_t>(axes[1].count) +
               static_cast<std::size_t>(i1);
    }
    std::array<double, 2> point(std::size_t flat) const {
        if (dim() == 1) return {axes[0].node(static_cast<int>(flat)), 0.0};
        const auto n1 = static_cast<std::size_t>(axes[1].count);
        return {axes[0].node(static_cast<int>(flat / n1)),
                axes[1].node(static_cast<int>(flat % n1))};
    }
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

/// Real-valued function tabulated on a grid.
struct GridFunction {
    GridSpec grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(GridSpec g) : grid(std::move(g)), values(grid.size(), 0.0) {}
    GridFunction(GridSpec g, std::vector<double> v);
};

/// Clamped multilinear interpolation; exact at nodes and for affine functions.
double interpolate(const GridFunction& f, std::span<const double> point);
double interpolate(const GridFunction& f, double x);
double interpolate(const GridFunction& f, double x, double y);

/// Trapezoidal quadrature weights for one axis.
std::vector<double> trapezoid_weights(const GridAxis& axis);

double integrate(std::span<const double> values, std::span<const double> weights);

/// Scales density in place so that integrate(density, weights) == 1.
/// Returns the mass removed by the scaling; throws DegenerateDensityError if
/// the total mass is not strictly positive.
double normalize_density(std::span<double> density, std::span<const double> weights);

/// Integral of values against a density that is renormalized on the grid first.
double integrate_against_density(std::span<const double> values, std::span<const double> density,
                                 std::span<const double> weights);

}  // namespace sequest
