#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ignition/numerics.hpp"

namespace ignition {

/// Uniform window x_i = (first_index + i) h on the global lattice hZ.
/// Keeping the window on a fixed lattice makes recentring exact.
struct Grid1D {
    std::int64_t first_index = 0;
    double spacing = 0.05;
    std::size_t count = 0;

    /// Window of the given width whose center lies within h/2 of `center`.
    static Grid1D centered(double center, double width, double h);

    double left_edge() const { return static_cast<double>(first_index) * spacing; }
    double right_edge() const { return x(count - 1); }
    double x(std::size_t i) const {
        return static_cast<double>(first_index + static_cast<std::int64_t>(i)) * spacing;
    }
    double center() const { return 0.5 * (left_edge() + right_edge()); }

    /// Throws PreconditionError unless spacing > 0 and count >= 16.
    void validate() const;

    bool operator==(const Grid1D&) const = default;
};

/// Sampled solution u(t, .) on a window.
struct Field {
    Grid1D grid;
    std::vector<double> values;
    double time = 0.0;

    static Field sample(const Grid1D& grid, const std::function<double(double)>& u0, double time = 0.0);

    numerics::UniformSamples samples() const { return {grid.left_edge(), grid.spacing, values}; }
    /// Four-point cubic interpolation with the edge values continued outside.
    double at(double x) const { return numerics::cubic_lagrange(samples(), x); }
    /// Monotone cubic interpolation with the edge values continued outside.
    double at_monotone(double x) const { return numerics::monotone_cubic(samples(), x); }
};

}  // namespace ignition
