#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace nemthsim {

enum class BcMode { walls, periodic };

/// Velocity layout. Scalars, directors and pressure always live at cell
/// centers; the flag only selects where velocity components are stored.
enum class Layout { collocated, staggered };

/// Uniform rectangular box, cell-centered, 2-D or 3-D. Internally every grid
/// is treated as 3-D with res[2] = 1 in 2-D; difference stencils along a
/// degenerate axis vanish identically, so the same loops serve both cases.
struct Grid {
    int dims = 2;
    std::array<double, 3> extent{1.0, 1.0, 1.0};
    std::array<int, 3> res{1, 1, 1};
    std::array<double, 3> h{1.0, 1.0, 1.0};
    BcMode bc = BcMode::periodic;
    Layout layout = Layout::collocated;

    std::size_t cells() const {
        return std::size_t(res[0]) * std::size_t(res[1]) * std::size_t(res[2]);
    }
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dims; ++a) v *= h[a];
        return v;
    }
    double volume() const {
        double v = 1.0;
        for (int a = 0; a < dims; ++a) v *= extent[a];
        return v;
    }

    // Flat index, x fastest.
    std::size_t idx(int x, int y, int z = 0) const {
        return std::size_t(x) + std::size_t(res[0]) * (std::size_t(y) + std::size_t(res[1]) * std::size_t(z));
    }
    /// Center of cell (x, y, z): (i + 1/2) h per axis.
    double center(int axis, int i) const { return (i + 0.5) * h[axis]; }

    /// Number of stored faces along `axis` for a staggered component.
    /// Walls keep both boundary faces; periodic identifies them.
    int face_count(int axis) const {
        return bc == BcMode::walls ? res[axis] + 1 : res[axis];
    }
    /// Coordinate of face i along `axis` (face i sits at i*h).
    double face_coord(int axis, int i) const { return i * h[axis]; }

    bool same_shape(const Grid& o) const {
        return dims == o.dims && res == o.res && extent == o.extent &&
               bc == o.bc && layout == o.layout;
    }
};

/// Validated construction; extents must be positive and every axis needs at
/// least 4 cells so that second-order interior stencils exist.
Grid build_grid(const std::array<double, 3>& extent, const std::array<int, 3>& resolution,
                int dims, BcMode bc, Layout layout = Layout::collocated);

inline Grid build_grid_2d(double ex, double ey, int nx, int ny, BcMode bc,
                          Layout layout = Layout::collocated) {
    return build_grid({ex, ey, 1.0}, {nx, ny, 1}, 2, bc, layout);
}
inline Grid build_grid_3d(double ex, double ey, double ez, int nx, int ny, int nz, BcMode bc,
                          Layout layout = Layout::collocated) {
    return build_grid({ex, ey, ez}, {nx, ny, nz}, 3, bc, layout);
}

} // namespace nemthsim
