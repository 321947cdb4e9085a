#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nemthsim/grid.hpp"

namespace nemthsim {

/// One real value per cell, row-major with x fastest.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.cells(), fill) {}

    double& operator()(int x, int y, int z = 0) { return values[grid.idx(x, y, z)]; }
    double operator()(int x, int y, int z = 0) const { return values[grid.idx(x, y, z)]; }
    std::size_t size() const { return values.size(); }

    double min() const { return *std::min_element(values.begin(), values.end()); }
    double max() const { return *std::max_element(values.begin(), values.end()); }
};

/// dims vector components. Collocated components live at cell centers;
/// staggered (MAC) component a lives on a-faces, with both boundary faces
/// stored in walls mode.
struct VectorField {
    Grid grid;
    std::vector<double> comp[3];

    VectorField() = default;
    explicit VectorField(const Grid& g) : grid(g) {
        for (int a = 0; a < g.dims; ++a) comp[a].assign(component_size(g, a), 0.0);
    }

    static std::size_t component_size(const Grid& g, int a) {
        if (g.layout == Layout::collocated) return g.cells();
        std::size_t n = 1;
        for (int b = 0; b < 3; ++b) n *= std::size_t(b == a ? g.face_count(b) : g.res[b]);
        return n;
    }

    /// Flat index into component a; x/y/z count faces along axis a.
    std::size_t fidx(int a, int x, int y, int z = 0) const {
        int nx = (grid.layout == Layout::staggered && a == 0) ? grid.face_count(0) : grid.res[0];
        int ny = (grid.layout == Layout::staggered && a == 1) ? grid.face_count(1) : grid.res[1];
        return std::size_t(x) + std::size_t(nx) * (std::size_t(y) + std::size_t(ny) * std::size_t(z));
    }
    double& at(int a, int x, int y, int z = 0) { return comp[a][fidx(a, x, y, z)]; }
    double at(int a, int x, int y, int z = 0) const { return comp[a][fidx(a, x, y, z)]; }
};

/// Director: always three components in R^3, cell-centered, on 2-D or 3-D grids.
struct DirectorField {
    Grid grid;
    std::vector<double> comp[3];

    DirectorField() = default;
    explicit DirectorField(const Grid& g) : grid(g) {
        for (auto& c : comp) c.assign(g.cells(), 0.0);
    }

    double& at(int c, std::size_t i) { return comp[c][i]; }
    double at(int c, std::size_t i) const { return comp[c][i]; }

    double norm_at(std::size_t i) const {
        return std::sqrt(comp[0][i] * comp[0][i] + comp[1][i] * comp[1][i] + comp[2][i] * comp[2][i]);
    }
    double max_norm() const {
        double m = 0.0;
        for (std::size_t i = 0; i < comp[0].size(); ++i) m = std::max(m, norm_at(i));
        return m;
    }
    double min_comp3() const {
        return *std::min_element(comp[2].begin(), comp[2].end());
    }
};

/// Cell-centered rank-2 field with entries T(i,j), i the derivative axis
/// (< dims), j the field component (3 for director gradients, dims for
/// velocity gradients).
struct MatrixField {
    Grid grid;
    int rows = 0, cols = 0;
    std::vector<double> data; // data[(i*cols + j)*cells + cell]

    MatrixField() = default;
    MatrixField(const Grid& g, int r, int c)
        : grid(g), rows(r), cols(c), data(std::size_t(r) * c * g.cells(), 0.0) {}

    double& at(int i, int j, std::size_t cell) { return data[(std::size_t(i) * cols + j) * grid.cells() + cell]; }
    double at(int i, int j, std::size_t cell) const { return data[(std::size_t(i) * cols + j) * grid.cells() + cell]; }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

} // namespace nemthsim
