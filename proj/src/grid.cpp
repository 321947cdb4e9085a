#include "nemthsim/grid.hpp"

namespace nemthsim {

Grid build_grid(const std::array<double, 3>& extent, const std::array<int, 3>& resolution,
                int dims, BcMode bc, Layout layout) {
    if (dims != 2 && dims != 3) throw std::invalid_argument("build_grid: dims must be 2 or 3");
    Grid g;
    g.dims = dims;
    g.bc = bc;
    g.layout = layout;
    for (int a = 0; a < 3; ++a) {
        if (a < dims) {
            if (extent[a] <= 0.0) throw std::invalid_argument("build_grid: extent must be positive");
            if (resolution[a] < 4) throw std::invalid_argument("build_grid: resolution must be >= 4 per axis");
            g.extent[a] = extent[a];
            g.res[a] = resolution[a];
        } else {
            g.extent[a] = 1.0;
            g.res[a] = 1;
        }
        g.h[a] = g.extent[a] / g.res[a];
    }
    return g;
}

} // namespace nemthsim
