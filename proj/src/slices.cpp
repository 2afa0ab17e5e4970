#include "ctvol/slices.hpp"

namespace ctvol {

std::vector<Image> extract_slices(const Volume3D& v, const Window& window) {
    if (!(window.lo < window.hi)) throw DegenerateWindow("extract_slices: window lo >= hi");
    v.validate();
    const double inv = 1.0 / (window.hi - window.lo);
    std::vector<Image> slices;
    slices.reserve(v.nz);
    for (int z = 0; z < v.nz; ++z) {
        Image img(v.ny, v.nx);
        for (int y = 0; y < v.ny; ++y)
            for (int x = 0; x < v.nx; ++x) {
                double t = (v.at(x, y, z) - window.lo) * inv;
                img.at(y, x) = static_cast<float>(t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t));
            }
        slices.push_back(std::move(img));
    }
    return slices;
}

std::vector<Image> extract_mask_slices(const Volume3D& v) {
    v.validate();
    std::vector<Image> slices;
    slices.reserve(v.nz);
    for (int z = 0; z < v.nz; ++z) {
        Image img(v.ny, v.nx);
        for (int y = 0; y < v.ny; ++y)
            for (int x = 0; x < v.nx; ++x) img.at(y, x) = v.at(x, y, z);
        slices.push_back(std::move(img));
    }
    return slices;
}

Volume3D stack_slices(const std::vector<Image>& slices, double dx, double dy, double dz,
                      VolumeIntent intent) {
    if (slices.empty()) throw EmptyInput("stack_slices: no slices");
    Volume3D v;
    v.nx = slices[0].w;
    v.ny = slices[0].h;
    v.nz = static_cast<int>(slices.size());
    v.dx = dx;
    v.dy = dy;
    v.dz = dz;
    v.intent = intent;
    v.voxels.resize(v.voxel_count());
    for (int z = 0; z < v.nz; ++z) {
        const Image& img = slices[z];
        if (img.w != v.nx || img.h != v.ny)
            throw ShapeMismatch("stack_slices: slice shapes differ");
        for (int y = 0; y < v.ny; ++y)
            for (int x = 0; x < v.nx; ++x) v.at(x, y, z) = img.at(y, x);
    }
    v.validate();
    return v;
}

}  // namespace ctvol
