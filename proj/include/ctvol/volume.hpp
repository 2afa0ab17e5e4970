#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctvol/errors.hpp"

namespace ctvol {

enum class VolumeIntent { intensity, binary_mask };

// 3-D scalar voxel grid. Voxels are stored x-fastest:
// voxels[x + nx * (y + ny * z)].
struct Volume3D {
    int nx = 0, ny = 0, nz = 0;
    double dx = 1.0, dy = 1.0, dz = 1.0;  // spacing, mm per voxel
    VolumeIntent intent = VolumeIntent::intensity;
    std::vector<float> voxels;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(nx) * ny * nz;
    }
    float& at(int x, int y, int z) {
        return voxels[static_cast<std::size_t>(x) +
                      static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z)];
    }
    float at(int x, int y, int z) const {
        return voxels[static_cast<std::size_t>(x) +
                      static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z)];
    }

    // Throws if the shape/spacing/intent invariants do not hold.
    void validate() const;
};

// Clamp every voxel to {0,1} by thresholding value > 0, and tag the volume
// as a mask. Clinical masks sometimes carry label integers.
Volume3D binarize_mask(Volume3D v);

// 2-D grayscale image, row-major (rows = y, cols = x), values in [0,1].
struct Image {
    int h = 0, w = 0;
    std::vector<float> px;

    Image() = default;
    Image(int h_, int w_, float fill = 0.0f)
        : h(h_), w(w_), px(static_cast<std::size_t>(h_) * w_, fill) {}

    float& at(int r, int c) { return px[static_cast<std::size_t>(r) * w + c]; }
    float at(int r, int c) const { return px[static_cast<std::size_t>(r) * w + c]; }
    bool same_shape(const Image& o) const { return h == o.h && w == o.w; }
};

bool is_binary(const Image& img);

// One axial slice: grayscale image plus lung and infection masks.
struct SliceSample {
    Image image;
    Image lung_mask;
    Image infection_mask;
    std::string source_id;
    int slice_index = 0;

    void validate() const;
};

}  // namespace ctvol
