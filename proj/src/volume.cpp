#include "ctvol/volume.hpp"

#include <cmath>

namespace ctvol {

void Volume3D::validate() const {
    if (nx <= 0 || ny <= 0 || nz <= 0)
        throw ShapeMismatch("Volume3D: non-positive shape");
    if (voxels.size() != voxel_count())
        throw ShapeMismatch("Volume3D: voxel count does not match nx*ny*nz");
    if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0) || !std::isfinite(dx) ||
        !std::isfinite(dy) || !std::isfinite(dz))
        throw NonPositiveSpacing("Volume3D: spacing must be positive and finite");
    if (intent == VolumeIntent::binary_mask) {
        for (float v : voxels)
            if (v != 0.0f && v != 1.0f)
                throw NonBinaryMask("Volume3D: mask voxel outside {0,1}");
    }
}

Volume3D binarize_mask(Volume3D v) {
    for (float& x : v.voxels) x = x > 0.0f ? 1.0f : 0.0f;
    v.intent = VolumeIntent::binary_mask;
    return v;
}

bool is_binary(const Image& img) {
    for (float v : img.px)
        if (v != 0.0f && v != 1.0f) return false;
    return true;
}

void SliceSample::validate() const {
    if (!image.same_shape(lung_mask) || !image.same_shape(infection_mask))
        throw ShapeMismatch("SliceSample: image and masks must share H x W");
    if (!is_binary(lung_mask) || !is_binary(infection_mask))
        throw NonBinaryMask("SliceSample: mask values outside {0,1}");
    if (slice_index < 0) throw ShapeMismatch("SliceSample: negative slice index");
}

}  // namespace ctvol
