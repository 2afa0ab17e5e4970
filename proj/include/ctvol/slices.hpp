#pragma once

#include <utility>
#include <vector>

#include "ctvol/volume.hpp"

namespace ctvol {

// Intensity window applied when converting volume slices to images.
struct Window {
    double lo = -1000.0;  // default CT lung window, HU
    double hi = 400.0;
};

// Cut the volume along z into nz images of shape ny x nx (rows = y,
// cols = x) and map intensities through clamp((v - lo)/(hi - lo), 0, 1).
std::vector<Image> extract_slices(const Volume3D& v, const Window& window);

// Same cut without windowing; values pass through. Used for masks.
std::vector<Image> extract_mask_slices(const Volume3D& v);

// Stack slices (in index order) back into a volume with the given spacing.
Volume3D stack_slices(const std::vector<Image>& slices, double dx, double dy, double dz,
                      VolumeIntent intent);

}  // namespace ctvol
