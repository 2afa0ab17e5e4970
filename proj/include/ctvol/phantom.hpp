#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctvol/volume.hpp"

namespace ctvol {

// Synthetic chest phantom: two lung ellipsoids in a soft-tissue background
// with bright infection blobs placed strictly inside the lungs. Intensities
// in Hounsfield units: body +40, lung interior -850, infection -300, each
// plus Gaussian noise.
struct PhantomSpec {
    int nx = 32, ny = 32, nz = 12;
    double dx = 1.5, dy = 1.5, dz = 3.0;
    // per-lung ellipsoid: center and radii as fractions of the volume extent
    double lung_center_x[2] = {0.30, 0.70};
    double lung_center_y = 0.52;
    double lung_radius_x = 0.16;
    double lung_radius_y = 0.30;
    double lung_radius_z = 0.42;
    double center_jitter = 0.04;   // per-patient jitter, fraction of extent
    double radius_jitter = 0.15;   // relative
    int blob_count_min = 1;
    int blob_count_max = 3;
    double blob_radius_min = 2.0;  // voxels
    double blob_radius_max = 4.5;
    double noise_hu = 20.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Phantom {
    Volume3D ct;          // intensity, HU
    Volume3D lung_mask;   // binary
    Volume3D infection_mask;
};

// Deterministic in (spec.seed, patient_index).
Phantom generate_phantom(const PhantomSpec& spec, int patient_index);

}  // namespace ctvol
