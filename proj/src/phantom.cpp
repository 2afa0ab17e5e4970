#include "ctvol/phantom.hpp"

#include <cmath>

#include "ctvol/rng.hpp"

namespace ctvol {

void PhantomSpec::validate() const {
    if (nx < 4 || ny < 4 || nz < 1) throw ConfigInvalid("phantom: volume too small");
    if (!(dx > 0 && dy > 0 && dz > 0)) throw ConfigInvalid("phantom: spacing must be positive");
    if (blob_count_min < 0 || blob_count_max < blob_count_min)
        throw ConfigInvalid("phantom: bad blob count range");
    if (!(blob_radius_min > 0) || blob_radius_max < blob_radius_min)
        throw ConfigInvalid("phantom: bad blob radius range");
    if (noise_hu < 0) throw ConfigInvalid("phantom: noise must be >= 0");
}

Phantom generate_phantom(const PhantomSpec& spec, int patient_index) {
    spec.validate();
    std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(patient_index)));

    Phantom ph;
    for (Volume3D* v : {&ph.ct, &ph.lung_mask, &ph.infection_mask}) {
        v->nx = spec.nx;
        v->ny = spec.ny;
        v->nz = spec.nz;
        v->dx = spec.dx;
        v->dy = spec.dy;
        v->dz = spec.dz;
        v->voxels.assign(v->voxel_count(), 0.0f);
    }
    ph.lung_mask.intent = VolumeIntent::binary_mask;
    ph.infection_mask.intent = VolumeIntent::binary_mask;

    // per-patient ellipsoids
    struct Ellipsoid {
        double cx, cy, cz, rx, ry, rz;
        bool contains(double x, double y, double z) const {
            const double a = (x - cx) / rx, b = (y - cy) / ry, c = (z - cz) / rz;
            return a * a + b * b + c * c <= 1.0;
        }
    };
    Ellipsoid lungs[2];
    for (int side = 0; side < 2; ++side) {
        auto jitter = [&](double base, double extent) {
            return base + uniform_in(rng, -spec.center_jitter, spec.center_jitter) * extent;
        };
        auto scale = [&](double r) {
            return r * (1.0 + uniform_in(rng, -spec.radius_jitter, spec.radius_jitter));
        };
        lungs[side] = {jitter(spec.lung_center_x[side] * spec.nx, spec.nx),
                       jitter(spec.lung_center_y * spec.ny, spec.ny),
                       jitter(0.5 * spec.nz, spec.nz),
                       scale(spec.lung_radius_x * spec.nx),
                       scale(spec.lung_radius_y * spec.ny),
                       scale(spec.lung_radius_z * spec.nz)};
    }

    for (int z = 0; z < spec.nz; ++z)
        for (int y = 0; y < spec.ny; ++y)
            for (int x = 0; x < spec.nx; ++x)
                if (lungs[0].contains(x, y, z) || lungs[1].contains(x, y, z))
                    ph.lung_mask.at(x, y, z) = 1.0f;

    // blobs: spheres centered on lung voxels, intersected with the lung
    // mask so every infection voxel stays inside the lung
    const int blobs =
        spec.blob_count_min +
        (spec.blob_count_max > spec.blob_count_min
             ? static_cast<int>(rng() % static_cast<std::uint64_t>(spec.blob_count_max -
                                                                   spec.blob_count_min + 1))
             : 0);
    for (int blob = 0; blob < blobs; ++blob) {
        const Ellipsoid& host = lungs[rng() % 2];
        // rejection-sample a center voxel inside the host lung
        double bx = host.cx, by = host.cy, bz = host.cz;
        for (int attempt = 0; attempt < 64; ++attempt) {
            const double px = uniform_in(rng, host.cx - host.rx, host.cx + host.rx);
            const double py = uniform_in(rng, host.cy - host.ry, host.cy + host.ry);
            const double pz = uniform_in(rng, host.cz - host.rz, host.cz + host.rz);
            if (host.contains(px, py, pz)) {
                bx = px;
                by = py;
                bz = pz;
                break;
            }
        }
        const double radius = uniform_in(rng, spec.blob_radius_min, spec.blob_radius_max);
        const double rz = std::max(1.0, radius * spec.dx / spec.dz);  // isotropic in mm
        for (int z = 0; z < spec.nz; ++z)
            for (int y = 0; y < spec.ny; ++y)
                for (int x = 0; x < spec.nx; ++x) {
                    if (ph.lung_mask.at(x, y, z) == 0.0f) continue;
                    const double a = (x - bx) / radius, b = (y - by) / radius,
                                 c = (z - bz) / rz;
                    if (a * a + b * b + c * c <= 1.0) ph.infection_mask.at(x, y, z) = 1.0f;
                }
    }

    NormalSampler noise(rng());
    for (std::size_t i = 0; i < ph.ct.voxels.size(); ++i) {
        double hu = 40.0;  // soft tissue
        if (ph.infection_mask.voxels[i] != 0.0f)
            hu = -300.0;  // GGO-like density increase
        else if (ph.lung_mask.voxels[i] != 0.0f)
            hu = -850.0;  // aerated lung
        ph.ct.voxels[i] = static_cast<float>(hu + spec.noise_hu * noise.next());
    }
    return ph;
}

}  // namespace ctvol
