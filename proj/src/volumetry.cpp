#include "ctvol/volumetry.hpp"

#include <cmath>

namespace ctvol {

const char* severity_name(Severity s) {
    switch (s) {
        case Severity::mild: return "mild";
        case Severity::moderate: return "moderate";
        default: return "severe";
    }
}

void VolumetryReport::validate() const {
    if (lung_volume_mm3 < 0.0 || infection_volume_mm3 < 0.0)
        throw NonBinaryMask("report: negative volume");
    if (infection_percent < 0.0 || infection_percent > 100.0)
        throw BadThresholds("report: percent outside [0,100]");
    if (lung_volume_mm3 > 0.0 && !percent_clamped) {
        const double expect = 100.0 * infection_volume_mm3 / lung_volume_mm3;
        if (std::abs(infection_percent - expect) > 1e-9 * std::max(1.0, expect))
            throw BadThresholds("report: percent inconsistent with volumes");
    }
    if (severity != triage(infection_percent, thresholds_used))
        throw BadThresholds("report: severity inconsistent with thresholds");
}

double mask_volume(const Volume3D& mask) {
    mask.validate();
    std::uint64_t set = 0;
    for (float v : mask.voxels) {
        if (v != 0.0f && v != 1.0f) throw NonBinaryMask("mask_volume: voxel outside {0,1}");
        set += v != 0.0f ? 1 : 0;
    }
    return static_cast<double>(set) * mask.dx * mask.dy * mask.dz;
}

double infection_percentage(double infection_vol_mm3, double lung_vol_mm3, bool* clamped) {
    if (clamped) *clamped = false;
    if (!(lung_vol_mm3 > 0.0))
        throw ZeroLungVolume("infection_percentage: lung volume is zero");
    if (infection_vol_mm3 < 0.0)
        throw NonBinaryMask("infection_percentage: negative infection volume");
    double percent = 100.0 * infection_vol_mm3 / lung_vol_mm3;
    if (percent > 100.0) {
        percent = 100.0;
        if (clamped) *clamped = true;
    }
    return percent;
}

Severity triage(double percent, const TriageThresholds& th) {
    if (!(th.t1 >= 0.0 && th.t1 < th.t2 && th.t2 <= 100.0))
        throw BadThresholds("triage: need 0 <= t1 < t2 <= 100");
    if (percent < th.t1) return Severity::mild;
    if (percent < th.t2) return Severity::moderate;
    return Severity::severe;
}

VolumetryReport build_report(const std::string& patient_id, const Volume3D& lung_mask,
                             const Volume3D& infection_mask,
                             const TriageThresholds& thresholds) {
    if (lung_mask.nx != infection_mask.nx || lung_mask.ny != infection_mask.ny ||
        lung_mask.nz != infection_mask.nz)
        throw ShapeMismatch("build_report: mask shapes differ");
    if (lung_mask.dx != infection_mask.dx || lung_mask.dy != infection_mask.dy ||
        lung_mask.dz != infection_mask.dz)
        throw ShapeMismatch("build_report: mask spacings differ");

    VolumetryReport r;
    r.patient_id = patient_id;
    r.thresholds_used = thresholds;
    r.slice_count = lung_mask.nz;
    r.lung_volume_mm3 = mask_volume(lung_mask);
    r.infection_volume_mm3 = mask_volume(infection_mask);
    r.infection_percent =
        infection_percentage(r.infection_volume_mm3, r.lung_volume_mm3, &r.percent_clamped);
    r.severity = triage(r.infection_percent, thresholds);

    std::uint64_t inf_total = 0, inf_outside = 0;
    for (std::size_t i = 0; i < infection_mask.voxels.size(); ++i) {
        if (infection_mask.voxels[i] != 0.0f) {
            ++inf_total;
            if (lung_mask.voxels[i] == 0.0f) ++inf_outside;
        }
    }
    r.infection_outside_lung_fraction =
        inf_total == 0 ? 0.0 : static_cast<double>(inf_outside) / static_cast<double>(inf_total);

    r.validate();
    return r;
}

}  // namespace ctvol
