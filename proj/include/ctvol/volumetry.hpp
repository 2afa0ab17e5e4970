#pragma once

#include <string>

#include "ctvol/volume.hpp"

namespace ctvol {

enum class Severity { mild, moderate, severe };

const char* severity_name(Severity s);

struct TriageThresholds {
    double t1 = 25.0;  // percent; mild below t1
    double t2 = 50.0;  // severe at or above t2
};

struct VolumetryReport {
    std::string patient_id;
    double lung_volume_mm3 = 0.0;
    double infection_volume_mm3 = 0.0;
    double infection_percent = 0.0;
    Severity severity = Severity::mild;
    TriageThresholds thresholds_used;
    int slice_count = 0;
    // data quality: infection voxels falling outside the lung mask
    double infection_outside_lung_fraction = 0.0;
    bool percent_clamped = false;

    void validate() const;
};

// (count of set voxels) * dx*dy*dz, in cubic millimeters.
double mask_volume(const Volume3D& mask);

// 100 * infection / lung, clamped to [0,100]. `clamped` is set when the
// raw ratio exceeds 100 (inconsistent masks). Zero lung volume is an error,
// never a silent zero.
double infection_percentage(double infection_vol_mm3, double lung_vol_mm3,
                            bool* clamped = nullptr);

// Boundary rule: percent < t1 -> mild, t1 <= percent < t2 -> moderate,
// percent >= t2 -> severe.
Severity triage(double percent, const TriageThresholds& thresholds);

VolumetryReport build_report(const std::string& patient_id, const Volume3D& lung_mask,
                             const Volume3D& infection_mask,
                             const TriageThresholds& thresholds);

}  // namespace ctvol
