#pragma once

#include <string>
#include <vector>

#include "ctvol/config.hpp"
#include "ctvol/dataset.hpp"
#include "ctvol/metrics.hpp"
#include "ctvol/volumetry.hpp"

namespace ctvol {

// Pipeline commands behind the ctvol CLI. Each command either produces all
// of its declared outputs or throws (index-style files are written last,
// atomically). Paths are derived from the RunConfig:
//   <input_dir>/<pid>_{ct,lung,inf}.nii.gz      NIfTI triplets
//   <work_dir>/slices/{images,lung_masks,infection_masks}/<id>.png
//   <work_dir>/slices/index.json
//   <work_dir>/split.json
//   <work_dir>/loss_log.csv, checkpoint at paths.checkpoint
//   <work_dir>/metrics.json
//   <work_dir>/predictions/... per-slice PNGs and reassembled NIfTI masks
//   <work_dir>/reports/<pid>.json + <work_dir>/reports/prioritization.csv

void cmd_generate_phantoms(const RunConfig& cfg);

struct ConvertResult {
    int volumes_ok = 0;
    int volumes_failed = 0;
    int slices = 0;
    std::vector<std::string> errors;
};
// Returns instead of throwing on per-file parse failures so the CLI can
// report them all and still exit nonzero.
ConvertResult cmd_convert(const RunConfig& cfg);

DatasetSplit cmd_split(const RunConfig& cfg);

// Writes `copies` augmented variants of every converted slice.
void cmd_augment(const RunConfig& cfg, int copies = 1);

struct TrainResult {
    int steps = 0;
    double final_loss = 0.0;
};
TrainResult cmd_train(const RunConfig& cfg);

struct EvalOptions {
    std::string split = "test";  // train | val | test
    bool gt_self = false;        // evaluate ground truth against itself
};
DatasetIou cmd_eval(const RunConfig& cfg, const EvalOptions& opt = {});

void cmd_infer(const RunConfig& cfg);

struct ReportOptions {
    bool use_ground_truth = false;  // volumetry on gt masks instead of predictions
};
std::vector<VolumetryReport> cmd_report(const RunConfig& cfg, const ReportOptions& opt = {});

std::string report_to_json(const VolumetryReport& r);

}  // namespace ctvol
