#pragma once

#include <cstdint>
#include <vector>

#include "ctvol/volume.hpp"

namespace ctvol {

struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
};

ConfusionCounts confusion_counts(const Image& pred, const Image& gt);

// tp / (tp + fp + fn); both-empty masks agree perfectly and score 1.
double iou(const ConfusionCounts& c);

// Predicted and ground-truth mask pair for one slice, both channels.
struct SlicePair {
    Image pred_lung;
    Image gt_lung;
    Image pred_infection;
    Image gt_infection;
};

struct DatasetIou {
    double lung = 0.0;
    double infection = 0.0;
};

// Micro IoU: confusion counts are pooled over all slices first, then one
// IoU per channel.
DatasetIou dataset_iou(const std::vector<SlicePair>& pairs);

}  // namespace ctvol
