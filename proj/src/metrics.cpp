#include "ctvol/metrics.hpp"

namespace ctvol {

ConfusionCounts confusion_counts(const Image& pred, const Image& gt) {
    if (!pred.same_shape(gt)) throw ShapeMismatch("confusion_counts: shape mismatch");
    if (!is_binary(pred) || !is_binary(gt))
        throw NonBinaryInput("confusion_counts: masks must be {0,1}");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.px.size(); ++i) {
        const bool p = pred.px[i] != 0.0f;
        const bool g = gt.px[i] != 0.0f;
        if (p && g)
            ++c.tp;
        else if (p && !g)
            ++c.fp;
        else if (!p && g)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double iou(const ConfusionCounts& c) {
    const std::uint64_t denom = c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

DatasetIou dataset_iou(const std::vector<SlicePair>& pairs) {
    if (pairs.empty()) throw EmptyDataset("dataset_iou: no slices");
    ConfusionCounts lung, infection;
    for (const auto& p : pairs) {
        lung += confusion_counts(p.pred_lung, p.gt_lung);
        infection += confusion_counts(p.pred_infection, p.gt_infection);
    }
    return {iou(lung), iou(infection)};
}

}  // namespace ctvol
