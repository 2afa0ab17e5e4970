#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ctvol/volume.hpp"

namespace ctvol {

enum class TransformKind {
    hflip,
    shift_scale_rotate,
    random_crop,
    gaussian_noise,
    perspective,
    clahe,
    brightness,
    sharpen,
    blur,
    motion_blur,
    contrast,
    hue_saturation,
};

const char* transform_kind_name(TransformKind k);
TransformKind transform_kind_from_name(const std::string& name);

// Geometric transforms move image and masks in lockstep; everything else
// touches the image only.
bool is_geometric(TransformKind k);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Range&) const = default;
};

// Parameter-range blocks, one per transform kind. The variant alternative
// order matches TransformKind, so the kind is implied by the alternative:
// a spec can never carry params of the wrong kind.
struct HFlipParams {
    bool operator==(const HFlipParams&) const = default;
};
struct ShiftScaleRotateParams {
    Range shift;  // fraction of width/height, drawn per axis
    Range scale;  // multiplier delta, s = 1 + draw
    Range rotate_deg;
    bool operator==(const ShiftScaleRotateParams&) const = default;
};
struct RandomCropParams {
    int height = 0;
    int width = 0;
    bool operator==(const RandomCropParams&) const = default;
};
struct GaussianNoiseParams {
    Range sigma;
    bool operator==(const GaussianNoiseParams&) const = default;
};
struct PerspectiveParams {
    Range distortion;  // corner jitter as a fraction of width/height
    bool operator==(const PerspectiveParams&) const = default;
};
struct ClaheParams {
    double clip_limit = 4.0;
    int tiles_x = 8;
    int tiles_y = 8;
    bool operator==(const ClaheParams&) const = default;
};
struct BrightnessParams {
    Range delta;
    bool operator==(const BrightnessParams&) const = default;
};
struct SharpenParams {
    Range alpha;
    std::vector<int> kernel_sizes{3, 5};
    bool operator==(const SharpenParams&) const = default;
};
struct BlurParams {
    std::vector<int> kernel_sizes{3, 5};
    bool operator==(const BlurParams&) const = default;
};
struct MotionBlurParams {
    std::vector<int> kernel_sizes{3, 5};
    bool operator==(const MotionBlurParams&) const = default;
};
struct ContrastParams {
    Range delta;
    bool operator==(const ContrastParams&) const = default;
};
struct HueSaturationParams {
    Range hue;  // fraction of the full hue circle
    Range saturation;
    Range value;
    bool operator==(const HueSaturationParams&) const = default;
};

using TransformParams =
    std::variant<HFlipParams, ShiftScaleRotateParams, RandomCropParams, GaussianNoiseParams,
                 PerspectiveParams, ClaheParams, BrightnessParams, SharpenParams, BlurParams,
                 MotionBlurParams, ContrastParams, HueSaturationParams>;

struct TransformSpec {
    double probability = 0.5;
    TransformParams params;

    TransformKind kind() const { return static_cast<TransformKind>(params.index()); }
    void validate() const;
};

struct AugSpec {
    std::vector<TransformSpec> transforms;
    std::uint64_t seed = 0;

    void validate() const;

    // The default pipeline: every transform the engine knows except
    // random_crop (which changes the sample size and therefore cannot be
    // on by default for batched training), p = 0.5 each.
    static AugSpec defaults(std::uint64_t seed);
};

AugSpec augspec_from_json(const std::string& json_text);
std::string augspec_to_json(const AugSpec& spec);

// Concrete sampled parameter values.
struct ResolvedHFlip {
    bool operator==(const ResolvedHFlip&) const = default;
};
struct ResolvedShiftScaleRotate {
    double shift_x = 0.0, shift_y = 0.0;  // fraction of W / H
    double scale = 1.0;
    double angle_deg = 0.0;
    bool operator==(const ResolvedShiftScaleRotate&) const = default;
};
struct ResolvedCrop {
    int height = 0, width = 0;
    double u_y = 0.0, u_x = 0.0;  // fractional placement in [0,1)
    bool operator==(const ResolvedCrop&) const = default;
};
struct ResolvedGaussianNoise {
    double sigma = 0.0;
    std::uint64_t noise_seed = 0;
    bool operator==(const ResolvedGaussianNoise&) const = default;
};
struct ResolvedPerspective {
    // per-corner jitter (fractions of W / H): tl, tr, br, bl
    double jx[4] = {0, 0, 0, 0};
    double jy[4] = {0, 0, 0, 0};
    bool operator==(const ResolvedPerspective&) const = default;
};
struct ResolvedClahe {
    double clip_limit = 4.0;
    int tiles_x = 8, tiles_y = 8;
    bool operator==(const ResolvedClahe&) const = default;
};
struct ResolvedBrightness {
    double delta = 0.0;
    bool operator==(const ResolvedBrightness&) const = default;
};
struct ResolvedSharpen {
    double alpha = 0.0;
    int ksize = 3;
    bool operator==(const ResolvedSharpen&) const = default;
};
struct ResolvedBlur {
    int ksize = 3;
    bool operator==(const ResolvedBlur&) const = default;
};
struct ResolvedMotionBlur {
    int ksize = 3;
    bool operator==(const ResolvedMotionBlur&) const = default;
};
struct ResolvedContrast {
    double delta = 0.0;
    bool operator==(const ResolvedContrast&) const = default;
};
struct ResolvedHueSaturation {
    double hue = 0.0, saturation = 0.0, value = 0.0;
    bool operator==(const ResolvedHueSaturation&) const = default;
};

using ResolvedParams =
    std::variant<ResolvedHFlip, ResolvedShiftScaleRotate, ResolvedCrop, ResolvedGaussianNoise,
                 ResolvedPerspective, ResolvedClahe, ResolvedBrightness, ResolvedSharpen,
                 ResolvedBlur, ResolvedMotionBlur, ResolvedContrast, ResolvedHueSaturation>;

struct ResolvedTransform {
    ResolvedParams params;

    TransformKind kind() const { return static_cast<TransformKind>(params.index()); }
    bool applies_to_masks() const { return is_geometric(kind()); }
};

// Draw inclusion (Bernoulli p) and concrete parameters for every transform
// in order, from a PRNG keyed by (spec.seed, sample_index).
std::vector<ResolvedTransform> sample_pipeline(const AugSpec& spec, std::uint64_t sample_index);

// Inverse coordinate map of a geometric transform: output pixel (row, col)
// -> source position in the input image. Exposed so tests can enumerate it.
struct CoordMap {
    int out_h = 0, out_w = 0;
    std::function<std::pair<double, double>(int r, int c)> src;  // (row, col)
};
CoordMap coord_map_for(const ResolvedTransform& t, int in_h, int in_w);

// Image resampled bilinearly, every mask nearest-neighbor, all through the
// identical coordinate map; out-of-bounds reads fill with 0.
std::pair<Image, std::vector<Image>> geometric_transform(const Image& image,
                                                         const std::vector<Image>& masks,
                                                         const ResolvedTransform& t);

// gaussian_noise / brightness / contrast / hue_saturation. Masks are never
// routed through here.
Image photometric_transform(const Image& image, const ResolvedTransform& t);

// Contrast-limited adaptive histogram equalization, 256 bins per tile,
// bilinear blending of the four surrounding tile mappings.
Image clahe(const Image& image, int tiles_x, int tiles_y, double clip_limit);

// sharpen / blur / motion_blur; 2-D convolution with edge-replicate
// padding. alpha is only read for sharpen.
Image kernel_filter(const Image& image, TransformKind kind, int ksize, double alpha = 1.0);

// Apply the full resolved pipeline in spec order.
SliceSample apply_pipeline(const AugSpec& spec, std::uint64_t sample_index,
                           const SliceSample& s);

}  // namespace ctvol
