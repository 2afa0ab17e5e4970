#include "ctvol/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ctvol/rng.hpp"
#include <json.hpp>

namespace ctvol {

namespace {

constexpr const char* kKindNames[] = {
    "hflip",      "shift_scale_rotate", "random_crop", "gaussian_noise",
    "perspective", "clahe",             "brightness",  "sharpen",
    "blur",       "motion_blur",        "contrast",    "hue_saturation",
};

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

void require_range(const Range& r, const char* what) {
    if (!(r.lo <= r.hi)) throw ConfigInvalid(std::string("augment: range ") + what + " has lo > hi");
}

void require_ksizes(const std::vector<int>& ks, const char* kind) {
    if (ks.empty()) throw ConfigInvalid(std::string("augment: ") + kind + " needs kernel sizes");
    for (int k : ks)
        if (k < 3 || k % 2 == 0)
            throw EvenKernel(std::string("augment: ") + kind + " kernel size must be odd and >= 3");
}

int pick_ksize(const std::vector<int>& ks, std::mt19937_64& rng) {
    return ks[static_cast<std::size_t>(rng() % ks.size())];
}

}  // namespace

const char* transform_kind_name(TransformKind k) {
    return kKindNames[static_cast<int>(k)];
}

TransformKind transform_kind_from_name(const std::string& name) {
    for (int i = 0; i < 12; ++i)
        if (name == kKindNames[i]) return static_cast<TransformKind>(i);
    throw ConfigInvalid("augment: unknown transform kind \"" + name + "\"");
}

bool is_geometric(TransformKind k) {
    return k == TransformKind::hflip || k == TransformKind::shift_scale_rotate ||
           k == TransformKind::random_crop || k == TransformKind::perspective;
}

void TransformSpec::validate() const {
    if (!(probability >= 0.0 && probability <= 1.0))
        throw ConfigInvalid("augment: probability outside [0,1]");
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ShiftScaleRotateParams>) {
                require_range(p.shift, "shift");
                require_range(p.scale, "scale");
                require_range(p.rotate_deg, "rotate_deg");
                if (p.scale.lo <= -1.0)
                    throw ConfigInvalid("augment: scale range allows non-positive scale");
            } else if constexpr (std::is_same_v<T, RandomCropParams>) {
                if (p.height < 1 || p.width < 1)
                    throw ConfigInvalid("augment: crop size must be positive");
            } else if constexpr (std::is_same_v<T, GaussianNoiseParams>) {
                require_range(p.sigma, "sigma");
                if (p.sigma.lo < 0.0) throw ConfigInvalid("augment: sigma must be >= 0");
            } else if constexpr (std::is_same_v<T, PerspectiveParams>) {
                require_range(p.distortion, "distortion");
            } else if constexpr (std::is_same_v<T, ClaheParams>) {
                if (p.tiles_x < 1 || p.tiles_y < 1)
                    throw ConfigInvalid("augment: clahe tile grid must be >= 1x1");
                if (!(p.clip_limit > 0.0)) throw ConfigInvalid("augment: clip limit must be > 0");
            } else if constexpr (std::is_same_v<T, BrightnessParams>) {
                require_range(p.delta, "delta");
            } else if constexpr (std::is_same_v<T, SharpenParams>) {
                require_range(p.alpha, "alpha");
                require_ksizes(p.kernel_sizes, "sharpen");
            } else if constexpr (std::is_same_v<T, BlurParams>) {
                require_ksizes(p.kernel_sizes, "blur");
            } else if constexpr (std::is_same_v<T, MotionBlurParams>) {
                require_ksizes(p.kernel_sizes, "motion_blur");
            } else if constexpr (std::is_same_v<T, ContrastParams>) {
                require_range(p.delta, "delta");
                if (p.delta.lo <= -1.0)
                    throw ConfigInvalid("augment: contrast range allows negative gain");
            } else if constexpr (std::is_same_v<T, HueSaturationParams>) {
                require_range(p.hue, "hue");
                require_range(p.saturation, "saturation");
                require_range(p.value, "value");
            }
        },
        params);
}

void AugSpec::validate() const {
    for (const auto& t : transforms) t.validate();
}

AugSpec AugSpec::defaults(std::uint64_t seed) {
    AugSpec spec;
    spec.seed = seed;
    auto add = [&spec](TransformParams p) {
        TransformSpec t;
        t.probability = 0.5;
        t.params = std::move(p);
        spec.transforms.push_back(std::move(t));
    };
    add(HFlipParams{});
    add(ShiftScaleRotateParams{{-0.0625, 0.0625}, {-0.1, 0.1}, {-15.0, 15.0}});
    add(GaussianNoiseParams{{0.01, 0.05}});
    add(PerspectiveParams{{0.02, 0.05}});
    add(ClaheParams{4.0, 8, 8});
    add(BrightnessParams{{-0.2, 0.2}});
    add(SharpenParams{{0.2, 0.5}, {3, 5}});
    add(BlurParams{{3, 5}});
    add(MotionBlurParams{{3, 5}});
    add(ContrastParams{{-0.2, 0.2}});
    add(HueSaturationParams{{-0.1, 0.1}, {-0.1, 0.1}, {-0.1, 0.1}});
    return spec;
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace {

using json = nlohmann::json;

Range range_from(const json& j, const char* key) {
    if (!j.contains(key))
        throw ConfigInvalid(std::string("augment: missing param \"") + key + "\"");
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2)
        throw ConfigInvalid(std::string("augment: param \"") + key + "\" must be [lo, hi]");
    return Range{v[0].get<double>(), v[1].get<double>()};
}

std::vector<int> ksizes_from(const json& j) {
    if (!j.contains("kernel_sizes"))
        throw ConfigInvalid("augment: missing param \"kernel_sizes\"");
    return j.at("kernel_sizes").get<std::vector<int>>();
}

TransformParams params_from_json(TransformKind kind, const json& j) {
    switch (kind) {
        case TransformKind::hflip: return HFlipParams{};
        case TransformKind::shift_scale_rotate:
            return ShiftScaleRotateParams{range_from(j, "shift"), range_from(j, "scale"),
                                          range_from(j, "rotate_deg")};
        case TransformKind::random_crop: {
            if (!j.contains("height") || !j.contains("width"))
                throw ConfigInvalid("augment: random_crop needs height and width");
            return RandomCropParams{j.at("height").get<int>(), j.at("width").get<int>()};
        }
        case TransformKind::gaussian_noise: return GaussianNoiseParams{range_from(j, "sigma")};
        case TransformKind::perspective: return PerspectiveParams{range_from(j, "distortion")};
        case TransformKind::clahe: {
            if (!j.contains("clip_limit") || !j.contains("tiles"))
                throw ConfigInvalid("augment: clahe needs clip_limit and tiles");
            const auto& t = j.at("tiles");
            if (!t.is_array() || t.size() != 2)
                throw ConfigInvalid("augment: clahe tiles must be [tx, ty]");
            return ClaheParams{j.at("clip_limit").get<double>(), t[0].get<int>(), t[1].get<int>()};
        }
        case TransformKind::brightness: return BrightnessParams{range_from(j, "delta")};
        case TransformKind::sharpen:
            return SharpenParams{range_from(j, "alpha"), ksizes_from(j)};
        case TransformKind::blur: return BlurParams{ksizes_from(j)};
        case TransformKind::motion_blur: return MotionBlurParams{ksizes_from(j)};
        case TransformKind::contrast: return ContrastParams{range_from(j, "delta")};
        case TransformKind::hue_saturation:
            return HueSaturationParams{range_from(j, "hue"), range_from(j, "saturation"),
                                       range_from(j, "value")};
    }
    throw ConfigInvalid("augment: unreachable kind");
}

json params_to_json(const TransformParams& params) {
    json j;
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ShiftScaleRotateParams>) {
                j["shift"] = {p.shift.lo, p.shift.hi};
                j["scale"] = {p.scale.lo, p.scale.hi};
                j["rotate_deg"] = {p.rotate_deg.lo, p.rotate_deg.hi};
            } else if constexpr (std::is_same_v<T, RandomCropParams>) {
                j["height"] = p.height;
                j["width"] = p.width;
            } else if constexpr (std::is_same_v<T, GaussianNoiseParams>) {
                j["sigma"] = {p.sigma.lo, p.sigma.hi};
            } else if constexpr (std::is_same_v<T, PerspectiveParams>) {
                j["distortion"] = {p.distortion.lo, p.distortion.hi};
            } else if constexpr (std::is_same_v<T, ClaheParams>) {
                j["clip_limit"] = p.clip_limit;
                j["tiles"] = {p.tiles_x, p.tiles_y};
            } else if constexpr (std::is_same_v<T, BrightnessParams>) {
                j["delta"] = {p.delta.lo, p.delta.hi};
            } else if constexpr (std::is_same_v<T, SharpenParams>) {
                j["alpha"] = {p.alpha.lo, p.alpha.hi};
                j["kernel_sizes"] = p.kernel_sizes;
            } else if constexpr (std::is_same_v<T, BlurParams>) {
                j["kernel_sizes"] = p.kernel_sizes;
            } else if constexpr (std::is_same_v<T, MotionBlurParams>) {
                j["kernel_sizes"] = p.kernel_sizes;
            } else if constexpr (std::is_same_v<T, ContrastParams>) {
                j["delta"] = {p.delta.lo, p.delta.hi};
            } else if constexpr (std::is_same_v<T, HueSaturationParams>) {
                j["hue"] = {p.hue.lo, p.hue.hi};
                j["saturation"] = {p.saturation.lo, p.saturation.hi};
                j["value"] = {p.value.lo, p.value.hi};
            }
        },
        params);
    return j;
}

}  // namespace

AugSpec augspec_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("augment: bad JSON: ") + e.what());
    }
    AugSpec spec;
    try {
        spec.seed = j.value("seed", 0ULL);
        if (!j.contains("transforms") || !j.at("transforms").is_array())
            throw ConfigInvalid("augment: missing \"transforms\" array");
        for (const auto& tj : j.at("transforms")) {
            TransformKind kind = transform_kind_from_name(tj.at("kind").get<std::string>());
            TransformSpec t;
            t.probability = tj.value("probability", 0.5);
            t.params = params_from_json(kind, tj);
            spec.transforms.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("augment: bad spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string augspec_to_json(const AugSpec& spec) {
    json j;
    j["seed"] = spec.seed;
    j["transforms"] = json::array();
    for (const auto& t : spec.transforms) {
        json tj = params_to_json(t.params);
        tj["kind"] = transform_kind_name(t.kind());
        tj["probability"] = t.probability;
        j["transforms"].push_back(std::move(tj));
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Pipeline resolution

std::vector<ResolvedTransform> sample_pipeline(const AugSpec& spec, std::uint64_t sample_index) {
    spec.validate();
    std::mt19937_64 rng(mix_seed(spec.seed, sample_index));
    std::vector<ResolvedTransform> out;
    for (const auto& t : spec.transforms) {
        const double roll = uniform01(rng);
        // Parameter draws happen unconditionally so that each transform
        // consumes a fixed number of RNG values; toggling one probability
        // does not reshuffle its neighbors.
        ResolvedTransform r;
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, HFlipParams>) {
                    r.params = ResolvedHFlip{};
                } else if constexpr (std::is_same_v<T, ShiftScaleRotateParams>) {
                    ResolvedShiftScaleRotate v;
                    v.shift_x = uniform_in(rng, p.shift.lo, p.shift.hi);
                    v.shift_y = uniform_in(rng, p.shift.lo, p.shift.hi);
                    v.scale = 1.0 + uniform_in(rng, p.scale.lo, p.scale.hi);
                    v.angle_deg = uniform_in(rng, p.rotate_deg.lo, p.rotate_deg.hi);
                    r.params = v;
                } else if constexpr (std::is_same_v<T, RandomCropParams>) {
                    ResolvedCrop v;
                    v.height = p.height;
                    v.width = p.width;
                    v.u_y = uniform01(rng);
                    v.u_x = uniform01(rng);
                    r.params = v;
                } else if constexpr (std::is_same_v<T, GaussianNoiseParams>) {
                    ResolvedGaussianNoise v;
                    v.sigma = uniform_in(rng, p.sigma.lo, p.sigma.hi);
                    v.noise_seed = rng();
                    r.params = v;
                } else if constexpr (std::is_same_v<T, PerspectiveParams>) {
                    ResolvedPerspective v;
                    for (int i = 0; i < 4; ++i) {
                        double d = uniform_in(rng, p.distortion.lo, p.distortion.hi);
                        double a = uniform01(rng) * 6.283185307179586477;
                        v.jx[i] = d * std::cos(a);
                        v.jy[i] = d * std::sin(a);
                    }
                    r.params = v;
                } else if constexpr (std::is_same_v<T, ClaheParams>) {
                    r.params = ResolvedClahe{p.clip_limit, p.tiles_x, p.tiles_y};
                } else if constexpr (std::is_same_v<T, BrightnessParams>) {
                    r.params = ResolvedBrightness{uniform_in(rng, p.delta.lo, p.delta.hi)};
                } else if constexpr (std::is_same_v<T, SharpenParams>) {
                    ResolvedSharpen v;
                    v.alpha = uniform_in(rng, p.alpha.lo, p.alpha.hi);
                    v.ksize = pick_ksize(p.kernel_sizes, rng);
                    r.params = v;
                } else if constexpr (std::is_same_v<T, BlurParams>) {
                    r.params = ResolvedBlur{pick_ksize(p.kernel_sizes, rng)};
                } else if constexpr (std::is_same_v<T, MotionBlurParams>) {
                    r.params = ResolvedMotionBlur{pick_ksize(p.kernel_sizes, rng)};
                } else if constexpr (std::is_same_v<T, ContrastParams>) {
                    r.params = ResolvedContrast{uniform_in(rng, p.delta.lo, p.delta.hi)};
                } else if constexpr (std::is_same_v<T, HueSaturationParams>) {
                    ResolvedHueSaturation v;
                    v.hue = uniform_in(rng, p.hue.lo, p.hue.hi);
                    v.saturation = uniform_in(rng, p.saturation.lo, p.saturation.hi);
                    v.value = uniform_in(rng, p.value.lo, p.value.hi);
                    r.params = v;
                }
            },
            t.params);
        if (roll < t.probability) out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Geometric transforms

namespace {

// Homography coefficients for perspective: maps output (x,y) to source
// (u,v) via u = (a x + b y + c)/(g x + h y + 1), v = (d x + e y + f)/(...).
struct Homography {
    double a, b, c, d, e, f, g, h;
};

// Solve the 8x8 linear system pinning four (x,y) -> (u,v) correspondences.
Homography homography_from_corners(const std::array<std::pair<double, double>, 4>& dst,
                                   const std::array<std::pair<double, double>, 4>& src) {
    double m[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        const double x = dst[i].first, y = dst[i].second;
        const double u = src[i].first, v = src[i].second;
        double* r0 = m[2 * i];
        double* r1 = m[2 * i + 1];
        r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
        r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
    }
    // Gaussian elimination with partial pivoting
    for (int col = 0; col < 8; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 8; ++row)
            if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
        if (std::abs(m[pivot][col]) < 1e-12)
            throw ConfigInvalid("perspective: degenerate corner configuration");
        if (pivot != col)
            for (int k = 0; k < 9; ++k) std::swap(m[pivot][k], m[col][k]);
        for (int row = 0; row < 8; ++row) {
            if (row == col) continue;
            const double factor = m[row][col] / m[col][col];
            for (int k = col; k < 9; ++k) m[row][k] -= factor * m[col][k];
        }
    }
    double s[8];
    for (int i = 0; i < 8; ++i) s[i] = m[i][8] / m[i][i];
    return Homography{s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]};
}

float bilinear_sample(const Image& img, double sr, double sc) {
    const int r0 = static_cast<int>(std::floor(sr));
    const int c0 = static_cast<int>(std::floor(sc));
    const double fr = sr - r0;
    const double fc = sc - c0;
    if (fr == 0.0 && fc == 0.0) {
        // integer hit: copy the pixel bit-exactly (keeps hflip an involution)
        if (r0 < 0 || r0 >= img.h || c0 < 0 || c0 >= img.w) return 0.0f;
        return img.at(r0, c0);
    }
    auto px = [&img](int r, int c) -> double {
        if (r < 0 || r >= img.h || c < 0 || c >= img.w) return 0.0;
        return img.at(r, c);
    };
    const double top = px(r0, c0) * (1.0 - fc) + px(r0, c0 + 1) * fc;
    const double bot = px(r0 + 1, c0) * (1.0 - fc) + px(r0 + 1, c0 + 1) * fc;
    return static_cast<float>(top * (1.0 - fr) + bot * fr);
}

float nearest_sample(const Image& img, double sr, double sc) {
    const int r = static_cast<int>(std::floor(sr + 0.5));
    const int c = static_cast<int>(std::floor(sc + 0.5));
    if (r < 0 || r >= img.h || c < 0 || c >= img.w) return 0.0f;
    return img.at(r, c);
}

}  // namespace

CoordMap coord_map_for(const ResolvedTransform& t, int in_h, int in_w) {
    if (!is_geometric(t.kind()))
        throw ConfigInvalid("coord_map_for: transform is not geometric");
    CoordMap map;
    map.out_h = in_h;
    map.out_w = in_w;
    if (auto* flip = std::get_if<ResolvedHFlip>(&t.params)) {
        (void)flip;
        const int w = in_w;
        map.src = [w](int r, int c) { return std::pair<double, double>(r, w - 1 - c); };
    } else if (auto* ssr = std::get_if<ResolvedShiftScaleRotate>(&t.params)) {
        const double cy = (in_h - 1) / 2.0;
        const double cx = (in_w - 1) / 2.0;
        const double angle = ssr->angle_deg * (3.14159265358979323846 / 180.0);
        const double cos_a = std::cos(angle);
        const double sin_a = std::sin(angle);
        const double inv_s = 1.0 / ssr->scale;
        const double tx = ssr->shift_x * in_w;
        const double ty = ssr->shift_y * in_h;
        map.src = [=](int r, int c) {
            const double x1 = (c - cx) - tx;
            const double y1 = (r - cy) - ty;
            const double sx = (cos_a * x1 + sin_a * y1) * inv_s + cx;
            const double sy = (-sin_a * x1 + cos_a * y1) * inv_s + cy;
            return std::pair<double, double>(sy, sx);
        };
    } else if (auto* crop = std::get_if<ResolvedCrop>(&t.params)) {
        if (crop->height > in_h || crop->width > in_w)
            throw CropLargerThanImage("random_crop: crop exceeds image size");
        map.out_h = crop->height;
        map.out_w = crop->width;
        const int max_oy = in_h - crop->height;
        const int max_ox = in_w - crop->width;
        const int oy = std::min(static_cast<int>(crop->u_y * (max_oy + 1)), max_oy);
        const int ox = std::min(static_cast<int>(crop->u_x * (max_ox + 1)), max_ox);
        map.src = [oy, ox](int r, int c) {
            return std::pair<double, double>(r + oy, c + ox);
        };
    } else if (auto* persp = std::get_if<ResolvedPerspective>(&t.params)) {
        const double w1 = in_w - 1.0, h1 = in_h - 1.0;
        std::array<std::pair<double, double>, 4> dst = {
            std::pair<double, double>{0.0, 0.0},
            {w1, 0.0},
            {w1, h1},
            {0.0, h1}};
        std::array<std::pair<double, double>, 4> src;
        for (int i = 0; i < 4; ++i)
            src[i] = {dst[i].first + persp->jx[i] * in_w, dst[i].second + persp->jy[i] * in_h};
        const Homography hm = homography_from_corners(dst, src);
        map.src = [hm](int r, int c) {
            const double x = c, y = r;
            const double den = hm.g * x + hm.h * y + 1.0;
            const double u = (hm.a * x + hm.b * y + hm.c) / den;
            const double v = (hm.d * x + hm.e * y + hm.f) / den;
            return std::pair<double, double>(v, u);
        };
    }
    return map;
}

std::pair<Image, std::vector<Image>> geometric_transform(const Image& image,
                                                         const std::vector<Image>& masks,
                                                         const ResolvedTransform& t) {
    for (const auto& m : masks)
        if (!m.same_shape(image)) throw ShapeMismatch("geometric_transform: mask shape differs");
    const CoordMap map = coord_map_for(t, image.h, image.w);

    Image out_img(map.out_h, map.out_w);
    std::vector<Image> out_masks(masks.size(), Image(map.out_h, map.out_w));
    for (int r = 0; r < map.out_h; ++r)
        for (int c = 0; c < map.out_w; ++c) {
            const auto [sr, sc] = map.src(r, c);
            out_img.at(r, c) = bilinear_sample(image, sr, sc);
            for (std::size_t i = 0; i < masks.size(); ++i)
                out_masks[i].at(r, c) = nearest_sample(masks[i], sr, sc);
        }
    return {std::move(out_img), std::move(out_masks)};
}

// ---------------------------------------------------------------------------
// Photometric transforms

namespace {

// HSV round trip on a replicated-gray pixel; returns the luminance of the
// shifted color.
float hue_saturation_pixel(float gray, double dh, double ds, double dv) {
    // gray -> HSV is (h=0, s=0, v=gray)
    double h = dh - std::floor(dh);  // wrap to [0,1)
    double s = clamp01(ds);
    double v = clamp01(gray + dv);

    const double hh = h * 6.0;
    const int sector = std::min(5, static_cast<int>(hh));
    const double f = hh - sector;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double u = v * (1.0 - s * (1.0 - f));
    double r, g, b;
    switch (sector) {
        case 0: r = v; g = u; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = u; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = u; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    return static_cast<float>(clamp01(0.299 * r + 0.587 * g + 0.114 * b));
}

}  // namespace

Image photometric_transform(const Image& image, const ResolvedTransform& t) {
    Image out = image;
    if (auto* noise = std::get_if<ResolvedGaussianNoise>(&t.params)) {
        if (noise->sigma == 0.0) return out;
        NormalSampler normal(noise->noise_seed);
        for (auto& p : out.px)
            p = static_cast<float>(clamp01(p + noise->sigma * normal.next()));
    } else if (auto* bright = std::get_if<ResolvedBrightness>(&t.params)) {
        for (auto& p : out.px) p = static_cast<float>(clamp01(p + bright->delta));
    } else if (auto* contrast = std::get_if<ResolvedContrast>(&t.params)) {
        double mean = 0.0;
        for (float p : image.px) mean += p;
        mean /= static_cast<double>(image.px.size());
        const double gain = 1.0 + contrast->delta;
        for (auto& p : out.px) p = static_cast<float>(clamp01(mean + (p - mean) * gain));
    } else if (auto* hsv = std::get_if<ResolvedHueSaturation>(&t.params)) {
        for (auto& p : out.px) p = hue_saturation_pixel(p, hsv->hue, hsv->saturation, hsv->value);
    } else {
        throw ConfigInvalid("photometric_transform: kind is not photometric");
    }
    return out;
}

// ---------------------------------------------------------------------------
// CLAHE

Image clahe(const Image& image, int tiles_x, int tiles_y, double clip_limit) {
    if (tiles_x < 1 || tiles_y < 1) throw ConfigInvalid("clahe: tile grid must be >= 1x1");
    if (!(clip_limit > 0.0)) throw ConfigInvalid("clahe: clip limit must be > 0");

    const int th = (image.h + tiles_y - 1) / tiles_y;  // edge-extended tile size
    const int tw = (image.w + tiles_x - 1) / tiles_x;
    const double tile_pixels = static_cast<double>(th) * tw;

    auto bin_of = [](float v) {
        int b = static_cast<int>(std::lround(clamp01(v) * 255.0));
        return b < 0 ? 0 : (b > 255 ? 255 : b);
    };

    // per-tile LUT: bin -> output value in [0,1]; a tile whose histogram
    // occupies a single bin passes pixel values through unchanged
    struct TileLut {
        bool passthrough = false;
        std::array<double, 256> map{};
    };
    std::vector<TileLut> luts(static_cast<std::size_t>(tiles_x) * tiles_y);

    for (int ti = 0; ti < tiles_y; ++ti)
        for (int tj = 0; tj < tiles_x; ++tj) {
            std::array<double, 256> hist{};
            int occupied = 0;
            for (int r = 0; r < th; ++r)
                for (int c = 0; c < tw; ++c) {
                    const int rr = std::min(ti * th + r, image.h - 1);
                    const int cc = std::min(tj * tw + c, image.w - 1);
                    const int b = bin_of(image.at(rr, cc));
                    if (hist[b] == 0.0) ++occupied;
                    hist[b] += 1.0;
                }
            TileLut& lut = luts[static_cast<std::size_t>(ti) * tiles_x + tj];
            if (occupied <= 1) {
                lut.passthrough = true;
                continue;
            }
            const double clip = clip_limit * tile_pixels / 256.0;
            double excess = 0.0;
            for (auto& hb : hist)
                if (hb > clip) {
                    excess += hb - clip;
                    hb = clip;
                }
            const double bonus = excess / 256.0;
            double cdf = 0.0;
            for (int b = 0; b < 256; ++b) {
                cdf += hist[b] + bonus;
                lut.map[b] = cdf / tile_pixels;
            }
        }

    // bilinear blend of the four surrounding tile mappings
    Image out(image.h, image.w);
    for (int r = 0; r < image.h; ++r) {
        const double gy = (r - (th - 1) / 2.0) / th;  // tile-grid coordinate
        int t0 = static_cast<int>(std::floor(gy));
        double fy = gy - t0;
        int t1 = t0 + 1;
        t0 = std::clamp(t0, 0, tiles_y - 1);
        t1 = std::clamp(t1, 0, tiles_y - 1);
        for (int c = 0; c < image.w; ++c) {
            const double gx = (c - (tw - 1) / 2.0) / tw;
            int s0 = static_cast<int>(std::floor(gx));
            double fx = gx - s0;
            int s1 = s0 + 1;
            s0 = std::clamp(s0, 0, tiles_x - 1);
            s1 = std::clamp(s1, 0, tiles_x - 1);

            const float v = image.at(r, c);
            const int b = bin_of(v);
            auto lookup = [&](int ty, int tx) {
                const TileLut& lut = luts[static_cast<std::size_t>(ty) * tiles_x + tx];
                return lut.passthrough ? static_cast<double>(v) : lut.map[b];
            };
            const double v00 = lookup(t0, s0), v01 = lookup(t0, s1);
            const double v10 = lookup(t1, s0), v11 = lookup(t1, s1);
            if (v00 == v01 && v00 == v10 && v00 == v11) {
                out.at(r, c) = static_cast<float>(v00);  // exact on flat regions
                continue;
            }
            const double top = v00 * (1.0 - fx) + v01 * fx;
            const double bot = v10 * (1.0 - fx) + v11 * fx;
            out.at(r, c) = static_cast<float>(clamp01(top * (1.0 - fy) + bot * fy));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kernel filters

Image kernel_filter(const Image& image, TransformKind kind, int ksize, double alpha) {
    if (ksize < 3 || ksize % 2 == 0)
        throw EvenKernel("kernel_filter: kernel size must be odd and >= 3");
    const int half = ksize / 2;

    auto px = [&image](int r, int c) -> double {
        r = std::clamp(r, 0, image.h - 1);  // edge replicate
        c = std::clamp(c, 0, image.w - 1);
        return image.at(r, c);
    };

    Image out(image.h, image.w);
    const double denom_box = static_cast<double>(ksize) * ksize;
    for (int r = 0; r < image.h; ++r)
        for (int c = 0; c < image.w; ++c) {
            double value;
            if (kind == TransformKind::motion_blur) {
                double sum = 0.0;
                for (int k = -half; k <= half; ++k) sum += px(r, c + k);
                value = sum / ksize;
            } else {
                double sum = 0.0;
                for (int i = -half; i <= half; ++i)
                    for (int j = -half; j <= half; ++j) sum += px(r + i, c + j);
                const double box = sum / denom_box;
                if (kind == TransformKind::blur) {
                    value = box;
                } else if (kind == TransformKind::sharpen) {
                    const double orig = image.at(r, c);
                    value = clamp01(orig + alpha * (orig - box));
                } else {
                    throw ConfigInvalid("kernel_filter: unsupported kind");
                }
            }
            out.at(r, c) = static_cast<float>(value);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Full pipeline

SliceSample apply_pipeline(const AugSpec& spec, std::uint64_t sample_index,
                           const SliceSample& s) {
    s.validate();
    SliceSample out = s;
    for (const auto& t : sample_pipeline(spec, sample_index)) {
        if (t.applies_to_masks()) {
            auto [img, masks] =
                geometric_transform(out.image, {out.lung_mask, out.infection_mask}, t);
            out.image = std::move(img);
            out.lung_mask = std::move(masks[0]);
            out.infection_mask = std::move(masks[1]);
        } else if (t.kind() == TransformKind::clahe) {
            const auto& p = std::get<ResolvedClahe>(t.params);
            out.image = clahe(out.image, p.tiles_x, p.tiles_y, p.clip_limit);
        } else if (t.kind() == TransformKind::sharpen) {
            const auto& p = std::get<ResolvedSharpen>(t.params);
            out.image = kernel_filter(out.image, TransformKind::sharpen, p.ksize, p.alpha);
        } else if (t.kind() == TransformKind::blur) {
            out.image = kernel_filter(out.image, TransformKind::blur,
                                      std::get<ResolvedBlur>(t.params).ksize);
        } else if (t.kind() == TransformKind::motion_blur) {
            out.image = kernel_filter(out.image, TransformKind::motion_blur,
                                      std::get<ResolvedMotionBlur>(t.params).ksize);
        } else {
            out.image = photometric_transform(out.image, t);
        }
    }
    out.validate();
    return out;
}

}  // namespace ctvol
