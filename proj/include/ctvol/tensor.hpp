#pragma once

#include <cstddef>
#include <vector>

#include "ctvol/errors.hpp"

namespace ctvol {

// N x C x H x W, row-major with W fastest, double precision throughout.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}

    std::size_t size() const { return static_cast<std::size_t>(n) * c * h * w; }

    double& at(int in, int ic, int iy, int ix) {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
    }
    double at(int in, int ic, int iy, int ix) const {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
    }

    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    // Throws NumericError on NaN/Inf. Called after every layer op in debug
    // builds.
    void check_finite(const char* where) const;
};

#ifdef NDEBUG
#define CTVOL_DEBUG_CHECK_FINITE(t, where) ((void)0)
#else
#define CTVOL_DEBUG_CHECK_FINITE(t, where) (t).check_finite(where)
#endif

}  // namespace ctvol
