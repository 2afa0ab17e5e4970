#include "ctvol/tensor.hpp"

#include <cmath>
#include <string>

namespace ctvol {

void Tensor::check_finite(const char* where) const {
    for (double v : data)
        if (!std::isfinite(v))
            throw NumericError(std::string("non-finite value after ") + where);
}

}  // namespace ctvol
