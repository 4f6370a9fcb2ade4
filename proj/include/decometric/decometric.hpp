// decometric.hpp - Umbrella header

#pragma once

#include "decometric/specfun.hpp"
#include "decometric/model.hpp"
#include "decometric/kernels.hpp"
#include "decometric/modesum.hpp"
#include "decometric/metric.hpp"
#include "decometric/ensemble.hpp"
#include "decometric/exact.hpp"
#include "decometric/io.hpp"

namespace decometric {

inline constexpr const char* version() {
#ifdef DECOMETRIC_VERSION
    return DECOMETRIC_VERSION;
#else
    return "unknown";
#endif
}

} // namespace decometric
