#include "cneigh/weights.hpp"

namespace cneigh {

const char* to_string(WeightVariant v) noexcept
{
    return v == WeightVariant::UnbiasedLoo ? "unbiased-loo" : "nn-variant";
}

} // namespace cneigh
