#include "cneigh/voronoi.hpp"

namespace cneigh {

const char* to_string(VolumeMethod m) noexcept
{
    switch (m) {
    case VolumeMethod::Exact1d:
        return "exact-1d";
    case VolumeMethod::ExactPoly2d:
        return "exact-poly-2d";
    case VolumeMethod::MonteCarlo:
        return "monte-carlo";
    }
    return "unknown";
}

} // namespace cneigh
