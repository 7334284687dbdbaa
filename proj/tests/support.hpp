#pragma once

#include "cneigh/common.hpp"
#include "cneigh/rng.hpp"

#include <string>
#include <vector>

// Collects library warnings for the lifetime of the object.
struct WarningCapture {
    std::vector<std::string> messages;
    cneigh::WarningHandler previous;

    WarningCapture()
    {
        previous = cneigh::set_warning_handler([this](std::string_view m) { messages.emplace_back(m); });
    }
    ~WarningCapture() { cneigh::set_warning_handler(previous); }

    bool contains(const std::string& needle) const
    {
        for (const auto& m : messages)
            if (m.find(needle) != std::string::npos)
                return true;
        return false;
    }
};

inline cneigh::MatrixX<double> uniform_points(int d, cneigh::Index M, cneigh::Rng& rng)
{
    cneigh::MatrixX<double> p(d, M);
    for (cneigh::Index m = 0; m < M; ++m)
        for (int k = 0; k < d; ++k)
            p(k, m) = cneigh::uniform01(rng);
    return p;
}
