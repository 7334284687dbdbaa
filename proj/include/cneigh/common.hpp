#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cneigh {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised for every contract violation in the library (bad sizes, invalid
/// configuration, degenerate inputs). The message is meant for end users.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Installs the sink for non-fatal diagnostics and returns the previous one.
/// The default handler writes "warning: ..." lines to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

} // namespace cneigh
