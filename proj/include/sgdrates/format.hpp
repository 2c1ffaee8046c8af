#pragma once

#include <string>

namespace sgdrates {

/// %.17g rendering (17 significant digits), which round-trips every double.
std::string format_double(double x);

}  // namespace sgdrates
