#pragma once

#include <stdexcept>
#include <string>

namespace morse {

/// Bad sizes, flags, or degenerate parameter boxes. The CLI maps this to
/// exit code 2; everything else exits 1.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension mismatch between a value and the object consuming it.
struct shape_error : std::runtime_error {
  explicit shape_error(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values or a diverging series; callers skip the offending
/// update rather than aborting the run.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace morse
