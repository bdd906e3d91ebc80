#include "gppx/anomaly.hpp"

#include "gppx/errors.hpp"

#include <fmt/format.h>

namespace gppx {

std::string_view to_string(Method m) { return m == Method::vae ? "vae" : "ssa"; }

Method parse_method(std::string_view name) {
    if (name == "vae") return Method::vae;
    if (name == "ssa") return Method::ssa;
    throw ConfigError(fmt::format("unknown anomaly method '{}' (expected vae or ssa)", name));
}

}  // namespace gppx
