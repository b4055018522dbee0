#pragma once

// Command-line front end. Exit codes: 0 success or PASS, 1 FAIL, 2 usage or
// configuration error.

#include <iosfwd>
#include <map>
#include <string>

#include "gkflab/error.hpp"
#include "gkflab/geomcore.hpp"
#include "gkflab/gmf.hpp"

namespace gkflab {

struct ConfigError : Error {
  using Error::Error;
};

/// Flat `key = value` document; `#` starts a comment. Unknown or repeated
/// keys throw ConfigError naming the line.
std::map<std::string, std::string> parse_config(std::istream& is);

/// rect:a,b,...  point  ball:n,R  sphere:R  cap:<degrees>
SpaceDescriptor parse_space(const std::string& text, double metric_scale = 1.0);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gkflab
