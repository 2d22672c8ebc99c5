#pragma once

#include <string>

#include "rio/pipeline.hpp"
#include "rio/registration.hpp"

namespace rio {

struct RunConfig {
  Params params;
  IcpConfig icp;
  PipelineOptions options;
  double madgwick_beta = 0.1;
  double static_window = 10.0;  ///< s of rest used for bias estimation
};

/// Flat `key = value` text; '#' starts a comment. Unknown or repeated keys
/// and unparsable values throw InvalidConfig. Omitted keys keep defaults.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
/// Every key with its current value, parseable by parse_run_config.
std::string to_text(const RunConfig& cfg);

}  // namespace rio
