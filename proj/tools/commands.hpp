#pragma once

#include <string>
#include <vector>

#include "geobeam/config.hpp"

namespace geobeam::cli {

// Exit codes.
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kBadConfig = 2;

struct RunContext {
  ExperimentConfig cfg;
  std::string timestamp;  // header only, never in CSV bodies
};

// Lines written as comments above every CSV header.
std::vector<std::string> preamble(const RunContext& ctx, const std::string& command);
std::string output_path(const RunContext& ctx, const std::string& file);

int cmd_cover_build(const RunContext& ctx);
int cmd_cover_check(const RunContext& ctx);
int cmd_conjugate(const RunContext& ctx);
int cmd_hypothesis(const RunContext& ctx);
int cmd_nonlooping(const RunContext& ctx);
int cmd_predict(const RunContext& ctx);
int cmd_beams(const RunContext& ctx);
int cmd_uncertainty(const RunContext& ctx);
int cmd_orthogonality(const RunContext& ctx);
int cmd_lp_scan(const RunContext& ctx);
int cmd_accept(const RunContext& ctx, const std::vector<int>& only);

}  // namespace geobeam::cli
