#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <iostream>

#include "commands.hpp"
#include "geobeam/errors.hpp"

using namespace geobeam;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geobeam: geodesic beam experiments on model manifolds"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  app.add_option("-c,--config", config_path, "experiment config (INI or JSON)")->required();
  app.add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed (overrides run.seed)");

  auto* cover = app.add_subcommand("cover", "build or check a good tube cover");
  cover->require_subcommand(1);
  auto* cover_build = cover->add_subcommand("build", "build a cover and write it as JSON");
  auto* cover_check = cover->add_subcommand("check", "check cover invariants");
  auto* conjugate = app.add_subcommand("conjugate", "conjugate points along sampled geodesics");
  auto* hypothesis = app.add_subcommand("hypothesis", "maximal conjugacy hypothesis on a point sample");
  auto* nonlooping = app.add_subcommand("nonlooping", "bad tube counts for point pairs");
  auto* predict = app.add_subcommand("predict", "predicted improvement factor for p > p_c");
  auto* beams = app.add_subcommand("beams", "beam decomposition and dyadic mass buckets");
  auto* uncertainty = app.add_subcommand("uncertainty", "norms of products of coisotropic cutoffs");
  auto* orthogonality = app.add_subcommand("orthogonality", "almost orthogonality of cutoffs at separated points");
  auto* lp_scan = app.add_subcommand("lp-scan", "L^p growth exponents of eigenfunction families");
  auto* accept = app.add_subcommand("accept", "run the acceptance suite");
  std::vector<int> only;
  accept->add_option("--only", only, "criterion ids to run (default all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kBadConfig;
  }

  cli::RunContext ctx;
  ctx.timestamp = utc_now();
  try {
    ctx.cfg = load_config(config_path);
    if (!out_dir.empty()) ctx.cfg.output_dir = out_dir;
    if (seed >= 0) ctx.cfg.seed = static_cast<std::uint64_t>(seed);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return cli::kBadConfig;
  }

  try {
    if (*cover_build) return cli::cmd_cover_build(ctx);
    if (*cover_check) return cli::cmd_cover_check(ctx);
    if (*conjugate) return cli::cmd_conjugate(ctx);
    if (*hypothesis) return cli::cmd_hypothesis(ctx);
    if (*nonlooping) return cli::cmd_nonlooping(ctx);
    if (*predict) return cli::cmd_predict(ctx);
    if (*beams) return cli::cmd_beams(ctx);
    if (*uncertainty) return cli::cmd_uncertainty(ctx);
    if (*orthogonality) return cli::cmd_orthogonality(ctx);
    if (*lp_scan) return cli::cmd_lp_scan(ctx);
    if (*accept) return cli::cmd_accept(ctx, only);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return cli::kBadConfig;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return cli::kBadConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return cli::kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return cli::kCheckFailed;
  }
  return cli::kOk;
}
