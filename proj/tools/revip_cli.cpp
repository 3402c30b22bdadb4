#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "revip/runner.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool timing = false;
};

void add_common(CLI::App* app, Options& o, bool config_required) {
  auto* c = app->add_option("--config", o.config, "configuration file (JSON or YAML)");
  if (config_required) c->required();
  app->add_option("--seed", o.seed, "seed, overrides the configuration");
  app->add_option("--out", o.out, "directory for report.json and CSV dumps (default: report to stdout)");
  app->add_flag("--timing", o.timing, "record per-check runtime in the report");
}

void keep_kind(revip::RunConfig& cfg, const std::string& kind) {
  std::erase_if(cfg.checks, [&](const revip::CompiledCheck& c) { return c.kind != kind; });
}

int execute(revip::RunConfig cfg, const Options& o) {
  if (o.seed) cfg.seed = o.seed;
  revip::RunContext ctx;
  ctx.timing = o.timing;
  if (!o.out.empty()) {
    std::filesystem::create_directories(o.out);
    ctx.out_dir = std::filesystem::path(o.out);
  }
  const nlohmann::json report = revip::run(cfg, ctx);
  const std::string text = report.dump(2) + "\n";
  if (ctx.out_dir) {
    std::ofstream os(*ctx.out_dir / "report.json", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write report.json");
    os << text;
    std::cerr << (report["pass"].get<bool>() ? "PASS" : "FAIL") << ": " << report["summary"]["passed"] << "/"
              << report["summary"]["checks"] << " checks\n";
  } else {
    std::cout << text;
  }
  return report["pass"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification runner for involutions, generated kernels and independence-preserving maps"};
  app.set_version_flag("--version", std::string(revip::kVersion));
  Options top;
  add_common(&app, top, false);

  Options verify_opt;
  auto* verify = app.add_subcommand("verify", "run every check in the configuration");
  add_common(verify, verify_opt, true);

  Options burke_opt;
  auto* burke = app.add_subcommand("simulate-burke", "run only the burke checks");
  add_common(burke, burke_opt, true);

  Options rrw_opt;
  std::optional<double> p;
  std::optional<double> q;
  std::optional<double> r;
  std::optional<double> pprime;
  auto* rrw = app.add_subcommand("characterize-rrw", "forced law and proof identities for the reflecting walk");
  add_common(rrw, rrw_opt, false);
  rrw->add_option("--p", p, "up-step probability");
  rrw->add_option("--q", q, "down-step probability");
  rrw->add_option("--r", r, "stay probability");
  rrw->add_option("--pprime", pprime, "p' for the r = 0 family");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*burke) {
      auto cfg = revip::load_config(burke_opt.config);
      keep_kind(cfg, "burke");
      return execute(std::move(cfg), burke_opt);
    }
    if (*rrw) {
      revip::RunConfig cfg;
      if (p || q || r) {
        if (!p || !q || !r) throw revip::ConfigError("--p, --q and --r must be given together");
        std::string text = "seed: 0\nchecks:\n  - kind: rrw-characterize\n    necessity: true\n";
        text += "    p: " + revip::to_text(*p) + "\n    q: " + revip::to_text(*q) + "\n    r: " + revip::to_text(*r) + "\n";
        if (pprime) text += "    pprime: " + revip::to_text(*pprime) + "\n";
        cfg = revip::parse_config(text);
      } else if (!rrw_opt.config.empty()) {
        cfg = revip::load_config(rrw_opt.config);
        keep_kind(cfg, "rrw-characterize");
      } else {
        throw revip::ConfigError("characterize-rrw needs --config or --p/--q/--r");
      }
      return execute(std::move(cfg), rrw_opt);
    }
    const Options& o = *verify ? verify_opt : top;
    if (o.config.empty()) {
      std::cerr << app.help();
      return 2;
    }
    return execute(revip::load_config(o.config), o);
  } catch (const revip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
