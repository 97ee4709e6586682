// pairstab: experiment driver. See docs/config.md for the config schema.

#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "pairstab/commands.hpp"
#include "pairstab/config.hpp"
#include "pairstab/error.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<std::int64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
  std::optional<std::string> run;
  std::optional<std::string> report;
};

int dispatch(const std::string& name, const Flags& flags) {
  using pairstab::CommandOptions;
  using pairstab::CommandResult;
  static const std::map<std::string, std::function<CommandResult(const CommandOptions&)>> commands = {
      {"gen-data", pairstab::cmd_gen_data}, {"train", pairstab::cmd_train},
      {"stability", pairstab::cmd_stability}, {"bound", pairstab::cmd_bound},
      {"sweep", pairstab::cmd_sweep},         {"chernoff", pairstab::cmd_chernoff},
  };
  try {
    CommandOptions opts;
    if (!flags.config_path.empty()) opts.config = pairstab::Config::load(flags.config_path);
    if (flags.seed) opts.config.set("seed", std::to_string(*flags.seed));
    if (flags.out) opts.config.set("out", *flags.out);
    if (flags.jobs) opts.config.set("jobs", std::to_string(*flags.jobs));
    opts.out_dir = opts.config.get_string("out");
    const auto jobs = opts.config.get_int("jobs");
    if (jobs < 1) throw pairstab::Error(pairstab::ErrorCode::config_error, "jobs must be >= 1");
    opts.jobs = static_cast<unsigned>(jobs);
    opts.run_path = flags.run;
    opts.report_path = flags.report;

    const auto result = commands.at(name)(opts);
    for (const auto& line : result.lines) std::cout << line << '\n';
    std::cout << "config_hash=" << std::hex << opts.config.hash() << std::dec << '\n';
    return result.status;
  } catch (const pairstab::Error& e) {
    std::cerr << "pairstab " << name << ": " << e.what() << '\n';
    return pairstab::exit_status_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "pairstab " << name << ": internal error: " << e.what() << '\n';
    return pairstab::exit_internal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pairwise SGD/SGDA stability and PAC-Bayes experiment driver"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config_path, "experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "root seed (overrides the config)");
    sub->add_option("--out", flags.out, "output directory (overrides the config)");
    sub->add_option("--jobs", flags.jobs, "worker threads (overrides the config)");
    sub->callback([&chosen, name] { chosen = name; });
    return sub;
  };
  add("gen-data", "generate a synthetic dataset");
  add("train", "train once and write a replayable run record");
  add("stability", "sub-exponential tail check with stability probes");
  auto* bound = add("bound", "evaluate the PAC-Bayes bound");
  bound->add_option("--run", flags.run, "run record to take KL and (T, eta) from")->check(CLI::ExistingFile);
  bound->add_option("--report", flags.report, "re-derive an existing bound report and compare")
      ->check(CLI::ExistingFile);
  add("sweep", "generalization-gap rate sweep over n");
  add("chernoff", "Monte Carlo occupancy coverage check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pairstab::exit_config;
  }
  return dispatch(chosen, flags);
}
