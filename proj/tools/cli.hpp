#pragma once

#include <exception>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace soctuner::cli {

/// Bad flags, config fields or input files. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitEvaluation = 2;

/// Default output directory comes from this variable when --out is absent.
inline constexpr const char* kOutEnv = "SOCTUNER_OUT";

/// Exit code for an exception escaping a subcommand.
int exit_code_for(const std::exception_ptr& error);

/// Values taken from flags; unset ones fall back to the config file, then defaults.
struct Overrides {
  std::optional<std::string> space, dataset, evaluator, out;
  std::optional<long long> T, n, b, S, seed, rows, pool_size, threads;
  std::optional<double> mu, v_th;
  bool force = false;
  bool baseline = false;
  bool quiet = false;
};

int cmd_explore(const Overrides& o, std::ostream& out);
int cmd_gen_dataset(const Overrides& o, std::ostream& out);
int cmd_importance(const Overrides& o, std::ostream& out);

/// Parse argv and dispatch; prints errors to `err`.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace soctuner::cli
