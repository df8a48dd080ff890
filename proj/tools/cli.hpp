#ifndef IMBAL_TOOLS_CLI_HPP
#define IMBAL_TOOLS_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "imbal/params.hpp"

namespace imbal::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --help or --version; the message is the text to print.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// start:stop:step, or a single value.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
  bool single = true;

  std::vector<double> values() const;
  std::string to_string() const;
};

Range parse_range(const std::string& text, const std::string& name);

struct RunConfig {
  std::string subcommand;
  ModelParams params;  // scalar view: ranges contribute their first point
  Range q;
  Range alpha;
  Range gamma;
  double f_plus = 1.0;
  double price = 1.0;
  int branch_cap = 20;
  int branch = 0;  // oracle: branch index

  long long epochs = 1000000;
  std::uint64_t seed = 1;
  std::string init_eta1 = "random";
  std::string init_eta2 = "random";
  double capital = 0.0;
  bool record_paths = false;
  long long path_stride = 1;

  std::string out_dir;
  std::string format = "csv";
  int jobs = 1;
  std::string config_path;

  // Every option of the subcommand with its final value, in declaration
  // order; echoed into output metadata.
  std::vector<std::pair<std::string, std::string>> resolved;
};

// args excludes the program name. Throws UsageError.
RunConfig parse_config(const std::vector<std::string>& args);

// Executes a parsed configuration; tabular output goes to `out` unless an
// output directory is set.
void run(const RunConfig& config, std::ostream& out);

// Full entry point with exit codes.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace imbal::cli

#endif  // IMBAL_TOOLS_CLI_HPP
