#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "imbal/attractors.hpp"
#include "imbal/errors.hpp"
#include "imbal/kernel.hpp"
#include "imbal/measure.hpp"
#include "imbal/oracle.hpp"
#include "imbal/simulator.hpp"
#include "imbal/wealth.hpp"

namespace imbal::cli {
namespace {

using Json = nlohmann::ordered_json;

struct OptionSpec {
  std::string name;
  std::string fallback;
  std::string help;
};

std::string default_jobs() {
  if (const char* env = std::getenv("IMBAL_JOBS"); env != nullptr && *env != '\0') return env;
  return std::to_string(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<OptionSpec> model_options(const std::string& q_default) {
  return {
      {"n", "", "number of agents N (required)"},
      {"d", "2", "lattice dimension; 2d neighbours per move"},
      {"alpha", "5", "global imbalance coupling"},
      {"gamma", "-0.9", "seller/buyer price impact ratio, in [-1, 0)"},
      {"q", q_default, "probability of a Hamiltonian move"},
  };
}

std::vector<OptionSpec> output_options() {
  return {
      {"out", "", "output directory (default: stdout)"},
      {"format", "csv", "csv or json"},
  };
}

std::vector<OptionSpec> analysis_options() {
  return {
      {"f-plus", "1", "price impact of one incremental buyer, f(1,N)"},
      {"price", "1", "price level multiplying the increments"},
      {"branch-cap", "20", "largest |A2| to enumerate"},
      {"jobs", default_jobs(), "worker threads (default: IMBAL_JOBS or core count)"},
  };
}

struct SubcommandSpec {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
  bool hidden = false;
};

std::vector<OptionSpec> join(std::initializer_list<std::vector<OptionSpec>> parts) {
  std::vector<OptionSpec> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

const std::vector<SubcommandSpec>& subcommands() {
  static const std::vector<SubcommandSpec> specs = {
      {"kernel", "frozen-phase transition probabilities per level",
       join({model_options("1"), output_options()})},
      {"classify", "attractor class of every imbalance level", join({model_options("1"), output_options()})},
      {"measure", "invariant measure(s) of the imbalance",
       join({model_options("1"), {{"branch-cap", "20", "largest |A2| to enumerate"}}, output_options()})},
      {"wealth", "stationary expected market wealth increment over q",
       join({model_options("1"), analysis_options(), output_options()})},
      {"qstar", "q maximising the market wealth increment, per (alpha, gamma)",
       join({model_options("0.01:1:0.01"), analysis_options(), output_options()})},
      {"sweep", "existence, uniqueness and wealth over a parameter grid",
       join({model_options("0.01:1:0.01"), analysis_options(), output_options()})},
      {"simulate", "Monte Carlo run of the agent market",
       join({model_options("1"),
             {{"beta", "inf", "inverse temperature (inf = frozen phase)"},
              {"epochs", "1000000", "number of epochs"},
              {"seed", "1", "RNG seed"},
              {"init-eta1", "random", "initial trading spins: random or plus"},
              {"init-eta2", "random", "initial expectation spins: random, plus, minus or a file of N+1 values"},
              {"f-plus", "0.001", "price impact of one incremental buyer, f(1,N)"},
              {"price", "1", "initial price"},
              {"capital", "0", "initial capital of every agent"},
              {"record", "histogram", "comma list of histogram, paths"},
              {"path-stride", "1", "record every k-th epoch on the path"}},
             output_options()})},
      {"oracle", "dense stationary solve next to the product form (debugging)",
       join({model_options("1"), {{"branch", "0", "A2 branch index"}}, output_options()}), true},
  };
  return specs;
}

const SubcommandSpec* find_subcommand(const std::string& name) {
  for (const auto& s : subcommands()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

// ---------------------------------------------------------------- parsing

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(path + ":" + std::to_string(number) + ": empty key");
    for (const auto& [k, v] : out) {
      if (k == key) throw UsageError(path + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

double to_double(const std::string& name, const std::string& text) {
  if (text == "inf" || text == "infinity") return kInfiniteBeta;
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size() || errno == ERANGE || std::isnan(v)) {
    throw UsageError("--" + name + ": '" + text + "' is not a number");
  }
  return v;
}

template <class Int>
Int to_integer(const std::string& name, const std::string& text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("--" + name + ": '" + text + "' is not an integer");
  }
  return v;
}

bool has_flag(const std::vector<std::string>& tokens, const std::string& name) {
  const std::string flag = "--" + name;
  for (const auto& t : tokens) {
    if (t == flag || t.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

}  // namespace

std::vector<double> Range::values() const {
  if (single) return {start};
  try {
    return make_grid(start, stop, step);
  } catch (const InvalidParameter& e) {
    throw UsageError(e.what());
  }
}

std::string Range::to_string() const {
  char buf[96];
  if (single) {
    std::snprintf(buf, sizeof buf, "%.17g", start);
  } else {
    std::snprintf(buf, sizeof buf, "%.17g:%.17g:%.17g", start, stop, step);
  }
  return buf;
}

Range parse_range(const std::string& text, const std::string& name) {
  Range r;
  const auto first = text.find(':');
  if (first == std::string::npos) {
    r.start = r.stop = to_double(name, text);
    return r;
  }
  const auto second = text.find(':', first + 1);
  if (second == std::string::npos || text.find(':', second + 1) != std::string::npos) {
    throw UsageError("--" + name + ": expected start:stop:step, got '" + text + "'");
  }
  r.single = false;
  r.start = to_double(name, text.substr(0, first));
  r.stop = to_double(name, text.substr(first + 1, second - first - 1));
  r.step = to_double(name, text.substr(second + 1));
  if (!(r.step > 0.0)) throw UsageError("--" + name + ": step must be positive");
  if (r.stop < r.start) throw UsageError("--" + name + ": empty grid (stop < start)");
  return r;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  // Pull out --config before handing the rest to CLI11.
  std::vector<std::string> tokens;
  std::string config_path;
  for (std::size_t t = 0; t < args.size(); ++t) {
    if (args[t] == "--config") {
      if (t + 1 >= args.size()) throw UsageError("--config needs a file name");
      config_path = args[++t];
    } else if (args[t].rfind("--config=", 0) == 0) {
      config_path = args[t].substr(9);
    } else {
      tokens.push_back(args[t]);
    }
  }
  std::vector<std::pair<std::string, std::string>> file_values;
  if (!config_path.empty()) file_values = read_config_file(config_path);

  std::string sub_name;
  std::size_t sub_pos = tokens.size();
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (find_subcommand(tokens[t]) != nullptr) {
      sub_name = tokens[t];
      sub_pos = t;
      break;
    }
  }
  for (auto it = file_values.begin(); it != file_values.end(); ++it) {
    if (it->first != "subcommand") continue;
    if (find_subcommand(it->second) == nullptr) {
      throw UsageError("config file names unknown subcommand '" + it->second + "'");
    }
    if (!sub_name.empty() && sub_name != it->second) {
      throw UsageError("subcommand '" + sub_name + "' conflicts with '" + it->second + "' in the config file");
    }
    sub_name = it->second;
    file_values.erase(it);
    break;
  }

  CLI::App app{"Two-dimensional spin market: invariant measures, attractors and wealth", "imbal"};
  app.set_version_flag("--version", std::string("imbal ") + kVersion);
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> raw;
  for (const auto& spec : subcommands()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    if (spec.hidden) sub->group("");
    auto& values = raw[spec.name];
    for (const auto& opt : spec.options) {
      values[opt.name] = opt.fallback;
      CLI::Option* o = sub->add_option("--" + opt.name, values[opt.name], opt.help);
      if (opt.name == "n") {
        o->required();
      } else {
        o->default_str(opt.fallback);
      }
    }
  }

  std::vector<std::string> final_tokens;
  if (!sub_name.empty()) {
    const SubcommandSpec* spec = find_subcommand(sub_name);
    final_tokens.push_back(sub_name);
    for (const auto& [key, value] : file_values) {
      const bool known = std::any_of(spec->options.begin(), spec->options.end(),
                                     [&](const OptionSpec& o) { return o.name == key; });
      if (!known) throw UsageError("unknown config key '" + key + "' for subcommand " + sub_name);
      if (!has_flag(tokens, key)) {
        final_tokens.push_back("--" + key);
        final_tokens.push_back(value);
      }
    }
  } else if (!file_values.empty() && sub_pos == tokens.size()) {
    const bool asks_help = has_flag(tokens, "help") || has_flag(tokens, "version") ||
                           std::find(tokens.begin(), tokens.end(), "-h") != tokens.end();
    if (!asks_help) throw UsageError("missing subcommand");
  }
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (t != sub_pos) final_tokens.push_back(tokens[t]);
  }
  // A subcommand from the command line must lead; CLI11 expects options after it.
  if (sub_pos != tokens.size() && sub_pos != 0) {
    throw UsageError("options must follow the subcommand '" + sub_name + "'");
  }

  std::reverse(final_tokens.begin(), final_tokens.end());
  try {
    app.parse(final_tokens);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream os;
    std::ostringstream es;
    app.exit(e, os, es);
    throw HelpRequested(os.str());
  } catch (const CLI::CallForAllHelp& e) {
    std::ostringstream os;
    std::ostringstream es;
    app.exit(e, os, es);
    throw HelpRequested(os.str());
  } catch (const CLI::CallForVersion& e) {
    std::ostringstream os;
    std::ostringstream es;
    app.exit(e, os, es);
    throw HelpRequested(os.str());
  } catch (const CLI::RequiredError& e) {
    if (app.get_subcommands().empty()) throw UsageError("missing subcommand");
    throw UsageError(e.what());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig cfg;
  cfg.subcommand = app.get_subcommands().front()->get_name();
  cfg.config_path = config_path;
  const SubcommandSpec& spec = *find_subcommand(cfg.subcommand);
  const auto& v = raw[cfg.subcommand];
  auto has = [&](const char* key) { return v.count(key) > 0; };
  for (const auto& opt : spec.options) cfg.resolved.emplace_back(opt.name, v.at(opt.name));

  cfg.params.n = to_integer<int>("n", v.at("n"));
  cfg.params.d = to_integer<int>("d", v.at("d"));
  cfg.q = parse_range(v.at("q"), "q");
  cfg.alpha = parse_range(v.at("alpha"), "alpha");
  cfg.gamma = parse_range(v.at("gamma"), "gamma");
  const bool grid_q = cfg.subcommand == "wealth" || cfg.subcommand == "qstar" || cfg.subcommand == "sweep";
  const bool grid_ag = cfg.subcommand == "qstar" || cfg.subcommand == "sweep";
  if (!cfg.q.single && !grid_q) throw UsageError("--q takes a single value for " + cfg.subcommand);
  if (!cfg.alpha.single && !grid_ag) throw UsageError("--alpha takes a single value for " + cfg.subcommand);
  if (!cfg.gamma.single && !grid_ag) throw UsageError("--gamma takes a single value for " + cfg.subcommand);
  cfg.params.q = cfg.q.start;
  cfg.params.alpha = cfg.alpha.start;
  cfg.params.gamma = cfg.gamma.start;

  if (has("f-plus")) cfg.f_plus = to_double("f-plus", v.at("f-plus"));
  if (has("price")) cfg.price = to_double("price", v.at("price"));
  if (has("branch-cap")) cfg.branch_cap = to_integer<int>("branch-cap", v.at("branch-cap"));
  if (has("branch")) cfg.branch = to_integer<int>("branch", v.at("branch"));
  if (has("jobs")) cfg.jobs = to_integer<int>("jobs", v.at("jobs"));
  if (has("beta")) cfg.params.beta = to_double("beta", v.at("beta"));
  if (has("epochs")) cfg.epochs = to_integer<long long>("epochs", v.at("epochs"));
  if (has("seed")) cfg.seed = to_integer<std::uint64_t>("seed", v.at("seed"));
  if (has("init-eta1")) cfg.init_eta1 = v.at("init-eta1");
  if (has("init-eta2")) cfg.init_eta2 = v.at("init-eta2");
  if (has("capital")) cfg.capital = to_double("capital", v.at("capital"));
  if (has("path-stride")) cfg.path_stride = to_integer<long long>("path-stride", v.at("path-stride"));
  if (has("record")) {
    std::stringstream ss(v.at("record"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item == "paths") {
        cfg.record_paths = true;
      } else if (item != "histogram" && !item.empty()) {
        throw UsageError("--record: unknown item '" + item + "'");
      }
    }
  }
  cfg.out_dir = v.at("out");
  cfg.format = v.at("format");

  if (cfg.format != "csv" && cfg.format != "json") throw UsageError("--format must be csv or json");
  if (cfg.jobs < 1) throw UsageError("--jobs must be at least 1");
  if (cfg.branch_cap < 0 || cfg.branch_cap > 62) throw UsageError("--branch-cap must lie in 0..62");
  if (cfg.branch < 0) throw UsageError("--branch must be non-negative");
  if (!(cfg.f_plus > 0.0) || !std::isfinite(cfg.f_plus)) throw UsageError("--f-plus must be positive");
  if (!(cfg.price > 0.0) || !std::isfinite(cfg.price)) throw UsageError("--price must be positive");
  if (cfg.epochs < 1) throw UsageError("--epochs must be at least 1");
  if (cfg.path_stride < 1) throw UsageError("--path-stride must be at least 1");
  if (cfg.init_eta1 != "random" && cfg.init_eta1 != "plus") {
    throw UsageError("--init-eta1 must be random or plus");
  }
  if (cfg.init_eta2 != "random" && cfg.init_eta2 != "plus" && cfg.init_eta2 != "minus" &&
      !std::filesystem::is_regular_file(cfg.init_eta2)) {
    throw UsageError("--init-eta2: '" + cfg.init_eta2 + "' is neither random/plus/minus nor a readable file");
  }
  for (double a : cfg.alpha.values()) {
    for (double g : cfg.gamma.values()) {
      for (double q : cfg.q.values()) {
        ModelParams p = cfg.params;
        p.alpha = a;
        p.gamma = g;
        p.q = q;
        try {
          p.validate();
        } catch (const InvalidParameter& e) {
          throw UsageError(e.what());
        }
      }
    }
  }
  return cfg;
}

namespace {

// ---------------------------------------------------------------- output

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_cell(const Json& cell) {
  if (cell.is_null()) return "";
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_number_integer()) return std::to_string(cell.get<long long>());
  if (cell.is_number_unsigned()) return std::to_string(cell.get<unsigned long long>());
  if (cell.is_number_float()) return format_double(cell.get<double>());
  if (cell.is_string()) return cell.get<std::string>();
  return cell.dump();
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ';';
    s += std::to_string(v[k]);
  }
  return s;
}

Json metadata(const RunConfig& cfg) {
  Json m;
  m["version"] = std::string("imbal ") + kVersion;
  m["subcommand"] = cfg.subcommand;
  Json c = Json::object();
  for (const auto& [k, val] : cfg.resolved) c[k] = val;
  m["config"] = c;
  return m;
}

void write_csv(std::ostream& os, const RunConfig& cfg, const Table& t, const Json& summary) {
  os << "# imbal " << kVersion << "\n";
  os << "# subcommand=" << cfg.subcommand << "\n";
  for (const auto& [k, val] : cfg.resolved) os << "# " << k << "=" << val << "\n";
  if (!summary.is_null()) os << "# summary=" << summary.dump() << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_cell(row[c]);
    os << "\n";
  }
}

Json table_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json r = Json::object();
    for (std::size_t c = 0; c < row.size(); ++c) r[t.columns[c]] = row[c];
    rows.push_back(std::move(r));
  }
  return rows;
}

struct Output {
  std::string stem;          // primary table file name without extension
  Table table;
  Json summary;              // may be null
  std::string summary_stem;  // file name for the summary in csv mode
  std::vector<std::pair<std::string, Table>> extras;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  f.close();
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void emit(const RunConfig& cfg, std::ostream& out, const Output& o) {
  namespace fs = std::filesystem;
  if (cfg.format == "json") {
    Json doc = metadata(cfg);
    if (!o.summary.is_null()) doc["summary"] = o.summary;
    doc["rows"] = table_json(o.table);
    for (const auto& [name, t] : o.extras) doc[name] = table_json(t);
    const std::string text = doc.dump(2) + "\n";
    if (cfg.out_dir.empty()) {
      out << text;
    } else {
      std::error_code ec;
      fs::create_directories(cfg.out_dir, ec);
      if (ec) throw std::runtime_error("cannot create '" + cfg.out_dir + "': " + ec.message());
      write_file(fs::path(cfg.out_dir) / (o.stem + ".json"), text);
      out << (fs::path(cfg.out_dir) / (o.stem + ".json")).string() << "\n";
    }
    return;
  }
  if (cfg.out_dir.empty()) {
    write_csv(out, cfg, o.table, o.summary);
    for (const auto& [name, t] : o.extras) {
      out << "\n# table=" << name << "\n";
      write_csv(out, cfg, t, Json());
    }
    return;
  }
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + cfg.out_dir + "': " + ec.message());
  const fs::path dir(cfg.out_dir);
  std::ostringstream os;
  write_csv(os, cfg, o.table, Json());
  write_file(dir / (o.stem + ".csv"), os.str());
  out << (dir / (o.stem + ".csv")).string() << "\n";
  if (!o.summary.is_null()) {
    Json doc = metadata(cfg);
    doc["summary"] = o.summary;
    write_file(dir / (o.summary_stem + ".json"), doc.dump(2) + "\n");
    out << (dir / (o.summary_stem + ".json")).string() << "\n";
  }
  for (const auto& [name, t] : o.extras) {
    std::ostringstream es;
    write_csv(es, cfg, t, Json());
    write_file(dir / (name + ".csv"), es.str());
    out << (dir / (name + ".csv")).string() << "\n";
  }
}

// ---------------------------------------------------------------- workers

template <class T, class F>
std::vector<T> parallel_map(std::size_t count, int jobs, F f) {
  std::vector<T> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct Cell {
  CellResult result;
  std::string status;
};

Cell evaluate_safe(const ModelParams& p, const RunConfig& cfg) {
  Cell c;
  try {
    c.result = evaluate_cell(p, cfg.f_plus, cfg.price, cfg.branch_cap);
    if (c.result.exists) {
      c.status = "ok";
    } else if (!c.result.a3_levels.empty()) {
      c.status = "no_measure";
    } else {
      c.status = "degenerate";
    }
  } catch (const BranchExplosion&) {
    c.result = CellResult{};
    c.result.params = p;
    c.status = "branch_explosion";
  }
  return c;
}

// Grid in deterministic order: alpha, then gamma, then q.
std::vector<ModelParams> grid(const RunConfig& cfg) {
  std::vector<ModelParams> out;
  for (double a : cfg.alpha.values()) {
    for (double g : cfg.gamma.values()) {
      for (double q : cfg.q.values()) {
        ModelParams p = cfg.params;
        p.alpha = a;
        p.gamma = g;
        p.q = q;
        out.push_back(p);
      }
    }
  }
  return out;
}

std::vector<Cell> evaluate_grid(const RunConfig& cfg, const std::vector<ModelParams>& cells) {
  return parallel_map<Cell>(cells.size(), cfg.jobs, [&](std::size_t i) { return evaluate_safe(cells[i], cfg); });
}

Json stats_json(const MeasureStats& s) {
  Json j;
  j["mode"] = s.global_mode;
  j["mode_tie"] = s.mode_tie;
  j["mean"] = s.mean;
  j["mass5"] = s.mode_mass_5;
  j["mode_list"] = s.mode_list;
  return j;
}

Json class_counts(const Classification& c) {
  Json j;
  for (Attractor a : {Attractor::A1, Attractor::A2, Attractor::A3, Attractor::A4}) {
    j[std::string(to_string(a))] = c.levels_in(a).size();
  }
  return j;
}

// ---------------------------------------------------------------- commands

void run_kernel(const RunConfig& cfg, std::ostream& out) {
  const TransitionKernel k(cfg.params);
  Output o;
  o.stem = "kernel";
  o.table.columns = {"i", "stay_plus", "stay_minus", "p_pp", "p_pm", "p_mm", "p_mp", "e_plus"};
  for (int i = 0; i <= k.n(); ++i) {
    const LevelProbs p = k.probs(i);
    o.table.rows.push_back({i, k.stay_plus(i), k.stay_minus(i), p.pp, p.pm, p.mm, p.mp, k.e_plus(i)});
  }
  emit(cfg, out, o);
}

void run_classify(const RunConfig& cfg, std::ostream& out) {
  const TransitionKernel k(cfg.params);
  const Classification c = classify(k);
  Output o;
  o.stem = "classify";
  o.summary_stem = "classify_summary";
  o.table.columns = {"i", "e_plus", "in_B", "in_C", "class"};
  for (int i = 0; i <= k.n(); ++i) {
    o.table.rows.push_back({i, k.e_plus(i), static_cast<bool>(c.in_b[i]), static_cast<bool>(c.in_c[i]),
                            std::string(to_string(c.cls[i]))});
  }
  o.summary["counts"] = class_counts(c);
  o.summary["a2_levels"] = c.levels_in(Attractor::A2);
  o.summary["a3_levels"] = c.levels_in(Attractor::A3);
  emit(cfg, out, o);
}

void run_measure(const RunConfig& cfg, std::ostream& out) {
  const TransitionKernel k(cfg.params);
  const Classification c = classify(k);
  const std::vector<int> a2 = c.levels_in(Attractor::A2);
  Output o;
  o.stem = "measure";
  o.summary_stem = "measure_summary";
  o.table.columns = {"branch", "level", "pi"};
  Json& s = o.summary;
  s["exists"] = false;
  s["unique"] = a2.empty();
  s["a2_levels"] = a2;
  s["a3_levels"] = c.levels_in(Attractor::A3);
  s["branches"] = Json::array();
  if (c.any(Attractor::A3)) {
    emit(cfg, out, o);
    return;
  }
  if (static_cast<int>(a2.size()) > cfg.branch_cap) {
    throw BranchExplosion(std::to_string(a2.size()) + " A2 levels exceed the branch cap");
  }
  bool first = true;
  for (unsigned long long b = 0; b < (1ULL << a2.size()); ++b) {
    const std::vector<int> signs = branch_signs(a2.size(), b);
    Json br;
    br["index"] = b;
    br["signs"] = signs;
    std::vector<double> pi;
    try {
      pi = invariant_measure(k, c, signs).pi;
      br["method"] = "product";
    } catch (const DegenerateChain& e) {
      const auto solved = oracle::stationary_solve(oracle::build_chain(k, c, signs));
      br["method"] = "dense";
      br["degenerate_level"] = e.level();
      Json classes = Json::array();
      for (const auto& [lo, hi] : solved.closed_classes) classes.push_back({lo, hi});
      br["closed_classes"] = classes;
      pi = solved.pi;
    }
    if (pi.empty()) {
      br["exists"] = false;
      s["branches"].push_back(br);
      continue;
    }
    br["exists"] = true;
    const MeasureStats st = measure_stats(pi);
    br["stats"] = stats_json(st);
    if (first) {
      s["exists"] = true;
      s["mode"] = st.global_mode;
      s["mean"] = st.mean;
      s["mass5"] = st.mode_mass_5;
      first = false;
    }
    s["branches"].push_back(br);
    for (int l = 0; l <= k.n(); ++l) o.table.rows.push_back({b, l, pi[l]});
  }
  emit(cfg, out, o);
}

void run_oracle(const RunConfig& cfg, std::ostream& out) {
  const TransitionKernel k(cfg.params);
  const Classification c = classify(k);
  const std::vector<int> a2 = c.levels_in(Attractor::A2);
  if (a2.size() > 62 || static_cast<unsigned long long>(cfg.branch) >= (1ULL << a2.size())) {
    throw UsageError("--branch out of range for " + std::to_string(a2.size()) + " A2 levels");
  }
  const std::vector<int> signs = branch_signs(a2.size(), static_cast<unsigned long long>(cfg.branch));
  const oracle::BirthDeathChain chain = oracle::build_chain(k, c, signs);
  const oracle::StationaryResult solved = oracle::stationary_solve(chain);
  std::vector<double> product;
  Output o;
  o.stem = "oracle";
  o.summary_stem = "oracle_summary";
  try {
    product = invariant_measure(k, c, signs).pi;
  } catch (const DegenerateChain& e) {
    o.summary["degenerate_level"] = e.level();
  }
  o.table.columns = {"level", "up", "down", "stay", "product_pi", "dense_pi", "abs_diff"};
  double worst = 0.0;
  for (int l = 0; l <= k.n(); ++l) {
    Json pf = product.empty() ? Json() : Json(product[l]);
    Json dn = solved.pi.empty() ? Json() : Json(solved.pi[l]);
    Json diff;
    if (!product.empty() && !solved.pi.empty()) {
      const double d = std::abs(product[l] - solved.pi[l]);
      worst = std::max(worst, d);
      diff = d;
    }
    o.table.rows.push_back({l, chain.up[l], chain.down[l], chain.stay[l], pf, dn, diff});
  }
  Json classes = Json::array();
  for (const auto& [lo, hi] : solved.closed_classes) classes.push_back({lo, hi});
  o.summary["signs"] = signs;
  o.summary["reducible"] = solved.reducible;
  o.summary["closed_classes"] = classes;
  o.summary["max_abs_diff"] = (product.empty() || solved.pi.empty()) ? Json() : Json(worst);
  emit(cfg, out, o);
}

void run_wealth(const RunConfig& cfg, std::ostream& out) {
  const std::vector<ModelParams> cells = grid(cfg);
  const std::vector<Cell> results = evaluate_grid(cfg, cells);
  Output o;
  o.stem = "wealth";
  o.table.columns = {"q", "status", "exists", "unique", "dW", "mode", "mean", "disagreement_count"};
  for (const Cell& c : results) {
    const CellResult& r = c.result;
    o.table.rows.push_back({r.params.q, c.status, r.exists, r.unique, r.exists ? Json(r.dw) : Json(),
                            r.exists ? Json(r.stats.global_mode) : Json(), r.exists ? Json(r.stats.mean) : Json(),
                            r.disagreements});
  }
  emit(cfg, out, o);
}

// Cells grouped by (alpha, gamma) in grid order.
std::vector<QStarResult> q_star_groups(const RunConfig& cfg, const std::vector<Cell>& results) {
  const std::size_t per = cfg.q.values().size();
  std::vector<QStarResult> groups;
  for (std::size_t start = 0; start < results.size(); start += per) {
    std::vector<CellResult> cells;
    for (std::size_t t = start; t < start + per; ++t) cells.push_back(results[t].result);
    groups.push_back(best_q(std::move(cells)));
  }
  return groups;
}

void run_qstar(const RunConfig& cfg, std::ostream& out) {
  const std::vector<ModelParams> cells = grid(cfg);
  const std::vector<Cell> results = evaluate_grid(cfg, cells);
  const auto groups = q_star_groups(cfg, results);
  Output o;
  o.stem = "qstar";
  o.table.columns = {"alpha", "gamma", "found", "q_star", "dw_star", "unique", "tie", "a2_levels", "branch",
                     "skipped"};
  for (const QStarResult& g : groups) {
    const ModelParams& p = g.cells.front().params;
    o.table.rows.push_back({p.alpha, p.gamma, g.found, g.found ? Json(g.q_star) : Json(),
                            g.found ? Json(g.dw_star) : Json(), g.found ? Json(g.unique) : Json(),
                            g.found ? Json(g.tie) : Json(), join_ints(g.a2_levels), join_ints(g.branch),
                            g.skipped.size()});
  }
  emit(cfg, out, o);
}

void run_sweep(const RunConfig& cfg, std::ostream& out) {
  const std::vector<ModelParams> cells = grid(cfg);
  const std::vector<Cell> results = evaluate_grid(cfg, cells);
  const auto groups = q_star_groups(cfg, results);
  const std::size_t per = cfg.q.values().size();
  Output o;
  o.stem = "sweep";
  o.table.columns = {"n",    "d",     "alpha", "gamma",     "q",        "status", "exists", "unique",
                     "a2_count", "a2_levels", "a3_count", "mode", "mean", "mass5",  "dW",     "branches",
                     "fallback", "disagreements", "q_star"};
  for (std::size_t t = 0; t < results.size(); ++t) {
    const Cell& c = results[t];
    const CellResult& r = c.result;
    const QStarResult& g = groups[t / per];
    o.table.rows.push_back({r.params.n, r.params.d, r.params.alpha, r.params.gamma, r.params.q, c.status,
                            r.exists, r.unique, r.a2_levels.size(), join_ints(r.a2_levels), r.a3_levels.size(),
                            r.exists ? Json(r.stats.global_mode) : Json(), r.exists ? Json(r.stats.mean) : Json(),
                            r.exists ? Json(r.stats.mode_mass_5) : Json(), r.exists ? Json(r.dw) : Json(),
                            r.branches, r.fallback, r.disagreements, g.found ? Json(g.q_star) : Json()});
  }
  emit(cfg, out, o);
}

std::vector<int> read_spin_file(const std::string& path, std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::vector<int> spins;
  std::string token;
  while (in >> token) {
    std::replace(token.begin(), token.end(), ',', ' ');
    std::istringstream parts(token);
    std::string piece;
    while (parts >> piece) {
      if (piece == "1" || piece == "+1") {
        spins.push_back(1);
      } else if (piece == "-1") {
        spins.push_back(-1);
      } else {
        throw UsageError("'" + path + "': spin values must be +1 or -1, got '" + piece + "'");
      }
    }
  }
  if (spins.size() != expected) {
    throw UsageError("'" + path + "' holds " + std::to_string(spins.size()) + " spins, expected " +
                     std::to_string(expected));
  }
  return spins;
}

void run_simulate(const RunConfig& cfg, std::ostream& out) {
  SimConfig sc;
  sc.params = cfg.params;
  sc.f_plus = cfg.f_plus;
  sc.initial_price = cfg.price;
  sc.initial_capital = cfg.capital;
  sc.epochs = cfg.epochs;
  sc.seed = cfg.seed;
  sc.eta1_init = cfg.init_eta1 == "plus" ? InitMode::AllPlus : InitMode::RandomUniform;
  if (cfg.init_eta2 == "random") {
    sc.eta2_init = InitMode::RandomUniform;
  } else if (cfg.init_eta2 == "plus") {
    sc.eta2_init = InitMode::AllPlus;
  } else if (cfg.init_eta2 == "minus") {
    sc.eta2_init = InitMode::Given;
    sc.eta2.assign(cfg.params.n + 1, -1);
  } else {
    sc.eta2_init = InitMode::Given;
    sc.eta2 = read_spin_file(cfg.init_eta2, static_cast<std::size_t>(cfg.params.n) + 1);
  }
  sc.record.paths = cfg.record_paths;
  sc.record.path_stride = cfg.path_stride;

  const Simulator sim(sc);
  const MarketState start = sim.initial_state();
  const Trajectory t = sim.run();

  Output o;
  o.stem = "histogram";
  o.summary_stem = "summary";
  o.table.columns = {"level", "count", "fraction"};
  const double total = static_cast<double>(cfg.epochs);
  for (std::size_t l = 0; l < t.histogram.size(); ++l) {
    o.table.rows.push_back({l, t.histogram[l], static_cast<double>(t.histogram[l]) / total});
  }
  Json& s = o.summary;
  s["rng_algorithm"] = std::string(kRngAlgorithm);
  s["seed"] = cfg.seed;
  s["epochs"] = cfg.epochs;
  s["mean_n_plus"] = t.mean_n_plus;
  s["final_n_plus"] = t.final_state.n_plus;
  s["final_price"] = t.final_state.price;
  s["final_market_wealth"] = t.final_state.market_wealth;
  s["tv_to_exact"] = Json();
  if (const Classification* c = sim.classification()) {
    s["classes"] = class_counts(*c);
    if (!c->any(Attractor::A3)) {
      // The A2 levels keep their initial expectation spins.
      std::vector<int> signs;
      for (int l : c->levels_in(Attractor::A2)) signs.push_back(start.eta2[l]);
      try {
        const InvariantMeasure m = invariant_measure(TransitionKernel(cfg.params), *c, signs);
        double tv = 0.0;
        for (std::size_t l = 0; l < m.pi.size(); ++l) {
          tv += std::abs(static_cast<double>(t.histogram[l]) / total - m.pi[l]);
        }
        s["tv_to_exact"] = 0.5 * tv;
      } catch (const DegenerateChain&) {
      }
    }
  }
  if (cfg.record_paths) {
    Table path;
    path.columns = {"epoch", "n_plus", "price", "aggregate_wealth"};
    for (const PathRow& r : t.path) path.rows.push_back({r.epoch, r.n_plus, r.price, r.market_wealth});
    o.extras.emplace_back("path", std::move(path));
  }
  emit(cfg, out, o);
}

}  // namespace

void run(const RunConfig& cfg, std::ostream& out) {
  if (cfg.subcommand == "kernel") return run_kernel(cfg, out);
  if (cfg.subcommand == "classify") return run_classify(cfg, out);
  if (cfg.subcommand == "measure") return run_measure(cfg, out);
  if (cfg.subcommand == "oracle") return run_oracle(cfg, out);
  if (cfg.subcommand == "wealth") return run_wealth(cfg, out);
  if (cfg.subcommand == "qstar") return run_qstar(cfg, out);
  if (cfg.subcommand == "sweep") return run_sweep(cfg, out);
  if (cfg.subcommand == "simulate") return run_simulate(cfg, out);
  throw UsageError("unknown subcommand '" + cfg.subcommand + "'");
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "imbal: usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    run(cfg, out);
  } catch (const UsageError& e) {
    err << "imbal: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    err << "imbal: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "imbal: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  out.flush();
  return kExitOk;
}

}  // namespace imbal::cli
