// Command-line front end: single protocol runs, branch tables, parameter
// sweeps and the figure presets, all emitting deterministic CSV.

#include "qrep/protocol.hpp"
#include "qrep/sweep.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_invariant = 2;

// "v", "v1,v2,..." or "lo:hi" (resolved to `points` values)
std::vector<double> parse_axis(const std::string& text, int points) {
  std::vector<double> values;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const double lo = std::stod(text.substr(0, colon));
    const double hi = std::stod(text.substr(colon + 1));
    if (points < 1) throw std::invalid_argument("points must be >= 1");
    for (int i = 0; i < points; ++i)
      values.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
    return values;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    if (item.empty()) throw std::invalid_argument("empty value in axis '" + text + "'");
    values.push_back(std::stod(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

double parse_single(const std::string& text, const char* name) {
  const auto values = parse_axis(text, 1);
  if (values.size() != 1)
    throw std::invalid_argument(std::string(name) + " takes a single value here");
  return values.front();
}

// plain key=value configuration file; '#' starts a comment line
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line without '=': " + line);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

struct CommonOpts {
  std::string omega_m = "0.5";
  std::string g = "2";
  std::string lambda1_t = "1";
  std::string lambda1_tau = "2";
  std::string quantity = "E14";
  int case_id = 1;
  int points = 400;
  int threads = 1;
  std::string output;
  std::string config_path;
  bool check = false;
};

// registers the flags a subcommand accepts and remembers the CLI option
// handles so config-file values only apply where no flag was given
struct OptionSet {
  CLI::Option* omega_m = nullptr;
  CLI::Option* g = nullptr;
  CLI::Option* lambda1_t = nullptr;
  CLI::Option* lambda1_tau = nullptr;
  CLI::Option* quantity = nullptr;
  CLI::Option* case_id = nullptr;
  CLI::Option* points = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* output = nullptr;
};

void apply_config(const CommonOpts& opts, const OptionSet& set, CommonOpts& out) {
  if (opts.config_path.empty()) return;
  const auto kv = read_config(opts.config_path);
  auto pull = [&](const char* key, CLI::Option* opt, auto& field) {
    const auto it = kv.find(key);
    if (it == kv.end()) return;
    if (opt != nullptr && opt->count() > 0) return;  // flags override the file
    if constexpr (std::is_same_v<std::decay_t<decltype(field)>, std::string>) {
      field = it->second;
    } else {
      field = std::stoi(it->second);
    }
  };
  pull("omega_m", set.omega_m, out.omega_m);
  pull("g", set.g, out.g);
  pull("lambda1_t", set.lambda1_t, out.lambda1_t);
  pull("lambda1_tau", set.lambda1_tau, out.lambda1_tau);
  pull("quantity", set.quantity, out.quantity);
  pull("case", set.case_id, out.case_id);
  pull("points", set.points, out.points);
  pull("threads", set.threads, out.threads);
  pull("output", set.output, out.output);
}

std::string effective_config_line(const CommonOpts& o, bool with_tau, bool with_series) {
  std::ostringstream s;
  if (with_series) s << "quantity=" << o.quantity << " case=" << o.case_id << " ";
  s << "lambda1_t=" << o.lambda1_t;
  if (with_tau) s << " lambda1_tau=" << o.lambda1_tau;
  s << " omega_m=" << o.omega_m << " g=" << o.g << " points=" << o.points
    << " threads=" << o.threads;
  return s.str();
}

// opens the output file or falls back to stdout
class OutputStream {
 public:
  explicit OutputStream(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw std::invalid_argument("cannot write output file '" + path + "'");
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print_branch_table(std::ostream& out, const std::vector<qrep::BranchRecord>& branches) {
  out << "stage,case_id,outcome,conditional_probability,cumulative_probability,"
         "classification,E,P\n";
  for (const auto& rec : branches) {
    out << qrep::to_string(rec.stage) << ',';
    if (rec.case_id > 0) out << rec.case_id;
    out << ',' << qrep::format_spec(rec.outcome_label) << ','
        << format_g17(rec.conditional_probability) << ','
        << format_g17(rec.cumulative_probability) << ',' << qrep::to_string(rec.classification)
        << ',';
    if (rec.pair_summary) out << format_g17(rec.pair_summary->e);
    out << ',';
    if (rec.pair_summary) out << format_g17(rec.pair_summary->p);
    out << '\n';
  }
}

int report_checks(const std::vector<qrep::InvariantCheck>& checks) {
  bool all_pass = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name
              << " (deviation " << format_g17(c.deviation) << ")\n";
    all_pass = all_pass && c.pass;
  }
  return all_pass ? exit_ok : exit_invariant;
}

int run_stage_a_command(const CommonOpts& o) {
  const double omega_m = parse_single(o.omega_m, "--omega-m");
  const double g = parse_single(o.g, "--g");
  const double t = parse_single(o.lambda1_t, "--lambda1-t");
  const auto params = qrep::ModelParams::simplified(1.0, g, omega_m);
  const auto sa = qrep::stage_a_coefficients(params, t);
  const auto branches = qrep::run_stage_a(params, t);

  std::cout << "swapping stage at lambda1_t=" << t << " omega_m=" << omega_m << " g=" << g
            << "\namplitudes:\n";
  for (std::size_t k = 0; k < sa.a.size(); ++k)
    std::cout << "  a" << (k + 1) << " = " << format_g17(sa.a[k].real()) << " "
              << (sa.a[k].imag() < 0 ? "- " : "+ ")
              << format_g17(std::abs(sa.a[k].imag())) << "i\n";

  OutputStream out(o.output);
  print_branch_table(out.get(), branches);

  if (o.check) {
    double sum = 0.0;
    for (const auto& rec : branches) sum += rec.conditional_probability;
    std::vector<qrep::InvariantCheck> checks;
    checks.push_back({"branch probabilities sum to 1", std::abs(sum - 1.0),
                      std::abs(sum - 1.0) <= 1e-10});
    double norm = 0.0;
    for (const auto& c : sa.a) norm += std::norm(c);
    checks.push_back({"amplitudes are normalized", std::abs(norm - 1.0),
                      std::abs(norm - 1.0) <= 1e-10});
    return report_checks(checks);
  }
  return exit_ok;
}

int run_protocol_command(const CommonOpts& o) {
  const double omega_m = parse_single(o.omega_m, "--omega-m");
  const double g = parse_single(o.g, "--g");
  const double t = parse_single(o.lambda1_t, "--lambda1-t");
  const double tau = parse_single(o.lambda1_tau, "--lambda1-tau");
  const auto params = qrep::ModelParams::simplified(1.0, g, omega_m);
  const auto tree = qrep::run_full_protocol(params, t, tau);

  std::cout << "protocol run at lambda1_t=" << t << " lambda1_tau=" << tau
            << " omega_m=" << omega_m << " g=" << g << "\n\nfinal pair (1,8) results:\n";
  for (const auto& [key, summary] : tree.final_results)
    std::cout << "  " << key << "  E=" << format_g17(summary.e)
              << "  P=" << format_g17(summary.p) << "\n";
  std::cout << "\nsymmetry report: max deviation "
            << format_g17(tree.symmetry.max_deviation())
            << (tree.symmetry.all_within(1e-10) ? " [OK]" : " [VIOLATED]") << "\n\n";

  OutputStream out(o.output);
  print_branch_table(out.get(), tree.branches);

  const auto checks = qrep::run_invariant_checks(tree);
  if (o.check) return report_checks(checks);
  for (const auto& c : checks)
    if (!c.pass) {
      std::cerr << "invariant check failed: " << c.name << " (deviation "
                << format_g17(c.deviation) << ")\n";
      return exit_invariant;
    }
  return exit_ok;
}

int run_sweep_command(const CommonOpts& o) {
  qrep::SweepConfig config;
  qrep::SweepSeries series;
  series.quantity = qrep::quantity_from_string(o.quantity);
  if (qrep::is_pair18_quantity(series.quantity)) series.case_id = o.case_id;
  if (series.quantity == qrep::Quantity::tree)
    throw std::invalid_argument("quantity 'tree' is served by the protocol command");
  config.series = {series};
  config.omega_m = parse_axis(o.omega_m, o.points);
  config.g = parse_axis(o.g, o.points);
  config.lambda1_t = parse_axis(o.lambda1_t, o.points);
  if (qrep::is_pair18_quantity(series.quantity))
    config.lambda1_tau = parse_axis(o.lambda1_tau, o.points);
  config.threads = o.threads;

  OutputStream out(o.output);
  qrep::run_sweep(config, out.get(),
                  {effective_config_line(o, qrep::is_pair18_quantity(series.quantity), true)});
  return exit_ok;
}

int run_figure_command(const std::string& name, const CommonOpts& o) {
  auto groups = qrep::figure_preset(name, o.points);
  for (auto& g : groups) g.threads = o.threads;
  OutputStream out(o.output);
  std::ostringstream comment;
  comment << "preset " << name << " points=" << o.points << " threads=" << o.threads;
  qrep::run_sweep_groups(groups, out.get(), {comment.str()});
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum repeater over optomechanical and optical cavities"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::map<const CLI::App*, OptionSet> option_sets;

  auto add_physics = [&](CLI::App* cmd, bool with_tau) {
    OptionSet set;
    set.omega_m = cmd->add_option("--omega-m", opts.omega_m,
                                  "mechanical frequency omega_m/lambda1 (value, list or lo:hi)");
    set.g = cmd->add_option("--g", opts.g, "optomechanical coupling g/lambda1");
    set.lambda1_t = cmd->add_option("--lambda1-t", opts.lambda1_t, "swapping interaction time");
    if (with_tau)
      set.lambda1_tau =
          cmd->add_option("--lambda1-tau", opts.lambda1_tau, "total time at the final stage");
    cmd->add_option("--config", opts.config_path, "key=value configuration file");
    set.output = cmd->add_option("--output", opts.output, "output CSV path (default stdout)");
    return set;
  };

  auto* stage_a_cmd = app.add_subcommand("stage-a", "swapping-stage amplitudes and branches");
  option_sets[stage_a_cmd] = add_physics(stage_a_cmd, false);
  stage_a_cmd->add_flag("--check", opts.check, "run the invariant checks");

  auto* protocol_cmd = app.add_subcommand("protocol", "full run with branch table");
  option_sets[protocol_cmd] = add_physics(protocol_cmd, true);
  protocol_cmd->add_flag("--check", opts.check, "run the invariant checks");

  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate one quantity over a parameter grid");
  {
    OptionSet set = add_physics(sweep_cmd, true);
    set.quantity = sweep_cmd->add_option("--quantity", opts.quantity,
                                         "E14, P14_1, P14_2, E18 or P18");
    set.case_id = sweep_cmd->add_option("--case", opts.case_id, "initial-state case (1..4)");
    set.points = sweep_cmd->add_option("--points", opts.points, "points per lo:hi range");
    set.threads = sweep_cmd->add_option("--threads", opts.threads, "worker threads");
    option_sets[sweep_cmd] = set;
  }

  std::vector<CLI::App*> figure_cmds;
  for (const char* name : {"fig2", "fig3", "fig4", "fig5", "fig6"}) {
    auto* cmd = app.add_subcommand(name, std::string("preset parameter study ") + name);
    OptionSet set;
    set.points = cmd->add_option("--points", opts.points, "points on the time axis");
    set.threads = cmd->add_option("--threads", opts.threads, "worker threads");
    set.output = cmd->add_option("--output", opts.output, "output CSV path (default stdout)");
    cmd->add_option("--config", opts.config_path, "key=value configuration file");
    option_sets[cmd] = set;
    figure_cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return exit_usage;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    apply_config(opts, option_sets[active], opts);

    if (active == stage_a_cmd) return run_stage_a_command(opts);
    if (active == protocol_cmd) return run_protocol_command(opts);
    if (active == sweep_cmd) return run_sweep_command(opts);
    for (auto* cmd : figure_cmds)
      if (active == cmd) return run_figure_command(cmd->get_name(), opts);
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
}
