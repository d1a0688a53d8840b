#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smti/asbm.hpp"
#include "smti/audit.hpp"
#include "smti/bench.hpp"
#include "smti/generator.hpp"
#include "smti/gs_modified.hpp"
#include "smti/io.hpp"
#include "smti/oracle.hpp"

// Exit codes: 0 success, 1 violated property (audit findings, failed ratio),
// 2 usage or parse errors. All randomness flows through explicit --seed.

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

const char* kind_name(smti::EventKind k) {
  switch (k) {
    case smti::EventKind::Propose: return "propose";
    case smti::EventKind::AcceptUnsaturated: return "accept_unsaturated";
    case smti::EventKind::InsecureSwap: return "insecure_swap";
    case smti::EventKind::AcceptStrict: return "accept_strict";
    case smti::EventKind::Defer: return "defer";
    case smti::EventKind::AcceptFromLPrime: return "accept_from_lprime";
    case smti::EventKind::Reject: return "reject";
    case smti::EventKind::EvictDefer: return "evict_defer";
  }
  return "?";
}

// Trace lines: `EVENT kind m<i> w<j> [detail]`.
void print_trace(const std::vector<smti::TraceEvent>& trace, std::ostream& out) {
  for (const auto& e : trace) {
    out << "EVENT " << kind_name(e.kind) << " m" << e.u + 1 << " w" << e.w + 1;
    if (e.u2 >= 0) out << " displaced m" << e.u2 + 1;
    if (e.w2 >= 0) out << " satellite w" << e.w2 + 1;
    if (e.special) out << " special";
    if (e.from_lprime) out << " from_lprime";
    out << '\n';
  }
}

std::vector<int> parse_script(const std::string& s) {
  std::vector<int> script;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t off = item[0] == 'm' || item[0] == 'u' ? 1 : 0;
    script.push_back(std::stoi(item.substr(off)) - 1);
  }
  return script;
}

smti::SchedulePolicy parse_policy(const std::string& name) {
  if (name == "lifo") return smti::SchedulePolicy::LifoStack;
  if (name == "fifo") return smti::SchedulePolicy::FifoQueue;
  if (name == "random") return smti::SchedulePolicy::RandomOrder;
  if (name == "scripted") return smti::SchedulePolicy::Scripted;
  throw CLI::ValidationError("--policy", "unknown policy '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable matchings with ties and incomplete lists: "
               "3/2-approximation solver, audits, oracle, generator, bench"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "compute an approximate maximum stable matching");
  std::string in_path = "-", out_path, policy_name = "lifo", script_str;
  std::uint64_t seed = 0;
  bool b_matching = false, trace = false, literal_reloc = false, as_json = false;
  solve_cmd->add_option("--input", in_path, "instance file ('-' for stdin)");
  solve_cmd->add_option("--output", out_path, "matching file (default stdout)");
  solve_cmd->add_option("--policy", policy_name, "lifo|fifo|random|scripted");
  solve_cmd->add_option("--seed", seed, "tie-break / schedule seed (0 keeps input order)");
  solve_cmd->add_option("--script", script_str, "comma-separated proposer turns for --policy scripted");
  solve_cmd->add_flag("--b-matching", b_matching, "use the many-to-many engine");
  solve_cmd->add_flag("--trace", trace, "print proposal events to stderr");
  solve_cmd->add_flag("--literal-relocation", literal_reloc,
                      "b-matching: relocate responders on first match, not first saturation");
  solve_cmd->add_flag("--json", as_json, "emit the matching as JSON");

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "check a matching for blocking pairs and dangerous paths");
  std::string audit_inst, audit_match;
  bool audit_json = false;
  audit_cmd->add_option("--instance", audit_inst)->required();
  audit_cmd->add_option("--matching", audit_match)->required();
  audit_cmd->add_flag("--json", audit_json, "emit the report as JSON");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "exact maximum stable matching by enumeration");
  std::string oracle_inst;
  std::size_t edge_budget = smti::kDefaultEdgeBudget;
  oracle_cmd->add_option("--instance", oracle_inst)->required();
  oracle_cmd->add_option("--edge-budget", edge_budget, "refuse instances with more edges (default 20)");

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate a random instance");
  smti::GenParams gp;
  std::string gen_out;
  bool gen_worked = false;
  gen_cmd->add_option("--n-left", gp.n_left);
  gen_cmd->add_option("--n-right", gp.n_right);
  gen_cmd->add_option("--list-min", gp.list_min);
  gen_cmd->add_option("--list-max", gp.list_max);
  gen_cmd->add_option("--tie-density", gp.tie_density);
  gen_cmd->add_option("--cap-max-left", gp.cap_max_left);
  gen_cmd->add_option("--cap-max-right", gp.cap_max_right);
  gen_cmd->add_option("--seed", gp.seed);
  gen_cmd->add_option("--output", gen_out, "output file (default stdout)");
  gen_cmd->add_flag("--worked-example", gen_worked, "emit the built-in 4x4 worked example");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "scaling sweep with counters and wall time");
  std::string sizes_str = "10000,100000,1000000", csv_path;
  int reps = 3;
  smti::GenParams bp;
  bp.list_min = 2;
  bp.list_max = 6;
  bp.tie_density = 0.3;
  bench_cmd->add_option("--sizes", sizes_str, "comma-separated edge counts");
  bench_cmd->add_option("--reps", reps, "repetitions per size");
  bench_cmd->add_option("--tie-density", bp.tie_density);
  bench_cmd->add_option("--list-min", bp.list_min);
  bench_cmd->add_option("--list-max", bp.list_max);
  bench_cmd->add_option("--cap-max-left", bp.cap_max_left);
  bench_cmd->add_option("--cap-max-right", bp.cap_max_right);
  bench_cmd->add_option("--seed", bp.seed);
  bench_cmd->add_option("--csv", csv_path, "write the CSV here (default stdout)");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "run a scripted proposal sequence with tracing");
  std::string replay_in = "-", replay_script;
  std::uint64_t replay_seed = 0;
  replay_cmd->add_option("--input", replay_in, "instance file ('-' for stdin)");
  replay_cmd->add_option("--script", replay_script, "comma-separated proposer turns, e.g. m1,m2,m3")->required();
  replay_cmd->add_option("--seed", replay_seed, "tie-break seed (0 keeps input order)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (*solve_cmd) {
      smti::Instance inst = smti::parse_instance(read_input(in_path));
      smti::SolveOptions opt;
      opt.policy = parse_policy(policy_name);
      opt.seed = seed;
      opt.trace = trace;
      opt.literal_relocation = literal_reloc;
      if (!script_str.empty()) opt.script = parse_script(script_str);
      smti::SolveResult res = b_matching || !inst.unit_capacities()
                                  ? smti::solve_b(inst, opt)
                                  : smti::solve(inst, opt);
      if (trace) print_trace(res.trace, std::cerr);
      write_output(out_path, as_json ? smti::matching_to_json(res.matching).dump(2) + "\n"
                                     : smti::serialize_matching(res.matching));
      return 0;
    }
    if (*audit_cmd) {
      smti::Instance inst = smti::parse_instance(read_input(audit_inst));
      smti::Matching m = smti::parse_matching(read_input(audit_match), inst);
      smti::AuditReport r = smti::audit(inst, m);
      std::cout << (audit_json ? smti::audit_to_json(r).dump(2) + "\n"
                               : smti::serialize_audit(r));
      return r.stable() && r.dangerous_free() ? 0 : 1;
    }
    if (*oracle_cmd) {
      smti::Instance inst = smti::parse_instance(read_input(oracle_inst));
      smti::OracleResult r = smti::optimal_stable(inst, edge_budget);
      std::cout << "opt_size " << r.opt_size << '\n'
                << "stable_count " << r.stable_count << '\n'
                << "explored " << r.explored << '\n'
                << smti::serialize_matching(r.witness);
      return 0;
    }
    if (*gen_cmd) {
      smti::Instance inst = gen_worked ? smti::worked_example() : smti::random_instance(gp);
      write_output(gen_out, smti::serialize_instance(inst));
      return 0;
    }
    if (*bench_cmd) {
      std::vector<std::size_t> sizes;
      std::stringstream ss(sizes_str);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) sizes.push_back(std::stoull(item));
      auto rows = smti::run_scaling(sizes, bp, reps);
      std::cerr << smti::bench_table(rows);
      write_output(csv_path, smti::bench_csv(rows));
      return 0;
    }
    if (*replay_cmd) {
      smti::Instance inst = smti::parse_instance(read_input(replay_in));
      smti::SolveOptions opt;
      opt.policy = smti::SchedulePolicy::Scripted;
      opt.seed = replay_seed;
      opt.script = parse_script(replay_script);
      opt.trace = true;
      smti::SolveResult res = inst.unit_capacities() ? smti::solve(inst, opt)
                                                     : smti::solve_b(inst, opt);
      print_trace(res.trace, std::cout);
      std::cout << smti::serialize_matching(res.matching);
      return 0;
    }
  } catch (const smti::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const smti::InvalidInstance& e) {
    std::cerr << "invalid instance: " << e.what() << '\n';
    return 2;
  } catch (const smti::InvalidMatching& e) {
    std::cerr << "invalid matching: " << e.what() << '\n';
    return 2;
  } catch (const smti::SizeLimitExceeded& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const smti::ScheduleError& e) {
    std::cerr << "schedule error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
