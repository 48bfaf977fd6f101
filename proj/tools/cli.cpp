#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "klsel/covers.hpp"
#include "klsel/engine.hpp"
#include "klsel/error.hpp"
#include "klsel/reconstruct.hpp"
#include "klsel/rules.hpp"
#include "klsel/stats.hpp"

namespace klsel::cli {

namespace {

// Bad option values that CLI11 cannot see, e.g. an over-long --bits.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct InputSource {
  std::string bits;
  std::string path;
  CLI::Option* bits_opt = nullptr;
  CLI::Option* path_opt = nullptr;

  void add_to(CLI::App* app) {
    bits_opt = app->add_option("--bits", bits, "Input bits inline");
    path_opt = app->add_option("--input", path, "Input bit file ('#' comments allowed)");
    bits_opt->excludes(path_opt);
  }
  bool given() const { return bits_opt->count() + path_opt->count() > 0; }
  BitString load() const {
    if (bits_opt->count()) {
      if (bits.size() > kMaxInlineBits) {
        throw UsageError("--bits is limited to " + std::to_string(kMaxInlineBits) +
                         " characters; use --input");
      }
      return BitString::parse(bits);
    }
    if (path_opt->count()) return BitString::parse(read_file(path));
    throw UsageError("one of --bits or --input is required");
  }
};

// One bit string per line; blank lines and '#' comments skipped.
std::vector<BitString> parse_string_list(const std::string& text) {
  std::vector<BitString> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(BitString::parse(line));
  }
  return out;
}

std::vector<BitString> parse_comma_list(const std::string& text) {
  std::vector<BitString> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(BitString::parse(item));
  return out;
}

SelectionRule load_rule(const std::string& text, std::ostream& err) {
  RuleSpec spec = RuleSpec::parse(text);
  for (const auto& w : spec.warnings()) err << "warning: " << w << "\n";
  return build_from_spec(spec);
}

SelectionRule load_bounded_rule(const std::string& text, std::ostream& err) {
  SelectionRule rule = load_rule(text, err);
  if (!rule.is_bounded()) throw Error("rule '" + text + "' is not bounded");
  return rule;
}

TableEnumerator load_enumerator(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
  return TableEnumerator::from_json(j);
}

void print_json(std::ostream& out, const nlohmann::ordered_json& j) { out << j.dump(2) << "\n"; }

// Union measure of a cover of partial strings over its own span.
Dyadic cover_measure(const PrefixSet& cover) {
  return measure_union_exact(cover.members(), cover.span());
}

std::vector<std::string> strs(const std::vector<BitString>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.str());
  return out;
}

std::vector<std::string> strs(const std::vector<PartialString>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.str());
  return out;
}

struct SelectArgs {
  std::string rule;
  InputSource input;
  std::size_t max_steps = 0;
  CLI::Option* max_steps_opt = nullptr;
  bool json = false;
};

int cmd_select(const SelectArgs& a, std::ostream& out, std::ostream& err) {
  SelectionRule rule = load_rule(a.rule, err);
  BitString input = a.input.load();
  std::size_t max_steps = a.max_steps_opt->count() ? a.max_steps : default_max_steps(input);
  SelectionTrace trace = run(rule, input, max_steps);
  if (a.json) {
    print_json(out, to_json(trace));
  } else {
    out << "q_star=" << trace.q_star.str() << " n_prefix=" << trace.n_prefix.str() << "\n";
    out << "steps=" << trace.steps() << " h_final=" << trace.h_final
        << " stop_reason=" << to_string(trace.stop_reason) << "\n";
  }
  return kExitOk;
}

struct ReconstructArgs {
  std::string rule;
  std::string sigma;
  std::string tau;
  std::size_t max_stages = 0;
  CLI::Option* max_stages_opt = nullptr;
  bool json = false;
};

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out, std::ostream& err) {
  SelectionRule rule = load_bounded_rule(a.rule, err);
  BitString sigma = BitString::parse(a.sigma);
  BitString tau = BitString::parse(a.tau);
  std::optional<std::size_t> limit;
  if (a.max_stages_opt->count()) limit = a.max_stages;
  ReconstructionOutcome r = reconstruct(rule, sigma, tau, limit);
  if (a.json) {
    nlohmann::ordered_json j;
    j["sigma"] = sigma.str();
    j["tau"] = tau.str();
    j["outcome"] = r.tag();
    j["result"] = r.result ? nlohmann::ordered_json(r.result->str()) : nlohmann::ordered_json();
    j["stages"] = r.stages_used;
    print_json(out, j);
  } else {
    if (r.result) out << r.result->str() << "\n";
    out << r.tag() << "\n";
  }
  if (!r.converged()) {
    err << "reconstruction diverged: " << r.tag() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}

struct CoverArgs {
  std::string mode = "pair";
  std::string enum_path;
  std::string rule;
  std::size_t i = 1;
  std::size_t s = 2;
  std::size_t sigma_bound = 4;
  std::string strings;
  std::string strings_path;
  std::size_t depth = 16;
  bool json = false;
};

void print_verdict(std::ostream& out, const Dyadic& measure, const Dyadic& bound, bool pass) {
  out << "measure=" << measure.str() << " bound=" << bound.str() << "\n";
  out << (pass ? "PASS" : "FAIL") << "\n";
}

int cover_pair(const CoverArgs& a, std::ostream& out) {
  TableEnumerator e = load_enumerator(a.enum_path);
  std::vector<BitString> cover = build_cover_pair(e, a.i, a.s);
  Dyadic measure = measure_union_exact(std::span<const BitString>(cover), 2 * a.s);
  Dyadic bound = Dyadic::pow2_neg(static_cast<std::uint32_t>(a.i));
  bool pass = measure <= bound;
  if (a.json) {
    nlohmann::ordered_json j;
    j["mode"] = "pair";
    j["i"] = a.i;
    j["s"] = a.s;
    j["cover"] = strs(cover);
    j["measure"] = measure.str();
    j["bound"] = bound.str();
    j["pass"] = pass;
    print_json(out, j);
  } else {
    out << "cover size=" << cover.size() << "\n";
    print_verdict(out, measure, bound, pass);
  }
  return pass ? kExitOk : kExitDomain;
}

int cover_main(const CoverArgs& a, std::ostream& out, std::ostream& err) {
  TableEnumerator e = load_enumerator(a.enum_path);
  SelectionRule rule = load_bounded_rule(a.rule, err);
  MainCover mc = build_cover_main(e, rule, a.i, a.s, a.sigma_bound);
  Dyadic measure = cover_measure(mc.cover);
  Dyadic bound = Dyadic::pow2_neg(static_cast<std::uint32_t>(a.i));
  bool pass = verify_cover_bound(mc.cover, a.i, mc.cover.span());
  if (a.json) {
    nlohmann::ordered_json j;
    j["mode"] = "main";
    j["rule"] = rule.name();
    j["i"] = a.i;
    j["s"] = a.s;
    j["sigma_bound"] = a.sigma_bound;
    j["note"] = "complete only for |sigma| <= sigma_bound";
    j["cover"] = strs(mc.cover.members());
    auto members = nlohmann::ordered_json::array();
    for (const auto& m : mc.members) {
      members.push_back({{"alpha", m.alpha.str()}, {"sigma", m.sigma.str()}, {"tau", m.tau.str()}});
    }
    j["members"] = std::move(members);
    j["measure"] = measure.str();
    j["bound"] = bound.str();
    j["max_branch_sum"] = mc.max_branch_sum.str();
    j["weighted_initial_sum"] = mc.weighted_initial_sum.str();
    j["initial_union_prefix_free"] = mc.initial_union_prefix_free;
    j["pass"] = pass;
    print_json(out, j);
  } else {
    out << "cover size=" << mc.cover.size() << " (|sigma| <= " << a.sigma_bound << ")\n";
    out << "max_branch_sum=" << mc.max_branch_sum.str()
        << " weighted_initial_sum=" << mc.weighted_initial_sum.str()
        << " initial_union_prefix_free=" << (mc.initial_union_prefix_free ? "yes" : "no") << "\n";
    print_verdict(out, measure, bound, pass);
  }
  return pass ? kExitOk : kExitDomain;
}

int cover_transfer(const CoverArgs& a, std::ostream& out, std::ostream& err) {
  SelectionRule rule = load_rule(a.rule, err);
  std::vector<BitString> sources;
  if (!a.strings_path.empty()) {
    sources = parse_string_list(read_file(a.strings_path));
  } else {
    sources = parse_comma_list(a.strings);
  }
  TransferCover tc = transfer_cover_subseq(rule, sources, a.depth);
  for (const auto& w : tc.warnings) err << "warning: " << w << "\n";
  bool pass = true;
  auto per_source = nlohmann::ordered_json::array();
  for (const auto& src : tc.sources) {
    Dyadic bound = measure_of(src.sigma);
    bool ok = src.measure <= bound;
    pass = pass && ok;
    if (a.json) {
      per_source.push_back({{"sigma", src.sigma.str()},
                            {"alphas", strs(src.alphas)},
                            {"measure", src.measure.str()},
                            {"bound", bound.str()},
                            {"incomplete", src.incomplete},
                            {"divergent", src.divergent},
                            {"pass", ok}});
    } else {
      out << "sigma=" << src.sigma.str() << " alphas=" << src.alphas.size()
          << " measure=" << src.measure.str() << " bound=" << bound.str() << " "
          << (ok ? "PASS" : "FAIL") << "\n";
    }
  }
  if (a.json) {
    nlohmann::ordered_json j;
    j["mode"] = "transfer";
    j["rule"] = rule.name();
    j["depth"] = a.depth;
    j["sources"] = std::move(per_source);
    j["warnings"] = tc.warnings;
    j["pass"] = pass;
    print_json(out, j);
  } else {
    out << (pass ? "PASS" : "FAIL") << "\n";
  }
  return pass ? kExitOk : kExitDomain;
}

int cmd_cover(const CoverArgs& a, std::ostream& out, std::ostream& err) {
  if (a.mode == "pair" || a.mode == "main") {
    if (a.enum_path.empty()) throw UsageError("--enum is required for --mode " + a.mode);
  }
  if ((a.mode == "main" || a.mode == "transfer") && a.rule.empty()) {
    throw UsageError("--rule is required for --mode " + a.mode);
  }
  if (a.mode == "pair") return cover_pair(a, out);
  if (a.mode == "main") return cover_main(a, out, err);
  if (a.strings.empty() == a.strings_path.empty()) {
    throw UsageError("--mode transfer needs exactly one of --strings or --strings-file");
  }
  return cover_transfer(a, out, err);
}

struct StatsArgs {
  std::string rule;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::size_t length = std::size_t{1} << 20;
  std::string input_path;
  bool negative_control = false;
  bool json = false;
};

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream& err) {
  SelectionRule rule = load_bounded_rule(a.rule, err);
  BitString input;
  if (!a.input_path.empty()) {
    input = BitString::parse(read_file(a.input_path));
  } else {
    if (!a.seed_opt->count()) throw UsageError("--seed is required to generate a stream");
    input = a.negative_control ? duplicated_stream(a.seed, a.length) : prng_stream(a.seed, a.length);
  }
  StatsReport report = independence_battery(rule, input);
  report.seed = a.seed;
  if (a.json) {
    print_json(out, report.to_json());
  } else {
    out << report.to_text();
  }
  for (const auto& e : report.errors) err << "error: " << e << "\n";
  return report.pass() ? kExitOk : kExitDomain;
}

struct VerifyArgs {
  std::string rule;
  InputSource input;
  std::string trace_path;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  SelectionRule rule = load_rule(a.rule, err);
  BitString input = a.input.load();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(a.trace_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("'" + a.trace_path + "' is not valid JSON: " + e.what());
  }
  bool ok = replay_verify(trace_from_json(j), rule, input);
  out << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitDomain;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounded Kolmogorov-Loveland selection toolkit", "klsel"};
  app.require_subcommand(1);

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "Run a selection rule over an input");
  select->add_option("--rule", sel.rule, "Rule spec")->required();
  sel.input.add_to(select);
  sel.max_steps_opt = select->add_option("--max-steps", sel.max_steps, "Step budget");
  select->add_flag("--json", sel.json, "Emit the JSON trace");

  ReconstructArgs rec;
  auto* recon = app.add_subcommand("reconstruct", "Evaluate S(sigma, tau)");
  recon->add_option("--rule", rec.rule, "Bounded rule spec")->required();
  recon->add_option("--sigma", rec.sigma, "Nonselected bits")->required();
  recon->add_option("--tau", rec.tau, "Selected bits")->required();
  rec.max_stages_opt = recon->add_option("--max-stages", rec.max_stages, "Stage budget");
  recon->add_flag("--json", rec.json, "Emit JSON");

  CoverArgs cov;
  auto* cover = app.add_subcommand("cover", "Build a cover and check its measure bound");
  cover->add_option("--mode", cov.mode, "pair | main | transfer")
      ->check(CLI::IsMember({"pair", "main", "transfer"}));
  cover->add_option("--enum", cov.enum_path, "Enumerator table (JSON)");
  cover->add_option("--rule", cov.rule, "Rule spec (main, transfer)");
  cover->add_option("--i", cov.i, "Level: bound is 2^-i")->check(CLI::Range(0, 62));
  cover->add_option("--s", cov.s, "Length bound on tau")->check(CLI::Range(0, 16));
  cover->add_option("--sigma-bound", cov.sigma_bound, "Length bound on sigma (main)")
      ->check(CLI::Range(0, 16));
  cover->add_option("--strings", cov.strings, "Comma-separated source strings (transfer)");
  cover->add_option("--strings-file", cov.strings_path, "Source strings, one per line (transfer)");
  cover->add_option("--depth", cov.depth, "Simulation depth (transfer)");
  cover->add_flag("--json", cov.json, "Emit JSON");

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Independence battery on Q* and N");
  stats->add_option("--rule", st.rule, "Bounded rule spec")->required();
  st.seed_opt = stats->add_option("--seed", st.seed, "Stream seed");
  stats->add_option("--length", st.length, "Stream length");
  stats->add_option("--input", st.input_path, "Input bit file instead of a generated stream");
  stats->add_flag("--negative-control", st.negative_control,
                  "Use a stream whose odd bits repeat the preceding even bit");
  stats->add_flag("--json", st.json, "Emit JSON");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Replay a JSON trace against a rule and input");
  verify->add_option("--rule", ver.rule, "Rule spec")->required();
  ver.input.add_to(verify);
  verify->add_option("--trace", ver.trace_path, "Trace JSON from select --json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (select->parsed()) return cmd_select(sel, out, err);
    if (recon->parsed()) return cmd_reconstruct(rec, out, err);
    if (cover->parsed()) return cmd_cover(cov, out, err);
    if (stats->parsed()) return cmd_stats(st, out, err);
    if (verify->parsed()) return cmd_verify(ver, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace klsel::cli
