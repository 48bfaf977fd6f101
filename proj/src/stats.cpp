#include "klsel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "klsel/engine.hpp"
#include "klsel/error.hpp"

namespace klsel {

namespace {

void require_length(const BitString& bits, const char* what) {
  if (bits.size() < 100) {
    throw Error(std::string(what) + ": need at least 100 bits, got " +
                std::to_string(bits.size()));
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void add_z_entries(StatsReport& report, const std::string& label, const BitString& bits) {
  const std::string limit = "|z| <= " + format_g(kZLimit);
  double mz = monobit_z(bits);
  report.entries.push_back(
      {"monobit(" + label + ")", mz, limit, std::fabs(mz) <= kZLimit, false, ""});
  auto rz = runs_z(bits);
  if (rz) {
    report.entries.push_back(
        {"runs(" + label + ")", *rz, limit, std::fabs(*rz) <= kZLimit, false, ""});
  } else {
    report.entries.push_back(
        {"runs(" + label + ")", 0, limit, false, true, "skipped: frequency precondition"});
  }
}

}  // namespace

BitString prng_stream(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  BitString out;
  out.reserve(n);
  while (out.size() < n) {
    std::uint64_t word = gen();
    for (int k = 0; k < 64 && out.size() < n; ++k) out.push_back(((word >> k) & 1) != 0);
  }
  return out;
}

BitString duplicated_stream(std::uint64_t seed, std::size_t n) {
  BitString base = prng_stream(seed, (n + 1) / 2);
  BitString out;
  out.reserve(n);
  for (std::size_t k = 0; out.size() < n; ++k) {
    out.push_back(base[k]);
    if (out.size() < n) out.push_back(base[k]);
  }
  return out;
}

double monobit_z(const BitString& bits) {
  require_length(bits, "monobit_z");
  const double n = static_cast<double>(bits.size());
  return (2.0 * static_cast<double>(bits.ones()) - n) / std::sqrt(n);
}

std::optional<double> runs_z(const BitString& bits) {
  require_length(bits, "runs_z");
  const double n = static_cast<double>(bits.size());
  const double n1 = static_cast<double>(bits.ones());
  const double n0 = n - n1;
  const double p = n1 / n;
  if (!(p > 0.4 && p < 0.6)) return std::nullopt;
  std::size_t runs = 1;
  for (std::size_t k = 1; k < bits.size(); ++k) runs += bits[k] != bits[k - 1];
  const double mu = 2.0 * n0 * n1 / n + 1.0;
  const double var = 2.0 * n0 * n1 * (2.0 * n0 * n1 - n) / (n * n * (n - 1.0));
  return (static_cast<double>(runs) - mu) / std::sqrt(var);
}

Chi2Result block_independence_chi2(const BitString& x, const BitString& y,
                                   std::size_t block_len) {
  if (block_len < 1 || block_len > 4) {
    throw Error("block_independence_chi2: block length must be in 1..4");
  }
  const std::size_t len = std::min(x.size(), y.size());
  const std::size_t need = std::size_t{100} << (2 * block_len);
  if (len < need) {
    throw Error("block_independence_chi2: insufficient data, need " + std::to_string(need) +
                " bits, got " + std::to_string(len));
  }
  const std::size_t cells = std::size_t{1} << block_len;
  const std::size_t blocks = len / block_len;
  std::vector<double> table(cells * cells, 0.0);
  std::vector<double> rows(cells, 0.0);
  std::vector<double> cols(cells, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t u = 0;
    std::size_t v = 0;
    for (std::size_t k = 0; k < block_len; ++k) {
      u = (u << 1) | (x[b * block_len + k] ? 1 : 0);
      v = (v << 1) | (y[b * block_len + k] ? 1 : 0);
    }
    table[u * cells + v] += 1;
    rows[u] += 1;
    cols[v] += 1;
  }

  Chi2Result out;
  out.dof = (cells - 1) * (cells - 1);
  out.blocks = blocks;
  out.degenerate = std::any_of(rows.begin(), rows.end(), [](double r) { return r == 0; }) ||
                   std::any_of(cols.begin(), cols.end(), [](double c) { return c == 0; });
  if (out.degenerate) return out;
  const double total = static_cast<double>(blocks);
  for (std::size_t u = 0; u < cells; ++u) {
    for (std::size_t v = 0; v < cells; ++v) {
      const double expected = rows[u] * cols[v] / total;
      const double d = table[u * cells + v] - expected;
      out.chi2 += d * d / expected;
    }
  }
  return out;
}

const Chi2Region& chi2_region(std::size_t dof) {
  for (const auto& r : kChi2Regions) {
    if (r.dof == dof) return r;
  }
  throw Error("no chi-square cutoffs for " + std::to_string(dof) + " degrees of freedom");
}

bool StatsReport::pass() const {
  if (!errors.empty()) return false;
  return std::all_of(entries.begin(), entries.end(),
                     [](const StatsEntry& e) { return e.skipped || e.pass; });
}

nlohmann::ordered_json StatsReport::to_json() const {
  nlohmann::ordered_json j;
  j["label"] = "illustration only: finite-sample tests cannot certify randomness";
  j["rule"] = rule;
  j["seed"] = seed;
  j["stream_length"] = stream_length;
  j["q_star_length"] = q_star_length;
  j["n_length"] = n_length;
  auto entries_json = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json item;
    item["test_name"] = e.test_name;
    // Fixed formatting keeps repeated reports byte-identical across platforms.
    item["statistic"] = format_double(e.statistic);
    item["threshold_description"] = e.threshold_description;
    item["pass"] = e.pass;
    item["skipped"] = e.skipped;
    if (!e.note.empty()) item["note"] = e.note;
    entries_json.push_back(std::move(item));
  }
  j["entries"] = std::move(entries_json);
  j["errors"] = errors;
  j["pass"] = pass();
  return j;
}

std::string StatsReport::to_text() const {
  std::string out;
  out += "rule " + rule + "  seed " + std::to_string(seed) + "  length " +
         std::to_string(stream_length) + "\n";
  out += "|Q*| = " + std::to_string(q_star_length) + "  |N| = " + std::to_string(n_length) +
         "\n";
  for (const auto& e : entries) {
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %14s  %-44s %s\n", e.test_name.c_str(),
                  format_double(e.statistic).c_str(), e.threshold_description.c_str(),
                  e.skipped ? "SKIP" : (e.pass ? "PASS" : "FAIL"));
    out += line;
    if (!e.note.empty()) out += "  " + e.note + "\n";
  }
  for (const auto& err : errors) out += "error: " + err + "\n";
  out += "(illustration only: finite-sample tests cannot certify randomness)\n";
  out += pass() ? "PASS\n" : "FAIL\n";
  return out;
}

StatsReport independence_battery(const SelectionRule& rule, const BitString& input) {
  if (!rule.is_bounded()) throw Error("independence_battery: rule is not bounded");
  StatsReport report;
  report.rule = rule.name();
  report.stream_length = input.size();
  const SelectionTrace trace = run(rule, input);
  report.q_star_length = trace.q_star.size();
  report.n_length = trace.n_prefix.size();
  if (trace.q_star.size() < kMinSubsequence) {
    report.errors.push_back("Q* has " + std::to_string(trace.q_star.size()) +
                            " bits, fewer than " + std::to_string(kMinSubsequence));
  }
  if (trace.n_prefix.size() < kMinSubsequence) {
    report.errors.push_back("N has " + std::to_string(trace.n_prefix.size()) +
                            " bits, fewer than " + std::to_string(kMinSubsequence));
  }
  if (!report.errors.empty()) return report;

  add_z_entries(report, "Q*", trace.q_star);
  add_z_entries(report, "N", trace.n_prefix);

  const Chi2Result chi = block_independence_chi2(trace.q_star, trace.n_prefix, kBatteryBlockLen);
  const Chi2Region& region = chi2_region(chi.dof);
  StatsEntry entry;
  entry.test_name = "block-chi2(Q*,N,L=" + std::to_string(kBatteryBlockLen) + ")";
  entry.statistic = chi.chi2;
  entry.threshold_description = format_g(region.lower) + " <= chi2(" +
                                std::to_string(chi.dof) + ") <= " + format_g(region.upper);
  if (chi.degenerate) {
    entry.note = "degenerate marginals: dependence untestable";
  } else {
    entry.pass = chi.chi2 >= region.lower && chi.chi2 <= region.upper;
  }
  report.entries.push_back(std::move(entry));
  return report;
}

}  // namespace klsel
