// cartan: classify third-order ODEs u''' = f(x, u, u1, u2) under point
// transformations, dump their invariants, verify candidate maps.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cartan/classify.hpp"
#include "cartan/transform.hpp"

using nlohmann::json;
using namespace cartan;
namespace sym = cartan::sym;

namespace {

enum Exit { kOk = 0, kError = 1, kNegative = 2 };

struct Globals {
  std::string format = "text";
  std::uint64_t seed = ZeroTestPolicy{}.seed;
  int samples = ZeroTestPolicy{}.samples;
  double tol = ZeroTestPolicy{}.tolerance;
  std::size_t max_nodes = sym::kDefaultNodeBudget;
  std::string policy = "strict";
  bool timing = false;

  bool as_json() const { return format == "json"; }

  ClassifyOptions classify_options(std::uint64_t seed_override) const {
    ClassifyOptions o;
    o.zero.seed = seed_override;
    o.zero.samples = samples;
    o.zero.tolerance = tol;
    o.max_nodes = max_nodes;
    o.policy = policy == "assume-nonzero" ? ZeroPolicy::AssumeNonzero : ZeroPolicy::Strict;
    return o;
  }
  ClassifyOptions classify_options() const { return classify_options(seed); }
};

// nlohmann prints shortest round-trip floats; reports use 17 significant digits.
void dump(const json& j, std::ostream& os, int indent, int depth) {
  auto pad = [&](int d) {
    if (indent > 0) os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        pad(depth + 1);
        os << json(it.key()).dump() << (indent > 0 ? ": " : ":");
        dump(it.value(), os, indent, depth + 1);
      }
      pad(depth);
      os << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',';
        pad(depth + 1);
        dump(j[i], os, indent, depth + 1);
      }
      pad(depth);
      os << ']';
      return;
    }
    case json::value_t::number_float: {
      double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf;
      return;
    }
    default:
      os << j.dump();
  }
}

void emit(const json& j) {
  dump(j, std::cout, 2, 0);
  std::cout << '\n';
}

json cplx(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::string fmt(std::complex<double> z) {
  char buf[96];
  if (std::abs(z.imag()) <= 1e-14 * std::max(1.0, std::abs(z.real())))
    std::snprintf(buf, sizeof buf, "%.12g", z.real());
  else
    std::snprintf(buf, sizeof buf, "%.12g%+.12gi", z.real(), z.imag());
  return buf;
}

std::string show(const Expr& e) { return sym::to_string(sym::together(e)); }

const char* outcome(const ZeroVerdict& v) { return sym::to_string(v.outcome); }

json parameter_json(const ParameterEstimate& p) {
  json j = {{"value", cplx(p.value)}, {"residual", p.residual}};
  j["exact"] = p.exact ? json(p.exact->to_string()) : json(nullptr);
  return j;
}

std::string parameter_name(Family f) { return f == Family::PowerB ? "b" : "alpha"; }

json verdicts_json(const ConditionVerdicts& v) {
  json j = json::object();
  auto put = [&](const char* k, const std::optional<sym::ZeroOutcome>& o) {
    if (o) j[k] = sym::to_string(*o);
  };
  put("I4", v.I4);
  put("I5", v.I5);
  put("I6", v.I6);
  put("I7", v.I7);
  put("J4_q", v.J4q);
  return j;
}

json structure_json(const StructureFunctions& sf) {
  json arr = json::array();
  for (int i = 1; i <= 4; ++i) {
    for (auto [a, b] : kWedgePairs) {
      const Constancy& c = sf.constancy_of(i, a + 1, b + 1);
      json e = {{"i", i}, {"j", a + 1}, {"k", b + 1}, {"constant", c.constant}, {"method", c.method}};
      e["value"] = c.constant ? cplx(c.value) : json(nullptr);
      e["exact"] = c.exact ? json(c.exact->to_string()) : json(nullptr);
      arr.push_back(e);
    }
  }
  return arr;
}

json invariants_json(const BaseInvariants& inv) {
  return {{"I1", show(inv.I1)}, {"I2", show(inv.I2)},         {"I3", show(inv.I3)},
          {"I4", show(inv.I4)}, {"I5", show(inv.I5)},         {"I6", show(inv.I6)},
          {"I5_reduced", show(inv.I5_reduced)}};
}

json report_json(const std::string& input, const BranchReport& rep, const BaseInvariants& inv,
                 const Globals& g) {
  json j;
  j["input"] = input;
  j["seed"] = g.seed;
  j["policy"] = g.policy;
  j["branch"] = to_string(rep.branch);
  j["conditions"] = to_string(rep.conditions);
  j["verdicts"] = verdicts_json(rep.verdicts);
  j["invariants"] = invariants_json(inv);
  j["explanation"] = rep.explanation;
  j["r"] = rep.r;
  j["s"] = rep.s;
  if (rep.family && rep.family->matched) {
    const MatchResult& m = *rep.family;
    json f = {{"name", to_string(m.family)},
              {"residual", m.residual},
              {"A", {{"index", m.A_index}, {"order", m.A_order}}},
              {"B", m.B}};
    if (m.parameter) {
      f["parameter_name"] = parameter_name(m.family);
      f["parameter"] = parameter_json(*m.parameter);
      json eq = json::array();
      for (const auto& p : m.equivalent_parameters) eq.push_back(parameter_json(p));
      f["equivalent_parameters"] = eq;
    }
    json aux = json::object();
    for (const auto& [k, v] : m.auxiliary) aux[k] = cplx(v);
    f["auxiliary"] = aux;
    j["family"] = f;
  } else {
    j["family"] = nullptr;
  }
  j["structure_constants"] = rep.structure ? structure_json(*rep.structure) : json(nullptr);
  j["warnings"] = rep.warnings;
  return j;
}

void report_text(const std::string& input, const BranchReport& rep, const BaseInvariants& inv) {
  std::cout << "input:       " << input << '\n'
            << "branch:      " << to_string(rep.branch) << '\n'
            << "conditions:  " << to_string(rep.conditions) << '\n';
  json v = verdicts_json(rep.verdicts);
  std::cout << "verdicts:   ";
  for (auto it = v.begin(); it != v.end(); ++it)
    std::cout << ' ' << it.key() << '=' << it.value().get<std::string>();
  std::cout << '\n';
  std::cout << "I1 = " << show(inv.I1) << "\nI2 = " << show(inv.I2) << "\nI3 = " << show(inv.I3)
            << '\n';
  if (rep.family && rep.family->matched) {
    const MatchResult& m = *rep.family;
    std::cout << "family:      " << to_string(m.family) << " (A = exp(2 pi i " << m.A_index << "/"
              << m.A_order << "), B = " << m.B << ", residual " << m.residual << ")\n";
    if (m.parameter) {
      std::cout << "parameter:   " << parameter_name(m.family) << " = "
                << (m.parameter->exact ? m.parameter->exact->to_string() : fmt(m.parameter->value));
      if (m.equivalent_parameters.size() > 1) {
        std::cout << "  (equivalent:";
        for (const auto& p : m.equivalent_parameters)
          std::cout << ' ' << (p.exact ? p.exact->to_string() : fmt(p.value));
        std::cout << ')';
      }
      std::cout << '\n';
    }
  }
  if (rep.r || rep.s) std::cout << "r, s:        " << rep.r << ", " << rep.s << '\n';
  std::cout << "explanation: " << rep.explanation << '\n';
  if (rep.structure) {
    std::cout << "structure constants (nonzero):\n";
    for (int i = 1; i <= 4; ++i) {
      for (auto [a, b] : kWedgePairs) {
        const Constancy& c = rep.structure->constancy_of(i, a + 1, b + 1);
        if (c.constant && std::abs(c.value) < 1e-14) continue;
        std::cout << "  C" << i << "_" << a + 1 << b + 1 << " = ";
        if (!c.constant)
          std::cout << "non-constant";
        else
          std::cout << (c.exact ? c.exact->to_string() : fmt(c.value));
        std::cout << '\n';
      }
    }
  }
  for (const auto& w : rep.warnings) std::cout << "warning:     " << w << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_classify(const std::string& ode, const Globals& g) {
  auto t0 = std::chrono::steady_clock::now();
  OdeRhs rhs = parse_rhs(ode);
  BranchReport rep = classify(rhs, g.classify_options());
  BaseInvariants inv = base_invariants(rhs, g.classify_options().zero);
  double dt = seconds_since(t0);
  if (g.as_json()) {
    json j = report_json(ode, rep, inv, g);
    if (g.timing) j["seconds"] = dt;
    emit(j);
  } else {
    report_text(ode, rep, inv);
    std::cout << "time:        " << dt << " s\n";
  }
  return rep.branch == Branch::Unclassified ? kNegative : kOk;
}

int run_invariants(const std::string& ode, const Globals& g) {
  ClassifyOptions opt = g.classify_options();
  OdeRhs rhs = parse_rhs(ode);
  BaseInvariants inv = base_invariants(rhs, opt.zero);
  BranchReport rep = classify(rhs, opt);

  json j;
  j["input"] = ode;
  j["invariants"] = invariants_json(inv);
  j["verdicts"] = {{"I4", outcome(inv.I4_verdict)},
                   {"I5", outcome(inv.I5_verdict)},
                   {"I6", outcome(inv.I6_verdict)}};
  j["conditions"] = to_string(rep.conditions);
  json q = json::object();
  std::optional<I7Result> i7;
  try {
    switch (rep.conditions) {
      case Branch::A: {
        Roots rt = roots(inv, Branch::A, rep.r ? rep.r : 1, rep.s ? rep.s : 1);
        q["J4"] = show(*rt.J4);
        q["J6"] = show(*rt.J6);
        break;
      }
      case Branch::B: {
        Roots rt = roots(inv, Branch::B, rep.r ? rep.r : 1);
        q["J4"] = show(*rt.J4);
        q["J5"] = show(*rt.J5);
        i7 = i7_branchB(inv, rt, opt.zero);
        q["J4_q"] = show(*i7->J4q);
        break;
      }
      case Branch::C:
        i7 = i7_branchC(inv, opt.zero);
        break;
      case Branch::D: {
        Roots rt = roots(inv, Branch::D);
        q["J5"] = show(*rt.J5);
        i7 = i7_branchD(inv, rt, opt.zero);
        break;
      }
      case Branch::Unclassified:
        break;
    }
  } catch (const PreconditionError&) {
  }
  j["roots"] = q;
  if (i7) {
    j["I7"] = show(i7->value);
    j["verdicts"]["I7"] = outcome(i7->verdict);
  }

  if (g.as_json()) {
    emit(j);
    return kOk;
  }
  std::cout << "input: " << ode << '\n';
  for (const char* k : {"I1", "I2", "I3", "I4", "I5", "I6", "I5_reduced"})
    std::cout << k << " = " << j["invariants"][k].get<std::string>() << '\n';
  for (auto it = q.begin(); it != q.end(); ++it)
    std::cout << it.key() << " = " << it.value().get<std::string>() << '\n';
  if (i7) std::cout << "I7 = " << j["I7"].get<std::string>() << '\n';
  std::cout << "verdicts:";
  for (auto it = j["verdicts"].begin(); it != j["verdicts"].end(); ++it)
    std::cout << ' ' << it.key() << '=' << it.value().get<std::string>();
  std::cout << "\nconditions: " << to_string(rep.conditions) << '\n';
  return kOk;
}

int run_verify(const std::string& src, const std::string& tgt, const std::string& phi,
               const std::string& psi, const Globals& g) {
  ZeroTestPolicy policy = g.classify_options().zero;
  sym::BudgetScope budget(g.max_nodes);
  OdeRhs s = parse_rhs(src), t = parse_rhs(tgt);
  PointMap map = parse_map(phi, psi);
  VerificationResult v = verify_map(s, t, map, policy);
  bool ok = v.verified();

  const sym::ZeroSample* worst = nullptr;
  for (const auto& e : v.verdict.evidence)
    if (!e.singular && (!worst || e.magnitude > worst->magnitude)) worst = &e;

  json j;
  j["src"] = src;
  j["tgt"] = tgt;
  j["map"] = {{"phi", phi}, {"psi", psi}};
  j["status"] = ok ? "VERIFIED" : "FAILED";
  j["verdict"] = outcome(v.verdict);
  j["prolongation"] = {{"chi", show(v.prolongation.chi)},
                       {"eta", show(v.prolongation.eta)},
                       {"fbar", show(v.prolongation.fbar)}};
  j["jacobian_inconclusive"] = v.prolongation.jacobian_inconclusive;
  if (!ok && worst) {
    json pt = json::object();
    for (const auto& [k, z] : worst->point) pt[k] = cplx(z);
    j["residual_sample"] = {{"magnitude", worst->magnitude}, {"point", pt}};
  }
  if (g.as_json()) {
    emit(j);
  } else {
    std::cout << j["status"].get<std::string>() << " (" << outcome(v.verdict) << ")\n"
              << "chi  = " << j["prolongation"]["chi"].get<std::string>() << '\n'
              << "eta  = " << j["prolongation"]["eta"].get<std::string>() << '\n'
              << "fbar = " << j["prolongation"]["fbar"].get<std::string>() << '\n';
    if (!ok && worst) {
      std::cout << "residual sample: |r| = " << worst->magnitude << " at";
      for (const auto& [k, z] : worst->point) std::cout << ' ' << k << '=' << fmt(z);
      std::cout << '\n';
    }
    if (v.prolongation.jacobian_inconclusive)
      std::cout << "warning: Jacobian zero test inconclusive\n";
  }
  return ok ? kOk : kNegative;
}

struct CorpusMap {
  std::string target, phi, psi;
};

struct CorpusEntry {
  std::string name, ode, branch;
  std::optional<std::string> family;
  std::map<std::string, std::string> parameters;
  std::vector<CorpusMap> maps;
};

struct CorpusFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<CorpusEntry> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusFormatError("cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CorpusFormatError(path + ": " + e.what());
  }
  if (!doc.is_array()) throw CorpusFormatError(path + ": expected an array of entries");
  std::vector<CorpusEntry> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    auto str = [&](const char* k) {
      if (!e.contains(k) || !e[k].is_string())
        throw CorpusFormatError("entry " + std::to_string(i) + ": missing string '" + k + "'");
      return e[k].get<std::string>();
    };
    CorpusEntry c{str("name"), str("ode"), str("expected_branch"), {}, {}, {}};
    if (e.contains("expected_family") && !e["expected_family"].is_null())
      c.family = e["expected_family"].get<std::string>();
    if (e.contains("expected_parameters"))
      for (auto it = e["expected_parameters"].begin(); it != e["expected_parameters"].end(); ++it)
        c.parameters[it.key()] = it.value().get<std::string>();
    if (e.contains("maps"))
      for (const auto& m : e["maps"])
        c.maps.push_back({m.at("target").get<std::string>(), m.at("phi").get<std::string>(),
                          m.at("psi").get<std::string>()});
    out.push_back(std::move(c));
  }
  return out;
}

struct EntryResult {
  bool passed = true;
  std::string branch, family;
  std::vector<std::string> failures;
  double seconds = 0;
};

std::complex<double> parse_constant(const std::string& text) {
  Expr e = sym::simplify(sym::parse(text));
  if (!e.is_constant()) throw CorpusFormatError("parameter '" + text + "' is not a constant");
  return e.value().to_complex();
}

EntryResult check_entry(const CorpusEntry& c, const Globals& g, std::uint64_t seed) {
  auto t0 = std::chrono::steady_clock::now();
  EntryResult r;
  auto fail = [&](std::string why) {
    r.passed = false;
    r.failures.push_back(std::move(why));
  };
  try {
    ClassifyOptions opt = g.classify_options(seed);
    OdeRhs rhs = parse_rhs(c.ode, c.name);
    BranchReport rep = classify(rhs, opt);
    r.branch = to_string(rep.branch);
    if (rep.family && rep.family->matched) r.family = to_string(rep.family->family);
    if (r.branch != c.branch) fail("branch " + r.branch + ", expected " + c.branch);
    if (c.family && r.family != *c.family)
      fail("family " + (r.family.empty() ? std::string("none") : r.family) + ", expected " + *c.family);
    for (const auto& [name, text] : c.parameters) {
      std::complex<double> want = parse_constant(text);
      bool found = false;
      if (rep.family && rep.family->matched && parameter_name(rep.family->family) == name)
        for (const auto& p : rep.family->equivalent_parameters)
          found = found || std::abs(p.value - want) <= 1e-8;
      if (!found) fail(name + " = " + text + " not recovered");
    }
    for (const auto& m : c.maps) {
      sym::BudgetScope budget(g.max_nodes);
      VerificationResult v = verify_map(rhs, parse_rhs(m.target), parse_map(m.phi, m.psi), opt.zero);
      if (!v.verified())
        fail("map (" + m.phi + ", " + m.psi + ") to " + m.target + ": " + outcome(v.verdict));
    }
  } catch (const std::exception& e) {
    fail(std::string("error: ") + e.what());
  }
  r.seconds = seconds_since(t0);
  return r;
}

int run_corpus(const std::string& path, const Globals& g, unsigned jobs) {
  std::vector<CorpusEntry> entries = load_corpus(path);
  std::vector<EntryResult> results(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < entries.size();)
      results[i] = check_entry(entries[i], g, g.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, std::max<std::size_t>(1, entries.size()));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed;
  if (g.as_json()) {
    json arr = json::array();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& r = results[i];
      json e = {{"name", entries[i].name}, {"ode", entries[i].ode},   {"passed", r.passed},
                {"branch", r.branch},      {"family", r.family},      {"failures", r.failures}};
      if (g.timing) e["seconds"] = r.seconds;
      arr.push_back(e);
    }
    emit({{"entries", arr},
          {"total", entries.size()},
          {"passed", passed},
          {"failed", entries.size() - passed}});
  } else {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& r = results[i];
      std::cout << (r.passed ? "[ok]   " : "[FAIL] ") << entries[i].name << "  " << entries[i].ode
                << "  -> " << r.branch << (r.family.empty() ? "" : " " + r.family);
      if (g.timing) std::cout << "  (" << r.seconds << " s)";
      std::cout << '\n';
      for (const auto& f : r.failures) std::cout << "         " << f << '\n';
    }
    std::cout << entries.size() << " entries, " << passed << " passed, "
              << entries.size() - passed << " failed\n";
  }
  return passed == entries.size() ? kOk : kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-equivalence classification of third-order ODEs u''' = f(x, u, u1, u2)"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for randomized zero tests")->capture_default_str();
  app.add_option("--samples", g.samples, "Sample points per zero test")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--tol", g.tol, "Zero-test tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--max-nodes", g.max_nodes, "Expression size budget")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--policy", g.policy, "Handling of inconclusive zero tests")
      ->check(CLI::IsMember({"strict", "assume-nonzero"}))
      ->capture_default_str();
  app.add_flag("--timing", g.timing, "Include timings in JSON output");
  app.fallthrough();

  std::string ode;
  auto* cls = app.add_subcommand("classify", "Classify u''' = f");
  cls->add_option("ode", ode, "Right-hand side f")->required();
  auto* inv = app.add_subcommand("invariants", "Print the relative invariants of u''' = f");
  inv->add_option("ode", ode, "Right-hand side f")->required();

  std::string src, tgt, phi, psi;
  auto* ver = app.add_subcommand("verify-map", "Check that a point map carries src onto tgt");
  ver->add_option("--src", src, "Source right-hand side")->required();
  ver->add_option("--tgt", tgt, "Target right-hand side")->required();
  ver->add_option("--phi", phi, "xbar = phi(x, u)")->required();
  ver->add_option("--psi", psi, "ubar = psi(x, u)")->required();

  std::string file;
  unsigned jobs = 0;
  auto* cor = app.add_subcommand("corpus", "Run a fixture corpus");
  cor->add_option("--file", file, "Corpus JSON file")->required();
  cor->add_option("--jobs", jobs, "Worker threads (0: one per core)");

  CLI11_PARSE(app, argc, argv);

  try {
    sym::BudgetScope budget(g.max_nodes);
    if (*cls) return run_classify(ode, g);
    if (*inv) return run_invariants(ode, g);
    if (*ver) return run_verify(src, tgt, phi, psi, g);
    if (*cor) return run_corpus(file, g, jobs);
  } catch (const sym::ParseError& e) {
    std::cerr << e.what() << '\n';
  } catch (const sym::ResourceError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
  } catch (const DegenerateMap& e) {
    std::cerr << "degenerate map: " << e.what() << '\n';
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
  } catch (const CorpusFormatError& e) {
    std::cerr << "corpus: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kError;
}
