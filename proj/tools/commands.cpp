#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "nlst/bitfunction.hpp"
#include "nlst/error.hpp"
#include "nlst/npa.hpp"
#include "nlst/nsattack.hpp"
#include "nlst/nsimpossible.hpp"
#include "nlst/parallel.hpp"
#include "nlst/protocol.hpp"
#include "nlst/systems.hpp"

namespace nlst::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Outcome {
  Table table;
  int code = kOk;
};

}  // namespace

std::string format_number(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.*g", precision, v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string cell_text(const Cell& c, int precision, bool json) {
  if (auto d = std::get_if<double>(&c)) {
    if (json && !std::isfinite(*d)) return "null";
    return format_number(*d, precision);
  }
  if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (auto b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  const auto& s = std::get<std::string>(c);
  return json ? nlohmann::json(s).dump() : csv_field(s);
}

}  // namespace

std::string render(const Table& t, const std::string& format, int precision) {
  std::string out;
  if (format == "json") {
    out += "[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      out += r == 0 ? "\n  {" : ",\n  {";
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ", ";
        out += nlohmann::json(t.columns[c]).dump() + ": " + cell_text(t.rows[r][c], precision, true);
      }
      out += "}";
    }
    out += t.rows.empty() ? "]\n" : "\n]\n";
    return out;
  }
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + csv_field(t.columns[c]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + cell_text(row[c], precision, false);
    out += "\n";
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("not a number: '" + s + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("range must be lo:hi:step");
    const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || hi < lo) throw UsageError("range needs lo <= hi and step > 0");
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    if (count > 1000000) throw UsageError("range has too many points");
    for (long long i = 0; i <= count; ++i) out.push_back(lo + double(i) * step);
    return out;
  }
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ',')) out.push_back(number(p));
  if (out.empty()) throw UsageError("empty list");
  return out;
}

namespace {

struct Options {
  std::string format = "csv";
  int precision = 6;
  std::string out;
  double tol = 1e-9;
  std::string eps, rho, system_path, function;
  int n = 1;
  int level = 2;
  std::uint64_t seed = 0;
  std::string file;
  std::string input;
  std::string figure;
  // simulate
  std::string adversary = "ns";
  double k = 0.5, p = 0.9, threshold = -1.0, delta = 0.05, eta = 0.05, eta_bar = 0.05,
         eta_tilde = 0.01, kappa = 0.05;
  long long sim_n = 10000;
  int s = -1, m = -1;
  std::string transcript_path;
  std::string cert_eps, delta_list;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Domain, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> need_list(const std::string& text, const char* flag) {
  if (text.empty()) throw UsageError(std::string("missing ") + flag);
  return parse_list(text);
}

// fan out over points; slot i is filled by point i only
template <class F>
std::vector<std::vector<Cell>> sweep(std::size_t count, F&& fn) {
  std::vector<std::vector<Cell>> rows(count);
  parallel_for(count, [&](std::size_t i) { rows[i] = fn(i); });
  return rows;
}

// --eps (unbiased PR box), --rho (noisy singlet) or --system file
std::pair<std::string, System> single_source(const Options& o) {
  int given = !o.eps.empty() + !o.rho.empty() + !o.system_path.empty();
  if (given != 1) throw UsageError("give exactly one of --eps, --rho, --system");
  if (!o.system_path.empty()) return {o.system_path, system_from_json(read_file(o.system_path), o.tol)};
  if (!o.eps.empty()) {
    auto v = parse_list(o.eps);
    if (v.size() != 1) throw UsageError("--eps takes one value here");
    return {"eps=" + format_number(v[0], o.precision), unbiased_pr_box(v[0])};
  }
  auto v = parse_list(o.rho);
  if (v.size() != 1) throw UsageError("--rho takes one value here");
  return {"rho=" + format_number(v[0], o.precision), noisy_singlet_system(v[0])};
}

std::vector<int> parse_inputs(const std::string& text, std::size_t parties) {
  std::vector<int> in(parties, 0);
  if (text.empty()) return in;
  auto v = parse_list(text);
  if (v.size() != parties) throw UsageError("--input needs one value per party");
  for (std::size_t i = 0; i < parties; ++i) in[i] = static_cast<int>(v[i]);
  return in;
}

int output_bits(const System& s) {
  int x = s.scenario().outputs(0), bits = 0;
  while ((1 << bits) < x) ++bits;
  if ((1 << bits) != x) fail(ErrorKind::Shape, "party 0 output count is not a power of two");
  return bits;
}

BitFunction function_or_identity(const Options& o, int bits) {
  if (o.function.empty()) return BitFunction::xor_all(bits == 0 ? 1 : bits);
  return BitFunction::parse(o.function, bits);
}

Outcome cmd_validate(const Options& o) {
  if (o.file.empty()) throw UsageError("validate needs a system JSON file");
  System s = system_from_json(read_file(o.file), o.tol);
  NsReport r = is_nonsignalling(s, o.tol);
  Outcome out;
  out.table.columns = {"check", "value"};
  out.table.rows.push_back({std::string("normalized"), true});
  out.table.rows.push_back({std::string("nonsignalling"), r.ok});
  out.table.rows.push_back({std::string("worst_violation"), r.worst});
  for (const auto& v : r.violations) out.table.rows.push_back({std::string("violation"), v});
  if (!r.ok) out.code = kDomainError;
  return out;
}

Outcome cmd_chsh(const Options& o) {
  auto [label, s] = single_source(o);
  Outcome out;
  out.table.columns = {"source", "chsh"};
  out.table.rows.push_back({label, chsh_value(s)});
  return out;
}

Outcome cmd_bc(const Options& o) {
  Outcome out;
  out.table.columns = {"N", "source", "value"};
  if (!o.system_path.empty()) {
    System s = system_from_json(read_file(o.system_path), o.tol);
    out.table.rows.push_back({static_cast<long long>(o.n), o.system_path, braunstein_caves_value(s, o.n)});
  } else {
    if (o.n < 2) fail(ErrorKind::Domain, "chain length --n must be at least 2");
    out.table.rows.push_back(
        {static_cast<long long>(o.n), std::string("chained PR box"), braunstein_caves_value(chained_pr_box(o.n), o.n)});
  }
  return out;
}

Outcome cmd_ns_distance(const Options& o) {
  Outcome out;
  out.table.columns = {"source", "distance", "certified", "p"};
  std::vector<std::pair<std::string, System>> sources;
  if (!o.system_path.empty() || !o.rho.empty()) {
    sources.push_back(single_source(o));
  } else {
    for (double e : need_list(o.eps, "--eps"))
      sources.emplace_back("eps=" + format_number(e, o.precision), unbiased_pr_box(e));
  }
  out.table.rows = sweep(sources.size(), [&](std::size_t i) -> std::vector<Cell> {
    const System& s = sources[i].second;
    BitFunction f = function_or_identity(o, output_bits(s));
    AttackResult r = distance_from_uniform_lp(s, f, parse_inputs(o.input, s.scenario().parties()), o.tol);
    return {sources[i].first, r.distance, r.certified, r.p};
  });
  return out;
}

Outcome cmd_local_part(const Options& o) {
  if (o.n != 1 && o.n != 2) fail(ErrorKind::Domain, "local-part supports --n 1 or 2 boxes");
  auto eps = need_list(o.eps, "--eps");
  Outcome out;
  out.table.columns = {"eps", "boxes", "local_part", "vertices"};
  out.table.rows = sweep(eps.size(), [&](std::size_t i) -> std::vector<Cell> {
    System box = unbiased_pr_box(eps[i]);
    if (o.n == 2) box = group_parties(tensor_power(box, 2), {{0, 2}, {1, 3}});
    LocalPartResult r = local_part(box);
    return {eps[i], static_cast<long long>(o.n), r.value, static_cast<long long>(r.vertices)};
  });
  return out;
}

Outcome cmd_ns_xor(const Options& o) {
  if (o.n < 1 || o.n > 6) fail(ErrorKind::Domain, "ns-xor-bound needs 1 <= --n <= 6");
  auto eps = need_list(o.eps, "--eps");
  DualCertificate c = tensor_power(lambda1_star(), o.n);
  Outcome out;
  out.table.columns = {"eps", "n", "xor_bound"};
  out.table.rows = sweep(eps.size(), [&](std::size_t i) -> std::vector<Cell> {
    System joint = tensor_power(unbiased_pr_box(eps[i]), o.n);
    return {eps[i], static_cast<long long>(o.n), xor_bound(c, joint)};
  });
  return out;
}

Outcome cmd_npa_guess(const Options& o) {
  Outcome out;
  out.table.columns = {"source", "pguess", "lower", "bound", "reduced_accuracy"};
  std::vector<std::pair<std::string, System>> sources;
  if (!o.system_path.empty() || !o.eps.empty()) {
    sources.push_back(single_source(o));
  } else {
    for (double r : need_list(o.rho, "--rho"))
      sources.emplace_back("rho=" + format_number(r, o.precision), noisy_singlet_system(r));
  }
  out.table.rows = sweep(sources.size(), [&](std::size_t i) -> std::vector<Cell> {
    const System& s = sources[i].second;
    GuessResult g = o.function.empty()
                        ? guessing_probability_sdp(s, std::vector<int>{}, o.level, 0)
                        : guessing_probability_sdp(s, BitFunction::parse(o.function, output_bits(s)), o.level, 0);
    return {sources[i].first, g.value, g.lower, g.bound, g.reduced_accuracy};
  });
  return out;
}

Outcome cmd_bit_sdp(const Options& o) {
  Outcome out;
  out.table.columns = {"source", "distance", "lower", "bound", "reduced_accuracy"};
  std::vector<std::pair<std::string, System>> sources;
  if (!o.system_path.empty() || !o.eps.empty()) {
    sources.push_back(single_source(o));
  } else {
    for (double r : need_list(o.rho, "--rho"))
      sources.emplace_back("rho=" + format_number(r, o.precision), noisy_singlet_system(r));
  }
  out.table.rows = sweep(sources.size(), [&](std::size_t i) -> std::vector<Cell> {
    const System& s = sources[i].second;
    BitDistanceResult b = bit_distance_sdp(s, function_or_identity(o, output_bits(s)), o.level, 0);
    return {sources[i].first, b.distance, b.lower, b.bound, b.reduced_accuracy};
  });
  return out;
}

Outcome cmd_attack_z0(const Options& o) {
  auto eps = need_list(o.eps, "--eps");
  const std::string fname = o.function.empty() ? "xor" : o.function;
  Outcome out;
  out.table.columns = {"n", "eps", "function", "partition_element", "distance"};
  out.table.rows = sweep(eps.size(), [&](std::size_t i) -> std::vector<Cell> {
    BitFunction f = BitFunction::parse(fname, o.n);
    Z0Attack z = build_z0_attack(o.n, eps[i], f);
    bool ok = is_partition_element(z.parent, 0.5, z.table, o.tol);
    return {static_cast<long long>(o.n), eps[i], f.describe(), ok, attack_distance(o.n, eps[i], f)};
  });
  return out;
}

Outcome cmd_attack_distance(const Options& o) {
  auto eps = need_list(o.eps, "--eps");
  const std::string fname = o.function.empty() ? "xor" : o.function;
  BitFunction f = BitFunction::parse(fname, o.n);
  Outcome out;
  out.table.columns = {"n", "eps", "function", "distance", "bias", "min_sum", "lower_bound"};
  out.table.rows = sweep(eps.size(), [&](std::size_t i) -> std::vector<Cell> {
    AttackTerms t = attack_terms(o.n, eps[i], f);
    return {static_cast<long long>(o.n), eps[i], f.describe(), t.distance(), t.bias, t.min_sum,
            general_lower_bound(eps[i])};
  });
  return out;
}

Outcome cmd_lower_bound(const Options& o) {
  auto eps = need_list(o.eps, "--eps");
  Outcome out;
  out.table.columns = {"eps", "lower_bound"};
  for (double e : eps) out.table.rows.push_back({e, general_lower_bound(e)});
  return out;
}

Outcome cmd_keyrate_ns(const Options& o) {
  Outcome out;
  if (!o.cert_eps.empty()) {
    auto e = parse_list(o.cert_eps);
    auto d = need_list(o.delta_list, "--delta");
    out.table.columns = {"eps_cert", "delta", "q"};
    for (double a : e)
      for (double b : d) out.table.rows.push_back({a, b, ns_key_rate(a, b)});
    return out;
  }
  out.table.columns = {"rho", "q"};
  for (double r : need_list(o.rho, "--rho")) out.table.rows.push_back({r, ns_key_rate_curve(r)});
  return out;
}

Outcome cmd_keyrate_q(const Options& o) {
  Outcome out;
  out.table.columns = {"rho", "pguess", "q", "reduced_accuracy"};
  auto rho = need_list(o.rho, "--rho");
  out.table.rows = sweep(rho.size(), [&](std::size_t i) -> std::vector<Cell> {
    QuantumRatePoint q = q_key_rate_curve(rho[i], o.level);
    return {q.rho, q.pguess, q.rate, q.reduced_accuracy};
  });
  return out;
}

Outcome cmd_simulate(const Options& o) {
  auto rho = parse_list(o.rho.empty() ? "0" : o.rho);
  if (rho.size() != 1) throw UsageError("simulate takes one --rho value");
  if (o.adversary != "ns" && o.adversary != "quantum") throw UsageError("--adversary must be ns or quantum");
  const Adversary adv = o.adversary == "ns" ? Adversary::NonSignalling : Adversary::Quantum;
  ProtocolParams pp;
  if (o.sim_n <= 0) fail(ErrorKind::Domain, "--n must be positive");
  pp.n = static_cast<std::size_t>(o.sim_n);
  pp.k = o.k;
  pp.p = o.p;
  pp.delta = o.delta;
  pp.eta = o.eta;
  pp.eta_bar = o.eta_bar;
  pp.eta_tilde = o.eta_tilde;
  pp.kappa = o.kappa;
  if (adv == Adversary::NonSignalling)
    pp.eps = o.threshold >= 0 ? o.threshold : 0.7;
  else
    pp.pguess = o.threshold >= 0 ? o.threshold : 0.9;
  if (o.s >= 0 || o.m >= 0) {
    if (o.s < 0 || o.m < 0) throw UsageError("--s and --m go together");
    pp.auto_lengths = false;
    pp.s = static_cast<std::size_t>(o.s);
    pp.m = static_cast<std::size_t>(o.m);
  }
  SimulationResult res = simulate_ekert(pp, rho[0], adv, o.seed, o.level);
  if (!o.transcript_path.empty()) {
    std::ofstream f(o.transcript_path, std::ios::binary);
    if (!f) fail(ErrorKind::Domain, "cannot write '" + o.transcript_path + "'");
    f << transcript_to_json(res.transcript);
  }
  const KeyRateReport& r = res.report;
  Outcome out;
  out.table.columns = {"adversary", "rho", "seed", "status", "accepted", "certificate_estimate",
                       "delta_estimate", "rate", "threshold_rate", "n_key", "s", "m", "finite_rate",
                       "log2_secrecy", "log2_correctness", "log2_eps1", "log2_eps2",
                       "log2_eps_prime", "keys_equal"};
  out.table.rows.push_back({std::string(to_string(adv)), rho[0], static_cast<long long>(o.seed), r.status,
                            r.accepted, r.pe.certificate_estimate, r.pe.delta_estimate, r.rate,
                            r.threshold_rate, static_cast<long long>(r.n_key),
                            static_cast<long long>(r.s), static_cast<long long>(r.m), r.finite_rate,
                            r.log2_secrecy, r.log2_correctness, r.pe.bounds.log2_eps1,
                            r.pe.bounds.log2_eps2, r.pe.bounds.log2_eps_prime, r.keys_equal});
  return out;
}

// figure presets; --rho / --eps / --n / --level override the grids
Outcome cmd_fig(const Options& o) {
  Options q = o;
  if (o.figure == "pguess") {
    if (q.rho.empty()) q.rho = "0,0.003,0.03,0.06,0.09,0.12,0.15,0.2,0.25,0.3";
    Outcome g = cmd_npa_guess(q);
    Outcome out;
    out.table.columns = {"rho", "pguess"};
    auto rho = parse_list(q.rho);
    for (std::size_t i = 0; i < rho.size(); ++i) out.table.rows.push_back({rho[i], g.table.rows[i][1]});
    return out;
  }
  if (o.figure == "keyrate-ns") {
    if (q.rho.empty()) q.rho = "0:0.048:0.002";
    return cmd_keyrate_ns(q);
  }
  if (o.figure == "keyrate-q") {
    if (q.rho.empty()) q.rho = "0,0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.078";
    Outcome g = cmd_keyrate_q(q);
    Outcome out;
    out.table.columns = {"rho", "q"};
    for (const auto& row : g.table.rows) out.table.rows.push_back({row[0], row[2]});
    return out;
  }
  // xor-attack: distance of the XOR of n boxes under the z0 attack
  auto eps = parse_list(q.eps.empty() ? "0:0.5:0.01" : q.eps);
  const int nmax = o.n > 1 ? o.n : 5;
  Outcome out;
  out.table.columns = {"eps"};
  for (int n = 1; n <= nmax; ++n) out.table.columns.push_back("n" + std::to_string(n));
  out.table.rows = sweep(eps.size(), [&](std::size_t i) -> std::vector<Cell> {
    std::vector<Cell> row = {eps[i]};
    for (int n = 1; n <= nmax; ++n) row.push_back(xor_attack_distance_closed_form(n, eps[i]));
    return row;
  });
  return out;
}

void add_common(CLI::App* sc, Options& o) {
  sc->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sc->add_option("--precision", o.precision, "Significant digits for numbers")->check(CLI::Range(1, 17));
  sc->add_option("--out", o.out, "Write the table to this file instead of stdout");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // one Options per subcommand so that defaults do not leak between them
  std::deque<Options> store;
  CLI::App app{"nlst: non-signalling and quantum bounds for device-independent key distribution"};
  app.failure_message(CLI::FailureMessage::help);
  app.require_subcommand(1);
  app.name("nlst");

  std::map<std::string, std::function<Outcome()>> handlers;
  std::map<std::string, Options*> chosen_options;
  Options* cur = nullptr;
  auto sub = [&](const std::string& name, const std::string& about,
                 std::function<Outcome(const Options&)> fn) {
    CLI::App* sc = app.add_subcommand(name, about);
    cur = &store.emplace_back();
    add_common(sc, *cur);
    Options* mine = cur;
    handlers[name] = [fn, mine] { return fn(*mine); };
    chosen_options[name] = mine;
    return sc;
  };
  auto eps_opt = [&](CLI::App* sc, const char* what) { sc->add_option("--eps", cur->eps, what); };
  auto rho_opt = [&](CLI::App* sc, const char* what) { sc->add_option("--rho", cur->rho, what); };
  auto sys_opt = [&](CLI::App* sc) {
    sc->add_option("--system", cur->system_path, "System table as JSON {inputs, outputs, table}");
  };
  auto tol_opt = [&](CLI::App* sc) { sc->add_option("--tol", cur->tol, "Feasibility tolerance"); };

  CLI::App* sc = sub("validate",
                     "Check that a system table is normalised and non-signalling; lists violated constraints",
                     cmd_validate);
  sc->add_option("file", cur->file, "System JSON file")->required();
  tol_opt(sc);

  sc = sub("chsh", "CHSH value (1/4) sum_{x^y=uv} P(x,y|u,v) of a box", cmd_chsh);
  eps_opt(sc, "Unbiased PR box with error eps");
  rho_opt(sc, "Noisy singlet (Tsirelson system mixed with noise rho)");
  sys_opt(sc);
  tol_opt(sc);

  sc = sub("bc-value", "Braunstein-Caves chained Bell value with N inputs per side",
           cmd_bc);
  sc->add_option("--n", cur->n, "Inputs per side N")->default_val(4);
  sys_opt(sc);
  tol_opt(sc);

  sc = sub("ns-distance",
           "Distance from uniform of a key bit against a non-signalling adversary (LP with dual certificate)",
           cmd_ns_distance);
  eps_opt(sc, "Unbiased PR box error; list a,b,c or range lo:hi:step");
  rho_opt(sc, "Noisy singlet noise");
  sys_opt(sc);
  sc->add_option("--function", cur->function, "Key bit of party 0's output: xor|mask:<hex>|table:<path>");
  sc->add_option("--input", cur->input, "Joint input, one value per party (default all 0)");
  tol_opt(sc);

  sc = sub("local-part", "Local part of one unbiased PR box or of two (local-vertex LP)",
           cmd_local_part);
  eps_opt(sc, "Box error; list or range");
  sc->add_option("--n", cur->n, "Number of boxes (1 or 2)")->default_val(1);

  sc = sub("ns-xor-bound", "Bound on the XOR of n boxes certified by the tensor power of lambda1*",
           cmd_ns_xor);
  eps_opt(sc, "Box error; list or range");
  sc->add_option("--n", cur->n, "Number of boxes")->default_val(1);

  sc = sub("npa-guess", "Quantum guessing probability of party 0's output via the NPA moment SDP",
           cmd_npa_guess);
  rho_opt(sc, "Noisy singlet noise; list or range");
  eps_opt(sc, "Unbiased PR box error");
  sys_opt(sc);
  sc->add_option("--level", cur->level, "NPA level (1 or 2)")->default_val(2);
  sc->add_option("--function", cur->function, "Bit guessed: xor|mask:<hex>|table:<path> (default the raw output)");

  sc = sub("bit-sdp", "Distance from uniform of a key bit against a quantum adversary (NPA SDP)",
           cmd_bit_sdp);
  rho_opt(sc, "Noisy singlet noise; list or range");
  eps_opt(sc, "Unbiased PR box error");
  sys_opt(sc);
  sc->add_option("--level", cur->level, "NPA level (1 or 2)")->default_val(2);
  sc->add_option("--function", cur->function, "Key bit: xor|mask:<hex>|table:<path>");

  sc = sub("attack-z0",
           "Builds the z0 attack element on n eps-boxes, checks it is a partition element with weight 1/2",
           cmd_attack_z0);
  eps_opt(sc, "Box error; list or range");
  sc->add_option("--n", cur->n, "Number of boxes (<= 6)")->default_val(2);
  sc->add_option("--function", cur->function, "Key function: xor|mask:<hex>|table:<path>");
  tol_opt(sc);

  sc = sub("attack-distance", "Distance from uniform of f(X) under the z0 attack on n eps-boxes",
           cmd_attack_distance);
  eps_opt(sc, "Box error; list or range");
  sc->add_option("--n", cur->n, "Number of boxes (<= 24)")->default_val(2);
  sc->add_option("--function", cur->function, "Key function: xor|mask:<hex>|table:<path>");

  sc = sub("lower-bound", "Function-independent lower bound (-1 + sqrt(1 + 64 eps^2)) / (32 eps) on the attack distance",
           cmd_lower_bound);
  eps_opt(sc, "Box error; list or range");

  sc = sub("keyrate-ns", "Key rate 1 - h(delta) - log2(1 + eps) against non-signalling adversaries",
           cmd_keyrate_ns);
  rho_opt(sc, "Noisy singlet noise; list or range");
  sc->add_option("--eps-cert", cur->cert_eps, "Certificate value eps instead of the noisy-singlet curve");
  sc->add_option("--delta", cur->delta_list, "Error rate delta for --eps-cert");

  sc = sub("keyrate-q", "Key rate -log2 P_guess - h(delta) against quantum adversaries, delta = rho",
           cmd_keyrate_q);
  rho_opt(sc, "Noisy singlet noise; list or range");
  sc->add_option("--level", cur->level, "NPA level (1 or 2)")->default_val(2);

  sc = sub("simulate",
           "Seeded run of parameter estimation, information reconciliation and privacy amplification",
           cmd_simulate);
  rho_opt(sc, "Source noise of the Ekert-type source");
  sc->add_option("--n", cur->sim_n, "Number of systems")->default_val(10000);
  sc->add_option("--seed", cur->seed, "Random seed")->default_val(0);
  sc->add_option("--adversary", cur->adversary, "ns or quantum")->default_val("ns");
  sc->add_option("--k", cur->k, "Test input probability")->default_val(0.5);
  sc->add_option("--p", cur->p, "Yield floor factor")->default_val(0.9);
  sc->add_option("--threshold", cur->threshold, "Certificate threshold (eps for ns, P_guess for quantum)");
  sc->add_option("--delta", cur->delta, "Error-rate threshold")->default_val(0.05);
  sc->add_option("--eta", cur->eta, "Estimation slack eta")->default_val(0.05);
  sc->add_option("--eta-bar", cur->eta_bar, "Estimation slack for the key marginal")->default_val(0.05);
  sc->add_option("--eta-tilde", cur->eta_tilde, "Privacy amplification slack")->default_val(0.01);
  sc->add_option("--kappa", cur->kappa, "Reconciliation slack")->default_val(0.05);
  sc->add_option("--s", cur->s, "Key length (with --m; default automatic)");
  sc->add_option("--m", cur->m, "Syndrome length (with --s)");
  sc->add_option("--level", cur->level, "NPA level for the quantum certificate")->default_val(2);
  sc->add_option("--transcript", cur->transcript_path, "Write the replayable transcript JSON here");

  sc = sub("fig", "Regenerate a figure's data: pguess, keyrate-ns, keyrate-q or xor-attack",
           cmd_fig);
  sc->add_option("name", cur->figure, "Figure")
      ->required()
      ->check(CLI::IsMember({"pguess", "keyrate-ns", "keyrate-q", "xor-attack"}));
  rho_opt(sc, "Override the rho grid");
  eps_opt(sc, "Override the eps grid (xor-attack)");
  sc->add_option("--n", cur->n, "Largest n (xor-attack)");
  sc->add_option("--level", cur->level, "NPA level")->default_val(2);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("nlst");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    const Options& o = *chosen_options.at(chosen->get_name());
    Outcome result = handlers.at(chosen->get_name())();
    const std::string text = render(result.table, o.format, o.precision);
    if (o.out.empty()) {
      out << text;
    } else {
      std::ofstream f(o.out, std::ios::binary);
      if (!f) fail(ErrorKind::Domain, "cannot write '" + o.out + "'");
      f << text;
    }
    return result.code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << chosen->help();
    return kUsageError;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  }
}

}  // namespace nlst::cli
