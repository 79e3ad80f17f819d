#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "oneperc/grid.hpp"
#include "oneperc/lp.hpp"
#include "oneperc/relaxation.hpp"

#ifndef ONEPERC_VERSION
#define ONEPERC_VERSION "unknown"
#endif

namespace oneperc::cli {

using nlohmann::json;

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

void say(const Progress& progress, const std::string& line) {
  if (progress) progress(line);
}

// key,value lines for the scalar members of a flat object.
std::string flat_csv(const json& j) {
  std::ostringstream out;
  out << "key,value\n";
  for (const auto& [k, v] : j.items()) {
    if (v.is_structured()) continue;
    out << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  return out.str();
}

json trace_rows(const std::vector<RenormRow>& rows, bool with_g) {
  json out = json::array();
  for (const auto& r : rows) {
    json row = {{"i", r.i},
                {"p", r.tp.p},
                {"p_prime", r.tp.p_prime},
                {"certificate_hash", hex64(r.intra_certificate)},
                {"cross_certificate_hash", hex64(r.cross_certificate)}};
    if (with_g) {
      row["g_bound"] = r.g_complement;
      row["origin_certificate_hash"] = hex64(r.origin_certificate);
    }
    out.push_back(row);
  }
  return out;
}

std::string row_line(const RenormRow& r, bool with_g) {
  std::string s = "row " + std::to_string(r.i) + ": " + format_decimal6(r.tp.p) + " " + format_decimal6(r.tp.p_prime);
  if (with_g) s += " " + format_decimal6(r.g_complement);
  return s;
}

std::string trace_text(const std::vector<RenormRow>& rows, bool with_g) {
  std::ostringstream out;
  out << (with_g ? " i  p_i       p'_i      G-bound\n" : " i  p_i       p'_i\n");
  for (const auto& r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%2d  %s  %s", r.i, format_decimal6(r.tp.p).c_str(),
                  format_decimal6(r.tp.p_prime).c_str());
    out << buf;
    if (with_g) out << "  " << format_decimal6(r.g_complement);
    out << '\n';
  }
  return out.str();
}

SmallGridGraph graph_by_name(const std::string& name) {
  if (name == "q2") return build_hypercube(2);
  if (name == "q3") return build_hypercube(3);
  if (name == "rect") return build_rectangle_4x2();
  throw std::invalid_argument("unknown graph '" + name + "' (expected q2, q3 or rect)");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Format parse_format(const std::string& s) {
  if (s == "text") return Format::text;
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw std::invalid_argument("unknown format '" + s + "'");
}

std::string CommandResult::render(Format f) const {
  switch (f) {
    case Format::text: return text;
    case Format::csv: return csv ? *csv : flat_csv(data);
    case Format::json: return data.dump(2) + "\n";
  }
  return text;
}

std::string CommandResult::file_extension(Format f) const {
  switch (f) {
    case Format::text: return "txt";
    case Format::csv: return "csv";
    case Format::json: return "json";
  }
  return "txt";
}

std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string tool_version() { return ONEPERC_VERSION; }

CommandResult cmd_table1(const Table1Options& o, const Progress& progress) {
  CommandResult r;
  r.subcommand = "table1";
  r.config = {{"theta", o.theta}, {"start", o.start}, {"target", o.target}, {"handoff", o.handoff},
              {"max_depth", o.max_depth}};
  Z2Options opts;
  opts.theta = o.theta;
  opts.target = o.target;
  opts.handoff = o.handoff;
  opts.max_depth = o.max_depth;
  const Z2Result z = z2_upper_iterate({o.start, o.start}, opts,
                                      [&](const RenormRow& row) { say(progress, row_line(row, false)); });

  r.data = {{"theta", o.theta},   {"start", o.start},          {"target", o.target},
            {"verdict", z.verdict}, {"reached_at", z.reached_at}, {"stop", to_string(z.stop)},
            {"rows", trace_rows(z.rows, false)}};
  std::ostringstream csv;
  write_trace_csv(csv, z.rows, false);
  r.csv = csv.str();
  r.text = trace_text(z.rows, false);
  if (z.verdict)
    r.text += "target " + fmt("%.4f", o.target) + " reached at row " + std::to_string(z.reached_at) + "\n";
  else
    r.text += "target " + fmt("%.4f", o.target) + " not reached (" + to_string(z.stop) + ")\n";
  r.exit_code = z.verdict ? kEstablished : kNotEstablished;
  return r;
}

CommandResult cmd_table2(const Table2Options& o, const Progress& progress) {
  CommandResult r;
  r.subcommand = "table2";
  r.config = {{"theta", o.theta}, {"start", o.start}, {"last_row", o.last_row}};
  const OriginSum s =
      origin_sum({o.start, o.start}, o.theta, o.last_row, [&](const RenormRow& row) { say(progress, row_line(row, true)); });

  r.data = {{"theta", o.theta},
            {"start", o.start},
            {"rows", trace_rows(s.rows, true)},
            {"finite_sum", s.finite_sum},
            {"q_last", s.q_last},
            {"tail_bound", std::isfinite(s.tail_bound) ? json(s.tail_bound) : json(nullptr)},
            {"total", std::isfinite(s.total) ? json(s.total) : json(nullptr)},
            {"positive_probability", s.positive_probability}};
  std::ostringstream csv;
  write_trace_csv(csv, s.rows, true);
  r.csv = csv.str();
  r.text = trace_text(s.rows, true);
  r.text += "sum of bounds " + format_decimal6(s.finite_sum) + ", q_" + std::to_string(o.last_row) + " " +
            format_decimal6(s.q_last) + ", tail " + (std::isfinite(s.tail_bound) ? fmt("%.9f", s.tail_bound) : "unbounded") +
            "\n";
  r.text += s.positive_probability ? "total below 1: the origin percolates with positive probability\n"
                                   : "total not below 1: no conclusion\n";
  r.exit_code = s.positive_probability ? kEstablished : kNotEstablished;
  return r;
}

CommandResult cmd_q6(const Q6Options& o, const Progress& progress) {
  CommandResult r;
  r.subcommand = "q6";
  r.config = {{"p", o.p}, {"p_second_decimals", o.p_second_decimals}};
  say(progress, "solving the Q3 connectivity programs");
  const Q6Chain c = q6_connectivity_bound(o.p, o.p_second_decimals);

  auto bound_json = [](const CertifiedBound& b) {
    return json{{"value", b.value},
                {"lp_optimum", b.lp_optimum},
                {"certificate_ok", b.certificate_ok},
                {"rigorous", b.rigorous.valid},
                {"problem_hash", hex64(b.problem_hash)},
                {"certificate_hash", hex64(b.certificate_hash)},
                {"pivots", b.pivots}};
  };
  r.data = {{"p", c.p},
            {"P0", c.P0},
            {"p_second", c.p_second},
            {"P1", c.P1},
            {"P", c.P},
            {"threshold", c.threshold},
            {"collapsed", c.collapsed},
            {"passes", c.passes},
            {"first", bound_json(c.first)}};
  if (!c.collapsed) r.data["second"] = bound_json(c.second);

  std::ostringstream t;
  t << "P0 = min connection probability of Q3 at p = " << fmt("%.6g", c.p) << ": " << format_decimal6(c.P0) << '\n';
  if (c.collapsed) {
    t << "P0^2 <= (1-p)^8: the chain does not continue\n";
  } else {
    t << "second-level edge probability: " << fmt("%.6g", c.p_second) << '\n';
    t << "P1 = " << format_decimal6(c.P1) << '\n';
    t << "P = P0^8 P1 = " << fmt("%.6e", c.P) << '\n';
  }
  t << "threshold (1-p)^32 phi = " << fmt("%.6e", c.threshold) << '\n';

  if (c.passes) {
    const CubeCascade cube = cube_cascade(c.p, 6, c.P);
    r.data["cascade"] = {{"started", cube.started}, {"I", cube.I}, {"identity_error", static_cast<double>(cube.identity_error())}};
    t << "cube cascade started; r_I < 1/19 at I = " << cube.I << '\n';
  }
  t << (c.passes ? "P exceeds the threshold\n" : "P does not exceed the threshold\n");
  r.text = t.str();
  r.exit_code = c.passes ? kEstablished : kNotEstablished;
  return r;
}

CommandResult cmd_lower_bounds(const LowerBoundOptions& o) {
  CommandResult r;
  r.subcommand = "lower-bounds";
  r.config = {{"udlra_site", o.udlra_site}, {"dfh_site", o.dfh_site}};
  if (!(o.udlra_site >= 0.0 && o.udlra_site <= 1.0) || !(o.dfh_site >= 0.0 && o.dfh_site <= 1.0))
    throw std::invalid_argument("site probabilities must lie in [0, 1]");
  const LowerBoundCombination c = lower_bound_combination();
  const double u = udlra_bound(o.udlra_site);
  const double d = dfh_bound(o.dfh_site);
  r.data = {{"combined", c.value}, {"x_star", c.x_star}, {"udlra_site", o.udlra_site}, {"udlra_at", u},
            {"dfh_site", o.dfh_site}, {"dfh_at", d}};
  // Lower bounds, so printed truncated.
  auto down6 = [](double x) { return format_decimal6(truncate_down(x, 6)); };
  r.text = "combined bound (35 - 3 sqrt 33)/32 = " + down6(c.value) + " at x = " + fmt("%.6f", c.x_star) + "\n" +
           "udlra at p_site " + fmt("%.6g", o.udlra_site) + ": " + down6(u) + "\n" +
           "x^2 + (1-x)/2 at x = " + fmt("%.6g", o.dfh_site) + ": " + down6(d) + "\n";
  r.exit_code = kEstablished;
  return r;
}

CommandResult cmd_verify_models(const VerifyModelsOptions& o) {
  CommandResult r;
  r.subcommand = "verify-models";
  json models = json::array();
  for (const auto& m : o.models) models.push_back(m.name());
  r.config = {{"width", o.width}, {"height", o.height}, {"tol", o.tol}, {"models", models}};
  if (o.width < 1 || o.height < 1 || o.width > kMaxWindowSide || o.height > kMaxWindowSide)
    throw std::invalid_argument("window sides must lie in [1, " + std::to_string(kMaxWindowSide) + "]");

  // Every sub-window fitting in the box in either orientation, at both parities.
  std::vector<SiteRect> windows;
  for (int w = 1; w <= kMaxWindowSide; ++w)
    for (int h = 1; h <= kMaxWindowSide; ++h) {
      const bool fits = (w <= o.width && h <= o.height) || (w <= o.height && h <= o.width);
      if (!fits || w * h < 2) continue;
      for (int x0 = 0; x0 <= 1; ++x0) windows.push_back({x0, 0, w, h});
    }

  json results = json::array();
  std::ostringstream csv, text;
  csv << "model,windows,independent,max_marginal_error,max_total_error,pass\n";
  bool all = true;
  for (const auto& m : o.models) {
    bool independent = true;
    double marg_err = 0.0, total_err = 0.0;
    for (const auto& w : windows) {
      const WindowDistribution d = exact_window_distribution(m, w);
      total_err = std::max(total_err, std::fabs(d.total() - 1.0));
      for (std::size_t e = 0; e < d.edges.size(); ++e)
        marg_err = std::max(marg_err, std::fabs(d.marginal(static_cast<int>(e)) - edge_probability(m)));
      independent = independent && verify_one_independence(d, o.tol);
    }
    const bool pass = independent && marg_err <= o.tol && total_err <= o.tol;
    all = all && pass;
    results.push_back({{"model", m.name()},
                       {"windows", windows.size()},
                       {"independent", independent},
                       {"edge_probability", edge_probability(m)},
                       {"max_marginal_error", marg_err},
                       {"max_total_error", total_err},
                       {"pass", pass}});
    csv << m.name() << ',' << windows.size() << ',' << (independent ? "true" : "false") << ',' << fmt("%.3e", marg_err)
        << ',' << fmt("%.3e", total_err) << ',' << (pass ? "true" : "false") << '\n';
    text << (pass ? "PASS " : "FAIL ") << m.name() << ": " << (independent ? "1-independent" : "not 1-independent")
         << " on " << windows.size() << " windows, marginal error " << fmt("%.1e", marg_err) << '\n';
  }
  r.data = {{"width", o.width}, {"height", o.height}, {"tol", o.tol}, {"models", results}, {"all_pass", all}};
  r.csv = csv.str();
  r.text = text.str();
  r.exit_code = all ? kEstablished : kNotEstablished;
  return r;
}

CommandResult cmd_simulate(const ExperimentConfig& cfg, const Progress& progress) {
  CommandResult r;
  r.subcommand = "simulate";
  cfg.validate();
  r.config = {{"experiment", to_string(cfg.experiment)}, {"N", cfg.N}, {"T", cfg.T}, {"model", cfg.model.name()},
              {"threshold", cfg.threshold}, {"seed", cfg.seed}, {"significance", cfg.significance},
              {"threads", cfg.threads}};
  say(progress, "running " + std::to_string(cfg.T) + " " + to_string(cfg.experiment) + " trials at N = " +
                    std::to_string(cfg.N));
  const ExperimentReport rep = run_experiment(cfg);
  r.data = json::parse(rep.to_json());
  std::ostringstream csv;
  csv << "trial,outcome,seconds\n";
  for (int i = 0; i < rep.trials; ++i)
    csv << i << ',' << (rep.outcomes[static_cast<std::size_t>(i)] ? 1 : 0) << ','
        << fmt("%.3f", rep.durations[static_cast<std::size_t>(i)]) << '\n';
  r.csv = csv.str();
  r.text = std::to_string(rep.successes) + " of " + std::to_string(rep.trials) + " trials succeeded; p-value " +
           fmt("%.3e", rep.p_value) + " against success probability " + fmt("%.6g", cfg.threshold) + "\n" +
           (rep.passes ? "significant at " : "not significant at ") + fmt("%.3g", cfg.significance) + " (" +
           fmt("%.1f", rep.wall_seconds) + " s)\n";
  r.exit_code = rep.passes ? kEstablished : kNotEstablished;
  return r;
}

CommandResult cmd_fixtures() {
  CommandResult r;
  r.subcommand = "fixtures";
  r.config = json::object();
  json graphs = json::array();
  std::ostringstream csv, text;
  csv << "graph,edges,subsets,connected_spanning,good_pair_c0,good_pair_c1,good_pair_c2,good_pair_c3,three_of_four\n";
  for (const auto& g : {build_hypercube(2), build_hypercube(3), build_rectangle_4x2()}) {
    const EnumerationFixture f = enumerate_fixture(g);
    json j = {{"graph", f.graph}, {"edges", f.edge_count}, {"subsets", f.subsets}, {"connected_spanning", f.connected_spanning}};
    const bool rect = g.name() == build_rectangle_4x2().name();
    if (rect) {
      j["good_pair"] = f.good_pair;
      j["three_of_four"] = f.three_of_four;
    }
    graphs.push_back(j);
    csv << f.graph << ',' << f.edge_count << ',' << f.subsets << ',' << f.connected_spanning;
    for (int c = 0; c < 4; ++c) csv << ',' << (rect ? std::to_string(f.good_pair[static_cast<std::size_t>(c)]) : "");
    csv << ',' << (rect ? std::to_string(f.three_of_four) : "") << '\n';
    text << f.graph << ": " << f.subsets << " subsets, " << f.connected_spanning << " connected spanning\n";
  }
  const bool cover = verify_ten_pattern_cover();
  r.data = {{"graphs", graphs}, {"ten_pattern_cover", cover}};
  r.csv = csv.str();
  r.text = text.str() + (cover ? "ten-pattern cover holds\n" : "ten-pattern cover FAILS\n");
  r.exit_code = cover ? kEstablished : kNotEstablished;
  return r;
}

CommandResult cmd_certificate(const CertificateOptions& o) {
  CommandResult r;
  r.subcommand = "certificate";
  r.config = {{"graph", o.graph}, {"p", o.p}};
  const SmallGridGraph g = graph_by_name(o.graph);
  const LinearProgramSpec lp = build_connectivity_lp(g, o.p);
  const CertifiedBound b = min_connect_prob(g, o.p);
  if (b.problem_hash != problem_hash(lp)) throw std::runtime_error("certificate was issued for a different program");
  const bool ok = verify_lower_bound(lp, b.certificate, 1e-9);
  r.data = {{"graph", g.name()},
            {"p", o.p},
            {"variables", lp.n_vars},
            {"constraints", lp.constraints.size()},
            {"problem_hash", hex64(b.problem_hash)},
            {"bound", b.value},
            {"lp_optimum", b.lp_optimum},
            {"certified_bound", b.certificate.certified_bound},
            {"certificate_hash", hex64(b.certificate_hash)},
            {"dual_vector", b.certificate.dual},
            {"residuals",
             {{"max_residual", b.certificate.max_residual}, {"min_reduced_cost", b.rigorous.min_reduced_cost}}},
            {"verified", ok}};
  r.text = "minimum connection probability of " + g.name() + " at p = " + fmt("%.6g", o.p) + " is at least " +
           format_decimal6(b.value) + (ok ? " (certificate verified)\n" : " (certificate FAILED verification)\n");
  r.exit_code = ok ? kEstablished : kNotEstablished;
  return r;
}

WrittenFiles write_outputs(const CommandResult& r, Format f, const std::filesystem::path& dir, double wall_seconds) {
  std::filesystem::create_directories(dir);
  WrittenFiles w;
  json outputs = json::array();
  auto emit = [&](const std::string& name, const std::string& body) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + path.string());
    w.outputs.push_back(path);
    outputs.push_back({{"path", name}, {"bytes", body.size()}, {"fnv1a", hex64(fnv1a(body))}});
  };
  emit(r.subcommand + "." + r.file_extension(f), r.render(f));
  if (f != Format::json) emit(r.subcommand + ".json", r.render(Format::json));

  const json manifest = {{"subcommand", r.subcommand},
                         {"config", r.config},
                         {"tool_version", tool_version()},
                         {"input_hash", hex64(fnv1a(r.config.dump()))},
                         {"outputs", outputs},
                         {"exit_code", r.exit_code},
                         {"wall_seconds", wall_seconds},
                         {"finished_at", utc_now()}};
  w.manifest = dir / (r.subcommand + ".manifest.json");
  std::ofstream out(w.manifest, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + w.manifest.string());
  out << manifest.dump(2) << '\n';
  return w;
}

}  // namespace oneperc::cli
