#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "acceptance.hpp"
#include "gapcount/csv.hpp"
#include "gapcount/floquet.hpp"
#include "gapcount/gamma.hpp"
#include "gapcount/pdo_lab.hpp"
#include "gapcount/periodic_graph.hpp"
#include "gapcount/spectral_counts.hpp"
#include "gapcount/weak_lp.hpp"
#include "json.hpp"

namespace gapcount::cli {

namespace {

using nlohmann::json;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::string graph;
  std::string out;
  std::string format = "csv";
};

json real(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

// Results go to --out when given, otherwise to the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

PeriodicGraph load_graph(const std::string& path) {
  if (path.empty()) throw UsageError("--graph is required");
  return build_graph(load_graph_spec(path));
}

void emit_json(std::ostream& out, const json& doc) {
  out << std::setw(2) << doc << "\n";
}

void add_common(CLI::App* cmd, Common& c, bool needs_graph = true) {
  if (needs_graph) cmd->add_option("--graph", c.graph, "graph spec JSON")->required();
  cmd->add_option("--out", c.out, "output path (default: stdout)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

std::vector<std::string> bands_header(const BandStructure& b) {
  std::vector<std::string> h;
  for (int a = 1; a <= b.grid.dim(); ++a) h.push_back("k_" + std::to_string(a));
  for (int s = 1; s <= b.nu; ++s) h.push_back("E_" + std::to_string(s));
  return h;
}

json gap_json(const Gap& g) {
  json j{{"kind", to_string(g.kind)}, {"lower", real(g.lower)}, {"upper", real(g.upper)},
         {"grid_step", g.grid_step}};
  if (g.kind == GapKind::interior) j["band_above"] = g.band_above;
  return j;
}

std::vector<GapEdge> gap_edges(const Gap& gap, const BandStructure& bands) {
  std::vector<GapEdge> edges;
  if (gap.kind != GapKind::left_semi_infinite) edges.push_back(left_edge(gap, bands));
  if (gap.kind != GapKind::right_semi_infinite) edges.push_back(right_edge(gap, bands));
  return edges;
}

const Gap& pick_gap(const std::vector<Gap>& gaps, int index) {
  if (index < 0 || index >= static_cast<int>(gaps.size())) {
    throw UsageError("--gap must be in 0.." + std::to_string(gaps.size() - 1));
  }
  return gaps[index];
}

std::vector<double> edge_point(const std::vector<std::vector<double>>& pts) {
  return pts.empty() ? std::vector<double>{} : pts[0];
}

std::string edge_name(const GapEdge& e) { return e.is_maximum ? "left" : "right"; }

int run_verify(const std::string& only_text, std::ostream& out) {
  std::set<int> only;
  std::istringstream in(only_text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    try {
      only.insert(std::stoi(tok));
    } catch (const std::exception&) {
      throw UsageError("--only expects a comma-separated list of criterion numbers");
    }
  }
  auto results = acceptance::run(out, only);
  bool ok = acceptance::all_passed(results);
  int passed = 0;
  for (const auto& r : results) passed += r.pass;
  out << passed << "/" << results.size() << " criteria passed\n";
  return ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral gap counting on periodic graphs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  int grid = 0;
  double lambda = 0.0, p = 1.0, kappa = 1.5;
  std::string sign_text = "minus", theta_text = "const:1";
  int gap_index = -1;
  std::vector<double> taus;
  std::vector<int> radii;
  double support_factor = 10.0;

  auto* bands_cmd = app.add_subcommand("bands", "band functions on a torus grid");
  add_common(bands_cmd, common);
  bands_cmd->add_option("--grid", grid, "points per axis")->required()->check(CLI::Range(2, 1 << 20));

  auto* gaps_cmd = app.add_subcommand("gaps", "spectral gaps certified on a grid");
  add_common(gaps_cmd, common);
  gaps_cmd->add_option("--grid", grid, "points per axis")->check(CLI::Range(2, 1 << 20));

  auto* reg_cmd = app.add_subcommand("regularity", "regularity of gap edges");
  add_common(reg_cmd, common);
  reg_cmd->add_option("--grid", grid, "points per axis")->check(CLI::Range(4, 1 << 20));
  reg_cmd->add_option("--gap", gap_index, "gap index (default: all)");

  auto* gamma_cmd = app.add_subcommand("gamma", "asymptotic coefficient Gamma_p(lambda)");
  add_common(gamma_cmd, common);
  gamma_cmd->add_option("--lambda", lambda)->required();
  gamma_cmd->add_option("--p", p)->check(CLI::PositiveNumber);
  gamma_cmd->add_option("--sign", sign_text, "plus or minus");
  gamma_cmd->add_option("--theta", theta_text, "angular profile preset");
  gamma_cmd->add_option("--grid", grid, "band grid for gap certification");

  auto* cond_cmd = app.add_subcommand("edge-conditions", "integrability conditions at gap edges");
  add_common(cond_cmd, common);
  cond_cmd->add_option("--gap", gap_index, "gap index (default: all)");
  cond_cmd->add_option("--kappa", kappa, "integrability exponent")->check(CLI::NonNegativeNumber);
  cond_cmd->add_option("--p", p, "weak-class exponent")->check(CLI::PositiveNumber);
  cond_cmd->add_option("--theta", theta_text, "angular profile for the edge Gamma");
  cond_cmd->add_option("--grid", grid, "band grid");

  int radius = 0;
  double tau = 1.0;
  auto* count_cmd = app.add_subcommand("count", "N(lambda, tau) by both counting routes");
  add_common(count_cmd, common);
  count_cmd->add_option("--L", radius, "truncation radius")->required()->check(CLI::NonNegativeNumber);
  count_cmd->add_option("--lambda", lambda)->required();
  count_cmd->add_option("--tau", taus, "coupling constant(s)")->delimiter(',')->required();
  count_cmd->add_option("--sign", sign_text);
  count_cmd->add_option("--theta", theta_text);
  count_cmd->add_option("--p", p)->check(CLI::PositiveNumber);

  auto* asym_cmd = app.add_subcommand("asymptotics", "N / (tau^p Gamma) over tau and L ladders");
  add_common(asym_cmd, common);
  asym_cmd->add_option("--lambda", lambda)->required();
  asym_cmd->add_option("--tau", taus, "tau list")->delimiter(',')->required();
  asym_cmd->add_option("--L", radii, "increasing truncation radii")->delimiter(',')->required();
  asym_cmd->add_option("--sign", sign_text);
  asym_cmd->add_option("--theta", theta_text);
  asym_cmd->add_option("--p", p)->check(CLI::PositiveNumber);
  asym_cmd->add_option("--support-factor", support_factor)->check(CLI::PositiveNumber);

  std::string mode = "svalues", f_text = "const:1", g_text = "const:1", v_text = "const:1";
  int dim = 1, pdo_grid = 0;
  double q = 2.0;
  auto* pdo_cmd = app.add_subcommand("pdo", "finite sections of f Phi W Phi^* g");
  add_common(pdo_cmd, common, false);
  pdo_cmd->add_option("--mode", mode)->check(
      CLI::IsMember({"svalues", "cwikel", "dp", "commutator"}));
  pdo_cmd->add_option("--dim", dim)->check(CLI::Range(1, 3));
  pdo_cmd->add_option("--f", f_text, "torus function preset");
  pdo_cmd->add_option("--g", g_text, "torus function preset");
  pdo_cmd->add_option("--v", v_text, "angular profile of W");
  pdo_cmd->add_option("--p", p)->check(CLI::PositiveNumber);
  pdo_cmd->add_option("--q", q, "L_q exponent for the Cwikel ratio")->check(CLI::PositiveNumber);
  pdo_cmd->add_option("--L", radii, "truncation radius (several for dp summaries)")->delimiter(',')->required();
  pdo_cmd->add_option("--M", pdo_grid, "torus grid (default 8L)");

  std::string input;
  std::vector<double> window_bounds;
  auto* weak_cmd = app.add_subcommand("weaklp", "weak l_p functionals of a sequence");
  add_common(weak_cmd, common, false);
  weak_cmd->add_option("--input", input, "file with one number per line")->required();
  weak_cmd->add_option("--p", p)->check(CLI::PositiveNumber);
  weak_cmd->add_option("--window", window_bounds, "s_lo s_hi")->expected(2);

  std::string only;
  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
  verify_cmd->add_option("--only", only, "comma-separated criterion numbers");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const bool json_out = common.format == "json";
    if (verify_cmd->parsed()) return run_verify(only, out);

    if (bands_cmd->parsed()) {
      auto b = band_structure(load_graph(common.graph), grid);
      Sink sink(common.out, out);
      if (json_out) {
        json rows = json::array();
        for (std::size_t i = 0; i < b.grid.points(); ++i) {
          json e = json::array();
          for (int s = 0; s < b.nu; ++s) e.push_back(b.band(i, s));
          rows.push_back({{"k", b.grid.point(i)}, {"E", e}});
        }
        emit_json(*sink, {{"grid", grid}, {"points", rows}});
      } else {
        write_band_csv(*sink, b);
      }
      return 0;
    }

    if (gaps_cmd->parsed()) {
      auto graph = load_graph(common.graph);
      auto b = band_structure(graph, grid > 0 ? grid : 64);
      auto gaps = find_gaps(b);
      Sink sink(common.out, out);
      if (json_out) {
        json arr = json::array();
        for (const auto& g : gaps) arr.push_back(gap_json(g));
        emit_json(*sink, arr);
      } else {
        *sink << "index,kind,lower,upper,band_above,grid_step\n";
        for (std::size_t i = 0; i < gaps.size(); ++i) {
          const auto& g = gaps[i];
          write_csv_row(*sink, {std::to_string(i), to_string(g.kind), format_real(g.lower),
                                format_real(g.upper),
                                g.kind == GapKind::interior ? std::to_string(g.band_above) : "",
                                format_real(g.grid_step)});
        }
      }
      return 0;
    }

    if (reg_cmd->parsed()) {
      auto graph = load_graph(common.graph);
      auto sampler = BandSampler::from_graph(graph);
      auto b = band_structure(sampler, grid > 0 ? grid : (graph.dim() == 1 ? 64 : 16));
      auto gaps = find_gaps(b);
      std::vector<std::size_t> picked;
      if (gap_index >= 0) {
        pick_gap(gaps, gap_index);
        picked.push_back(gap_index);
      } else {
        for (std::size_t i = 0; i < gaps.size(); ++i) picked.push_back(i);
      }
      Sink sink(common.out, out);
      json arr = json::array();
      if (!json_out) *sink << "gap,edge,value,band,verdict,extremizers,hessian_min_abs_eig,reason\n";
      for (auto i : picked) {
        for (const auto& e : gap_edges(gaps[i], b)) {
          auto r = check_edge_regularity(sampler, b, e);
          double min_eig = NAN;
          for (const auto& h : r.hessians) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
            double m = es.eigenvalues().cwiseAbs().minCoeff();
            min_eig = std::isnan(min_eig) ? m : std::min(min_eig, m);
          }
          const char* verdict = r.verdict == Verdict::yes ? "regular"
                                : r.verdict == Verdict::no ? "non-regular"
                                                           : "inconclusive";
          if (json_out) {
            json hs = json::array();
            for (const auto& h : r.hessians) {
              json rows = json::array();
              for (int a = 0; a < h.rows(); ++a) {
                json row = json::array();
                for (int c = 0; c < h.cols(); ++c) row.push_back(h(a, c));
                rows.push_back(row);
              }
              hs.push_back(rows);
            }
            arr.push_back({{"gap", i}, {"edge", edge_name(e)}, {"value", e.value},
                           {"band", e.band + 1}, {"verdict", verdict},
                           {"extremizers", r.extremizers}, {"hessians", hs}, {"reason", r.reason}});
          } else {
            write_csv_row(*sink, {std::to_string(i), edge_name(e), format_real(e.value),
                                  std::to_string(e.band + 1), verdict,
                                  std::to_string(r.extremizers.size()), format_real(min_eig),
                                  "\"" + r.reason + "\""});
          }
        }
      }
      if (json_out) emit_json(*sink, arr);
      return 0;
    }

    if (gamma_cmd->parsed()) {
      auto graph = load_graph(common.graph);
      auto sampler = BandSampler::from_graph(graph);
      auto b = band_structure(sampler, grid > 0 ? grid : (graph.dim() == 1 ? 256 : 32));
      auto theta = AngularProfile::parse(theta_text, graph.dim());
      auto r = gamma_coefficient(sampler, b, lambda, p, parse_sign(sign_text), theta);
      if (common.out.empty()) {
        out << format_real(r.value) << "\n";
      } else {
        Sink sink(common.out, out);
        if (json_out) {
          emit_json(*sink, {{"lambda", r.lambda}, {"p", r.p}, {"sign", to_string(r.sign)},
                            {"gamma", r.value}, {"torus_integrals", r.torus_integrals},
                            {"sphere", r.sphere}, {"grids", r.grids}});
        } else {
          write_gamma_csv_header(*sink);
          write_gamma_csv_row(*sink, r);
        }
        out << format_real(r.value) << "\n";
      }
      return 0;
    }

    if (cond_cmd->parsed()) {
      auto graph = load_graph(common.graph);
      auto sampler = BandSampler::from_graph(graph);
      auto b = band_structure(sampler, grid > 0 ? grid : (graph.dim() == 1 ? 256 : 32));
      auto gaps = find_gaps(b);
      auto theta = AngularProfile::parse(theta_text, graph.dim());
      std::vector<std::size_t> picked;
      if (gap_index >= 0) {
        pick_gap(gaps, gap_index);
        picked.push_back(gap_index);
      } else {
        for (std::size_t i = 0; i < gaps.size(); ++i) picked.push_back(i);
      }
      Sink sink(common.out, out);
      json arr = json::array();
      if (!json_out) {
        *sink << "gap,edge,value,kappa,integral_verdict,integral_growth,p,weak_verdict,weak_sup,"
                 "gamma_edge\n";
      }
      for (auto i : picked) {
        for (const auto& e : gap_edges(gaps[i], b)) {
          auto eg = gamma_at_edge(sampler, e, p, theta, kappa);
          auto weak = weak_edge_membership(sampler, e, p);
          double gval = eg.value ? eg.value->value : NAN;
          if (json_out) {
            json ladder = json::array();
            for (const auto& st : eg.condition.ladder)
              ladder.push_back({{"grid", st.grid}, {"total", real(st.total)}});
            arr.push_back({{"gap", i}, {"edge", edge_name(e)}, {"value", e.value},
                           {"kappa", kappa}, {"integral_verdict", to_string(eg.condition.verdict)},
                           {"ladder", ladder}, {"p", p}, {"weak_verdict", to_string(weak.verdict)},
                           {"weak_sup", real(weak.weak_sup.value_or(NAN))},
                           {"gamma_edge", real(gval)}});
          } else {
            write_csv_row(*sink, {std::to_string(i), edge_name(e), format_real(e.value),
                                  format_real(kappa), to_string(eg.condition.verdict),
                                  format_real(eg.condition.growth), format_real(p),
                                  to_string(weak.verdict), format_real(weak.weak_sup.value_or(NAN)),
                                  format_real(gval)});
          }
        }
      }
      if (json_out) emit_json(*sink, arr);
      return 0;
    }

    if (count_cmd->parsed()) {
      auto graph = load_graph(common.graph);
      auto h = assemble_truncated(graph, radius);
      auto v = sample_potential(graph, AngularProfile::parse(theta_text, graph.dim()), p, radius);
      Sign sign = parse_sign(sign_text);
      auto spectrum = bs_spectrum(bs_matrix(h, v, lambda));
      Sink sink(common.out, out);
      json arr = json::array();
      if (!json_out) *sink << "lambda,tau,L,N_bs,N_direct,flags\n";
      for (double t : taus) {
        if (!(t > 0.0)) throw UsageError("--tau values must be > 0");
        auto bs = counting_bs(spectrum, t, sign);
        auto direct = counting_direct(h, v, lambda, t, sign);
        std::string flags = bs.boundary ? "boundary" : "";
        if (json_out) {
          arr.push_back({{"lambda", lambda}, {"tau", t}, {"L", radius}, {"N_bs", bs.value},
                         {"N_direct", direct.value}, {"flags", flags}});
        } else {
          write_csv_row(*sink, {format_real(lambda), format_real(t), std::to_string(radius),
                                std::to_string(bs.value), std::to_string(direct.value), flags});
        }
      }
      if (json_out) emit_json(*sink, arr);
      return 0;
    }

    if (asym_cmd->parsed()) {
      auto graph = load_graph(common.graph);
      AsymptoticOptions opts;
      opts.support_factor = support_factor;
      auto t = asymptotic_table(graph, AngularProfile::parse(theta_text, graph.dim()), p, lambda,
                                parse_sign(sign_text), taus, radii, opts);
      Sink sink(common.out, out);
      if (json_out) {
        json rows = json::array();
        for (const auto& r : t.rows) {
          rows.push_back({{"lambda", r.lambda}, {"tau", r.tau}, {"L", r.radius},
                          {"N_bs", r.n_bs}, {"N_direct", r.n_direct}, {"gamma", r.gamma},
                          {"ratio", real(r.ratio)}, {"flags", r.flags},
                          {"counts_by_L", r.radius_counts}});
        }
        emit_json(*sink, {{"profile", t.profile}, {"p", t.p}, {"sign", to_string(t.sign)},
                          {"rows", rows}});
      } else {
        write_counting_csv(*sink, t);
      }
      return 0;
    }

    if (pdo_cmd->parsed()) {
      auto f = TorusFunction::parse(f_text, dim);
      auto g = TorusFunction::parse(g_text, dim);
      auto v = AngularProfile::parse(v_text, dim);
      auto w = LatticeSymbol::homogeneous(dim, v, p);
      Sink sink(common.out, out);
      if (mode == "dp") {
        std::vector<DpSummaryRow> rows;
        for (int r : radii) {
          auto c = dp_vs_formula(f, v, g, p, r, pdo_grid);
          rows.push_back({r, c.report.grid, c.empirical.sup_est, c.empirical.inf_est, c.formula});
        }
        if (json_out) {
          json arr = json::array();
          for (const auto& r : rows)
            arr.push_back({{"L", r.radius}, {"M", r.grid}, {"dp_sup", r.dp_sup},
                           {"dp_inf", r.dp_inf}, {"formula", r.formula}});
          emit_json(*sink, arr);
        } else {
          write_dp_summary_csv(*sink, rows);
        }
        return 0;
      }
      if (mode == "cwikel") {
        json arr = json::array();
        if (!json_out) *sink << "L,M,ratio\n";
        for (int r : radii) {
          int m = pdo_grid > 0 ? pdo_grid : std::max(8 * r, 16);
          double ratio = cwikel_ratio(f, w, p, q, r, m);
          if (json_out) {
            arr.push_back({{"L", r}, {"M", m}, {"ratio", ratio}});
          } else {
            write_csv_row(*sink, {std::to_string(r), std::to_string(m), format_real(ratio)});
          }
        }
        if (json_out) emit_json(*sink, arr);
        return 0;
      }
      if (radii.size() != 1) throw UsageError("--L takes a single radius in this mode");
      WeightedSequence s = mode == "commutator"
                               ? commutator_decay(f, w, p, radii[0]).svalues
                               : pdo_singular_values({f, g, w, p, radii[0], pdo_grid}).svalues;
      if (json_out) {
        emit_json(*sink, {{"mode", mode}, {"p", p}, {"L", radii[0]},
                          {"svalues", std::vector<double>(s.values().begin(), s.values().end())}});
      } else {
        write_svalue_csv(*sink, s, p);
      }
      return 0;
    }

    if (weak_cmd->parsed()) {
      std::ifstream in(input);
      if (!in) throw UsageError("cannot open '" + input + "'");
      std::vector<double> vals;
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        double x;
        if (!(row >> x)) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          throw UsageError(input + ":" + std::to_string(lineno) + ": not a number");
        }
        std::string rest;
        if (row >> rest) throw UsageError(input + ":" + std::to_string(lineno) + ": one number per line");
        vals.push_back(x);
      }
      WeightedSequence seq(vals);
      auto verdicts = membership_verdicts(seq, p);
      std::optional<DpWindowEstimate> window;
      if (window_bounds.size() == 2) {
        window = dp_window(seq, p, window_bounds[0], window_bounds[1]);
      } else if (seq.size() >= 10 && seq[9] > 0.0) {
        window = dp_window_default(seq, p);
      }
      Sink sink(common.out, out);
      if (json_out) {
        json j{{"p", p}, {"count", seq.size()}, {"weak_quasinorm", weak_quasinorm(seq, p)},
               {"weak", to_string(verdicts.weak)}, {"small_o", to_string(verdicts.small_o)}};
        if (window) {
          j["window"] = {{"s_lo", window->s_lo}, {"s_hi", window->s_hi},
                         {"sup", window->sup_est}, {"inf", window->inf_est},
                         {"samples", window->samples}};
        }
        emit_json(*sink, j);
      } else {
        *sink << "p,count,weak_quasinorm,weak,small_o,s_lo,s_hi,dp_sup,dp_inf\n";
        write_csv_row(*sink, {format_real(p), std::to_string(seq.size()),
                              format_real(weak_quasinorm(seq, p)), to_string(verdicts.weak),
                              to_string(verdicts.small_o),
                              window ? format_real(window->s_lo) : "",
                              window ? format_real(window->s_hi) : "",
                              window ? format_real(window->sup_est) : "",
                              window ? format_real(window->inf_est) : ""});
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace gapcount::cli
