// qpt: quasipotential toolkit command line.
//
// Subcommands: equilibria | qp | gatescan | mc | contours. Each run writes
// its outputs plus a manifest.json with the resolved configuration.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 anchor or participant eliminated by a bifurcation.

#include <CLI11.hpp>
#include <json.hpp>

#include <qpt/contours.hpp>
#include <qpt/equilibria.hpp>
#include <qpt/gates.hpp>
#include <qpt/mc.hpp>
#include <qpt/model.hpp>
#include <qpt/solver.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpt;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kSchemaVersion = 1;

struct EliminatedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("QPT_OUTPUT_ROOT")) return env;
  return ".";
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& resolved) {
  json m;
  m["tool"] = "qpt";
  m["version"] = kVersion;
  m["schema_version"] = kSchemaVersion;
  m["command"] = command;
  m["config"] = resolved;
  std::ofstream os(dir / "manifest.json");
  os << m.dump(2) << '\n';
}

NetworkDrift make_network(const std::string& preset, ModelParams p,
                          const std::string& model_file) {
  if (!model_file.empty()) {
    std::ifstream is(model_file);
    if (!is) throw CLI::ValidationError("model file not readable: " + model_file);
    json j = json::parse(is);
    return NetworkDrift::from_json(j);
  }
  auto s = node_states(p.nu);
  if (preset == "single") return NetworkDrift::single_node(p);
  if (preset == "two_node") return NetworkDrift::two_node(p);
  if (preset == "three_node") return NetworkDrift::three_node(p);
  if (preset == "slice_q") return NetworkDrift::three_node_slice(p, s.x_q);
  if (preset == "slice_a") return NetworkDrift::three_node_slice(p, s.x_a);
  throw CLI::ValidationError("unknown preset: " + preset);
}

// Domain defaults follow the anchor: widen when an active state is in view.
Grid2D default_domain(const std::string& anchor_label, int n) {
  bool active = anchor_label.find('A') != std::string::npos;
  return active ? Grid2D::square(-0.45, 1.3, n) : Grid2D::square(-0.45, 0.35, n);
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("config file not readable: " + path);
  return json::parse(is);
}

// Config-file values fill in any flag the user did not pass explicitly.
template <typename T>
void merge(const json& cfg, const char* key, CLI::Option* opt, T& var) {
  if (opt->count() == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

void require_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CLI::ValidationError("cannot create " + dir.string());
}

// ---- equilibria ------------------------------------------------------------

int cmd_equilibria(const json& cfg, std::string preset, std::string model_file,
                   double nu, double alpha, double beta_min, double beta_max,
                   double step, std::string outflag) {
  ModelParams p;
  p.nu = nu;
  p.alpha = alpha;
  auto net = make_network(preset, p, model_file);
  fs::path dir = output_dir(outflag);
  require_dir(dir);

  json resolved = {{"preset", preset},   {"nu", nu},
                   {"alpha", alpha},     {"beta_min", beta_min},
                   {"beta_max", beta_max}, {"step", step},
                   {"network", net.to_json()}};
  write_manifest(dir, "equilibria", resolved);

  if (beta_max <= beta_min) {
    // zero-width range: plain equilibrium listing at beta_min
    auto eqs = find_equilibria(net.with_beta(beta_min));
    std::ofstream os(dir / "equilibria.csv");
    os << "label,x1,x2,stability\n";
    os.precision(12);
    for (const auto& e : eqs)
      os << e.label << ',' << e.position[0] << ',' << e.position[1] << ','
         << stability_name(e.stability) << '\n';
    std::cout << "wrote " << (dir / "equilibria.csv").string() << " ("
              << eqs.size() << " equilibria)\n";
    return 0;
  }

  auto branches = continue_all_branches(net, beta_max, step);
  auto scan = detect_bifurcations(net, branches);

  std::ofstream bos(dir / "branches.csv");
  bos << "branch,label,beta,x1,x2,stability\n";
  bos.precision(12);
  for (std::size_t b = 0; b < branches.size(); ++b)
    for (std::size_t k = 0; k < branches[b].betas.size(); ++k)
      bos << b << ',' << branches[b].label << ',' << branches[b].betas[k]
          << ',' << branches[b].states[k].position[0] << ','
          << branches[b].states[k].position[1] << ','
          << stability_name(branches[b].states[k].stability) << '\n';

  std::ofstream fos(dir / "bifurcations.csv");
  fos << "kind,beta,participant1,participant2,x1,x2\n";
  fos.precision(12);
  for (const auto& bp : scan.points)
    fos << (bp.kind == BifurcationKind::SaddleNode ? "saddle-node"
                                                   : "transcritical")
        << ',' << bp.beta << ',' << bp.participants.first << ','
        << bp.participants.second << ',' << bp.position[0] << ','
        << bp.position[1] << '\n';

  for (const auto& w : scan.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "wrote " << (dir / "bifurcations.csv").string() << " ("
            << scan.points.size() << " points)\n";
  return 0;
}

// ---- qp --------------------------------------------------------------------

int cmd_qp(const json& cfg, std::string preset, std::string model_file,
           double nu, double alpha, double beta, std::string anchor_label,
           int grid_n, std::string domain_csv, std::string levels_csv,
           std::string outflag) {
  ModelParams p;
  p.nu = nu;
  p.alpha = alpha;
  auto net = make_network(preset, p, model_file);
  fs::path dir = output_dir(outflag);
  require_dir(dir);

  auto anchor = locate_labeled(net, anchor_label, beta);
  if (!anchor) {
    auto fb = fold_of_labeled(net, anchor_label, beta);
    std::ostringstream msg;
    msg << "anchor " << anchor_label << " does not exist at beta=" << beta;
    if (fb) msg << "; eliminated by the saddle-node at beta=" << *fb;
    throw EliminatedError(msg.str());
  }

  Grid2D domain = default_domain(anchor_label, grid_n);
  if (!domain_csv.empty()) {
    auto d = parse_list(domain_csv);
    if (d.size() != 4)
      throw CLI::ValidationError("--domain needs x0,x1,y0,y1");
    domain = Grid2D(d[0], d[1], d[2], d[3], grid_n, grid_n);
  }

  json resolved = {{"preset", preset}, {"nu", nu},       {"alpha", alpha},
                   {"beta", beta},     {"anchor", anchor_label},
                   {"grid", grid_n},   {"network", net.to_json()}};
  write_manifest(dir, "qp", resolved);

  auto scoped = net.with_beta(beta);
  QPField field = solve(scoped, domain, anchor->position);
  field.anchor_label = anchor_label;
  save_field(field, (dir / "field.qpf").string());

  // contour levels: explicit list, or ten uniform levels below the max
  std::vector<double> levels = parse_list(levels_csv);
  if (levels.empty()) {
    double vmax = 0.0;
    for (std::size_t i = 0; i < field.values.size(); ++i)
      if (field.status[i] == PointStatus::Accepted)
        vmax = std::max(vmax, field.values[i]);
    for (int i = 1; i <= 10; ++i) levels.push_back(vmax * i / 11.0);
  }
  save_contours_csv(extract_contours(field, levels),
                    (dir / "contours.csv").string());

  // gate report over all saddles present at this beta
  json grep_json;
  grep_json["schema_version"] = kSchemaVersion;
  grep_json["beta"] = beta;
  grep_json["anchor"] = anchor_label;
  std::vector<Equilibrium> saddles;
  for (const auto& e : find_equilibria(scoped))
    if (e.stability == Stability::Saddle) saddles.push_back(e);
  try {
    auto rep = gate_heights(field, saddles);
    grep_json["gate"] = rep.gate;
    json hj = json::object();
    for (const auto& [label, h] : rep.heights) {
      if (h.reachable)
        hj[label] = h.value;
      else
        hj[label] = "unreachable";
    }
    grep_json["heights"] = hj;
  } catch (const std::runtime_error&) {
    grep_json["gate"] = nullptr;
    grep_json["warning"] = "no saddle reachable from this anchor";
  }
  std::ofstream os(dir / "gates.json");
  os << grep_json.dump(2) << '\n';
  std::cout << "wrote " << (dir / "field.qpf").string() << ", contours.csv, gates.json\n";
  return 0;
}

// ---- gatescan --------------------------------------------------------------

int cmd_gatescan(const json& cfg, std::string preset, std::string model_file,
                 double nu, double alpha, double beta_lo, double beta_hi,
                 std::string anchor_label, std::string saddle1,
                 std::string saddle2, int fine_n, int coarse_n, int samples,
                 double tol, std::string outflag) {
  ModelParams p;
  p.nu = nu;
  p.alpha = alpha;
  auto net = make_network(preset, p, model_file);
  fs::path dir = output_dir(outflag);
  require_dir(dir);

  GateScanParams gp;
  gp.domain = default_domain(anchor_label + saddle1 + saddle2, 16);
  gp.coarse_n = coarse_n;
  gp.fine_n = fine_n;
  gp.coarse_samples = samples;
  gp.tol_beta = tol;

  json resolved = {{"preset", preset},   {"nu", nu},
                   {"alpha", alpha},     {"beta_lo", beta_lo},
                   {"beta_hi", beta_hi}, {"anchor", anchor_label},
                   {"saddles", {saddle1, saddle2}},
                   {"fine_grid", fine_n}, {"coarse_grid", coarse_n},
                   {"samples", samples}, {"tol_beta", tol},
                   {"network", net.to_json()}};
  write_manifest(dir, "gatescan", resolved);

  auto scan = gate_bifurcation_scan(net, beta_lo, beta_hi, anchor_label,
                                    {saddle1, saddle2}, gp);

  std::ofstream csv(dir / "gatescan.csv");
  csv << "beta,anchor,saddle,height,gate\n";
  csv.precision(12);
  for (std::size_t i = 0; i < scan.betas.size(); ++i)
    for (const auto& [label, h] : scan.reports[i].heights)
      csv << scan.betas[i] << ',' << anchor_label << ',' << label << ','
          << (h.reachable ? std::to_string(h.value) : "unreachable") << ','
          << (scan.reports[i].gate == label ? 1 : 0) << '\n';

  json sj;
  sj["schema_version"] = kSchemaVersion;
  sj["beta_G"] = scan.crossing ? json(*scan.crossing) : json(nullptr);
  sj["bracket"] = {scan.bracket.first, scan.bracket.second};
  sj["grid"] = fine_n;
  sj["tol_beta"] = tol;
  sj["warnings"] = scan.warnings;
  std::ofstream os(dir / "gatescan.json");
  os << sj.dump(2) << '\n';

  if (scan.crossing)
    std::cout << "beta_G = " << *scan.crossing << " in [" << scan.bracket.first
              << ", " << scan.bracket.second << "]\n";
  else
    std::cout << "no crossing in [" << beta_lo << ", " << beta_hi << "]\n";
  for (const auto& w : scan.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

// ---- mc --------------------------------------------------------------------

int cmd_mc(const json& cfg, std::string preset, std::string model_file,
           double nu, double alpha, std::string beta_list, int n_real,
           std::uint64_t seed, double xi, double xi_prime, double t_max,
           int jobs, std::string outflag) {
  auto betas = parse_list(beta_list);
  if (betas.empty()) throw CLI::ValidationError("--beta list is empty");
  fs::path dir = output_dir(outflag);
  require_dir(dir);

  ModelParams p;
  p.nu = nu;
  p.alpha = alpha;

  json resolved = {{"preset", preset}, {"nu", nu},
                   {"alpha", alpha},   {"beta", betas},
                   {"n_realisations", n_real}, {"master_seed", seed},
                   {"xi", xi},         {"xi_prime", xi_prime},
                   {"t_max", t_max}};
  write_manifest(dir, "mc", resolved);

  for (double beta : betas) {
    p.beta = beta;
    SimConfig sim;
    sim.network = make_network(preset, p, model_file);
    sim.n_realisations = n_real;
    sim.master_seed = seed;
    sim.xi = xi;
    sim.xi_prime = xi_prime;
    sim.t_max = t_max;
    auto s = node_states(nu);
    StateVector init(sim.network.dim());
    for (std::size_t i = 0; i < init.size(); ++i) init[i] = s.x_q;

    auto records = run_ensemble(sim, init, jobs);
    auto stats = summarize(records);

    std::ostringstream sub;
    sub << "beta_" << beta;
    fs::path pdir = dir / sub.str();
    require_dir(pdir);

    std::ofstream csv(pdir / "records.csv");
    csv << "realisation,event,time,node,completed\n";
    csv.precision(12);
    for (std::size_t k = 0; k < records.size(); ++k)
      for (std::size_t e = 0; e < records[k].events.size(); ++e)
        csv << k << ',' << e << ',' << records[k].events[e].first << ','
            << records[k].events[e].second << ','
            << (records[k].completed ? 1 : 0) << '\n';

    json sj;
    sj["schema_version"] = kSchemaVersion;
    sj["beta"] = beta;
    sj["n_completed"] = stats.n_completed;
    sj["n_incomplete"] = stats.n_incomplete;
    auto put = [&](const char* key, const std::optional<double>& v) {
      sj[key] = v ? json(*v) : json(nullptr);
    };
    put("first_star", stats.first_star);
    put("first", stats.first);
    put("second_star", stats.second_star);
    put("second", stats.second);
    sj["return_percentage"] = stats.return_percentage;
    sj["p_first_escape"] = stats.p_first_escape;
    sj["p_final_direction"] = stats.p_final_direction;
    // 95% binomial half-width for the direction estimates
    if (stats.n_completed > 0)
      sj["direction_ci_halfwidth"] =
          1.96 * std::sqrt(0.25 / stats.n_completed);
    json hist = json::array();
    for (const auto& [seq, prob] : stats.sequence_histogram)
      hist.push_back({{"sequence", seq}, {"probability", prob}});
    sj["sequence_histogram"] = hist;
    std::ofstream os(pdir / "summary.json");
    os << sj.dump(2) << '\n';
    std::cout << "beta=" << beta << ": " << stats.n_completed << " completed, "
              << stats.return_percentage << "% returning\n";
  }
  return 0;
}

// ---- contours ---------------------------------------------------------------

int cmd_contours(const json& cfg, std::string field_file,
                 std::string levels_csv, std::string outflag) {
  auto levels = parse_list(levels_csv);
  if (levels.empty()) throw CLI::ValidationError("--levels is empty");
  QPField field = load_field(field_file);
  fs::path dir = output_dir(outflag);
  require_dir(dir);
  json resolved = {{"field", field_file}, {"levels", levels}};
  write_manifest(dir, "contours", resolved);
  auto lines = extract_contours(field, levels);
  save_contours_csv(lines, (dir / "contours.csv").string());
  std::cout << "wrote " << (dir / "contours.csv").string() << " ("
            << lines.size() << " polylines)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpt: planar quasipotential toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, outdir;
  app.add_option("--config", config_path, "JSON config file (flags override)");
  app.add_option("-o,--output", outdir,
                 "output directory (default $QPT_OUTPUT_ROOT or .)");
  int jobs = 0;
  app.add_option("--jobs", jobs, "parallelism cap (0 = hardware)");

  // shared model options per subcommand
  struct ModelOpts {
    std::string preset = "two_node", model_file;
    double nu = 0.01, alpha = 0.05;
    CLI::Option *o_preset, *o_model, *o_nu, *o_alpha;
  };
  auto add_model_opts = [](CLI::App* sub, ModelOpts& m) {
    m.o_preset = sub->add_option(
        "--preset", m.preset,
        "single | two_node | three_node | slice_q | slice_a");
    m.o_model = sub->add_option("--model", m.model_file, "model JSON file");
    m.o_nu = sub->add_option("--nu", m.nu, "per-node parameter nu");
    m.o_alpha = sub->add_option("--alpha", m.alpha, "noise strength");
  };
  auto merge_model = [](const json& cfg, ModelOpts& m) {
    merge(cfg, "preset", m.o_preset, m.preset);
    merge(cfg, "model", m.o_model, m.model_file);
    merge(cfg, "nu", m.o_nu, m.nu);
    merge(cfg, "alpha", m.o_alpha, m.alpha);
  };

  int rc = 0;
  json cfg;

  // equilibria
  auto* eq = app.add_subcommand("equilibria", "bifurcation diagram CSVs");
  ModelOpts eq_m;
  add_model_opts(eq, eq_m);
  double eq_blo = 0.0, eq_bhi = 0.5, eq_step = 1e-3;
  auto* o_eblo = eq->add_option("--beta-min", eq_blo, "range start");
  auto* o_ebhi = eq->add_option("--beta-max", eq_bhi, "range end");
  auto* o_estep = eq->add_option("--step", eq_step, "continuation step");
  eq->callback([&] {
    cfg = load_config(config_path);
    merge_model(cfg, eq_m);
    merge(cfg, "beta_min", o_eblo, eq_blo);
    merge(cfg, "beta_max", o_ebhi, eq_bhi);
    merge(cfg, "step", o_estep, eq_step);
    rc = cmd_equilibria(cfg, eq_m.preset, eq_m.model_file, eq_m.nu, eq_m.alpha,
                        eq_blo, eq_bhi, eq_step, outdir);
  });

  // qp
  auto* qp = app.add_subcommand("qp", "quasipotential field + contours + gates");
  ModelOpts qp_m;
  add_model_opts(qp, qp_m);
  double qp_beta = 0.0;
  std::string qp_anchor = "QQ", qp_domain, qp_levels;
  int qp_grid = 256;
  auto* o_qbeta = qp->add_option("--beta", qp_beta, "coupling strength");
  auto* o_qanchor = qp->add_option("--anchor", qp_anchor, "anchor label, e.g. QQ");
  auto* o_qgrid = qp->add_option("--grid", qp_grid, "square grid size");
  auto* o_qdom = qp->add_option("--domain", qp_domain, "x0,x1,y0,y1");
  auto* o_qlev = qp->add_option("--levels", qp_levels, "contour levels");
  qp->callback([&] {
    cfg = load_config(config_path);
    merge_model(cfg, qp_m);
    merge(cfg, "beta", o_qbeta, qp_beta);
    merge(cfg, "anchor", o_qanchor, qp_anchor);
    merge(cfg, "grid", o_qgrid, qp_grid);
    merge(cfg, "domain", o_qdom, qp_domain);
    merge(cfg, "levels", o_qlev, qp_levels);
    rc = cmd_qp(cfg, qp_m.preset, qp_m.model_file, qp_m.nu, qp_m.alpha,
                qp_beta, qp_anchor, qp_grid, qp_domain, qp_levels, outdir);
  });

  // gatescan
  auto* gs = app.add_subcommand("gatescan", "gate-height bifurcation scan");
  ModelOpts gs_m;
  add_model_opts(gs, gs_m);
  double gs_lo = 0.15, gs_hi = 0.20, gs_tol = 1e-3;
  std::string gs_anchor = "AQ", gs_s1 = "SQ", gs_s2 = "AS";
  int gs_fine = 512, gs_coarse = 256, gs_samples = 11;
  auto* o_glo = gs->add_option("--beta-lo", gs_lo, "range start");
  auto* o_ghi = gs->add_option("--beta-hi", gs_hi, "range end");
  auto* o_ganchor = gs->add_option("--anchor", gs_anchor, "anchor label");
  auto* o_gs1 = gs->add_option("--saddle1", gs_s1, "first saddle label");
  auto* o_gs2 = gs->add_option("--saddle2", gs_s2, "second saddle label");
  auto* o_gfine = gs->add_option("--grid", gs_fine, "bisection grid size");
  auto* o_gcoarse = gs->add_option("--coarse-grid", gs_coarse, "scan grid size");
  auto* o_gsam = gs->add_option("--samples", gs_samples, "coarse samples");
  auto* o_gtol = gs->add_option("--tol", gs_tol, "beta tolerance");
  gs->callback([&] {
    cfg = load_config(config_path);
    merge_model(cfg, gs_m);
    merge(cfg, "beta_lo", o_glo, gs_lo);
    merge(cfg, "beta_hi", o_ghi, gs_hi);
    merge(cfg, "anchor", o_ganchor, gs_anchor);
    merge(cfg, "saddle1", o_gs1, gs_s1);
    merge(cfg, "saddle2", o_gs2, gs_s2);
    merge(cfg, "grid", o_gfine, gs_fine);
    merge(cfg, "coarse_grid", o_gcoarse, gs_coarse);
    merge(cfg, "samples", o_gsam, gs_samples);
    merge(cfg, "tol_beta", o_gtol, gs_tol);
    rc = cmd_gatescan(cfg, gs_m.preset, gs_m.model_file, gs_m.nu, gs_m.alpha,
                      gs_lo, gs_hi, gs_anchor, gs_s1, gs_s2, gs_fine,
                      gs_coarse, gs_samples, gs_tol, outdir);
  });

  // mc
  auto* mc = app.add_subcommand("mc", "ensemble simulation sweep");
  ModelOpts mc_m;
  add_model_opts(mc, mc_m);
  std::string mc_betas = "0.0";
  int mc_n = 2000;
  std::uint64_t mc_seed = 0;
  double mc_xi = 0.55, mc_xip = 0.0, mc_tmax = 1e5;
  auto* o_mbetas = mc->add_option("--beta", mc_betas, "comma separated betas");
  auto* o_mn = mc->add_option("-n,--realisations", mc_n, "ensemble size");
  auto* o_mseed = mc->add_option("--seed", mc_seed, "master seed");
  auto* o_mxi = mc->add_option("--xi", mc_xi, "escape threshold");
  auto* o_mxip = mc->add_option("--xi-prime", mc_xip, "return threshold");
  auto* o_mtmax = mc->add_option("--t-max", mc_tmax, "bailout horizon");
  mc->callback([&] {
    cfg = load_config(config_path);
    merge_model(cfg, mc_m);
    merge(cfg, "beta", o_mbetas, mc_betas);
    merge(cfg, "n_realisations", o_mn, mc_n);
    merge(cfg, "master_seed", o_mseed, mc_seed);
    merge(cfg, "xi", o_mxi, mc_xi);
    merge(cfg, "xi_prime", o_mxip, mc_xip);
    merge(cfg, "t_max", o_mtmax, mc_tmax);
    rc = cmd_mc(cfg, mc_m.preset, mc_m.model_file, mc_m.nu, mc_m.alpha,
                mc_betas, mc_n, mc_seed, mc_xi, mc_xip, mc_tmax, jobs, outdir);
  });

  // contours
  auto* ct = app.add_subcommand("contours", "extract contours from a field file");
  std::string ct_field, ct_levels;
  auto* o_cfield = ct->add_option("--field", ct_field, "QPF1 field file");
  auto* o_clev = ct->add_option("--levels", ct_levels, "comma separated levels");
  ct->callback([&] {
    cfg = load_config(config_path);
    merge(cfg, "field", o_cfield, ct_field);
    merge(cfg, "levels", o_clev, ct_levels);
    rc = cmd_contours(cfg, ct_field, ct_levels, outdir);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const EliminatedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return rc;
}
