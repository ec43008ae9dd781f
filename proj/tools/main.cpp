// capot: command-line surface over the coupling-bounds library. Every
// command reads plain files (JSON capacities, CSV tables), writes CSV or
// JSON, and exits 0 on success, 2 on validation problems (bad flags, bad
// files, domain violations), 3 on solver failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "capot/capacity.hpp"
#include "capot/capacity_lp.hpp"
#include "capot/choquet.hpp"
#include "capot/creditrisk.hpp"
#include "capot/experiment.hpp"
#include "capot/gamecore.hpp"
#include "capot/io.hpp"
#include "capot/ot.hpp"
#include "capot/transport.hpp"
#include "json.hpp"

namespace {

using capot::Capacity;
using capot::GroundFunction;
using capot::LossMatrix;
using capot::ProductSpace;
using capot::Sense;
using capot::SubsetMask;
using nlohmann::json;

// Input problems (unreadable or malformed files) exit 2 like other
// validation failures, not 3 like solver breakdowns.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto input(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw ValidationError(e.what());
  }
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(out);
  if (!f) throw ValidationError(out + ": cannot open for writing");
  f << text;
  if (!f) throw ValidationError(out + ": write failed");
}

json fin(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const char* check_name(capot::CheckResult r) {
  switch (r) {
    case capot::CheckResult::yes: return "yes";
    case capot::CheckResult::no: return "no";
    default: return "skipped";
  }
}

Sense parse_sense(const std::string& mode) {
  return mode == "max" ? Sense::maximize : Sense::minimize;
}

std::vector<double> linspace(double a, double b, unsigned n) {
  if (n < 2) throw ValidationError("need at least two grid points");
  if (!(a < b)) throw ValidationError("grid start must be below its end");
  std::vector<double> g(n);
  for (unsigned i = 0; i < n; ++i)
    g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::string dump_lp(const std::string& name, const capot::LinearProgram& lp) {
  std::ostringstream os;
  os << "# " << name << "\n";
  os << "sense " << (lp.sense == Sense::maximize ? "maximize" : "minimize") << "\n";
  os << "vars " << lp.num_vars << "\n";
  os << "objective";
  for (double c : lp.objective) os << ' ' << fmt17(c);
  os << "\nkinds";
  if (lp.kinds.empty()) {
    for (int i = 0; i < lp.num_vars; ++i) os << " n";
  } else {
    for (auto k : lp.kinds)
      os << ' '
         << (k == capot::VarKind::nonneg ? 'n' : k == capot::VarKind::nonpos ? 'p' : 'f');
  }
  os << "\n";
  for (const auto& row : lp.rows) {
    os << "row "
       << (row.rel == capot::Rel::le ? "le" : row.rel == capot::Rel::ge ? "ge" : "eq") << ' '
       << fmt17(row.rhs) << " :";
    for (const auto& [i, c] : row.coeffs) os << ' ' << i << ':' << fmt17(c);
    os << "\n";
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp Choquet-risk bounds for couplings with capacity marginals"};
  app.require_subcommand(1);

  // capacity check | mobius
  auto* capacity_cmd = app.add_subcommand("capacity", "capacity file utilities");
  capacity_cmd->require_subcommand(1);

  std::string chk_path, chk_out;
  double chk_tol = capot::kDefaultTol;
  auto* chk = capacity_cmd->add_subcommand("check", "property report for a set-function file");
  chk->add_option("file", chk_path, "capacity JSON file")->required();
  chk->add_option("--tol", chk_tol, "comparison tolerance");
  chk->add_option("--out", chk_out, "output path (default stdout)");

  std::string mob_path, mob_out;
  auto* mob = capacity_cmd->add_subcommand("mobius", "Moebius transform of a capacity");
  mob->add_option("file", mob_path, "capacity JSON file")->required();
  mob->add_option("--out", mob_out, "output path (default stdout)");

  // bounds
  std::string bnd_loss, bnd_mu, bnd_nu, bnd_out;
  double bnd_tol = capot::kDefaultTol;
  bool bnd_trace = false;
  auto* bnd = app.add_subcommand("bounds", "sharp coupling bounds on a Choquet risk");
  bnd->add_option("--loss", bnd_loss, "loss matrix CSV")->required();
  bnd->add_option("--mu", bnd_mu, "first-factor capacity JSON")->required();
  bnd->add_option("--nu", bnd_nu, "second-factor capacity JSON")->required();
  bnd->add_flag("--trace", bnd_trace, "include the per-level trace");
  bnd->add_option("--tol", bnd_tol, "normalization tolerance");
  bnd->add_option("--out", bnd_out, "output path (default stdout)");

  // lp verify
  auto* lp_cmd = app.add_subcommand("lp", "linear-programming cross checks");
  lp_cmd->require_subcommand(1);
  std::string lpv_mu, lpv_nu, lpv_cost, lpv_out, lpv_export, lpv_mode = "min";
  double lpv_tol = capot::kDefaultTol;
  auto* lpv = lp_cmd->add_subcommand("verify", "primal / dual / transformed-dual agreement");
  lpv->add_option("--mu", lpv_mu, "first-factor capacity JSON")->required();
  lpv->add_option("--nu", lpv_nu, "second-factor capacity JSON")->required();
  lpv->add_option("--cost", lpv_cost, "cost matrix CSV")->required();
  lpv->add_option("--mode", lpv_mode, "min or max")->check(CLI::IsMember({"min", "max"}));
  lpv->add_option("--export", lpv_export, "write the three programs to this text file");
  lpv->add_option("--tol", lpv_tol, "model tolerance");
  lpv->add_option("--out", lpv_out, "output path (default stdout)");

  // core check | pistar
  auto* core_cmd = app.add_subcommand("core", "core certificates");
  core_cmd->require_subcommand(1);

  std::string crc_path, crc_out;
  double crc_tol = 1e-8;
  auto* crc = core_cmd->add_subcommand("check", "core nonemptiness certificate");
  crc->add_option("file", crc_path, "capacity JSON file")->required();
  crc->add_option("--tol", crc_tol, "certificate tolerance");
  crc->add_option("--out", crc_out, "output path (default stdout)");

  std::string cps_mu, cps_nu, cps_set, cps_out;
  double cps_tol = 1e-8;
  auto* cps = core_cmd->add_subcommand(
      "pistar", "smallest core mass of the lower coupling on a cell set");
  cps->add_option("--mu", cps_mu, "first-factor capacity JSON")->required();
  cps->add_option("--nu", cps_nu, "second-factor capacity JSON")->required();
  cps->add_option("--set", cps_set, "cell labels '<x>|<y>' joined by ';'")->required();
  cps->add_option("--tol", cps_tol, "certificate tolerance");
  cps->add_option("--out", cps_out, "output path (default stdout)");

  // ot classic
  auto* ot_cmd = app.add_subcommand("ot", "classical optimal transport");
  ot_cmd->require_subcommand(1);
  std::string otc_u, otc_v, otc_cost, otc_out, otc_mode = "min";
  auto* otc = ot_cmd->add_subcommand("classic", "transportation optimum of additive marginals");
  otc->add_option("--u", otc_u, "first marginal CSV (label,value)")->required();
  otc->add_option("--v", otc_v, "second marginal CSV (label,value)")->required();
  otc->add_option("--cost", otc_cost, "cost matrix CSV")->required();
  otc->add_option("--mode", otc_mode, "min or max")->check(CLI::IsMember({"min", "max"}));
  otc->add_option("--out", otc_out, "output path (default stdout)");

  // experiment fig1
  auto* exp_cmd = app.add_subcommand("experiment", "seeded experiments");
  exp_cmd->require_subcommand(1);
  capot::Fig1Config fig_cfg;
  std::string fig_out, fig_format = "csv";
  auto* fig = exp_cmd->add_subcommand(
      "fig1", "capacity bound vs transportation optimum, random marginals");
  fig->add_option("--nx", fig_cfg.nx, "first grid size");
  fig->add_option("--ny", fig_cfg.ny, "second grid size");
  fig->add_option("--trials", fig_cfg.trials, "number of trials");
  fig->add_option("--seed", fig_cfg.seed, "master seed");
  fig->add_option("--format", fig_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  fig->add_option("--out", fig_out, "output path (default stdout)");

  // credit sweep | mes-cmes | simplified
  auto* credit_cmd = app.add_subcommand("credit", "two-counterparty credit model");
  credit_cmd->require_subcommand(1);
  const capot::CreditModel defaults;

  std::string swp_param, swp_out, swp_format = "csv";
  double swp_from = 0.0, swp_to = 1.0;
  unsigned swp_points = 41;
  double swp_alpha = defaults.alpha, swp_s = defaults.s;
  double swp_rhox = defaults.rho_x, swp_rhoy = defaults.rho_y;
  auto* swp = credit_cmd->add_subcommand("sweep", "worst-case risk across a parameter grid");
  swp->add_option("--param", swp_param, "s, rhox or rhoy")
      ->required()
      ->check(CLI::IsMember({"s", "rhox", "rhoy"}));
  swp->add_option("--from", swp_from, "grid start")->required();
  swp->add_option("--to", swp_to, "grid end")->required();
  swp->add_option("--points", swp_points, "grid size");
  swp->add_option("--alpha", swp_alpha, "shortfall level of the base model");
  swp->add_option("--s", swp_s, "distortion exponent of the base model");
  swp->add_option("--rhox", swp_rhox, "exposure correlation of the base model");
  swp->add_option("--rhoy", swp_rhoy, "rating correlation of the base model");
  swp->add_option("--format", swp_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  swp->add_option("--out", swp_out, "output path (default stdout)");

  std::string mc_out, mc_format = "csv";
  double mc_alpha = defaults.alpha, mc_rhox = defaults.rho_x, mc_rhoy = defaults.rho_y;
  auto* mc = credit_cmd->add_subcommand("mes-cmes", "worst-case shortfall vs Choquet bound");
  mc->add_option("--alpha", mc_alpha, "shortfall level");
  mc->add_option("--rhox", mc_rhox, "exposure correlation");
  mc->add_option("--rhoy", mc_rhoy, "rating correlation");
  mc->add_option("--format", mc_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  mc->add_option("--out", mc_out, "output path (default stdout)");

  std::string smp_out, smp_format = "csv";
  double smp_from = -0.999, smp_to = 0.999, smp_rhox = -0.3;
  unsigned smp_points = 41;
  auto* smp = credit_cmd->add_subcommand("simplified", "two-state model and its closed form");
  smp->add_option("--rhoy-from", smp_from, "rating correlation grid start");
  smp->add_option("--rhoy-to", smp_to, "rating correlation grid end");
  smp->add_option("--points", smp_points, "grid size");
  smp->add_option("--rhox", smp_rhox, "exposure correlation");
  smp->add_option("--format", smp_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  smp->add_option("--out", smp_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (chk->parsed()) {
    return guarded([&] {
      const Capacity g = input([&] { return capot::load_capacity_json(chk_path, false); });
      capot::PropertyCheckOptions opts;
      opts.tol = chk_tol;
      const capot::PropertyReport r = capot::check_properties(g, opts);
      json doc;
      doc["is_capacity"] = r.is_capacity;
      doc["grounded"] = r.grounded;
      doc["nonnegative"] = r.nonnegative;
      doc["monotone"] = r.monotone;
      doc["normalized"] = r.normalized;
      doc["additive"] = r.additive;
      doc["supermodular"] = check_name(r.supermodular);
      doc["submodular"] = check_name(r.submodular);
      doc["totally_monotone"] = check_name(r.totally_monotone);
      doc["worst_monotone_gap"] = r.worst_monotone_gap;
      doc["worst_supermodular_gap"] = r.worst_supermodular_gap;
      emit(chk_out, doc.dump(2) + "\n");
      return 0;
    });
  }

  if (mob->parsed()) {
    return guarded([&] {
      const Capacity g = input([&] { return capot::load_capacity_json(mob_path, true); });
      const capot::MobiusVector m = capot::mobius(g);
      json doc;
      doc["ground"] = g.ground().labels();
      doc["mobius"] = m.values;
      emit(mob_out, doc.dump(2) + "\n");
      return 0;
    });
  }

  if (bnd->parsed()) {
    return guarded([&] {
      const LossMatrix loss = input([&] { return capot::load_loss_csv(bnd_loss); });
      const Capacity mu = input([&] { return capot::load_capacity_json(bnd_mu); });
      const Capacity nu = input([&] { return capot::load_capacity_json(bnd_nu); });
      const capot::CouplingBounds b = capot::choquet_bounds(loss, mu, nu, bnd_trace, bnd_tol);
      json doc;
      doc["lower"] = b.lower;
      doc["upper"] = b.upper;
      json trace = json::array();
      for (const auto& lv : b.trace)
        trace.push_back({{"t", lv.t},
                         {"lower_mu", lv.lower_mu},
                         {"lower_nu", lv.lower_nu},
                         {"lower", lv.lower},
                         {"upper_mu", lv.upper_mu},
                         {"upper_nu", lv.upper_nu},
                         {"upper", lv.upper}});
      doc["trace"] = std::move(trace);
      emit(bnd_out, doc.dump(2) + "\n");
      return 0;
    });
  }

  if (lpv->parsed()) {
    return guarded([&] {
      const LossMatrix cost = input([&] { return capot::load_loss_csv(lpv_cost); });
      const Capacity mu = input([&] { return capot::load_capacity_json(lpv_mu); });
      const Capacity nu = input([&] { return capot::load_capacity_json(lpv_nu); });
      const Sense sense = parse_sense(lpv_mode);
      const capot::DualityReport r =
          capot::verify_duality(cost, mu, nu, sense, {}, lpv_tol);
      if (!lpv_export.empty()) {
        std::string text = dump_lp("direct", capot::build_capacity_ot(cost, mu, nu, sense));
        text += dump_lp("dual", capot::build_capacity_ot_dual(cost, mu, nu, sense));
        text += dump_lp("transformed-dual",
                        capot::build_dual_transformed(cost, mu, nu, sense));
        emit(lpv_export, text);
      }
      json doc;
      doc["primal"] = r.primal.objective;
      doc["dual"] = r.dual.objective;
      doc["transformed_dual"] = r.transformed.objective;
      doc["gap"] = std::max(r.primal_dual_gap, r.dual_transformed_gap);
      doc["slackness_max_violation"] = r.max_slackness_violation;
      doc["all_optimal"] = r.all_optimal;
      emit(lpv_out, doc.dump(2) + "\n");
      if (!r.all_optimal) {
        std::fprintf(stderr, "solver error: a model failed to reach an optimum\n");
        return 3;
      }
      return 0;
    });
  }

  if (crc->parsed()) {
    return guarded([&] {
      const Capacity g = input([&] { return capot::load_capacity_json(crc_path); });
      const capot::CoreCertificate c = capot::core_nonempty(g, crc_tol);
      json doc;
      doc["nonempty"] = c.nonempty;
      doc["balanced_excess"] = fin(c.balanced_excess);
      doc["witness"] = c.witness ? json(*c.witness) : json(nullptr);
      emit(crc_out, doc.dump(2) + "\n");
      return 0;
    });
  }

  if (cps->parsed()) {
    return guarded([&] {
      const Capacity mu = input([&] { return capot::load_capacity_json(cps_mu); });
      const Capacity nu = input([&] { return capot::load_capacity_json(cps_nu); });
      const ProductSpace sp{mu.ground(), nu.ground()};
      SubsetMask cells(sp.size());
      json labels = json::array();
      std::stringstream ss(cps_set);
      std::string token;
      while (std::getline(ss, token, ';')) {
        if (token.empty()) continue;
        const std::size_t idx = sp.cells().find(token);
        if (idx == capot::GroundSet::npos)
          throw ValidationError("unknown cell label: '" + token + "'");
        cells.set(idx);
        labels.push_back(token);
      }
      if (cells.none()) throw ValidationError("--set selected no cells");
      const double value = capot::tilde_pi(sp, mu, nu, cells, cps_tol);
      json doc;
      doc["cells"] = std::move(labels);
      doc["value"] = value;
      emit(cps_out, doc.dump(2) + "\n");
      return 0;
    });
  }

  if (otc->parsed()) {
    return guarded([&] {
      const GroundFunction u = input([&] { return capot::load_ground_function_csv(otc_u); });
      const GroundFunction v = input([&] { return capot::load_ground_function_csv(otc_v); });
      const LossMatrix cost = input([&] { return capot::load_loss_csv(otc_cost); });
      if (!(u.ground == cost.space().x()) || !(v.ground == cost.space().y()))
        throw ValidationError("marginal labels do not match the cost matrix");
      const capot::LPSolution s =
          capot::ot_classic(cost, u.values, v.values, parse_sense(otc_mode));
      if (s.status != capot::LPSolution::Status::optimal)
        throw std::runtime_error("transportation simplex did not reach an optimum");
      const std::size_t p = cost.space().x().size(), q = cost.space().y().size();
      json coupling = json::array();
      for (std::size_t i = 0; i < p; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < q; ++j) row.push_back(s.x[i * q + j]);
        coupling.push_back(std::move(row));
      }
      json doc;
      doc["objective"] = s.objective;
      doc["coupling"] = std::move(coupling);
      doc["row_potentials"] = std::vector<double>(s.row_duals.begin(), s.row_duals.begin() + p);
      doc["col_potentials"] = std::vector<double>(s.row_duals.begin() + p, s.row_duals.end());
      doc["iterations"] = s.iterations;
      emit(otc_out, doc.dump(2) + "\n");
      return 0;
    });
  }

  if (fig->parsed()) {
    return guarded([&] {
      const auto rows = capot::run_fig1(fig_cfg);
      if (fig_format == "json") {
        json arr = json::array();
        for (const auto& r : rows)
          arr.push_back({{"trial", r.trial},
                         {"capacity_min", r.capacity_min},
                         {"classical_min", r.classical_min}});
        emit(fig_out, arr.dump(2) + "\n");
      } else {
        std::string text = "trial,capacity_min,classical_min\n";
        for (const auto& r : rows)
          text += std::to_string(r.trial) + "," + fmt17(r.capacity_min) + "," +
                  fmt17(r.classical_min) + "\n";
        emit(fig_out, text);
      }
      return 0;
    });
  }

  if (swp->parsed()) {
    return guarded([&] {
      capot::CreditModel m = defaults;
      m.alpha = swp_alpha;
      m.s = swp_s;
      m.rho_x = swp_rhox;
      m.rho_y = swp_rhoy;
      const capot::SweepParam param = swp_param == "s"      ? capot::SweepParam::distortion
                                      : swp_param == "rhox" ? capot::SweepParam::rho_x
                                                            : capot::SweepParam::rho_y;
      const capot::SweepResult r = capot::sweep(m, param, linspace(swp_from, swp_to, swp_points));
      if (swp_format == "json") {
        json pts = json::array();
        for (std::size_t i = 0; i < r.grid.size(); ++i)
          pts.push_back(
              {{"value", r.grid[i]}, {"risk", r.risk[i]}, {"seconds", r.seconds[i]}});
        json doc;
        doc["parameter"] = swp_param;
        doc["points"] = std::move(pts);
        emit(swp_out, doc.dump(2) + "\n");
      } else {
        std::string text = "parameter,value,risk,seconds\n";
        for (std::size_t i = 0; i < r.grid.size(); ++i)
          text += swp_param + "," + fmt17(r.grid[i]) + "," + fmt17(r.risk[i]) + "," +
                  fmt17(r.seconds[i]) + "\n";
        emit(swp_out, text);
      }
      return 0;
    });
  }

  if (mc->parsed()) {
    return guarded([&] {
      capot::CreditModel m = defaults;
      m.alpha = mc_alpha;
      m.rho_x = mc_rhox;
      m.rho_y = mc_rhoy;
      const capot::MesCmesResult r = capot::mes_vs_cmes(m);
      if (mc_format == "json") {
        json doc;
        doc["mes"] = r.mes;
        doc["cmes"] = r.cmes;
        doc["ratio"] = r.ratio;
        emit(mc_out, doc.dump(2) + "\n");
      } else {
        emit(mc_out, "mes,cmes,ratio\n" + fmt17(r.mes) + "," + fmt17(r.cmes) + "," +
                         fmt17(r.ratio) + "\n");
      }
      return 0;
    });
  }

  if (smp->parsed()) {
    return guarded([&] {
      const auto pts =
          capot::simplified_closed_form(linspace(smp_from, smp_to, smp_points), smp_rhox);
      if (smp_format == "json") {
        json arr = json::array();
        for (const auto& pt : pts)
          arr.push_back({{"rho_y", pt.rho_y},
                         {"p_dd", pt.p_dd},
                         {"pipeline", pt.pipeline},
                         {"closed_form", pt.closed_form},
                         {"printed_form", pt.printed_form}});
        emit(smp_out, arr.dump(2) + "\n");
      } else {
        std::string text = "rho_y,p_dd,pipeline,closed_form,printed_form\n";
        for (const auto& pt : pts)
          text += fmt17(pt.rho_y) + "," + fmt17(pt.p_dd) + "," + fmt17(pt.pipeline) + "," +
                  fmt17(pt.closed_form) + "," + fmt17(pt.printed_form) + "\n";
        emit(smp_out, text);
      }
      return 0;
    });
  }

  std::fprintf(stderr, "error: no command selected\n");
  return 2;
}
