// Acceptance runner: one PASS/FAIL line per criterion. Each criterion evaluates
// its registered workbench scenario with default parameters.
// Usage: acceptance [N ...]   (no arguments runs all 13)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "workbench.hpp"

using namespace febench;

namespace {

// collects sub-checks; the criterion passes when all of them do
struct Report {
  bool ok = true;
  std::ostringstream text;

  void check(const std::string& what, bool pass, const std::string& detail) {
    ok = ok && pass;
    if (text.tellp() > 0) text << "; ";
    text << what << " " << detail << (pass ? "" : " [x]");
  }
  // |value/target - 1| <= rel
  void rel(const std::string& what, double value, double target, double rel_tol, double unit = 1.0) {
    std::ostringstream d;
    d.precision(5);
    d << value / unit << " vs " << target / unit;
    check(what, std::abs(value / target - 1.0) <= rel_tol, d.str());
  }
  void abs(const std::string& what, double value, double target, double abs_tol) {
    std::ostringstream d;
    d.precision(6);
    d << value << " vs " << target << "+-" << abs_tol;
    check(what, std::abs(value - target) <= abs_tol, d.str());
  }
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << x;
  return o.str();
}

// defaults of the registered scenario, plus any extra params
workbench::json run(const std::string& name, workbench::json params = workbench::json::object()) {
  workbench::ScenarioConfig cfg;
  cfg.scenario = name;
  cfg.params = std::move(params);
  return workbench::evaluate(cfg).results;
}

double d(const workbench::json& j) { return j.get<double>(); }

// ---- 1 ----
Report sensitivity() {
  Report r;
  r.rel("S_c[aF/rtHz]", d(run("sensitivity")["S_c_f_per_rthz"]), 0.34e-18, 0.03, 1e-18);
  return r;
}

// ---- 2 ----
Report resonance() {
  Report r;
  r.rel("f0[MHz]", d(run("rf")["f0_hz"]), 120.946e6, 1e-3, 1e6);
  return r;
}

// ---- 3 ----
Report population() {
  Report r;
  r.rel("chi", d(run("qcap")["chi"]), 1.2e-4, 0.10);
  return r;
}

// ---- 4 ----
Report lz_chain() {
  Report r;
  const auto j = run("lz-chain");
  r.abs("P_LZ", d(j["P_LZ_ref"]), 0.244, 0.001);
  const auto& f = j["fit"]["rabi_hz"];
  const bool covers = j["fit"]["converged"].get<bool>() && d(f["ci_low"]) < 0.83e6 && d(f["ci_high"]) > 0.83e6;
  r.check("2t_c fit[MHz]", covers,
          fmt(d(f["value"]) / 1e6) + " 99%CI [" + fmt(d(f["ci_low"]) / 1e6) + ", " + fmt(d(f["ci_high"]) / 1e6) + "]");
  return r;
}

// ---- 5 ----
Report fm_shape() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  const auto j = run("fm-fig3", {{"f_ma_hz", 768e6}, {"f_mf_hz", 1e3}});
  const double peak = d(j["f_ry_peak_hz"]), vmax = d(j["V_s_max_v"]);
  r.check("zero at peak", d(j["V_s_at_peak_v"]) < 0.1 * vmax, fmt(d(j["V_s_at_peak_v"]) / vmax, 3) + " of max");
  const double dlo = (d(j["low_lobe"]["carrier_hz"]) - peak) / 1e9;
  const double dhi = (d(j["high_lobe"]["carrier_hz"]) - peak) / 1e9;
  r.check("lobes[GHz]", std::abs(dlo + 1.0) <= 0.5 && std::abs(dhi - 1.0) <= 0.5, fmt(dlo, 3) + "/" + fmt(dhi, 3));
  const double ratio = d(j["high_lobe"]["V_s_v"]) / d(j["low_lobe"]["V_s_v"]);
  r.check("high lobe larger", ratio > 1.0, fmt(ratio, 3) + "x");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.check("runtime[s]", secs < 900.0, fmt(secs, 3));
  return r;
}

// ---- 6 ----
Report rydberg_limits() {
  Report r;
  const auto j = run("rydberg");
  r.rel("E1/hydrogenic", d(j["hydrogenic"]["E1_numeric_hz"]), d(j["hydrogenic"]["E1_exact_hz"]), 0.01);
  r.rel("<z>He[nm]", d(j["helium"]["mean_heights_m"][0]), 10.6e-9, 0.15, 1e-9);
  r.rel("<z>Ne[nm]", d(j["neon"]["mean_heights_m"][0]), 2.5e-9, 0.15, 1e-9);
  return r;
}

// ---- 7 ----
Report neon_chain() {
  Report r;
  const auto j = run("neon-em");
  r.rel("L_sq[pH]", d(j["L_square_h"]), 9.6e-12, 0.05, 1e-12);
  r.rel("L[nH]", d(j["L_kin_h"]), 139e-9, 0.05, 1e-9);
  r.rel("Z0[Ohm]", d(j["Z0_ohm"]), 1337.0, 0.05);
  r.rel("V0[uV]", d(j["V0_v"]), 12e-6, 0.05, 1e-6);
  r.rel("eV0/h[GHz]", d(j["eV0_h_film_hz"]), 3e9, 0.05, 1e9);
  r.rel("g_c[MHz]", d(j["g_c_hz"]), 150e6, 0.05, 1e6);
  r.rel("Lambda", d(j["Lambda"]), 0.19, 0.05);
  r.rel("g_s[MHz]", d(j["g_s_hz"]), 28.5e6, 0.05, 1e6);
  return r;
}

// index of the single interior minimum, or -1
int v_minimum(const std::vector<double>& e) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i] < e[k]) k = i;
  for (std::size_t i = 1; i <= k; ++i)
    if (!(e[i] < e[i - 1])) return -1;
  for (std::size_t i = k + 1; i < e.size(); ++i)
    if (!(e[i] > e[i - 1])) return -1;
  return (k > 0 && k + 1 < e.size()) ? int(k) : -1;
}

// ---- 8 ----
Report cooperativity() {
  Report r;
  const auto j = run("spin-gates");
  r.check("C", d(j["cooperativity"]) >= 1e6, fmt(d(j["cooperativity"]), 3) + " >= 1e6");
  r.abs("F2(beta=10)", d(j["F2"]), 0.9934, 0.0005);
  const auto lam = j["scan"]["lambda"].get<std::vector<double>>();
  const int k1 = v_minimum(j["scan"]["error1"].get<std::vector<double>>());
  const int k2 = v_minimum(j["scan"]["error2"].get<std::vector<double>>());
  r.check("Lambda-scan optima", k1 >= 0 && k2 >= 0,
          "F1 at " + (k1 >= 0 ? fmt(lam[k1], 3) : "none") + ", F2 at " + (k2 >= 0 ? fmt(lam[k2], 3) : "none"));
  return r;
}

// ---- 9 ----
Report electron_loading() {
  Report r;
  const auto j = run("neon-loading");
  const double ratio = d(j["drude_over_lorentz"]), lorentz = d(j["thermal_lorentz"]["inv_Q_e"]);
  r.check("Drude/Lorentz", ratio >= 5.0, fmt(ratio, 3) + "x >= 5");
  r.check("1/Q_e Lorentz", lorentz >= 3.7e-4 / 3.0 && lorentz <= 3.7e-4 * 3.0, fmt(lorentz, 3) + " vs 3.7e-4 (x3)");
  r.rel("R1 t[nm]", d(j["thickness_r1_m"]), 160e-9, 0.25, 1e-9);
  r.rel("R2 t[nm]", d(j["thickness_r2_m"]), 270e-9, 0.25, 1e-9);
  return r;
}

// ---- 10 ----
Report micromagnet() {
  Report r;
  const auto j = run("magnet");
  r.rel("peak[mT/nm]", d(j["peak_t_per_m"]), 0.36e6, 0.15, 1e6);
  r.check("peak dz[nm]", std::abs(d(j["peak_dz_m"]) - 146e-9) <= 20e-9, fmt(d(j["peak_dz_m"]) * 1e9) + " vs 146+-20");
  r.rel("b_perp/2pi[GHz]", d(j["b_perp_quoted_hz"]), 1e9, 0.05, 1e9);
  r.check("dipole vs prism", d(j["max_rel_dipole_prism"]) <= 5e-3, fmt(d(j["max_rel_dipole_prism"]), 3) + " <= 0.005");
  return r;
}

// ---- 11 ----
Report tdo_model() {
  Report r;
  const auto j = run("tdo");
  r.rel("C_TD(0.08)[pF]", d(j["C_TD_f"]["0.08"]), 6.3e-12, 0.02, 1e-12);
  r.rel("C_TD(0.18)[pF]", d(j["C_TD_f"]["0.18"]), 7.2e-12, 0.02, 1e-12);
  r.rel("f(0.18)[MHz]", d(j["f_at_V_TD_hz"]), 141.8e6, 0.03, 1e6);
  r.abs("peak[dBm]", d(j["spectrum"]["peak_dbm"]), -26.5, 0.1);
  return r;
}

// ---- 12 ----
Report fit_engines() {
  Report r;
  const auto j = run("fits");
  const auto& c = j["circle"];
  r.rel("circle Q_tot", d(c["Q_tot"]["value"]), d(c["truth"]["Q_tot"]), 0.02);
  r.rel("circle Q_ext", d(c["Q_ext"]["value"]), d(c["truth"]["Q_ext"]), 0.02);
  r.rel("circle Q_int", d(c["Q_int"]["value"]), d(c["truth"]["Q_int"]), 0.02);
  const auto& t = j["tls"];
  for (const char* k : {"Q_TLS0_over_F", "n_sat", "beta"})
    r.rel(std::string("TLS ") + k, d(t[k]["value"]), d(t["truth"][k]), 0.10);
  return r;
}

// ---- 13 ----
Report properties() {
  Report r;
  const auto j = run("properties");
  r.check("unitarity", j["unitarity"].get<bool>(), "exchange U(t)");
  r.check("normalization", d(j["normalization_error"]) < 1e-9, fmt(d(j["normalization_error"]), 2));
  r.check("f12 refinement", d(j["f12_refinement_rel"]) < 1e-3, fmt(d(j["f12_refinement_rel"]), 2));
  r.check("div B", d(j["div_B_rel"]) < 1e-4, fmt(d(j["div_B_rel"]), 2) + " rel");
  r.check("Parseval", d(j["parseval_rel_error"]) < 1e-9, fmt(d(j["parseval_rel_error"]), 2));
  r.check("monotonicity", j["monotonicity"].get<bool>(), "f_TDO(V_TD), P_LZ(f_mf)");
  return r;
}

struct Criterion {
  const char* name;
  std::function<Report()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c{
      {"sensitivity S_c", sensitivity},
      {"tank resonance f0", resonance},
      {"population difference", population},
      {"Landau-Zener chain", lz_chain},
      {"FM carrier-sweep shape", fm_shape},
      {"Rydberg solver limits", rydberg_limits},
      {"neon coupling chain", neon_chain},
      {"cooperativity and fidelity", cooperativity},
      {"electron-loading physics", electron_loading},
      {"micromagnet gradient", micromagnet},
      {"tunnel-diode oscillator", tdo_model},
      {"fit engines", fit_engines},
      {"property suites", properties},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > int(criteria().size())) {
      std::fprintf(stderr, "acceptance: no criterion '%s' (1..%zu)\n", argv[i], criteria().size());
      return 2;
    }
    which.push_back(k);
  }
  if (which.empty())
    for (int k = 1; k <= int(criteria().size()); ++k) which.push_back(k);

  int failed = 0;
  for (int k : which) {
    const auto& c = criteria()[k - 1];
    Report r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.check("error", false, e.what());
    }
    std::printf("%s %02d %s: %s\n", r.ok ? "PASS" : "FAIL", k, c.name, r.text.str().c_str());
    std::fflush(stdout);
    if (!r.ok) ++failed;
  }
  return failed ? 1 : 0;
}
