// Scenario registry: each entry turns resolved parameters into results and tables.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "febench/constants.hpp"
#include "febench/corbino.hpp"
#include "febench/errors.hpp"
#include "febench/fm_readout.hpp"
#include "febench/micromagnet.hpp"
#include "febench/neon_em.hpp"
#include "febench/numerics.hpp"
#include "febench/qcap.hpp"
#include "febench/qubit_core.hpp"
#include "febench/rf_resonator.hpp"
#include "febench/rydberg.hpp"
#include "febench/spin_gates.hpp"
#include "febench/tdo.hpp"
#include "workbench.hpp"

namespace febench::workbench {

namespace {

ParamSpec num(std::string k, double v, std::string doc) { return {std::move(k), Kind::number, v, std::move(doc)}; }
ParamSpec req(std::string k, std::string doc) { return {std::move(k), Kind::number, nullptr, std::move(doc)}; }
ParamSpec integer(std::string k, long v, std::string doc) { return {std::move(k), Kind::integer, v, std::move(doc)}; }
ParamSpec flag(std::string k, bool v, std::string doc) { return {std::move(k), Kind::boolean, v, std::move(doc)}; }
ParamSpec text(std::string k, std::string v, std::string doc) {
  return {std::move(k), Kind::string, std::move(v), std::move(doc)};
}
ParamSpec list(std::string k, std::vector<double> v, std::string doc) {
  return {std::move(k), Kind::number_list, v, std::move(doc)};
}

// lo, lo + step, ... up to hi inclusive (to rounding)
std::vector<double> steps(double lo, double hi, double step) {
  require(step > 0.0 && hi >= lo, "grid: need step > 0 and hi >= lo");
  const auto n = std::size_t(std::floor((hi - lo) / step + 1e-9)) + 1;
  require(n <= 1000000, "grid: more than 1e6 points");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + double(i) * step;
  return v;
}

json estimate(const rf::Estimate& e) {
  return {{"value", e.value}, {"stderr", e.stderr_}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}};
}

// ---- sensitivity ----

void run_sensitivity(const Params& p, Outputs& o) {
  const auto q = rf::QualityFactors::from_loaded(p.num("f0_hz"), p.num("Q_tot"), p.num("Q_ext"));
  const double Ct = p.num("C_t_f");
  const auto s = rf::sideband_and_sensitivity(p.num("V_RF_v"), p.num("dC_over_C_t") * Ct, q, Ct, p.num("gain"),
                                              p.num("V_n_v_per_rthz"), p.num("bandwidth_hz"));
  o.results["S_c_f_per_rthz"] = s.S_c;
  o.results["S_c_af_per_rthz"] = s.S_c / 1e-18;
  o.results["V_s_v"] = s.V_s;
  o.results["Q_int"] = q.Q_int;
}

// ---- rf ----

rf::TankCircuit tank(const Params& p) {
  rf::TankCircuit tc;
  tc.L = p.num("L_h");
  tc.C = p.num("C_f");
  tc.C_c = p.num("C_c_f");
  tc.R = p.num("R_ohm") > 0.0 ? p.num("R_ohm") : INFINITY;
  tc.Z_line = p.num("Z_line_ohm");
  return tc;
}

void run_rf(const Params& p, Outputs& o) {
  const auto tc = tank(p);
  const auto q = rf::quality_factors(tc);
  o.results["f0_hz"] = q.f0;
  o.results["Q_tot"] = q.Q_tot;
  o.results["Q_ext"] = q.Q_ext;
  o.results["Q_int"] = std::isfinite(q.Q_int) ? json(q.Q_int) : json(nullptr);
  o.results["C_t_f"] = tc.C_t();
  const double hw = p.num("span_halfwidths");
  const auto f = num::linspace(q.f0 * (1.0 - hw / q.Q_tot), q.f0 * (1.0 + hw / q.Q_tot), std::size_t(p.integer("points")));
  Table t{"reflection", {"f_hz", "re_gamma", "im_gamma", "abs_gamma", "phase_rad"}, {}};
  for (double x : f) {
    const auto g = rf::reflection_coefficient(x, q);
    t.rows.push_back({x, g.real(), g.imag(), std::abs(g), std::arg(g)});
  }
  o.tables.push_back(std::move(t));
}

// ---- qcap ----

qcap::TwoLevelDriveParams drive(const Params& p) {
  qcap::TwoLevelDriveParams d;
  d.rabi = p.num("rabi_hz");
  d.T = p.num("T_k");
  d.dq = p.num("dq_e") * phys::e;
  d.f_rf = p.num("f_rf_hz");
  d.relaxation_rate = p.num("relaxation_rate_hz");
  d.validate();
  return d;
}

void run_qcap(const Params& p, Outputs& o) {
  const auto d = drive(p);
  const bool tun = p.flag("tunneling");
  o.results["chi"] = qcap::population_difference(d.rabi, d.T);
  o.results["C1_peak_f"] = qcap::single_electron_capacitance(0.0, d, tun);
  o.results["total_weight_f_hz"] = qcap::KernelIntegral(d, tun).total();
  Table t{"c1", {"eps_hz", "C1_f"}, {}};
  const double span = p.num("eps_span_hz");
  for (double e : num::linspace(-span, span, std::size_t(p.integer("points"))))
    t.rows.push_back({e, qcap::single_electron_capacitance(e, d, tun)});
  o.tables.push_back(std::move(t));
}

// ---- lz-chain ----

void run_lz(const Params& p, Outputs& o) {
  const double rabi = p.num("rabi_hz");
  const auto ref = fm::lz_probability({rabi, p.num("f_ma_ref_hz"), p.num("f_mf_ref_hz")});
  o.results["P_LZ_ref"] = ref.P;
  o.results["delta_ref"] = ref.delta;
  std::mt19937_64 rng(p.seed());
  std::normal_distribution<double> noise(0.0, p.num("noise_rel"));
  require(p.num("f_mf_ratio") > 1.0, "params.f_mf_ratio: must be > 1");
  std::vector<fm::LzSeries> series;
  Table t{"series", {"f_ma_hz", "f_mf_hz", "amplitude_v", "P_LZ"}, {}};
  for (double fma : p.list("f_ma_hz")) {
    fm::LzSeries s;
    s.f_ma = fma;
    for (double fmf = p.num("f_mf_min_hz"); fmf <= p.num("f_mf_max_hz"); fmf *= p.num("f_mf_ratio")) {
      const auto lz = fm::lz_probability({rabi, fma, fmf});
      s.f_mf.push_back(fmf);
      s.amplitude.push_back(p.num("amplitude_v") * lz.scale * (1.0 + noise(rng)));
      t.rows.push_back({fma, fmf, s.amplitude.back(), lz.P});
    }
    series.push_back(s);
  }
  const auto fit = fm::fit_lz_rate(series, p.num("domain_max_hz"));
  o.results["fit"] = {{"rabi_hz", estimate(fit.rabi)}, {"converged", fit.converged}, {"n_points", fit.n_points}};
  o.tables.push_back(std::move(t));
}

// ---- corbino / fm ----

corbino::BiasConfig bias(const Params& p) { return corbino::BiasConfig::bottom(p.num("V_BC_v"), p.num("V_BG_v")); }

void run_corbino(const Params& p, Outputs& o) {
  corbino::CorbinoGeometry g;
  g.n_r = int(p.integer("n_r"));
  g.n_z = int(p.integer("n_z"));
  const auto prof = corbino::saturated_density(g, bias(p), p.num("eta"));
  o.results["total_electrons"] = prof.total_electrons;
  o.results["confinement_radius_m"] = prof.confinement_radius;
  o.results["empty"] = prof.empty;
  o.results["iterations"] = prof.iterations;
  Table t{"profile", {"r_m", "n_s_m2", "E_z_v_per_m"}, {}};
  for (std::size_t i = 0; i < prof.r.size(); ++i) t.rows.push_back({prof.r[i], prof.n_s[i], prof.E_z[i]});
  o.tables.push_back(std::move(t));
}

DetuningDistribution distribution(const Params& p) {
  corbino::CorbinoGeometry g;
  const auto prof = corbino::saturated_density(g, bias(p));
  const auto st = rydberg::stark_response(rydberg::SurfaceParams::helium(), rydberg::Grid1D::helium(),
                                          steps(0.0, p.num("stark_max_v_per_m"), p.num("stark_step_v_per_m")));
  return corbino::detuning_distribution(prof, st, p.num("gauss_sigma_hz"), p.num("bin_width_hz"));
}

void sweep(const Params& p, Outputs& o, const DetuningDistribution& d, const std::vector<double>& carriers) {
  fm::FmParams f;
  f.f_ma = p.num("f_ma_hz");
  f.f_mf = p.num("f_mf_hz");
  auto ro = fm::Readout::helium();
  ro.V_RF = p.num("V_RF_v");
  fm::SimOptions opt;
  opt.lz = p.flag("lz");
  const qcap::KernelIntegral kernel{qcap::TwoLevelDriveParams{}};
  const auto sw = fm::sweep_carrier(carriers, d, f, kernel, ro, opt);
  // lobe maxima below and above the distribution peak
  long lo = -1, hi = -1;
  for (std::size_t i = 0; i < carriers.size(); ++i) {
    if (carriers[i] < d.f_ry_peak && (lo < 0 || sw.V_s[i] > sw.V_s[lo])) lo = long(i);
    if (carriers[i] > d.f_ry_peak && (hi < 0 || sw.V_s[i] > sw.V_s[hi])) hi = long(i);
  }
  std::size_t near = 0;
  for (std::size_t i = 0; i < carriers.size(); ++i)
    if (std::abs(carriers[i] - d.f_ry_peak) < std::abs(carriers[near] - d.f_ry_peak)) near = i;
  o.results["f_ry_peak_hz"] = d.f_ry_peak;
  o.results["total_electrons"] = d.total_electrons;
  o.results["argmax_carrier_hz"] = carriers[sw.argmax];
  o.results["V_s_max_v"] = sw.V_s[sw.argmax];
  o.results["V_s_at_peak_v"] = sw.V_s[near];
  o.results["carrier_at_peak_hz"] = carriers[near];
  if (lo >= 0) o.results["low_lobe"] = {{"carrier_hz", carriers[lo]}, {"V_s_v", sw.V_s[lo]}};
  if (hi >= 0) o.results["high_lobe"] = {{"carrier_hz", carriers[hi]}, {"V_s_v", sw.V_s[hi]}};
  Table t{"sweep", {"carrier_hz", "V_s_v"}, {}};
  for (std::size_t i = 0; i < carriers.size(); ++i) t.rows.push_back({carriers[i], sw.V_s[i]});
  o.tables.push_back(std::move(t));
  Table dt{"distribution", {"f_ry_hz", "electrons"}, {}};
  for (std::size_t i = 0; i < d.f_ry.size(); ++i) dt.rows.push_back({d.f_ry[i], d.counts[i]});
  o.tables.push_back(std::move(dt));
}

void run_fm_fig3(const Params& p, Outputs& o) {
  const auto d = distribution(p);
  const double h = p.num("carrier_halfspan_hz");
  sweep(p, o, d, steps(d.f_ry_peak - h, d.f_ry_peak + h, p.num("carrier_step_hz")));
}

void run_fm_sweep(const Params& p, Outputs& o) {
  const auto d = distribution(p);
  sweep(p, o, d, steps(p.num("carrier_start_hz"), p.num("carrier_stop_hz"), p.num("carrier_step_hz")));
}

// ---- rydberg ----

json spectrum_json(const rydberg::EnergySpectrum& s) {
  return {{"levels_hz", s.levels_hz}, {"mean_heights_m", s.mean_heights}, {"f12_hz", s.f12}, {"z12_m", s.z12}};
}

Table spectrum_table(const std::string& name, const rydberg::EnergySpectrum& s) {
  Table t{name, {"n", "E_hz", "mean_height_m"}, {}};
  for (std::size_t i = 0; i < s.levels_hz.size(); ++i) t.rows.push_back({double(i + 1), s.levels_hz[i], s.mean_heights[i]});
  return t;
}

void run_rydberg(const Params& p, Outputs& o) {
  const int n = int(p.integer("n_states"));
  const int pts = int(p.integer("n_points"));
  const double E = p.num("E_perp_v_per_m");
  const auto he = rydberg::solve_spectrum(rydberg::SurfaceParams::helium(E), {p.num("z_max_helium_m"), pts}, n);
  const auto ne = rydberg::solve_spectrum(rydberg::SurfaceParams::neon(E), {p.num("z_max_neon_m"), pts}, n);
  auto hp = rydberg::SurfaceParams::helium();
  hp.V0 = p.num("hydrogenic_V0_ev") * phys::eV;
  hp.z0 = p.num("hydrogenic_z0_m");
  const auto hs = rydberg::solve_spectrum(hp, {p.num("z_max_helium_m"), pts}, 2);
  o.results["helium"] = spectrum_json(he);
  o.results["neon"] = spectrum_json(ne);
  o.results["hydrogenic"] = {{"E1_numeric_hz", hs.levels_hz[0]},
                             {"E1_exact_hz", rydberg::hydrogenic_levels(hp.lambda(), 1)},
                             {"lambda", hp.lambda()}};
  o.tables.push_back(spectrum_table("helium", he));
  o.tables.push_back(spectrum_table("neon", ne));
}

// ---- neon-em ----

spin::SpinChargeParams spin_params(const Params& p) {
  spin::SpinChargeParams s;
  s.two_tc = p.num("two_tc_hz");
  s.b_par = p.num("b_par_hz");
  s.b_perp = p.num("b_perp_hz");
  s.alpha = p.num("lever_arm");
  s.eV0_h = p.num("eV0_h_hz");
  s.f_r = p.num("f_r_hz");
  return s;
}

void run_neon_em(const Params& p, Outputs& o) {
  const neon::FilmParams film{p.num("penetration_depth_m"), p.num("film_thickness_m")};
  const auto r = neon::film_properties(film, p.num("length_m"), p.num("width_m"), p.num("f_r_hz"));
  o.results["L_square_h"] = r.L_square;
  o.results["L_kin_h"] = r.L_kin;
  o.results["Z0_ohm"] = r.Z0;
  o.results["V0_v"] = r.V0;
  o.results["eV0_h_film_hz"] = r.eV0_over_h();
  // the chain continues from eV0_h_hz, the rounded value used downstream
  const auto c = spin::couplings(spin_params(p));
  o.results["g_c_hz"] = c.g_c;
  o.results["Lambda"] = c.Lambda;
  o.results["g_s_hz"] = c.g_s;
}

// ---- spin-gates ----

void run_spin(const Params& p, Outputs& o) {
  const auto sp = spin_params(p);
  const auto s = spin::LossScenario::back_solved(sp, p.num("gamma_s_eff_target_hz"), p.num("kappa_hz"));
  const auto L = spin::effective_losses(sp, s);
  spin::GateConfig g;
  g.f_Rc = p.num("f_Rc_hz");
  g.beta = p.num("beta");
  const auto f = spin::gate_fidelities(sp, s, g);
  o.results["gamma_c_hz"] = s.gamma_c;
  o.results["gamma_s_eff_hz"] = L.gamma_s_eff;
  o.results["kappa_eff_hz"] = L.kappa_eff;
  o.results["cooperativity"] = L.cooperativity;
  o.results["F1_bar"] = f.F1_bar;
  o.results["F2"] = f.F2;
  o.results["t_gate_s"] = f.t_g;

  spin::LossScenario scan_loss;
  scan_loss.label = "scan";
  scan_loss.gamma_c = p.num("scan_gamma_c_hz");
  scan_loss.gamma_s = p.num("scan_gamma_s_hz");
  scan_loss.kappa = p.num("kappa_hz");
  const auto scan = spin::lambda_scan(sp, scan_loss, g, steps(p.num("lambda_min"), p.num("lambda_max"), p.num("lambda_step")));
  Table t{"lambda_scan", {"Lambda", "b_perp_hz", "g_s_hz", "gamma_s_eff_hz", "error1", "error2"}, {}};
  std::vector<double> lam, e1, e2;
  for (const auto& pt : scan) {
    t.rows.push_back({pt.Lambda, pt.b_perp, pt.g_s, pt.gamma_s_eff, pt.error1, pt.error2});
    lam.push_back(pt.Lambda);
    e1.push_back(pt.error1);
    e2.push_back(pt.error2);
  }
  o.results["scan"] = {{"lambda", lam}, {"error1", e1}, {"error2", e2}};
  o.tables.push_back(std::move(t));
}

// ---- neon-loading ----

void run_loading(const Params& p, Outputs& o) {
  auto cs = neon::CrossSection::preset(p.str("resonator"));
  cs.neon_thickness = p.num("neon_thickness_m");
  const neon::LoadedLine line(cs);
  neon::SheetConductivityParams sp;
  sp.tau = p.num("tau_s");
  const double target = p.num("target_shift");
  auto q = sp;
  q.n_e = neon::density_for_shift(line, sp, neon::ConductivityModel::drude, target);
  const auto d = line.response(q, neon::ConductivityModel::drude);
  o.results["drude"] = {{"n_e_m2", q.n_e}, {"shift", d.shift}, {"inv_Q_e", d.inv_Q_e}};
  q.n_e = neon::density_for_shift(line, sp, neon::ConductivityModel::thermal, target);
  const auto t = line.response(q, neon::ConductivityModel::thermal);
  o.results["thermal_lorentz"] = {{"n_e_m2", q.n_e}, {"shift", t.shift}, {"inv_Q_e", t.inv_Q_e}};
  o.results["drude_over_lorentz"] = d.inv_Q_e / t.inv_Q_e;
  o.results["thickness_r1_m"] = neon::thickness_from_shift(neon::CrossSection::preset("resonator1"), p.num("r1_shift"));
  o.results["thickness_r2_m"] = neon::thickness_from_shift(neon::CrossSection::preset("resonator2"), p.num("r2_shift"));
}

// ---- magnet ----

magnet::FieldMethod method(const std::string& s) {
  if (s == "dipole") return magnet::FieldMethod::dipole;
  if (s == "prism") return magnet::FieldMethod::prism;
  throw ValidationError("params.method: expected \"dipole\" or \"prism\", got \"" + s + "\"");
}

void run_magnet(const Params& p, Outputs& o) {
  auto a = magnet::MagnetAssembly::two_block(p.num("thickness_m"), p.num("gap_m"), p.num("M_t"));
  a.d = p.num("d_m");
  a.dz = p.num("dz_m");
  a.misalignment_y = p.num("misalignment_m");
  a.method = method(p.str("method"));
  const auto dz = steps(p.num("dz_min_m"), p.num("dz_max_m"), p.num("dz_step_m"));
  const auto g = magnet::assembly_gradient_profile(a, dz);
  o.results["peak_t_per_m"] = g.peak;
  o.results["peak_dz_m"] = g.peak_dz;
  const auto c = magnet::coupling_and_offsets(a);
  o.results["at_dz"] = {{"gradient_t_per_m", c.gradient},     {"b_perp_rad_s", c.b_perp},
                        {"By_electron_t", c.By_electron},     {"Bz_resonator_t", c.Bz_resonator},
                        {"By_resonator_t", c.By_resonator},   {"B_ext_t", c.B_ext},
                        {"zeeman_mismatch", c.zeeman_mismatch}};
  o.results["b_perp_quoted_hz"] =
      magnet::b_perp_from_gradient(p.num("quoted_gradient_t_per_m"), a.d) / (2.0 * phys::pi);
  Table t{"profile", {"dz_m", "dBz_dy_t_per_m"}, {}};
  if (p.flag("compare_prism")) {
    auto b = a;
    b.method = a.method == magnet::FieldMethod::prism ? magnet::FieldMethod::dipole : magnet::FieldMethod::prism;
    const auto ref = magnet::assembly_gradient_profile(b, dz);
    double worst = 0.0;
    for (std::size_t i = 0; i < dz.size(); ++i) worst = std::max(worst, std::abs(g.dBz_dy[i] / ref.dBz_dy[i] - 1.0));
    o.results["max_rel_dipole_prism"] = worst;
    t.columns.push_back("dBz_dy_other_t_per_m");
    for (std::size_t i = 0; i < dz.size(); ++i) t.rows.push_back({dz[i], g.dBz_dy[i], ref.dBz_dy[i]});
  } else {
    for (std::size_t i = 0; i < dz.size(); ++i) t.rows.push_back({dz[i], g.dBz_dy[i]});
  }
  o.tables.push_back(std::move(t));
}

// ---- tdo ----

void run_tdo(const Params& p, Outputs& o) {
  const std::string set = p.str("temperature_set");
  tdo::TdoCircuit c;
  if (set == "3.4K")
    c = tdo::TdoCircuit::at_3K4();
  else if (set != "11mK")
    throw ValidationError("params.temperature_set: expected \"11mK\" or \"3.4K\", got \"" + set + "\"");
  c.L = p.num("L_h");
  c.V_d = p.num("V_d_v");
  c.validate();
  const double C = p.num("C_f"), C0 = p.num("C0_f");
  o.results["C_TD_f"] = {{"0.08", tdo::diode_capacitance(0.08, C0, c.V_d)},
                         {"0.18", tdo::diode_capacitance(0.18, C0, c.V_d)}};
  o.results["f_at_V_TD_hz"] = tdo::oscillation_frequency(c.L, C, tdo::diode_capacitance(p.num("V_TD_v"), C0, c.V_d));
  o.results["varactor_span_hz"] =
      tdo::oscillation_frequency(c, p.num("V_TD_v"), c.varactor_V.back()) -
      tdo::oscillation_frequency(c, p.num("V_TD_v"), c.varactor_V.front());
  Table tune{"tuning", {"V_TD_v", "f_hz"}, {}};
  for (double v : steps(0.0, 0.245, 0.005)) tune.rows.push_back({v, tdo::oscillation_frequency(c, v, 0.0)});
  o.tables.push_back(std::move(tune));

  tdo::WaveformRecord w;
  const std::string path = p.str("input_f32");
  if (!path.empty()) {
    w = tdo::read_f32le(path, p.num("sample_rate_hz"), p.num("input_scale"));
  } else {
    w = tdo::synthetic_sine(p.num("tone_hz"), p.num("amplitude_v"), p.num("sample_rate_hz"),
                            std::size_t(p.integer("samples")));
    if (p.num("noise_rel") > 0.0) {
      std::mt19937_64 rng(p.seed());
      std::normal_distribution<double> nd(0.0, p.num("noise_rel") * p.num("amplitude_v"));
      for (auto& x : w.samples) x += nd(rng);
    }
    if (p.integer("bits") > 0) w.samples = tdo::quantize(w.samples, p.num("full_scale_v"), int(p.integer("bits")));
  }
  const auto ps = tdo::power_spectrum(w, std::size_t(p.integer("zero_pad_factor")) * w.samples.size());
  o.results["spectrum"] = {{"peak_hz", ps.freqs[ps.peak]},
                           {"peak_dbm", ps.dBm[ps.peak]},
                           {"parseval_rel_error", ps.parseval_rel_error}};
  const auto st = tdo::analyze_waveform(w, p.num("band_center_hz"), p.num("bandwidth_hz"));
  o.results["envelope"] = {{"mean_v", st.mean}, {"sigma_v", st.sigma}, {"sigma_over_mean", st.sigma / st.mean}};
  Table sp{"spectrum", {"f_hz", "dBm"}, {}};
  for (std::size_t k = 0; k < ps.freqs.size(); ++k) sp.rows.push_back({ps.freqs[k], ps.dBm[k]});
  o.tables.push_back(std::move(sp));
}

// ---- fits ----

void run_fits(const Params& p, Outputs& o) {
  const double Qi = p.num("Q_int"), Qe = p.num("Q_ext"), phi = p.num("phi_rad");
  const double Ql = 1.0 / (1.0 / Qi + 1.0 / Qe);
  rf::ResonanceModel m{p.num("f0_hz"), Ql, Qe, phi, 0.03, 1.2, p.num("cable_delay_s")};
  const auto f = num::linspace(m.f0 * (1.0 - 8.0 / Ql), m.f0 * (1.0 + 8.0 / Ql), std::size_t(p.integer("points")));
  const auto data = rf::add_complex_noise(rf::resonance_model(f, m, rf::FitMode::notch), m.a, p.num("snr_db"), p.seed());
  const auto fit = rf::fit_resonance(f, data, rf::FitMode::notch);
  o.results["circle"] = {{"f0_hz", estimate(fit.f0)},
                         {"Q_tot", estimate(fit.Q_tot)},
                         {"Q_ext", estimate(fit.Q_ext)},
                         {"Q_int", estimate(fit.Q_int)},
                         {"truth", {{"Q_tot", Ql}, {"Q_ext", Qe / std::cos(phi)}, {"Q_int", 1.0 / (1.0 / Ql - std::cos(phi) / Qe)}}},
                         {"snr_db", fit.snr_db}};

  rf::TlsParams truth{p.num("tls_Q_TLS0_over_F"), p.num("tls_n_sat"), p.num("tls_beta"), p.num("tls_Q_other")};
  std::mt19937_64 rng(p.seed() + 1);
  std::normal_distribution<double> nd(0.0, p.num("tls_noise_rel"));
  std::vector<double> n, q;
  Table t{"tls", {"n_ph", "Q_int"}, {}};
  for (int i = 0; i <= 32; ++i) {
    n.push_back(std::pow(10.0, -1.0 + 7.0 * i / 32.0));
    q.push_back(1.0 / rf::tls_inverse_q(n.back(), truth) * (1.0 + nd(rng)));
    t.rows.push_back({n.back(), q.back()});
  }
  const auto tf = rf::fit_tls(n, q, std::vector<double>(n.size(), 1.0));
  o.results["tls"] = {{"Q_TLS0_over_F", estimate(tf.Q_TLS0_over_F)},
                      {"n_sat", estimate(tf.n_sat)},
                      {"beta", estimate(tf.beta)},
                      {"q_other_unidentifiable", tf.q_other_unidentifiable},
                      {"truth", {{"Q_TLS0_over_F", truth.Q_TLS0_over_F}, {"n_sat", truth.n_sat}, {"beta", truth.beta}}}};
  o.tables.push_back(std::move(t));
}

// ---- properties ----

void run_properties(const Params& p, Outputs& o) {
  bool unitary = true;
  for (double t : {0.0, 0.3, 1.7, 12.0}) unitary = unitary && qubit::is_unitary(qubit::exchange_evolution(1.0, t));
  o.results["unitarity"] = unitary;

  const int pts = int(p.integer("n_points"));
  const auto he = rydberg::solve_spectrum(rydberg::SurfaceParams::helium(), {150e-9, pts}, 3);
  double worst = 0.0;
  for (const auto& psi : he.wavefunctions) {
    double s = 0.0;
    for (double v : psi) s += v * v * he.dz;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  o.results["normalization_error"] = worst;
  const auto fine = rydberg::solve_spectrum(rydberg::SurfaceParams::helium(), {150e-9, 2 * pts}, 2);
  o.results["f12_refinement_rel"] = std::abs(fine.f12 / he.f12 - 1.0);

  const auto a = magnet::MagnetAssembly::two_block();
  const magnet::Vec3 pt(0.3e-6, 60e-9, 200e-9);
  o.results["div_B_rel"] = std::abs(magnet::divergence(a, pt)) / (a.field(pt).norm() / 150e-9);

  const auto ps = tdo::power_spectrum(tdo::synthetic_sine(141.8e6, 15e-3, 20e9, 16000), 4 * 16000);
  o.results["parseval_rel_error"] = ps.parseval_rel_error;

  bool mono = true;
  double prev = INFINITY;
  for (double v : steps(0.0, 0.245, 0.005)) {
    const double x = tdo::oscillation_frequency(tdo::TdoCircuit{}, v, 0.0);
    mono = mono && x < prev;
    prev = x;
  }
  for (double f = 100.0; f < 1e5; f *= 1.5)
    mono = mono && fm::lz_probability({0.83e6, 768e6, f}).P <= fm::lz_probability({0.83e6, 768e6, f * 1.5}).P;
  o.results["monotonicity"] = mono;
}

std::vector<ParamSpec> tank_params() {
  return {num("L_h", 708e-9, "tank inductance"), num("C_f", 2.131e-12, "tank capacitance"),
          num("C_c_f", 0.315e-12, "coupling capacitance"), num("R_ohm", 321e3, "loss resistance, <= 0 for lossless"),
          num("Z_line_ohm", 50.0, "line impedance"), num("span_halfwidths", 5.0, "sweep half-span in linewidths"),
          integer("points", 401, "sweep points")};
}

std::vector<ParamSpec> fm_params(bool fixed_window) {
  std::vector<ParamSpec> v{num("V_BC_v", 12.0, "bottom center electrode"),
                           num("V_BG_v", -90.0, "bottom guard electrodes"),
                           num("gauss_sigma_hz", 1e9, "inhomogeneous broadening"),
                           num("bin_width_hz", 50e6, "distribution bin width"),
                           num("stark_max_v_per_m", 8000.0, "Stark table upper field"),
                           num("stark_step_v_per_m", 250.0, "Stark table step"),
                           req("f_ma_hz", "modulation amplitude"),
                           req("f_mf_hz", "modulation frequency"),
                           num("carrier_step_hz", 100e6, "carrier step"),
                           flag("lz", false, "Landau-Zener weighting"),
                           num("V_RF_v", 14e-6, "probe amplitude at the top plate")};
  if (fixed_window) {
    v.push_back(num("carrier_halfspan_hz", 3e9, "half-span around the distribution peak"));
  } else {
    v.push_back(req("carrier_start_hz", "first carrier"));
    v.push_back(req("carrier_stop_hz", "last carrier"));
  }
  return v;
}

std::vector<ParamSpec> spin_param_specs() {
  return {num("two_tc_hz", 8e9, "charge qubit splitting 2t_c"), num("b_par_hz", 4.8e9, "Zeeman splitting"),
          num("b_perp_hz", 1e9, "gradient coupling"),          num("lever_arm", 0.05, "lever arm alpha"),
          num("eV0_h_hz", 3e9, "zero-point voltage, e V0 / h"), num("f_r_hz", 4.8e9, "resonator frequency")};
}

std::vector<Scenario> build() {
  std::vector<Scenario> r;
  r.push_back({"sensitivity", "rf-resonator", "capacitance sensitivity S_c of the helium tank", 1,
               {num("Q_ext", 648.0, "external Q"), num("Q_tot", 311.0, "loaded Q"), num("f0_hz", 120.946e6, "resonance"),
                num("C_t_f", 2.446e-12, "total capacitance"), num("V_n_v_per_rthz", 12e-9, "amplifier noise"),
                num("gain", 41.0, "gain to the analyzer"), num("bandwidth_hz", 1.0, "measurement bandwidth"),
                num("V_RF_v", 14e-6, "probe amplitude"), num("dC_over_C_t", 8.6e-7, "capacitance modulation")},
               run_sensitivity});
  r.push_back({"rf", "rf-resonator", "tank resonance f0 and reflection Gamma(f)", 2, tank_params(), run_rf});
  r.push_back({"qcap", "quantum-capacitance", "population difference and single-electron C_1(eps)", 3,
               {num("rabi_hz", 0.83e6, "2 t_c / h"), num("T_k", 0.160, "electron temperature"),
                num("dq_e", 1e-5, "induced charge in units of e"), num("f_rf_hz", 120.946e6, "probe frequency"),
                num("relaxation_rate_hz", 1e6, "relaxation rate"), num("eps_span_hz", 10e6, "detuning half-span"),
                integer("points", 401, "detuning points"), flag("tunneling", false, "include the tunneling term")},
               run_qcap});
  r.push_back({"lz-chain", "fm-readout-sim", "Landau-Zener suppression and the 2t_c fit vs f_mf", 4,
               {num("rabi_hz", 0.83e6, "2 t_c / h"), list("f_ma_hz", {528e6, 768e6}, "modulation amplitudes"),
                num("f_mf_min_hz", 200.0, "lowest f_mf"), num("f_mf_max_hz", 20e3, "highest f_mf"),
                num("f_mf_ratio", 1.35, "geometric f_mf step"), num("amplitude_v", 50e-9, "unsuppressed sideband"),
                num("noise_rel", 0.05, "relative amplitude noise"), num("domain_max_hz", 20e3, "fit domain"),
                num("f_ma_ref_hz", 768e6, "reference point"), num("f_mf_ref_hz", 1e3, "reference point")},
               run_lz});
  r.push_back({"fm-fig3", "fm-readout-sim", "sideband V_s vs MW carrier, saturated density", 5, fm_params(true),
               run_fm_fig3});
  r.push_back({"fm-sweep", "fm-readout-sim", "sideband V_s over an explicit carrier range", 0, fm_params(false),
               run_fm_sweep});
  r.push_back({"corbino", "corbino-electrostatics", "saturated density n_s(r) for a Corbino bias", 0,
               {num("V_BC_v", 12.0, "bottom center electrode"), num("V_BG_v", -90.0, "bottom guard electrodes"),
                num("eta", 0.5, "relaxation factor"), integer("n_r", 500, "radial cells"),
                integer("n_z", 200, "vertical cells")},
               run_corbino});
  r.push_back({"rydberg", "rydberg-solver", "Rydberg levels, <z> on helium and neon, hydrogenic limit", 6,
               {integer("n_states", 3, "levels per medium"), integer("n_points", 4000, "grid points"),
                num("E_perp_v_per_m", 0.0, "pressing field"), num("z_max_helium_m", 150e-9, "helium grid height"),
                num("z_max_neon_m", 40e-9, "neon grid height"), num("hydrogenic_V0_ev", 1000.0, "barrier for the limit"),
                num("hydrogenic_z0_m", 1e-13, "image offset for the limit")},
               run_rydberg});
  auto neon_p = std::vector<ParamSpec>{num("penetration_depth_m", 390e-9, "film penetration depth"),
                                       num("film_thickness_m", 20e-9, "film thickness"),
                                       num("length_m", 1.45e-3, "nanowire length"), num("width_m", 100e-9, "width")};
  for (auto& s : spin_param_specs()) neon_p.push_back(s);
  for (auto& s : neon_p)
    if (s.key == "f_r_hz") s.default_value = 4.81e9;
  r.push_back({"neon-em", "neon-sheet-em", "nanowire L, Z0, V0 and the coupling chain to g_s", 7, neon_p, run_neon_em});
  auto spin_p = spin_param_specs();
  for (auto& s : std::vector<ParamSpec>{
           num("gamma_s_eff_target_hz", 7e3, "effective spin loss to back-solve gamma_c"),
           num("kappa_hz", 0.1e6, "resonator loss"), num("f_Rc_hz", 10e6, "charge Rabi frequency"),
           num("beta", 10.0, "iSWAP detuning ratio"), num("scan_gamma_c_hz", 0.36e6, "Lambda-scan charge loss"),
           num("scan_gamma_s_hz", 10e3, "Lambda-scan spin loss"), num("lambda_min", 0.02, "scan start"),
           num("lambda_max", 0.9, "scan end"), num("lambda_step", 0.01, "scan step")})
    spin_p.push_back(s);
  r.push_back({"spin-gates", "spin-photon-gates", "cooperativity, F1/F2 and the Lambda scan", 8, spin_p, run_spin});
  r.push_back({"neon-loading", "neon-sheet-em", "electron loading 1/Q_e at matched shift, thickness inversion", 9,
               {text("resonator", "resonator2", "cross-section preset"),
                num("neon_thickness_m", 270e-9, "neon film"), num("tau_s", 1.9e-12, "scattering time"),
                num("target_shift", -0.009, "matched fractional shift"), num("r1_shift", -0.0094, "resonator1 neon shift"),
                num("r2_shift", -0.0086, "resonator2 neon shift")},
               run_loading});
  r.push_back({"magnet", "micromagnet", "gradient dBz/dy vs height and b_perp", 10,
               {num("thickness_m", 100e-9, "block thickness"), num("gap_m", 500e-9, "gap between blocks"),
                num("M_t", 1.7, "saturation mu0 M"), num("d_m", 100e-9, "electron separation"),
                num("dz_m", 146e-9, "electron height above the block midplane"),
                num("misalignment_m", 0.0, "y offset of the electrons"), num("dz_min_m", 60e-9, "profile start"),
                num("dz_max_m", 300e-9, "profile end"), num("dz_step_m", 2e-9, "profile step"),
                text("method", "dipole", "dipole or prism"), flag("compare_prism", true, "evaluate the other method too"),
                num("quoted_gradient_t_per_m", 0.36e6, "gradient for the b_perp check")},
               run_magnet});
  r.push_back({"tdo", "tdo-model", "TDO capacitances, frequency and the output spectrum", 11,
               {num("L_h", 95e-9, "inductance"), num("C_f", 5.8e-12, "varactor-side capacitance"),
                num("C0_f", 5.7e-12, "zero-bias diode capacitance"), num("V_d_v", 0.5, "built-in voltage"),
                num("V_TD_v", 0.18, "diode bias"), text("temperature_set", "11mK", "11mK or 3.4K"),
                num("tone_hz", 142.5e6, "synthetic tone"), num("amplitude_v", 15e-3, "tone amplitude"),
                num("sample_rate_hz", 20e9, "sample rate"), integer("samples", 16000, "record length"),
                num("noise_rel", 0.0, "white noise / amplitude"), integer("bits", 0, "quantizer bits, 0 = off"),
                num("full_scale_v", 20e-3, "quantizer full scale"), integer("zero_pad_factor", 1, "spectrum padding"),
                num("band_center_hz", 142.5e6, "envelope band center"), num("bandwidth_hz", 50e6, "envelope band"),
                text("input_f32", "", "raw float32 record instead of the tone"), num("input_scale", 1.0, "raw scale")},
               run_tdo});
  r.push_back({"fits", "rf-resonator", "circle fit and TLS fit round trips", 12,
               {num("f0_hz", 4.81e9, "resonance"), num("Q_int", 2.3e5, "internal Q"), num("Q_ext", 3.7e4, "|Q_e|"),
                num("phi_rad", 0.1, "mismatch angle"), num("cable_delay_s", 45e-9, "cable delay"),
                num("snr_db", 40.0, "noise level"), integer("points", 801, "frequency points"),
                num("tls_Q_TLS0_over_F", 6.64e4, "TLS Q0/F"), num("tls_n_sat", 300.0, "saturation photons"),
                num("tls_beta", 0.377, "saturation exponent"), num("tls_Q_other", 1e7, "other losses"),
                num("tls_noise_rel", 0.01, "relative noise on Q_int")},
               run_fits});
  r.push_back({"properties", "all", "unitarity, normalization, div B, Parseval, refinement, monotonicity", 13,
               {integer("n_points", 4000, "Rydberg grid for the refinement pair")}, run_properties});
  return r;
}

}  // namespace

const std::vector<Scenario>& registry() {
  static const std::vector<Scenario> r = build();
  return r;
}

}  // namespace febench::workbench
