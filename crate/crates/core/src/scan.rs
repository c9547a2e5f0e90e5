//! Monte Carlo scans: fidelity-susceptibility curves over β, decay fits of
//! C(r), and per-temperature phase labels with regime boundaries.

use serde::{Deserialize, Serialize};

use crate::clock_mc::{
    estimate_correlation, estimate_heat_capacity, reweight_fidelity_central, run_chains,
    CorrelationPoint, McConfig, Proposal, Start,
};
use crate::error::{Error, Result};
use crate::{beta_from_temperature, temperature_from_beta};

/// Chain settings shared by every point of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub sweeps: usize,
    pub therm: usize,
    pub measure_every: usize,
    pub seed: u64,
    pub proposal: Proposal,
    pub start: Start,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            sweeps: 20_000,
            therm: 2_000,
            measure_every: 1,
            seed: 0,
            proposal: Proposal::Uniform,
            start: Start::Cold,
        }
    }
}

impl McSettings {
    pub fn chain(&self, d: usize, l: usize, t: f64, point: u64) -> McConfig {
        McConfig {
            d,
            l,
            t,
            sweeps: self.sweeps,
            therm: self.therm,
            measure_every: self.measure_every,
            seed: derive_seed(self.seed, point),
            proposal: self.proposal,
            start: self.start,
            correlations: false,
        }
    }
}

/// Per-point chain seed: splitmix64 of the base seed advanced by `point`.
pub fn derive_seed(base: u64, point: u64) -> u64 {
    let mut z = base.wrapping_add(point.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    pub beta: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// `2(1 - F)/δβ²` from reweighting, with `1 - F` the mean over the
    /// forward and backward neighbours of `β`.
    pub chi_f: f64,
    pub chi_f_err: f64,
    /// `C_v/(8β²)` from the energy variance; equals `χ_F / 2` in the limit.
    pub cv_route: f64,
    pub cv_err: f64,
    pub valid: bool,
    pub ess: f64,
    pub autocorr: Option<f64>,
    pub acceptance: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl FidelityPoint {
    /// `|χ_F/2 - cv_route|` in combined standard errors.
    pub fn route_sigmas(&self) -> f64 {
        let dev = (0.5 * self.chi_f - self.cv_route).abs();
        let err = (0.25 * self.chi_f_err * self.chi_f_err + self.cv_err * self.cv_err).sqrt();
        if dev == 0.0 {
            0.0
        } else {
            dev / err
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub delta_beta: f64,
    pub points: Vec<FidelityPoint>,
    /// Index of the largest valid `χ_F`.
    pub chi_peak: Option<usize>,
    /// Index of the largest heat capacity `C_v = 8β² · cv_route`.
    pub cv_peak: Option<usize>,
}

impl FidelityCurve {
    pub fn chi_peak_temperature(&self) -> Option<f64> {
        self.chi_peak.map(|i| self.points[i].t)
    }

    /// Temperature of the heat-capacity maximum (`C_v = 8β² · cv_route`).
    pub fn cv_peak_temperature(&self) -> Option<f64> {
        self.cv_peak.map(|i| self.points[i].t)
    }
}

fn argmax<I: Iterator<Item = (usize, f64)>>(it: I) -> Option<usize> {
    it.fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
        Some((_, b)) if b >= v => best,
        _ => Some((i, v)),
    })
    .map(|(i, _)| i)
}

/// One chain per β; reweighting failures mark the point invalid and the
/// scan continues.
pub fn scan_fidelity(d: usize, l: usize, betas: &[f64], delta_beta: f64, mc: &McSettings) -> Result<FidelityCurve> {
    if betas.is_empty() {
        return Err(Error::Domain("empty beta grid".into()));
    }
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
        return Err(Error::Domain(format!("beta grid entries must be finite and > 0, got {b}")));
    }
    if !(delta_beta > 0.0) || !delta_beta.is_finite() {
        return Err(Error::Domain(format!("delta_beta must be > 0, got {delta_beta}")));
    }
    let cfgs: Vec<McConfig> = betas
        .iter()
        .enumerate()
        .map(|(i, &b)| mc.chain(d, l, temperature_from_beta(b), i as u64))
        .collect();
    let runs = run_chains(&cfgs);
    let mut points = Vec::with_capacity(betas.len());
    for ((&beta, cfg), run) in betas.iter().zip(&cfgs).zip(runs) {
        let run = run?;
        let s = &run.series;
        let cv = estimate_heat_capacity(s)?.total;
        let scale = 1.0 / (8.0 * beta * beta);
        let mut point = FidelityPoint {
            beta,
            t: cfg.t,
            chi_f: f64::NAN,
            chi_f_err: f64::NAN,
            cv_route: cv.mean * scale,
            cv_err: cv.std_err * scale,
            valid: false,
            ess: 0.0,
            autocorr: run.manifest.autocorr_estimate,
            acceptance: s.acceptance_rate(),
            seed: cfg.seed,
            note: None,
        };
        match reweight_fidelity_central(s, delta_beta) {
            Ok(fid) => {
                let k = 2.0 / (delta_beta * delta_beta);
                point.chi_f = k * fid.infidelity.mean;
                point.chi_f_err = k * fid.infidelity.std_err;
                point.ess = fid.ess;
                point.valid = true;
            }
            Err(Error::ReweightingFailure { ess, .. }) => {
                point.ess = ess;
                point.note = Some(format!("reweighting collapsed: ess {ess:.1} of {}", s.len()));
            }
            Err(e) => return Err(e),
        }
        points.push(point);
    }
    let chi_peak = argmax(points.iter().enumerate().filter(|(_, p)| p.valid).map(|(i, p)| (i, p.chi_f)));
    let cv_peak = argmax(points.iter().enumerate().map(|(i, p)| (i, p.cv_route * 8.0 * p.beta * p.beta)));
    Ok(FidelityCurve {
        d,
        l,
        delta_beta,
        points,
        chi_peak,
        cv_peak,
    })
}

/// Temperature grid `start, start + step, …` up to and including `stop`
/// (within a small tolerance), built by index so endpoints do not drift.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Domain(format!("invalid grid {start}..{stop} step {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

/// Convert a temperature grid to β values.
pub fn betas_for(temps: &[f64]) -> Vec<f64> {
    temps.iter().map(|&t| beta_from_temperature(t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayModel {
    LongRange,
    PowerLaw,
    Exponential,
}

impl DecayModel {
    /// Phase of the deformed quantum state matching this clock regime.
    pub fn quantum_phase(self) -> &'static str {
        match self {
            Self::LongRange => "trivial",
            Self::PowerLaw => "KT-like",
            Self::Exponential => "Z_d topological",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayLabel {
    LongRange,
    PowerLaw,
    Exponential,
    Ambiguous,
    /// Different labels at different L.
    Drifting,
}

impl From<DecayModel> for DecayLabel {
    fn from(m: DecayModel) -> Self {
        match m {
            DecayModel::LongRange => Self::LongRange,
            DecayModel::PowerLaw => Self::PowerLaw,
            DecayModel::Exponential => Self::Exponential,
        }
    }
}

impl DecayLabel {
    pub fn quantum_phase(self) -> Option<&'static str> {
        match self {
            Self::LongRange => Some(DecayModel::LongRange.quantum_phase()),
            Self::PowerLaw => Some(DecayModel::PowerLaw.quantum_phase()),
            Self::Exponential => Some(DecayModel::Exponential.quantum_phase()),
            Self::Ambiguous | Self::Drifting => None,
        }
    }
}

/// Thresholds of the decay classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCriteria {
    /// Plateau test: mean C over the top quartile of r must exceed this.
    pub plateau_min: f64,
    /// Plateau test: the fitted power exponent must be below this.
    pub flat_eta: f64,
    /// The chosen model's normalized residual must be smaller than the
    /// other's by this factor.
    pub margin: f64,
}

impl Default for DecayCriteria {
    fn default() -> Self {
        Self {
            plateau_min: 0.2,
            flat_eta: 0.05,
            margin: 1.2,
        }
    }
}

/// Smallest error accepted as a fit weight.
const MIN_SIGMA: f64 = 1e-12;

/// Search interval for the power-law exponent.
const ETA_RANGE: (f64, f64) = (-1.0, 6.0);
/// Search interval for the inverse correlation length.
const KAPPA_RANGE: (f64, f64) = (0.0, 10.0);

/// Unit-amplitude profile of a decaying model at separation `r`. On a torus
/// of side `L` the image at `L - r` is added.
pub fn decay_shape(model: DecayModel, param: f64, r: f64, torus: Option<usize>) -> f64 {
    let f = |x: f64| match model {
        DecayModel::PowerLaw => x.powf(-param),
        DecayModel::Exponential => (-param * x).exp(),
        DecayModel::LongRange => 1.0,
    };
    match torus {
        Some(l) if model != DecayModel::LongRange => f(r) + f(l as f64 - r),
        _ => f(r),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit {
    pub param: f64,
    pub amplitude: f64,
    /// χ² per degree of freedom (two fitted parameters).
    pub norm_residual: f64,
}

/// Weighted least squares of `y ≈ A g(p, x)`: `A` in closed form, `p` by a
/// grid scan over `[lo, hi]` refined with golden-section search.
pub fn profile_fit<G: Fn(f64, f64) -> f64>(x: &[f64], y: &[f64], sigma: &[f64], lo: f64, hi: f64, g: G) -> ProfileFit {
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / s.max(MIN_SIGMA).powi(2)).collect();
    let syy: f64 = w.iter().zip(y).map(|(w, y)| w * y * y).sum();
    let solve = |p: f64| -> (f64, f64) {
        let (mut sgg, mut syg) = (0.0, 0.0);
        for ((w, x), y) in w.iter().zip(x).zip(y) {
            let gv = g(p, *x);
            sgg += w * gv * gv;
            syg += w * y * gv;
        }
        if sgg == 0.0 || !sgg.is_finite() {
            return (0.0, syy);
        }
        (syg / sgg, (syy - syg * syg / sgg).max(0.0))
    };
    const GRID: usize = 400;
    let at = |i: usize| lo + (hi - lo) * i as f64 / GRID as f64;
    let best = (0..=GRID)
        .min_by(|&a, &b| solve(at(a)).1.total_cmp(&solve(at(b)).1))
        .unwrap_or(0);
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(GRID)));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    for _ in 0..80 {
        if solve(c).1 < solve(d).1 {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    let p = 0.5 * (a + b);
    let (amplitude, chi2) = solve(p);
    let dof = x.len().saturating_sub(2).max(1);
    ProfileFit {
        param: p,
        amplitude,
        norm_residual: chi2 / dof as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub r_range: (usize, usize),
    pub points_used: usize,
    /// Side of the torus whose image term was included in the fits.
    pub torus: Option<usize>,
    /// Power-law exponent `η` of `C = A r^{-η}`.
    pub eta: Option<f64>,
    /// `η` fitted without the image term; the plateau test uses this one,
    /// since the image sum of a near-flat profile is poorly conditioned.
    pub eta_plain: Option<f64>,
    /// Correlation length `ξ` of `C = A e^{-r/ξ}`; absent when the best fit
    /// does not decay.
    pub xi: Option<f64>,
    /// Weighted mean of C over the range (the long-range plateau).
    pub plateau: f64,
    /// Mean C over the top quartile of r values in the range.
    pub tail_mean: f64,
    pub residual_power: Option<f64>,
    pub residual_exponential: Option<f64>,
    pub residual_plateau: f64,
    pub label: DecayLabel,
    /// Ratio of the runner-up residual to the chosen one (power vs
    /// exponential); absent for plateau and pre-classified decisions.
    pub margin: Option<f64>,
    pub diagnostics: Vec<String>,
}

/// Default r window: `[2, L/4]`, widened to `[2, 5]` when `L/4 < 5` so that
/// at least four separations enter the fits. The upper end never passes
/// `L/2`; if that leaves fewer than four points the window starts at 1.
pub fn default_r_range(l: usize) -> (usize, usize) {
    let hi = (l / 4).max(5).min(l / 2);
    let lo = if hi >= 5 { 2 } else { hi.saturating_sub(3).max(1) };
    (lo, hi)
}

/// Classify the decay of `C(r)` over `r_range`. With `torus = Some(L)` the
/// decaying models include their periodic image.
pub fn fit_decay(
    table: &[CorrelationPoint],
    r_range: (usize, usize),
    torus: Option<usize>,
    criteria: &DecayCriteria,
) -> Result<DecayFit> {
    let pts: Vec<&CorrelationPoint> = table
        .iter()
        .filter(|p| p.r >= r_range.0 && p.r <= r_range.1)
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData { got: pts.len(), need: 4 });
    }
    let n = pts.len();
    let r: Vec<f64> = pts.iter().map(|p| p.r as f64).collect();
    let c: Vec<f64> = pts.iter().map(|p| p.value).collect();
    let sig: Vec<f64> = pts.iter().map(|p| p.std_err.max(MIN_SIGMA)).collect();

    let w: Vec<f64> = sig.iter().map(|s| 1.0 / (s * s)).collect();
    let plateau = w.iter().zip(&c).map(|(w, c)| w * c).sum::<f64>() / w.iter().sum::<f64>();
    let residual_plateau = w.iter().zip(&c).map(|(w, c)| w * (c - plateau).powi(2)).sum::<f64>() / (n - 1) as f64;
    let top = n.div_ceil(4);
    let tail_mean = c[n - top..].iter().sum::<f64>() / top as f64;

    let expo = profile_fit(&r, &c, &sig, KAPPA_RANGE.0, KAPPA_RANGE.1, |k, x| {
        decay_shape(DecayModel::Exponential, k, x, torus)
    });
    let mut fit = DecayFit {
        r_range,
        points_used: n,
        torus,
        eta: None,
        eta_plain: None,
        xi: (expo.param > 1e-9).then(|| 1.0 / expo.param),
        plateau,
        tail_mean,
        residual_power: None,
        residual_exponential: Some(expo.norm_residual),
        residual_plateau,
        label: DecayLabel::Ambiguous,
        margin: None,
        diagnostics: Vec::new(),
    };

    let nonpositive: Vec<usize> = pts.iter().filter(|p| p.value <= 0.0).map(|p| p.r).collect();
    if !nonpositive.is_empty() {
        fit.diagnostics.push(format!("non-positive C(r) at r = {nonpositive:?}"));
        fit.label = DecayLabel::Exponential;
        return Ok(fit);
    }

    let power = profile_fit(&r, &c, &sig, ETA_RANGE.0, ETA_RANGE.1, |e, x| {
        decay_shape(DecayModel::PowerLaw, e, x, torus)
    });
    let eta = power.param;
    let eta_plain = if torus.is_some() {
        profile_fit(&r, &c, &sig, ETA_RANGE.0, ETA_RANGE.1, |e, x| {
            decay_shape(DecayModel::PowerLaw, e, x, None)
        })
        .param
    } else {
        eta
    };
    fit.eta = Some(eta);
    fit.eta_plain = Some(eta_plain);
    fit.residual_power = Some(power.norm_residual);

    // A flat tail is nested in both decaying models (η = 0, ξ = ∞), so it is
    // decided by the plateau test rather than by residuals.
    if tail_mean > criteria.plateau_min && eta_plain.abs() < criteria.flat_eta {
        fit.label = DecayLabel::LongRange;
        return Ok(fit);
    }
    if eta < 0.0 {
        fit.diagnostics.push(format!("C(r) increases with r (η = {eta:.3})"));
    }

    let (rp, re) = (power.norm_residual, expo.norm_residual);
    if rp * criteria.margin < re {
        fit.label = DecayLabel::PowerLaw;
        fit.margin = Some(if rp > 0.0 { re / rp } else { f64::INFINITY });
    } else if re * criteria.margin < rp {
        fit.label = DecayLabel::Exponential;
        fit.margin = Some(if re > 0.0 { rp / re } else { f64::INFINITY });
    } else {
        fit.margin = Some(rp.max(re) / rp.min(re).max(f64::MIN_POSITIVE));
        fit.diagnostics
            .push(format!("power and exponential residuals within margin ({rp:.3} vs {re:.3})"));
    }
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeClassification {
    #[serde(rename = "L")]
    pub l: usize,
    pub fit: DecayFit,
    pub correlations: Vec<CorrelationPoint>,
    pub autocorr: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureClassification {
    #[serde(rename = "T")]
    pub t: f64,
    pub beta: f64,
    pub label: DecayLabel,
    pub quantum_phase: Option<String>,
    pub per_size: Vec<SizeClassification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub label: DecayLabel,
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    #[serde(rename = "T")]
    pub t: f64,
    pub uncertainty: f64,
    pub below: DecayLabel,
    pub above: DecayLabel,
    /// `1/(2T)` at the boundary.
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub d: usize,
    #[serde(rename = "L")]
    pub ls: Vec<usize>,
    pub criteria: DecayCriteria,
    pub temperatures: Vec<TemperatureClassification>,
    pub regimes: Vec<Regime>,
    pub boundaries: Vec<Boundary>,
    /// `1/(2 T_upper)` when exactly two boundaries exist.
    pub beta_c1: Option<f64>,
    /// `1/(2 T_lower)` when exactly two boundaries exist; with a single
    /// boundary, its mapped value.
    pub beta_c2: Option<f64>,
}

impl TransitionReport {
    /// Distinct labels in temperature order, ambiguous points skipped.
    pub fn regime_labels(&self) -> Vec<DecayLabel> {
        self.regimes.iter().map(|r| r.label).collect()
    }
}

/// Group consecutive equal labels and place boundaries at the midpoints of
/// the gaps between differing neighbours. Ambiguous temperatures are left
/// out of the regime sequence.
pub fn regimes_from_labels(temps: &[f64], labels: &[DecayLabel]) -> (Vec<Regime>, Vec<Boundary>) {
    let mut regimes: Vec<Regime> = Vec::new();
    let mut boundaries = Vec::new();
    for (&t, &label) in temps.iter().zip(labels) {
        if label == DecayLabel::Ambiguous {
            continue;
        }
        match regimes.last_mut() {
            Some(r) if r.label == label => r.t_max = t,
            Some(r) => {
                let mid = 0.5 * (r.t_max + t);
                boundaries.push(Boundary {
                    t: mid,
                    uncertainty: 0.5 * (t - r.t_max),
                    below: r.label,
                    above: label,
                    beta: beta_from_temperature(mid),
                });
                regimes.push(Regime {
                    label,
                    t_min: t,
                    t_max: t,
                });
            }
            None => regimes.push(Regime {
                label,
                t_min: t,
                t_max: t,
            }),
        }
    }
    (regimes, boundaries)
}

/// Run one chain per (T, L), fit C(r), and label each temperature.
pub fn classify_phases(
    d: usize,
    ls: &[usize],
    temps: &[f64],
    mc: &McSettings,
    criteria: &DecayCriteria,
) -> Result<TransitionReport> {
    if ls.is_empty() || temps.is_empty() {
        return Err(Error::Domain("classification needs at least one L and one T".into()));
    }
    let mut temps_sorted = temps.to_vec();
    temps_sorted.sort_by(f64::total_cmp);
    let mut cfgs = Vec::new();
    for (ti, &t) in temps_sorted.iter().enumerate() {
        for (li, &l) in ls.iter().enumerate() {
            let point = (ti * ls.len() + li) as u64;
            cfgs.push(McConfig {
                correlations: true,
                ..mc.chain(d, l, t, point)
            });
        }
    }
    let runs = run_chains(&cfgs);
    let mut runs = runs.into_iter().zip(&cfgs);
    let mut temperatures = Vec::with_capacity(temps_sorted.len());
    for &t in &temps_sorted {
        let mut per_size = Vec::with_capacity(ls.len());
        for &l in ls {
            let (run, cfg) = runs.next().expect("one run per (T, L)");
            let run = run?;
            let correlations = estimate_correlation(&run.series)?;
            let fit = fit_decay(&correlations, default_r_range(l), Some(l), criteria)?;
            per_size.push(SizeClassification {
                l,
                fit,
                correlations,
                autocorr: run.manifest.autocorr_estimate,
                seed: cfg.seed,
            });
        }
        let first = per_size[0].fit.label;
        let label = if per_size.iter().all(|s| s.fit.label == first) {
            first
        } else {
            DecayLabel::Drifting
        };
        temperatures.push(TemperatureClassification {
            t,
            beta: beta_from_temperature(t),
            label,
            quantum_phase: label.quantum_phase().map(str::to_string),
            per_size,
        });
    }
    if temperatures.iter().all(|t| t.label == DecayLabel::Ambiguous) {
        let diag: Vec<String> = temperatures
            .iter()
            .flat_map(|t| t.per_size.iter().flat_map(|s| s.fit.diagnostics.clone()))
            .collect();
        return Err(Error::NoReport(format!("every temperature was ambiguous: {}", diag.join("; "))));
    }
    let labels: Vec<DecayLabel> = temperatures.iter().map(|t| t.label).collect();
    let (regimes, boundaries) = regimes_from_labels(&temps_sorted, &labels);
    let (beta_c1, beta_c2) = match boundaries.as_slice() {
        [only] => (None, Some(only.beta)),
        [lower, upper] => (Some(upper.beta), Some(lower.beta)),
        _ => (None, None),
    };
    Ok(TransitionReport {
        d,
        ls: ls.to_vec(),
        criteria: *criteria,
        temperatures,
        regimes,
        boundaries,
        beta_c1,
        beta_c2,
    })
}

/// `Var(C)` of an independent-spin system: `bonds · Var(cos(2πr/d))`, r
/// uniform. Valid for `L ≥ 3` where no two bonds join the same pair.
pub fn infinite_temperature_bond_variance(d: usize, bonds: usize) -> f64 {
    let cos: Vec<f64> = (0..d)
        .map(|r| (2.0 * std::f64::consts::PI * r as f64 / d as f64).cos())
        .collect();
    let m = cos.iter().sum::<f64>() / d as f64;
    bonds as f64 * cos.iter().map(|c| (c - m) * (c - m)).sum::<f64>() / d as f64
}
