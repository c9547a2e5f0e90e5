//! Single-spin Metropolis sampling of the d-state clock model.
//!
//! Chains are fully determined by `(McConfig, RNG_ID, CODE_VERSION)`: one
//! ChaCha8 stream seeded from the 64-bit seed drives the start
//! configuration, the site-ordered sweeps and every accept test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clock_exact::{check_temperature, ClockModel, SpinConfig};
use crate::error::{Error, Result};
use crate::stats::{integrated_autocorrelation_time, BlockedMoments, ErrorEstimate, DEFAULT_BLOCKS};
use crate::{beta_from_temperature, CODE_VERSION};

/// Identifier recorded in manifests for the generator used by every chain.
pub const RNG_ID: &str = "chacha8";

/// Sweeps between full recomputations of the running bond sum.
pub const RECOMPUTE_EVERY: usize = 1000;

const DRIFT_TOLERANCE: f64 = 1e-8;

/// Minimum samples for heat-capacity estimates.
pub const MIN_SAMPLES: usize = 100;

/// Reweighting is refused when the effective sample size drops below this
/// fraction of the series length.
pub const MIN_ESS_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Proposal {
    /// New value uniform over all d values, the current one included.
    /// Keeping a chance of staying put matters for sequential sweeps: a
    /// proposal that always moves makes every zero-field site flip, and on
    /// the 2×2 torus at d = 2 the chain then locks into deterministic cycles.
    Uniform,
    /// Current value ± 1 mod d with equal probability. At d = 2 this is a
    /// forced flip and has the problem described above.
    Step,
}

impl std::str::FromStr for Proposal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "step" => Ok(Self::Step),
            other => Err(Error::Domain(format!("unknown proposal '{other}' (expected uniform or step)"))),
        }
    }
}

impl Proposal {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Step => "step",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    /// All spins zero.
    Cold,
    /// Spins drawn uniformly from the chain's own generator.
    Hot,
}

impl std::str::FromStr for Start {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cold" => Ok(Self::Cold),
            "hot" => Ok(Self::Hot),
            other => Err(Error::Domain(format!("unknown start '{other}' (expected cold or hot)"))),
        }
    }
}

impl Start {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cold => "cold",
            Self::Hot => "hot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub d: usize,
    pub l: usize,
    pub t: f64,
    /// Measurement sweeps (after thermalization).
    pub sweeps: usize,
    pub therm: usize,
    pub measure_every: usize,
    pub seed: u64,
    pub proposal: Proposal,
    pub start: Start,
    /// Accumulate C(r) at every measurement.
    pub correlations: bool,
}

impl McConfig {
    pub fn new(d: usize, l: usize, t: f64) -> Self {
        Self {
            d,
            l,
            t,
            sweeps: 10_000,
            therm: 1_000,
            measure_every: 1,
            seed: 0,
            proposal: Proposal::Uniform,
            start: Start::Cold,
            correlations: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_temperature(self.t)?;
        if self.measure_every == 0 {
            return Err(Error::Domain("measure_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-measurement observables of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub d: usize,
    pub l: usize,
    pub t: f64,
    pub energy: Vec<f64>,
    pub bond_sum: Vec<f64>,
    /// Largest separation in the correlation table (`L / 2`), zero when
    /// correlations were not accumulated.
    pub r_max: usize,
    /// Row-major `samples × r_max`, entry `r - 1` holds C(r).
    pub correlations: Vec<f64>,
    pub accepted: u64,
    pub proposed: u64,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energy.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.l * self.l
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// C(r) of sample `i`, `r` in `1..=r_max`.
    pub fn correlation(&self, i: usize, r: usize) -> f64 {
        self.correlations[i * self.r_max + r - 1]
    }
}

/// JSON sidecar describing a chain well enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McManifest {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub beta: f64,
    pub sweeps: usize,
    pub therm: usize,
    pub measure_every: usize,
    pub seed: u64,
    pub rng: String,
    pub proposal: Proposal,
    pub start: Start,
    pub code_version: String,
    /// Integrated autocorrelation time of E in units of measurements; absent
    /// when the series is too short.
    pub autocorr_estimate: Option<f64>,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub series: ObservableSeries,
    pub manifest: McManifest,
}

/// Lattice state plus the running bond sum.
#[derive(Debug, Clone)]
pub struct Chain {
    model: ClockModel,
    spins: SpinConfig,
    bond_sum: f64,
    t: f64,
    proposal: Proposal,
}

impl Chain {
    pub fn new(model: ClockModel, spins: SpinConfig, t: f64, proposal: Proposal) -> Result<Self> {
        check_temperature(t)?;
        let bond_sum = model.bond_sum(&spins)?;
        Ok(Self {
            model,
            spins,
            bond_sum,
            t,
            proposal,
        })
    }

    pub fn spins(&self) -> &SpinConfig {
        &self.spins
    }

    pub fn bond_sum(&self) -> f64 {
        self.bond_sum
    }

    pub fn energy(&self) -> f64 {
        -self.bond_sum
    }

    fn propose<R: Rng>(&self, old: usize, rng: &mut R) -> usize {
        let d = self.model.d();
        match self.proposal {
            Proposal::Uniform => rng.random_range(0..d),
            Proposal::Step => {
                if rng.random::<bool>() {
                    (old + 1) % d
                } else {
                    (old + d - 1) % d
                }
            }
        }
    }

    /// Change in the bond sum if `site` takes value `new`.
    pub fn delta_bond_sum(&self, site: usize, new: usize) -> f64 {
        let d = self.model.d();
        let cos = self.model.cos_table();
        let n = self.spins.values();
        let old = n[site] as usize;
        let mut delta = 0.0;
        for &(nb, _) in &self.model.incident()[site] {
            let s = n[nb] as usize;
            delta += cos[(new + d - s) % d] - cos[(old + d - s) % d];
        }
        delta
    }

    /// One proposal at every site in index order. Returns the number of
    /// accepted moves.
    pub fn metropolis_sweep<R: Rng>(&mut self, rng: &mut R) -> u64 {
        let mut accepted = 0;
        for site in 0..self.model.num_sites() {
            let old = self.spins.values()[site] as usize;
            let new = self.propose(old, rng);
            let delta_c = self.delta_bond_sum(site, new);
            // ΔE = -ΔC
            let accept = delta_c >= 0.0 || rng.random::<f64>() < (delta_c / self.t).exp();
            if accept {
                self.spins.values_mut()[site] = new as u8;
                self.bond_sum += delta_c;
                accepted += 1;
            }
        }
        accepted
    }

    /// Replace the running bond sum by a full recomputation, returning the
    /// accumulated drift.
    pub fn resync(&mut self) -> f64 {
        let exact = self.model.bond_sum(&self.spins).expect("chain config matches model");
        let drift = (exact - self.bond_sum).abs();
        self.bond_sum = exact;
        drift
    }

    /// Translation- and axis-averaged `cos(θ_i - θ_{i+r})` for r in 1..=L/2.
    pub fn correlations(&self, out: &mut Vec<f64>) {
        let lat = self.model.lattice();
        let l = lat.size();
        let d = self.model.d();
        let cos = self.model.cos_table();
        let n = self.spins.values();
        let norm = 2.0 * (l * l) as f64;
        for r in 1..=l / 2 {
            let mut s = 0.0;
            for y in 0..l {
                for x in 0..l {
                    let a = n[y * l + x] as usize;
                    let east = n[y * l + (x + r) % l] as usize;
                    let north = n[((y + r) % l) * l + x] as usize;
                    s += cos[(a + d - east) % d] + cos[(a + d - north) % d];
                }
            }
            out.push(s / norm);
        }
    }
}

pub fn run_chain(cfg: &McConfig) -> Result<McRun> {
    cfg.validate()?;
    let model = ClockModel::new(cfg.l, cfg.d)?;
    let v = model.num_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let spins = match cfg.start {
        Start::Cold => SpinConfig::uniform(cfg.d, v, 0)?,
        Start::Hot => SpinConfig::new(cfg.d, (0..v).map(|_| rng.random_range(0..cfg.d) as u8).collect())?,
    };
    let mut chain = Chain::new(model, spins, cfg.t, cfg.proposal)?;

    let n_samples = cfg.sweeps / cfg.measure_every;
    let r_max = if cfg.correlations { cfg.l / 2 } else { 0 };
    let mut series = ObservableSeries {
        d: cfg.d,
        l: cfg.l,
        t: cfg.t,
        energy: Vec::with_capacity(n_samples),
        bond_sum: Vec::with_capacity(n_samples),
        r_max,
        correlations: Vec::with_capacity(n_samples * r_max),
        accepted: 0,
        proposed: 0,
    };

    let total = cfg.therm + cfg.sweeps;
    for sweep in 1..=total {
        let acc = chain.metropolis_sweep(&mut rng);
        if sweep % RECOMPUTE_EVERY == 0 {
            let drift = chain.resync();
            assert!(drift <= DRIFT_TOLERANCE, "bond-sum drift {drift} after {sweep} sweeps");
        }
        if sweep <= cfg.therm {
            continue;
        }
        series.accepted += acc;
        series.proposed += v as u64;
        if (sweep - cfg.therm) % cfg.measure_every == 0 {
            series.bond_sum.push(chain.bond_sum());
            series.energy.push(chain.energy());
            if cfg.correlations {
                chain.correlations(&mut series.correlations);
            }
        }
    }

    let autocorr_estimate = (series.len() >= 4).then(|| integrated_autocorrelation_time(&series.energy));
    let manifest = McManifest {
        d: cfg.d,
        l: cfg.l,
        t: cfg.t,
        beta: beta_from_temperature(cfg.t),
        sweeps: cfg.sweeps,
        therm: cfg.therm,
        measure_every: cfg.measure_every,
        seed: cfg.seed,
        rng: RNG_ID.to_string(),
        proposal: cfg.proposal,
        start: cfg.start,
        code_version: CODE_VERSION.to_string(),
        autocorr_estimate,
        acceptance_rate: series.acceptance_rate(),
    };
    Ok(McRun { series, manifest })
}

/// Run independent chains concurrently; results keep the input order.
pub fn run_chains(cfgs: &[McConfig]) -> Vec<Result<McRun>> {
    cfgs.par_iter().map(run_chain).collect()
}

fn block_count(n: usize) -> usize {
    DEFAULT_BLOCKS.min(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatCapacityEstimate {
    pub total: ErrorEstimate,
    pub per_site: ErrorEstimate,
}

/// `Var(E) / T²` with a delete-one-block jackknife error.
pub fn estimate_heat_capacity(series: &ObservableSeries) -> Result<HeatCapacityEstimate> {
    let n = series.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientData { got: n, need: MIN_SAMPLES });
    }
    // shift by the first sample so the moments stay well conditioned
    let e0 = series.energy[0];
    let bm = BlockedMoments::new(n, block_count(n), 2, |i| {
        let x = series.energy[i] - e0;
        vec![x, x * x]
    })?;
    let t2 = series.t * series.t;
    let total = bm.jackknife(|m| (m[1] - m[0] * m[0]).max(0.0) / t2);
    let v = series.sites() as f64;
    let per_site = ErrorEstimate {
        mean: total.mean / v,
        std_err: total.std_err / v,
        blocks: total.blocks,
    };
    Ok(HeatCapacityEstimate { total, per_site })
}

pub fn estimate_energy(series: &ObservableSeries) -> Result<ErrorEstimate> {
    let n = series.len();
    let bm = BlockedMoments::new(n, block_count(n), 1, |i| vec![series.energy[i]])?;
    Ok(bm.jackknife(|m| m[0]))
}

/// `Var(C)` of the bond sum (equal to `Var(E)`).
pub fn estimate_bond_variance(series: &ObservableSeries) -> Result<ErrorEstimate> {
    let n = series.len();
    let c0 = series.bond_sum.first().copied().unwrap_or(0.0);
    let bm = BlockedMoments::new(n, block_count(n), 2, |i| {
        let x = series.bond_sum[i] - c0;
        vec![x, x * x]
    })?;
    Ok(bm.jackknife(|m| (m[1] - m[0] * m[0]).max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub r: usize,
    pub value: f64,
    pub std_err: f64,
}

pub fn estimate_correlation(series: &ObservableSeries) -> Result<Vec<CorrelationPoint>> {
    if series.r_max == 0 {
        return Err(Error::Domain("series was recorded without correlation accumulators".into()));
    }
    let n = series.len();
    (1..=series.r_max)
        .map(|r| {
            let bm = BlockedMoments::new(n, block_count(n), 1, |i| vec![series.correlation(i, r)])?;
            let e = bm.jackknife(|m| m[0]);
            Ok(CorrelationPoint {
                r,
                value: e.mean,
                std_err: e.std_err,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReweightedFidelity {
    pub beta: f64,
    pub delta_beta: f64,
    pub fidelity: ErrorEstimate,
    pub infidelity: ErrorEstimate,
    pub ess: f64,
    pub samples: usize,
}

/// Effective sample size of the weights `exp{k x_i}`.
fn reweighting_ess(x: &[f64], k: f64) -> f64 {
    let shift = x.iter().map(|v| k * v).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = x.iter().map(|v| (k * v - shift).exp()).collect();
    let s1: f64 = w.iter().sum();
    let s2: f64 = w.iter().map(|v| v * v).sum();
    s1 * s1 / s2
}

/// Fidelity between the deformed states at `β` and `β + δβ` from a chain
/// sampled at `T = 1/(2β)`, using `Z(β') / Z(β) = ⟨exp{2(β' - β)C}⟩_β`.
/// The bond sum is centred on its sample mean and the moments are carried
/// as `⟨expm1(·)⟩` so that `1 - F` keeps full relative precision.
pub fn reweight_fidelity(series: &ObservableSeries, delta_beta: f64) -> Result<ReweightedFidelity> {
    reweight(series, delta_beta, false)
}

/// Mean infidelity of the neighbouring pairs `(β, β + δβ)` and
/// `(β - δβ, β)`, both reweighted from the same chain at `β`. Odd powers of
/// `δβ` cancel, so `infidelity / δβ²` approaches `Var(C)/2` with an
/// O(δβ²) rather than O(δβ) bias. `fidelity` holds `1 - infidelity`.
pub fn reweight_fidelity_central(series: &ObservableSeries, delta_beta: f64) -> Result<ReweightedFidelity> {
    reweight(series, delta_beta, true)
}

fn reweight(series: &ObservableSeries, delta_beta: f64, central: bool) -> Result<ReweightedFidelity> {
    if !delta_beta.is_finite() {
        return Err(Error::Domain(format!("delta_beta must be finite, got {delta_beta}")));
    }
    let n = series.len();
    let beta = beta_from_temperature(series.t);
    if n < 2 {
        return Err(Error::InsufficientData { got: n, need: 2 });
    }
    if delta_beta == 0.0 {
        let one = ErrorEstimate {
            mean: 1.0,
            std_err: 0.0,
            blocks: 0,
        };
        return Ok(ReweightedFidelity {
            beta,
            delta_beta,
            fidelity: one,
            infidelity: ErrorEstimate { mean: 0.0, ..one },
            ess: n as f64,
            samples: n,
        });
    }
    let c_bar = crate::stats::mean(&series.bond_sum);
    let x: Vec<f64> = series.bond_sum.iter().map(|c| c - c_bar).collect();

    let mut ess = reweighting_ess(&x, 2.0 * delta_beta);
    if central {
        ess = ess.min(reweighting_ess(&x, -2.0 * delta_beta));
    }
    if ess < MIN_ESS_FRACTION * n as f64 {
        return Err(Error::ReweightingFailure {
            ess,
            n,
            min_fraction: MIN_ESS_FRACTION,
        });
    }

    let signs: &[f64] = if central { &[1.0, -1.0] } else { &[1.0] };
    let bm = BlockedMoments::new(n, block_count(n), 2 * signs.len(), |i| {
        signs
            .iter()
            .flat_map(|s| [(s * delta_beta * x[i]).exp_m1(), (2.0 * s * delta_beta * x[i]).exp_m1()])
            .collect()
    })?;
    // ln F per direction from the (expm1) moment pair
    let log_f = |m: &[f64], k: usize| m[2 * k].ln_1p() - 0.5 * m[2 * k + 1].ln_1p();
    let infid = |m: &[f64]| {
        let k = signs.len();
        (0..k).map(|j| -log_f(m, j).exp_m1()).sum::<f64>() / k as f64
    };
    let infidelity = bm.jackknife(infid);
    let fidelity = bm.jackknife(|m| 1.0 - infid(m));
    Ok(ReweightedFidelity {
        beta,
        delta_beta,
        fidelity,
        infidelity,
        ess,
        samples: n,
    })
}
