//! Cross-checks between the quantum engine (`kitaev`) and the classical
//! enumeration (`clock_exact`). Every check produces an [`IdentityReport`]
//! carrying both sides, the deviation and the tolerance it was held to.

use serde::Serialize;

use crate::clock_exact::{ClockModel, DensityOfStates};
use crate::error::Result;
use crate::kitaev::{Construction, KitaevState};
use crate::lattice::{Lattice, VertexId};
use crate::{temperature_from_beta, Caps};

pub const PARTITION_TOLERANCE: f64 = 1e-9;
pub const FIDELITY_TOLERANCE: f64 = 1e-10;
pub const CURVATURE_TOLERANCE: f64 = 1e-6;
pub const ROUTE_TOLERANCE: f64 = 1e-12;
pub const STRING_TOLERANCE: f64 = 1e-10;

/// Step sizes used for the curvature limit, each half the previous.
pub const CURVATURE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Minimum factor by which the extrapolated residual must drop per halving.
pub const RICHARDSON_MIN_SHRINK: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    Partition,
    Fidelity,
    Curvature,
    StringCorrelation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Absolute,
    Relative,
    /// `left / right` must be at least the tolerance.
    MinRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityParams {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub construction: Construction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: Identity,
    /// Which comparison within the identity this row holds, e.g. "value" or
    /// "ratio-constancy".
    pub check: String,
    pub params: IdentityParams,
    pub left: f64,
    pub right: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub measure: Measure,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
}

impl IdentityReport {
    fn new(
        identity: Identity,
        check: &str,
        params: IdentityParams,
        left: f64,
        right: f64,
        measure: Measure,
        tolerance: f64,
    ) -> Self {
        let abs_dev = (left - right).abs();
        let scale = left.abs().max(right.abs());
        let rel_dev = if abs_dev == 0.0 { 0.0 } else { abs_dev / scale };
        let pass = match measure {
            Measure::Absolute => abs_dev <= tolerance,
            Measure::Relative => rel_dev <= tolerance,
            Measure::MinRatio => left >= tolerance * right,
        };
        Self {
            identity,
            check: check.to_string(),
            params,
            left,
            right,
            abs_dev,
            rel_dev,
            measure,
            tolerance,
            pass,
            constant: None,
        }
    }

    fn with_constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }
}

/// Both exact engines for one `(d, L)`.
pub struct Engines {
    pub lattice: Lattice,
    pub quantum: KitaevState,
    pub clock: ClockModel,
    pub dos: DensityOfStates,
}

impl Engines {
    pub fn new(d: usize, l: usize, construction: Construction, caps: Caps) -> Result<Self> {
        let lattice = Lattice::new(l)?;
        Self::on_lattice(lattice, d, construction, caps)
    }

    pub fn on_lattice(lattice: Lattice, d: usize, construction: Construction, caps: Caps) -> Result<Self> {
        let clock = ClockModel::on_lattice(&lattice, d)?;
        let dos = clock.density_of_states(caps.enumeration)?;
        let quantum = match construction {
            Construction::VertexForm => KitaevState::vertex_form(&lattice, d, caps.memory)?,
            Construction::PlaquetteForm => KitaevState::plaquette_form(&lattice, d, caps.memory)?,
        };
        Ok(Self {
            lattice,
            quantum,
            clock,
            dos,
        })
    }

    fn params(&self) -> IdentityParams {
        IdentityParams {
            d: self.clock.d(),
            l: self.lattice.size(),
            t: None,
            beta: None,
            delta_beta: None,
            path: None,
            construction: self.quantum.construction(),
        }
    }

    /// `ln Z_clock` at the temperature matching quantum `β`.
    pub fn clock_log_z(&self, beta: f64) -> f64 {
        self.dos.log_z(temperature_from_beta(beta))
    }

    /// `ln F` from clock partition functions.
    pub fn clock_log_fidelity(&self, beta: f64, delta_beta: f64) -> f64 {
        self.dos.log_fidelity(temperature_from_beta(beta), delta_beta)
    }

    /// `Var(C)` of the clock bond sum at quantum `β`.
    pub fn bond_variance(&self, beta: f64) -> f64 {
        self.dos.thermo(temperature_from_beta(beta)).var_energy
    }

    /// Partition identity at each temperature plus a ratio-constancy row.
    pub fn partition_reports(&self, temps: &[f64]) -> Result<Vec<IdentityReport>> {
        let v = self.lattice.num_vertices();
        let d = self.clock.d() as f64;
        let ln_const = v as f64 * d.ln();
        let mut out = Vec::new();
        let mut log_ratios = Vec::new();
        for &t in temps {
            crate::clock_exact::check_temperature(t)?;
            let beta = crate::beta_from_temperature(t);
            let ln_clock = self.dos.log_z(t);
            let ln_quantum = self.quantum.log_norm_function(beta)?;
            log_ratios.push(ln_clock - ln_quantum);
            // compare in the log domain, report the linear values
            let rel = (ln_clock - ln_const - ln_quantum).exp_m1().abs();
            let mut r = IdentityReport::new(
                Identity::Partition,
                "value",
                IdentityParams {
                    t: Some(t),
                    beta: Some(beta),
                    ..self.params()
                },
                ln_clock.exp(),
                (ln_const + ln_quantum).exp(),
                Measure::Relative,
                PARTITION_TOLERANCE,
            )
            .with_constant((ln_clock - ln_quantum).exp());
            r.rel_dev = rel;
            r.pass = rel <= PARTITION_TOLERANCE;
            out.push(r);
        }
        if log_ratios.len() >= 2 {
            let hi = log_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = log_ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let mut r = IdentityReport::new(
                Identity::Partition,
                "ratio-constancy",
                self.params(),
                hi.exp(),
                lo.exp(),
                Measure::Relative,
                PARTITION_TOLERANCE,
            )
            .with_constant(lo.exp());
            r.rel_dev = (hi - lo).exp_m1();
            r.pass = r.rel_dev <= PARTITION_TOLERANCE;
            out.push(r);
        }
        Ok(out)
    }

    /// Quantum overlap of the normalized deformed states against the clock
    /// partition-function ratio.
    pub fn fidelity_report(&self, beta: f64, delta_beta: f64) -> Result<IdentityReport> {
        let left = self.quantum.fidelity_direct(beta, delta_beta)?;
        let right = self.clock_log_fidelity(beta, delta_beta).exp();
        Ok(IdentityReport::new(
            Identity::Fidelity,
            "value",
            IdentityParams {
                t: Some(temperature_from_beta(beta)),
                beta: Some(beta),
                delta_beta: Some(delta_beta),
                ..self.params()
            },
            left,
            right,
            Measure::Absolute,
            FIDELITY_TOLERANCE,
        ))
    }

    /// Central curvature quotient from the quantum norm function at each
    /// of [`CURVATURE_STEPS`]: the mean of `(1 - F)/δβ²` for the pair
    /// `(β, β + δβ)` and the pair `(β - δβ, β)`. The one-sided quotient has
    /// an O(δβ) error term; the average keeps only even powers.
    pub fn curvature_ratios(&self, beta: f64) -> Result<[f64; 3]> {
        let mut g = [0.0; 3];
        for (slot, &h) in g.iter_mut().zip(&CURVATURE_STEPS) {
            let fwd = self.quantum.infidelity_exact(beta, h)?;
            let bwd = self.quantum.infidelity_exact(beta - h, h)?;
            *slot = 0.5 * (fwd + bwd) / (h * h);
        }
        Ok(g)
    }

    /// Curvature identity. Rows: the extrapolated limit against `Var(C)/2`,
    /// the residual shrink of the Richardson sequence, and the agreement of
    /// the two algebraic routes `C_v/(8β²)` and `Var(C)/2`.
    pub fn curvature_reports(&self, beta: f64) -> Result<Vec<IdentityReport>> {
        let t = temperature_from_beta(beta);
        let thermo = self.dos.thermo(t);
        let target = thermo.var_energy / 2.0;
        let cv_route = thermo.heat_capacity / (8.0 * beta * beta);
        let g = self.curvature_ratios(beta)?;
        let rich = richardson(&g);
        let params = IdentityParams {
            t: Some(t),
            beta: Some(beta),
            delta_beta: Some(CURVATURE_STEPS[2]),
            ..self.params()
        };
        let res_coarse = (rich.first[0] - target).abs();
        let res_fine = (rich.first[1] - target).abs();
        Ok(vec![
            IdentityReport::new(
                Identity::Curvature,
                "limit",
                params.clone(),
                rich.second,
                target,
                Measure::Relative,
                CURVATURE_TOLERANCE,
            ),
            IdentityReport::new(
                Identity::Curvature,
                "richardson-shrink",
                params.clone(),
                res_coarse,
                res_fine,
                Measure::MinRatio,
                RICHARDSON_MIN_SHRINK,
            )
            .with_constant(if res_fine > 0.0 { res_coarse / res_fine } else { f64::INFINITY }),
            IdentityReport::new(
                Identity::Curvature,
                "route-agreement",
                params,
                cv_route,
                target,
                Measure::Relative,
                ROUTE_TOLERANCE,
            ),
        ])
    }

    /// String expectation along the axis path and the winding path for each
    /// pair, against the enumerated correlation.
    pub fn string_reports(&self, beta: f64, pairs: &[(VertexId, VertexId)], caps: Caps) -> Result<Vec<IdentityReport>> {
        let t = temperature_from_beta(beta);
        let mut out = Vec::new();
        for &(k, l) in pairs {
            let right = self.clock.pair_density_of_states(k, l, caps.enumeration)?.correlation(t);
            for path in [self.lattice.axis_path(k, l)?, self.lattice.winding_path(k, l)?] {
                let left = self.quantum.string_expectation(beta, &path)?;
                out.push(IdentityReport::new(
                    Identity::StringCorrelation,
                    "value",
                    IdentityParams {
                        t: Some(t),
                        beta: Some(beta),
                        path: Some(path.describe()),
                        ..self.params()
                    },
                    left,
                    right,
                    Measure::Absolute,
                    STRING_TOLERANCE,
                ));
            }
        }
        Ok(out)
    }
}

/// Richardson table for samples at `h, h/2, h/4` of a quantity whose
/// expansion holds only even powers of `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Richardson {
    /// First eliminations (of `h²`) from `(h, h/2)` and `(h/2, h/4)`.
    pub first: [f64; 2],
    /// Estimate from all three samples, free of `h²` and `h⁴`.
    pub second: f64,
}

pub fn richardson(g: &[f64; 3]) -> Richardson {
    let first = [(4.0 * g[1] - g[0]) / 3.0, (4.0 * g[2] - g[1]) / 3.0];
    Richardson {
        first,
        second: (16.0 * first[1] - first[0]) / 15.0,
    }
}

pub fn verify_partition_identity(
    d: usize,
    l: usize,
    temps: &[f64],
    construction: Construction,
    caps: Caps,
) -> Result<Vec<IdentityReport>> {
    Engines::new(d, l, construction, caps)?.partition_reports(temps)
}

pub fn verify_fidelity_identity(d: usize, l: usize, beta: f64, delta_beta: f64, caps: Caps) -> Result<IdentityReport> {
    Engines::new(d, l, Construction::VertexForm, caps)?.fidelity_report(beta, delta_beta)
}

pub fn verify_curvature_identity(d: usize, l: usize, beta: f64, caps: Caps) -> Result<Vec<IdentityReport>> {
    Engines::new(d, l, Construction::VertexForm, caps)?.curvature_reports(beta)
}

pub fn verify_string_correlation(
    d: usize,
    l: usize,
    beta: f64,
    pairs: &[(VertexId, VertexId)],
    caps: Caps,
) -> Result<Vec<IdentityReport>> {
    Engines::new(d, l, Construction::VertexForm, caps)?.string_reports(beta, pairs, caps)
}

/// All ordered pairs of distinct vertices.
pub fn all_pairs(lattice: &Lattice) -> Vec<(VertexId, VertexId)> {
    let v = lattice.num_vertices();
    (0..v)
        .flat_map(|k| (0..v).filter(move |&l| l != k).map(move |l| (k, l)))
        .collect()
}

/// The default identity suite for one `(d, L)`.
pub fn verify_suite(d: usize, l: usize, caps: Caps) -> Result<Vec<IdentityReport>> {
    let eng = Engines::new(d, l, Construction::VertexForm, caps)?;
    let mut out = eng.partition_reports(&[0.5, 1.0, 2.0])?;
    for (beta, db) in [(0.6, 0.0), (0.6, 0.01), (0.4, 0.02)] {
        out.push(eng.fidelity_report(beta, db)?);
    }
    out.extend(eng.curvature_reports(0.5)?);
    let pairs = all_pairs(&eng.lattice);
    for beta in [0.0, 0.7] {
        out.extend(eng.string_reports(beta, &pairs, caps)?);
    }
    Ok(out)
}
