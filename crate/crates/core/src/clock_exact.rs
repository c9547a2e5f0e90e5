//! Exhaustive enumeration of the d-state clock model on the L×L torus.
//!
//! Spins live on vertices, bonds are the lattice edges, so at `L = 2` each
//! neighbouring pair is coupled twice (matching the edge multigraph of the
//! quantum side; results at `L = 2` are not comparable with large-L clock
//! literature).
//!
//! Configurations are walked in reflected mixed-radix Gray-code order, one
//! spin changing by ±1 per step. The walk only tracks how many bonds sit in
//! each angle class `min(r, d - r)`, so the output is an exact integer
//! density of states from which every temperature is evaluated afterwards.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, VertexId};
use crate::qudit::checked_dim;
use crate::stats::{log_fidelity_centered, log_sum_exp, NeumaierSum};

/// Default bound on the number of enumerated configurations.
pub const DEFAULT_ENUM_CAP: u128 = 1 << 28;

/// Bound on the dense class-count table.
const TABLE_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    d: usize,
    n: Vec<u8>,
}

impl SpinConfig {
    pub fn new(d: usize, values: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|&&v| v as usize >= d) {
            return Err(Error::Domain(format!("spin value {bad} out of range for d={d}")));
        }
        Ok(Self { d, n: values })
    }

    pub fn uniform(d: usize, sites: usize, value: u8) -> Result<Self> {
        Self::new(d, vec![value; sites])
    }

    pub fn values(&self) -> &[u8] {
        &self.n
    }

    pub fn values_mut(&mut self) -> &mut [u8] {
        &mut self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `θ_i = 2π n_i / d`.
    pub fn angle(&self, i: usize) -> f64 {
        2.0 * PI * self.n[i] as f64 / self.d as f64
    }
}

#[derive(Debug, Clone)]
pub struct ClockModel {
    lattice: Lattice,
    d: usize,
    /// cos(2π r / d) for r in 0..d
    cos: Vec<f64>,
    /// For each vertex, its four bonds as (neighbour, edge).
    incident: Vec<[(VertexId, usize); 4]>,
}

impl ClockModel {
    pub fn new(l: usize, d: usize) -> Result<Self> {
        Self::on_lattice(&Lattice::new(l)?, d)
    }

    pub fn on_lattice(lattice: &Lattice, d: usize) -> Result<Self> {
        if !(2..=255).contains(&d) {
            return Err(Error::Domain(format!("clock states d={d}: need 2 <= d <= 255")));
        }
        // folded so that cos[r] == cos[d - r] bit for bit
        let cos = (0..d)
            .map(|r| (2.0 * PI * r.min(d - r) as f64 / d as f64).cos())
            .collect();
        let incident = lattice
            .stars()
            .iter()
            .enumerate()
            .map(|(v, star)| {
                star.map(|s| {
                    let e = lattice.edges()[s.edge];
                    (if e.tail == v { e.head } else { e.tail }, s.edge)
                })
            })
            .collect();
        Ok(Self {
            lattice: lattice.clone(),
            d,
            cos,
            incident,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.num_vertices()
    }

    pub fn num_bonds(&self) -> usize {
        self.lattice.num_edges()
    }

    pub fn cos_table(&self) -> &[f64] {
        &self.cos
    }

    /// For each vertex, its four bonds as (neighbour vertex, edge id).
    pub fn incident(&self) -> &[[(VertexId, usize); 4]] {
        &self.incident
    }

    fn check_config(&self, cfg: &SpinConfig) -> Result<()> {
        if cfg.d != self.d || cfg.n.len() != self.num_sites() {
            return Err(Error::Domain(format!(
                "config (d={}, sites={}) does not match model (d={}, sites={})",
                cfg.d,
                cfg.n.len(),
                self.d,
                self.num_sites()
            )));
        }
        Ok(())
    }

    /// `C = Σ_bonds cos(θ_i - θ_j)`.
    pub fn bond_sum(&self, cfg: &SpinConfig) -> Result<f64> {
        self.check_config(cfg)?;
        let d = self.d;
        Ok(self
            .lattice
            .edges()
            .iter()
            .map(|e| self.cos[(cfg.n[e.tail] as usize + d - cfg.n[e.head] as usize) % d])
            .sum())
    }

    /// `E = -Σ_bonds cos(θ_i - θ_j)`.
    pub fn energy(&self, cfg: &SpinConfig) -> Result<f64> {
        Ok(-self.bond_sum(cfg)?)
    }

    fn num_classes(&self) -> usize {
        self.d / 2 + 1
    }

    fn class_of(&self, r: usize) -> usize {
        r.min(self.d - r)
    }

    fn table_shape(&self) -> Result<(usize, usize)> {
        let base = self.num_bonds() + 1;
        let k = self.num_classes() - 1;
        let mut size: usize = 1;
        for _ in 0..k {
            size = size.checked_mul(base).filter(|&s| s <= TABLE_LIMIT).ok_or(Error::CapExceeded {
                what: "class-count table",
                needed: (base as u128).saturating_pow(k as u32),
                cap: TABLE_LIMIT as u128,
            })?;
        }
        Ok((base, size))
    }

    /// Walk every configuration with `fixed` sites pinned, counting class
    /// occupation vectors. When `pair` is set the count is split by the
    /// residue `(n_k - n_l) mod d`.
    fn walk(&self, pinned: Option<(usize, u8)>, pair: Option<(usize, usize)>, base: usize, size: usize) -> Vec<Vec<u64>> {
        let d = self.d;
        let v = self.num_sites();
        let mut spins = vec![0u8; v];
        let free: Vec<usize> = match pinned {
            Some((site, value)) => {
                spins[site] = value;
                (0..v).filter(|&s| s != site).collect()
            }
            None => (0..v).collect(),
        };
        let weights: Vec<usize> = (0..self.num_classes())
            .map(|k| if k == 0 { 0 } else { base.pow(k as u32 - 1) })
            .collect();

        let mut key = 0usize;
        for e in self.lattice.edges() {
            let r = (spins[e.tail] as usize + d - spins[e.head] as usize) % d;
            key += weights[self.class_of(r)];
        }
        let residue = |s: &[u8]| pair.map_or(0, |(k, l)| (s[k] as usize + d - s[l] as usize) % d);
        let slots = if pair.is_some() { d } else { 1 };
        let mut tables = vec![vec![0u64; size]; slots];

        // Knuth's loopless reflected mixed-radix Gray code (Algorithm H).
        let m = free.len();
        let mut focus: Vec<usize> = (0..=m).collect();
        let mut dir = vec![1i32; m];
        loop {
            tables[residue(&spins)][key] += 1;
            let j = focus[0];
            focus[0] = 0;
            if j == m {
                break;
            }
            let site = free[j];
            let old = spins[site] as usize;
            let new = (old as i32 + dir[j]) as usize;
            for &(nb, _) in &self.incident[site] {
                let s = spins[nb] as usize;
                key -= weights[self.class_of((old + d - s) % d)];
                key += weights[self.class_of((new + d - s) % d)];
            }
            spins[site] = new as u8;
            if new == 0 || new == d - 1 {
                dir[j] = -dir[j];
                focus[j] = focus[j + 1];
                focus[j + 1] = j + 1;
            }
        }
        tables
    }

    fn check_enum_cap(&self, cap: u128) -> Result<()> {
        checked_dim(self.d, self.num_sites(), cap).map(|_| ()).map_err(|_| Error::CapExceeded {
            what: "clock configurations",
            needed: (self.d as u128).saturating_pow(self.num_sites() as u32),
            cap,
        })
    }

    fn levels(&self, table: &[u64], base: usize, scale: u64) -> Vec<Level> {
        let k = self.num_classes() - 1;
        let bonds = self.num_bonds();
        table
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(idx, &c)| {
                let mut rest = idx;
                let mut counts = vec![0usize; k + 1];
                for slot in counts.iter_mut().skip(1) {
                    *slot = rest % base;
                    rest /= base;
                }
                counts[0] = bonds - counts[1..].iter().sum::<usize>();
                let mut sum = NeumaierSum::default();
                for (class, &n) in counts.iter().enumerate() {
                    sum.add(n as f64 * self.cos[class]);
                }
                Level {
                    bond_sum: sum.value(),
                    multiplicity: c * scale,
                }
            })
            .collect()
    }

    /// Exact density of states over the full configuration space. The last
    /// spin's value partitions the work; counts are integers so the merge is
    /// order independent.
    pub fn density_of_states(&self, cap: u128) -> Result<DensityOfStates> {
        self.check_enum_cap(cap)?;
        let (base, size) = self.table_shape()?;
        let last = self.num_sites() - 1;
        let parts: Vec<Vec<u64>> = (0..self.d as u8)
            .into_par_iter()
            .map(|t| self.walk(Some((last, t)), None, base, size).swap_remove(0))
            .collect();
        let mut total = vec![0u64; size];
        for p in &parts {
            for (a, b) in total.iter_mut().zip(p) {
                *a += b;
            }
        }
        Ok(DensityOfStates {
            levels: self.levels(&total, base, 1),
            sites: self.num_sites(),
        })
    }

    /// Same result via the global Z_d symmetry: pin one spin and scale by d.
    pub fn density_of_states_quotient(&self, cap: u128) -> Result<DensityOfStates> {
        self.check_enum_cap(cap)?;
        let (base, size) = self.table_shape()?;
        let table = self.walk(Some((self.num_sites() - 1, 0)), None, base, size).swap_remove(0);
        Ok(DensityOfStates {
            levels: self.levels(&table, base, self.d as u64),
            sites: self.num_sites(),
        })
    }

    /// Density of states split by the residue `(n_k - n_l) mod d`.
    pub fn pair_density_of_states(&self, k: VertexId, l: VertexId, cap: u128) -> Result<PairDensity> {
        self.check_enum_cap(cap)?;
        let v = self.num_sites();
        for x in [k, l] {
            if x >= v {
                return Err(Error::Index {
                    kind: "vertex",
                    index: x,
                    len: v,
                });
            }
        }
        if k == l {
            return Err(Error::DegeneratePath(k));
        }
        let (base, size) = self.table_shape()?;
        let last = v - 1;
        let parts: Vec<Vec<Vec<u64>>> = (0..self.d as u8)
            .into_par_iter()
            .map(|t| self.walk(Some((last, t)), Some((k, l)), base, size))
            .collect();
        let mut totals = vec![vec![0u64; size]; self.d];
        for p in &parts {
            for (tot, part) in totals.iter_mut().zip(p) {
                for (a, b) in tot.iter_mut().zip(part) {
                    *a += b;
                }
            }
        }
        Ok(PairDensity {
            by_residue: totals
                .iter()
                .map(|t| DensityOfStates {
                    levels: self.levels(t, base, 1),
                    sites: v,
                })
                .collect(),
            cos: self.cos.clone(),
        })
    }

    pub fn enumerate_thermo(&self, t: f64, cap: u128) -> Result<ExactThermo> {
        check_temperature(t)?;
        Ok(self.density_of_states(cap)?.thermo(t))
    }

    /// `Re ⟨exp{i(θ_k - θ_l)}⟩` at temperature `t`.
    pub fn exact_correlation(&self, t: f64, k: VertexId, l: VertexId, cap: u128) -> Result<f64> {
        check_temperature(t)?;
        Ok(self.pair_density_of_states(k, l, cap)?.correlation(t))
    }

    /// `Z(T1) / Z(T2)`.
    pub fn enumerate_partition_ratio(&self, t1: f64, t2: f64, cap: u128) -> Result<f64> {
        check_temperature(t1)?;
        check_temperature(t2)?;
        let dos = self.density_of_states(cap)?;
        Ok((dos.log_z(t1) - dos.log_z(t2)).exp())
    }
}

pub fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("temperature must be > 0, got {t}")))
    }
}

/// Configurations sharing one bond-class occupation vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    /// `C = Σ_bonds cos(θ_i - θ_j)` for these configurations (`E = -C`).
    pub bond_sum: f64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOfStates {
    levels: Vec<Level>,
    sites: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactThermo {
    pub t: f64,
    pub log_z: f64,
    pub mean_energy: f64,
    pub mean_energy_sq: f64,
    pub var_energy: f64,
    /// `Var(E) / T²`, total (not per site).
    pub heat_capacity: f64,
}

impl DensityOfStates {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn total_configurations(&self) -> u64 {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    fn log_weights(&self, t: f64) -> Vec<f64> {
        let inv_t = 1.0 / t;
        self.levels
            .iter()
            .map(|l| (l.multiplicity as f64).ln() + l.bond_sum * inv_t)
            .collect()
    }

    pub fn log_z(&self, t: f64) -> f64 {
        log_sum_exp(self.log_weights(t))
    }

    /// Exact `⟨f(C)⟩` at temperature `t`.
    pub fn average<F: Fn(f64) -> f64>(&self, t: f64, f: F) -> f64 {
        let lw = self.log_weights(t);
        let lz = log_sum_exp(lw.iter().copied());
        let mut s = NeumaierSum::default();
        for (l, w) in self.levels.iter().zip(&lw) {
            s.add((w - lz).exp() * f(l.bond_sum));
        }
        s.value()
    }

    pub fn thermo(&self, t: f64) -> ExactThermo {
        let mean_c = self.average(t, |c| c);
        let var = self.average(t, |c| (c - mean_c) * (c - mean_c)).max(0.0);
        let mean_sq = self.average(t, |c| c * c);
        ExactThermo {
            t,
            log_z: self.log_z(t),
            mean_energy: -mean_c,
            mean_energy_sq: mean_sq,
            var_energy: var,
            heat_capacity: var / (t * t),
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `ln [Z(b + δ/2) / sqrt(Z(b) Z(b + δ))]` where `b` is the quantum
    /// deformation strength matching temperature `t` and `δ` is in the same
    /// units (so the clock inverse temperature moves by `2δ`).
    pub fn log_fidelity(&self, t: f64, delta_beta: f64) -> f64 {
        let log_w = self.log_weights(t);
        let c: Vec<f64> = self.levels.iter().map(|l| l.bond_sum).collect();
        log_fidelity_centered(&log_w, &c, delta_beta)
    }
}

/// Densities of states keyed by the residue `(n_k - n_l) mod d`.
#[derive(Debug, Clone)]
pub struct PairDensity {
    by_residue: Vec<DensityOfStates>,
    cos: Vec<f64>,
}

impl PairDensity {
    pub fn correlation(&self, t: f64) -> f64 {
        let logs: Vec<f64> = self.by_residue.iter().map(|d| d.log_z(t)).collect();
        let lz = log_sum_exp(logs.iter().copied().filter(|x| x.is_finite()));
        let mut s = NeumaierSum::default();
        for (r, lr) in logs.iter().enumerate() {
            if lr.is_finite() {
                s.add(self.cos[r] * (lr - lz).exp());
            }
        }
        s.value()
    }
}
