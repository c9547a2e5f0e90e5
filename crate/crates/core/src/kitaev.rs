//! The Z_d toric-code (Kitaev) state, its diagonal deformation, and the
//! quantities built on it: the norm function, ground-state fidelity, string
//! expectations, and small exact checks of the toric Hamiltonian.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, OrientedPath};
use crate::qudit::{checked_dim, digit_cos_sums, DenseState, QuditParams};
use crate::stats::{log_fidelity_centered, log_sum_exp};

/// Largest Hilbert-space dimension for which dense diagonalization is done.
pub const DENSE_SOLVE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    /// `∏_v (1 + A_v + … + A_v^{d-1}) |0…0⟩`: the zero-holonomy sector.
    VertexForm,
    /// `∏_p (1 + B_p + … + B_p^{d-1}) |+…+⟩`: all holonomy sectors.
    PlaquetteForm,
}

#[derive(Debug, Clone)]
pub struct KitaevState {
    lattice: Lattice,
    params: QuditParams,
    construction: Construction,
    state: DenseState,
    cos_sums: Vec<f64>,
}

/// Per-index edge digits `n_e = m_tail - m_head (mod d)` for a vertex labeling.
fn gradient_index(lat: &Lattice, d: usize, labels: &[usize]) -> usize {
    let mut idx = 0usize;
    for e in lat.edges().iter().rev() {
        let n_e = (labels[e.tail] + d - labels[e.head]) % d;
        idx = idx * d + n_e;
    }
    idx
}

impl KitaevState {
    /// Vertex-form state: uniform superposition of all gradient edge
    /// configurations, accumulated over every vertex labeling.
    pub fn vertex_form(lattice: &Lattice, d: usize, cap: u128) -> Result<Self> {
        let params = QuditParams::new(d)?;
        let n = lattice.num_edges();
        let v = lattice.num_vertices();
        let mut state = DenseState::zeros(d, n, cap)?;
        let labelings = checked_dim(d, v, cap)?;
        let mut labels = vec![0usize; v];
        let amps = state.amplitudes_mut();
        for _ in 0..labelings {
            amps[gradient_index(lattice, d, &labels)] += Complex64::new(1.0, 0.0);
            for l in labels.iter_mut() {
                *l += 1;
                if *l == d {
                    *l = 0;
                } else {
                    break;
                }
            }
        }
        state.normalize()?;
        Ok(Self::wrap(lattice, params, Construction::VertexForm, state))
    }

    /// Plaquette-form state: uniform superposition of every edge
    /// configuration with zero flux through each plaquette.
    pub fn plaquette_form(lattice: &Lattice, d: usize, cap: u128) -> Result<Self> {
        let params = QuditParams::new(d)?;
        let n = lattice.num_edges();
        let mut state = DenseState::zeros(d, n, cap)?;
        let mut digits = vec![0usize; n];
        let one = Complex64::new(1.0, 0.0);
        for a in state.amplitudes_mut().iter_mut() {
            let flat = lattice.plaquettes().iter().all(|p| {
                let flux: i64 = p.iter().map(|s| s.sign as i64 * digits[s.edge] as i64).sum();
                flux.rem_euclid(d as i64) == 0
            });
            if flat {
                *a = one;
            }
            for q in digits.iter_mut() {
                *q += 1;
                if *q == d {
                    *q = 0;
                } else {
                    break;
                }
            }
        }
        state.normalize()?;
        Ok(Self::wrap(lattice, params, Construction::PlaquetteForm, state))
    }

    fn wrap(lattice: &Lattice, params: QuditParams, construction: Construction, state: DenseState) -> Self {
        let cos_sums = digit_cos_sums(params.d(), lattice.num_edges());
        Self {
            lattice: lattice.clone(),
            params,
            construction,
            state,
            cos_sums,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn params(&self) -> QuditParams {
        self.params
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn state(&self) -> &DenseState {
        &self.state
    }

    /// Number of basis states with non-zero amplitude.
    pub fn support_size(&self) -> usize {
        self.state
            .amplitudes()
            .iter()
            .filter(|a| a.norm_sqr() > 0.0)
            .count()
    }

    /// Largest deviation `max |B_p ψ - ψ|`, `max |A_v ψ - ψ|` over all
    /// plaquettes and vertices.
    pub fn stabilizer_deviation(&self) -> Result<StabilizerCheck> {
        let mut plaquette: f64 = 0.0;
        for p in 0..self.lattice.num_plaquettes() {
            let moved = apply_plaquette(&self.lattice, &self.state, p, 1)?;
            plaquette = plaquette.max(moved.max_abs_diff(&self.state)?);
        }
        let mut vertex: f64 = 0.0;
        for v in 0..self.lattice.num_vertices() {
            let moved = apply_vertex(&self.lattice, &self.state, v, 1)?;
            vertex = vertex.max(moved.max_abs_diff(&self.state)?);
        }
        Ok(StabilizerCheck { plaquette, vertex })
    }

    /// The normalized deformed state `|K(β)⟩ ∝ exp{(β/2) Σ_e (Z_e + Z_e^{-1})} |K⟩`.
    pub fn deformed_state(&self, beta: f64) -> Result<DenseState> {
        check_finite("beta", beta)?;
        // amplitudes scale by exp{β S_i}; shift by the largest exponent
        let shift = self
            .cos_sums
            .iter()
            .map(|s| beta * s)
            .fold(f64::NEG_INFINITY, f64::max);
        let amps = self
            .state
            .amplitudes()
            .iter()
            .zip(&self.cos_sums)
            .map(|(a, s)| a * (beta * s - shift).exp())
            .collect();
        let mut out = DenseState::from_amplitudes(self.params.d(), self.lattice.num_edges(), amps)?;
        out.normalize()?;
        Ok(out)
    }

    /// `ln Z(β)` with `Z(β) = ⟨K| exp{β Σ_e (Z_e + Z_e^{-1})} |K⟩`, always
    /// accumulated in the log domain.
    pub fn log_norm_function(&self, beta: f64) -> Result<f64> {
        check_finite("beta", beta)?;
        let terms = self
            .state
            .amplitudes()
            .iter()
            .zip(&self.cos_sums)
            .filter(|(a, _)| a.norm_sqr() > 0.0)
            .map(|(a, s)| a.norm_sqr().ln() + 2.0 * beta * s);
        Ok(log_sum_exp(terms))
    }

    pub fn norm_function(&self, beta: f64) -> Result<f64> {
        Ok(self.log_norm_function(beta)?.exp())
    }

    /// `ln F` from the ratio `Z(β + δβ/2) / sqrt(Z(β) Z(β + δβ))`.
    pub fn log_fidelity(&self, beta: f64, delta_beta: f64) -> Result<f64> {
        check_finite("beta", beta)?;
        check_finite("delta_beta", delta_beta)?;
        if delta_beta < 0.0 {
            return Err(Error::Domain(format!("delta_beta must be >= 0, got {delta_beta}")));
        }
        let (log_w, sums): (Vec<f64>, Vec<f64>) = self
            .state
            .amplitudes()
            .iter()
            .zip(&self.cos_sums)
            .filter(|(a, _)| a.norm_sqr() > 0.0)
            .map(|(a, s)| (a.norm_sqr().ln() + 2.0 * beta * s, *s))
            .unzip();
        Ok(log_fidelity_centered(&log_w, &sums, delta_beta))
    }

    /// Ground-state fidelity via the norm-function ratio.
    pub fn fidelity_exact(&self, beta: f64, delta_beta: f64) -> Result<f64> {
        Ok(self.log_fidelity(beta, delta_beta)?.exp())
    }

    /// `1 - F`, without cancellation for small `δβ`.
    pub fn infidelity_exact(&self, beta: f64, delta_beta: f64) -> Result<f64> {
        Ok(-self.log_fidelity(beta, delta_beta)?.exp_m1())
    }

    /// `⟨K(β)|K(β + δβ)⟩` from the two normalized states directly.
    pub fn fidelity_direct(&self, beta: f64, delta_beta: f64) -> Result<f64> {
        let a = self.deformed_state(beta)?;
        let b = self.deformed_state(beta + delta_beta)?;
        Ok(a.inner(&b)?.re)
    }

    /// `⟨K(β)| ½ (∏ Z_e^{τ_e} + ∏ Z_e^{-τ_e}) |K(β)⟩` along `path`.
    pub fn string_expectation(&self, beta: f64, path: &OrientedPath) -> Result<f64> {
        let psi = self.deformed_state(beta)?;
        let n = self.lattice.num_edges();
        let mut fwd = psi.clone();
        let mut bwd = psi.clone();
        for s in path.steps() {
            if s.edge >= n {
                return Err(Error::Index {
                    kind: "edge",
                    index: s.edge,
                    len: n,
                });
            }
            fwd.apply_z_mut(s.edge, s.tau as i64)?;
            bwd.apply_z_mut(s.edge, -s.tau as i64)?;
        }
        let v = 0.5 * (psi.inner(&fwd)? + psi.inner(&bwd)?);
        Ok(v.re)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilizerCheck {
    pub plaquette: f64,
    pub vertex: f64,
}

impl StabilizerCheck {
    pub fn max(&self) -> f64 {
        self.plaquette.max(self.vertex)
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}

/// `B_p^power ψ` with `B_p = ∏_{e∈∂p} Z_e^{σ_e}`.
pub fn apply_plaquette(lat: &Lattice, psi: &DenseState, p: usize, power: i64) -> Result<DenseState> {
    let mut out = psi.clone();
    for s in lat.plaquette_signs(p)? {
        out.apply_z_mut(s.edge, s.sign as i64 * power)?;
    }
    Ok(out)
}

/// `A_v^power ψ` with `A_v = ∏_{e∋v} X_e^{γ_e}`.
pub fn apply_vertex(lat: &Lattice, psi: &DenseState, v: usize, power: i64) -> Result<DenseState> {
    let mut out = psi.clone();
    for s in lat.vertex_signs(v)? {
        out.apply_x_mut(s.edge, s.sign as i64 * power)?;
    }
    Ok(out)
}

/// Matrix-free toric Hamiltonian
/// `H_0 = -Σ_p (B_p + B_p^{-1}) - Σ_v (A_v + A_v^{-1})`.
#[derive(Debug, Clone)]
pub struct ToricHamiltonian {
    lattice: Lattice,
    d: usize,
    dim: usize,
}

impl ToricHamiltonian {
    pub fn new(lattice: &Lattice, d: usize, cap: u128) -> Result<Self> {
        QuditParams::new(d)?;
        let dim = checked_dim(d, lattice.num_edges(), cap)?;
        Ok(Self {
            lattice: lattice.clone(),
            d,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lowest energy allowed by the stabilizer structure, `-2(P + V)`.
    pub fn stabilizer_ground_energy(&self) -> f64 {
        -2.0 * (self.lattice.num_plaquettes() + self.lattice.num_vertices()) as f64
    }

    pub fn apply(&self, psi: &DenseState) -> Result<DenseState> {
        if psi.d() != self.d || psi.num_qudits() != self.lattice.num_edges() {
            return Err(Error::Domain("state shape does not match Hamiltonian".into()));
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut add = |s: &DenseState| {
            for (a, b) in acc.iter_mut().zip(s.amplitudes()) {
                *a -= b;
            }
        };
        for p in 0..self.lattice.num_plaquettes() {
            add(&apply_plaquette(&self.lattice, psi, p, 1)?);
            add(&apply_plaquette(&self.lattice, psi, p, -1)?);
        }
        for v in 0..self.lattice.num_vertices() {
            add(&apply_vertex(&self.lattice, psi, v, 1)?);
            add(&apply_vertex(&self.lattice, psi, v, -1)?);
        }
        DenseState::from_amplitudes(self.d, self.lattice.num_edges(), acc)
    }

    fn check_dense_scope(&self) -> Result<()> {
        if self.dim > DENSE_SOLVE_LIMIT {
            return Err(Error::ScopeExceeded(format!(
                "dense solve needs dimension <= {DENSE_SOLVE_LIMIT}, have {} (d={}, L={})",
                self.dim,
                self.d,
                self.lattice.size()
            )));
        }
        Ok(())
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.check_dense_scope()?;
        let n = self.lattice.num_edges();
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let mut e = DenseState::zeros(self.d, n, u128::MAX)?;
            e.amplitudes_mut()[j] = Complex64::new(1.0, 0.0);
            let col = self.apply(&e)?;
            for (i, a) in col.amplitudes().iter().enumerate() {
                m[(i, j)] = *a;
            }
        }
        Ok(m)
    }

    /// Full eigendecomposition, eigenvalues ascending.
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let h = self.dense_matrix()?;
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim, self.dim, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub d: usize,
    pub l: usize,
    pub beta: f64,
    pub ground_energy: f64,
    pub ground_degeneracy: usize,
    /// Largest `‖H_β (Dψ) - E (Dψ)‖ / ‖Dψ‖` over all eigenvectors of `H_0`.
    pub max_eigen_residual: f64,
    /// Largest distance between sorted spectra of `H_β` and `H_0`.
    pub spectrum_max_dev: f64,
    pub spectrum_max_imag: f64,
    /// `‖H_β K(β) - E_0 K(β)‖` for the normalized deformed vertex-form state.
    pub kitaev_ground_residual: f64,
    pub pass: bool,
}

/// Check that `H_β = D H_0 D^{-1}` with `D = exp{(β/2) Σ (Z + Z^{-1})}`
/// keeps the spectrum of `H_0` and has `D ψ` as eigenvectors.
pub fn verify_hbeta_similarity(lattice: &Lattice, d: usize, beta: f64) -> Result<SimilarityReport> {
    check_finite("beta", beta)?;
    let h0 = ToricHamiltonian::new(lattice, d, DENSE_SOLVE_LIMIT as u128)
        .map_err(|_| Error::ScopeExceeded(format!("similarity check limited to dimension <= {DENSE_SOLVE_LIMIT}")))?;
    let (values, vectors) = h0.eigen()?;
    let dim = h0.dim();
    let n = lattice.num_edges();
    let diag: Vec<f64> = digit_cos_sums(d, n).iter().map(|s| (beta * s).exp()).collect();

    let ground = values[0];
    let degeneracy = values.iter().filter(|&&e| (e - ground).abs() < 1e-8).count();

    let h = h0.dense_matrix()?;
    let hb = DMatrix::from_fn(dim, dim, |i, j| h[(i, j)] * (diag[i] / diag[j]));

    let mut max_res: f64 = 0.0;
    for (k, &e) in values.iter().enumerate() {
        let dpsi: nalgebra::DVector<Complex64> =
            nalgebra::DVector::from_fn(dim, |i, _| vectors[(i, k)] * diag[i]);
        let r = &hb * &dpsi - &dpsi * Complex64::new(e, 0.0);
        max_res = max_res.max(r.norm() / dpsi.norm());
    }

    let (_, t) = hb.clone().schur().unpack();
    let mut spec: Vec<Complex64> = (0..dim).map(|i| t[(i, i)]).collect();
    spec.sort_by(|a, b| a.re.total_cmp(&b.re));
    let spectrum_max_dev = spec
        .iter()
        .zip(&values)
        .map(|(a, b)| (a.re - b).abs())
        .fold(0.0, f64::max);
    let spectrum_max_imag = spec.iter().map(|a| a.im.abs()).fold(0.0, f64::max);

    let k = KitaevState::vertex_form(lattice, d, DENSE_SOLVE_LIMIT as u128)?;
    let kb = k.deformed_state(beta)?;
    let kv = nalgebra::DVector::from_column_slice(kb.amplitudes());
    let kitaev_ground_residual = (&hb * &kv - &kv * Complex64::new(ground, 0.0)).norm();

    let pass = max_res <= 1e-8
        && spectrum_max_dev <= 1e-6
        && spectrum_max_imag <= 1e-6
        && kitaev_ground_residual <= 1e-8;
    Ok(SimilarityReport {
        d,
        l: lattice.size(),
        beta,
        ground_energy: ground,
        ground_degeneracy: degeneracy,
        max_eigen_residual: max_res,
        spectrum_max_dev,
        spectrum_max_imag,
        kitaev_ground_residual,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::DEFAULT_MEMORY_CAP;

    fn lat2() -> Lattice {
        Lattice::new(2).unwrap()
    }

    #[test]
    fn vertex_form_support_sizes() {
        let k = KitaevState::vertex_form(&lat2(), 2, DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(k.support_size(), 8);
        let amp = 1.0 / 8f64.sqrt();
        for a in k.state().amplitudes().iter().filter(|a| a.norm() > 0.0) {
            assert!((a.re - amp).abs() < 1e-14);
        }
        let k3 = KitaevState::vertex_form(&lat2(), 3, DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(k3.support_size(), 27);
    }

    #[test]
    fn plaquette_form_support_and_overlap() {
        let p = KitaevState::plaquette_form(&lat2(), 2, DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(p.support_size(), 32);
        for d in [2usize, 3] {
            let v = KitaevState::vertex_form(&lat2(), d, DEFAULT_MEMORY_CAP).unwrap();
            let p = KitaevState::plaquette_form(&lat2(), d, DEFAULT_MEMORY_CAP).unwrap();
            let ov = v.state().inner(p.state()).unwrap().norm_sqr();
            assert!((ov - 1.0 / (d * d) as f64).abs() < 1e-12, "d={d} overlap {ov}");
        }
    }

    #[test]
    fn both_forms_are_stabilized() {
        for d in [2, 3] {
            for k in [
                KitaevState::vertex_form(&lat2(), d, DEFAULT_MEMORY_CAP).unwrap(),
                KitaevState::plaquette_form(&lat2(), d, DEFAULT_MEMORY_CAP).unwrap(),
            ] {
                assert!(k.stabilizer_deviation().unwrap().max() < 1e-10);
            }
        }
    }

    #[test]
    fn memory_cap_is_enforced() {
        assert!(matches!(
            KitaevState::vertex_form(&lat2(), 3, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn deformed_state_limits() {
        let k = KitaevState::vertex_form(&lat2(), 2, DEFAULT_MEMORY_CAP).unwrap();
        let s0 = k.deformed_state(0.0).unwrap();
        assert!(s0.max_abs_diff(k.state()).unwrap() < 1e-14);
        let s = k.deformed_state(20.0).unwrap();
        let f = s.amplitudes()[0].norm_sqr();
        assert!(f >= 1.0 - 1e-6, "fidelity with |0…0⟩ = {f}");
        assert!(k.deformed_state(f64::NAN).is_err());
    }

    #[test]
    fn deformed_amplitudes_are_square_root_boltzmann_weights() {
        let d = 3;
        let k = KitaevState::vertex_form(&lat2(), d, DEFAULT_MEMORY_CAP).unwrap();
        let beta = 0.4;
        let s = k.deformed_state(beta).unwrap();
        let sums = digit_cos_sums(d, 8);
        let support: Vec<usize> = (0..s.dim()).filter(|&i| k.state().amplitudes()[i].norm() > 0.0).collect();
        let r0 = s.amplitudes()[support[0]].re / (beta * sums[support[0]]).exp();
        for &i in &support {
            let r = s.amplitudes()[i].re / (beta * sums[i]).exp();
            assert!((r - r0).abs() < 1e-12 * r0);
        }
    }

    #[test]
    fn norm_function_properties() {
        let k = KitaevState::vertex_form(&lat2(), 2, DEFAULT_MEMORY_CAP).unwrap();
        assert!((k.norm_function(0.0).unwrap() - 1.0).abs() < 1e-14);
        let grid: Vec<f64> = (0..60).map(|i| i as f64 * 0.1).collect();
        let logs: Vec<f64> = grid.iter().map(|&b| k.log_norm_function(b).unwrap()).collect();
        for w in logs.windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in logs.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-9);
        }
        // no overflow deep in the ordered regime
        assert!(k.log_norm_function(400.0).unwrap().is_finite());
    }

    #[test]
    fn fidelity_matches_direct_overlap() {
        let k = KitaevState::vertex_form(&lat2(), 3, DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(k.fidelity_exact(0.5, 0.0).unwrap(), 1.0);
        let a = k.fidelity_exact(0.5, 1e-2).unwrap();
        let b = k.fidelity_direct(0.5, 1e-2).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!(a <= 1.0);
        assert!(k.fidelity_exact(0.5, -1e-2).is_err());
    }

    #[test]
    fn string_expectation_basic_cases() {
        let lat = Lattice::new(2).unwrap();
        let k = KitaevState::vertex_form(&lat, 3, DEFAULT_MEMORY_CAP).unwrap();
        let open = lat.axis_path(0, 3).unwrap();
        assert!(k.string_expectation(0.0, &open).unwrap().abs() < 1e-12);
        // a closed contractible loop around plaquette 0
        use crate::lattice::{Axis, Move};
        let loop_moves = [
            Move { axis: Axis::Horizontal, step: 1 },
            Move { axis: Axis::Vertical, step: 1 },
            Move { axis: Axis::Horizontal, step: -1 },
            Move { axis: Axis::Vertical, step: -1 },
        ];
        let closed = lat.path_from_moves(0, &loop_moves).unwrap();
        assert!(closed.is_closed());
        for beta in [0.0, 0.3, 1.1] {
            assert!((k.string_expectation(beta, &closed).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn toric_hamiltonian_ground_space() {
        let lat = lat2();
        let h = ToricHamiltonian::new(&lat, 2, DEFAULT_MEMORY_CAP).unwrap();
        let (vals, _) = h.eigen().unwrap();
        assert!((vals[0] + 16.0).abs() < 1e-9);
        assert_eq!(vals.iter().filter(|&&e| (e + 16.0).abs() < 1e-8).count(), 4);
        for k in [
            KitaevState::vertex_form(&lat, 2, DEFAULT_MEMORY_CAP).unwrap(),
            KitaevState::plaquette_form(&lat, 2, DEFAULT_MEMORY_CAP).unwrap(),
        ] {
            let hk = h.apply(k.state()).unwrap();
            let mut expect = k.state().clone();
            for a in expect.amplitudes_mut() {
                *a *= -16.0;
            }
            assert!(hk.max_abs_diff(&expect).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dense_scope_is_limited() {
        let lat = lat2();
        let h = ToricHamiltonian::new(&lat, 3, DEFAULT_MEMORY_CAP).unwrap();
        assert!(matches!(h.dense_matrix(), Err(Error::ScopeExceeded(_))));
        assert!(matches!(verify_hbeta_similarity(&lat, 3, 0.5), Err(Error::ScopeExceeded(_))));
    }

    #[test]
    fn similarity_at_zero_and_half() {
        let lat = lat2();
        let r0 = verify_hbeta_similarity(&lat, 2, 0.0).unwrap();
        assert!(r0.pass);
        assert!(r0.max_eigen_residual < 1e-10);
        let r = verify_hbeta_similarity(&lat, 2, 0.5).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.ground_degeneracy, 4);
    }
}
