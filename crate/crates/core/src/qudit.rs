//! Generalized d-level Pauli operators acting on dense amplitude vectors.
//!
//! Basis index `i` encodes the digit string `(m_0, m_1, …, m_{N-1})` in base
//! `d` with qudit 0 as the least significant digit.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default bound on the number of amplitudes a state may hold.
pub const DEFAULT_MEMORY_CAP: u128 = 1 << 28;

const KDST_MAGIC: &[u8; 4] = b"KDST";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuditParams {
    d: usize,
    omega: Complex64,
}

impl QuditParams {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("qudit dimension d={d}: need d >= 2")));
        }
        Ok(Self {
            d,
            omega: Complex64::from_polar(1.0, 2.0 * PI / d as f64),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    /// `ω^k` for any integer `k`, reduced mod d before evaluation.
    pub fn omega_pow(&self, k: i64) -> Complex64 {
        let r = k.rem_euclid(self.d as i64) as f64;
        Complex64::from_polar(1.0, 2.0 * PI * r / self.d as f64)
    }

    /// `cos(2π m / d)` for each digit value.
    pub fn cos_table(&self) -> Vec<f64> {
        (0..self.d)
            .map(|m| (2.0 * PI * m as f64 / self.d as f64).cos())
            .collect()
    }
}

/// `d^n`, or an error if it exceeds `cap`.
pub fn checked_dim(d: usize, n: usize, cap: u128) -> Result<usize> {
    let mut dim: u128 = 1;
    for _ in 0..n {
        dim = dim.saturating_mul(d as u128);
        if dim > cap {
            return Err(Error::CapExceeded {
                what: "state amplitudes",
                needed: (d as u128).saturating_pow(n as u32),
                cap,
            });
        }
    }
    Ok(dim as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    d: usize,
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn zeros(d: usize, n: usize, cap: u128) -> Result<Self> {
        QuditParams::new(d)?;
        let dim = checked_dim(d, n, cap)?;
        Ok(Self {
            d,
            n,
            amps: vec![Complex64::new(0.0, 0.0); dim],
        })
    }

    /// The computational basis state with the given digits.
    pub fn basis(d: usize, digits: &[usize], cap: u128) -> Result<Self> {
        let mut s = Self::zeros(d, digits.len(), cap)?;
        let mut idx = 0;
        for &m in digits.iter().rev() {
            if m >= d {
                return Err(Error::Domain(format!("digit {m} out of range for d={d}")));
            }
            idx = idx * d + m;
        }
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(d: usize, n: usize, amps: Vec<Complex64>) -> Result<Self> {
        QuditParams::new(d)?;
        let dim = checked_dim(d, n, u128::MAX)?;
        if amps.len() != dim {
            return Err(Error::Domain(format!(
                "amplitude count {} does not match d^N = {dim}",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Domain("non-finite amplitude".into()));
        }
        Ok(Self { d, n, amps })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn num_qudits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scale to unit norm. Fails on the zero vector.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Domain(format!("cannot normalize state with norm {n}")));
        }
        let inv = 1.0 / n;
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(())
    }

    /// Digit of qudit `q` in basis index `idx`.
    pub fn digit(&self, idx: usize, q: usize) -> usize {
        (idx / self.d.pow(q as u32)) % self.d
    }

    fn check_qudit(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::Index {
                kind: "qudit",
                index: q,
                len: self.n,
            })
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.n != other.n {
            return Err(Error::Domain(format!(
                "shape mismatch: (d={}, N={}) vs (d={}, N={})",
                self.d, self.n, other.d, other.n
            )));
        }
        Ok(())
    }

    /// `X_q^power |ψ⟩`: shifts digit `q` by `+power` mod d.
    pub fn apply_x(&self, q: usize, power: i64) -> Result<Self> {
        let mut out = self.clone();
        out.apply_x_mut(q, power)?;
        Ok(out)
    }

    pub fn apply_x_mut(&mut self, q: usize, power: i64) -> Result<()> {
        self.check_qudit(q)?;
        let d = self.d;
        let shift = power.rem_euclid(d as i64) as usize;
        if shift == 0 {
            return Ok(());
        }
        let stride = d.pow(q as u32);
        let block = stride * d;
        let mut buf = vec![Complex64::new(0.0, 0.0); d];
        for base in (0..self.amps.len()).step_by(block) {
            for low in 0..stride {
                let at = base + low;
                for m in 0..d {
                    buf[(m + shift) % d] = self.amps[at + m * stride];
                }
                for (m, v) in buf.iter().enumerate() {
                    self.amps[at + m * stride] = *v;
                }
            }
        }
        Ok(())
    }

    /// `Z_q^power |ψ⟩`: multiplies components with digit `m` at `q` by `ω^{m·power}`.
    pub fn apply_z(&self, q: usize, power: i64) -> Result<Self> {
        let mut out = self.clone();
        out.apply_z_mut(q, power)?;
        Ok(out)
    }

    pub fn apply_z_mut(&mut self, q: usize, power: i64) -> Result<()> {
        self.check_qudit(q)?;
        let params = QuditParams::new(self.d)?;
        let phases: Vec<Complex64> = (0..self.d as i64).map(|m| params.omega_pow(m * power)).collect();
        let stride = self.d.pow(q as u32);
        let d = self.d;
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= phases[(i / stride) % d];
        }
        Ok(())
    }

    /// Apply `∏_q exp{c (Z_q + Z_q^{-1})}`, which is diagonal with entries
    /// `exp{2c Σ_q cos(2π m_q / d)}`. `half` selects `c = β/2`, the local
    /// deformation itself; otherwise `c = β`, the operator whose expectation
    /// is the norm function. The result is not normalized.
    pub fn apply_deformation(&self, beta: f64, half: bool) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::Domain(format!("deformation strength must be finite, got {beta}")));
        }
        let c = if half { beta / 2.0 } else { beta };
        let sums = digit_cos_sums(self.d, self.n);
        let amps = self
            .amps
            .iter()
            .zip(&sums)
            .map(|(a, s)| a * (2.0 * c * s).exp())
            .collect();
        Ok(Self {
            d: self.d,
            n: self.n,
            amps,
        })
    }

    /// `⟨self|other⟩ = Σ conj(a_i) b_i`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest componentwise distance `max_i |a_i - b_i|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Serialize as `"KDST" | u32 d | u32 N | (f64 re, f64 im)*`, little-endian.
    pub fn encode_kdst(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 16 * self.amps.len());
        out.extend_from_slice(KDST_MAGIC);
        out.extend_from_slice(&(self.d as u32).to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    /// Parse a KDST dump, refusing headers that would exceed `cap`
    /// amplitudes before allocating anything.
    pub fn decode_kdst(bytes: &[u8], cap: u128) -> Result<Self> {
        if bytes.len() < 12 {
            return Err(Error::Decode(format!("truncated header: {} bytes", bytes.len())));
        }
        if &bytes[..4] != KDST_MAGIC {
            return Err(Error::Decode("bad magic".into()));
        }
        let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        if d < 2 {
            return Err(Error::Decode(format!("invalid d={d}")));
        }
        let dim = checked_dim(d, n, cap)?;
        let body = &bytes[12..];
        if body.len() as u128 != 16 * dim as u128 {
            return Err(Error::Decode(format!(
                "payload is {} bytes, header implies {}",
                body.len(),
                16 * dim as u128
            )));
        }
        let amps = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Self::from_amplitudes(d, n, amps).map_err(|e| Error::Decode(e.to_string()))
    }
}

/// For every basis index, `Σ_q cos(2π m_q / d)`, each entry summed in
/// qudit order without running accumulation.
pub fn digit_cos_sums(d: usize, n: usize) -> Vec<f64> {
    let table: Vec<f64> = (0..d)
        .map(|m| (2.0 * PI * m as f64 / d as f64).cos())
        .collect();
    // Grow from the most significant qudit down so that entry i ends up as
    // ((c[m_{N-1}] + c[m_{N-2}]) + …) + c[m_0].
    let mut sums = vec![0.0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(sums.len() * d);
        for &s in &sums {
            for &c in &table {
                next.push(s + c);
            }
        }
        sums = next;
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(d: usize, n: usize, seed: u64) -> DenseState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = d.pow(n as u32);
        let amps = (0..dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut s = DenseState::from_amplitudes(d, n, amps).unwrap();
        s.normalize().unwrap();
        s
    }

    #[test]
    fn omega_identities() {
        for d in 2..=8 {
            let p = QuditParams::new(d).unwrap();
            let wd = p.omega().powu(d as u32);
            assert!((wd - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            let s: Complex64 = (0..d as i64).map(|k| p.omega_pow(k)).sum();
            assert!(s.norm() < 1e-12);
        }
        assert!(QuditParams::new(1).is_err());
    }

    #[test]
    fn x_power_d_is_identity() {
        for d in [2, 3, 5] {
            let s = random_state(d, 3, 1);
            for q in 0..3 {
                assert_eq!(s.apply_x(q, d as i64).unwrap(), s);
                assert_eq!(s.apply_x(q, -1).unwrap().apply_x(q, 1).unwrap(), s);
            }
        }
        let s = random_state(2, 2, 9);
        assert_eq!(s.apply_x(1, 1).unwrap().apply_x(1, 1).unwrap(), s);
    }

    #[test]
    fn x_shifts_basis_digit() {
        let s = DenseState::basis(3, &[2, 0, 1], DEFAULT_MEMORY_CAP).unwrap();
        let t = s.apply_x(0, 1).unwrap();
        assert_eq!(t, DenseState::basis(3, &[0, 0, 1], DEFAULT_MEMORY_CAP).unwrap());
        let t = s.apply_x(2, -1).unwrap();
        assert_eq!(t, DenseState::basis(3, &[2, 0, 0], DEFAULT_MEMORY_CAP).unwrap());
    }

    #[test]
    fn z_on_qubits_flips_sign_of_one_digit() {
        let s = random_state(2, 2, 3);
        let t = s.apply_z(0, 1).unwrap();
        for i in 0..4 {
            let expect = if i & 1 == 1 { -s.amplitudes()[i] } else { s.amplitudes()[i] };
            assert!((t.amplitudes()[i] - expect).norm() < 1e-15);
        }
        for d in [3, 5] {
            let s = random_state(d, 2, 4);
            assert!(s.apply_z(1, d as i64).unwrap().max_abs_diff(&s).unwrap() < 1e-12);
        }
    }

    #[test]
    fn index_errors() {
        let s = random_state(3, 2, 5);
        assert!(matches!(s.apply_x(2, 1), Err(Error::Index { .. })));
        assert!(matches!(s.apply_z(7, 1), Err(Error::Index { .. })));
    }

    #[test]
    fn commutation_relation() {
        for d in [2, 3, 5, 6] {
            let p = QuditParams::new(d).unwrap();
            let s = random_state(d, 1, 11 + d as u64);
            for a in 0..d as i64 {
                for b in 0..d as i64 {
                    let zx = s.apply_x(0, b).unwrap().apply_z(0, a).unwrap();
                    let xz = s.apply_z(0, a).unwrap().apply_x(0, b).unwrap();
                    let w = p.omega_pow(a * b);
                    for (u, v) in zx.amplitudes().iter().zip(xz.amplitudes()) {
                        assert!((u - w * v).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn paulis_preserve_norm() {
        for d in [2, 3, 5] {
            let s = random_state(d, 3, 21);
            for q in 0..3 {
                assert!((s.apply_x(q, 2).unwrap().norm() - 1.0).abs() < 1e-12);
                assert!((s.apply_z(q, 2).unwrap().norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deformation_examples() {
        let s = random_state(3, 2, 7);
        assert!(s.apply_deformation(0.0, true).unwrap().max_abs_diff(&s).unwrap() < 1e-15);

        let plus = DenseState::from_amplitudes(2, 1, vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        let w = plus.apply_deformation(1.0, true).unwrap();
        assert!((w.amplitudes()[0].re - 1f64.exp()).abs() < 1e-14);
        assert!((w.amplitudes()[1].re - (-1f64).exp()).abs() < 1e-14);
        let full = plus.apply_deformation(0.5, false).unwrap();
        assert!((full.amplitudes()[0].re - 1f64.exp()).abs() < 1e-14);

        assert!(s.apply_deformation(f64::NAN, true).is_err());
        assert!(s.apply_deformation(f64::INFINITY, false).is_err());
    }

    #[test]
    fn strong_deformation_projects_onto_zero_digit() {
        let d = 3;
        let s = random_state(d, 2, 8);
        let mut big = s.apply_deformation(20.0, true).unwrap();
        big.normalize().unwrap();
        let mut proj = DenseState::zeros(d, 2, DEFAULT_MEMORY_CAP).unwrap();
        proj.amplitudes_mut()[0] = s.amplitudes()[0];
        proj.normalize().unwrap();
        let overlap = big.inner(&proj).unwrap().norm_sqr();
        assert!(overlap >= 1.0 - 1e-6, "overlap {overlap}");
    }

    #[test]
    fn deformation_commutes_with_z() {
        let s = random_state(5, 2, 31);
        let a = s.apply_deformation(0.7, true).unwrap().apply_z(1, 2).unwrap();
        let b = s.apply_z(1, 2).unwrap().apply_deformation(0.7, true).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn inner_product_properties() {
        let a = random_state(3, 3, 41);
        let b = random_state(3, 3, 42);
        assert!((a.inner(&a).unwrap().re - 1.0).abs() < 1e-12);
        let ab = a.inner(&b).unwrap();
        let ba = b.inner(&a).unwrap();
        assert!((ab.conj() - ba).norm() < 1e-12);
        let e0 = DenseState::basis(3, &[0, 1, 2], DEFAULT_MEMORY_CAP).unwrap();
        let e1 = DenseState::basis(3, &[0, 2, 2], DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(e0.inner(&e1).unwrap(), Complex64::new(0.0, 0.0));
        let c = random_state(2, 3, 43);
        assert!(a.inner(&c).is_err());
    }

    #[test]
    fn memory_cap_rejects_large_states() {
        assert!(matches!(
            DenseState::zeros(8, 10, DEFAULT_MEMORY_CAP),
            Err(Error::CapExceeded { .. })
        ));
        assert!(DenseState::zeros(2, 8, 256).is_ok());
        assert!(DenseState::zeros(2, 9, 256).is_err());
    }

    #[test]
    fn cos_sums_match_direct_digits() {
        let (d, n) = (3, 4);
        let sums = digit_cos_sums(d, n);
        let s = DenseState::zeros(d, n, DEFAULT_MEMORY_CAP).unwrap();
        for (i, v) in sums.iter().enumerate() {
            let direct: f64 = (0..n)
                .map(|q| (2.0 * PI * s.digit(i, q) as f64 / d as f64).cos())
                .sum();
            assert!((v - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn kdst_round_trip_and_rejections() {
        let s = random_state(3, 2, 51);
        let bytes = s.encode_kdst();
        assert_eq!(&bytes[..4], b"KDST");
        assert_eq!(DenseState::decode_kdst(&bytes, DEFAULT_MEMORY_CAP).unwrap(), s);
        assert!(DenseState::decode_kdst(&bytes[..20], DEFAULT_MEMORY_CAP).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(DenseState::decode_kdst(&bad, DEFAULT_MEMORY_CAP).is_err());
        let mut huge = b"KDST".to_vec();
        huge.extend_from_slice(&1000u32.to_le_bytes());
        huge.extend_from_slice(&1000u32.to_le_bytes());
        assert!(matches!(
            DenseState::decode_kdst(&huge, DEFAULT_MEMORY_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }
}
