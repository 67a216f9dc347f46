//! Collective spin algebra in the symmetric Dicke sector `S = N/2`.
//!
//! Basis index `k` corresponds to `m = k - S` (ascending `m`, index 0 is the
//! all-ground state). Magnetic quantum numbers are tracked as `2m` integers so
//! that parity and indexing stay exact for odd `N`.

use crate::{Error, Result, C64};

/// Largest atom number accepted by [`DickeBasis::new`].
pub const DEFAULT_MAX_ATOMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DickeBasis {
    n_atoms: usize,
}

impl DickeBasis {
    pub fn new(n_atoms: usize) -> Result<Self> {
        Self::with_cap(n_atoms, DEFAULT_MAX_ATOMS)
    }

    pub fn with_cap(n_atoms: usize, cap: usize) -> Result<Self> {
        if n_atoms == 0 || n_atoms > cap {
            return Err(Error::Size { n: n_atoms, cap });
        }
        Ok(Self { n_atoms })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    /// `S = N/2`.
    pub fn spin(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    /// `2m` for basis index `k`.
    pub fn twice_m(&self, k: usize) -> i64 {
        2 * k as i64 - self.n_atoms as i64
    }

    pub fn m(&self, k: usize) -> f64 {
        self.twice_m(k) as f64 / 2.0
    }

    pub fn m_values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim()).map(move |k| self.m(k))
    }

    pub fn index_of_twice_m(&self, twice_m: i64) -> Option<usize> {
        let shifted = twice_m + self.n_atoms as i64;
        if shifted < 0 || shifted % 2 != 0 {
            return None;
        }
        let k = (shifted / 2) as usize;
        (k < self.dim()).then_some(k)
    }

    /// Index of a half-integer `m`; `None` when `m` is not in the sector.
    pub fn index_of(&self, m: f64) -> Option<usize> {
        let twice = 2.0 * m;
        if !twice.is_finite() || twice.fract() != 0.0 {
            return None;
        }
        self.index_of_twice_m(twice as i64)
    }

    /// Parity of `N/2 - m`, i.e. of the number of excitations `k`.
    pub fn parity(&self, k: usize) -> Parity {
        if k.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Which collective operator to apply or measure.
#[derive(Debug, Clone, Copy)]
pub enum Observable<'a> {
    Sx,
    Sy,
    Sz,
    /// Any operator diagonal in `m`, given by its diagonal entries.
    Diagonal(&'a [f64]),
}

/// `Sx`, `Sy`, `Sz` stored as bands.
///
/// `Sz` is the diagonal `m_k`; `Sx` is real symmetric with superdiagonal
/// `b_k = ½√(S(S+1) − m_k(m_k+1))`; `Sy` has superdiagonal `+i b_k` and
/// subdiagonal `−i b_k` and is never materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveOps {
    basis: DickeBasis,
    sz: Vec<f64>,
    band: Vec<f64>,
    s_squared: f64,
}

impl CollectiveOps {
    pub fn new(basis: DickeBasis) -> Self {
        let s = basis.spin();
        let s_squared = s * (s + 1.0);
        let sz: Vec<f64> = basis.m_values().collect();
        let band = (0..basis.dim() - 1)
            .map(|k| {
                // S(S+1) - m(m+1) = (S - m)(S + m + 1), exact in integers of 2m.
                let two_s = basis.n_atoms() as i64;
                let two_m = basis.twice_m(k);
                let prod = (two_s - two_m) * (two_s + two_m + 2);
                0.25 * (prod as f64).sqrt()
            })
            .collect();
        Self {
            basis,
            sz,
            band,
            s_squared,
        }
    }

    pub fn basis(&self) -> &DickeBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn sz_diag(&self) -> &[f64] {
        &self.sz
    }

    /// Superdiagonal of `Sx`; element `k` couples indices `k` and `k+1`.
    pub fn sx_band(&self) -> &[f64] {
        &self.band
    }

    /// The Casimir `S(S+1)`, fixed in the sector.
    pub fn s_squared(&self) -> f64 {
        self.s_squared
    }

    /// `out = O·psi`. Every observable costs `O(N)`.
    pub fn apply(&self, obs: Observable<'_>, psi: &[C64], out: &mut [C64]) -> Result<()> {
        let dim = self.dim();
        check_dim(dim, psi.len())?;
        check_dim(dim, out.len())?;
        match obs {
            Observable::Sz => {
                for ((o, p), d) in out.iter_mut().zip(psi).zip(&self.sz) {
                    *o = p * d;
                }
            }
            Observable::Diagonal(diag) => {
                check_dim(dim, diag.len())?;
                for ((o, p), d) in out.iter_mut().zip(psi).zip(diag) {
                    *o = p * d;
                }
            }
            Observable::Sx => self.apply_sx(psi, out),
            Observable::Sy => {
                let b = &self.band;
                for k in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    if k + 1 < dim {
                        acc += C64::new(0.0, b[k]) * psi[k + 1];
                    }
                    if k > 0 {
                        acc += C64::new(0.0, -b[k - 1]) * psi[k - 1];
                    }
                    out[k] = acc;
                }
            }
        }
        Ok(())
    }

    /// `out = Sx·psi` without dimension checks (callers guarantee lengths).
    #[inline]
    pub(crate) fn apply_sx(&self, psi: &[C64], out: &mut [C64]) {
        let b = &self.band;
        let dim = psi.len();
        if dim == 1 {
            out[0] = C64::new(0.0, 0.0);
            return;
        }
        out[0] = psi[1] * b[0];
        for k in 1..dim - 1 {
            out[k] = psi[k - 1] * b[k - 1] + psi[k + 1] * b[k];
        }
        out[dim - 1] = psi[dim - 2] * b[dim - 2];
    }

    /// `⟨ψ|O|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn expectation(&self, obs: Observable<'_>, psi: &StateVector) -> Result<f64> {
        let amps = psi.amplitudes();
        check_dim(self.dim(), amps.len())?;
        let norm = psi.norm_sqr();
        if norm == 0.0 {
            return Err(Error::Degenerate("zero state vector".into()));
        }
        let value = match obs {
            Observable::Sz => weighted_sum(amps, &self.sz),
            Observable::Diagonal(diag) => {
                check_dim(self.dim(), diag.len())?;
                weighted_sum(amps, diag)
            }
            Observable::Sx | Observable::Sy => {
                let mut tmp = vec![C64::new(0.0, 0.0); amps.len()];
                self.apply(obs, amps, &mut tmp)?;
                let z: C64 = amps.iter().zip(&tmp).map(|(a, b)| a.conj() * b).sum();
                debug_assert!(
                    z.im.abs() <= 1e-12 * z.re.abs().max(norm),
                    "non-real expectation {z}"
                );
                z.re
            }
        };
        Ok(value / norm)
    }

    /// `⟨Sx² + Sy² + Sz²⟩` evaluated as `‖Sxψ‖² + ‖Syψ‖² + ‖Szψ‖²` over `‖ψ‖²`.
    pub fn casimir_expectation(&self, psi: &StateVector) -> Result<f64> {
        let amps = psi.amplitudes();
        check_dim(self.dim(), amps.len())?;
        let mut tmp = vec![C64::new(0.0, 0.0); amps.len()];
        let mut total = 0.0;
        for obs in [Observable::Sx, Observable::Sy, Observable::Sz] {
            self.apply(obs, amps, &mut tmp)?;
            total += tmp.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        Ok(total / psi.norm_sqr())
    }
}

/// Build the banded collective operators for a basis.
pub fn build_ops(basis: DickeBasis) -> CollectiveOps {
    CollectiveOps::new(basis)
}

fn weighted_sum(amps: &[C64], diag: &[f64]) -> f64 {
    amps.iter().zip(diag).map(|(a, d)| a.norm_sqr() * d).sum()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Complex amplitudes over the Dicke basis, ascending `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: DickeBasis,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(basis: DickeBasis, amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(basis.dim(), amplitudes.len())?;
        Ok(Self { basis, amplitudes })
    }

    /// `|S, m⟩` for half-integer `m`.
    pub fn basis_state(basis: DickeBasis, m: f64) -> Result<Self> {
        let k = basis
            .index_of(m)
            .ok_or_else(|| Error::Domain(format!("m = {m} is not in the S = {} sector", basis.spin())))?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
        amplitudes[k] = C64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    /// All atoms in `|g⟩`: `|N/2, −N/2⟩`.
    pub fn ground(basis: DickeBasis) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
        amplitudes[0] = C64::new(1.0, 0.0);
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &DickeBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Occupation probabilities `|c_k|²`.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dense_commutator_residual(ops: &CollectiveOps) -> f64 {
        // [Sx, Sy] - i Sz, column by column through the banded kernels.
        let dim = ops.dim();
        let mut worst: f64 = 0.0;
        let mut e = vec![C64::new(0.0, 0.0); dim];
        let (mut a, mut b, mut c, mut d) = (e.clone(), e.clone(), e.clone(), e.clone());
        for j in 0..dim {
            e.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            e[j] = C64::new(1.0, 0.0);
            ops.apply(Observable::Sy, &e, &mut a).unwrap();
            ops.apply(Observable::Sx, &a, &mut b).unwrap();
            ops.apply(Observable::Sx, &e, &mut a).unwrap();
            ops.apply(Observable::Sy, &a, &mut c).unwrap();
            ops.apply(Observable::Sz, &e, &mut d).unwrap();
            for k in 0..dim {
                let r = b[k] - c[k] - C64::new(0.0, 1.0) * d[k];
                worst = worst.max(r.norm());
            }
        }
        worst
    }

    #[test]
    fn basis_bookkeeping() {
        let b = DickeBasis::new(5).unwrap();
        assert_eq!(b.dim(), 6);
        let m: Vec<f64> = b.m_values().collect();
        assert_eq!(m, vec![-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]);
        assert_eq!(b.index_of(-2.5), Some(0));
        assert_eq!(b.index_of(2.5), Some(5));
        assert_eq!(b.index_of(2.0), None);
        assert_eq!(b.index_of(3.5), None);
        assert_eq!(b.parity(0), Parity::Even);
        assert_eq!(b.parity(3), Parity::Odd);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(DickeBasis::new(0), Err(Error::Size { .. })));
        assert!(matches!(DickeBasis::new(10_001), Err(Error::Size { .. })));
        assert!(DickeBasis::new(10_000).is_ok());
        assert!(DickeBasis::with_cap(20, 10).is_err());
    }

    #[test]
    fn single_atom_is_half_pauli() {
        let ops = build_ops(DickeBasis::new(1).unwrap());
        assert_eq!(ops.sz_diag(), &[-0.5, 0.5]);
        assert_eq!(ops.sx_band(), &[0.5]);
    }

    #[test]
    fn spin_one_ladder() {
        let ops = build_ops(DickeBasis::new(2).unwrap());
        assert_eq!(ops.sz_diag(), &[-1.0, 0.0, 1.0]);
        let r = std::f64::consts::SQRT_2 / 2.0;
        assert_abs_diff_eq!(ops.sx_band()[0], r, epsilon = 1e-15);
        assert_abs_diff_eq!(ops.sx_band()[1], r, epsilon = 1e-15);
    }

    #[test]
    fn su2_commutator() {
        for n in [1, 2, 5, 50, 600] {
            let ops = build_ops(DickeBasis::new(n).unwrap());
            let scale = ops.s_squared().max(1.0);
            let r = dense_commutator_residual(&ops);
            assert!(r <= 1e-12 * scale, "N={n}: residual {r}");
        }
    }

    #[test]
    fn basis_states() {
        let b = DickeBasis::new(4).unwrap();
        let lo = StateVector::basis_state(b, -2.0).unwrap();
        assert_eq!(lo.amplitudes()[0], C64::new(1.0, 0.0));
        let hi = StateVector::basis_state(b, 2.0).unwrap();
        assert_eq!(hi.amplitudes()[4], C64::new(1.0, 0.0));
        assert_eq!(hi.norm_sqr(), 1.0);
        assert!(matches!(StateVector::basis_state(b, 3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn expectations() {
        let b = DickeBasis::new(6).unwrap();
        let ops = build_ops(b);
        let g = StateVector::ground(b);
        assert_eq!(ops.expectation(Observable::Sz, &g).unwrap(), -3.0);
        for k in 0..b.dim() {
            let s = StateVector::basis_state(b, b.m(k)).unwrap();
            assert_eq!(ops.expectation(Observable::Sx, &s).unwrap(), 0.0);
        }

        let b1 = DickeBasis::new(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sup = StateVector::from_amplitudes(b1, vec![C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        let ops1 = build_ops(b1);
        assert_abs_diff_eq!(ops1.expectation(Observable::Sz, &sup).unwrap(), 0.0);
        assert_abs_diff_eq!(
            ops1.expectation(Observable::Sx, &sup).unwrap(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn dimension_mismatch() {
        let ops = build_ops(DickeBasis::new(3).unwrap());
        let psi = StateVector::ground(DickeBasis::new(4).unwrap());
        assert!(matches!(
            ops.expectation(Observable::Sz, &psi),
            Err(Error::DimensionMismatch { expected: 4, got: 5 })
        ));
        let diag = [0.0; 2];
        let psi3 = StateVector::ground(DickeBasis::new(3).unwrap());
        assert!(ops.expectation(Observable::Diagonal(&diag), &psi3).is_err());
    }

    #[test]
    fn banded_storage_is_linear() {
        let ops = build_ops(DickeBasis::new(10_000).unwrap());
        assert_eq!(ops.sx_band().len(), 10_000);
        assert_eq!(ops.sz_diag().len(), 10_001);
        let psi = vec![C64::new(1.0, 0.0); ops.dim()];
        let mut out = vec![C64::new(0.0, 0.0); ops.dim()];
        ops.apply(Observable::Sx, &psi, &mut out).unwrap();
        assert_abs_diff_eq!(out[0].re, ops.sx_band()[0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn casimir_is_fixed(n in 1usize..40, seed in proptest::collection::vec(-1.0f64..1.0, 82)) {
                let b = DickeBasis::new(n).unwrap();
                let ops = build_ops(b);
                let amps: Vec<C64> = (0..b.dim()).map(|k| C64::new(seed[2 * k], seed[2 * k + 1])).collect();
                prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
                let psi = StateVector::from_amplitudes(b, amps).unwrap();
                let c = ops.casimir_expectation(&psi).unwrap();
                prop_assert!((c - ops.s_squared()).abs() <= 1e-10 * ops.s_squared());
            }

            #[test]
            fn operators_are_hermitian(n in 1usize..30, i in 0usize..31, j in 0usize..31) {
                let b = DickeBasis::new(n).unwrap();
                let ops = build_ops(b);
                let (i, j) = (i % b.dim(), j % b.dim());
                let unit = |k: usize| {
                    let mut v = vec![C64::new(0.0, 0.0); b.dim()];
                    v[k] = C64::new(1.0, 0.0);
                    v
                };
                let mut oi = vec![C64::new(0.0, 0.0); b.dim()];
                let mut oj = oi.clone();
                for obs in [Observable::Sx, Observable::Sy, Observable::Sz] {
                    ops.apply(obs, &unit(j), &mut oj).unwrap();
                    ops.apply(obs, &unit(i), &mut oi).unwrap();
                    // ⟨i|O|j⟩ = conj(⟨j|O|i⟩)
                    prop_assert_eq!(oj[i], oi[j].conj());
                }
            }
        }
    }
}
