//! Dense complex state vectors and generalized Bell bases for d-dimensional
//! systems.
//!
//! Everything here is exact (up to floating point) and serves as the oracle
//! that the closed-form tables in [`crate::analytic`] are validated against.
//!
//! Basis indexing is site-major (big-endian): the leftmost ket factor is the
//! most significant digit, so for qubits `|q₀q₁⟩` sits at index `2·q₀ + q₁`.
//! All operations are pure functions and safe to call concurrently.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::tables::{AmplitudeTable, NORM_TOLERANCE};

/// Largest dense composite we support: 6 sites at d ≤ 5 (≤ 15625 amplitudes).
pub const MAX_SITES: usize = 6;
pub const MAX_DIM: usize = 5;

/// Index `(shift, phase)` of a generalized Bell state.
///
/// `Φ(shift, phase) = (1/√d) Σ_q ω^{phase·q} |q⟩|q+shift⟩` with `ω = e^{i2π/d}`
/// and the site sum taken modulo `d`. For qubits the four states in
/// `(shift, phase)` order `00, 01, 10, 11` are `Φ⁺, Φ⁻, Ψ⁺, Ψ⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellIndex {
    pub shift: usize,
    pub phase: usize,
}

impl BellIndex {
    /// Build an index with both components reduced modulo `d`.
    pub fn new(shift: usize, phase: usize, d: usize) -> Self {
        BellIndex {
            shift: shift % d,
            phase: phase % d,
        }
    }

    /// Linear position among the `d²` Bell states, `shift·d + phase`.
    pub fn flat(&self, d: usize) -> usize {
        self.shift * d + self.phase
    }
}

/// A pure state of `num_sites` qudits as a dense, unit-norm amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim: usize,
    num_sites: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Build a state from raw amplitudes, normalizing. Rejects dimensions
    /// outside `2..=5`, composites above [`MAX_SITES`], length mismatches,
    /// and zero vectors.
    pub fn new(dim: usize, num_sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_shape(dim, num_sites)?;
        let expected = dim.pow(num_sites as u32);
        if amps.len() != expected {
            return Err(Error::AmplitudeLength {
                expected,
                got: amps.len(),
            });
        }
        let mut state = PureState { dim, num_sites, amps };
        state.normalize()?;
        Ok(state)
    }

    /// The computational basis state `|index⟩` (site-major digits of `index`).
    pub fn basis(dim: usize, num_sites: usize, index: usize) -> Result<Self> {
        check_shape(dim, num_sites)?;
        let len = dim.pow(num_sites as u32);
        if index >= len {
            return Err(Error::AmplitudeLength {
                expected: len,
                got: index,
            });
        }
        let mut amps = vec![Complex64::ZERO; len];
        amps[index] = Complex64::ONE;
        Ok(PureState { dim, num_sites, amps })
    }

    /// A single site in the state `Σ coeffs[i] |i⟩`, normalized.
    pub fn single(dim: usize, coeffs: &[Complex64]) -> Result<Self> {
        PureState::new(dim, 1, coeffs.to_vec())
    }

    pub fn dim_per_site(&self) -> usize {
        self.dim
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.num_sites != other.num_sites {
            return Err(Error::DimensionMismatch(self.num_sites, other.num_sites));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            for a in &mut self.amps {
                *a /= norm;
            }
        }
        Ok(())
    }

    /// Reorder sites: resulting site `s` carries what `perm[s]` carried.
    ///
    /// `perm` must be a permutation of `0..num_sites`.
    pub fn permute_sites(&self, perm: &[usize]) -> Result<PureState> {
        let n = self.num_sites;
        if perm.len() != n {
            return Err(Error::InvalidPairing(format!(
                "permutation length {} for {} sites",
                perm.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidPairing("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut amps = vec![Complex64::ZERO; self.amps.len()];
        let mut digits = vec![0usize; n];
        for (idx, amp) in self.amps.iter().enumerate() {
            decode_digits(idx, self.dim, &mut digits);
            let mut new_idx = 0;
            for s in 0..n {
                new_idx = new_idx * self.dim + digits[perm[s]];
            }
            amps[new_idx] = *amp;
        }
        Ok(PureState {
            dim: self.dim,
            num_sites: n,
            amps,
        })
    }
}

fn check_shape(dim: usize, num_sites: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if num_sites == 0 || num_sites > MAX_SITES {
        return Err(Error::TooManySites {
            dim,
            sites: num_sites,
        });
    }
    Ok(())
}

/// `ω^k` for `ω = e^{i2π/d}`, with `k` reduced modulo `d` first so large
/// exponents do not lose precision.
fn root_of_unity(d: usize, k: i64) -> Complex64 {
    let k = k.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, TAU * k / d as f64)
}

/// The generalized Bell state `Φ(idx)` as a two-site state.
pub fn bell_state(d: usize, idx: BellIndex) -> Result<PureState> {
    check_shape(d, 2)?;
    let idx = BellIndex::new(idx.shift, idx.phase, d);
    let scale = 1.0 / (d as f64).sqrt();
    let mut amps = vec![Complex64::ZERO; d * d];
    for q in 0..d {
        let partner = (q + idx.shift) % d;
        amps[q * d + partner] = root_of_unity(d, (idx.phase * q) as i64) * scale;
    }
    Ok(PureState {
        dim: d,
        num_sites: 2,
        amps,
    })
}

/// Kronecker product of states sharing one site dimension; site order is the
/// argument order, so the first factor holds the leading sites.
pub fn tensor(states: &[PureState]) -> Result<PureState> {
    let first = states.first().ok_or(Error::ZeroNorm)?;
    let dim = first.dim;
    let mut total_sites = 0;
    for s in states {
        if s.dim != dim {
            return Err(Error::DimensionMismatch(dim, s.dim));
        }
        total_sites += s.num_sites;
    }
    check_shape(dim, total_sites)?;
    let mut amps = vec![Complex64::ONE];
    for s in states {
        let mut next = Vec::with_capacity(amps.len() * s.amps.len());
        for a in &amps {
            for b in &s.amps {
                next.push(a * b);
            }
        }
        amps = next;
    }
    Ok(PureState {
        dim,
        num_sites: total_sites,
        amps,
    })
}

fn decode_digits(mut idx: usize, dim: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = idx % dim;
        idx /= dim;
    }
}

fn validate_pairing(num_sites: usize, pairs: &[(usize, usize)]) -> Result<()> {
    if pairs.len() * 2 != num_sites {
        return Err(Error::InvalidPairing(format!(
            "{} pairs cannot cover {} sites",
            pairs.len(),
            num_sites
        )));
    }
    let mut seen = vec![false; num_sites];
    for &(a, b) in pairs {
        for site in [a, b] {
            if site >= num_sites {
                return Err(Error::InvalidPairing(format!("site {site} out of range")));
            }
            if seen[site] {
                return Err(Error::InvalidPairing(format!("site {site} used twice")));
            }
            seen[site] = true;
        }
    }
    Ok(())
}

/// Expand a state over `2·arity` sites in a product of Bell bases.
///
/// Entry `(ix₁, …, ix_arity)` is the projection `⟨Φ(ix₁)| ⊗ … |state⟩`
/// where `⟨Φ(ixₖ)|` acts on the sites of `pairs[k]` (in pair order: the
/// pair's first site is the Bell state's first site). The expansion is a
/// unitary basis change, so the squared entries always sum to 1.
fn bell_expansion(state: &PureState, pairs: &[(usize, usize)]) -> Result<AmplitudeTable> {
    validate_pairing(state.num_sites, pairs)?;
    let d = state.dim;
    let arity = pairs.len();
    let scale = (1.0 / (d as f64).sqrt()).powi(arity as i32);
    let table_len = (d * d).pow(arity as u32);

    let mut entries = vec![Complex64::ZERO; table_len];
    let mut indices = vec![BellIndex { shift: 0, phase: 0 }; arity];
    let mut digits = vec![0usize; state.num_sites];
    for (flat, entry) in entries.iter_mut().enumerate() {
        // Decode the joint Bell index from the lexicographic position.
        let mut rest = flat;
        for ix in indices.iter_mut().rev() {
            ix.phase = rest % d;
            rest /= d;
            ix.shift = rest % d;
            rest /= d;
        }
        // The bra product is sparse: only d^arity basis states contribute,
        // one per choice of the leading digit of each pair.
        let mut sum = Complex64::ZERO;
        for qs in 0..d.pow(arity as u32) {
            let mut q_rest = qs;
            let mut phase_exp: i64 = 0;
            for (k, &(sa, sb)) in pairs.iter().enumerate().rev() {
                let q = q_rest % d;
                q_rest /= d;
                digits[sa] = q;
                digits[sb] = (q + indices[k].shift) % d;
                phase_exp -= (indices[k].phase * q) as i64;
            }
            let mut basis_idx = 0;
            for &dg in digits.iter() {
                basis_idx = basis_idx * d + dg;
            }
            sum += root_of_unity(d, phase_exp) * state.amps[basis_idx];
        }
        *entry = sum * scale;
    }
    Ok(AmplitudeTable::from_entries(d, arity, entries))
}

/// Bell-basis expansion of a four-site state over two disjoint site pairs.
pub fn joint_bell_coefficients(
    state: &PureState,
    pairs: [(usize, usize); 2],
) -> Result<AmplitudeTable> {
    if state.num_sites != 4 {
        return Err(Error::InvalidPairing(format!(
            "expected 4 sites, got {}",
            state.num_sites
        )));
    }
    bell_expansion(state, &pairs)
}

/// Bell-basis expansion of a six-site state over three disjoint site pairs.
pub fn joint_bell_coefficients_6(
    state: &PureState,
    pairs: [(usize, usize); 3],
) -> Result<AmplitudeTable> {
    if state.num_sites != 6 {
        return Err(Error::InvalidPairing(format!(
            "expected 6 sites, got {}",
            state.num_sites
        )));
    }
    bell_expansion(state, &pairs)
}

/// Rebuild the original state from its Bell expansion (test oracle for the
/// round-trip property).
pub fn reconstruct_from_bell(table: &AmplitudeTable, pairs: &[(usize, usize)]) -> Result<PureState> {
    let d = table.dim();
    let arity = table.arity();
    let num_sites = arity * 2;
    validate_pairing(num_sites, pairs)?;

    // Site s of the paired-order product corresponds to original site
    // perm[s]; permute_sites wants the inverse mapping.
    let mut paired_order = Vec::with_capacity(num_sites);
    for &(a, b) in pairs {
        paired_order.push(a);
        paired_order.push(b);
    }
    let mut inverse = vec![0usize; num_sites];
    for (pos, &site) in paired_order.iter().enumerate() {
        inverse[site] = pos;
    }

    let mut amps = vec![Complex64::ZERO; d.pow(num_sites as u32)];
    for (flat, coeff) in table.entries().iter().enumerate() {
        if coeff.norm_sqr() == 0.0 {
            continue;
        }
        let indices = table.unflatten(flat);
        let mut product = bell_state(d, indices[0])?;
        for ix in &indices[1..] {
            product = tensor(&[product, bell_state(d, *ix)?])?;
        }
        let product = product.permute_sites(&inverse)?;
        for (a, b) in amps.iter_mut().zip(product.amplitudes()) {
            *a += coeff * b;
        }
    }
    PureState::new(d, num_sites, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_single(d: usize, rng: &mut ChaCha8Rng) -> PureState {
        loop {
            let coeffs: Vec<Complex64> = (0..d)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            if let Ok(s) = PureState::single(d, &coeffs) {
                return s;
            }
        }
    }

    #[test]
    fn bell_state_qubit_phi_plus() {
        let s = bell_state(2, BellIndex::new(0, 0, 2)).unwrap();
        let expected = [c(SQRT_HALF, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(SQRT_HALF, 0.0)];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e.re, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, e.im, epsilon = 1e-15);
        }
    }

    #[test]
    fn bell_state_qubit_psi_minus() {
        let s = bell_state(2, BellIndex::new(1, 1, 2)).unwrap();
        let expected = [0.0, SQRT_HALF, -SQRT_HALF, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn bell_state_qutrit_shift_only() {
        // shift 1, phase 0: (|01⟩ + |12⟩ + |20⟩)/√3
        let s = bell_state(3, BellIndex::new(1, 0, 3)).unwrap();
        let third = 1.0 / 3.0f64.sqrt();
        for (idx, a) in s.amplitudes().iter().enumerate() {
            let expected = if idx == 1 || idx == 5 || idx == 6 { third } else { 0.0 };
            assert_abs_diff_eq!(a.re, expected, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn bell_states_are_orthonormal() {
        for d in 2..=5 {
            for s1 in 0..d {
                for p1 in 0..d {
                    for s2 in 0..d {
                        for p2 in 0..d {
                            let a = bell_state(d, BellIndex::new(s1, p1, d)).unwrap();
                            let b = bell_state(d, BellIndex::new(s2, p2, d)).unwrap();
                            let ip = a.inner(&b).unwrap();
                            let expected = if s1 == s2 && p1 == p2 { 1.0 } else { 0.0 };
                            assert_abs_diff_eq!(ip.re, expected, epsilon = 1e-12);
                            assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(bell_state(1, BellIndex::new(0, 0, 1)).is_err());
        assert!(matches!(
            bell_state(6, BellIndex::new(0, 0, 6)),
            Err(Error::UnsupportedDimension(6))
        ));
    }

    #[test]
    fn tensor_identity_and_basis_products() {
        let zero = PureState::basis(2, 1, 0).unwrap();
        let one = PureState::basis(2, 1, 1).unwrap();
        let t = tensor(&[zero.clone()]).unwrap();
        assert_eq!(t.amplitudes(), zero.amplitudes());

        let t = tensor(&[zero.clone(), one]).unwrap();
        assert_eq!(t.num_sites(), 2);
        assert_abs_diff_eq!(t.amplitudes()[1].re, 1.0, epsilon = 1e-15);

        let plus = PureState::single(2, &[c(SQRT_HALF, 0.0), c(SQRT_HALF, 0.0)]).unwrap();
        let t = tensor(&[plus.clone(), plus]).unwrap();
        for a in t.amplitudes() {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn tensor_rejects_mixed_dimensions() {
        let qubit = PureState::basis(2, 1, 0).unwrap();
        let qutrit = PureState::basis(3, 1, 0).unwrap();
        assert!(matches!(
            tensor(&[qubit, qutrit]),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn bell_product_expands_to_unit_entry() {
        let pair = bell_state(2, BellIndex::new(0, 0, 2)).unwrap();
        let state = tensor(&[pair.clone(), pair]).unwrap();
        let table = joint_bell_coefficients(&state, [(0, 1), (2, 3)]).unwrap();
        for (flat, v) in table.entries().iter().enumerate() {
            let expected = if flat == 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v.re, expected, epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn product_of_three_bell_pairs_expands_to_unit_entry() {
        let ix = BellIndex::new(1, 0, 2);
        let pair = bell_state(2, ix).unwrap();
        let state = tensor(&[pair.clone(), pair.clone(), pair]).unwrap();
        let table = joint_bell_coefficients_6(&state, [(0, 1), (2, 3), (4, 5)]).unwrap();
        for (flat, v) in table.entries().iter().enumerate() {
            let expected = if flat == table.flat_index(&[ix, ix, ix]) { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v.norm(), expected, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(table.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_preparation_expansion_matches_sign_classes() {
        // Both parties at |0⟩ against a shift-0/phase-0 pair: the expansion
        // splits into eight entries of magnitude 1/(2√2) and eight zeros.
        let probe = PureState::basis(2, 1, 0).unwrap();
        let pair = bell_state(2, BellIndex::new(0, 0, 2)).unwrap();
        let state = tensor(&[probe.clone(), probe, pair]).unwrap();
        let table = joint_bell_coefficients(&state, [(0, 2), (1, 3)]).unwrap();
        let mag = 1.0 / (2.0 * 2.0f64.sqrt());
        let mut nonzero = 0;
        for v in table.entries() {
            if v.norm() > 1e-12 {
                nonzero += 1;
                assert_abs_diff_eq!(v.norm(), mag, epsilon = 1e-12);
            }
        }
        assert_eq!(nonzero, 8);
    }

    #[test]
    fn rejects_bad_pairings() {
        let pair = bell_state(2, BellIndex::new(0, 0, 2)).unwrap();
        let state = tensor(&[pair.clone(), pair]).unwrap();
        assert!(joint_bell_coefficients(&state, [(0, 1), (1, 3)]).is_err());
        assert!(joint_bell_coefficients(&state, [(0, 1), (2, 7)]).is_err());
    }

    #[test]
    fn expansion_norm_and_reconstruction_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let amps: Vec<Complex64> = (0..16)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let state = PureState::new(2, 4, amps).unwrap();
            let pairs = [(0, 2), (1, 3)];
            let table = joint_bell_coefficients(&state, pairs).unwrap();
            assert_abs_diff_eq!(table.norm_sqr(), 1.0, epsilon = 1e-12);

            let rebuilt = reconstruct_from_bell(&table, &pairs).unwrap();
            for (a, b) in state.amplitudes().iter().zip(rebuilt.amplitudes()) {
                assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
                assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn six_site_expansion_conserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let amps: Vec<Complex64> = (0..64)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let state = PureState::new(2, 6, amps).unwrap();
        let table = joint_bell_coefficients_6(&state, [(0, 3), (1, 4), (2, 5)]).unwrap();
        assert_abs_diff_eq!(table.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn expansion_conserves_norm_any_qudit(d in 2usize..=4, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let amps: Vec<Complex64> = (0..d.pow(4))
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let state = PureState::new(d, 4, amps).unwrap();
            let table = joint_bell_coefficients(&state, [(0, 2), (1, 3)]).unwrap();
            prop_assert!((table.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
