//! Total mutual coherence and the closed-form baseband pilot design.
//!
//! With switch-only RF parts, the coherence of `ΦΨ` is attacked one side at a
//! time. On the transmit side the objective collapses, under the tight-frame
//! approximation `A_T A_Tᴴ ≈ c_T I`, to a sum of per-group terms that vanish
//! exactly when each block `F_BB^p` has orthonormal columns. The receive
//! objective is indifferent to the choice of unitary block.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::dictionary::RedundantDictionary;
use crate::linalg::{complex_gaussian, herm, norm_sqr};
use crate::training::{sensing_with_dictionary, PilotPlan, PlanDims};
use crate::{Error, Result, C64};

/// `Σ_{i≠j} |⟨m_i, m_j⟩|²` over the unit-normalized columns of `m`.
///
/// A matrix with fewer than two columns has no pairs and scores zero.
pub fn total_mutual_coherence(m: &ArrayView2<C64>) -> Result<f64> {
    let mut normalized = m.to_owned();
    for (k, mut col) in normalized.columns_mut().into_iter().enumerate() {
        let n = norm_sqr(&col.view()).sqrt();
        if !(n > 0.0) {
            return Err(Error::ZeroColumn(k));
        }
        col.mapv_inplace(|z| z / n);
    }
    let gram = herm(&normalized.view()).dot(&normalized);
    Ok(gram
        .indexed_iter()
        .filter(|((i, j), _)| i != j)
        .map(|(_, z)| z.norm_sqr())
        .sum())
}

/// Unitary `n × n` DFT matrix, `U[j,k] = e^{-2πi jk/n} / √n`.
pub fn dft_matrix(n: usize) -> Array2<C64> {
    let scale = (n as f64).sqrt().recip();
    Array2::from_shape_fn((n, n), |(j, k)| {
        C64::from_polar(scale, -2.0 * PI * ((j * k) % n) as f64 / n as f64)
    })
}

/// `n_groups` copies of the first `cols_per_group` DFT columns.
pub fn design_bb_pilots(n_t_rf: usize, cols_per_group: usize, n_groups: usize) -> Result<Vec<Array2<C64>>> {
    if cols_per_group > n_t_rf {
        return Err(Error::Config(format!(
            "{cols_per_group} pilots per group cannot be mutually orthogonal with {n_t_rf} RF chains"
        )));
    }
    let block = dft_matrix(n_t_rf).slice(ndarray::s![.., ..cols_per_group]).to_owned();
    Ok(vec![block; n_groups])
}

/// `n_groups` unitary DFT combiners.
pub fn design_bb_combiners(n_r_rf: usize, n_groups: usize) -> Vec<Array2<C64>> {
    vec![dft_matrix(n_r_rf); n_groups]
}

/// Baseline: i.i.d. complex Gaussian blocks with unit-norm columns.
pub fn random_bb_pilots<R: Rng + ?Sized>(
    n_t_rf: usize,
    cols_per_group: usize,
    n_groups: usize,
    rng: &mut R,
) -> Vec<Array2<C64>> {
    (0..n_groups)
        .map(|_| {
            let mut b = complex_gaussian(rng, n_t_rf, cols_per_group);
            for mut col in b.columns_mut() {
                let n = norm_sqr(&col.view()).sqrt();
                col.mapv_inplace(|z| z / n);
            }
            b
        })
        .collect()
}

/// Coherence-minimizing plan: DFT baseband on both sides over the given switches.
pub fn designed_plan(dims: PlanDims, tx_switch: Vec<usize>, rx_switch: Vec<usize>) -> Result<PilotPlan> {
    dims.validate()?;
    let f = design_bb_pilots(dims.n_t_rf, dims.cols_per_group(), dims.n_t_group())?;
    let w = design_bb_combiners(dims.n_r_rf, dims.n_r_group());
    PilotPlan::new(dims, tx_switch, rx_switch, f, w)
}

/// Random baseband pilots and combiners over the given switches.
pub fn random_bb_plan<R: Rng + ?Sized>(
    dims: PlanDims,
    tx_switch: Vec<usize>,
    rx_switch: Vec<usize>,
    rng: &mut R,
) -> Result<PilotPlan> {
    dims.validate()?;
    let f = random_bb_pilots(dims.n_t_rf, dims.cols_per_group(), dims.n_t_group(), rng);
    let w = random_bb_pilots(dims.n_r_rf, dims.n_r_rf, dims.n_r_group(), rng);
    PilotPlan::new(dims, tx_switch, rx_switch, f, w)
}

/// Full pilot budget with identity baseband: the well-determined beam sweep.
pub fn beam_sweep_plan(
    n_t: usize,
    n_r: usize,
    n_t_rf: usize,
    n_r_rf: usize,
    tx_switch: Vec<usize>,
    rx_switch: Vec<usize>,
) -> Result<PilotPlan> {
    let dims = PlanDims {
        n_t,
        n_r,
        n_t_rf,
        n_r_rf,
        n_t_pilot: n_t,
    };
    dims.validate()?;
    let f = vec![Array2::eye(n_t_rf); dims.n_t_group()];
    let w = vec![Array2::eye(n_r_rf); dims.n_r_group()];
    PilotPlan::new(dims, tx_switch, rx_switch, f, w)
}

/// Coherence of `ΦΨ` and of its two Kronecker factors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    /// `μᵗ(ΦΨ)`, present only when its Gram fits the memory budget.
    pub total_coherence: Option<f64>,
    /// `μᵗ(F_BBᵀ F_RFᵀ A_T*)`.
    pub bound_tx: f64,
    /// `μᵗ(W_BBᴴ W_RFᴴ A_R)`.
    pub bound_rx: f64,
}

impl CoherenceReport {
    /// Whether `μᵗ(ΦΨ) ≤ bound_tx · bound_rx` (to relative 1e-9), when the
    /// total was computed.
    pub fn bound_holds(&self) -> Option<bool> {
        self.total_coherence.map(|total| {
            let product = self.bound_tx * self.bound_rx;
            total <= product + 1e-9 * product.max(1.0)
        })
    }
}

/// Factor coherences always; the dense total only if `(#columns)²` of `ΦΨ`
/// stays within `gram_limit` elements.
pub fn coherence_report(plan: &PilotPlan, dict: &RedundantDictionary, gram_limit: usize) -> Result<CoherenceReport> {
    let op = sensing_with_dictionary(plan, dict)?;
    let bound_tx = total_mutual_coherence(&op.left().view())?;
    let bound_rx = total_mutual_coherence(&op.right().view())?;
    let cols = dict.atoms();
    let total_coherence = match cols.checked_mul(cols) {
        Some(g) if g <= gram_limit => Some(total_mutual_coherence(&op.dense(usize::MAX)?.view())?),
        _ => None,
    };
    Ok(CoherenceReport {
        total_coherence,
        bound_tx,
        bound_rx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_grid, RedundantDictionary};
    use crate::lens_model::build_geometry;
    use crate::linalg::frobenius_sqr;
    use crate::training::build_rf_switches;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gram_minus_identity(b: &Array2<C64>) -> f64 {
        let g = herm(&b.view()).dot(b);
        frobenius_sqr(&(g - Array2::<C64>::eye(b.ncols())).view())
    }

    #[test]
    fn coherence_basic_values() {
        assert_eq!(total_mutual_coherence(&Array2::<C64>::eye(4).view()).unwrap(), 0.0);
        let twin = Array2::from_shape_vec((2, 2), vec![C64::new(1.0, 0.0); 4]).unwrap();
        assert!((total_mutual_coherence(&twin.view()).unwrap() - 2.0).abs() < 1e-14);
        assert!(total_mutual_coherence(&dft_matrix(7).view()).unwrap() < 1e-24);
        let mut z = Array2::<C64>::eye(3);
        z[[2, 2]] = C64::new(0.0, 0.0);
        assert!(matches!(total_mutual_coherence(&z.view()), Err(Error::ZeroColumn(2))));
    }

    #[test]
    fn coherence_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = complex_gaussian(&mut rng, 4, 6);
        let mut scaled = m.clone();
        scaled.column_mut(2).mapv_inplace(|z| z * 9.0);
        let a = total_mutual_coherence(&m.view()).unwrap();
        let b = total_mutual_coherence(&scaled.view()).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn designed_pilots_are_orthonormal() {
        let blocks = design_bb_pilots(4, 2, 3).unwrap();
        assert_eq!(blocks.len(), 3);
        for b in &blocks {
            assert_eq!(b.dim(), (4, 2));
            assert!(gram_minus_identity(b) < 1e-28);
        }
        let full = design_bb_pilots(4, 4, 1).unwrap();
        assert!(gram_minus_identity(&full[0]) < 1e-28);
        assert!(design_bb_pilots(4, 5, 1).is_err());
    }

    #[test]
    fn designed_combiners_are_unitary() {
        for b in design_bb_combiners(4, 2) {
            assert!(gram_minus_identity(&b) < 1e-24);
        }
        let one = design_bb_combiners(1, 1);
        assert!((one[0][[0, 0]] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn random_pilots_are_normalized_and_seeded() {
        let a = random_bb_pilots(4, 3, 2, &mut ChaCha8Rng::seed_from_u64(5));
        let b = random_bb_pilots(4, 3, 2, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        for blk in &a {
            for c in blk.columns() {
                assert!((norm_sqr(&c) - 1.0).abs() < 1e-12);
            }
            assert!(gram_minus_identity(blk).sqrt() > 1e-6);
        }
    }

    #[test]
    fn receive_coherence_is_unitary_invariant() {
        let rx = build_geometry(4.7, 4.7).unwrap();
        let dict = RedundantDictionary::new(&rx, &rx, build_grid(20, 20).unwrap()).unwrap();
        let dims = PlanDims {
            n_t: 64,
            n_r: 64,
            n_t_rf: 4,
            n_r_rf: 4,
            n_t_pilot: 32,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (tx_sw, rx_sw) = build_rf_switches(64, 64, &mut rng);
        let designed = designed_plan(dims, tx_sw.clone(), rx_sw.clone()).unwrap();
        // Random unitary blocks: Gram-Schmidt on Gaussian matrices.
        let unitary: Vec<Array2<C64>> = (0..16)
            .map(|_| {
                let mut q = complex_gaussian(&mut rng, 4, 4);
                for j in 0..4 {
                    for k in 0..j {
                        let qk = q.column(k).to_owned();
                        let c: C64 = qk.iter().zip(q.column(j)).map(|(a, b)| a.conj() * b).sum();
                        q.column_mut(j).scaled_add(-c, &qk);
                    }
                    let n = norm_sqr(&q.column(j)).sqrt();
                    q.column_mut(j).mapv_inplace(|z| z / n);
                }
                q
            })
            .collect();
        let other = PilotPlan::new(dims, tx_sw, rx_sw, designed.f_bb_blocks.clone(), unitary).unwrap();
        let mu = |p: &PilotPlan| {
            let w = herm(&p.combiner().view());
            total_mutual_coherence(&w.dot(&dict.a_r).view()).unwrap()
        };
        assert!((mu(&designed) - mu(&other)).abs() < 1e-9 * mu(&designed));
    }

    #[test]
    fn trace_identity_behind_the_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut fa = complex_gaussian(&mut rng, 5, 12);
        for mut c in fa.columns_mut() {
            let n = norm_sqr(&c.view()).sqrt();
            c.mapv_inplace(|z| z / n);
        }
        let lhs = gram_minus_identity(&fa);
        let outer = fa.dot(&herm(&fa.view()));
        let rhs = frobenius_sqr(&(outer - Array2::<C64>::eye(5)).view()) + (12.0 - 5.0);
        assert!((lhs - rhs).abs() < 1e-10 * lhs);
        assert!((lhs - total_mutual_coherence(&fa.view()).unwrap()).abs() < 1e-10 * lhs);
    }

    #[test]
    fn report_on_orthonormal_toy_satisfies_bound() {
        // Identity dictionaries and a beam sweep: every coherence is zero.
        let dict = RedundantDictionary::antenna_domain(4, 2);
        let (tx, rx) = build_rf_switches(4, 2, &mut ChaCha8Rng::seed_from_u64(0));
        let plan = beam_sweep_plan(4, 2, 2, 1, tx, rx).unwrap();
        let report = coherence_report(&plan, &dict, 1 << 20).unwrap();
        assert_eq!(report.bound_holds(), Some(true));
        assert!(report.total_coherence.unwrap() < 1e-24);
    }

    #[test]
    fn report_skips_dense_total_beyond_budget() {
        let geo = build_geometry(4.7, 4.7).unwrap();
        let dict = RedundantDictionary::new(&geo, &geo, build_grid(20, 20).unwrap()).unwrap();
        let dims = PlanDims {
            n_t: 64,
            n_r: 64,
            n_t_rf: 4,
            n_r_rf: 4,
            n_t_pilot: 32,
        };
        let (tx, rx) = build_rf_switches(64, 64, &mut ChaCha8Rng::seed_from_u64(0));
        let report = coherence_report(&designed_plan(dims, tx, rx).unwrap(), &dict, 1 << 24).unwrap();
        assert!(report.total_coherence.is_none());
        assert!(report.bound_holds().is_none());
        assert!(report.bound_tx > 0.0 && report.bound_rx > 0.0);
    }
}
