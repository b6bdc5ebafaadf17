//! Block/slot pilot training under the antenna-switching constraint.
//!
//! Transmit time block `m` sends `s_m = F_RF^p f_BB^m` through the `p`-th Tx
//! group; within each block the receiver cycles through its `N_R / N_R^RF`
//! Rx groups, one slot each. Stacking all slots yields
//! `Y = Wᴴ H F + N̄` with `F = F_RF F_BB` and `W = W_RF W_BB`, so
//! `vec(Y) = (Fᵀ ⊗ Wᴴ) vec(H) + vec(N̄)`.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::dictionary::RedundantDictionary;
use crate::lens_model::ChannelRealization;
use crate::linalg::{conj, frobenius_sqr, herm, norm_sqr, standard_complex, vec_cols, KroneckerOperator};
use crate::{Error, Result, C64};

/// Array sizes, RF chain counts and pilot budget of one training run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanDims {
    pub n_t: usize,
    pub n_r: usize,
    pub n_t_rf: usize,
    pub n_r_rf: usize,
    pub n_t_pilot: usize,
}

impl PlanDims {
    pub fn validate(&self) -> Result<()> {
        let PlanDims {
            n_t,
            n_r,
            n_t_rf,
            n_r_rf,
            n_t_pilot,
        } = *self;
        if n_t == 0 || n_r == 0 || n_t_rf == 0 || n_r_rf == 0 || n_t_pilot == 0 {
            return Err(Error::Config(format!("all plan sizes must be positive: {self:?}")));
        }
        if n_t % n_t_rf != 0 {
            return Err(Error::Config(format!(
                "N_T = {n_t} is not a multiple of N_T^RF = {n_t_rf}"
            )));
        }
        if n_r % n_r_rf != 0 {
            return Err(Error::Config(format!(
                "N_R = {n_r} is not a multiple of N_R^RF = {n_r_rf}"
            )));
        }
        let groups = n_t / n_t_rf;
        if n_t_pilot % groups != 0 {
            return Err(Error::Config(format!(
                "pilot budget {n_t_pilot} is not a multiple of the {groups} Tx groups"
            )));
        }
        if n_t_pilot > n_t {
            return Err(Error::Config(format!("pilot budget {n_t_pilot} exceeds N_T = {n_t}")));
        }
        Ok(())
    }

    pub fn n_t_group(&self) -> usize {
        self.n_t / self.n_t_rf
    }

    pub fn n_r_group(&self) -> usize {
        self.n_r / self.n_r_rf
    }

    /// Pilot blocks sharing one Tx group.
    pub fn cols_per_group(&self) -> usize {
        self.n_t_pilot / self.n_t_group()
    }
}

/// RF switch permutations plus block-diagonal baseband pilots and combiners.
///
/// `tx_switch[c]` is the antenna wired to column `c` of `F_RF`; the `p`-th Tx
/// group is columns `p·N_T^RF .. (p+1)·N_T^RF`. Receive side likewise.
#[derive(Debug, Clone)]
pub struct PilotPlan {
    pub dims: PlanDims,
    pub tx_switch: Vec<usize>,
    pub rx_switch: Vec<usize>,
    pub f_bb_blocks: Vec<Array2<C64>>,
    pub w_bb_blocks: Vec<Array2<C64>>,
}

fn check_permutation(perm: &[usize], n: usize, what: &'static str) -> Result<()> {
    if perm.len() != n {
        return Err(Error::dim(what, n, perm.len()));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Config(format!("{what} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

fn check_blocks(blocks: &[Array2<C64>], count: usize, shape: (usize, usize), what: &'static str) -> Result<()> {
    if blocks.len() != count {
        return Err(Error::dim(what, count, blocks.len()));
    }
    for b in blocks {
        if b.dim() != shape {
            return Err(Error::Config(format!(
                "{what}: block shape {:?}, expected {shape:?}",
                b.dim()
            )));
        }
        for c in b.columns() {
            if (norm_sqr(&c) - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("{what}: columns must have unit norm")));
            }
        }
    }
    Ok(())
}

impl PilotPlan {
    pub fn new(
        dims: PlanDims,
        tx_switch: Vec<usize>,
        rx_switch: Vec<usize>,
        f_bb_blocks: Vec<Array2<C64>>,
        w_bb_blocks: Vec<Array2<C64>>,
    ) -> Result<Self> {
        dims.validate()?;
        check_permutation(&tx_switch, dims.n_t, "tx switch")?;
        check_permutation(&rx_switch, dims.n_r, "rx switch")?;
        check_blocks(
            &f_bb_blocks,
            dims.n_t_group(),
            (dims.n_t_rf, dims.cols_per_group()),
            "transmit BB blocks",
        )?;
        check_blocks(
            &w_bb_blocks,
            dims.n_r_group(),
            (dims.n_r_rf, dims.n_r_rf),
            "receive BB blocks",
        )?;
        Ok(Self {
            dims,
            tx_switch,
            rx_switch,
            f_bb_blocks,
            w_bb_blocks,
        })
    }

    /// `F = F_RF F_BB`, shape `N_T × N_T^pilot`.
    pub fn precoder(&self) -> Array2<C64> {
        let d = self.dims;
        let cpg = d.cols_per_group();
        let mut f = Array2::zeros((d.n_t, d.n_t_pilot));
        for (p, block) in self.f_bb_blocks.iter().enumerate() {
            for ((k, q), &v) in block.indexed_iter() {
                f[[self.tx_switch[p * d.n_t_rf + k], p * cpg + q]] = v;
            }
        }
        f
    }

    /// `W = W_RF W_BB`, shape `N_R × N_R`.
    pub fn combiner(&self) -> Array2<C64> {
        let d = self.dims;
        let mut w = Array2::zeros((d.n_r, d.n_r));
        for (n, block) in self.w_bb_blocks.iter().enumerate() {
            for ((k, l), &v) in block.indexed_iter() {
                w[[self.rx_switch[n * d.n_r_rf + k], n * d.n_r_rf + l]] = v;
            }
        }
        w
    }

    /// Permuted identity `F_RF` (1 = switch on).
    pub fn tx_switch_matrix(&self) -> Array2<C64> {
        permutation_matrix(&self.tx_switch)
    }

    pub fn rx_switch_matrix(&self) -> Array2<C64> {
        permutation_matrix(&self.rx_switch)
    }

    /// Full pilot budget with identity baseband on both sides: the conventional
    /// beam sweep whose measurement matrix is a permutation.
    pub fn is_beam_sweep(&self) -> bool {
        let identity = |b: &Array2<C64>| {
            b.indexed_iter().all(|((i, j), &v)| {
                let want = if i == j { 1.0 } else { 0.0 };
                (v - C64::new(want, 0.0)).norm() < 1e-12
            })
        };
        self.dims.n_t_pilot == self.dims.n_t
            && self.f_bb_blocks.iter().all(identity)
            && self.w_bb_blocks.iter().all(identity)
    }

    /// Transmit block `m` (0-based) is served by Tx group
    /// `⌈(m+1)·N_T^group / N_T^pilot⌉ − 1`.
    pub fn tx_group_of_block(&self, m: usize) -> usize {
        let d = self.dims;
        ((m + 1) * d.n_t_group()).div_ceil(d.n_t_pilot) - 1
    }
}

fn permutation_matrix(perm: &[usize]) -> Array2<C64> {
    let mut m = Array2::zeros((perm.len(), perm.len()));
    for (c, &r) in perm.iter().enumerate() {
        m[[r, c]] = C64::new(1.0, 0.0);
    }
    m
}

/// Uniformly random Tx and Rx switch permutations.
pub fn build_rf_switches<R: Rng + ?Sized>(n_t: usize, n_r: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut tx: Vec<usize> = (0..n_t).collect();
    let mut rx: Vec<usize> = (0..n_r).collect();
    tx.shuffle(rng);
    rx.shuffle(rng);
    (tx, rx)
}

/// Collected pilot observations.
#[derive(Debug, Clone)]
pub struct Observation {
    /// `N_R × N_T^pilot`.
    pub y_matrix: Array2<C64>,
    /// Column-major `vec(Y)`.
    pub y_vec: Array1<C64>,
    pub noise_sigma2: f64,
}

/// Runs the training protocol slot by slot, drawing fresh `CN(0, σ² I)`
/// receiver noise for every (block, slot) pair.
pub fn simulate_training<R: Rng + ?Sized>(
    h: &ChannelRealization,
    plan: &PilotPlan,
    sigma2: f64,
    rng: &mut R,
) -> Result<Observation> {
    let d = plan.dims;
    let (nr, nt) = h.matrix.dim();
    if nt != d.n_t {
        return Err(Error::dim("channel columns vs N_T", d.n_t, nt));
    }
    if nr != d.n_r {
        return Err(Error::dim("channel rows vs N_R", d.n_r, nr));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::Config(format!(
            "noise variance must be non-negative, got {sigma2}"
        )));
    }
    let sigma = sigma2.sqrt();
    let cpg = d.cols_per_group();
    let mut y = Array2::zeros((d.n_r, d.n_t_pilot));
    let mut received = Array1::<C64>::zeros(d.n_r);
    for m in 0..d.n_t_pilot {
        let p = plan.tx_group_of_block(m);
        let block = &plan.f_bb_blocks[p];
        let q = m - p * cpg;
        // H s_m, where s_m only excites the N_T^RF antennas of group p.
        let mut hs = Array1::<C64>::zeros(d.n_r);
        for k in 0..d.n_t_rf {
            let antenna = plan.tx_switch[p * d.n_t_rf + k];
            let coeff = block[[k, q]];
            hs.scaled_add(coeff, &h.matrix.column(antenna));
        }
        for (n, w_block) in plan.w_bb_blocks.iter().enumerate() {
            for (slot, value) in received.iter_mut().zip(hs.iter()) {
                *slot = value + standard_complex(rng) * sigma;
            }
            for l in 0..d.n_r_rf {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d.n_r_rf {
                    acc += w_block[[k, l]].conj() * received[plan.rx_switch[n * d.n_r_rf + k]];
                }
                y[[n * d.n_r_rf + l, m]] = acc;
            }
        }
    }
    let y_vec = vec_cols(&y.view());
    Ok(Observation {
        y_matrix: y,
        y_vec,
        noise_sigma2: sigma2,
    })
}

/// `Φ = Fᵀ ⊗ Wᴴ` as a structured operator.
pub fn sensing_operator(plan: &PilotPlan) -> KroneckerOperator {
    KroneckerOperator::new(plan.precoder().t().to_owned(), herm(&plan.combiner().view()))
}

/// `ΦΨ = (Fᵀ A_T*) ⊗ (Wᴴ A_R)`.
pub fn sensing_with_dictionary(plan: &PilotPlan, dict: &RedundantDictionary) -> Result<KroneckerOperator> {
    if dict.n_t() != plan.dims.n_t {
        return Err(Error::dim("dictionary rows vs N_T", plan.dims.n_t, dict.n_t()));
    }
    if dict.n_r() != plan.dims.n_r {
        return Err(Error::dim("dictionary rows vs N_R", plan.dims.n_r, dict.n_r()));
    }
    let left = plan.precoder().t().dot(&conj(&dict.a_t.view()));
    let right = herm(&plan.combiner().view()).dot(&dict.a_r);
    Ok(KroneckerOperator::new(left, right))
}

/// Noise variance giving `snr_db` relative to the mean noiseless energy per
/// received pilot sample, `‖Wᴴ H F‖²_F / (N_R N_T^pilot)`.
pub fn calibrate_noise(h: &ChannelRealization, plan: &PilotPlan, snr_db: f64) -> Result<f64> {
    let d = plan.dims;
    if h.matrix.dim() != (d.n_r, d.n_t) {
        return Err(Error::dim("channel size vs plan", d.n_r * d.n_t, h.matrix.len()));
    }
    let observed = herm(&plan.combiner().view()).dot(&h.matrix).dot(&plan.precoder());
    let energy = frobenius_sqr(&observed.view()) / (d.n_r * d.n_t_pilot) as f64;
    if !(energy > 0.0) {
        return Err(Error::DegenerateChannel);
    }
    Ok(energy / 10f64.powf(snr_db / 10.0))
}
