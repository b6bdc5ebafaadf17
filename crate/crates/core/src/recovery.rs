//! Sparse recovery: OMP over a Kronecker-structured dictionary, the LS beam
//! sweep baseline and NMSE.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::dictionary::{reconstruct_channel, RedundantDictionary};
use crate::linalg::{inner, norm_sqr, unvec, KroneckerOperator, LinearOperator};
use crate::training::{sensing_operator, sensing_with_dictionary, Observation, PilotPlan};
use crate::{Error, Result, C64};

/// Lowest NMSE reported, in dB; exact recovery would otherwise be `-inf`.
pub const NMSE_FLOOR_DB: f64 = -300.0;

/// Relative threshold below which a new atom is considered linearly dependent
/// on the atoms already selected.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Equal correlation magnitudes resolve to the lowest column index.
    #[default]
    LowestIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub max_atoms: usize,
    /// Stop once `‖r‖ / ‖y‖` drops below this.
    pub residual_tol: f64,
    pub tie_break: TieBreak,
}

impl EstimatorConfig {
    pub const DEFAULT_ATOMS_PER_PATH: usize = 2;
    pub const DEFAULT_RESIDUAL_TOL: f64 = 0.05;

    /// `2·L` atoms, 5% relative residual.
    pub fn for_paths(l_paths: usize) -> Self {
        Self {
            max_atoms: Self::DEFAULT_ATOMS_PER_PATH * l_paths,
            residual_tol: Self::DEFAULT_RESIDUAL_TOL,
            tie_break: TieBreak::LowestIndex,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_atoms == 0 {
            return Err(Error::Config("max_atoms must be at least 1".into()));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(Error::Config("residual_tol must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ZeroObservation,
    SparsityBudget,
    ResidualTolerance,
    /// Every remaining column is either selected or has zero norm.
    Exhausted,
    /// The best atom was numerically dependent on the selected set; it was
    /// dropped.
    RankDeficient,
}

#[derive(Debug, Clone)]
pub struct SparseEstimate {
    /// Selected column indices, in selection order.
    pub support: Vec<usize>,
    pub coefficients: Vec<C64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Residual norm before the first and after every accepted atom.
    pub residual_trajectory: Vec<f64>,
    pub stop: StopReason,
    /// Multiply-accumulates spent in correlation steps.
    pub correlation_macs: u64,
}

/// Growing thin QR of the selected columns via twice-iterated Gram-Schmidt.
struct IncrementalQr {
    q: Vec<Array1<C64>>,
    /// Column `k` of R holds `k + 1` entries.
    r: Vec<Vec<C64>>,
    /// `Qᴴ y`.
    qty: Vec<C64>,
}

impl IncrementalQr {
    fn new() -> Self {
        Self {
            q: Vec::new(),
            r: Vec::new(),
            qty: Vec::new(),
        }
    }

    /// Appends `a`; returns `false` when it is dependent on the current basis.
    fn push(&mut self, a: Array1<C64>, residual: &mut Array1<C64>) -> bool {
        let a_norm = norm_sqr(&a.view()).sqrt();
        let mut v = a;
        let mut coeffs = vec![C64::new(0.0, 0.0); self.q.len() + 1];
        for _ in 0..2 {
            for (k, qk) in self.q.iter().enumerate() {
                let c = inner(&qk.view(), &v.view());
                v.scaled_add(-c, qk);
                coeffs[k] += c;
            }
        }
        let diag = norm_sqr(&v.view()).sqrt();
        if !(diag > RANK_TOL * a_norm) {
            return false;
        }
        v.mapv_inplace(|z| z / diag);
        coeffs[self.q.len()] = C64::new(diag, 0.0);
        let z = inner(&v.view(), &residual.view());
        residual.scaled_add(-z, &v);
        // Re-project once more so the residual stays orthogonal to the whole basis.
        for qk in self.q.iter().chain(std::iter::once(&v)) {
            let c = inner(&qk.view(), &residual.view());
            residual.scaled_add(-c, qk);
        }
        self.q.push(v);
        self.r.push(coeffs);
        self.qty.push(z);
        true
    }

    /// Solves `R x = Qᴴ y` by back substitution.
    fn solve(&self, y: &ArrayView1<C64>) -> Vec<C64> {
        let n = self.q.len();
        let rhs: Vec<C64> = self.q.iter().map(|q| inner(&q.view(), y)).collect();
        let mut x = vec![C64::new(0.0, 0.0); n];
        for i in (0..n).rev() {
            let acc: C64 = (i + 1..n).map(|j| self.r[j][i] * x[j]).sum();
            x[i] = (rhs[i] - acc) / self.r[i][i];
        }
        x
    }
}

/// Orthogonal matching pursuit over `op`, with correlations normalized by the
/// operator's column norms.
pub fn omp(op: &KroneckerOperator, y: &ArrayView1<C64>, cfg: &EstimatorConfig) -> Result<SparseEstimate> {
    cfg.validate()?;
    if y.len() != op.nrows() {
        return Err(Error::dim("omp observation", op.nrows(), y.len()));
    }
    let y_norm = norm_sqr(y).sqrt();
    let mut estimate = SparseEstimate {
        support: Vec::new(),
        coefficients: Vec::new(),
        residual_norm: y_norm,
        iterations: 0,
        residual_trajectory: vec![y_norm],
        stop: StopReason::ZeroObservation,
        correlation_macs: 0,
    };
    if y_norm == 0.0 {
        return Ok(estimate);
    }
    let norms = op.column_norms();
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let usable = |k: usize| norms[k] > 1e-12 * max_norm;
    let n_rx = op.right().ncols();
    let mut selected = vec![false; op.ncols()];
    let mut residual = y.to_owned();
    let mut qr = IncrementalQr::new();
    let limit = cfg.max_atoms.min(op.nrows());

    estimate.stop = loop {
        if estimate.support.len() >= cfg.max_atoms {
            break StopReason::SparsityBudget;
        }
        if estimate.residual_norm < cfg.residual_tol * y_norm {
            break StopReason::ResidualTolerance;
        }
        if estimate.support.len() >= limit {
            break StopReason::Exhausted;
        }
        let corr = op.correlate(&residual.view())?;
        estimate.correlation_macs += op.adjoint_cost();
        let mut best: Option<(usize, f64)> = None;
        for ((i, j), c) in corr.indexed_iter() {
            let k = j * n_rx + i;
            if selected[k] || !usable(k) {
                continue;
            }
            let score = c.norm() / norms[k];
            // Equal scores keep the lower index whatever the scan order.
            match best {
                Some((bk, bs)) if score < bs || (score == bs && k > bk) => {}
                _ => best = Some((k, score)),
            }
        }
        let Some((k, _)) = best else {
            break StopReason::Exhausted;
        };
        if !qr.push(op.column(k), &mut residual) {
            break StopReason::RankDeficient;
        }
        selected[k] = true;
        estimate.support.push(k);
        estimate.iterations += 1;
        estimate.residual_norm = norm_sqr(&residual.view()).sqrt();
        estimate.residual_trajectory.push(estimate.residual_norm);
    };
    estimate.coefficients = qr.solve(y);
    Ok(estimate)
}

/// Well-determined LS: with a beam sweep `Φ` is a permutation, so
/// `Ĥ = unvec(Φᴴ y)`.
pub fn ls_estimate(obs: &Observation, plan: &PilotPlan) -> Result<Array2<C64>> {
    if !plan.is_beam_sweep() {
        return Err(Error::NotWellDetermined(format!(
            "needs N_T^pilot = N_T with identity baseband, got N_T^pilot = {} of {}",
            plan.dims.n_t_pilot, plan.dims.n_t
        )));
    }
    let op = sensing_operator(plan);
    let h = op.apply_adjoint(&obs.y_vec.view())?;
    unvec(&h.view(), plan.dims.n_r, plan.dims.n_t)
}

/// OMP on `ΦΨ` followed by `Ĥ = A_R Ĥ_a A_Tᴴ`.
pub fn estimate_channel(
    obs: &Observation,
    plan: &PilotPlan,
    dict: &RedundantDictionary,
    cfg: &EstimatorConfig,
) -> Result<(Array2<C64>, SparseEstimate)> {
    let op = sensing_with_dictionary(plan, dict)?;
    let sparse = omp(&op, &obs.y_vec.view(), cfg)?;
    let h = reconstruct_channel(dict, &sparse.support, &sparse.coefficients)?;
    Ok((h, sparse))
}

/// `10 log10(‖Ĥ − H‖²_F / ‖H‖²_F)`, floored at [`NMSE_FLOOR_DB`].
pub fn nmse_db(h_hat: &ArrayView2<C64>, h: &ArrayView2<C64>) -> Result<f64> {
    if h_hat.dim() != h.dim() {
        return Err(Error::dim("nmse shapes", h.len(), h_hat.len()));
    }
    let reference: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    if !(reference > 0.0) {
        return Err(Error::ZeroChannel);
    }
    let err: f64 = h_hat.iter().zip(h).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok((10.0 * (err / reference).log10()).max(NMSE_FLOOR_DB))
}
