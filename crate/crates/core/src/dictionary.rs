//! Quantized virtual-angle grids and the redundant lens-array dictionaries.
//!
//! The sparsifier `Ψ = A_T* ⊗ A_R` is only ever exposed as a
//! [`KroneckerOperator`]; at experiment scale it would hold billions of entries.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::lens_model::{steering_vector, ArrayGeometry};
use crate::linalg::{conj, frobenius_sqr, herm, KroneckerOperator, LinearOperator};
use crate::{Error, Result, C64};

/// Uniform grids over the sines of the virtual vertical and horizontal angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    pub g_v: usize,
    pub g_h: usize,
    pub vertical_sines: Vec<f64>,
    pub horizontal_sines: Vec<f64>,
}

fn grid_sines(g: usize) -> Vec<f64> {
    (1..=g).map(|k| -1.0 + (2 * k - 1) as f64 / g as f64).collect()
}

pub fn build_grid(g_v: usize, g_h: usize) -> Result<AngleGrid> {
    if g_v == 0 || g_h == 0 {
        return Err(Error::Config(format!("grid sizes must be positive, got {g_v} x {g_h}")));
    }
    Ok(AngleGrid {
        g_v,
        g_h,
        vertical_sines: grid_sines(g_v),
        horizontal_sines: grid_sines(g_h),
    })
}

impl AngleGrid {
    pub fn len(&self) -> usize {
        self.g_v * self.g_h
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(theta, phi)` of every grid point, vertical-major.
    pub fn angles(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.vertical_sines
            .iter()
            .flat_map(move |&sv| self.horizontal_sines.iter().map(move |&sh| (sv.asin(), sh.asin())))
    }
}

/// Steering vectors at every grid point, one column each, vertical-major.
pub fn build_dictionary(geometry: &ArrayGeometry, grid: &AngleGrid) -> Result<Array2<C64>> {
    let mut a = Array2::zeros((geometry.count(), grid.len()));
    for (k, (theta, phi)) in grid.angles().enumerate() {
        a.column_mut(k).assign(&steering_vector(geometry, theta, phi)?);
    }
    Ok(a)
}

/// Tight-frame diagnostic: `c = Tr(A Aᴴ)/n` and
/// `ε = ‖A Aᴴ − c I‖²_F / ‖A Aᴴ‖²_F`.
pub fn tightness_metric(a: &ArrayView2<C64>, n: usize) -> Result<(f64, f64)> {
    if a.nrows() != n {
        return Err(Error::dim("tightness metric", n, a.nrows()));
    }
    let gram = a.dot(&herm(a));
    let c = gram.diag().iter().map(|z| z.re).sum::<f64>() / n as f64;
    let mut shifted = gram.clone();
    shifted.diag_mut().iter_mut().for_each(|z| *z -= c);
    let total = frobenius_sqr(&gram.view());
    if total == 0.0 {
        return Err(Error::ZeroColumn(0));
    }
    Ok((frobenius_sqr(&shifted.view()) / total, c))
}

/// Transmit and receive dictionaries sharing one grid.
///
/// Sparse angular vectors are indexed `j·G_R + i` for receive atom `i` and
/// transmit atom `j`, i.e. `vec(H_a)` with `H_a` of shape `G_R × G_T`.
#[derive(Debug, Clone)]
pub struct RedundantDictionary {
    pub a_t: Array2<C64>,
    pub a_r: Array2<C64>,
    pub grid: Option<AngleGrid>,
}

impl RedundantDictionary {
    /// Lens dictionaries on `grid`. A single-antenna receiver gets the `1 × 1`
    /// dictionary `[1]`, since every grid column would be identical.
    pub fn new(tx: &ArrayGeometry, rx: &ArrayGeometry, grid: AngleGrid) -> Result<Self> {
        let side = |g: &ArrayGeometry| {
            if g.is_single_antenna() {
                Ok(Array2::from_elem((1, 1), C64::new(1.0, 0.0)))
            } else {
                build_dictionary(g, &grid)
            }
        };
        Ok(Self {
            a_t: side(tx)?,
            a_r: side(rx)?,
            grid: Some(grid),
        })
    }

    /// `Ψ = I`: sparsity assumed directly in the antenna domain.
    pub fn antenna_domain(n_t: usize, n_r: usize) -> Self {
        Self {
            a_t: Array2::eye(n_t),
            a_r: Array2::eye(n_r),
            grid: None,
        }
    }

    pub fn n_t(&self) -> usize {
        self.a_t.nrows()
    }

    pub fn n_r(&self) -> usize {
        self.a_r.nrows()
    }

    pub fn tx_atoms(&self) -> usize {
        self.a_t.ncols()
    }

    pub fn rx_atoms(&self) -> usize {
        self.a_r.ncols()
    }

    /// Length of the angular-domain sparse vector.
    pub fn atoms(&self) -> usize {
        self.tx_atoms() * self.rx_atoms()
    }

    /// `A_T* ⊗ A_R` as a structured operator.
    pub fn sparsifier(&self) -> KroneckerOperator {
        KroneckerOperator::new(conj(&self.a_t.view()), self.a_r.clone())
    }

    /// `(receive atom, transmit atom)` of sparse index `k`.
    pub fn split_index(&self, k: usize) -> (usize, usize) {
        (k % self.rx_atoms(), k / self.rx_atoms())
    }
}

/// `Ψ x = vec(A_R X A_Tᴴ)`.
pub fn apply_sparsifier(dict: &RedundantDictionary, x: &ArrayView1<C64>) -> Result<Array1<C64>> {
    dict.sparsifier().apply(x)
}

/// `Ψᴴ y = vec(A_Rᴴ Y A_T)`.
pub fn adjoint_sparsifier(dict: &RedundantDictionary, y: &ArrayView1<C64>) -> Result<Array1<C64>> {
    dict.sparsifier().apply_adjoint(y)
}

/// `A_R H_a A_Tᴴ` from the nonzero entries of `h_a`, touching only the
/// referenced dictionary columns.
pub fn reconstruct_channel(dict: &RedundantDictionary, support: &[usize], coefficients: &[C64]) -> Result<Array2<C64>> {
    if support.len() != coefficients.len() {
        return Err(Error::dim("reconstruct support", support.len(), coefficients.len()));
    }
    let mut h = Array2::zeros((dict.n_r(), dict.n_t()));
    for (&k, &c) in support.iter().zip(coefficients) {
        if k >= dict.atoms() {
            return Err(Error::dim("reconstruct index bound", dict.atoms(), k));
        }
        let (i, j) = dict.split_index(k);
        let a_r = dict.a_r.column(i);
        let a_t = dict.a_t.column(j);
        for (r, &ar) in a_r.iter().enumerate() {
            let s = c * ar;
            for (t, &at) in a_t.iter().enumerate() {
                h[[r, t]] += s * at.conj();
            }
        }
    }
    Ok(h)
}
