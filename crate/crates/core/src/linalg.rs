//! Small complex linear-algebra kit shared by the operator modules.
//!
//! Vectorization is column-major everywhere, so that
//! `(A ⊗ B) vec(X) = vec(B X Aᵀ)` holds with the natural reshapes.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result, C64};

/// Default element-count ceiling for dense operator materialization.
pub const DENSE_LIMIT: usize = 1 << 22;

/// Conjugate transpose.
pub fn herm(a: &ArrayView2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn conj(a: &ArrayView2<C64>) -> Array2<C64> {
    a.mapv(|z| z.conj())
}

/// Column-major vectorization.
pub fn vec_cols(x: &ArrayView2<C64>) -> Array1<C64> {
    x.t().iter().copied().collect()
}

/// Inverse of [`vec_cols`].
pub fn unvec(v: &ArrayView1<C64>, rows: usize, cols: usize) -> Result<Array2<C64>> {
    if v.len() != rows * cols {
        return Err(Error::dim("unvec", rows * cols, v.len()));
    }
    let data: Vec<C64> = v.iter().copied().collect();
    Ok(Array2::from_shape_vec((rows, cols).f(), data).expect("shape checked"))
}

pub fn norm_sqr(v: &ArrayView1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frobenius_sqr(a: &ArrayView2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `Σ conj(a_k) b_k`.
pub fn inner(a: &ArrayView1<C64>, b: &ArrayView1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn column_norms(a: &ArrayView2<C64>) -> Array1<f64> {
    a.columns().into_iter().map(|c| norm_sqr(&c).sqrt()).collect()
}

/// Dense Kronecker product `a ⊗ b`.
pub fn kron(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for ((i, j), &av) in a.indexed_iter() {
        if av == C64::new(0.0, 0.0) {
            continue;
        }
        for ((k, l), &bv) in b.indexed_iter() {
            out[[i * br + k, j * bc + l]] = av * bv;
        }
    }
    out
}

/// One draw of CN(0, 1).
pub fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<C64> {
    let mut m = Array2::zeros((rows, cols));
    m.iter_mut().for_each(|z| *z = standard_complex(rng));
    m
}

/// A linear map with an adjoint, acting on column-major vectorized inputs.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &ArrayView1<C64>) -> Result<Array1<C64>>;
    fn apply_adjoint(&self, y: &ArrayView1<C64>) -> Result<Array1<C64>>;
}

/// The matrix `left ⊗ right`, never materialized.
///
/// With `left: p × J` and `right: q × I`, column `j·I + i` equals
/// `left[:, j] ⊗ right[:, i]` and `apply(vec(X)) = vec(right · X · leftᵀ)` for
/// `X: I × J`.
#[derive(Debug, Clone)]
pub struct KroneckerOperator {
    left: Array2<C64>,
    right: Array2<C64>,
    left_t: Array2<C64>,
    right_h: Array2<C64>,
    left_conj: Array2<C64>,
}

impl KroneckerOperator {
    pub fn new(left: Array2<C64>, right: Array2<C64>) -> Self {
        let left_t = left.t().to_owned();
        let right_h = herm(&right.view());
        let left_conj = conj(&left.view());
        Self {
            left,
            right,
            left_t,
            right_h,
            left_conj,
        }
    }

    pub fn left(&self) -> &Array2<C64> {
        &self.left
    }

    pub fn right(&self) -> &Array2<C64> {
        &self.right
    }

    /// Splits a column index into `(right column i, left column j)`.
    pub fn split_index(&self, k: usize) -> (usize, usize) {
        let n = self.right.ncols();
        (k % n, k / n)
    }

    pub fn column(&self, k: usize) -> Array1<C64> {
        let (i, j) = self.split_index(k);
        let q = self.right.nrows();
        let mut out = Array1::zeros(self.nrows());
        for (m, &lv) in self.left.column(j).iter().enumerate() {
            for (r, &rv) in self.right.column(i).iter().enumerate() {
                out[m * q + r] = lv * rv;
            }
        }
        out
    }

    /// Norms of every column, indexed like the operator columns.
    pub fn column_norms(&self) -> Array1<f64> {
        let nl = column_norms(&self.left.view());
        let nr = column_norms(&self.right.view());
        let mut out = Array1::zeros(self.ncols());
        for (j, &a) in nl.iter().enumerate() {
            for (i, &b) in nr.iter().enumerate() {
                out[j * nr.len() + i] = a * b;
            }
        }
        out
    }

    /// `rightᴴ · R · left*` for the `q × p` reshape `R` of `y`: the adjoint
    /// product laid out as an `I × J` matrix.
    pub fn correlate(&self, y: &ArrayView1<C64>) -> Result<Array2<C64>> {
        if y.len() != self.nrows() {
            return Err(Error::dim("kronecker adjoint", self.nrows(), y.len()));
        }
        let r = unvec(y, self.right.nrows(), self.left.nrows())?;
        Ok(self.right_h.dot(&r).dot(&self.left_conj))
    }

    /// Multiply-accumulate count of one [`correlate`](Self::correlate) call.
    pub fn adjoint_cost(&self) -> u64 {
        let (p, j) = self.left.dim();
        let (q, i) = self.right.dim();
        (i * q * p + i * p * j) as u64
    }

    /// Dense `left ⊗ right`, refused above `limit` elements.
    pub fn dense(&self, limit: usize) -> Result<Array2<C64>> {
        let elements = self.nrows() * self.ncols();
        if elements > limit {
            return Err(Error::TooLarge { elements, limit });
        }
        Ok(kron(&self.left.view(), &self.right.view()))
    }
}

impl LinearOperator for KroneckerOperator {
    fn nrows(&self) -> usize {
        self.left.nrows() * self.right.nrows()
    }

    fn ncols(&self) -> usize {
        self.left.ncols() * self.right.ncols()
    }

    fn apply(&self, x: &ArrayView1<C64>) -> Result<Array1<C64>> {
        if x.len() != self.ncols() {
            return Err(Error::dim("kronecker forward", self.ncols(), x.len()));
        }
        let xm = unvec(x, self.right.ncols(), self.left.ncols())?;
        Ok(vec_cols(&self.right.dot(&xm).dot(&self.left_t).view()))
    }

    fn apply_adjoint(&self, y: &ArrayView1<C64>) -> Result<Array1<C64>> {
        Ok(vec_cols(&self.correlate(y)?.view()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &ArrayView1<C64>, b: &ArrayView1<C64>) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        (diff / norm_sqr(b).max(1e-300)).sqrt()
    }

    #[test]
    fn vec_roundtrip_is_column_major() {
        let x = Array2::from_shape_fn((2, 3), |(i, j)| C64::new((i + 10 * j) as f64, 0.0));
        let v = vec_cols(&x.view());
        assert_eq!(v[1].re, 1.0);
        assert_eq!(v[2].re, 10.0);
        assert_eq!(unvec(&v.view(), 2, 3).unwrap(), x);
    }

    #[test]
    fn structured_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let op = KroneckerOperator::new(complex_gaussian(&mut rng, 3, 5), complex_gaussian(&mut rng, 2, 4));
        let dense = op.dense(DENSE_LIMIT).unwrap();
        let x = complex_gaussian(&mut rng, 20, 1).column(0).to_owned();
        let y = complex_gaussian(&mut rng, 6, 1).column(0).to_owned();
        assert!(rel_err(&op.apply(&x.view()).unwrap().view(), &dense.dot(&x).view()) < 1e-12);
        let dh = herm(&dense.view());
        assert!(rel_err(&op.apply_adjoint(&y.view()).unwrap().view(), &dh.dot(&y).view()) < 1e-12);
        for k in [0, 7, 19] {
            assert!(rel_err(&op.column(k).view(), &dense.column(k)) < 1e-14);
            let n = norm_sqr(&dense.column(k)).sqrt();
            assert!((op.column_norms()[k] - n).abs() < 1e-12 * n);
        }
    }

    #[test]
    fn dense_limit_is_enforced() {
        let op = KroneckerOperator::new(Array2::zeros((4, 4)), Array2::zeros((4, 4)));
        assert!(matches!(op.dense(100), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn wrong_length_is_rejected() {
        let op = KroneckerOperator::new(Array2::zeros((2, 3)), Array2::zeros((2, 2)));
        let x = Array1::zeros(5);
        assert!(matches!(op.apply(&x.view()), Err(Error::Dimension { .. })));
        assert!(matches!(op.apply_adjoint(&x.view()), Err(Error::Dimension { .. })));
    }
}
