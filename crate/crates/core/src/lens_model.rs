//! Lens-array geometry, steering vectors and multipath channel synthesis.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::{FRAC_PI_2, PI};
use std::hash::{Hash, Hasher};

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::linalg::standard_complex;
use crate::{Error, Result, C64};

/// Position of one antenna on the focal surface.
///
/// `v_index` is a half-integer row index and `h_index` an integer column index;
/// the angular coordinates satisfy `sin(alpha) = v_index / D_v` and
/// `sin(beta)·cos(alpha) = h_index / D_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaCoordinate {
    pub v_index: f64,
    pub h_index: i64,
    pub alpha: f64,
    pub beta: f64,
}

/// Focal-surface antenna layout of one lens array.
///
/// Antennas are ordered row-major: vertical index ascending, then horizontal
/// index ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    aperture_h: f64,
    aperture_v: f64,
    antennas: Vec<AntennaCoordinate>,
}

/// Number of antennas in each vertical row, straight from the summation form.
pub fn antenna_count(aperture_h: f64, aperture_v: f64) -> usize {
    let rows = aperture_v.floor() as i64;
    (-rows..rows)
        .map(|k| {
            let n = k as f64 + 0.5;
            let cos_alpha = (n / aperture_v).asin().cos();
            2 * (aperture_h * cos_alpha).floor() as usize + 1
        })
        .sum()
}

impl ArrayGeometry {
    pub fn aperture_h(&self) -> f64 {
        self.aperture_h
    }

    pub fn aperture_v(&self) -> f64 {
        self.aperture_v
    }

    pub fn antennas(&self) -> &[AntennaCoordinate] {
        &self.antennas
    }

    pub fn count(&self) -> usize {
        self.antennas.len()
    }

    /// A single omnidirectional antenna (a user terminal without a lens).
    ///
    /// Both apertures are zero, so the steering vector is the constant `[1]`.
    pub fn single_antenna() -> Self {
        Self {
            aperture_h: 0.0,
            aperture_v: 0.0,
            antennas: vec![AntennaCoordinate {
                v_index: 0.0,
                h_index: 0,
                alpha: 0.0,
                beta: 0.0,
            }],
        }
    }

    pub fn is_single_antenna(&self) -> bool {
        self.aperture_h == 0.0 && self.aperture_v == 0.0
    }
}

/// Builds the antenna layout for normalized apertures `D_h × D_v`.
pub fn build_geometry(aperture_h: f64, aperture_v: f64) -> Result<ArrayGeometry> {
    if !(aperture_h >= 1.0 && aperture_v >= 1.0) || !aperture_h.is_finite() || !aperture_v.is_finite() {
        return Err(Error::Config(format!(
            "lens apertures must be finite and at least 1, got {aperture_h} x {aperture_v}"
        )));
    }
    let rows = aperture_v.floor() as i64;
    let mut antennas = Vec::new();
    for k in -rows..rows {
        let v_index = k as f64 + 0.5;
        let alpha = (v_index / aperture_v).asin();
        let cos_alpha = alpha.cos();
        let half = (aperture_h * cos_alpha).floor() as i64;
        for h_index in -half..=half {
            let beta = (h_index as f64 / (aperture_h * cos_alpha)).clamp(-1.0, 1.0).asin();
            antennas.push(AntennaCoordinate {
                v_index,
                h_index,
                alpha,
                beta,
            });
        }
    }
    Ok(ArrayGeometry {
        aperture_h,
        aperture_v,
        antennas,
    })
}

/// `sin(πx)/(πx)` with the removable singularity at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn check_angle(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value.abs() <= FRAC_PI_2 + 1e-12 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {value} is outside [-pi/2, pi/2]")))
    }
}

/// Unit-norm lens steering vector towards vertical angle `theta` and
/// horizontal angle `phi`.
///
/// Entries are real sinc products; they are stored as complex numbers so all
/// downstream operators share one numeric kernel.
pub fn steering_vector(geometry: &ArrayGeometry, theta: f64, phi: f64) -> Result<Array1<C64>> {
    check_angle("theta", theta)?;
    check_angle("phi", phi)?;
    let (dh, dv) = (geometry.aperture_h, geometry.aperture_v);
    let target_v = theta.sin();
    let target_h = theta.cos() * phi.sin();
    let raw: Vec<f64> = geometry
        .antennas
        .iter()
        .map(|a| sinc(dv * (a.alpha.sin() - target_v)) * sinc(dh * (a.beta.sin() * a.alpha.cos() - target_h)))
        .collect();
    let energy: f64 = raw.iter().map(|x| x * x).sum();
    if !(energy > 0.0) {
        return Err(Error::DegenerateAngle { theta, phi });
    }
    let gamma = energy.sqrt().recip();
    Ok(raw.into_iter().map(|x| C64::new(gamma * x, 0.0)).collect())
}

/// One multipath component: complex gain plus departure/arrival angle pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: C64,
    pub aod_v: f64,
    pub aod_h: f64,
    pub aoa_v: f64,
    pub aoa_h: f64,
}

/// Draws `l` paths with CN(0,1) gains and angles uniform on `[-π/2, π/2]`.
pub fn sample_paths<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<Vec<PathComponent>> {
    if l == 0 {
        return Err(Error::Config("number of paths must be at least 1".into()));
    }
    Ok((0..l)
        .map(|_| {
            let gain = standard_complex(rng);
            let mut angle = || rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
            PathComponent {
                gain,
                aod_v: angle(),
                aod_h: angle(),
                aoa_v: angle(),
                aoa_h: angle(),
            }
        })
        .collect())
}

/// Paths together with the `N_R × N_T` channel matrix they induce.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub paths: Vec<PathComponent>,
    pub matrix: Array2<C64>,
}

impl ChannelRealization {
    /// Hash of the matrix bit pattern, used to check paired trials.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = DefaultHasher::new();
        self.matrix.dim().hash(&mut hasher);
        for z in &self.matrix {
            z.re.to_bits().hash(&mut hasher);
            z.im.to_bits().hash(&mut hasher);
        }
        hasher.finish()
    }
}

/// `H = sqrt(N_T N_R / L) Σ g_l a_R(aoa_l) a_T(aod_l)ᴴ`.
pub fn synthesize_channel(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    paths: &[PathComponent],
) -> Result<ChannelRealization> {
    if paths.is_empty() {
        return Err(Error::Config("channel needs at least one path".into()));
    }
    let (nt, nr) = (tx.count(), rx.count());
    let scale = ((nt * nr) as f64 / paths.len() as f64).sqrt();
    let mut matrix = Array2::<C64>::zeros((nr, nt));
    for p in paths {
        let a_t = steering_vector(tx, p.aod_v, p.aod_h)?;
        let a_r = steering_vector(rx, p.aoa_v, p.aoa_h)?;
        let g = p.gain * scale;
        for (r, &ar) in a_r.iter().enumerate() {
            let row_gain = g * ar;
            for (t, &at) in a_t.iter().enumerate() {
                matrix[[r, t]] += row_gain * at.conj();
            }
        }
    }
    Ok(ChannelRealization {
        paths: paths.to_vec(),
        matrix,
    })
}
