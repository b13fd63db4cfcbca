//! Hybrid beamforming: DFT-codebook analog stage, regularized-ZF digital
//! stage, and the power scaling that makes every serving satellite radiate
//! exactly its budget.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::ArrayConfig;
use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;

/// 2D DFT codebook `D = D_x kron D_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub matrix: CMatrix,
    pub n_x: usize,
    pub n_y: usize,
}

impl Codebook {
    pub fn size(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn codeword(&self, k: usize) -> Vec<C64> {
        self.matrix.column(k).iter().copied().collect()
    }
}

fn dft(n: usize) -> CMatrix {
    let scale = (n as f64).sqrt().recip();
    CMatrix::from_fn(n, n, |p, k| {
        let ph = -2.0 * std::f64::consts::PI * ((p * k) % n) as f64 / n as f64;
        C64::from_polar(scale, ph)
    })
}

pub fn build_codebook(array: &ArrayConfig) -> Codebook {
    Codebook {
        matrix: dft(array.n_x).kronecker(&dft(array.n_y)),
        n_x: array.n_x,
        n_y: array.n_y,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBeamVector {
    pub entries: Vec<C64>,
    /// Selected codeword columns, best first.
    pub indices: Vec<usize>,
    /// Least-squares combination coefficients, aligned with `indices`.
    pub coefficients: Vec<C64>,
    /// Entries whose combined amplitude was zero and got phase 0.
    pub degenerate_entries: usize,
}

/// `h^H x`
pub fn inner(h: &[C64], x: &[C64]) -> C64 {
    h.iter().zip(x).map(|(a, b)| a.conj() * b).sum()
}

/// Codeword selection scores `|h^H D_{:,k}|^2`.
pub fn codeword_scores(h: &[C64], cb: &Codebook) -> Vec<f64> {
    (0..cb.size())
        .map(|k| {
            let col = cb.matrix.column(k);
            h.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
        })
        .collect()
}

/// Codebook-based analog beam: combine the `k` best codewords by least
/// squares, then project onto the equal-amplitude set.
pub fn analog_beamform(h: &[C64], cb: &Codebook, k: usize) -> Result<AnalogBeamVector> {
    let n = cb.size();
    if h.len() != n {
        return Err(Error::Dimension(format!("channel has {} entries, codebook {}", h.len(), n)));
    }
    if k == 0 || k > n {
        return Err(Error::Dimension(format!("codeword count {k} outside 1..={n}")));
    }
    let scores = codeword_scores(h, cb);
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the lower index first on ties
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let indices: Vec<usize> = order[..k].to_vec();

    // Columns of D are orthonormal, so the pseudo-inverse is D_K^H.
    let coefficients: Vec<C64> = indices
        .iter()
        .map(|&c| cb.matrix.column(c).iter().zip(h).map(|(d, hi)| d.conj() * hi).sum())
        .collect();

    let mut combined = vec![C64::new(0.0, 0.0); n];
    for (&c, &x) in indices.iter().zip(&coefficients) {
        for (w, d) in combined.iter_mut().zip(cb.matrix.column(c).iter()) {
            *w += d * x;
        }
    }

    let amp = (n as f64).sqrt().recip();
    let mut degenerate_entries = 0;
    let entries = combined
        .iter()
        .map(|w| {
            let m = w.norm();
            if m > 0.0 && m.is_finite() {
                w * (amp / m)
            } else {
                degenerate_entries += 1;
                C64::new(amp, 0.0)
            }
        })
        .collect();

    Ok(AnalogBeamVector {
        entries,
        indices,
        coefficients,
        degenerate_entries,
    })
}

/// Stacks vectors as matrix columns.
pub fn columns(vectors: &[&[C64]]) -> CMatrix {
    let rows = vectors.first().map_or(0, |v| v.len());
    CMatrix::from_fn(rows, vectors.len(), |i, j| vectors[j][i])
}

/// Stacks channel vectors as the rows `h^H` of `H_s`.
pub fn channel_matrix(channels: &[&[C64]]) -> CMatrix {
    let cols = channels.first().map_or(0, |v| v.len());
    CMatrix::from_fn(channels.len(), cols, |i, j| channels[i][j].conj())
}

/// `H_s F_A`.
pub fn generalized_channel(h_s: &CMatrix, f_a: &CMatrix) -> Result<CMatrix> {
    if h_s.ncols() != f_a.nrows() {
        return Err(Error::Dimension(format!(
            "H_s is {}x{}, F_A is {}x{}",
            h_s.nrows(),
            h_s.ncols(),
            f_a.nrows(),
            f_a.ncols()
        )));
    }
    Ok(h_s * f_a)
}

/// Regularization choice for the digital stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    /// `beta = N_u^s * sigma^2 / P_T`.
    #[default]
    Optimal,
    Fixed(f64),
}

impl Regularization {
    pub fn beta(&self, users: usize, tx_power: f64, noise_power: f64) -> f64 {
        match *self {
            Regularization::Optimal => users as f64 * noise_power / tx_power,
            Regularization::Fixed(b) => b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalMatrix {
    /// Unscaled `H~^H (H~ H~^H + beta I)^-1`; the power factor lives in
    /// [`HybridMatrix::eta`].
    pub matrix: CMatrix,
    pub beta: f64,
}

pub fn regularized_zf(h_tilde: &CMatrix, beta: f64) -> Result<DigitalMatrix> {
    if !h_tilde.is_square() {
        return Err(Error::Dimension(format!(
            "generalized channel must be square, got {}x{}",
            h_tilde.nrows(),
            h_tilde.ncols()
        )));
    }
    let n = h_tilde.nrows();
    let hh = h_tilde.adjoint();
    let gram = h_tilde * &hh + CMatrix::identity(n, n) * C64::new(beta, 0.0);
    let matrix = match gram.clone().try_inverse() {
        Some(inv) if inv.iter().all(|z| z.is_finite()) => hh * inv,
        _ => h_tilde
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Dimension(e.to_string()))?,
    };
    Ok(DigitalMatrix { matrix, beta })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridMatrix {
    /// `N x N_u^s`, one column per served GU.
    pub matrix: CMatrix,
    /// Power scaling factor applied to the raw product.
    pub eta: f64,
}

impl HybridMatrix {
    pub fn total_power(&self) -> f64 {
        self.matrix.norm_squared()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.matrix.column(j).iter().copied().collect()
    }
}

/// `F_A F_D` rescaled so that the column powers sum to `tx_power`.
pub fn hybrid_combine(f_a: &CMatrix, f_d: &DigitalMatrix, tx_power: f64) -> Result<HybridMatrix> {
    if f_a.ncols() != f_d.matrix.nrows() {
        return Err(Error::Dimension(format!(
            "F_A has {} columns, F_D {} rows",
            f_a.ncols(),
            f_d.matrix.nrows()
        )));
    }
    let raw = f_a * &f_d.matrix;
    let p = raw.norm_squared();
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::ZeroBeam);
    }
    let eta = tx_power / p;
    Ok(HybridMatrix {
        matrix: raw * C64::new(eta.sqrt(), 0.0),
        eta,
    })
}

/// Equal power per analog beam: every column scaled by `sqrt(P_T / N_u^s)`.
pub fn analog_power_scale(f_a: &CMatrix, tx_power: f64) -> Result<HybridMatrix> {
    let users = f_a.ncols();
    if users == 0 {
        return Err(Error::NoServedUsers);
    }
    let col_norms: Vec<f64> = (0..users).map(|j| f_a.column(j).norm()).collect();
    if col_norms.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::ZeroBeam);
    }
    let per_beam = (tx_power / users as f64).sqrt();
    let matrix = CMatrix::from_fn(f_a.nrows(), users, |i, j| f_a[(i, j)] * (per_beam / col_norms[j]));
    Ok(HybridMatrix { matrix, eta: 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn array(nx: usize, ny: usize) -> ArrayConfig {
        ArrayConfig {
            n_x: nx,
            n_y: ny,
            ..ArrayConfig::default()
        }
    }

    fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect()
    }

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
    }

    #[test]
    fn trivial_codebooks() {
        let d = build_codebook(&array(1, 1));
        assert_eq!(d.matrix, CMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
        let d = build_codebook(&array(2, 1));
        let s = 0.5f64.sqrt();
        let expect = [[s, s], [s, -s]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((d.matrix[(i, j)] - C64::new(expect[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn codebook_unitary_64() {
        let d = build_codebook(&array(8, 8));
        let err = (d.matrix.adjoint() * &d.matrix - CMatrix::identity(64, 64)).camax();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn codebook_matches_steering_grid() {
        // Codeword (kx, ky) is the steering vector with direction cosines 2k/N.
        let arr = array(4, 2);
        let d = build_codebook(&arr);
        let (kx, ky) = (1usize, 1usize);
        let (u, v) = (2.0 * kx as f64 / 4.0, 2.0 * ky as f64 / 2.0);
        let a: Vec<C64> = (0..4)
            .flat_map(|p| (0..2).map(move |q| (p, q)))
            .map(|(p, q)| C64::from_polar(8f64.sqrt().recip(), -std::f64::consts::PI * (p as f64 * u + q as f64 * v)))
            .collect();
        let col = d.codeword(kx * 2 + ky);
        for (x, y) in col.iter().zip(&a) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn aligned_channel_gets_full_gain() {
        let cb = build_codebook(&array(8, 8));
        let h = cb.codeword(19);
        let w = analog_beamform(&h, &cb, 4).unwrap();
        assert_eq!(w.indices[0], 19);
        assert!((w.coefficients[0].norm() - 1.0).abs() < 1e-12);
        assert!(w.coefficients[1..].iter().all(|c| c.norm() < 1e-12));
        assert_relative_eq!(inner(&h, &w.entries).norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn full_basis_reconstructs_channel() {
        let cb = build_codebook(&array(4, 4));
        let mut rng = substream(5, 0);
        let h = random_vec(&mut rng, 16);
        let w = analog_beamform(&h, &cb, 16).unwrap();
        let mut recon = vec![C64::new(0.0, 0.0); 16];
        for (&c, &x) in w.indices.iter().zip(&w.coefficients) {
            for (r, d) in recon.iter_mut().zip(cb.codeword(c)) {
                *r += d * x;
            }
        }
        for (r, hi) in recon.iter().zip(&h) {
            assert!((r - hi).norm() < 1e-10);
        }
    }

    #[test]
    fn residual_orthogonal_to_selection() {
        let cb = build_codebook(&array(8, 8));
        let mut rng = substream(6, 0);
        let h = random_vec(&mut rng, 64);
        let w = analog_beamform(&h, &cb, 4).unwrap();
        let mut resid = h.clone();
        for (&c, &x) in w.indices.iter().zip(&w.coefficients) {
            for (r, d) in resid.iter_mut().zip(cb.codeword(c)) {
                *r -= d * x;
            }
        }
        for &c in &w.indices {
            assert!(inner(&cb.codeword(c), &resid).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_channel_is_degenerate_but_defined() {
        let cb = build_codebook(&array(2, 2));
        let w = analog_beamform(&[C64::new(0.0, 0.0); 4], &cb, 1).unwrap();
        assert_eq!(w.indices, vec![0]);
        assert_eq!(w.degenerate_entries, 4);
        assert!(w.entries.iter().all(|z| (z - C64::new(0.5, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn rejects_bad_k() {
        let cb = build_codebook(&array(2, 2));
        let h = vec![C64::new(1.0, 0.0); 4];
        assert!(analog_beamform(&h, &cb, 0).is_err());
        assert!(analog_beamform(&h, &cb, 5).is_err());
        assert!(analog_beamform(&h[..3], &cb, 1).is_err());
    }

    #[test]
    fn generalized_channel_cases() {
        let mut rng = substream(7, 0);
        let h = random_vec(&mut rng, 8);
        let cb = build_codebook(&array(4, 2));
        let w = analog_beamform(&h, &cb, 4).unwrap();
        let g = generalized_channel(&channel_matrix(&[&h]), &columns(&[&w.entries])).unwrap();
        assert!((g[(0, 0)] - inner(&h, &w.entries)).norm() < 1e-12);

        let hs = random_matrix(&mut rng, 3, 3);
        assert_eq!(generalized_channel(&hs, &CMatrix::identity(3, 3)).unwrap(), hs);

        // dense multiply oracle
        let hs = random_matrix(&mut rng, 2, 64);
        let fa = random_matrix(&mut rng, 64, 2);
        let got = generalized_channel(&hs, &fa).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..64 {
                    acc += hs[(i, k)] * fa[(k, j)];
                }
                assert!((got[(i, j)] - acc).norm() < 1e-10);
            }
        }
        assert!(generalized_channel(&hs, &random_matrix(&mut rng, 63, 2)).is_err());
    }

    #[test]
    fn zf_identity_and_exact_inverse() {
        let fd = regularized_zf(&CMatrix::identity(3, 3), 0.0).unwrap();
        assert!((fd.matrix.clone() - CMatrix::identity(3, 3)).camax() < 1e-12);

        let mut rng = substream(8, 0);
        let h = random_matrix(&mut rng, 4, 4);
        let fd = regularized_zf(&h, 0.0).unwrap();
        let p = &h * &fd.matrix;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(p[(i, j)].norm() / p[(i, i)].norm() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn rzf_2x2_closed_form() {
        // H = [[1, 0.1], [0.2, 1]], beta = 0.5, inverse by adjugate.
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.1, 0.0), C64::new(0.2, 0.0), C64::new(1.0, 0.0)],
        );
        let fd = regularized_zf(&h, 0.5).unwrap();
        // G = H H^T + 0.5 I = [[1.51, 0.3], [0.3, 1.54]]
        let (a, b, c, d) = (1.51, 0.3, 0.3, 1.54);
        let det = a * d - b * c;
        let inv = [[d / det, -b / det], [-c / det, a / det]];
        let ht = [[1.0, 0.2], [0.1, 1.0]];
        for i in 0..2 {
            for j in 0..2 {
                let want = ht[i][0] * inv[0][j] + ht[i][1] * inv[1][j];
                assert!((fd.matrix[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_pure_zf_falls_back_to_pinv() {
        let h = CMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        let fd = regularized_zf(&h, 0.0).unwrap();
        assert!(fd.matrix.iter().all(|z| z.is_finite()));
        let p = &h * &fd.matrix * &h;
        assert!((p - h).camax() < 1e-10);
        assert!(regularized_zf(&CMatrix::zeros(2, 3), 0.1).is_err());
    }

    #[test]
    fn single_user_hybrid_is_scaled_analog() {
        let cb = build_codebook(&array(4, 4));
        let mut rng = substream(9, 0);
        let h = random_vec(&mut rng, 16);
        let w = analog_beamform(&h, &cb, 4).unwrap();
        let fa = columns(&[&w.entries]);
        let fd = DigitalMatrix {
            matrix: CMatrix::identity(1, 1),
            beta: 0.0,
        };
        let hy = hybrid_combine(&fa, &fd, 80.0).unwrap();
        for (x, y) in hy.matrix.iter().zip(&w.entries) {
            assert!((x - y * 80f64.sqrt()).norm() < 1e-12);
        }
    }

    #[test]
    fn hybrid_power_hits_budget() {
        let mut rng = substream(10, 0);
        for users in 1..6 {
            let fa = random_matrix(&mut rng, 16, users);
            let ht = random_matrix(&mut rng, users, users);
            let fd = regularized_zf(&ht, Regularization::Optimal.beta(users, 80.0, 1.0)).unwrap();
            let hy = hybrid_combine(&fa, &fd, 80.0).unwrap();
            assert_relative_eq!(hy.total_power(), 80.0, max_relative = 1e-9);
        }
        let fd = DigitalMatrix {
            matrix: CMatrix::zeros(1, 1),
            beta: 0.0,
        };
        assert!(matches!(hybrid_combine(&CMatrix::zeros(4, 1), &fd, 1.0), Err(Error::ZeroBeam)));
    }

    #[test]
    fn analog_power_scale_cases() {
        let cb = build_codebook(&array(8, 8));
        for users in [1usize, 4, 32] {
            let cols: Vec<Vec<C64>> = (0..users).map(|k| cb.codeword(k)).collect();
            let refs: Vec<&[C64]> = cols.iter().map(|c| c.as_slice()).collect();
            let hy = analog_power_scale(&columns(&refs), 80.0).unwrap();
            for j in 0..users {
                assert_relative_eq!(hy.matrix.column(j).norm_squared(), 80.0 / users as f64, max_relative = 1e-12);
            }
        }
        assert_relative_eq!(80.0 / 32.0, 2.5);
        assert!(matches!(analog_power_scale(&CMatrix::zeros(4, 0), 1.0), Err(Error::NoServedUsers)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn equal_amplitude_and_phase_invariance(seed in 0u64..10_000, rot in 0.0..6.283f64) {
                let cb = build_codebook(&array(4, 4));
                let mut rng = substream(seed, 1);
                let h = random_vec(&mut rng, 16);
                let w = analog_beamform(&h, &cb, 4).unwrap();
                for z in &w.entries {
                    prop_assert!((z.norm() - 0.25).abs() < 1e-12);
                }
                let r = C64::from_polar(1.0, rot);
                let hr: Vec<C64> = h.iter().map(|z| z * r).collect();
                let s1 = codeword_scores(&h, &cb);
                let s2 = codeword_scores(&hr, &cb);
                for (a, b) in s1.iter().zip(&s2) {
                    prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
                }
            }
        }
    }
}
