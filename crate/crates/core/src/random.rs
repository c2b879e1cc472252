//! Seedable sampling of Haar-random states, unitaries and isometries.
//!
//! All randomness flows through [`Rng`] (ChaCha8), whose output is stable
//! across platforms and crate versions. Independent streams for parallel
//! trials come from [`stream`].

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::state::{CMatrix, CVector, DensityMatrix, PureState};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `index` of the generator seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_gaussian(rng: &mut Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-uniform pure state: a normalized complex Gaussian vector.
pub fn haar_state(dim_a: usize, dim_b: usize, rng: &mut Rng) -> PureState {
    loop {
        let amps: Vec<Complex64> = (0..dim_a * dim_b).map(|_| complex_gaussian(rng)).collect();
        if let Ok(psi) = PureState::from_unnormalized(dim_a, dim_b, amps) {
            return psi;
        }
    }
}

pub fn haar_vector(n: usize, rng: &mut Rng) -> CVector {
    let v = CVector::from_iterator(n, (0..n).map(|_| complex_gaussian(rng)));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-random `n × n` unitary (QR of a Ginibre matrix with the phases of
/// `R`'s diagonal absorbed into `Q`).
pub fn haar_unitary(n: usize, rng: &mut Rng) -> CMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// First `cols` columns of a Haar unitary: an `rows × cols` isometry.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    haar_unitary(rows, rng).columns(0, cols).into_owned()
}

/// Uniform point on the probability simplex with `n` vertices.
pub fn simplex_point(n: usize, rng: &mut Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random density matrix of the given rank (partial trace of a Haar state).
pub fn random_density(n: usize, rank: usize, rng: &mut Rng) -> DensityMatrix {
    let g = CMatrix::from_fn(n, rank.max(1), |_, _| complex_gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr)).expect("Wishart matrix is a density matrix")
}

pub fn unit_interval(rng: &mut Rng) -> f64 {
    rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::max_abs_diff;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(1);
        for n in 1..7 {
            let u = haar_unitary(n, &mut rng);
            assert!(max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(n, n)) < 1e-12);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = complex_gaussian(&mut stream(9, 0));
        let b = complex_gaussian(&mut stream(9, 0));
        let c = complex_gaussian(&mut stream(9, 1));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn simplex_points_sum_to_one() {
        let mut rng = seeded(2);
        let p = simplex_point(5, &mut rng);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }
}
