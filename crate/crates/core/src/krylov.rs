//! Arnoldi decompositions `A V = V H + h v e_m^T` of fixed cycle length.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::LinearOperator;
use crate::vecops::{axpy, dot, norm2, scale};

const BREAKDOWN_TOL: f64 = 1e-14;

/// One Arnoldi cycle.
#[derive(Debug, Clone)]
pub struct KrylovDecomposition {
    basis: Vec<Vec<f64>>,
    hessenberg: DMatrix<f64>,
    h_next: f64,
    v_next: Vec<f64>,
    beta: f64,
    hermitian: bool,
}

impl KrylovDecomposition {
    /// Number of basis vectors actually built (smaller than requested after
    /// a breakdown).
    pub fn m(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.v_next.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn hessenberg(&self) -> &DMatrix<f64> {
        &self.hessenberg
    }

    pub fn h_next(&self) -> f64 {
        self.h_next
    }

    pub fn v_next(&self) -> &[f64] {
        &self.v_next
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// The Krylov space is invariant under `A`.
    pub fn breakdown(&self) -> bool {
        self.h_next == 0.0
    }

    /// `V y`
    pub fn combine(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                actual: y.len(),
            });
        }
        let mut out = vec![0.0; self.dim()];
        for (v, &c) in self.basis.iter().zip(y) {
            if c != 0.0 {
                axpy(c, v, &mut out);
            }
        }
        Ok(out)
    }

    /// Moves out the next starting vector, dropping the basis.
    pub fn into_next(self) -> Vec<f64> {
        self.v_next
    }
}

/// Runs `m` Arnoldi steps from `start` with modified Gram–Schmidt and one
/// reorthogonalization pass. Stops early with `h_next = 0` on breakdown.
pub fn arnoldi<O: LinearOperator + ?Sized>(
    op: &O,
    start: &[f64],
    m: usize,
) -> Result<KrylovDecomposition> {
    let n = op.dim();
    if start.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: start.len(),
        });
    }
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "cycle length {m} must lie in 1..={n}"
        )));
    }
    let beta = norm2(start);
    if beta == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !beta.is_finite() {
        return Err(Error::NonFinite("starting vector"));
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut v0 = start.to_vec();
    scale(1.0 / beta, &mut v0);
    basis.push(v0);
    let mut h = DMatrix::<f64>::zeros(m + 1, m);
    let mut w = vec![0.0; n];
    let mut steps = m;
    let mut h_next = 0.0;
    let mut v_next = vec![0.0; n];

    for j in 0..m {
        op.apply(&basis[j], &mut w);
        let wnorm = norm2(&w);
        if !wnorm.is_finite() {
            return Err(Error::NonFinite("operator application"));
        }
        for pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
                if pass == 0 {
                    h[(i, j)] = c;
                } else {
                    h[(i, j)] += c;
                }
            }
        }
        let hn = norm2(&w);
        if hn <= BREAKDOWN_TOL * wnorm || wnorm == 0.0 {
            steps = j + 1;
            h_next = 0.0;
            break;
        }
        let mut next = std::mem::take(&mut w);
        scale(1.0 / hn, &mut next);
        w = vec![0.0; n];
        if j + 1 < m {
            h[(j + 1, j)] = hn;
            basis.push(next);
        } else {
            h_next = hn;
            v_next = next;
        }
    }

    let mut hessenberg = h.view((0, 0), (steps, steps)).into_owned();
    basis.truncate(steps);
    let hermitian = op.is_hermitian();
    if hermitian {
        hessenberg = (&hessenberg + hessenberg.transpose()) * 0.5;
    }
    Ok(KrylovDecomposition {
        basis,
        hessenberg,
        h_next,
        v_next,
        beta,
        hermitian,
    })
}

/// `beta V F(H) e_1`, with `smallfun` returning `F(H) e_1`.
pub fn arnoldi_approximation<F>(dec: &KrylovDecomposition, smallfun: F) -> Result<Vec<f64>>
where
    F: FnOnce(&DMatrix<f64>) -> Result<DVector<f64>>,
{
    let y = smallfun(dec.hessenberg())?;
    let mut out = dec.combine(y.as_slice())?;
    scale(dec.beta, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Counted, DenseOperator, SparseMatrix};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dense(n: usize, seed: u64, symmetric: bool) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        if symmetric {
            &a + a.transpose()
        } else {
            a
        }
    }

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn basis_matrix(dec: &KrylovDecomposition) -> DMatrix<f64> {
        DMatrix::from_fn(dec.dim(), dec.m(), |i, j| dec.basis()[j][i])
    }

    fn relation_residual(a: &DMatrix<f64>, dec: &KrylovDecomposition) -> f64 {
        let v = basis_matrix(dec);
        let mut r = a * &v - &v * dec.hessenberg();
        let m = dec.m();
        for i in 0..dec.dim() {
            r[(i, m - 1)] -= dec.h_next() * dec.v_next()[i];
        }
        r.norm()
    }

    #[test]
    fn eigenvector_start_breaks_down() {
        let a = SparseMatrix::diagonal(&[1.0, 2.0]);
        let dec = arnoldi(&a, &[1.0, 0.0], 1).unwrap();
        assert_eq!(dec.hessenberg()[(0, 0)], 1.0);
        assert_eq!(dec.h_next(), 0.0);
        assert!(dec.breakdown());
    }

    #[test]
    fn full_space_reproduces_spectrum() {
        let a = SparseMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let s = 1.0 / 3f64.sqrt();
        let dec = arnoldi(&a, &[s, s, s], 3).unwrap();
        let mut e: Vec<f64> = dec.hessenberg().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (g, w) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_gives_tridiagonal() {
        let a = random_dense(10, 1, true);
        let op = DenseOperator::new(a.clone()).unwrap();
        let dec = arnoldi(&op, &random_vec(10, 2), 5).unwrap();
        let h = dec.hessenberg();
        for i in 0..5usize {
            for j in 0..5 {
                if i.abs_diff(j) > 1 {
                    assert!(h[(i, j)].abs() < 1e-12);
                }
            }
        }
        assert_eq!(h, &h.transpose());
        let v = basis_matrix(&dec);
        assert!((v.transpose() * &v - DMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn relation_and_orthogonality_nonsymmetric() {
        let a = random_dense(50, 3, false);
        let op = DenseOperator::new(a.clone()).unwrap();
        let dec = arnoldi(&op, &random_vec(50, 4), 20).unwrap();
        let v = basis_matrix(&dec);
        assert!((v.transpose() * &v - DMatrix::identity(20, 20)).norm() < 1e-10);
        assert!(relation_residual(&a, &dec) <= 1e-10 * a.norm() * v.norm());
    }

    #[test]
    fn approximation_identity_map() {
        let a = SparseMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let dec = arnoldi(&a, &[1.0, 0.0, 0.0], 1).unwrap();
        let x = arnoldi_approximation(&dec, |h| Ok(h.column(0).into_owned())).unwrap();
        assert_eq!(x, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn approximation_exact_in_full_space() {
        let a = random_dense(6, 5, true) + DMatrix::identity(6, 6) * 8.0;
        let b = random_vec(6, 6);
        let op = DenseOperator::new(a.clone()).unwrap();
        let dec = arnoldi(&op, &b, 6).unwrap();

        let inv = arnoldi_approximation(&dec, |h| {
            Ok(h.clone().lu().solve(&DVector::from_fn(h.nrows(), |i, _| (i == 0) as u8 as f64)).unwrap())
        })
        .unwrap();
        let want = a.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        assert!((DVector::from_vec(inv) - &want).norm() < 1e-10 * want.norm());

        let ex = arnoldi_approximation(&dec, |h| Ok((-h).exp().column(0).into_owned())).unwrap();
        let eig = a.symmetric_eigen();
        let want = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-l).exp()))
            * eig.eigenvectors.transpose()
            * DVector::from_vec(b);
        assert!((DVector::from_vec(ex) - &want).norm() < 1e-10 * want.norm());
    }

    #[test]
    fn errors() {
        let a = SparseMatrix::identity(3);
        assert!(matches!(arnoldi(&a, &[0.0; 3], 2), Err(Error::ZeroVector)));
        assert!(arnoldi(&a, &[1.0; 3], 4).is_err());
        assert!(arnoldi(&a, &[1.0; 2], 1).is_err());
    }

    #[test]
    fn each_cycle_costs_m_matvecs() {
        let op = Counted::new(DenseOperator::new(random_dense(30, 7, false)).unwrap());
        let d1 = arnoldi(&op, &random_vec(30, 8), 10).unwrap();
        assert_eq!(op.matvecs(), 10);
        arnoldi(&op, d1.v_next(), 10).unwrap();
        assert_eq!(op.matvecs(), 20);
    }

    #[test]
    fn negated_operator_spans_same_space() {
        let a = random_dense(12, 9, false);
        let b = random_vec(12, 10);
        let d1 = arnoldi(&DenseOperator::new(a.clone()).unwrap(), &b, 5).unwrap();
        let d2 = arnoldi(&DenseOperator::new(-a).unwrap(), &b, 5).unwrap();
        let (v1, v2) = (basis_matrix(&d1), basis_matrix(&d2));
        let p1 = &v1 * v1.transpose();
        let p2 = &v2 * v2.transpose();
        assert!((p1 - p2).norm() < 1e-10);
        // basis vectors agree up to the sign pattern (-1)^j, so H(-A) = -D H(A) D
        for i in 0..5 {
            for j in 0..5 {
                let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((d2.hessenberg()[(i, j)] + s * d1.hessenberg()[(i, j)]).abs() < 1e-10);
            }
        }
        assert!((d2.h_next() - d1.h_next()).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn shift_leaves_basis_unchanged(seed in 0u64..1000) {
            let a = random_dense(8, seed, false);
            let b = random_vec(8, seed + 1);
            let d1 = arnoldi(&DenseOperator::new(a.clone()).unwrap(), &b, 4).unwrap();
            let shifted = a + DMatrix::identity(8, 8);
            let d2 = arnoldi(&DenseOperator::new(shifted).unwrap(), &b, 4).unwrap();
            prop_assume!(!d1.breakdown() && d1.m() == 4 && d2.m() == 4);
            for (x, y) in d1.basis().iter().zip(d2.basis()) {
                let c = dot(x, y);
                prop_assert!((c.abs() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn arnoldi_relation_holds(seed in 0u64..1000, m in 1usize..10) {
            let a = random_dense(15, seed, false);
            let dec = arnoldi(&DenseOperator::new(a.clone()).unwrap(), &random_vec(15, seed ^ 77), m).unwrap();
            let v = basis_matrix(&dec);
            prop_assert!((v.transpose() * &v - DMatrix::identity(dec.m(), dec.m())).norm() < 1e-10);
            prop_assert!(relation_residual(&a, &dec) <= 1e-10 * a.norm() * v.norm());
        }
    }
}
