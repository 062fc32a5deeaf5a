//! Orthonormal basis of the sum-zero hyperplane in `R^(n+1)`.

/// Orthonormalizes the simple roots `e_k - e_(k+1)`, `k = 0..n`, in index
/// order with modified Gram-Schmidt. Returns `n` basis rows of length `n + 1`.
///
/// The result is deterministic, so projected coordinates are byte-stable.
pub fn sum_zero_basis(ambient_dim: usize) -> Vec<Vec<f64>> {
    let n = ambient_dim.saturating_sub(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = vec![0.0; ambient_dim];
        v[k] = 1.0;
        v[k + 1] = -1.0;
        for q in &basis {
            let proj: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}
