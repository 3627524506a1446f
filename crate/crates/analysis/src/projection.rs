//! Deterministic linear 2-D projection: top-2 principal components.
// Index loops are the clearest way to write the matrix math here.
#![allow(clippy::needless_range_loop)]
//!
//! Clustering always runs on full-dimension embeddings; this projection
//! exists purely for plotting, which is why a deterministic linear map is
//! used. The eigenproblem is solved on whichever of the scatter matrix
//! (d x d) or the Gram matrix (n x n) is smaller, so high-dimensional
//! embeddings of small samples stay cheap. Component signs are fixed by
//! making each component's largest-magnitude loading positive.

use num_traits::Float;

use crate::error::AnalysisError;

/// Variance-maximizing 2-D coordinates of `points`.
pub fn project_2d<T: Float>(points: &[Vec<T>]) -> Result<Vec<(T, T)>, AnalysisError> {
    let n = points.len();
    if n < 2 {
        return Err(AnalysisError::DegenerateInput("need at least 2 points"));
    }
    let dim = points[0].len();
    if dim < 2 {
        return Err(AnalysisError::DegenerateInput("need dimension >= 2"));
    }
    for (index, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(AnalysisError::PointDimensionMismatch { index, expected: dim, got: p.len() });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(AnalysisError::NonFinitePoint { index });
        }
    }

    // Center.
    let inv_n = T::one() / T::from(n).expect("n fits scalar");
    let mut mean = vec![T::zero(); dim];
    for p in points {
        for (m, &x) in mean.iter_mut().zip(p) {
            *m = *m + x * inv_n;
        }
    }
    let centered: Vec<Vec<T>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(&x, &m)| x - m).collect())
        .collect();

    let components = if dim <= n {
        top2_from_scatter(&centered, dim)?
    } else {
        top2_from_gram(&centered, dim)?
    };
    let (mut v1, mut v2) = components;
    fix_sign(&mut v1);
    fix_sign(&mut v2);

    Ok(centered
        .iter()
        .map(|x| (dot(x, &v1), dot(x, &v2)))
        .collect())
}

fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn fix_sign<T: Float>(v: &mut [T]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < T::zero() {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn top2_from_scatter<T: Float>(
    centered: &[Vec<T>],
    dim: usize,
) -> Result<(Vec<T>, Vec<T>), AnalysisError> {
    // Scatter S = X^T X.
    let mut scatter = vec![vec![T::zero(); dim]; dim];
    for x in centered {
        for i in 0..dim {
            for j in i..dim {
                scatter[i][j] = scatter[i][j] + x[i] * x[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            scatter[i][j] = scatter[j][i];
        }
    }
    let (eigenvalues, eigenvectors) = jacobi_eigen(scatter);
    let order = descending_order(&eigenvalues);
    if eigenvalues[order[0]] <= T::epsilon() {
        return Err(AnalysisError::DegenerateInput("rank-0 data"));
    }
    let column = |j: usize| -> Vec<T> { eigenvectors.iter().map(|row| row[j]).collect() };
    Ok((column(order[0]), column(order[1])))
}

fn top2_from_gram<T: Float>(
    centered: &[Vec<T>],
    dim: usize,
) -> Result<(Vec<T>, Vec<T>), AnalysisError> {
    let n = centered.len();
    // Gram G = X X^T shares nonzero eigenvalues with the scatter matrix;
    // eigenvector u maps back through v = X^T u / |X^T u|.
    let mut gram = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let g = dot(&centered[i], &centered[j]);
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let (eigenvalues, eigenvectors) = jacobi_eigen(gram);
    let order = descending_order(&eigenvalues);
    if eigenvalues[order[0]] <= T::epsilon() {
        return Err(AnalysisError::DegenerateInput("rank-0 data"));
    }
    let map_back = |j: usize| -> Vec<T> {
        let mut v = vec![T::zero(); dim];
        for (i, x) in centered.iter().enumerate() {
            let u = eigenvectors[i][j];
            for (vk, &xk) in v.iter_mut().zip(x) {
                *vk = *vk + u * xk;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > T::zero() {
            for vk in v.iter_mut() {
                *vk = *vk / norm;
            }
        }
        v
    };
    Ok((map_back(order[0]), map_back(order[1])))
}

fn descending_order<T: Float>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("finite eigenvalues"));
    order
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvector matrix with eigenvectors as columns).
fn jacobi_eigen<T: Float>(mut a: Vec<Vec<T>>) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    let mut v = vec![vec![T::zero(); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let off = |a: &Vec<Vec<T>>| -> T {
        let mut sum = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                sum = sum + a[i][j] * a[i][j];
            }
        }
        sum
    };
    let scale = (0..n).fold(T::zero(), |acc, i| acc + a[i][i].abs()) + T::one();
    let tol = T::epsilon() * T::epsilon() * scale * scale;

    for _sweep in 0..100 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                if a[p][q].abs() <= T::epsilon() * scale {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / ((T::one() + T::one()) * a[p][q]);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let eigenvalues: Vec<T> = (0..n).map(|i| a[i][i]).collect();
    (eigenvalues, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pairwise_distances(points: &[Vec<f64>]) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d: f64 = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                out.push(d);
            }
        }
        out
    }

    #[test]
    fn two_dimensional_input_preserves_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let points: Vec<Vec<f64>> =
            (0..12).map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]).collect();
        let projected = project_2d(&points).unwrap();
        let as_points: Vec<Vec<f64>> = projected.iter().map(|&(x, y)| vec![x, y]).collect();
        let before = pairwise_distances(&points);
        let after = pairwise_distances(&as_points);
        for (b, a) in before.iter().zip(&after) {
            assert!((b - a).abs() < 1e-9, "{b} vs {a}");
        }
    }

    #[test]
    fn collinear_points_have_zero_second_coordinate() {
        let points: Vec<Vec<f64>> =
            (0..6).map(|i| vec![i as f64, 2.0 * i as f64, -i as f64]).collect();
        let projected = project_2d(&points).unwrap();
        for &(_, y) in &projected {
            assert!(y.abs() < 1e-9, "second coordinate {y}");
        }
    }

    #[test]
    fn reconstruction_error_equals_trailing_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let points: Vec<Vec<f64>> =
            (0..40).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();

        // Center and build the scatter matrix for the oracle.
        let n = points.len();
        let dim = 5;
        let mut mean = vec![0.0; dim];
        for p in &points {
            for (m, &x) in mean.iter_mut().zip(p) {
                *m += x / n as f64;
            }
        }
        let centered: Vec<Vec<f64>> = points
            .iter()
            .map(|p| p.iter().zip(&mean).map(|(&x, &m)| x - m).collect())
            .collect();
        let mut scatter = vec![vec![0.0; dim]; dim];
        for x in &centered {
            for i in 0..dim {
                for j in 0..dim {
                    scatter[i][j] += x[i] * x[j];
                }
            }
        }
        let (mut eigenvalues, _) = jacobi_eigen(scatter);
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let trailing: f64 = eigenvalues[2..].iter().sum();

        // Reconstruction SSE = total variance minus variance captured by
        // the two projected coordinates.
        let projected = project_2d(&points).unwrap();
        let total: f64 = centered.iter().flat_map(|x| x.iter().map(|v| v * v)).sum();
        let captured: f64 = projected.iter().map(|&(x, y)| x * x + y * y).sum();
        let sse = total - captured;
        assert!((sse - trailing).abs() < 1e-8, "sse {sse} vs trailing {trailing}");
    }

    #[test]
    fn gram_path_matches_scatter_path() {
        // More dimensions than points forces the Gram route; embed 2-D
        // structure into 20-D so both routes see the same geometry.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let low: Vec<Vec<f64>> =
            (0..8).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let mut high: Vec<Vec<f64>> = low
            .iter()
            .map(|p| {
                let mut v = vec![0.0; 20];
                // two fixed orthonormal directions
                v[3] = p[0];
                v[11] = p[1];
                v
            })
            .collect();
        // avoid exact zeros elsewhere mattering
        for v in &mut high {
            v[0] += 0.0;
        }
        let a = project_2d(&low).unwrap();
        let b = project_2d(&high).unwrap();
        let da = pairwise_distances(&a.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>());
        let db = pairwise_distances(&b.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>());
        for (x, y) in da.iter().zip(&db) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_zero_is_degenerate() {
        let points = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(matches!(
            project_2d(&points).unwrap_err(),
            AnalysisError::DegenerateInput(_)
        ));
    }

    #[test]
    fn deterministic_across_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let points: Vec<Vec<f64>> =
            (0..15).map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        assert_eq!(project_2d(&points).unwrap(), project_2d(&points).unwrap());
    }
}
