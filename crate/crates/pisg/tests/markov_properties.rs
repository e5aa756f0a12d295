//! Structural properties of the Cesàro limit over a mixed random corpus of
//! Markov matrices (dense, periodic, reducible, absorbing).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pisg::generate::random_markov_matrix;
use pisg::markov::{cesaro_limit, TransitionMatrix};

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn corpus(count: usize) -> Vec<TransitionMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    (0..count).map(|_| random_markov_matrix(&mut rng, 10)).collect()
}

#[test]
fn limit_identities_hold_on_500_random_matrices() {
    for (idx, q) in corpus(500).iter().enumerate() {
        let q_star = cesaro_limit(q).unwrap_or_else(|e| panic!("matrix {idx}: {e}"));
        for row in &q_star {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-9, "matrix {idx}: row sum {sum}");
            assert!(row.iter().all(|&x| x >= 0.0), "matrix {idx}: negative entry");
        }
        let qq = mat_mul(q.rows(), &q_star);
        let qsq = mat_mul(&q_star, q.rows());
        let qss = mat_mul(&q_star, &q_star);
        assert!(max_abs_diff(&qq, &q_star) <= 1e-9, "matrix {idx}: Q Q* != Q*");
        assert!(max_abs_diff(&qsq, &q_star) <= 1e-9, "matrix {idx}: Q* Q != Q*");
        assert!(max_abs_diff(&qss, &q_star) <= 1e-9, "matrix {idx}: Q* Q* != Q*");
    }
}

#[test]
fn recurrent_class_rows_are_identical_and_values_constant() {
    for (idx, q) in corpus(500).iter().enumerate() {
        let n = q.dim();
        let q_star = cesaro_limit(q).unwrap();
        // Two states share a recurrent class iff their Q* rows put positive
        // mass on each other; such rows must coincide.
        for s in 0..n {
            for t in s + 1..n {
                if q_star[s][t] > 1e-9 && q_star[t][s] > 1e-9 {
                    for j in 0..n {
                        assert!(
                            (q_star[s][j] - q_star[t][j]).abs() <= 1e-12,
                            "matrix {idx}: rows {s} and {t} differ at {j}"
                        );
                    }
                }
            }
        }
    }
}
