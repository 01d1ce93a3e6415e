//! Exact minimal enclosing ball of a handful of points (Welzl's recursion).
//!
//! Only used on simplex vertex sets, so inputs have at most `max_dim + 1`
//! points and the exponential worst case never matters.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Ball<T: Scalar> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    fn contains(&self, x: &[T]) -> bool {
        if self.radius < T::zero() {
            return false;
        }
        let d2 = self
            .center
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (&c, &v)| acc + (c - v) * (c - v));
        let r2 = self.radius * self.radius;
        let slack = T::epsilon() * T::of(256.0) * (r2 + T::one());
        d2 <= r2 + slack
    }
}

/// Smallest closed Euclidean ball containing all `points`.
///
/// Points are processed in lexicographic order, so the rounded result depends
/// only on the point set and not on the order it is given in.
///
/// Panics if `points` is empty.
pub fn minimal_enclosing_ball<T: Scalar>(points: &[&[T]]) -> Ball<T> {
    assert!(!points.is_empty(), "minimal enclosing ball of no points");
    let dim = points[0].len();
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).expect("finite coordinates"))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut support: Vec<&[T]> = Vec::with_capacity(dim + 1);
    welzl(&sorted, sorted.len(), &mut support, dim)
}

fn welzl<'a, T: Scalar>(points: &[&'a [T]], n: usize, support: &mut Vec<&'a [T]>, dim: usize) -> Ball<T> {
    if n == 0 || support.len() == dim + 1 {
        return circumball(support, dim);
    }
    let ball = welzl(points, n - 1, support, dim);
    let x = points[n - 1];
    if ball.contains(x) {
        return ball;
    }
    support.push(x);
    let ball = welzl(points, n - 1, support, dim);
    support.pop();
    ball
}

/// Smallest ball with all of `support` on its boundary: the circumsphere of
/// the support within its affine hull. Affinely dependent directions (e.g.
/// duplicate points) are dropped.
fn circumball<T: Scalar>(support: &[&[T]], dim: usize) -> Ball<T> {
    match support.len() {
        0 => Ball {
            center: vec![T::zero(); dim],
            radius: T::neg_infinity(),
        },
        1 => Ball {
            center: support[0].to_vec(),
            radius: T::zero(),
        },
        _ => {
            let origin = support[0];
            let diffs: Vec<Vec<T>> = support[1..]
                .iter()
                .map(|p| p.iter().zip(origin).map(|(&a, &b)| a - b).collect())
                .collect();
            let k = diffs.len();
            let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
            // Gram system: 2 <d_i, d_j> lambda_j = |d_i|^2.
            let mut a = vec![vec![T::zero(); k + 1]; k];
            for i in 0..k {
                for j in 0..k {
                    a[i][j] = T::of(2.0) * dot(&diffs[i], &diffs[j]);
                }
                a[i][k] = dot(&diffs[i], &diffs[i]);
            }
            let lambda = solve_dropping_dependent(a, k);
            let mut center = origin.to_vec();
            for (l, d) in lambda.iter().zip(&diffs) {
                for (c, &v) in center.iter_mut().zip(d) {
                    *c = *c + *l * v;
                }
            }
            let radius = support
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&center)
                        .fold(T::zero(), |acc, (&x, &c)| acc + (x - c) * (x - c))
                        .sqrt()
                })
                .fold(T::zero(), T::max);
            Ball { center, radius }
        }
    }
}

/// Gaussian elimination with partial pivoting on an augmented `k x (k+1)`
/// system; columns without a usable pivot get coefficient zero.
fn solve_dropping_dependent<T: Scalar>(mut a: Vec<Vec<T>>, k: usize) -> Vec<T> {
    let scale = a
        .iter()
        .flat_map(|row| row[..k].iter())
        .fold(T::zero(), |m, &v| m.max(v.abs()));
    let tol = scale * T::epsilon() * T::of(1024.0);
    let mut pivot_row_of_col = vec![None; k];
    let mut row = 0;
    for col in 0..k {
        if row == k {
            break;
        }
        let best = (row..k)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[best][col].abs() <= tol {
            continue;
        }
        a.swap(row, best);
        for i in 0..k {
            if i != row {
                let f = a[i][col] / a[row][col];
                if f != T::zero() {
                    for j in col..=k {
                        let v = a[row][j];
                        a[i][j] = a[i][j] - f * v;
                    }
                }
            }
        }
        pivot_row_of_col[col] = Some(row);
        row += 1;
    }
    (0..k)
        .map(|col| match pivot_row_of_col[col] {
            Some(r) => a[r][k] / a[r][col],
            None => T::zero(),
        })
        .collect()
}
