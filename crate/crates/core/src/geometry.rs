//! Point clouds in the unit cube, metrics, ball counting, cube covering numbers
//! and the scaling regimes `eta_n`.
//!
//! A [`PointCloud`] stores its points in unit-cube coordinates together with
//! a positive scale factor, so that `eta * X` is represented without leaving
//! the `[0,1]^p` invariant: the actual position of point `i` is
//! `scale * point(i)`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {index}, coordinate {coord}: value {value} lies outside [0,1]")]
    OutsideCube { index: usize, coord: usize, value: f64 },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("ambient dimension must be at least 1")]
    ZeroDimension,
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("covering number overflows u64 (p = {p}, cells per axis = {per_axis})")]
    CoveringOverflow { p: usize, per_axis: u64 },
    #[error("malformed cloud csv, line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Chebyshev,
}

impl Metric {
    pub fn distance<T: Scalar>(self, a: &[T], b: &[T]) -> T {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x - y) * (x - y))
                .fold(T::zero(), |acc, v| acc + v)
                .sqrt(),
            Metric::Chebyshev => a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).fold(T::zero(), T::max),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "chebyshev" | "linf" | "max" => Ok(Metric::Chebyshev),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// An ordered sample `(x_1, ..., x_n)`; index `i` is observation `X_{i+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T: Scalar = f64> {
    coords: Vec<T>,
    dim: usize,
    scale: T,
}

impl<T: Scalar> PointCloud<T> {
    /// Builds a cloud from unit-cube points. Every point must have `dim`
    /// finite coordinates in `[0,1]`.
    pub fn new(dim: usize, points: &[Vec<T>]) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (index, point) in points.iter().enumerate() {
            if point.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: point.len(),
                });
            }
            coords.extend_from_slice(point);
        }
        Self::from_flat(dim, coords)
    }

    /// Builds a cloud from row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<T>) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(GeometryError::DimensionMismatch {
                index: coords.len() / dim,
                expected: dim,
                found: coords.len() % dim,
            });
        }
        for (k, &v) in coords.iter().enumerate() {
            if !v.is_finite() {
                return Err(GeometryError::NonFinite { index: k / dim });
            }
            if v < T::zero() || v > T::one() {
                return Err(GeometryError::OutsideCube {
                    index: k / dim,
                    coord: k % dim,
                    value: v.as_f64(),
                });
            }
        }
        Ok(Self {
            coords,
            dim,
            scale: T::one(),
        })
    }

    pub fn empty(dim: usize) -> Result<Self, GeometryError> {
        Self::from_flat(dim, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    /// Unit-cube coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Actual coordinates of point `i`, i.e. `scale * point(i)`.
    pub fn position(&self, i: usize) -> Vec<T> {
        self.point(i).iter().map(|&x| x * self.scale).collect()
    }

    /// The cloud `eta * X`.
    pub fn scaled(&self, eta: T) -> Result<Self, GeometryError> {
        if !(eta > T::zero()) || !eta.is_finite() {
            return Err(GeometryError::InvalidScale(eta.as_f64()));
        }
        Ok(Self {
            coords: self.coords.clone(),
            dim: self.dim,
            scale: self.scale * eta,
        })
    }

    /// First `n` points, keeping order and scale.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            coords: self.coords[..n * self.dim].to_vec(),
            dim: self.dim,
            scale: self.scale,
        }
    }

    /// Points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self {
            coords,
            dim: self.dim,
            scale: self.scale,
        }
    }

    /// Distance between points `i` and `j` of the (scaled) cloud.
    pub fn distance(&self, i: usize, j: usize, metric: Metric) -> T {
        self.scale * metric.distance(self.point(i), self.point(j))
    }

    pub fn cast<U: Scalar>(&self) -> PointCloud<U> {
        PointCloud {
            coords: self.coords.iter().map(|&x| U::of(x.as_f64())).collect(),
            dim: self.dim,
            scale: U::of(self.scale.as_f64()),
        }
    }
}

/// Symmetric `n x n` distance matrix, row-major.
pub fn pairwise_distances<T: Scalar>(cloud: &PointCloud<T>, metric: Metric) -> Vec<Vec<T>> {
    let n = cloud.len();
    let mut out = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = cloud.distance(i, j, metric);
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    out
}

/// Number of points within closed distance `radius` of `center`. The center
/// is given in the cloud's actual (scaled) coordinates.
pub fn ball_count<T: Scalar>(cloud: &PointCloud<T>, center: &[T], radius: T, metric: Metric) -> usize {
    let scale = cloud.scale();
    let mut buf = vec![T::zero(); cloud.dim()];
    cloud
        .points()
        .filter(|p| {
            for (b, &x) in buf.iter_mut().zip(p.iter()) {
                *b = x * scale;
            }
            metric.distance(&buf, center) <= radius
        })
        .count()
}

/// Side count per axis of the grid behind [`covering_number_cube`].
fn covering_cells_per_axis(p: usize, r: f64, metric: Metric) -> Result<u64, GeometryError> {
    if p == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(GeometryError::NonPositiveRadius(r));
    }
    // A Euclidean r-ball contains the Chebyshev (r / sqrt p)-ball.
    let cheb_r = match metric {
        Metric::Chebyshev => r,
        Metric::Euclidean => r / (p as f64).sqrt(),
    };
    Ok((1.0 / (2.0 * cheb_r)).ceil().max(1.0) as u64)
}

/// Upper bound on the `r`-covering number of `[0,1]^p`: `ceil(1/(2r))^p`
/// cubes of side at most `2r` for the max-norm.
pub fn covering_number_cube(p: usize, r: f64, metric: Metric) -> Result<u64, GeometryError> {
    let per_axis = covering_cells_per_axis(p, r, metric)?;
    let exp = u32::try_from(p).map_err(|_| GeometryError::CoveringOverflow { p, per_axis })?;
    per_axis
        .checked_pow(exp)
        .ok_or(GeometryError::CoveringOverflow { p, per_axis })
}

/// `ln` of [`covering_number_cube`], computed without overflow.
pub fn log_covering_number_cube(p: usize, r: f64, metric: Metric) -> Result<f64, GeometryError> {
    let per_axis = covering_cells_per_axis(p, r, metric)?;
    Ok(p as f64 * (per_axis as f64).ln())
}

/// Centers of the covering behind [`covering_number_cube`].
pub fn covering_centers_cube(p: usize, r: f64, metric: Metric) -> Result<Vec<Vec<f64>>, GeometryError> {
    let total = covering_number_cube(p, r, metric)?;
    let k = covering_cells_per_axis(p, r, metric)?;
    let mut centers = Vec::with_capacity(total as usize);
    let mut idx = vec![0u64; p];
    for _ in 0..total {
        centers.push(idx.iter().map(|&i| (i as f64 + 0.5) / k as f64).collect());
        for digit in idx.iter_mut() {
            *digit += 1;
            if *digit < k {
                break;
            }
            *digit = 0;
        }
    }
    Ok(centers)
}

/// Lebesgue volume of the unit Euclidean ball in `R^p`, `pi^{p/2} / Gamma(p/2 + 1)`,
/// evaluated through the recursion `w_p = 2 pi / p * w_{p-2}`.
pub fn unit_ball_volume(p: usize) -> f64 {
    match p {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / p as f64 * unit_ball_volume(p - 2),
    }
}

/// `sup_w mu(B(w, radius))` for the Lebesgue measure, using the interior
/// (unclipped) ball and capping at the cube's volume 1.
pub fn sup_ball_volume(p: usize, radius: f64, metric: Metric) -> f64 {
    let radius = radius.max(0.0);
    let v = match metric {
        Metric::Chebyshev => (2.0 * radius).powi(p as i32),
        Metric::Euclidean => unit_ball_volume(p) * radius.powi(p as i32),
    };
    v.min(1.0)
}

/// Scale factors `eta_n` for the three classical regimes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScalingRegime {
    /// `eta_n = n^{1/p}`.
    #[default]
    Critical,
    /// `eta_n = n^{1/p} (log n)^{-alpha}`, alpha > 0.
    Supercritical { alpha: f64 },
    /// `eta_n = n^beta`, beta > 1/p.
    Subcritical { beta: f64 },
}

impl ScalingRegime {
    pub fn eta(&self, n: usize, p: usize) -> f64 {
        let nf = (n.max(1)) as f64;
        let p = p.max(1) as f64;
        match *self {
            ScalingRegime::Critical => nf.powf(1.0 / p),
            // (log n)^{-alpha} blows up near n = 1; the log is frozen below
            // n0 = e^{alpha p}, the point from which n^{1/p} (log n)^{-alpha}
            // is increasing, which keeps eta positive and nondecreasing.
            ScalingRegime::Supercritical { alpha } => {
                let log_floor = (alpha * p).max(1.0);
                nf.powf(1.0 / p) * nf.ln().max(log_floor).powf(-alpha)
            }
            ScalingRegime::Subcritical { beta } => nf.powf(beta),
        }
    }

    pub fn validate(&self, p: usize) -> Result<(), String> {
        match *self {
            ScalingRegime::Critical => Ok(()),
            ScalingRegime::Supercritical { alpha } if alpha > 0.0 => Ok(()),
            ScalingRegime::Supercritical { alpha } => Err(format!("supercritical alpha must be > 0, got {alpha}")),
            ScalingRegime::Subcritical { beta } if beta > 1.0 / p as f64 => Ok(()),
            ScalingRegime::Subcritical { beta } => Err(format!(
                "subcritical beta must exceed 1/p = {}, got {beta}",
                1.0 / p as f64
            )),
        }
    }
}

/// Unordered pairs `(i, j, d)` with `i < j` and `d = distance(i, j) <= radius`,
/// in lexicographic `(i, j)` order.
pub(crate) fn neighbor_pairs<T: Scalar>(cloud: &PointCloud<T>, metric: Metric, radius: T) -> Vec<(u32, u32, T)> {
    let n = cloud.len();
    let mut pairs = Vec::new();
    if n < 2 || radius < T::zero() {
        return pairs;
    }
    let unit_radius = (radius / cloud.scale()).as_f64();
    let p = cloud.dim();
    let cells = if unit_radius > 0.0 {
        (1.0 / unit_radius).floor() as usize
    } else {
        usize::MAX
    };
    // A cell grid only pays off when it has several cells per axis and not
    // too many cells overall.
    let use_grid = n > 64 && p <= 4 && cells >= 3 && (cells as f64).powi(p as i32) <= 4.0 * n as f64 + 1e6;
    if !use_grid {
        for i in 0..n {
            for j in (i + 1)..n {
                let d = cloud.distance(i, j, metric);
                if d <= radius {
                    pairs.push((i as u32, j as u32, d));
                }
            }
        }
        return pairs;
    }

    let cell_of = |x: T| -> usize { ((x.as_f64() * cells as f64) as usize).min(cells - 1) };
    let key = |c: &[usize]| -> usize { c.iter().fold(0usize, |acc, &v| acc * cells + v) };
    let mut buckets: std::collections::HashMap<usize, Vec<u32>> = std::collections::HashMap::new();
    let mut cell_coords = Vec::with_capacity(n);
    for i in 0..n {
        let c: Vec<usize> = cloud.point(i).iter().map(|&x| cell_of(x)).collect();
        buckets.entry(key(&c)).or_default().push(i as u32);
        cell_coords.push(c);
    }
    let offsets: Vec<Vec<isize>> = {
        let mut out = vec![Vec::new()];
        for _ in 0..p {
            out = out
                .into_iter()
                .flat_map(|o: Vec<isize>| {
                    (-1..=1).map(move |d| {
                        let mut o = o.clone();
                        o.push(d);
                        o
                    })
                })
                .collect();
        }
        out
    };
    let mut neigh = Vec::new();
    let mut probe = vec![0usize; p];
    for i in 0..n {
        neigh.clear();
        'offsets: for off in &offsets {
            for k in 0..p {
                let c = cell_coords[i][k] as isize + off[k];
                if c < 0 || c >= cells as isize {
                    continue 'offsets;
                }
                probe[k] = c as usize;
            }
            if let Some(bucket) = buckets.get(&key(&probe)) {
                neigh.extend(bucket.iter().copied().filter(|&j| j as usize > i));
            }
        }
        neigh.sort_unstable();
        for &j in &neigh {
            let d = cloud.distance(i, j as usize, metric);
            if d <= radius {
                pairs.push((i as u32, j, d));
            }
        }
    }
    pairs
}

/// Options for [`read_cloud_csv`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Accept coordinates outside `[0,1]` and map the whole cloud into the
    /// cube with one global min-max affine map (shape preserving).
    pub allow_outside_cube: bool,
}

/// Reads one point per row, `p` numeric columns, optional header row.
pub fn read_cloud_csv<R: Read>(reader: R, options: CsvOptions) -> Result<PointCloud<f64>, GeometryError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim = None;
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| GeometryError::Csv {
            line: line + 1,
            message: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(GeometryError::Csv {
                    line: line + 1,
                    message: e.to_string(),
                })
            }
        };
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(GeometryError::Csv {
                    line: line + 1,
                    message: format!("expected {d} columns, found {}", values.len()),
                })
            }
            _ => {}
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::Csv {
                line: line + 1,
                message: format!("column {} is not finite", k + 1),
            });
        }
        if !options.allow_outside_cube {
            if let Some(k) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(GeometryError::OutsideCube {
                    index: rows.len(),
                    coord: k,
                    value: values[k],
                });
            }
        }
        rows.push(values);
    }
    let dim = match dim {
        Some(d) => d,
        None => {
            return Err(GeometryError::Csv {
                line: 0,
                message: "no data rows".into(),
            })
        }
    };
    if options.allow_outside_cube {
        let lo = rows.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let hi = rows.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo < 0.0 || hi > 1.0 {
            let span = if hi > lo { hi - lo } else { 1.0 };
            for v in rows.iter_mut().flatten() {
                *v = ((*v - lo) / span).clamp(0.0, 1.0);
            }
        }
    }
    PointCloud::new(dim, &rows)
}

/// Writes the cloud's actual coordinates with a `x1,...,xp` header.
pub fn write_cloud_csv<T: Scalar, W: Write>(writer: W, cloud: &PointCloud<T>) -> Result<(), GeometryError> {
    let mut w = std::io::BufWriter::new(writer);
    let header: Vec<String> = (1..=cloud.dim()).map(|k| format!("x{k}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for i in 0..cloud.len() {
        let row: Vec<String> = cloud.position(i).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(rng: &mut impl Rng, n: usize, p: usize) -> PointCloud {
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random()).collect()).collect();
        PointCloud::new(p, &pts).unwrap()
    }

    #[test]
    fn two_points_unit_separation() {
        let c = PointCloud::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            pairwise_distances(&c, Metric::Euclidean),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        let one = PointCloud::new(2, &[vec![0.3, 0.3]]).unwrap();
        assert_eq!(pairwise_distances(&one, Metric::Euclidean), vec![vec![0.0]]);
    }

    #[test]
    fn distances_match_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_cloud(&mut rng, 3, 3);
        let m = pairwise_distances(&c, Metric::Euclidean);
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = (c.point(i), c.point(j));
                let mut s = 0.0;
                for k in 0..3 {
                    s += (a[k] - b[k]) * (a[k] - b[k]);
                }
                assert_eq!(m[i][j], s.sqrt());
            }
        }
    }

    #[test]
    fn rejects_bad_points() {
        assert!(matches!(
            PointCloud::new(2, &[vec![0.1, 0.2], vec![0.3]]),
            Err(GeometryError::DimensionMismatch { index: 1, .. })
        ));
        assert!(matches!(
            PointCloud::new(1, &[vec![1.5]]),
            Err(GeometryError::OutsideCube { .. })
        ));
        assert!(matches!(
            PointCloud::new(1, &[vec![f64::NAN]]),
            Err(GeometryError::NonFinite { .. })
        ));
    }

    #[test]
    fn ball_count_examples() {
        let c = PointCloud::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(ball_count(&c, &[0.0, 0.0], 0.5, Metric::Euclidean), 1);
        assert_eq!(ball_count(&c, &[1.0, 0.0], 0.0, Metric::Euclidean), 1);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = random_cloud(&mut rng, 50, 2);
        for _ in 0..20 {
            let center = [rng.random::<f64>(), rng.random::<f64>()];
            let r: f64 = rng.random::<f64>() * 0.5;
            let mut scan = 0;
            for i in 0..c.len() {
                let p = c.point(i);
                if ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt() <= r {
                    scan += 1;
                }
            }
            assert_eq!(ball_count(&c, &center, r, Metric::Euclidean), scan);
        }
    }

    #[test]
    fn covering_numbers() {
        assert_eq!(covering_number_cube(2, 0.25, Metric::Chebyshev).unwrap(), 4);
        assert_eq!(covering_number_cube(1, 0.5, Metric::Euclidean).unwrap(), 1);
        assert_eq!(covering_number_cube(3, 0.1, Metric::Chebyshev).unwrap(), 125);
        assert!(matches!(
            covering_number_cube(2, 0.0, Metric::Chebyshev),
            Err(GeometryError::NonPositiveRadius(_))
        ));
        assert!(covering_number_cube(40, 1e-3, Metric::Chebyshev).is_err());
        assert_relative_eq!(
            log_covering_number_cube(3, 0.1, Metric::Chebyshev).unwrap(),
            125f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn covering_centers_cover_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in 1..=3 {
            for metric in [Metric::Chebyshev, Metric::Euclidean] {
                let r = 0.05 + 0.3 * rng.random::<f64>();
                let centers = covering_centers_cube(p, r, metric).unwrap();
                assert_eq!(centers.len() as u64, covering_number_cube(p, r, metric).unwrap());
                for _ in 0..200 {
                    let x: Vec<f64> = (0..p).map(|_| rng.random()).collect();
                    assert!(
                        centers.iter().any(|c| metric.distance(c, &x) <= r),
                        "point {x:?} uncovered at r={r}, p={p}, {metric:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(sup_ball_volume(2, 0.5, Metric::Chebyshev), 1.0);
        assert_relative_eq!(sup_ball_volume(1, 0.1, Metric::Euclidean), 0.2, epsilon = 1e-15);
        assert_relative_eq!(
            sup_ball_volume(2, 0.1, Metric::Euclidean),
            std::f64::consts::PI * 0.01,
            epsilon = 1e-15
        );
        assert_relative_eq!(unit_ball_volume(3), 4.0 / 3.0 * std::f64::consts::PI, epsilon = 1e-14);
    }

    #[test]
    fn ball_volume_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples = 100_000;
        for (p, r, metric) in [
            (2, 0.3, Metric::Euclidean),
            (3, 0.4, Metric::Euclidean),
            (2, 0.2, Metric::Chebyshev),
        ] {
            let center = vec![0.5; p];
            let hits = (0..samples)
                .filter(|_| {
                    let x: Vec<f64> = (0..p).map(|_| rng.random()).collect();
                    metric.distance(&x, &center) <= r
                })
                .count();
            let est = hits as f64 / samples as f64;
            let se = (est * (1.0 - est) / samples as f64).sqrt();
            let exact = sup_ball_volume(p, r, metric);
            assert!((est - exact).abs() <= 3.0 * se, "p={p}: {est} vs {exact} (se {se})");
        }
    }

    #[test]
    fn scaling_regimes_positive_nondecreasing() {
        let regimes = [
            ScalingRegime::Critical,
            ScalingRegime::Supercritical { alpha: 0.5 },
            ScalingRegime::Supercritical { alpha: 2.0 },
            ScalingRegime::Subcritical { beta: 0.8 },
        ];
        for regime in regimes {
            let mut prev = 0.0;
            for n in 1..5000 {
                let eta = regime.eta(n, 2);
                assert!(eta > 0.0 && eta >= prev, "{regime:?} at n={n}");
                prev = eta;
            }
        }
        assert_eq!(ScalingRegime::Critical.eta(10_000, 2), 100.0);
        assert!(ScalingRegime::Subcritical { beta: 0.4 }.validate(2).is_err());
    }

    #[test]
    fn grid_neighbor_search_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for p in 1..=3 {
            let c = random_cloud(&mut rng, 400, p).scaled(7.0).unwrap();
            for metric in [Metric::Euclidean, Metric::Chebyshev] {
                let radius = 0.9;
                let fast = neighbor_pairs(&c, metric, radius);
                let mut slow = Vec::new();
                for i in 0..c.len() {
                    for j in (i + 1)..c.len() {
                        let d = c.distance(i, j, metric);
                        if d <= radius {
                            slow.push((i as u32, j as u32, d));
                        }
                    }
                }
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn csv_load_and_strictness() {
        let text = "x,y\n0.1,0.2\n0.3,0.4\n";
        let c = read_cloud_csv(text.as_bytes(), CsvOptions::default()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.point(1), &[0.3, 0.4]);

        let bad_arity = "0.1,0.2\n0.3\n";
        assert!(read_cloud_csv(bad_arity.as_bytes(), CsvOptions::default()).is_err());

        let outside = "0.0,2.0\n1.0,4.0\n";
        assert!(matches!(
            read_cloud_csv(outside.as_bytes(), CsvOptions::default()),
            Err(GeometryError::OutsideCube { .. })
        ));
        let c = read_cloud_csv(
            outside.as_bytes(),
            CsvOptions {
                allow_outside_cube: true,
            },
        )
        .unwrap();
        assert_eq!(c.point(0), &[0.0, 0.5]);
        assert_eq!(c.point(1), &[0.25, 1.0]);
    }

    proptest! {
        #[test]
        fn metric_axioms(a in prop::collection::vec(0.0f64..1.0, 3), b in prop::collection::vec(0.0f64..1.0, 3), c in prop::collection::vec(0.0f64..1.0, 3)) {
            for m in [Metric::Euclidean, Metric::Chebyshev] {
                let ab = m.distance(&a, &b);
                prop_assert!(ab >= 0.0);
                prop_assert_eq!(ab, m.distance(&b, &a));
                prop_assert!(ab <= m.distance(&a, &c) + m.distance(&c, &b) + 1e-12);
            }
        }

        #[test]
        fn ball_count_monotone_in_radius(seed in 0u64..1000, r1 in 0.0f64..1.5, dr in 0.0f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_cloud(&mut rng, 30, 2);
            let center = [rng.random::<f64>(), rng.random::<f64>()];
            prop_assert!(ball_count(&c, &center, r1, Metric::Euclidean) <= ball_count(&c, &center, r1 + dr, Metric::Euclidean));
        }

        #[test]
        fn csv_roundtrip(seed in 0u64..1000, n in 1usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_cloud(&mut rng, n, 3);
            let mut buf = Vec::new();
            write_cloud_csv(&mut buf, &c).unwrap();
            let back = read_cloud_csv(buf.as_slice(), CsvOptions::default()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
