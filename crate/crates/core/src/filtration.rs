//! Čech and Vietoris-Rips filtrations of point clouds.
//!
//! Filtration values follow the set-theoretic definitions directly:
//!
//! * Rips: a simplex enters at its diameter (max pairwise distance), so an
//!   edge between points at distance 1 appears at `r = 1`, not `1/2`.
//! * Čech: a simplex enters at the radius of the minimal enclosing ball of
//!   its vertices (the smallest `r` at which the closed `r`-balls meet).
//!
//! Simplices are stored in the total order `(value, dim, vertices)`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{neighbor_pairs, Metric, PointCloud};
use crate::miniball::minimal_enclosing_ball;
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum FiltrationError {
    #[error("Čech complexes require the Euclidean metric, got {0:?}")]
    UnsupportedMetric(Metric),
    #[error("complex budget exceeded: more than {limit} simplices")]
    BudgetExceeded { limit: usize },
    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("simplex vertices must be strictly increasing: {0:?}")]
    UnsortedSimplex(Vec<u32>),
    #[error("invalid complex: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A simplex as a strictly increasing list of point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<u32>);

impl Simplex {
    pub fn new(vertices: Vec<u32>) -> Result<Self, FiltrationError> {
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FiltrationError::UnsortedSimplex(vertices));
        }
        Ok(Self(vertices))
    }

    /// Sorts and deduplicates.
    pub fn from_unsorted(mut vertices: Vec<u32>) -> Result<Self, FiltrationError> {
        vertices.sort_unstable();
        vertices.dedup();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in the order obtained by dropping vertex 0, 1, ...
    pub fn faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let k = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..k).map(move |i| {
            let mut v = self.0.clone();
            v.remove(i);
            Simplex(v)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    Cech,
    Rips,
}

impl std::str::FromStr for ComplexKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rips" | "vietoris-rips" | "vr" => Ok(ComplexKind::Rips),
            "cech" | "čech" => Ok(ComplexKind::Cech),
            other => Err(format!("unknown complex kind `{other}`")),
        }
    }
}

impl std::fmt::Display for ComplexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ComplexKind::Cech => "cech",
            ComplexKind::Rips => "rips",
        })
    }
}

/// The filtration `K(X, r), 0 <= r <= max_radius`, truncated at `max_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex<T: Scalar = f64> {
    simplices: Vec<(Simplex, T)>,
    kind: ComplexKind,
    max_dim: usize,
    max_radius: T,
    num_points: usize,
}

impl<T: Scalar> FilteredComplex<T> {
    /// Assembles a complex from arbitrary `(simplex, value)` pairs, sorting
    /// them into filtration order and checking every invariant.
    pub fn from_simplices(
        kind: ComplexKind,
        max_dim: usize,
        max_radius: T,
        num_points: usize,
        mut simplices: Vec<(Simplex, T)>,
    ) -> Result<Self, FiltrationError> {
        sort_filtration(&mut simplices);
        let complex = Self {
            simplices,
            kind,
            max_dim,
            max_radius,
            num_points,
        };
        complex.validate()?;
        Ok(complex)
    }

    pub fn simplices(&self) -> &[(Simplex, T)] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn kind(&self) -> ComplexKind {
        self.kind
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_radius(&self) -> T {
        self.max_radius
    }

    /// Number of points of the underlying cloud (vertices `0..num_points`).
    pub fn num_points(&self) -> usize {
        self.num_points
    }

    /// Position of each simplex in the filtration order.
    pub fn index_map(&self) -> HashMap<&[u32], usize> {
        self.simplices
            .iter()
            .enumerate()
            .map(|(i, (s, _))| (s.vertices(), i))
            .collect()
    }

    /// Checks face closure, value monotonicity and the total order.
    pub fn validate(&self) -> Result<(), FiltrationError> {
        let index = self.index_map();
        if index.len() != self.simplices.len() {
            return Err(FiltrationError::Invalid("duplicate simplex".into()));
        }
        for (i, (s, v)) in self.simplices.iter().enumerate() {
            if !(*v >= T::zero()) {
                return Err(FiltrationError::Invalid(format!(
                    "negative value on {:?}",
                    s.vertices()
                )));
            }
            if s.dim() > self.max_dim {
                return Err(FiltrationError::Invalid(format!("{:?} exceeds max_dim", s.vertices())));
            }
            if *v > self.max_radius {
                return Err(FiltrationError::Invalid(format!(
                    "{:?} exceeds max_radius",
                    s.vertices()
                )));
            }
            if s.vertices().iter().any(|&x| x as usize >= self.num_points) {
                return Err(FiltrationError::Invalid(format!(
                    "{:?} references a missing point",
                    s.vertices()
                )));
            }
            for face in s.faces() {
                match index.get(face.vertices()) {
                    None => {
                        return Err(FiltrationError::Invalid(format!(
                            "face {:?} of {:?} missing",
                            face.vertices(),
                            s.vertices()
                        )))
                    }
                    Some(&j) if j >= i || self.simplices[j].1 > *v => {
                        return Err(FiltrationError::Invalid(format!(
                            "face {:?} of {:?} out of order",
                            face.vertices(),
                            s.vertices()
                        )))
                    }
                    _ => {}
                }
            }
            if i > 0 && filtration_cmp(&self.simplices[i - 1], &self.simplices[i]) != std::cmp::Ordering::Less {
                return Err(FiltrationError::Invalid("simplices not in filtration order".into()));
            }
        }
        Ok(())
    }

    /// Simplices with value `<= r`, as a complex with `max_radius = r`.
    pub fn truncated(&self, r: T) -> Self {
        let cut = self.simplices.partition_point(|(_, v)| *v <= r);
        Self {
            simplices: self.simplices[..cut].to_vec(),
            kind: self.kind,
            max_dim: self.max_dim,
            max_radius: r.min(self.max_radius),
            num_points: self.num_points,
        }
    }

    /// The filtration of `eta * X`: same simplices, values times `eta`.
    pub fn rescale(&self, eta: T) -> Result<Self, FiltrationError> {
        if !(eta > T::zero()) || !eta.is_finite() {
            return Err(FiltrationError::InvalidScale(eta.as_f64()));
        }
        let mut simplices: Vec<(Simplex, T)> = self.simplices.iter().map(|(s, v)| (s.clone(), *v * eta)).collect();
        // Products can collapse distinct values into ties; restore the order.
        sort_filtration(&mut simplices);
        Ok(Self {
            simplices,
            kind: self.kind,
            max_dim: self.max_dim,
            max_radius: self.max_radius * eta,
            num_points: self.num_points,
        })
    }

    /// Text form: an optional `#` header, then `value v0 v1 ... vk` per simplex.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# kind={} max_dim={} max_radius={} num_points={}\n",
            self.kind, self.max_dim, self.max_radius, self.num_points
        );
        for (s, v) in &self.simplices {
            let _ = write!(out, "{v}");
            for x in s.vertices() {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, FiltrationError> {
        let mut kind = ComplexKind::Rips;
        let mut max_dim = None;
        let mut max_radius = None;
        let mut num_points = None;
        let mut simplices = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let parse_err = |message: String| FiltrationError::Parse {
                line: lineno + 1,
                message,
            };
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    let Some((k, v)) = field.split_once('=') else { continue };
                    match k {
                        "kind" => kind = v.parse().map_err(parse_err)?,
                        "max_dim" => max_dim = Some(v.parse::<usize>().map_err(|e| parse_err(e.to_string()))?),
                        "max_radius" => {
                            max_radius = Some(v.parse::<T>().map_err(|_| parse_err(format!("bad max_radius `{v}`")))?)
                        }
                        "num_points" => num_points = Some(v.parse::<usize>().map_err(|e| parse_err(e.to_string()))?),
                        _ => {}
                    }
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let value_field = fields.next().unwrap_or_default();
            let value = value_field
                .parse::<T>()
                .map_err(|_| parse_err(format!("bad value `{value_field}`")))?;
            let vertices = fields
                .map(|f| f.parse::<u32>().map_err(|e| parse_err(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let simplex = Simplex::new(vertices).map_err(|e| parse_err(e.to_string()))?;
            simplices.push((simplex, value));
        }
        let max_dim = max_dim.unwrap_or_else(|| simplices.iter().map(|(s, _)| s.dim()).max().unwrap_or(0));
        let max_radius = max_radius.unwrap_or_else(|| simplices.iter().map(|(_, v)| *v).fold(T::zero(), T::max));
        let num_points = num_points.unwrap_or_else(|| {
            simplices
                .iter()
                .flat_map(|(s, _)| s.vertices().iter().map(|&v| v as usize + 1))
                .max()
                .unwrap_or(0)
        });
        Self::from_simplices(kind, max_dim, max_radius, num_points, simplices)
    }
}

fn filtration_cmp<T: Scalar>(a: &(Simplex, T), b: &(Simplex, T)) -> std::cmp::Ordering {
    cmp_scalar(a.1, b.1)
        .then(a.0.dim().cmp(&b.0.dim()))
        .then_with(|| a.0.vertices().cmp(b.0.vertices()))
}

fn sort_filtration<T: Scalar>(simplices: &mut [(Simplex, T)]) {
    simplices.sort_by(filtration_cmp);
}

/// Vietoris-Rips filtration: `sigma` enters at `diam(sigma)`.
pub fn build_rips<T: Scalar>(
    cloud: &PointCloud<T>,
    metric: Metric,
    max_dim: usize,
    max_radius: T,
) -> FilteredComplex<T> {
    build(ComplexKind::Rips, cloud, metric, max_dim, max_radius, None).expect("unbudgeted Rips build cannot fail")
}

/// Čech filtration: `sigma` enters at the radius of its minimal enclosing ball.
pub fn build_cech<T: Scalar>(
    cloud: &PointCloud<T>,
    metric: Metric,
    max_dim: usize,
    max_radius: T,
) -> Result<FilteredComplex<T>, FiltrationError> {
    build(ComplexKind::Cech, cloud, metric, max_dim, max_radius, None)
}

/// Builds either filtration, failing fast once more than `budget` simplices
/// have been generated.
pub fn build<T: Scalar>(
    kind: ComplexKind,
    cloud: &PointCloud<T>,
    metric: Metric,
    max_dim: usize,
    max_radius: T,
    budget: Option<usize>,
) -> Result<FilteredComplex<T>, FiltrationError> {
    if kind == ComplexKind::Cech && metric != Metric::Euclidean {
        return Err(FiltrationError::UnsupportedMetric(metric));
    }
    let n = cloud.len();
    let limit = budget.unwrap_or(usize::MAX);
    let mut out: Vec<(Simplex, T)> = Vec::new();
    let push = |out: &mut Vec<(Simplex, T)>, s: Simplex, v: T| -> Result<(), FiltrationError> {
        if out.len() >= limit {
            return Err(FiltrationError::BudgetExceeded { limit });
        }
        out.push((s, v));
        Ok(())
    };
    if max_radius >= T::zero() {
        for i in 0..n {
            push(&mut out, Simplex(vec![i as u32]), T::zero())?;
        }
    }
    if max_dim >= 1 && n >= 2 && max_radius >= T::zero() {
        // Any two vertices of a Čech simplex at level r are within 2r.
        let edge_radius = match kind {
            ComplexKind::Rips => max_radius,
            ComplexKind::Cech => max_radius + max_radius,
        };
        let mut upper: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut edge_len: HashMap<(u32, u32), T> = HashMap::new();
        for (i, j, d) in neighbor_pairs(cloud, metric, edge_radius) {
            upper[i as usize].push(j);
            edge_len.insert((i, j), d);
        }
        let mut ctx = Expansion {
            kind,
            cloud,
            max_dim,
            max_radius,
            upper: &upper,
            edge_len: &edge_len,
        };
        for v in 0..n as u32 {
            let candidates = upper[v as usize].clone();
            ctx.expand(&mut vec![v], T::zero(), &candidates, &mut out, &push)?;
        }
    }
    sort_filtration(&mut out);
    Ok(FilteredComplex {
        simplices: out,
        kind,
        max_dim,
        max_radius,
        num_points: n,
    })
}

struct Expansion<'a, T: Scalar> {
    kind: ComplexKind,
    cloud: &'a PointCloud<T>,
    max_dim: usize,
    max_radius: T,
    upper: &'a [Vec<u32>],
    edge_len: &'a HashMap<(u32, u32), T>,
}

impl<T: Scalar> Expansion<'_, T> {
    fn expand<F>(
        &mut self,
        simplex: &mut Vec<u32>,
        value: T,
        candidates: &[u32],
        out: &mut Vec<(Simplex, T)>,
        push: &F,
    ) -> Result<(), FiltrationError>
    where
        F: Fn(&mut Vec<(Simplex, T)>, Simplex, T) -> Result<(), FiltrationError>,
    {
        if simplex.len() > self.max_dim {
            return Ok(());
        }
        for (ci, &w) in candidates.iter().enumerate() {
            let new_value = match self.kind {
                ComplexKind::Rips => simplex.iter().map(|&u| self.edge_len[&(u, w)]).fold(value, T::max),
                ComplexKind::Cech => {
                    let pts: Vec<&[T]> = simplex
                        .iter()
                        .chain(std::iter::once(&w))
                        .map(|&u| self.cloud.point(u as usize))
                        .collect();
                    self.cloud.scale() * minimal_enclosing_ball(&pts).radius
                }
            };
            // Values are monotone along cofaces, so nothing above a rejected
            // simplex can enter either.
            if new_value > self.max_radius {
                continue;
            }
            simplex.push(w);
            push(out, Simplex(simplex.clone()), new_value)?;
            if simplex.len() <= self.max_dim {
                let next: Vec<u32> = sorted_intersection(&candidates[ci + 1..], &self.upper[w as usize]);
                if !next.is_empty() {
                    self.expand(simplex, new_value, &next, out, push)?;
                }
            }
            simplex.pop();
        }
        Ok(())
    }
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// `#{sigma : dim(sigma) = j, value(sigma) <= r}`.
pub fn count_simplices<T: Scalar>(complex: &FilteredComplex<T>, j: usize, r: T) -> usize {
    complex
        .simplices()
        .iter()
        .take_while(|(_, v)| *v <= r)
        .filter(|(s, _)| s.dim() == j)
        .count()
}

/// `j`-simplices with value `<= r` having at least one vertex in `vertex_set`.
pub fn count_simplices_localized<T: Scalar>(
    complex: &FilteredComplex<T>,
    j: usize,
    r: T,
    vertex_set: &[usize],
) -> usize {
    let members: HashSet<u32> = vertex_set.iter().map(|&v| v as u32).collect();
    complex
        .simplices()
        .iter()
        .take_while(|(_, v)| *v <= r)
        .filter(|(s, _)| s.dim() == j && s.vertices().iter().any(|v| members.contains(v)))
        .count()
}

/// The combinatorial isomorphism `K(eta X, r) ~ K(X, r / eta)` as an operation.
pub fn rescale_complex<T: Scalar>(complex: &FilteredComplex<T>, eta: T) -> Result<FilteredComplex<T>, FiltrationError> {
    complex.rescale(eta)
}
