//! Persistent homology over F2.
//!
//! [`compute_persistence`] keeps the full pairing (zero-length pairs and the
//! top dimension included) for bookkeeping; [`PersistenceDiagram`] is the
//! multiset of off-diagonal points in degrees `q <= max_dim - 1`, the only
//! degrees a complex truncated at `max_dim` determines.

mod f2;
mod reduction;
mod union_find;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};

use thiserror::Error;

use crate::filtration::FilteredComplex;
use crate::scalar::{cmp_scalar, Scalar};

pub use f2::{rank as f2_rank, BitVec};
pub use reduction::{reduce, BoundaryMatrix, ReduceOptions, Reduction};
pub use union_find::zero_dim_diagram;

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("invalid Betti query: need 0 <= r <= s, got r = {r}, s = {s}")]
    InvalidQuery { r: f64, s: f64 },
    #[error("invalid index injection: {0}")]
    InvalidInjection(String),
    #[error("diagram csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Death coordinate of a diagram point; `Infinite` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Death<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Death<T> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Death::Infinite)
    }

    /// `death > s`.
    pub fn exceeds(&self, s: T) -> bool {
        match self {
            Death::Finite(d) => *d > s,
            Death::Infinite => true,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Death::Finite(d) => d.as_f64(),
            Death::Infinite => f64::INFINITY,
        }
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Death::Finite(a), Death::Finite(b)) => cmp_scalar(*a, *b),
            (Death::Finite(_), Death::Infinite) => Ordering::Less,
            (Death::Infinite, Death::Finite(_)) => Ordering::Greater,
            (Death::Infinite, Death::Infinite) => Ordering::Equal,
        }
    }
}

impl<T: Scalar> fmt::Display for Death<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Death::Finite(d) => write!(f, "{d}"),
            Death::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint<T> {
    pub dim: usize,
    pub birth: T,
    pub death: Death<T>,
}

impl<T: Scalar> DiagramPoint<T> {
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(cmp_scalar(self.birth, other.birth))
            .then(self.death.total_cmp(&other.death))
    }
}

/// Multiset of `(dim, birth, death)` with `birth < death`, sorted by
/// `(dim, birth, death)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram<T: Scalar = f64> {
    points: Vec<DiagramPoint<T>>,
}

impl<T: Scalar> PersistenceDiagram<T> {
    /// Drops diagonal points and sorts.
    pub fn from_points(points: impl IntoIterator<Item = DiagramPoint<T>>) -> Self {
        let mut points: Vec<_> = points.into_iter().filter(|p| p.death.exceeds(p.birth)).collect();
        points.sort_by(DiagramPoint::total_cmp);
        Self { points }
    }

    pub fn points(&self) -> &[DiagramPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn in_dim(&self, q: usize) -> impl Iterator<Item = &DiagramPoint<T>> + '_ {
        self.points.iter().filter(move |p| p.dim == q)
    }

    /// The diagram of `eta X`.
    pub fn scaled(&self, eta: T) -> Self {
        Self::from_points(self.points.iter().map(|p| DiagramPoint {
            dim: p.dim,
            birth: p.birth * eta,
            death: match p.death {
                Death::Finite(d) => Death::Finite(d * eta),
                Death::Infinite => Death::Infinite,
            },
        }))
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<(), PersistenceError> {
        writeln!(writer, "dim,birth,death")?;
        for p in &self.points {
            writeln!(writer, "{},{},{}", p.dim, p.birth, p.death)?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(mut reader: R) -> Result<Self, PersistenceError> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("dim")) {
                continue;
            }
            let err = |message: String| PersistenceError::Csv { line: i + 1, message };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [dim, birth, death] = fields[..] else {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            };
            let dim = dim.parse().map_err(|_| err(format!("bad dim `{dim}`")))?;
            let birth: T = birth.parse().map_err(|_| err(format!("bad birth `{birth}`")))?;
            let death = if death.eq_ignore_ascii_case("inf") {
                Death::Infinite
            } else {
                Death::Finite(death.parse().map_err(|_| err(format!("bad death `{death}`")))?)
            };
            if !(birth >= T::zero()) || !death.exceeds(birth) {
                return Err(err("need 0 <= birth < death".into()));
            }
            points.push(DiagramPoint { dim, birth, death });
        }
        Ok(Self::from_points(points))
    }
}

/// The parameter pair `(r, s)` of a persistent Betti number in degree `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BettiQuery<T = f64> {
    pub q: usize,
    pub r: T,
    pub s: T,
}

impl<T: Scalar> BettiQuery<T> {
    pub fn new(q: usize, r: T, s: T) -> Result<Self, PersistenceError> {
        let query = Self { q, r, s };
        query.validate()?;
        Ok(query)
    }

    pub fn validate(&self) -> Result<(), PersistenceError> {
        if !(self.r >= T::zero() && self.r <= self.s) {
            return Err(PersistenceError::InvalidQuery {
                r: self.r.as_f64(),
                s: self.s.as_f64(),
            });
        }
        Ok(())
    }
}

/// Full persistence pairing of a complex.
#[derive(Debug, Clone)]
pub struct Persistence<T: Scalar = f64> {
    /// Every pair, zero-length ones and the top dimension included.
    pub pairs: Vec<DiagramPoint<T>>,
    max_dim: usize,
}

impl<T: Scalar> Persistence<T> {
    /// `β_q(K(r))` from the full pairing.
    pub fn betti(&self, q: usize, r: T) -> usize {
        self.pairs
            .iter()
            .filter(|p| p.dim == q && p.birth <= r && p.death.exceeds(r))
            .count()
    }

    pub fn diagram(&self) -> PersistenceDiagram<T> {
        PersistenceDiagram::from_points(self.pairs.iter().copied().filter(|p| p.dim < self.max_dim))
    }
}

pub fn compute_persistence<T: Scalar>(complex: &FilteredComplex<T>, options: ReduceOptions) -> Persistence<T> {
    let matrix = BoundaryMatrix::from_complex(complex);
    let reduction = reduce(&matrix, options);
    let simplices = complex.simplices();
    let value = |i: usize| simplices[i].1;
    let mut pairs: Vec<DiagramPoint<T>> = reduction
        .pairs
        .iter()
        .map(|&(b, d)| DiagramPoint {
            dim: matrix.dim(b),
            birth: value(b),
            death: Death::Finite(value(d)),
        })
        .chain(reduction.essential.iter().map(|&b| DiagramPoint {
            dim: matrix.dim(b),
            birth: value(b),
            death: Death::Infinite,
        }))
        .collect();
    pairs.sort_by(DiagramPoint::total_cmp);
    Persistence {
        pairs,
        max_dim: complex.max_dim(),
    }
}

/// Persistence diagram `ξ_q` for every degree `q <= max_dim - 1`.
pub fn diagram<T: Scalar>(complex: &FilteredComplex<T>) -> PersistenceDiagram<T> {
    compute_persistence(complex, ReduceOptions::default()).diagram()
}

/// `β_q^{r,s} = #{(b, d) in ξ_q : b <= r, d > s}`.
pub fn persistent_betti<T: Scalar>(
    diagram: &PersistenceDiagram<T>,
    query: BettiQuery<T>,
) -> Result<usize, PersistenceError> {
    query.validate()?;
    Ok(diagram
        .in_dim(query.q)
        .filter(|p| p.birth <= query.r && p.death.exceeds(query.s))
        .count())
}

/// `dim Z_q(K(r)) - dim(B_q(K(s)) ∩ Z_q(K(r)))` by rank computations on the
/// truncated complexes. Independent of [`reduce`].
pub fn persistent_betti_direct<T: Scalar>(
    complex: &FilteredComplex<T>,
    query: BettiQuery<T>,
) -> Result<usize, PersistenceError> {
    query.validate()?;
    let BettiQuery { q, r, s } = query;
    let index = complex.index_map();
    let simplices = complex.simplices();

    // Row coordinates for q-chains and (q-1)-chains, local to each degree.
    let local = |dim: usize, cut: T| -> Vec<usize> {
        simplices
            .iter()
            .enumerate()
            .filter(|(_, (sx, v))| sx.dim() == dim && *v <= cut)
            .map(|(i, _)| i)
            .collect()
    };
    let q_r = local(q, r);
    let q_s = local(q, s);
    let up_s = local(q + 1, s);

    let boundary_rows = |cols: &[usize], rows: &[usize]| -> Vec<BitVec> {
        let pos: std::collections::HashMap<usize, usize> = rows.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        cols.iter()
            .map(|&j| {
                let mut v = BitVec::zeros(rows.len());
                for face in simplices[j].0.faces() {
                    if let Some(&k) = pos.get(&index[face.vertices()]) {
                        v.set(k);
                    }
                }
                v
            })
            .collect()
    };

    let rank_dq = if q == 0 {
        0
    } else {
        f2_rank(boundary_rows(&q_r, &local(q - 1, r)))
    };
    let dim_z = q_r.len() - rank_dq;

    // B_q(K(s)) is spanned by boundaries of (q+1)-simplices at <= s.
    let b_cols = boundary_rows(&up_s, &q_s);
    let rank_b = f2_rank(b_cols.clone());
    // Since B ⊆ Z, B ∩ Z_q(K(r)) = B ∩ C_q(K(r)); its dimension is the
    // kernel of the projection onto coordinates outside K_q(r).
    let inside: HashSet<usize> = q_r.iter().copied().collect();
    let outside: Vec<usize> = q_s
        .iter()
        .enumerate()
        .filter(|(_, i)| !inside.contains(i))
        .map(|(k, _)| k)
        .collect();
    let projected = b_cols.iter().map(|v| {
        let mut w = BitVec::zeros(outside.len());
        for (k, &row) in outside.iter().enumerate() {
            if v.get(row) {
                w.set(k);
            }
        }
        w
    });
    let rank_proj = f2_rank(projected);
    Ok(dim_z - (rank_b - rank_proj))
}

/// `(|β^{r,s}_q(K(Y)) - β^{r,s}_q(K(X))|, Σ_{j=q}^{q+1} |K_j(Y,s) \ K_j(X,s)|)`
/// where `injection[i]` is the index in `Y` of point `i` of `X`.
pub fn geometric_lemma_gap<T: Scalar>(
    sub: &FilteredComplex<T>,
    sup: &FilteredComplex<T>,
    injection: &[usize],
    query: BettiQuery<T>,
) -> Result<(usize, usize), PersistenceError> {
    query.validate()?;
    if injection.len() != sub.num_points() {
        return Err(PersistenceError::InvalidInjection(format!(
            "{} entries for {} points",
            injection.len(),
            sub.num_points()
        )));
    }
    let mut seen = HashSet::new();
    for &y in injection {
        if y >= sup.num_points() {
            return Err(PersistenceError::InvalidInjection(format!(
                "index {y} out of range for {} points",
                sup.num_points()
            )));
        }
        if !seen.insert(y) {
            return Err(PersistenceError::InvalidInjection(format!("index {y} used twice")));
        }
    }
    let beta_sub = persistent_betti(&diagram(sub), query)?;
    let beta_sup = persistent_betti(&diagram(sup), query)?;
    let in_dims = |dim: usize| dim == query.q || dim == query.q + 1;
    let mapped: HashSet<Vec<u32>> = sub
        .simplices()
        .iter()
        .filter(|(sx, v)| in_dims(sx.dim()) && *v <= query.s)
        .map(|(sx, _)| {
            let mut verts: Vec<u32> = sx.vertices().iter().map(|&x| injection[x as usize] as u32).collect();
            verts.sort_unstable();
            verts
        })
        .collect();
    let added = sup
        .simplices()
        .iter()
        .filter(|(sx, v)| in_dims(sx.dim()) && *v <= query.s && !mapped.contains(sx.vertices()))
        .count();
    Ok((beta_sup.abs_diff(beta_sub), added))
}
