use crate::filtration::FilteredComplex;
use crate::scalar::Scalar;

/// Sparse F2 boundary matrix in filtration order. Column `j` holds the row
/// indices (ascending) of the codimension-one faces of simplex `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<usize>>,
    dims: Vec<usize>,
}

impl BoundaryMatrix {
    pub fn from_complex<T: Scalar>(complex: &FilteredComplex<T>) -> Self {
        let index = complex.index_map();
        let mut columns = Vec::with_capacity(complex.len());
        let mut dims = Vec::with_capacity(complex.len());
        for (s, _) in complex.simplices() {
            let mut col: Vec<usize> = s.faces().map(|f| index[f.vertices()]).collect();
            col.sort_unstable();
            columns.push(col);
            dims.push(s.dim());
        }
        Self { columns, dims }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn dim(&self, j: usize) -> usize {
        self.dims[j]
    }

    /// `∂∘∂ = 0`: the boundary of every boundary column vanishes over F2.
    pub fn boundary_squared_vanishes(&self) -> bool {
        self.columns.iter().all(|col| {
            let mut acc: Vec<usize> = Vec::new();
            for &face in col {
                acc = sym_diff(&acc, &self.columns[face]);
            }
            acc.is_empty()
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Skip columns already known to be positive (Chen-Kerber clearing).
    pub clearing: bool,
}

/// Output of the column reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    /// Reduced columns `R = ∂V`.
    pub reduced: Vec<Vec<usize>>,
    /// `(birth simplex, death simplex)` index pairs, including zero-length ones.
    pub pairs: Vec<(usize, usize)>,
    /// Simplices creating a class that never dies.
    pub essential: Vec<usize>,
}

/// Standard left-to-right column reduction over F2.
pub fn reduce(matrix: &BoundaryMatrix, options: ReduceOptions) -> Reduction {
    let n = matrix.len();
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];

    let order: Vec<usize> = if options.clearing {
        // Highest dimension first so that pivots clear lower-dimensional columns.
        let max_dim = matrix.dims.iter().copied().max().unwrap_or(0);
        (0..=max_dim)
            .rev()
            .flat_map(|d| (0..n).filter(move |&j| matrix.dims[j] == d))
            .collect()
    } else {
        (0..n).collect()
    };

    for j in order {
        if cleared[j] {
            continue;
        }
        let mut col = matrix.columns[j].clone();
        while let Some(&low) = col.last() {
            match owner[low] {
                Some(k) => col = sym_diff(&col, &reduced[k]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            owner[low] = Some(j);
            if options.clearing {
                cleared[low] = true;
            }
        }
        reduced[j] = col;
    }

    let mut pairs: Vec<(usize, usize)> = (0..n).filter_map(|j| reduced[j].last().map(|&i| (i, j))).collect();
    pairs.sort_unstable();
    let essential = (0..n)
        .filter(|&j| reduced[j].is_empty() && owner[j].is_none())
        .collect();
    Reduction {
        reduced,
        pairs,
        essential,
    }
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
