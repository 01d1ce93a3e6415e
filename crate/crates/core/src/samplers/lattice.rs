use std::cmp::Ordering;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{stream_rng, BlockedDensity, Sample, SamplerError, COORD_STREAM, HIDDEN_STREAM};
use crate::geometry::PointCloud;

/// `u` vs `v` under `>_d`: scanning `k = d, d-1, ..., 1`, the first prefix
/// sum `‖u_1^k‖_1` that differs from `‖v_1^k‖_1` decides.
///
/// Panics if `u` and `v` have different lengths.
pub fn total_order(u: &[usize], v: &[usize]) -> Ordering {
    assert_eq!(u.len(), v.len(), "lattice points of different dimension");
    let prefix = |w: &[usize]| -> Vec<usize> {
        w.iter()
            .scan(0usize, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    };
    let (pu, pv) = (prefix(u), prefix(v));
    (0..u.len())
        .rev()
        .map(|k| pu[k].cmp(&pv[k]))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

pub fn total_order_2d(u: [usize; 2], v: [usize; 2]) -> Ordering {
    total_order(&u, &v)
}

/// Block kernel for interior sites, conditioned on the blocks at `u - e_1`
/// and `u - e_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InteriorKernel {
    /// `T(a, b, ·) = w P_h[a] + (1 - w) P_v[b]`.
    Mixture { weight: f64 },
    /// Explicit `T[a][b][c]`.
    Tensor { table: Vec<Vec<Vec<f64>>> },
}

/// Blocked random field on the lattice box `{0..N_1} x {0..N_2}`, simulated
/// site by site in `>_d` order. The corner draws from `κ`, sites on the
/// first axis from `P_h[block(u - e_1)]`, sites on the second axis from
/// `P_v[block(u - e_2)]` and interior sites from the tensor `T`. Points are
/// uniform within the drawn block.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFieldSpec {
    density: BlockedDensity,
    horizontal: Vec<Vec<f64>>,
    vertical: Vec<Vec<f64>>,
    interior: Vec<Vec<Vec<f64>>>,
    extent: Vec<usize>,
}

impl LatticeFieldSpec {
    /// Validates stochasticity, and stationarity of the block field: `π`
    /// must be invariant for `P_h` and `P_v`, and `T` must be additive
    /// (`T(a,b,c) = T(a,0,c) + T(0,b,c) - T(0,0,c)`) with
    /// `Σ_a π_a T(a,0,c) + Σ_b π_b T(0,b,c) - T(0,0,c) = π_c`. Additivity
    /// makes every site's law depend only on its neighbors' marginals, so
    /// each site has block law `π` by induction along the order.
    pub fn new(
        density: BlockedDensity,
        horizontal: Vec<Vec<f64>>,
        vertical: Vec<Vec<f64>>,
        interior: InteriorKernel,
        extent: Vec<usize>,
        min_ratio: f64,
    ) -> Result<Self, SamplerError> {
        let bad = |m: String| Err(SamplerError::InvalidLattice(m));
        if extent.len() != 2 {
            return Err(SamplerError::UnsupportedLatticeDimension(extent.len()));
        }
        if extent.contains(&0) {
            return bad("extent must be positive".into());
        }
        if !(min_ratio > 0.0 && min_ratio <= 1.0) {
            return bad(format!("min_ratio = {min_ratio} outside (0, 1]"));
        }
        let (lo, hi) = (extent[0].min(extent[1]), extent[0].max(extent[1]));
        if (lo as f64) < min_ratio * hi as f64 {
            return bad(format!("extent {extent:?} violates min/max ratio {min_ratio}"));
        }
        let pi = density.masses();
        let k = pi.len();
        check_stochastic("horizontal", &horizontal, k)?;
        check_stochastic("vertical", &vertical, k)?;
        for (name, p) in [("horizontal", &horizontal), ("vertical", &vertical)] {
            for c in 0..k {
                let next: f64 = (0..k).map(|a| pi[a] * p[a][c]).sum();
                if (next - pi[c]).abs() > 1e-9 {
                    return bad(format!("{name} transition does not preserve the block masses"));
                }
            }
        }
        let interior = match interior {
            InteriorKernel::Mixture { weight } => {
                if !(0.0..=1.0).contains(&weight) {
                    return bad(format!("mixture weight {weight} outside [0, 1]"));
                }
                (0..k)
                    .map(|a| {
                        (0..k)
                            .map(|b| {
                                (0..k)
                                    .map(|c| weight * horizontal[a][c] + (1.0 - weight) * vertical[b][c])
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            }
            InteriorKernel::Tensor { table } => table,
        };
        if interior.len() != k {
            return bad(format!("interior tensor must be {k} x {k} x {k}"));
        }
        for (a, slab) in interior.iter().enumerate() {
            check_stochastic(&format!("interior[{a}]"), slab, k)?;
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    let additive = interior[a][0][c] + interior[0][b][c] - interior[0][0][c];
                    if (interior[a][b][c] - additive).abs() > 1e-12 {
                        return bad(format!("interior tensor is not additive at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        for c in 0..k {
            let law: f64 = (0..k).map(|a| pi[a] * interior[a][0][c]).sum::<f64>()
                + (0..k).map(|b| pi[b] * interior[0][b][c]).sum::<f64>()
                - interior[0][0][c];
            if (law - pi[c]).abs() > 1e-9 {
                return bad(format!("interior tensor does not preserve the block masses at {c}"));
            }
        }
        Ok(Self {
            density,
            horizontal,
            vertical,
            interior,
            extent,
        })
    }

    /// Every kernel equal to the block masses: independent sites.
    pub fn independent(density: BlockedDensity, extent: Vec<usize>) -> Result<Self, SamplerError> {
        let pi = density.masses();
        let rows = vec![pi.clone(); pi.len()];
        Self::new(
            density,
            rows.clone(),
            rows,
            InteriorKernel::Mixture { weight: 0.5 },
            extent,
            1e-9,
        )
    }

    pub fn density(&self) -> &BlockedDensity {
        &self.density
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn num_sites(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn with_extent(&self, extent: Vec<usize>) -> Result<Self, SamplerError> {
        Self::new(
            self.density.clone(),
            self.horizontal.clone(),
            self.vertical.clone(),
            InteriorKernel::Tensor {
                table: self.interior.clone(),
            },
            extent,
            1e-9,
        )
    }

    /// Sites of the box sorted increasingly by `>_d`.
    pub fn visiting_order(&self) -> Vec<[usize; 2]> {
        let mut sites: Vec<[usize; 2]> = (0..self.extent[0])
            .flat_map(|i| (0..self.extent[1]).map(move |j| [i, j]))
            .collect();
        sites.sort_by(|u, v| total_order_2d(*u, *v));
        sites
    }
}

fn check_stochastic(name: &str, m: &[Vec<f64>], k: usize) -> Result<(), SamplerError> {
    if m.len() != k || m.iter().any(|r| r.len() != k) {
        return Err(SamplerError::InvalidLattice(format!("{name} must be {k} x {k}")));
    }
    for (i, row) in m.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(SamplerError::InvalidLattice(format!(
                "{name} row {i} is not a distribution"
            )));
        }
    }
    Ok(())
}

/// One field realization; points and hidden blocks are listed in visiting order.
pub fn sample_lattice_field(spec: &LatticeFieldSpec, seed: u64) -> Result<Sample, SamplerError> {
    let weighted = |w: &[f64]| WeightedIndex::new(w).expect("validated distribution");
    let corner = weighted(&spec.density.masses());
    let horizontal: Vec<_> = spec.horizontal.iter().map(|r| weighted(r)).collect();
    let vertical: Vec<_> = spec.vertical.iter().map(|r| weighted(r)).collect();
    let interior: Vec<Vec<_>> = spec
        .interior
        .iter()
        .map(|slab| slab.iter().map(|r| weighted(r)).collect())
        .collect();

    let mut hidden = stream_rng(seed, HIDDEN_STREAM);
    let mut coords_rng = stream_rng(seed, COORD_STREAM);
    let n2 = spec.extent[1];
    let mut block = vec![usize::MAX; spec.num_sites()];
    let mut path = Vec::with_capacity(spec.num_sites());
    let mut coords = Vec::with_capacity(spec.num_sites() * spec.density.dim());
    for [i, j] in spec.visiting_order() {
        let z = match (i, j) {
            (0, 0) => corner.sample(&mut hidden),
            (_, 0) => horizontal[block[(i - 1) * n2]].sample(&mut hidden),
            (0, _) => vertical[block[j - 1]].sample(&mut hidden),
            _ => interior[block[(i - 1) * n2 + j]][block[i * n2 + j - 1]].sample(&mut hidden),
        };
        block[i * n2 + j] = z;
        path.push(z);
        coords.extend(spec.density.blocks()[z].sample(&mut coords_rng));
    }
    Ok(Sample {
        cloud: PointCloud::from_flat(spec.density.dim(), coords)?,
        hidden_path: Some(path),
        seed,
        process_tag: "lattice_field".into(),
    })
}
