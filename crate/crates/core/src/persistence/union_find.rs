use super::{Death, DiagramPoint, PersistenceDiagram};
use crate::filtration::FilteredComplex;
use crate::scalar::Scalar;

/// Degree-zero diagram by union-find over edges in filtration order (elder
/// rule). Much cheaper than a full reduction when only `q = 0` is needed.
pub fn zero_dim_diagram<T: Scalar>(complex: &FilteredComplex<T>) -> PersistenceDiagram<T> {
    let n = complex.num_points();
    let mut parent: Vec<usize> = (0..n).collect();
    // Filtration position of the oldest vertex in each component.
    let mut birth_pos = vec![usize::MAX; n];
    let mut births = vec![T::zero(); n];
    let mut points = Vec::new();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for (pos, (s, value)) in complex.simplices().iter().enumerate() {
        match *s.vertices() {
            [v] => {
                birth_pos[v as usize] = pos;
                births[v as usize] = *value;
            }
            [a, b] => {
                let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
                if ra == rb {
                    continue;
                }
                let (elder, younger) = if birth_pos[ra] < birth_pos[rb] {
                    (ra, rb)
                } else {
                    (rb, ra)
                };
                points.push(DiagramPoint {
                    dim: 0,
                    birth: births[younger],
                    death: Death::Finite(*value),
                });
                parent[younger] = elder;
            }
            _ => {}
        }
    }
    for v in 0..n {
        if find(&mut parent, v) == v && birth_pos[v] != usize::MAX {
            points.push(DiagramPoint {
                dim: 0,
                birth: births[v],
                death: Death::Infinite,
            });
        }
    }
    PersistenceDiagram::from_points(points)
}
