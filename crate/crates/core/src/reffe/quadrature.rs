use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::CellTopology;
use crate::error::{Error, Result};
use crate::tensors::Point;

/// Highest supported exactness degree on n-cubes.
pub const MAX_CUBE_DEGREE: usize = 40;
/// Highest supported exactness degree on simplices.
pub const MAX_SIMPLEX_DEGREE: usize = 30;

/// Points and positive weights on a reference cell.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<const D: usize> {
    pub topology: CellTopology,
    pub points: Vec<Point<D>>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl<const D: usize> QuadratureRule<D> {
    #[must_use]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, exact to degree `2n − 1`.
#[must_use]
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = 0.5 * (t + 1.0);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn points_for(degree: usize) -> usize {
    degree / 2 + 1
}

/// Flat rule of any dimension from 0 to 3: coordinates and weights.
pub(crate) fn raw_rule(topology: Option<CellTopology>, degree: usize) -> Result<(usize, Vec<f64>, Vec<f64>)> {
    let Some(t) = topology else {
        return Ok((0, Vec::new(), vec![1.0]));
    };
    let d = t.dim();
    let max = if t.is_simplex() { MAX_SIMPLEX_DEGREE } else { MAX_CUBE_DEGREE };
    if degree > max {
        return Err(Error::Unsupported(format!("quadrature of degree {degree} on {t}")));
    }
    // Per-direction degrees: the collapsed directions of a simplex carry the
    // extra powers of the Duffy Jacobian.
    let degs: Vec<usize> = (0..d)
        .map(|k| if t.is_simplex() { degree + d - 1 - k } else { degree })
        .collect();
    let rules: Vec<(Vec<f64>, Vec<f64>)> = degs.iter().map(|&q| gauss_legendre(points_for(q))).collect();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let u: Vec<f64> = (0..d).map(|k| rules[k].0[idx[k]]).collect();
        let mut w: f64 = (0..d).map(|k| rules[k].1[idx[k]]).product();
        if t.is_simplex() {
            // x_0 = u_0, x_1 = u_1 (1 − u_0), x_2 = u_2 (1 − u_0)(1 − u_1);
            // the Jacobian is the product of the running factors.
            let mut rest = 1.0;
            for k in 0..d {
                coords.push(u[k] * rest);
                w *= rest;
                rest *= 1.0 - u[k];
            }
        } else {
            coords.extend_from_slice(&u);
        }
        weights.push(w);
        let mut k = d;
        loop {
            if k == 0 {
                return Ok((d, coords, weights));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < rules[k].0.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Quadrature on a reference cell, exact for polynomials of total degree up
/// to `degree`: tensor Gauss–Legendre on n-cubes, collapsed (Duffy) tensor
/// Gauss–Legendre on simplices.
pub fn make_quadrature<const D: usize>(topology: CellTopology, degree: usize) -> Result<QuadratureRule<D>> {
    if topology.dim() != D {
        return Err(Error::Shape(format!("{topology} rule requested in dimension {D}")));
    }
    let (_, coords, weights) = raw_rule(Some(topology), degree)?;
    let points = coords
        .chunks_exact(D.max(1))
        .map(|c| Point::new(core::array::from_fn(|k| c[k])))
        .collect();
    Ok(QuadratureRule { topology, points, weights, degree })
}

/// Quadrature on facet `facet` of the reference cell, with points expressed
/// in the cell's reference coordinates. Facet point `s` maps to
/// `v_0 + Σ_k s_k t_k`, where `v_0` and the tangents `t_k` come from
/// [`facet_frame`]. Weights are those of the reference facet.
pub fn facet_quadrature<const D: usize>(
    topology: CellTopology,
    facet: usize,
    degree: usize,
) -> Result<QuadratureRule<D>> {
    if topology.dim() != D {
        return Err(Error::Shape(format!("{topology} rule requested in dimension {D}")));
    }
    let ft = topology.facet_topology();
    let (fd, coords, weights) = raw_rule(ft, degree)?;
    let (v0, tangents) = facet_frame::<D>(topology, facet)?;
    let n = weights.len();
    let points = (0..n)
        .map(|q| {
            let mut x = v0;
            for (k, t) in tangents.iter().enumerate() {
                x = x + *t * coords[q * fd + k];
            }
            x
        })
        .collect();
    Ok(QuadratureRule { topology, points, weights, degree })
}

/// First vertex and tangent vectors of a reference facet.
pub fn facet_frame<const D: usize>(topology: CellTopology, facet: usize) -> Result<(Point<D>, Vec<Point<D>>)> {
    let facets = topology.facets();
    let verts = facets.get(facet).ok_or(Error::IndexOutOfBounds {
        index: facet,
        len: facets.len(),
    })?;
    let vc = topology.vertex_coords();
    let p = |v: usize| Point::<D>::new(core::array::from_fn(|k| vc[v][k]));
    let tangents = topology
        .spanning_vertices(verts)
        .into_iter()
        .map(|(a, b)| p(b) - p(a))
        .collect();
    Ok((p(verts[0]), tangents))
}

/// Unit outward normal of a reference facet.
pub fn reference_normal<const D: usize>(topology: CellTopology, facet: usize) -> Result<Point<D>> {
    let (v0, t) = facet_frame::<D>(topology, facet)?;
    let mut n = match (D, t.len()) {
        (1, _) => Point::new(core::array::from_fn(|_| 1.0)),
        (2, 1) => Point::new(core::array::from_fn(|k| [t[0][1], -t[0][0]][k])),
        (3, 2) => {
            let (a, b) = (t[0], t[1]);
            let c = [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            Point::new(core::array::from_fn(|k| c[k]))
        }
        _ => return Err(Error::Unsupported(format!("normals of {topology}"))),
    };
    let vc = topology.vertex_coords();
    let nv = vc.len() as f64;
    let centroid = Point::<D>::new(core::array::from_fn(|k| vc.iter().map(|v| v[k]).sum::<f64>() / nv));
    if n.dot(&(v0 - centroid)) < 0.0 {
        n = -n;
    }
    Ok(n * (1.0 / n.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_small() {
        let (x, w) = gauss_legendre(1);
        assert_eq!((x[0], w[0]), (0.5, 1.0));
        let (x, w) = gauss_legendre(2);
        let s = 0.5 / 3f64.sqrt();
        assert!((x[0] - (0.5 - s)).abs() < 1e-15 && (x[1] - (0.5 + s)).abs() < 1e-15);
        assert!((w[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quad_degree_one_is_midpoint() {
        let q = make_quadrature::<2>(CellTopology::Quad, 1).unwrap();
        assert_eq!(q.points, [Point::new([0.5, 0.5])]);
        assert_eq!(q.weights, [1.0]);
        assert_eq!(make_quadrature::<2>(CellTopology::Quad, 3).unwrap().len(), 4);
    }

    #[test]
    fn normals_point_outward() {
        let n = reference_normal::<2>(CellTopology::Tri, 2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((n - Point::new([r, r])).norm() < 1e-15);
        let n = reference_normal::<3>(CellTopology::Hex, 0).unwrap();
        assert_eq!(n, Point::new([0.0, 0.0, -1.0]));
    }
}
