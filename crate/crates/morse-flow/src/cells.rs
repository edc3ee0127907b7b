//! Unstable cells of `−grad f` for flows with closed-form trajectories: any
//! Morse function on the circle and separable functions on the torus.
//!
//! A cell is a product of coordinate segments. A segment runs from the
//! critical value of its factor (`from`) to the adjacent lower critical point
//! (`to`); a point factor has `from == to`. Angles are unwrapped so that
//! `to - from` is the signed arc length.

use derham_core::{Manifold, Real, TrigPoly};
use serde::Serialize;

use crate::critical::{angle_dist, find_critical_points, CriticalOptions, CriticalPoint};
use crate::error::MorseError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub from: f64,
    pub to: f64,
}

impl Segment {
    pub fn point(x: f64) -> Self {
        Self { from: x, to: x }
    }

    pub fn is_point(&self) -> bool {
        self.from == self.to
    }

    pub fn at(&self, u: f64) -> f64 {
        self.from + u * (self.to - self.from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnstableCell {
    pub owner: usize,
    pub segments: Vec<Segment>,
    /// Sign of the parametrization relative to increasing coordinate angles.
    pub param_orientation: i32,
    /// Critical points reached at the far end of each non-point segment.
    pub boundary: Vec<usize>,
}

impl UnstableCell {
    pub fn dim(&self) -> usize {
        self.segments.iter().filter(|s| !s.is_point()).count()
    }
}

/// Critical data of one circle factor: sorted critical angles and, for each
/// maximum, its two neighbouring minima (decreasing side, increasing side).
#[derive(Debug, Clone)]
pub struct CircleFlow {
    pub points: Vec<CriticalPoint>,
    /// `(max id, left min id, right min id, left angle, right angle)`, angles unwrapped around the max.
    pub arcs: Vec<(usize, usize, usize, f64, f64)>,
}

impl CircleFlow {
    pub fn new<T: Real>(h: &TrigPoly<T>, opts: &CriticalOptions) -> Result<Self, MorseError> {
        let points = find_critical_points(h, Manifold::Circle, opts)?;
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].coords[0].partial_cmp(&points[b].coords[0]).unwrap());
        let m = order.len();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut arcs = Vec::new();
        for (k, &i) in order.iter().enumerate() {
            if points[i].index != 1 {
                continue;
            }
            let x = points[i].coords[0];
            let l = order[(k + m - 1) % m];
            let r = order[(k + 1) % m];
            let mut la = points[l].coords[0];
            let mut ra = points[r].coords[0];
            if la >= x {
                la -= two_pi;
            }
            if ra <= x {
                ra += two_pi;
            }
            if points[l].index != 0 || points[r].index != 0 {
                return Err(MorseError::Unsupported("maxima and minima do not alternate".into()));
            }
            arcs.push((i, l, r, la, ra));
        }
        Ok(Self { points, arcs })
    }

    fn arcs_of(&self, id: usize) -> Option<&(usize, usize, usize, f64, f64)> {
        self.arcs.iter().find(|a| a.0 == id)
    }

    /// Factor cells of a critical point: segments with their far-end minima.
    fn factor_cells(&self, id: usize) -> Vec<(Segment, Option<usize>)> {
        let x = self.points[id].coords[0];
        match self.arcs_of(id) {
            None => vec![(Segment::point(x), None)],
            Some(&(_, l, r, la, ra)) => {
                vec![(Segment { from: x, to: ra }, Some(r)), (Segment { from: x, to: la }, Some(l))]
            }
        }
    }

    /// Coboundary of the Morse complex of this factor: `(∂c)(x) = c(right) − c(left)`.
    pub fn coboundary_entry(&self, max_id: usize, min_id: usize) -> i64 {
        match self.arcs_of(max_id) {
            None => 0,
            Some(&(_, l, r, _, _)) => (r == min_id) as i64 - (l == min_id) as i64,
        }
    }
}

/// Flow data for the supported manifolds: one circle flow per factor.
#[derive(Debug, Clone)]
pub struct ProductFlow {
    pub manifold: Manifold,
    pub factors: Vec<CircleFlow>,
    pub points: Vec<CriticalPoint>,
    /// For each critical point, the factor critical-point ids.
    pub factor_ids: Vec<Vec<usize>>,
}

impl ProductFlow {
    pub fn new<T: Real>(f: &TrigPoly<T>, manifold: Manifold, opts: &CriticalOptions) -> Result<Self, MorseError> {
        let parts = match manifold {
            Manifold::Circle => vec![f.clone()],
            Manifold::FlatTorus => f
                .split_separable()
                .ok_or_else(|| MorseError::Unsupported("non-separable f on the torus".into()))?,
        };
        let factors: Vec<CircleFlow> = parts.iter().map(|h| CircleFlow::new(h, opts)).collect::<Result<_, _>>()?;
        let points = find_critical_points(f, manifold, opts)?;
        let mut factor_ids = Vec::with_capacity(points.len());
        for p in &points {
            let ids: Vec<usize> = p
                .coords
                .iter()
                .zip(&factors)
                .map(|(&x, fl)| {
                    fl.points
                        .iter()
                        .position(|c| angle_dist(c.coords[0], x) < 1e-6)
                        .ok_or_else(|| MorseError::Unsupported("critical point is not a product of factor points".into()))
                })
                .collect::<Result<_, _>>()?;
            let idx: usize = ids.iter().zip(&factors).map(|(&i, fl)| fl.points[i].index).sum();
            if idx != p.index {
                return Err(MorseError::Unsupported("index is not additive over factors".into()));
            }
            factor_ids.push(ids);
        }
        Ok(Self { manifold, factors, points, factor_ids })
    }

    pub fn point_of(&self, ids: &[usize]) -> Option<usize> {
        self.factor_ids.iter().position(|f| f == ids)
    }

    /// Critical points of index `q`, in id order.
    pub fn of_index(&self, q: usize) -> Vec<&CriticalPoint> {
        self.points.iter().filter(|p| p.index == q).collect()
    }

    /// Unstable cells of critical point `id`, tiling `W⁻_x` up to measure zero.
    pub fn unstable_cells(&self, id: usize) -> Vec<UnstableCell> {
        let mut cells: Vec<(Vec<Segment>, Vec<Option<usize>>)> = vec![(Vec::new(), Vec::new())];
        for (fl, &fid) in self.factors.iter().zip(&self.factor_ids[id]) {
            let choices = fl.factor_cells(fid);
            cells = cells
                .into_iter()
                .flat_map(|(segs, ends)| {
                    choices.iter().map(move |(s, e)| {
                        let mut segs = segs.clone();
                        let mut ends = ends.clone();
                        segs.push(*s);
                        ends.push(*e);
                        (segs, ends)
                    })
                })
                .collect();
        }
        cells
            .into_iter()
            .map(|(segments, ends)| {
                let param_orientation = segments
                    .iter()
                    .filter(|s| !s.is_point())
                    .map(|s| if s.to > s.from { 1 } else { -1 })
                    .product();
                let boundary = ends
                    .iter()
                    .enumerate()
                    .filter_map(|(k, e)| {
                        e.map(|m| {
                            let mut ids = self.factor_ids[id].clone();
                            ids[k] = m;
                            self.point_of(&ids).expect("product of factor critical points")
                        })
                    })
                    .collect();
                UnstableCell { owner: id, segments, param_orientation, boundary }
            })
            .collect()
    }

    /// Whether a flow line runs from `x` down to `y` (`x ≠ y`).
    pub fn connected(&self, x: usize, y: usize) -> bool {
        if x == y {
            return false;
        }
        self.factor_ids[x].iter().zip(&self.factor_ids[y]).zip(&self.factors).all(|((&a, &b), fl)| {
            a == b || fl.arcs_of(a).is_some_and(|&(_, l, r, _, _)| l == b || r == b)
        })
    }
}

/// Unstable cells of one critical point.
pub fn unstable_cells<T: Real>(
    x: &CriticalPoint,
    f: &TrigPoly<T>,
    manifold: Manifold,
) -> Result<Vec<UnstableCell>, MorseError> {
    let flow = ProductFlow::new(f, manifold, &CriticalOptions::default())?;
    let id = flow
        .points
        .iter()
        .position(|p| p.coords.iter().zip(&x.coords).all(|(a, b)| angle_dist(*a, *b) < 1e-6))
        .ok_or_else(|| MorseError::Unsupported("point is not a critical point of f".into()))?;
    Ok(flow.unstable_cells(id))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Connection {
    pub from: usize,
    pub to: usize,
    /// `dim 𝒯(x, y) = ind x − ind y − 1`.
    pub dim: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseSmaleCertificate {
    pub holds: bool,
    pub connections: Vec<Connection>,
    /// Connections violating transversality (`ind x ≤ ind y`).
    pub violations: Vec<Connection>,
}

/// Transversality holds iff every connection strictly lowers the index.
pub fn certify(points: &[CriticalPoint], connections: &[(usize, usize)]) -> MorseSmaleCertificate {
    let index = |id: usize| points.iter().find(|p| p.id == id).map(|p| p.index as i64).unwrap_or(0);
    let all: Vec<Connection> = connections
        .iter()
        .map(|&(from, to)| Connection { from, to, dim: index(from) - index(to) - 1 })
        .collect();
    let violations: Vec<Connection> = all.iter().filter(|c| c.dim < 0).cloned().collect();
    MorseSmaleCertificate { holds: violations.is_empty(), connections: all, violations }
}

/// Enumerates all connecting trajectories of a supported flow and certifies them.
pub fn check_morse_smale<T: Real>(f: &TrigPoly<T>, manifold: Manifold) -> Result<MorseSmaleCertificate, MorseError> {
    let flow = ProductFlow::new(f, manifold, &CriticalOptions::default())?;
    Ok(certify_flow(&flow))
}

pub fn certify_flow(flow: &ProductFlow) -> MorseSmaleCertificate {
    let n = flow.points.len();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| flow.connected(x, y)).collect();
    certify(&flow.points, &pairs)
}
