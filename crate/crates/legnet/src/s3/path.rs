//! Sampled paths and the quadratures built on them.
//!
//! A path is a list of smooth pieces. Each sample stores the point and its
//! parameter derivative, so inside a sample interval the path is evaluated by
//! cubic Hermite interpolation and integrated with 4-point Gauss. On `P¹` the
//! stored points are unit representatives in `C²`; only their classes matter
//! except to the lift, which needs the representative to be smooth.

use serde::{Deserialize, Serialize};

use super::{eta_at, C2, GeometryError};
use crate::quad::GAUSS4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    S3,
    P1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub p: C2,
    /// `dp/dt`.
    pub v: C2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    space: Space,
    pieces: Vec<Vec<Sample>>,
    reversed: bool,
}

impl SampledPath {
    /// Builds a path from smooth pieces. Parameters must increase strictly
    /// inside each piece and each piece must start where the previous ended.
    pub fn from_pieces(space: Space, pieces: Vec<Vec<Sample>>) -> Result<Self, GeometryError> {
        let pieces: Vec<Vec<Sample>> = pieces.into_iter().filter(|p| !p.is_empty()).collect();
        for (i, piece) in pieces.iter().enumerate() {
            for w in piece.windows(2) {
                if !(w[1].t > w[0].t) {
                    return Err(GeometryError::InvalidPath(format!(
                        "parameters not increasing in piece {i} at t = {}",
                        w[0].t
                    )));
                }
            }
            if i > 0 {
                let prev = pieces[i - 1].last().expect("non-empty");
                let first = &piece[0];
                if (first.t - prev.t).abs() > 1e-12 {
                    return Err(GeometryError::InvalidPath(format!("piece {i} does not start where piece {} ends", i - 1)));
                }
            }
        }
        Ok(SampledPath { space, pieces, reversed: false })
    }

    /// A single smooth piece.
    pub fn single(space: Space, samples: Vec<Sample>) -> Result<Self, GeometryError> {
        Self::from_pieces(space, vec![samples])
    }

    /// The constant path at `p`.
    pub fn constant(space: Space, p: C2) -> Self {
        let s = |t| Sample { t, p, v: C2::default() };
        SampledPath { space, pieces: vec![vec![s(0.0), s(1.0)]], reversed: false }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn pieces(&self) -> &[Vec<Sample>] {
        &self.pieces
    }

    /// Whether the path was produced by [`SampledPath::reversed`] an odd number of times.
    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn samples(&self) -> impl Iterator<Item = &Sample> + '_ {
        self.pieces.iter().flatten()
    }

    pub fn sample_count(&self) -> usize {
        self.pieces.iter().map(Vec::len).sum()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.pieces.first().and_then(|p| p.first())
    }

    pub fn last(&self) -> Option<&Sample> {
        self.pieces.last().and_then(|p| p.last())
    }

    pub fn start(&self) -> Option<C2> {
        self.first().map(|s| s.p)
    }

    pub fn end(&self) -> Option<C2> {
        self.last().map(|s| s.p)
    }

    /// Largest distance between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| p.windows(2).map(|w| w[0].p.distance(&w[1].p)))
            .fold(0.0, f64::max)
    }

    /// The same geometry traversed backwards, with `t ↦ 1 − t`.
    pub fn reversed(&self) -> SampledPath {
        let (t0, t1) = self.param_range();
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|piece| piece.iter().rev().map(|s| Sample { t: t0 + t1 - s.t, p: s.p, v: -s.v }).collect())
            .collect();
        SampledPath { space: self.space, pieces, reversed: !self.reversed }
    }

    /// Applies a linear map to every point and velocity.
    pub fn map_linear(&self, f: impl Fn(&C2) -> C2) -> SampledPath {
        let pieces = self
            .pieces
            .iter()
            .map(|piece| piece.iter().map(|s| Sample { t: s.t, p: f(&s.p), v: f(&s.v) }).collect())
            .collect();
        SampledPath { space: self.space, pieces, reversed: self.reversed }
    }

    /// Concatenates paths end to end, re-parameterizing onto consecutive
    /// parameter intervals of lengths proportional to the given weights.
    pub fn concat(paths: &[SampledPath], weights: Option<&[f64]>) -> Result<SampledPath, GeometryError> {
        let Some(first) = paths.first() else {
            return Err(GeometryError::InvalidPath("nothing to concatenate".into()));
        };
        let space = first.space;
        let n = paths.len() as f64;
        let total: f64 = weights.map(|w| w.iter().sum()).unwrap_or(n);
        let mut pieces = Vec::new();
        let mut offset = 0.0;
        for (i, path) in paths.iter().enumerate() {
            if path.space != space {
                return Err(GeometryError::WrongSpace { expected: space, found: path.space });
            }
            let width = weights.map(|w| w[i]).unwrap_or(1.0) / total;
            let (a, b) = path.param_range();
            let scale = if b > a { width / (b - a) } else { 0.0 };
            for piece in &path.pieces {
                pieces.push(
                    piece
                        .iter()
                        .map(|s| Sample { t: offset + (s.t - a) * scale, p: s.p, v: if scale > 0.0 { s.v * (1.0 / scale) } else { s.v } })
                        .collect(),
                );
            }
            offset += width;
        }
        SampledPath::from_pieces(space, pieces)
    }

    pub fn param_range(&self) -> (f64, f64) {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => (0.0, 0.0),
        }
    }

    /// Sum over sample intervals of a 4-point Gauss rule applied to
    /// `g(p(t), p'(t))` on the Hermite interpolant.
    pub fn integrate<G: FnMut(&C2, &C2) -> f64>(&self, mut g: G) -> f64 {
        let mut total = 0.0;
        for piece in &self.pieces {
            for w in piece.windows(2) {
                total += integrate_interval(&w[0], &w[1], &mut g);
            }
        }
        total
    }

    /// Like [`SampledPath::integrate`] but restricted to parameters in `[t0, t1]`.
    pub fn integrate_between<G: FnMut(&C2, &C2) -> f64>(&self, t0: f64, t1: f64, mut g: G) -> f64 {
        let mut total = 0.0;
        for piece in &self.pieces {
            for w in piece.windows(2) {
                let lo = w[0].t.max(t0);
                let hi = w[1].t.min(t1);
                if hi <= lo {
                    continue;
                }
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                let mut s = 0.0;
                for (x, wt) in GAUSS4 {
                    let (p, v) = hermite(&w[0], &w[1], mid + half * x);
                    s += wt * g(&p, &v);
                }
                total += half * s;
            }
        }
        total
    }

    /// Hermite-interpolated point and velocity at parameter `t`.
    pub fn eval(&self, t: f64) -> Option<(C2, C2)> {
        for piece in &self.pieces {
            let (Some(a), Some(b)) = (piece.first(), piece.last()) else { continue };
            if t < a.t - 1e-15 || t > b.t + 1e-15 {
                continue;
            }
            if piece.len() == 1 {
                return Some((a.p, a.v));
            }
            let idx = piece.partition_point(|s| s.t <= t).clamp(1, piece.len() - 1);
            return Some(hermite(&piece[idx - 1], &piece[idx], t));
        }
        None
    }

    /// Dense polyline of the interpolant, `per_interval` points per sample interval.
    pub fn polyline(&self, per_interval: usize) -> Vec<C2> {
        let per = per_interval.max(1);
        let mut out = Vec::new();
        for piece in &self.pieces {
            for w in piece.windows(2) {
                for k in 0..per {
                    let t = w[0].t + (w[1].t - w[0].t) * k as f64 / per as f64;
                    out.push(hermite(&w[0], &w[1], t).0);
                }
            }
        }
        if let Some(last) = self.last() {
            out.push(last.p);
        }
        out
    }
}

/// Cubic Hermite interpolation between two samples.
#[inline]
pub(crate) fn hermite(a: &Sample, b: &Sample, t: f64) -> (C2, C2) {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -6.0 * s2 + 6.0 * s;
    let d11 = 3.0 * s2 - 2.0 * s;
    let p = a.p * h00 + a.v * (h10 * h) + b.p * h01 + b.v * (h11 * h);
    let v = a.p * (d00 / h) + a.v * d10 + b.p * (d01 / h) + b.v * d11;
    (p, v)
}

#[inline]
pub(crate) fn integrate_interval<G: FnMut(&C2, &C2) -> f64>(a: &Sample, b: &Sample, g: &mut G) -> f64 {
    let h = b.t - a.t;
    let mid = 0.5 * (a.t + b.t);
    let mut s = 0.0;
    for (x, w) in GAUSS4 {
        let (p, v) = hermite(a, b, mid + 0.5 * h * x);
        s += w * g(&p, &v);
    }
    0.5 * h * s
}

/// Arclength: Euclidean on `S³`, Fubini–Study on `P¹`.
pub fn path_length(path: &SampledPath) -> f64 {
    let (t0, t1) = path.param_range();
    length_between(path, t0, t1)
}

/// Length of the part of `path` with parameters in `[t0, t1]`.
pub fn length_between(path: &SampledPath, t0: f64, t1: f64) -> f64 {
    match path.space {
        Space::S3 => path.integrate_between(t0, t1, |p, v| {
            let n2 = p.norm_sqr();
            (*v - *p * (p.dot(v) / n2)).norm() / n2.sqrt()
        }),
        Space::P1 => path.integrate_between(t0, t1, |p, v| p.wedge(v).norm() / p.norm_sqr()),
    }
}

/// Length of the projection to `P¹`, `∫ |w ż − z ẇ| / |p|²`.
pub fn projected_length(path: &SampledPath) -> f64 {
    path.integrate(|p, v| p.wedge(v).norm() / p.norm_sqr())
}

/// `∫ η` along a path on `S³`.
pub fn eta_integral(path: &SampledPath) -> Result<f64, GeometryError> {
    if path.space != Space::S3 {
        return Err(GeometryError::WrongSpace { expected: Space::S3, found: path.space });
    }
    Ok(path.integrate(|p, v| eta_at(p, v) / p.norm_sqr()))
}
