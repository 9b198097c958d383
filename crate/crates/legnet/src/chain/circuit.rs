//! Positively transverse curves with simple crossings, and their circuits.
//!
//! Each component is cut at its crossing parameters into arcs. A circuit
//! follows an arc to its crossing and leaves along the other component's arc
//! that starts there; repeating until the starting arc comes back gives an
//! embedded circle. Every arc lies on exactly one circuit.

use std::collections::HashMap;

use serde::Serialize;

use super::{Chain1, ChainError, Handle};
use crate::s3::{eta_at, length_between, SampledPath, Space, C2};

/// A transverse double point: component `a` at parameter `ta` meets
/// component `b` at parameter `tb`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub point: C2,
    pub a: usize,
    pub ta: f64,
    pub b: usize,
    pub tb: f64,
}

#[derive(Clone, Debug)]
pub struct PtscCurve {
    /// Closed curves on `S³`, each with parameter range `[0, 1]` or any
    /// interval; the endpoint is identified with the start.
    pub components: Vec<SampledPath>,
    pub crossings: Vec<Crossing>,
}

/// One arc of a component, from parameter `t0` to `t1`, wrapping through the
/// end of the parameter interval when `t1 <= t0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArcRef {
    pub handle: Handle,
    pub component: usize,
    pub t0: f64,
    pub t1: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Circuit {
    pub arcs: Vec<ArcRef>,
    pub length: f64,
}

impl Circuit {
    pub fn chain(&self) -> Chain1 {
        Chain1::from_terms(self.arcs.iter().map(|a| (a.handle, 1)))
    }

    /// Dense polyline through the circuit, `per_arc` points per arc.
    pub fn polyline(&self, s: &PtscCurve, per_arc: usize) -> Vec<C2> {
        let mut out = Vec::new();
        for arc in &self.arcs {
            let path = &s.components[arc.component];
            let (lo, hi) = path.param_range();
            let span = if arc.t1 > arc.t0 { arc.t1 - arc.t0 } else { arc.t1 - arc.t0 + (hi - lo) };
            for k in 0..per_arc {
                let mut t = arc.t0 + span * k as f64 / per_arc as f64;
                if t > hi {
                    t -= hi - lo;
                }
                if let Some((p, _)) = path.eval(t) {
                    out.push(p);
                }
            }
        }
        out
    }
}

impl PtscCurve {
    pub fn new(components: Vec<SampledPath>, crossings: Vec<Crossing>) -> Self {
        PtscCurve { components, crossings }
    }

    /// Checks that every component lives on `S³` and that `η > 0` at every sample.
    pub fn check_transverse(&self) -> Result<(), ChainError> {
        for (index, c) in self.components.iter().enumerate() {
            if c.space() != Space::S3 {
                return Err(ChainError::Crossing(format!("component {index} is not on S³")));
            }
            for s in c.samples() {
                let eta = eta_at(&s.p, &s.v);
                if !(eta > 0.0) {
                    return Err(ChainError::NotTransverse { index, t: s.t, eta });
                }
            }
        }
        Ok(())
    }

    /// All arcs with fresh handles, in component order.
    pub fn arcs(&self) -> Result<Vec<ArcRef>, ChainError> {
        Ok(self.cut()?.0)
    }

    /// The whole curve as a 1-chain of its arcs.
    pub fn chain(&self) -> Result<Chain1, ChainError> {
        Ok(Chain1::from_terms(self.arcs()?.iter().map(|a| (a.handle, 1))))
    }

    /// Arcs per component plus, for every arc, the crossing at its head
    /// (`None` for uncut components).
    #[allow(clippy::type_complexity)]
    fn cut(&self) -> Result<(Vec<ArcRef>, Vec<Option<usize>>, HashMap<(usize, usize), usize>), ChainError> {
        let mut events: Vec<Vec<(f64, usize)>> = vec![Vec::new(); self.components.len()];
        for (ci, c) in self.crossings.iter().enumerate() {
            if c.a == c.b {
                return Err(ChainError::Crossing(format!("crossing {ci} joins component {} to itself", c.a)));
            }
            for (comp, t) in [(c.a, c.ta), (c.b, c.tb)] {
                let list = events
                    .get_mut(comp)
                    .ok_or_else(|| ChainError::Crossing(format!("crossing {ci} names missing component {comp}")))?;
                list.push((t, ci));
            }
        }
        let mut arcs = Vec::new();
        let mut head = Vec::new();
        // (crossing, component) -> index of the arc that starts there.
        let mut starts = HashMap::new();
        for (comp, list) in events.iter_mut().enumerate() {
            let (lo, hi) = self.components[comp].param_range();
            let period = hi - lo;
            for e in list.iter_mut() {
                if e.0 < lo || e.0 > hi {
                    return Err(ChainError::Crossing(format!("crossing parameter {} outside component {comp}", e.0)));
                }
                if e.0 >= hi {
                    e.0 = lo;
                }
            }
            list.sort_by(|x, y| x.0.total_cmp(&y.0));
            for w in list.windows(2) {
                let gap = (w[1].0 - w[0].0).min(period - (w[1].0 - w[0].0));
                if gap <= 1e-12 * period.max(1.0) {
                    return Err(ChainError::Crossing(format!("two crossings at parameter {} on component {comp}", w[0].0)));
                }
            }
            if list.len() == 2 && (list[0].0 + period - list[1].0) <= 1e-12 * period.max(1.0) {
                return Err(ChainError::Crossing(format!("two crossings at the seam of component {comp}")));
            }
            let first = Handle::reserve(list.len().max(1) as u64);
            if list.is_empty() {
                arcs.push(ArcRef { handle: first, component: comp, t0: lo, t1: hi });
                head.push(None);
                continue;
            }
            for (k, &(t, ci)) in list.iter().enumerate() {
                let (t1, c1) = list[(k + 1) % list.len()];
                if starts.insert((ci, comp), arcs.len()).is_some() {
                    return Err(ChainError::Crossing(format!("crossing {ci} listed twice on component {comp}")));
                }
                arcs.push(ArcRef { handle: first.offset(k as u64), component: comp, t0: t, t1 });
                head.push(Some(c1));
            }
        }
        Ok((arcs, head, starts))
    }

    fn arc_length(&self, arc: &ArcRef) -> f64 {
        let path = &self.components[arc.component];
        let (lo, hi) = path.param_range();
        if arc.t1 > arc.t0 {
            length_between(path, arc.t0, arc.t1)
        } else {
            length_between(path, arc.t0, hi) + length_between(path, lo, arc.t1)
        }
    }
}

/// The circuits of a PTSC curve.
pub fn extract_circuits(s: &PtscCurve) -> Result<Vec<Circuit>, ChainError> {
    s.check_transverse()?;
    let (arcs, head, starts) = s.cut()?;
    let mut used = vec![false; arcs.len()];
    let mut out = Vec::new();
    for start in 0..arcs.len() {
        if used[start] {
            continue;
        }
        let mut circuit = Vec::new();
        let mut cur = start;
        loop {
            if used[cur] {
                if cur == start {
                    break;
                }
                return Err(ChainError::Crossing("traversal re-entered a used arc".into()));
            }
            used[cur] = true;
            circuit.push(arcs[cur]);
            let Some(ci) = head[cur] else { break };
            let c = &s.crossings[ci];
            let comp = arcs[cur].component;
            let other = if c.a == comp { c.b } else { c.a };
            cur = *starts
                .get(&(ci, other))
                .ok_or_else(|| ChainError::Crossing(format!("no outgoing arc at crossing {ci}")))?;
        }
        let length = circuit.iter().map(|a| s.arc_length(a)).sum();
        out.push(Circuit { arcs: circuit, length });
    }
    Ok(out)
}

/// Double points between distinct components, found by closest approach of
/// dense polylines and refined by Gauss–Newton on the two parameters.
/// Approaches closer than `tol` after refinement count as crossings.
pub fn find_crossings(components: &[SampledPath], tol: f64) -> Vec<Crossing> {
    let per = 4;
    let polys: Vec<Vec<(f64, C2)>> = components
        .iter()
        .map(|c| {
            let mut pts = Vec::new();
            for piece in c.pieces() {
                for w in piece.windows(2) {
                    for k in 0..per {
                        let t = w[0].t + (w[1].t - w[0].t) * k as f64 / per as f64;
                        if let Some((p, _)) = c.eval(t) {
                            pts.push((t, p));
                        }
                    }
                }
            }
            pts
        })
        .collect();
    let mut out: Vec<Crossing> = Vec::new();
    for a in 0..components.len() {
        for b in a + 1..components.len() {
            let step = |pts: &[(f64, C2)]| pts.windows(2).map(|w| w[0].1.distance(&w[1].1)).fold(0.0, f64::max);
            let radius = 2.0 * step(&polys[a]).max(step(&polys[b])) + tol;
            for &(ta, pa) in &polys[a] {
                for &(tb, pb) in &polys[b] {
                    if pa.distance(&pb) > radius {
                        continue;
                    }
                    let Some((ta, tb, p, d)) = refine(&components[a], &components[b], ta, tb) else { continue };
                    if d > tol {
                        continue;
                    }
                    let dup = out.iter().any(|c| c.a == a && c.b == b && c.point.distance(&p) < 1e3 * tol.max(1e-9));
                    if !dup {
                        out.push(Crossing { point: p, a, ta, b, tb });
                    }
                }
            }
        }
    }
    out
}

fn refine(a: &SampledPath, b: &SampledPath, mut ta: f64, mut tb: f64) -> Option<(f64, f64, C2, f64)> {
    let (alo, ahi) = a.param_range();
    let (blo, bhi) = b.param_range();
    for _ in 0..50 {
        let (pa, va) = a.eval(ta)?;
        let (pb, vb) = b.eval(tb)?;
        let r = pa - pb;
        // Least squares for va·dta − vb·dtb = −r.
        let g11 = va.dot(&va);
        let g12 = -va.dot(&vb);
        let g22 = vb.dot(&vb);
        let r1 = -va.dot(&r);
        let r2 = vb.dot(&r);
        let det = g11 * g22 - g12 * g12;
        if det.abs() < 1e-300 {
            return None;
        }
        let da = (r1 * g22 - g12 * r2) / det;
        let db = (g11 * r2 - g12 * r1) / det;
        ta = (ta + da).clamp(alo, ahi);
        tb = (tb + db).clamp(blo, bhi);
        if da.abs() + db.abs() < 1e-15 {
            break;
        }
    }
    let (pa, _) = a.eval(ta)?;
    let (pb, _) = b.eval(tb)?;
    Some((ta, tb, (pa + pb) * 0.5, pa.distance(&pb)))
}
