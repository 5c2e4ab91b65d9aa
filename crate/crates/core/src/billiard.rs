//! Bodies, vertical billiard tracing, and the resistance functionals.
//!
//! A `Body2D` is the vertical central cross-section of a solid of revolution,
//! bounded above by a generator curve and closed by vertical side walls and a
//! bottom segment. Rays fall straight down, reflect elastically, and the
//! resistance is the quadrature of `(1 + v_z(x)) x` over the half-width.
//!
//! The boundary is materialized as a closed loop traversed with the material
//! on the right; that orientation is what lets a corner hit be classified as
//! a benign graze (the ray continues) versus a genuine singularity.

use crate::error::{Error, Result};
use crate::geometry::{pt, reflect, vec2, Element, Point, Ray, RayHit, Vec2};
use crate::quad::{self, QuadratureSpec};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};
use std::sync::Mutex;

const JUNCTION_TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-9;

/// Ordered chain of curve elements; consecutive elements share endpoints.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneratorCurve {
    pub elements: Vec<Element>,
}

impl GeneratorCurve {
    pub fn new(elements: Vec<Element>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidBody("curve has no elements".into()));
        }
        for w in elements.windows(2) {
            let gap = w[0].end().dist(w[1].start());
            if gap > GAP_TOL {
                return Err(Error::InvalidBody(format!(
                    "consecutive elements leave a gap of {gap:e}"
                )));
            }
        }
        Ok(GeneratorCurve { elements })
    }

    pub fn start(&self) -> Point {
        self.elements[0].start()
    }

    pub fn end(&self) -> Point {
        self.elements[self.elements.len() - 1].end()
    }
}

/// How a traced ray ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Exited,
    NoHit,
    CapExceeded,
    SingularHit,
}

impl TraceStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceStatus::Exited => "exited",
            TraceStatus::NoHit => "no_hit",
            TraceStatus::CapExceeded => "cap_exceeded",
            TraceStatus::SingularHit => "singular_hit",
        }
    }
}

/// Outcome of one vertical ray.
#[derive(Debug, Clone)]
pub struct TraceResult {
    pub exit_velocity: Vec2,
    pub bounces: u32,
    /// Reflection points with the boundary element index hit.
    pub hits: Vec<(Point, usize)>,
    pub status: TraceStatus,
}

/// Quadrature and tracing knobs for resistance evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ResistanceSpec {
    pub quad: QuadratureSpec,
    pub bounce_cap: u32,
}

impl Default for ResistanceSpec {
    fn default() -> Self {
        ResistanceSpec {
            quad: QuadratureSpec::default(),
            bounce_cap: 1000,
        }
    }
}

/// Resistance value with tracing statistics.
#[derive(Debug, Clone)]
pub struct ResistanceReport {
    pub value: f64,
    pub error_estimate: f64,
    pub rays: usize,
    pub max_bounces: u32,
    pub min_bounces: u32,
    /// Singular rays resolved by the abscissa nudge.
    pub resampled: usize,
    /// Rays that stayed unresolved (trapped or stubbornly singular).
    pub failed: usize,
}

impl ResistanceReport {
    /// Resistance of the solid of revolution: `2 pi` times the half-width
    /// integral.
    pub fn three_dimensional(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.value
    }
}

/// On-disk body document.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BodyFile {
    height: f64,
    symmetric: bool,
    elements: Vec<Element>,
}

/// Cross-section body: generator curve plus implied closure.
#[derive(Debug, Clone)]
pub struct Body2D {
    height: f64,
    symmetric: bool,
    curve: GeneratorCurve,
    /// Closed boundary loop, material on the right of traversal.
    boundary: Vec<Element>,
    /// Number of leading `boundary` entries forming the upper curve.
    upper_len: usize,
    bboxes: Vec<(Point, Point)>,
    /// Corner-proximity tolerance per junction (between elements j, j+1);
    /// capped by the neighbors' extent so micro-elements keep a usable
    /// interior.
    junction_tols: Vec<f64>,
    z_start: f64,
}

impl Body2D {
    /// Validating constructor. For symmetric bodies the curve covers
    /// `x in [0, 1]` starting on the axis; otherwise `x in [-1, 1]`.
    pub fn new(height: f64, curve: GeneratorCurve, symmetric: bool) -> Result<Body2D> {
        let body = Self::assemble(height, curve, symmetric)?;
        body.validate()?;
        Ok(body)
    }

    /// Non-validating constructor for experiments and partial bodies.
    pub fn new_unchecked(height: f64, curve: GeneratorCurve, symmetric: bool) -> Result<Body2D> {
        Self::assemble(height, curve, symmetric)
    }

    fn assemble(height: f64, curve: GeneratorCurve, symmetric: bool) -> Result<Body2D> {
        if !(height > 0.0) || !height.is_finite() {
            return Err(Error::InvalidBody(format!(
                "height must be positive, got {height}"
            )));
        }
        let mut upper: Vec<Element> = Vec::new();
        if symmetric {
            upper.extend(curve.elements.iter().rev().map(|e| e.mirrored()));
        }
        upper.extend(curve.elements.iter().cloned());
        let a = upper[0].start();
        let b = upper[upper.len() - 1].end();
        let mut boundary = upper.clone();
        let upper_len = boundary.len();
        // Closure: east wall down, bottom east-to-west, west wall up. The
        // walls and bottom follow the curve extent; for inscribed bodies
        // that is exactly x = +-1, z = 0.
        if b.z > GAP_TOL {
            boundary.push(Element::segment(b, pt(b.x, 0.0)));
        }
        boundary.push(Element::segment(pt(b.x, 0.0), pt(a.x, 0.0)));
        if a.z > GAP_TOL {
            boundary.push(Element::segment(pt(a.x, 0.0), a));
        }
        let bboxes: Vec<(Point, Point)> = boundary.iter().map(|e| e.bbox()).collect();
        let z_start = bboxes.iter().fold(0.0f64, |m, bb| m.max(bb.1.z)) + 1.0;
        let n = boundary.len();
        let extent = |e: &Element| e.start().dist(e.end()).max(1e-300);
        let junction_tols: Vec<f64> = (0..n)
            .map(|j| {
                let a = extent(&boundary[j]);
                let b = extent(&boundary[(j + 1) % n]);
                (0.01 * a.min(b)).clamp(1e-13, JUNCTION_TOL)
            })
            .collect();
        Ok(Body2D {
            height,
            symmetric,
            curve,
            boundary,
            upper_len,
            bboxes,
            junction_tols,
            z_start,
        })
    }

    fn validate(&self) -> Result<()> {
        // contiguity of the materialized loop
        let n = self.boundary.len();
        for i in 0..n {
            let gap = self.boundary[i]
                .end()
                .dist(self.boundary[(i + 1) % n].start());
            if gap > GAP_TOL {
                return Err(Error::InvalidBody(format!(
                    "boundary gap {gap:e} after element {i}"
                )));
            }
        }
        // bounds and inscription
        let mut pts: Vec<Point> = Vec::new();
        for e in &self.boundary {
            e.flatten(1e-7, &mut pts);
        }
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_z, mut max_z) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &pts {
            min_x = min_x.min(p.x);
            max_x = max_x.max(p.x);
            min_z = min_z.min(p.z);
            max_z = max_z.max(p.z);
            if !(p.x.is_finite() && p.z.is_finite()) {
                return Err(Error::InvalidBody("non-finite coordinate".into()));
            }
        }
        let tol = 1e-9;
        if min_x < -1.0 - tol || max_x > 1.0 + tol || min_z < -tol || max_z > self.height + tol {
            return Err(Error::InvalidBody(format!(
                "body leaves [-1,1] x [0,{}]: x in [{min_x},{max_x}], z in [{min_z},{max_z}]",
                self.height
            )));
        }
        if max_x < 1.0 - tol || min_x > -1.0 + tol || min_z > tol || max_z < self.height - tol {
            return Err(Error::InvalidBody(
                "body is not inscribed: it must touch x = +-1, z = 0 and z = height".into(),
            ));
        }
        self.check_self_intersection()
    }

    fn check_self_intersection(&self) -> Result<()> {
        let n = self.boundary.len();
        let flat: Vec<Vec<Point>> = self
            .boundary
            .iter()
            .map(|e| {
                let mut v = Vec::new();
                e.flatten(1e-6, &mut v);
                v
            })
            .collect();
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue; // adjacent around the loop
                }
                let (alo, ahi) = self.bboxes[i];
                let (blo, bhi) = self.bboxes[j];
                if alo.x > bhi.x || blo.x > ahi.x || alo.z > bhi.z || blo.z > ahi.z {
                    continue;
                }
                for sa in flat[i].windows(2) {
                    for sb in flat[j].windows(2) {
                        if crate::geometry::segments_cross(sa[0], sa[1], sb[0], sb[1]) {
                            return Err(Error::InvalidBody(format!(
                                "boundary self-intersects (elements {i} and {j})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// The stored generator curve (half-curve for symmetric bodies).
    pub fn curve(&self) -> &GeneratorCurve {
        &self.curve
    }

    /// Materialized upper curve spanning the full width, west to east.
    pub fn upper_elements(&self) -> &[Element] {
        &self.boundary[..self.upper_len]
    }

    /// Full boundary loop including closure walls and bottom.
    pub fn boundary(&self) -> &[Element] {
        &self.boundary
    }

    pub fn from_json_str(s: &str) -> Result<Body2D> {
        let f: BodyFile = serde_json::from_str(s)?;
        Body2D::new(f.height, GeneratorCurve::new(f.elements)?, f.symmetric)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Body2D> {
        Body2D::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let f = BodyFile {
            height: self.height,
            symmetric: self.symmetric,
            elements: self.curve.elements.clone(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    fn junction_point(&self, j: usize) -> Point {
        self.boundary[j].end()
    }

    /// Tangents (traversal direction) entering and leaving junction `j`,
    /// which sits between elements `j` and `j+1` (mod n).
    fn junction_tangents(&self, j: usize) -> (Vec2, Vec2) {
        let n = self.boundary.len();
        (
            self.boundary[j].tangent_at_end(),
            self.boundary[(j + 1) % n].tangent_at_start(),
        )
    }

    /// Junction within tolerance of `p` among the two ends of element `idx`.
    fn junction_near(&self, idx: usize, p: Point) -> Option<usize> {
        let n = self.boundary.len();
        let j_start = (idx + n - 1) % n; // junction at this element's start
        let j_end = idx;
        let ds = self.junction_point(j_start).dist(p);
        let de = self.junction_point(j_end).dist(p);
        if ds <= de && ds < self.junction_tols[j_start] {
            Some(j_start)
        } else if de < self.junction_tols[j_end] {
            Some(j_end)
        } else {
            None
        }
    }

    /// Traces the vertical ray falling at abscissa `x`.
    pub fn trace(&self, x: f64, cap: u32) -> TraceResult {
        let cap = cap.max(1);
        let mut ray = Ray {
            origin: pt(x, self.z_start),
            dir: vec2(0.0, -1.0),
        };
        let mut bounces = 0u32;
        let mut hits: Vec<(Point, usize)> = Vec::new();
        let mut last_elem: Option<usize> = None;
        let mut scratch: Vec<RayHit> = Vec::new();
        // Grazes advance without reflecting; bound the total loop.
        let max_steps = cap as usize * 4 + 64;
        for _ in 0..max_steps {
            let mut best: Option<(f64, usize, RayHit)> = None;
            for (i, e) in self.boundary.iter().enumerate() {
                let (lo, hi) = self.bboxes[i];
                if ray.misses_bbox(lo, hi) {
                    continue;
                }
                let t_min = if last_elem == Some(i) { 1e-9 } else { 1e-12 };
                scratch.clear();
                ray.hit_element(e, t_min, &mut scratch);
                for h in &scratch {
                    let better = match &best {
                        None => true,
                        Some((bt, bi, _)) => h.t < *bt || (h.t == *bt && i < *bi),
                    };
                    if better {
                        best = Some((h.t, i, *h));
                    }
                }
            }
            let Some((_t, idx, hit)) = best else {
                return if bounces == 0 {
                    TraceResult {
                        exit_velocity: vec2(0.0, -1.0),
                        bounces: 0,
                        hits,
                        status: TraceStatus::NoHit,
                    }
                } else {
                    TraceResult {
                        exit_velocity: ray.dir,
                        bounces,
                        hits,
                        status: TraceStatus::Exited,
                    }
                };
            };
            if let Some(j) = self.junction_near(idx, hit.point) {
                let (ta, tb) = self.junction_tangents(j);
                match corner_pass(ray.dir, ta, tb) {
                    Some(true) => {
                        // benign graze: continue past the corner
                        ray.origin = self.junction_point(j).offset(ray.dir.scale(1e-9));
                        last_elem = None;
                        continue;
                    }
                    _ => {
                        return TraceResult {
                            exit_velocity: ray.dir,
                            bounces,
                            hits,
                            status: TraceStatus::SingularHit,
                        };
                    }
                }
            }
            if ray.dir.dot(hit.normal).abs() < 1e-12 {
                return TraceResult {
                    exit_velocity: ray.dir,
                    bounces,
                    hits,
                    status: TraceStatus::SingularHit,
                };
            }
            if bounces == cap {
                return TraceResult {
                    exit_velocity: ray.dir,
                    bounces,
                    hits,
                    status: TraceStatus::CapExceeded,
                };
            }
            ray.dir = reflect(ray.dir, hit.normal);
            ray.origin = hit.point;
            bounces += 1;
            hits.push((hit.point, idx));
            last_elem = Some(idx);
        }
        TraceResult {
            exit_velocity: ray.dir,
            bounces,
            hits,
            status: TraceStatus::CapExceeded,
        }
    }

    /// Resistance over the half-width `[0, 1]`.
    pub fn resistance(&self, spec: &ResistanceSpec) -> Result<ResistanceReport> {
        self.resistance_over(0.0, 1.0, spec)
    }

    /// Resistance integral over an abscissa interval.
    ///
    /// Singular rays are re-sampled at nudged abscissas (from `x +- 1e-7`
    /// upward) and averaged; rays that exceed the bounce cap contribute
    /// their last velocity and count toward the regularity budget (0.1% of
    /// all rays).
    pub fn resistance_over(
        &self,
        lo: f64,
        hi: f64,
        spec: &ResistanceSpec,
    ) -> Result<ResistanceReport> {
        if !(lo >= -1e-12 && hi <= 1.0 + 1e-12 && lo <= hi) {
            return Err(Error::Domain(format!(
                "integration interval [{lo}, {hi}] must sit inside [0, 1]"
            )));
        }
        let rays = AtomicUsize::new(0);
        let resampled = AtomicUsize::new(0);
        let failed = AtomicUsize::new(0);
        let max_b = AtomicU32::new(0);
        let min_b = AtomicU32::new(u32::MAX);
        let bad_xs: Mutex<Vec<f64>> = Mutex::new(Vec::new());
        let track = |r: &TraceResult| {
            max_b.fetch_max(r.bounces, Ordering::Relaxed);
            min_b.fetch_min(r.bounces, Ordering::Relaxed);
        };
        let integrand = |x: f64| -> f64 {
            rays.fetch_add(1, Ordering::Relaxed);
            let r = self.trace(x, spec.bounce_cap);
            let vz = match r.status {
                TraceStatus::Exited | TraceStatus::NoHit => {
                    track(&r);
                    r.exit_velocity.z
                }
                TraceStatus::SingularHit => {
                    // Singular abscissas come in slivers; the nudge escalates
                    // because a focused arc can contract the hit map so much
                    // that a sliver is wider than the first offset.
                    let mut resolved = None;
                    'scales: for scale in [1e-7, 1e-6, 1e-5, 1e-4] {
                        let mut sum = 0.0;
                        let mut cnt = 0;
                        for dx in [-scale, scale] {
                            let rr = self.trace(x + dx, spec.bounce_cap);
                            if matches!(rr.status, TraceStatus::Exited | TraceStatus::NoHit) {
                                track(&rr);
                                sum += rr.exit_velocity.z;
                                cnt += 1;
                            }
                        }
                        if cnt > 0 {
                            resolved = Some(sum / cnt as f64);
                            break 'scales;
                        }
                    }
                    match resolved {
                        Some(v) => {
                            resampled.fetch_add(1, Ordering::Relaxed);
                            v
                        }
                        None => {
                            failed.fetch_add(1, Ordering::Relaxed);
                            bad_xs.lock().unwrap().push(x);
                            -1.0
                        }
                    }
                }
                TraceStatus::CapExceeded => {
                    failed.fetch_add(1, Ordering::Relaxed);
                    bad_xs.lock().unwrap().push(x);
                    r.exit_velocity.z
                }
            };
            (1.0 + vz) * x
        };
        let q = quad::integrate(&integrand, lo.max(0.0), hi.min(1.0), &spec.quad);
        let total = rays.load(Ordering::Relaxed);
        let bad = failed.load(Ordering::Relaxed);
        if bad * 1000 > total {
            let mut xs = bad_xs.into_inner().unwrap();
            xs.sort_by(f64::total_cmp);
            xs.truncate(16);
            return Err(Error::RegularityViolation {
                hint: format!("{bad} of {total} rays failed to leave the body"),
                xs,
            });
        }
        Ok(ResistanceReport {
            value: q.value,
            error_estimate: q.error_estimate,
            rays: total,
            max_bounces: max_b.load(Ordering::Relaxed),
            min_bounces: min_b.load(Ordering::Relaxed).min(u32::MAX - 1),
            resampled: resampled.load(Ordering::Relaxed),
            failed: bad,
        })
    }

    /// Trace dump at `n` uniform abscissas: `x,vx,vz,bounces,status`.
    pub fn write_trace_csv<W: std::io::Write>(&self, n: usize, cap: u32, w: &mut W) -> Result<()> {
        let n = n.max(2);
        writeln!(w, "x,vx,vz,bounces,status")?;
        for k in 0..n {
            let x = k as f64 / (n - 1) as f64;
            let r = self.trace(x, cap);
            writeln!(
                w,
                "{},{},{},{},{}",
                crate::export::fmt17(x),
                crate::export::fmt17(r.exit_velocity.x),
                crate::export::fmt17(r.exit_velocity.z),
                r.bounces,
                r.status.as_str()
            )?;
        }
        Ok(())
    }

    /// Convex hull of the body with its upper boundary as a profile.
    pub fn convex_hull(&self) -> Result<ConvexHull> {
        let mut pts: Vec<Point> = Vec::new();
        for e in &self.boundary {
            e.flatten(1e-9, &mut pts);
        }
        pts.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.z.total_cmp(&q.z)));
        pts.dedup_by(|a, b| a.x == b.x && a.z == b.z);
        if pts.len() < 3 {
            return Err(Error::InvalidBody("too few points for a hull".into()));
        }
        // Upper hull, right to left.
        let mut upper: Vec<Point> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 {
                let m = upper.len();
                let c = upper[m - 2].to(upper[m - 1]).cross(upper[m - 2].to(p));
                if c <= 0.0 {
                    upper.pop();
                } else {
                    break;
                }
            }
            upper.push(p);
        }
        upper.reverse(); // west to east along the top
                         // Drop wall verticals: keep the maximal-z point at each extreme x.
        let min_x = upper[0].x;
        let max_x = upper[upper.len() - 1].x;
        let start = upper
            .iter()
            .position(|p| p.x > min_x)
            .map(|i| i.saturating_sub(1))
            .unwrap_or(0);
        let end = upper
            .iter()
            .rposition(|p| p.x < max_x)
            .map(|i| (i + 1).min(upper.len() - 1))
            .unwrap_or(upper.len() - 1);
        let chain: Vec<Point> = upper[start..=end].to_vec();
        if chain.len() < 2 {
            return Err(Error::InvalidBody("degenerate hull chain".into()));
        }
        let profile = PiecewiseProfile {
            xs: chain.iter().map(|p| p.x).collect(),
            zs: chain.iter().map(|p| p.z).collect(),
        };
        let elements: Vec<Element> = chain
            .windows(2)
            .map(|w| Element::segment(w[0], w[1]))
            .collect();
        let height = profile.zs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let body = Body2D::new_unchecked(height, GeneratorCurve::new(elements)?, false)?;
        Ok(ConvexHull { body, profile })
    }

    /// Resistance under the tangential-exit law, for convex bodies only.
    ///
    /// The upper curve must be a concave graph over `x`; kinks use the
    /// one-sided slope of the piece being integrated (a measure-zero choice).
    pub fn modified_resistance(&self) -> Result<f64> {
        let upper = self.upper_elements();
        // function-like and concave checks
        let mut prev_slope = f64::INFINITY;
        for e in upper {
            let (s0, s1) = element_slopes(e)?;
            if s0 > prev_slope + 1e-9 {
                return Err(Error::Domain(
                    "upper boundary is not concave (slope increases at a junction)".into(),
                ));
            }
            if s1 > s0 + 1e-9 {
                return Err(Error::Domain(
                    "upper boundary is not concave inside an element".into(),
                ));
            }
            prev_slope = s1;
        }
        let mut total = 0.0;
        for e in upper {
            total += modified_piece(e)?;
        }
        Ok(total)
    }
}

/// Exact modified-law resistance of a piecewise-linear concave profile.
#[derive(Debug, Clone)]
pub struct PiecewiseProfile {
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
}

impl PiecewiseProfile {
    pub fn value(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.zs[0];
        }
        if x >= self.xs[n - 1] {
            return self.zs[n - 1];
        }
        let j = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        let t = (x - self.xs[j - 1]) / (self.xs[j] - self.xs[j - 1]);
        self.zs[j - 1] + t * (self.zs[j] - self.zs[j - 1])
    }

    /// Exact integral of the tangential-exit integrand over `x in [0, 1]`,
    /// summed segment by segment (the integrand is constant per segment).
    pub fn modified_resistance(&self) -> f64 {
        let mut total = 0.0;
        for j in 1..self.xs.len() {
            let (x0, x1) = (self.xs[j - 1], self.xs[j]);
            let (a, b) = (x0.max(0.0), x1.min(1.0));
            if b <= a {
                continue;
            }
            let s = (self.zs[j] - self.zs[j - 1]) / (x1 - x0);
            let factor = 1.0 + s / (1.0 + s * s).sqrt();
            total += factor * 0.5 * (b * b - a * a);
        }
        total
    }
}

/// Hull body plus its upper boundary as a function of x.
#[derive(Debug, Clone)]
pub struct ConvexHull {
    pub body: Body2D,
    pub profile: PiecewiseProfile,
}

/// Start and end slopes (dz/dx) of an element; errors if it is not a graph
/// traversed west to east.
fn element_slopes(e: &Element) -> Result<(f64, f64)> {
    let t0 = e.tangent_at_start();
    let t1 = e.tangent_at_end();
    if t0.x <= 1e-12 || t1.x <= 1e-12 {
        return Err(Error::Domain(
            "upper boundary is not a graph over x (vertical or reversed element)".into(),
        ));
    }
    Ok((t0.z / t0.x, t1.z / t1.x))
}

/// Integral of `(1 + f'/sqrt(1+f'^2)) x` over one graph element, clipped to
/// `x in [0, 1]`. Segments are closed-form; arcs use a 16-point rule, which
/// is effectively exact for these smooth integrands.
fn modified_piece(e: &Element) -> Result<f64> {
    match e {
        Element::Segment { from, to } => {
            let (a, b) = (from.x.max(0.0), to.x.min(1.0));
            if b <= a {
                return Ok(0.0);
            }
            let s = (to.z - from.z) / (to.x - from.x);
            Ok((1.0 + s / (1.0 + s * s).sqrt()) * 0.5 * (b * b - a * a))
        }
        Element::ParabolicArc(arc) => {
            let (t0, t1) = (arc.t_range[0], arc.t_range[1]);
            // clip parameter range to x in [0, 1] (x(t) is monotone here)
            let x_of = |t: f64| arc.point_at(t).x;
            let mut a = t0;
            let mut b = t1;
            if x_of(t0) < 0.0 {
                a = crate::roots::bisect(&|t| x_of(t), t0, t1, 1e-15);
            }
            if x_of(t1) > 1.0 {
                b = crate::roots::bisect(&|t| x_of(t) - 1.0, a, t1, 1e-15);
            }
            if b <= a {
                return Ok(0.0);
            }
            let f = |t: f64| {
                let p = arc.point_at(t);
                let v = arc.tangent_at(t);
                let speed = v.norm();
                (1.0 + v.z / speed) * p.x * v.x
            };
            Ok(quad::gl16(&f, a, b))
        }
    }
}

/// Classifies a ray direction `d` arriving exactly at a corner with incoming
/// traversal tangent `a` and outgoing tangent `b` (material on the right).
/// `Some(true)`: the continuation stays in free space (graze). `Some(false)`:
/// it enters material. `None`: tangent to a face, treated as singular.
fn corner_pass(d: Vec2, a: Vec2, b: Vec2) -> Option<bool> {
    let eps = 1e-12;
    let na = a.reversed();
    let cb = b.cross(d);
    let ce = d.cross(na);
    if cb.abs() < eps || ce.abs() < eps {
        return None;
    }
    let wedge = b.cross(na);
    Some(if wedge >= 0.0 {
        cb > 0.0 && ce > 0.0
    } else {
        cb > 0.0 || ce > 0.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn flat_top(h: f64) -> Body2D {
        let curve = GeneratorCurve::new(vec![Element::segment(pt(-1.0, h), pt(1.0, h))]).unwrap();
        Body2D::new(h, curve, false).unwrap()
    }

    fn triangle() -> Body2D {
        let curve =
            GeneratorCurve::new(vec![Element::segment(pt(0.0, 1.0), pt(1.0, 0.0))]).unwrap();
        Body2D::new(1.0, curve, true).unwrap()
    }

    #[test]
    fn flat_top_traces_straight_up() {
        let b = flat_top(0.5);
        for x in [0.0, 0.3, 0.99] {
            let r = b.trace(x, 10);
            assert_eq!(r.status, TraceStatus::Exited);
            assert_eq!(r.bounces, 1);
            close(r.exit_velocity.x, 0.0, 1e-15);
            close(r.exit_velocity.z, 1.0, 1e-15);
        }
    }

    #[test]
    fn partial_body_reports_no_hit() {
        // Material only over [0.2, 1]: a ray to the west of it misses.
        let curve =
            GeneratorCurve::new(vec![Element::segment(pt(0.2, 0.8), pt(1.0, 0.8))]).unwrap();
        let b = Body2D::new_unchecked(0.8, curve, false).unwrap();
        let r = b.trace(0.1, 10);
        assert_eq!(r.status, TraceStatus::NoHit);
        assert_eq!(r.bounces, 0);
        close(r.exit_velocity.z, -1.0, 0.0);
    }

    #[test]
    fn flat_top_resistance_is_one() {
        let b = flat_top(1.0);
        let r = b.resistance(&ResistanceSpec::default()).unwrap();
        close(r.value, 1.0, 1e-12);
        assert_eq!(r.max_bounces, 1);
    }

    #[test]
    fn triangle_resistance_is_half() {
        // 45-degree faces send every ray out horizontally.
        let b = triangle();
        let r = b.resistance(&ResistanceSpec::default()).unwrap();
        close(r.value, 0.5, 1e-12);
        assert_eq!(r.max_bounces, 1);
    }

    #[test]
    fn symmetric_trace_mirrors() {
        let curve = GeneratorCurve::new(vec![
            Element::segment(pt(0.0, 1.0), pt(0.4, 0.9)),
            Element::segment(pt(0.4, 0.9), pt(0.7, 0.3)),
            Element::segment(pt(0.7, 0.3), pt(1.0, 0.0)),
        ])
        .unwrap();
        let b = Body2D::new(1.0, curve, true).unwrap();
        for k in 1..40 {
            let x = k as f64 / 41.0;
            let rp = b.trace(x, 100);
            let rm = b.trace(-x, 100);
            assert_eq!(rp.status, rm.status);
            close(rp.exit_velocity.z, rm.exit_velocity.z, 1e-12);
            close(rp.exit_velocity.x, -rm.exit_velocity.x, 1e-12);
        }
    }

    #[test]
    fn trace_is_deterministic() {
        let b = triangle();
        let a = b.trace(0.37, 100);
        let c = b.trace(0.37, 100);
        assert_eq!(a.exit_velocity.x.to_bits(), c.exit_velocity.x.to_bits());
        assert_eq!(a.exit_velocity.z.to_bits(), c.exit_velocity.z.to_bits());
    }

    #[test]
    fn energy_is_conserved_through_reflections() {
        // V-notch produces multiple reflections.
        let curve = GeneratorCurve::new(vec![
            Element::segment(pt(0.0, 1.0), pt(0.3, 1.0)),
            Element::segment(pt(0.3, 1.0), pt(0.5, 0.2)),
            Element::segment(pt(0.5, 0.2), pt(0.7, 1.0)),
            Element::segment(pt(0.7, 1.0), pt(1.0, 0.0)),
        ])
        .unwrap();
        let b = Body2D::new(1.0, curve, true).unwrap();
        for k in 0..60 {
            let x = 0.31 + 0.38 * k as f64 / 59.0;
            let r = b.trace(x, 1000);
            assert!(matches!(
                r.status,
                TraceStatus::Exited | TraceStatus::SingularHit
            ));
            close(r.exit_velocity.norm(), 1.0, 1e-12);
        }
    }

    #[test]
    fn hull_of_convex_body_is_identity() {
        let b = triangle();
        let hull = b.convex_hull().unwrap();
        for k in 0..=100 {
            let x = -1.0 + 2.0 * k as f64 / 100.0;
            close(hull.profile.value(x), 1.0 - x.abs(), 1e-9);
        }
    }

    #[test]
    fn modified_resistance_examples() {
        close(flat_top(1.0).modified_resistance().unwrap(), 0.5, 1e-14);
        // cone with slope -1 for x > 0
        let expected = (1.0 - 1.0 / 2f64.sqrt()) / 2.0;
        close(triangle().modified_resistance().unwrap(), expected, 1e-14);
        // piecewise profile agrees
        let hull = triangle().convex_hull().unwrap();
        close(hull.profile.modified_resistance(), expected, 1e-12);
    }

    #[test]
    fn modified_resistance_rejects_nonconvex() {
        let curve = GeneratorCurve::new(vec![
            Element::segment(pt(0.0, 1.0), pt(0.4, 0.2)),
            Element::segment(pt(0.4, 0.2), pt(0.7, 0.8)),
            Element::segment(pt(0.7, 0.8), pt(1.0, 0.0)),
        ])
        .unwrap();
        let b = Body2D::new(1.0, curve, true).unwrap();
        assert!(b.modified_resistance().is_err());
    }

    #[test]
    fn notched_body_satisfies_hull_inequality() {
        // Triangle with a notch cut below one face.
        let curve = GeneratorCurve::new(vec![
            Element::segment(pt(0.0, 1.0), pt(0.2, 0.8)),
            Element::segment(pt(0.2, 0.8), pt(0.4, 0.35)),
            Element::segment(pt(0.4, 0.35), pt(0.6, 0.4)),
            Element::segment(pt(0.6, 0.4), pt(1.0, 0.0)),
        ])
        .unwrap();
        let b = Body2D::new(1.0, curve, true).unwrap();
        let r = b.resistance(&ResistanceSpec::default()).unwrap();
        let hull = b.convex_hull().unwrap();
        let rhat = hull.profile.modified_resistance();
        assert!(
            r.value >= rhat - 1e-6,
            "billiard {} vs tangential-law bound {}",
            r.value,
            rhat
        );
    }

    #[test]
    fn body_json_round_trip() {
        let b = triangle();
        let s = b.to_json_string().unwrap();
        let b2 = Body2D::from_json_str(&s).unwrap();
        assert_eq!(b2.curve().elements.len(), b.curve().elements.len());
        assert_eq!(b2.is_symmetric(), b.is_symmetric());
        let r1 = b.resistance(&ResistanceSpec::default()).unwrap();
        let r2 = b2.resistance(&ResistanceSpec::default()).unwrap();
        assert_eq!(r1.value.to_bits(), r2.value.to_bits());
    }

    #[test]
    fn validation_catches_breaks() {
        // gap in the curve
        assert!(GeneratorCurve::new(vec![
            Element::segment(pt(0.0, 1.0), pt(0.4, 0.8)),
            Element::segment(pt(0.5, 0.8), pt(1.0, 0.0)),
        ])
        .is_err());
        // not inscribed: never reaches the declared height
        let curve =
            GeneratorCurve::new(vec![Element::segment(pt(0.0, 0.8), pt(1.0, 0.0))]).unwrap();
        assert!(Body2D::new(1.0, curve, true).is_err());
        // vertical side walls are fine: the closure still touches z = 0
        let curve =
            GeneratorCurve::new(vec![Element::segment(pt(0.0, 1.0), pt(1.0, 0.5))]).unwrap();
        assert!(Body2D::new(1.0, curve, true).is_ok());
        // self-intersecting upper curve: the third piece sweeps back across
        // the first
        let curve = GeneratorCurve::new(vec![
            Element::segment(pt(0.0, 1.0), pt(0.8, 0.2)),
            Element::segment(pt(0.8, 0.2), pt(0.3, 0.5)),
            Element::segment(pt(0.3, 0.5), pt(0.6, 0.9)),
            Element::segment(pt(0.6, 0.9), pt(1.0, 0.0)),
        ])
        .unwrap();
        assert!(Body2D::new(1.0, curve, true).is_err());
    }

    #[test]
    fn trapped_rays_raise_a_regularity_violation() {
        // A deep wedge needs ~pi/angle reflections to escape; a tight bounce
        // cap makes every wedge ray blow the budget.
        let curve = GeneratorCurve::new(vec![
            Element::segment(pt(0.0, 1.0), pt(0.45, 1.0)),
            Element::segment(pt(0.45, 1.0), pt(0.5, 0.05)),
            Element::segment(pt(0.5, 0.05), pt(0.55, 1.0)),
            Element::segment(pt(0.55, 1.0), pt(1.0, 0.0)),
        ])
        .unwrap();
        let b = Body2D::new(1.0, curve, true).unwrap();
        let spec = ResistanceSpec {
            quad: QuadratureSpec::default(),
            bounce_cap: 4,
        };
        let err = b.resistance(&spec).unwrap_err();
        match err {
            crate::error::Error::RegularityViolation { xs, .. } => {
                assert!(!xs.is_empty());
                assert!(xs
                    .iter()
                    .all(|x| (0.45..=0.55).contains(x) || (0.0..=1.0).contains(x)));
            }
            other => panic!("expected a regularity violation, got {other}"),
        }
        // with an adequate cap the same body evaluates cleanly
        assert!(b.resistance(&ResistanceSpec::default()).is_ok());
    }

    #[test]
    fn trace_csv_has_fixed_shape() {
        let b = triangle();
        let mut buf = Vec::new();
        b.write_trace_csv(8, 100, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,vx,vz,bounces,status\n"));
        assert_eq!(text.lines().count(), 9);
        assert!(text.contains("exited"));
    }
}
