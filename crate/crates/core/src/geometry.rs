//! Planar primitives for generator curves: segments, parabolic arcs, and
//! ray intersections against both.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Point in the cross-section plane; `x` is the radial axis, `z` the flow axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub z: f64,
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point { x: a[0], z: a[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.z]
    }
}

pub fn pt(x: f64, z: f64) -> Point {
    Point { x, z }
}

/// Free vector in the same plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub z: f64,
}

pub fn vec2(x: f64, z: f64) -> Vec2 {
    Vec2 { x, z }
}

impl Vec2 {
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.z * o.z
    }
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.z - self.z * o.x
    }
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
    pub fn unit(self) -> Vec2 {
        let n = self.norm();
        vec2(self.x / n, self.z / n)
    }
    pub fn scale(self, k: f64) -> Vec2 {
        vec2(k * self.x, k * self.z)
    }
    /// Clockwise perpendicular: the right-hand side of this direction.
    pub fn perp_cw(self) -> Vec2 {
        vec2(self.z, -self.x)
    }
    pub fn reversed(self) -> Vec2 {
        vec2(-self.x, -self.z)
    }
}

impl Point {
    pub fn to(self, o: Point) -> Vec2 {
        vec2(o.x - self.x, o.z - self.z)
    }
    pub fn offset(self, v: Vec2) -> Point {
        pt(self.x + v.x, self.z + v.z)
    }
    pub fn dist(self, o: Point) -> f64 {
        self.to(o).norm()
    }
    pub fn mirror_x(self) -> Point {
        pt(-self.x, self.z)
    }
}

/// Elastic reflection of `v` off a surface with unit normal `n`.
pub fn reflect(v: Vec2, n: Vec2) -> Vec2 {
    let d = v.dot(n);
    vec2(v.x - 2.0 * d * n.x, v.z - 2.0 * d * n.z).unit()
}

/// Arc of a parabola given by vertex, focus, and a parameter range.
///
/// In the local frame (`e2` from vertex to focus, `e1 = e2` rotated
/// clockwise) the arc is `t -> vertex + t e1 + t^2/(4a) e2` with
/// `a = |focus - vertex|`, traversed with increasing `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicArc {
    pub vertex: Point,
    pub focus: Point,
    #[serde(rename = "t_range")]
    pub t_range: [f64; 2],
}

impl ParabolicArc {
    pub fn new(vertex: Point, focus: Point, t0: f64, t1: f64) -> Result<Self> {
        let a = vertex.dist(focus);
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidBody(
                "parabolic arc requires distinct vertex and focus".into(),
            ));
        }
        if !(t1 > t0) {
            return Err(Error::InvalidBody(
                "arc parameter range must be increasing".into(),
            ));
        }
        Ok(ParabolicArc {
            vertex,
            focus,
            t_range: [t0, t1],
        })
    }

    pub fn focal(&self) -> f64 {
        self.vertex.dist(self.focus)
    }

    /// Local frame `(e1, e2)`.
    pub fn frame(&self) -> (Vec2, Vec2) {
        let e2 = self.vertex.to(self.focus).unit();
        (e2.perp_cw(), e2)
    }

    pub fn point_at(&self, t: f64) -> Point {
        let (e1, e2) = self.frame();
        let a = self.focal();
        self.vertex
            .offset(e1.scale(t))
            .offset(e2.scale(t * t / (4.0 * a)))
    }

    /// Unnormalized tangent in traversal direction.
    pub fn tangent_at(&self, t: f64) -> Vec2 {
        let (e1, e2) = self.frame();
        let a = self.focal();
        vec2(e1.x + t / (2.0 * a) * e2.x, e1.z + t / (2.0 * a) * e2.z)
    }
}

/// One piece of a generator curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Element {
    Segment { from: Point, to: Point },
    ParabolicArc(ParabolicArc),
}

impl Element {
    pub fn segment(from: Point, to: Point) -> Element {
        Element::Segment { from, to }
    }

    pub fn start(&self) -> Point {
        match self {
            Element::Segment { from, .. } => *from,
            Element::ParabolicArc(a) => a.point_at(a.t_range[0]),
        }
    }

    pub fn end(&self) -> Point {
        match self {
            Element::Segment { to, .. } => *to,
            Element::ParabolicArc(a) => a.point_at(a.t_range[1]),
        }
    }

    pub fn tangent_at_start(&self) -> Vec2 {
        match self {
            Element::Segment { from, to } => from.to(*to).unit(),
            Element::ParabolicArc(a) => a.tangent_at(a.t_range[0]).unit(),
        }
    }

    pub fn tangent_at_end(&self) -> Vec2 {
        match self {
            Element::Segment { from, to } => from.to(*to).unit(),
            Element::ParabolicArc(a) => a.tangent_at(a.t_range[1]).unit(),
        }
    }

    /// Mirror across `x = 0`, re-parameterized so traversal order mirrors too.
    pub fn mirrored(&self) -> Element {
        match self {
            Element::Segment { from, to } => Element::Segment {
                from: to.mirror_x(),
                to: from.mirror_x(),
            },
            Element::ParabolicArc(a) => Element::ParabolicArc(ParabolicArc {
                vertex: a.vertex.mirror_x(),
                focus: a.focus.mirror_x(),
                t_range: [-a.t_range[1], -a.t_range[0]],
            }),
        }
    }

    /// Axis-aligned bounding box, padded a hair for float safety.
    pub fn bbox(&self) -> (Point, Point) {
        let pad = 1e-12;
        match self {
            Element::Segment { from, to } => (
                pt(from.x.min(to.x) - pad, from.z.min(to.z) - pad),
                pt(from.x.max(to.x) + pad, from.z.max(to.z) + pad),
            ),
            Element::ParabolicArc(a) => {
                // Extremes lie at the ends or where a coordinate of the
                // tangent vanishes (at most one interior t per axis).
                let mut lo = pt(f64::INFINITY, f64::INFINITY);
                let mut hi = pt(f64::NEG_INFINITY, f64::NEG_INFINITY);
                let mut take = |p: Point| {
                    lo = pt(lo.x.min(p.x), lo.z.min(p.z));
                    hi = pt(hi.x.max(p.x), hi.z.max(p.z));
                };
                take(a.point_at(a.t_range[0]));
                take(a.point_at(a.t_range[1]));
                let (e1, e2) = a.frame();
                let fa = a.focal();
                for (c1, c2) in [(e1.x, e2.x), (e1.z, e2.z)] {
                    if c2.abs() > 1e-300 {
                        let t = -2.0 * fa * c1 / c2;
                        if t > a.t_range[0] && t < a.t_range[1] {
                            take(a.point_at(t));
                        }
                    }
                }
                (pt(lo.x - pad, lo.z - pad), pt(hi.x + pad, hi.z + pad))
            }
        }
    }

    /// Sample points along the element so chords sag at most `tol`.
    pub fn flatten(&self, tol: f64, out: &mut Vec<Point>) {
        match self {
            Element::Segment { from, to } => {
                out.push(*from);
                out.push(*to);
            }
            Element::ParabolicArc(a) => {
                let span = a.t_range[1] - a.t_range[0];
                // chord sag over dt is dt^2/(16 a)
                let dt = (16.0 * a.focal() * tol.max(1e-15)).sqrt();
                let n = ((span / dt).ceil() as usize).clamp(1, 4096);
                for k in 0..=n {
                    out.push(a.point_at(a.t_range[0] + span * k as f64 / n as f64));
                }
            }
        }
    }
}

/// A ray `origin + t dir`, `t > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Point,
    pub dir: Vec2,
}

/// An intersection of a ray with an element.
#[derive(Debug, Clone, Copy)]
pub struct RayHit {
    /// Ray parameter.
    pub t: f64,
    pub point: Point,
    /// Unit normal of the surface at the hit (orientation unspecified).
    pub normal: Vec2,
}

const PARAM_PAD: f64 = 1e-9;

impl Ray {
    pub fn at(&self, t: f64) -> Point {
        self.origin.offset(self.dir.scale(t))
    }

    /// Quick slab rejection against a bounding box.
    pub fn misses_bbox(&self, lo: Point, hi: Point) -> bool {
        let mut tmin = 0.0f64;
        let mut tmax = f64::INFINITY;
        for (o, d, l, h) in [
            (self.origin.x, self.dir.x, lo.x, hi.x),
            (self.origin.z, self.dir.z, lo.z, hi.z),
        ] {
            if d.abs() < 1e-300 {
                if o < l || o > h {
                    return true;
                }
            } else {
                let (a, b) = ((l - o) / d, (h - o) / d);
                tmin = tmin.max(a.min(b));
                tmax = tmax.min(a.max(b));
                if tmin > tmax {
                    return true;
                }
            }
        }
        false
    }

    /// All forward intersections (`t > t_min`) with an element, unsorted.
    pub fn hit_element(&self, e: &Element, t_min: f64, out: &mut Vec<RayHit>) {
        match e {
            Element::Segment { from, to } => {
                let d = from.to(*to);
                let denom = self.dir.cross(d);
                if denom.abs() < 1e-300 {
                    return; // parallel (collinear overlap treated as no hit)
                }
                let w = self.origin.to(*from);
                let t = w.cross(d) / denom;
                let s = w.cross(self.dir) / denom;
                let len = d.norm();
                let pad = PARAM_PAD / len.max(1e-300);
                if t > t_min && s >= -pad && s <= 1.0 + pad {
                    out.push(RayHit {
                        t,
                        point: self.at(t),
                        normal: d.unit().perp_cw(),
                    });
                }
            }
            Element::ParabolicArc(arc) => {
                let (e1, e2) = arc.frame();
                let a = arc.focal();
                let rel = arc.vertex.to(self.origin);
                let xi0 = rel.dot(e1);
                let eta0 = rel.dot(e2);
                let xid = self.dir.dot(e1);
                let etad = self.dir.dot(e2);
                // (xi0 + t xid)^2 = 4a (eta0 + t etad)
                let qa = xid * xid;
                let qb = 2.0 * xi0 * xid - 4.0 * a * etad;
                let qc = xi0 * xi0 - 4.0 * a * eta0;
                let mut roots = [f64::NAN; 2];
                let mut nroots = 0;
                if qa.abs() < 1e-300 {
                    if qb.abs() > 1e-300 {
                        roots[0] = -qc / qb;
                        nroots = 1;
                    }
                } else {
                    let disc = qb * qb - 4.0 * qa * qc;
                    if disc >= 0.0 {
                        let sq = disc.sqrt();
                        let q = -0.5 * (qb + qb.signum() * sq);
                        if q.abs() > 1e-300 {
                            roots[0] = q / qa;
                            roots[1] = qc / q;
                            nroots = 2;
                        } else {
                            roots[0] = 0.0;
                            nroots = 1;
                        }
                    }
                }
                for &t in roots.iter().take(nroots) {
                    if !(t > t_min) {
                        continue;
                    }
                    let xi = xi0 + t * xid;
                    if xi >= arc.t_range[0] - PARAM_PAD && xi <= arc.t_range[1] + PARAM_PAD {
                        out.push(RayHit {
                            t,
                            point: self.at(t),
                            normal: arc.tangent_at(xi).unit().perp_cw(),
                        });
                    }
                }
            }
        }
    }
}

/// Proper-crossing test for two segments (shared endpoints and touches do
/// not count).
pub fn segments_cross(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = a0.to(a1);
    let d2 = b0.to(b1);
    let s1 = d1.cross(a0.to(b0));
    let s2 = d1.cross(a0.to(b1));
    let s3 = d2.cross(b0.to(a0));
    let s4 = d2.cross(b0.to(a1));
    s1 * s2 < 0.0 && s3 * s4 < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn reflection_examples() {
        let v = reflect(vec2(0.0, -1.0), vec2(0.0, 1.0));
        close(v.x, 0.0, 0.0);
        close(v.z, 1.0, 0.0);
        // 45-degree mirror: segment (0,h)->(1,h-1) has tangent (1,-1)/sqrt2.
        let n = vec2(1.0, -1.0).unit().perp_cw();
        let v = reflect(vec2(0.0, -1.0), n);
        close(v.x, 1.0, 1e-15);
        close(v.z, 0.0, 1e-15);
        // isometry
        for k in 0..20 {
            let th = 0.3 * k as f64;
            let n = vec2(th.cos(), th.sin());
            let v = reflect(vec2(0.0, -1.0), n);
            close(v.norm(), 1.0, 1e-12);
        }
    }

    #[test]
    fn vertical_axis_arc_is_a_graph() {
        // vertex at origin, focus above: z = x^2/(4a), t = x.
        let arc = ParabolicArc::new(pt(0.0, 0.0), pt(0.0, 0.5), -1.0, 1.0).unwrap();
        let p = arc.point_at(0.6);
        close(p.x, 0.6, 1e-15);
        close(p.z, 0.36 / 2.0, 1e-15);
        let tang = arc.tangent_at(0.6);
        close(tang.z / tang.x, 0.6, 1e-15);
    }

    #[test]
    fn ray_hits_arc_and_reflects_through_focus() {
        let arc = ParabolicArc::new(pt(0.0, 0.0), pt(0.0, 0.25), -2.0, 2.0).unwrap();
        let ray = Ray {
            origin: pt(0.8, 5.0),
            dir: vec2(0.0, -1.0),
        };
        let mut hits = Vec::new();
        ray.hit_element(&Element::ParabolicArc(arc), 1e-12, &mut hits);
        assert_eq!(hits.len(), 1);
        let h = hits[0];
        close(h.point.z, 0.64, 1e-12);
        // Reflected ray passes through the focus.
        let v = reflect(ray.dir, h.normal);
        let to_focus = h.point.to(pt(0.0, 0.25)).unit();
        assert!(v.cross(to_focus).abs() < 1e-12);
        assert!(v.dot(to_focus) > 0.0);
    }

    #[test]
    fn ray_segment_basics() {
        let seg = Element::segment(pt(-1.0, 2.0), pt(1.0, 2.0));
        let ray = Ray {
            origin: pt(0.25, 5.0),
            dir: vec2(0.0, -1.0),
        };
        let mut hits = Vec::new();
        ray.hit_element(&seg, 1e-12, &mut hits);
        assert_eq!(hits.len(), 1);
        close(hits[0].t, 3.0, 1e-12);
        // parallel ray misses
        let ray = Ray {
            origin: pt(2.0, 0.0),
            dir: vec2(0.0, 1.0),
        };
        let wall = Element::segment(pt(1.0, 0.0), pt(1.0, 5.0));
        let mut hits = Vec::new();
        ray.hit_element(&wall, 1e-12, &mut hits);
        assert!(hits.is_empty());
    }

    #[test]
    fn mirrored_elements_trace_the_mirror_image() {
        let arc = ParabolicArc::new(pt(0.3, 0.1), pt(0.5, 0.4), -0.7, 1.3).unwrap();
        let e = Element::ParabolicArc(arc);
        let m = e.mirrored();
        assert_eq!(m.start().x, -e.end().x);
        close(m.start().z, e.end().z, 1e-15);
        assert_eq!(m.end().x, -e.start().x);
        // interior point check
        if let Element::ParabolicArc(ma) = m {
            let p = arc.point_at(0.2);
            let q = ma.point_at(-0.2);
            close(q.x, -p.x, 1e-12);
            close(q.z, p.z, 1e-12);
        } else {
            panic!("mirror of an arc must be an arc");
        }
    }

    #[test]
    fn bbox_covers_arc_extremes() {
        // Downward-opening axis pointing left: extreme interior points exist.
        let arc = ParabolicArc::new(pt(0.0, 0.0), pt(-0.3, 0.4), -1.5, 1.5).unwrap();
        let (lo, hi) = Element::ParabolicArc(arc).bbox();
        for k in 0..=100 {
            let t = -1.5 + 3.0 * k as f64 / 100.0;
            let p = arc.point_at(t);
            assert!(p.x >= lo.x && p.x <= hi.x && p.z >= lo.z && p.z <= hi.z);
        }
    }

    #[test]
    fn segment_crossing_predicate() {
        assert!(segments_cross(
            pt(0.0, 0.0),
            pt(1.0, 1.0),
            pt(0.0, 1.0),
            pt(1.0, 0.0)
        ));
        // touching at an endpoint is not a crossing
        assert!(!segments_cross(
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(1.0, 0.0),
            pt(2.0, 1.0)
        ));
    }

    #[test]
    fn element_json_schema() {
        let e = Element::segment(pt(0.0, 1.0), pt(1.0, 0.0));
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"type":"segment","from":[0.0,1.0],"to":[1.0,0.0]}"#);
        let a = Element::ParabolicArc(
            ParabolicArc::new(pt(0.0, 0.0), pt(0.0, 1.0), -1.0, 2.0).unwrap(),
        );
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(
            s,
            r#"{"type":"parabolic_arc","vertex":[0.0,0.0],"focus":[0.0,1.0],"t_range":[-1.0,2.0]}"#
        );
        let back: Element = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }
}
