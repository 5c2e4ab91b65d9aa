//! Zigzag bodies that approach the tangential-exit resistance bound, and
//! single-impact parabolic-chain bodies for small heights.
//!
//! A zigzag body replaces each chord of a piecewise-affine concave hull with
//! a cell: a short top face, a small "flap" parabola, and a larger catch
//! parabola sharing its focus. Rays land on the catch arc, pass through the
//! common focus, reflect off the flap, and leave parallel to a line of slope
//! `chord slope + delta` — so the body's true resistance approaches the
//! tangential-law value of the hull as `delta -> 0`.

use crate::billiard::{Body2D, GeneratorCurve, PiecewiseProfile};
use crate::error::{Error, Result};
use crate::geometry::{pt, vec2, Element, ParabolicArc, Point};
use crate::solver::{ProfileSolution, SINGLE_IMPACT_THRESHOLD_HEIGHT};
use serde::Serialize;

/// A concave even profile of the upper body boundary on `x in [0, 1]`.
pub trait ConcaveProfile {
    /// Boundary height at `|x|`; `height_at(0)` is the body height.
    fn height_at(&self, x: f64) -> f64;
    /// One-sided slope (d height/dx for x > 0), non-increasing.
    fn slope_at(&self, x: f64) -> f64;
}

impl ConcaveProfile for ProfileSolution {
    fn height_at(&self, x: f64) -> f64 {
        self.hull_value(x.clamp(-1.0, 1.0)).expect("in-domain")
    }
    fn slope_at(&self, x: f64) -> f64 {
        self.hull_slope(x.clamp(-1.0, 1.0)).expect("in-domain")
    }
}

/// Concave profile from plain closures (slopes by finite differences if the
/// caller has none better).
pub struct FnProfile<V: Fn(f64) -> f64, S: Fn(f64) -> f64> {
    pub value: V,
    pub slope: S,
}

impl<V: Fn(f64) -> f64, S: Fn(f64) -> f64> ConcaveProfile for FnProfile<V, S> {
    fn height_at(&self, x: f64) -> f64 {
        (self.value)(x)
    }
    fn slope_at(&self, x: f64) -> f64 {
        (self.slope)(x)
    }
}

/// Node placement for the piecewise-affine approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStrategy {
    /// Interior nodes where the profile slope crosses equally spaced
    /// targets; the slope sup-error then halves when `m` doubles.
    SlopeEquidistributed,
    /// Equal-width intervals; keeps the first chord steep on flat-top
    /// profiles, which permits larger `delta` in the cell construction.
    Uniform,
}

/// Piecewise-affine concave even approximation of a hull profile.
///
/// Stored on `x >= 0`: nodes `0 = x_0 < ... < x_m = 1`, values at nodes, and
/// strictly decreasing negative chord slopes.
#[derive(Debug, Clone)]
pub struct PartitionedProfile {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PartitionedProfile {
    /// Builds from nodes and values, merging consecutive equal-slope chords,
    /// and validates concavity and monotonicity.
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() < 2 {
            return Err(Error::Parameter("need at least two nodes".into()));
        }
        if (nodes[0]).abs() > 1e-12 || (nodes[nodes.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter("nodes must span [0, 1]".into()));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Parameter("nodes must be strictly increasing".into()));
        }
        // merge equal-slope chords (affine stretches collapse exactly)
        let mut xs = vec![nodes[0]];
        let mut vs = vec![values[0]];
        let mut slopes: Vec<f64> = Vec::new();
        for j in 1..nodes.len() {
            let s = (values[j] - vs[vs.len() - 1]) / (nodes[j] - xs[xs.len() - 1]);
            if let Some(last) = slopes.last().copied() {
                if (s - last).abs() < 1e-12 {
                    let n = xs.len();
                    xs[n - 1] = nodes[j];
                    vs[n - 1] = values[j];
                    let m = slopes.len();
                    slopes[m - 1] = (vs[n - 1] - vs[n - 2]) / (xs[n - 1] - xs[n - 2]);
                    continue;
                }
            }
            xs.push(nodes[j]);
            vs.push(values[j]);
            slopes.push(s);
        }
        if slopes[0] >= 0.0 {
            return Err(Error::Parameter(
                "leading chord must descend (flat apex: reduce m or use slope-equidistributed nodes)"
                    .into(),
            ));
        }
        for w in slopes.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::Parameter(
                    "chord slopes must be strictly decreasing (profile not strictly concave here)"
                        .into(),
                ));
            }
        }
        if !(vs[0] > 0.0) {
            return Err(Error::Parameter("profile height must be positive".into()));
        }
        Ok(PartitionedProfile {
            nodes: xs,
            values: vs,
            slopes,
        })
    }

    /// Number of chords on the positive half.
    pub fn segment_count(&self) -> usize {
        self.slopes.len()
    }

    pub fn height(&self) -> f64 {
        self.values[0]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn chord_slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn value(&self, x: f64) -> f64 {
        let x = x.abs();
        let j = self
            .nodes
            .partition_point(|&v| v <= x)
            .clamp(1, self.nodes.len() - 1);
        self.values[j - 1] + self.slopes[j - 1] * (x - self.nodes[j - 1])
    }

    /// Piecewise-constant slope at `|x|` (right-continuous).
    pub fn slope_at(&self, x: f64) -> f64 {
        let x = x.abs();
        let j = self
            .nodes
            .partition_point(|&v| v <= x)
            .clamp(1, self.nodes.len() - 1);
        self.slopes[j - 1]
    }

    /// Tightest admissible upper bound on `delta` for the cell construction.
    pub fn max_delta(&self) -> f64 {
        let mut bound = -self.slopes[0];
        for w in self.slopes.windows(2) {
            bound = bound.min(w[0] - w[1]);
        }
        for w in self.nodes.windows(2) {
            bound = bound.min(w[1] - w[0]);
        }
        bound
    }

    /// Exact tangential-law resistance of this piecewise-affine hull.
    pub fn modified_resistance(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.slopes.len() {
            let (a, b) = (self.nodes[j], self.nodes[j + 1]);
            let s = self.slopes[j];
            total += (1.0 + s / (1.0 + s * s).sqrt()) * 0.5 * (b * b - a * a);
        }
        total
    }

    /// Even extension as a piecewise-linear profile on `[-1, 1]`.
    pub fn to_profile(&self) -> PiecewiseProfile {
        let mut xs: Vec<f64> = self.nodes.iter().rev().map(|&x| -x).collect();
        xs.pop();
        xs.extend(self.nodes.iter());
        let mut zs: Vec<f64> = self.values.iter().rev().cloned().collect();
        zs.pop();
        zs.extend(self.values.iter());
        PiecewiseProfile { xs, zs }
    }
}

/// Piecewise-affine approximation with slope-equidistributed nodes.
pub fn approximate_profile(profile: &dyn ConcaveProfile, m: usize) -> Result<PartitionedProfile> {
    approximate_profile_with(profile, m, NodeStrategy::SlopeEquidistributed)
}

/// Piecewise-affine approximation with an explicit node strategy.
pub fn approximate_profile_with(
    profile: &dyn ConcaveProfile,
    m: usize,
    strategy: NodeStrategy,
) -> Result<PartitionedProfile> {
    if m < 1 {
        return Err(Error::Parameter("segment count must be at least 1".into()));
    }
    // concavity probe
    let probes = 512;
    let mut prev = f64::INFINITY;
    for k in 0..=probes {
        let s = profile.slope_at(k as f64 / probes as f64);
        if s > prev + 1e-9 {
            return Err(Error::Domain(
                "profile slope increases: input is not concave".into(),
            ));
        }
        prev = s;
    }
    let nodes: Vec<f64> = match strategy {
        NodeStrategy::Uniform => (0..=m).map(|k| k as f64 / m as f64).collect(),
        NodeStrategy::SlopeEquidistributed => {
            // flat apex edge: largest x with (numerically) zero slope
            let eps = 1e-12;
            let edge = if profile.slope_at(1e-9) < -eps {
                0.0
            } else {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if profile.slope_at(mid) < -eps {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let s_start = profile.slope_at((edge + 1e-9).min(1.0));
            let s_end = profile.slope_at(1.0);
            if s_end > s_start - 1e-9 {
                // no slope variation to equidistribute: a single chord is exact
                (0..=1).map(|k| k as f64).collect()
            } else {
                let mut xs = vec![0.0];
                for k in 1..m {
                    let target = s_start + (s_end - s_start) * k as f64 / m as f64;
                    let (mut lo, mut hi) = (edge, 1.0);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if profile.slope_at(mid) > target {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    xs.push(0.5 * (lo + hi));
                }
                xs.push(1.0);
                xs
            }
        }
    };
    // Clamp to the box floor: solver rims land within 1e-9 of zero and a
    // hair below it would poke the construction through the bottom.
    let values: Vec<f64> = nodes
        .iter()
        .map(|&x| profile.height_at(x).max(0.0))
        .collect();
    PartitionedProfile::new(nodes, values)
}

/// Construction audit of one cell: every named point plus the homothety data.
#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub index: usize,
    pub p: [f64; 2],
    pub p_prime: [f64; 2],
    pub q: [f64; 2],
    pub s: [f64; 2],
    pub q_delta: [f64; 2],
    pub p_delta: [f64; 2],
    pub s_delta: [f64; 2],
    pub s_prime_delta: [f64; 2],
    pub flap_vertex: [f64; 2],
    pub q_prime_delta: [f64; 2],
    pub crossover_x: f64,
    pub homothety_ratio: Option<f64>,
    pub copies: usize,
    pub flap_scale: f64,
    /// Unit direction of the cell's exit line.
    pub exit_dir: [f64; 2],
    /// Abscissa windows where the two-bounce exit law applies.
    pub two_bounce_windows: Vec<[f64; 2]>,
}

/// One cell's boundary piece, ordered from its west chord node to the east.
#[derive(Debug, Clone)]
pub struct CellCurve {
    pub elements: Vec<Element>,
    pub report: CellReport,
}

fn validate_delta(pp: &PartitionedProfile, delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Parameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let s1 = pp.slopes[0];
    if delta >= -s1 {
        return Err(Error::Parameter(format!(
            "delta = {delta} must be below the first chord's descent rate {}",
            -s1
        )));
    }
    for (j, w) in pp.slopes.windows(2).enumerate() {
        let gap = w[0] - w[1];
        if delta >= gap {
            return Err(Error::Parameter(format!(
                "delta = {delta} must be below the slope gap {gap} after segment {}",
                j + 1
            )));
        }
    }
    for (j, w) in pp.nodes.windows(2).enumerate() {
        let width = w[1] - w[0];
        if delta >= width {
            return Err(Error::Parameter(format!(
                "delta = {delta} must be below the width {width} of segment {}",
                j + 1
            )));
        }
    }
    Ok(())
}

fn scale_point(center: Point, k: f64, p: Point) -> Point {
    pt(
        center.x + k * (p.x - center.x),
        center.z + k * (p.z - center.z),
    )
}

fn scale_element(center: Point, k: f64, e: &Element) -> Element {
    match e {
        Element::Segment { from, to } => Element::Segment {
            from: scale_point(center, k, *from),
            to: scale_point(center, k, *to),
        },
        Element::ParabolicArc(a) => Element::ParabolicArc(ParabolicArc {
            vertex: scale_point(center, k, a.vertex),
            focus: scale_point(center, k, a.focus),
            t_range: [k * a.t_range[0], k * a.t_range[1]],
        }),
    }
}

/// Builds the boundary curve of cell `i` (1-based chord index) for the given
/// `delta`. Preconditions are the global partition bounds; violations name
/// the binding constraint.
pub fn build_cell(pp: &PartitionedProfile, i: usize, delta: f64) -> Result<CellCurve> {
    validate_delta(pp, delta)?;
    if i < 1 || i > pp.segment_count() {
        return Err(Error::Parameter(format!(
            "segment index {i} outside 1..={}",
            pp.segment_count()
        )));
    }
    let j = i - 1;
    let x_prev = pp.nodes[j];
    let x_next = pp.nodes[j + 1];
    let f_prev = pp.values[j];
    let f_next = pp.values[j + 1];
    let s = pp.slopes[j];
    let w_cell = x_next - x_prev;

    let p = pt(x_prev, f_prev);
    let p_prime = pt(x_next, f_next);
    let q = pt(x_prev, f_next);
    let s_pt = pt(x_next, f_prev + (s + delta) * w_cell);
    let q_delta = pt(x_prev + delta, f_next);
    let p_delta = pt(x_prev + delta, f_prev + s * delta);
    let s_delta = pt(x_prev + delta, f_prev + (s + delta) * delta);
    let catch_focal = p_delta.z - q_delta.z; // -s (w_cell - delta) > 0
    let sd = s + delta; // exit-line slope, negative
    let exit_dir = vec2(1.0, sd).unit();

    // catch arc reach: where it meets the exit line through the focus
    let t_catch = 2.0 * catch_focal * ((1.0 + sd * sd).sqrt() + sd);
    let crossover_x = x_prev + delta + t_catch;

    // Flap parabola: focus at p_delta, axis along the exit line, vertex on it
    // west of the focus. Shrink the vertex offset until the arc stays below
    // the top face line P-S (any such choice is admissible).
    let line_ps = |x: f64| f_prev + (s + delta) * (x - x_prev);
    let mut flap_w = 0.5 * delta;
    let mut flap: Option<(ParabolicArc, f64, Point)> = None;
    for _ in 0..64 {
        let vertex = pt(p_delta.x - flap_w, p_delta.z - flap_w * sd);
        let arc = ParabolicArc::new(vertex, p_delta, 0.0, 1.0)?; // range fixed below
        let (e1, e2) = arc.frame();
        let a_flap = arc.focal();
        // upper-branch parameter where the arc crosses x = p_delta.x
        let qa = e2.x / (4.0 * a_flap);
        let qb = e1.x;
        let qc = vertex.x - p_delta.x;
        let disc = qb * qb - 4.0 * qa * qc;
        let t_up = (-qb - disc.sqrt()) / (2.0 * qa);
        let arc = ParabolicArc::new(vertex, p_delta, t_up, 0.0)?;
        let mut ok = true;
        for k in 0..=64 {
            let t = t_up + (0.0 - t_up) * k as f64 / 64.0;
            let pnt = arc.point_at(t);
            if pnt.z >= line_ps(pnt.x) {
                ok = false;
                break;
            }
        }
        if ok {
            flap = Some((arc, a_flap, vertex));
            break;
        }
        flap_w *= 0.5;
    }
    let Some((flap_arc, _flap_focal, flap_vertex)) = flap else {
        return Err(Error::Parameter(
            "could not fit the flap parabola below the top face".into(),
        ));
    };
    let s_prime_delta = flap_arc.point_at(flap_arc.t_range[0]);
    let q_prime_delta = pt(flap_vertex.x, f_next);

    // Base pattern (full catch arc), west to east.
    let catch_arc = |t_end: f64| -> Result<Element> {
        Ok(Element::ParabolicArc(ParabolicArc::new(
            q_delta, p_delta, 0.0, t_end,
        )?))
    };
    let mut base: Vec<Element> = vec![
        Element::segment(p, s_delta),
        Element::segment(s_delta, s_prime_delta),
        Element::ParabolicArc(flap_arc),
        Element::segment(flap_vertex, q_prime_delta),
        Element::segment(q_prime_delta, q_delta),
    ];

    let mut elements: Vec<Element> = Vec::new();
    let mut windows: Vec<[f64; 2]> = Vec::new();
    let mut homothety_ratio = None;
    let mut copies = 0usize;

    if crossover_x >= x_next - 1e-15 {
        // Short case: clip the catch arc at the east chord line and drop
        // down to the chord node.
        elements.append(&mut base);
        let t_clip = w_cell - delta;
        elements.push(catch_arc(t_clip)?);
        let clip_top = pt(x_next, q_delta.z + t_clip * t_clip / (4.0 * catch_focal));
        if clip_top.dist(p_prime) > 1e-15 {
            elements.push(Element::segment(clip_top, p_prime));
        }
        windows.push([x_prev + delta, x_next]);
    } else {
        // Homothety case: the pattern repeats, contracted about the east
        // node, and the last strip is closed by a vertical drop onto a
        // horizontal face at the chord height.
        let k = (x_next - crossover_x) / w_cell;
        homothety_ratio = Some(k);
        base.push(catch_arc(t_catch)?);
        let bar_p = pt(
            crossover_x,
            q_delta.z + t_catch * t_catch / (4.0 * catch_focal),
        );
        let p_on_chord = pt(crossover_x, f_prev + s * (crossover_x - x_prev));
        base.push(Element::segment(bar_p, p_on_chord));
        // The strip left for the closing face must shrink faster than the
        // first-order cell error, otherwise its own (1 + v_z) = 2 plateau
        // puts a floor under the convergence; a delta^2 stop keeps the
        // closure second-order. The floor keeps the deepest copies orders of
        // magnitude above the tracer's 1e-9 junction tolerance.
        let stop_width = (delta * delta).max(1e-4);
        let mut ratio = 1.0;
        while ratio * w_cell >= stop_width && copies < 400 {
            let a_lo = x_next - ratio * w_cell;
            for e in &base {
                elements.push(scale_element(p_prime, ratio, e));
            }
            windows.push([a_lo + ratio * delta, a_lo + ratio * (crossover_x - x_prev)]);
            copies += 1;
            ratio *= k;
        }
        let a_last = x_next - ratio * w_cell;
        let chord_pt = pt(a_last, f_prev + s * (a_last - x_prev));
        if chord_pt.z > f_next + 1e-15 {
            elements.push(Element::segment(chord_pt, pt(a_last, f_next)));
        }
        if x_next - a_last > 1e-15 {
            elements.push(Element::segment(pt(a_last, f_next), p_prime));
        }
    }

    let report = CellReport {
        index: i,
        p: p.into(),
        p_prime: p_prime.into(),
        q: q.into(),
        s: s_pt.into(),
        q_delta: q_delta.into(),
        p_delta: p_delta.into(),
        s_delta: s_delta.into(),
        s_prime_delta: s_prime_delta.into(),
        flap_vertex: flap_vertex.into(),
        q_prime_delta: q_prime_delta.into(),
        crossover_x,
        homothety_ratio,
        copies,
        flap_scale: flap_w,
        exit_dir: [exit_dir.x, exit_dir.z],
        two_bounce_windows: windows,
    };
    Ok(CellCurve { elements, report })
}

/// Assembles the full zigzag body for a partition and `delta`.
pub fn assemble_zigzag(pp: &PartitionedProfile, delta: f64) -> Result<Body2D> {
    Ok(assemble_zigzag_with_cells(pp, delta)?.0)
}

/// Zigzag body plus the per-cell construction audit.
pub fn assemble_zigzag_with_cells(
    pp: &PartitionedProfile,
    delta: f64,
) -> Result<(Body2D, Vec<CellReport>)> {
    validate_delta(pp, delta)?;
    let mut elements: Vec<Element> = Vec::new();
    let mut reports = Vec::new();
    for i in 1..=pp.segment_count() {
        let cell = build_cell(pp, i, delta)?;
        elements.extend(cell.elements);
        reports.push(cell.report);
    }
    let body = Body2D::new(pp.height(), GeneratorCurve::new(elements)?, true)?;
    Ok((body, reports))
}

/// Single-impact parabolic-chain body for `0 < h < threshold`.
#[derive(Debug, Clone)]
pub struct ChainBody {
    pub body: Body2D,
    /// Positive odd nodes `x_1 < x_3 < ...` where the boundary reaches `h`.
    pub odd_nodes: Vec<f64>,
}

impl ChainBody {
    pub fn first_node(&self) -> f64 {
        self.odd_nodes[0]
    }
    pub fn last_node(&self) -> f64 {
        self.odd_nodes[self.odd_nodes.len() - 1]
    }

    /// Closed-form value of the resistance integral over
    /// `[first_node, last_node]`.
    pub fn interval_integral_closed_form(&self) -> f64 {
        let (a, b) = (self.first_node(), self.last_node());
        (b * b - a * a) * (std::f64::consts::FRAC_PI_2 - 2.0 * 0.5f64.atan())
    }
}

/// Builds the parabolic-chain body. With no nodes given, odd nodes are laid
/// out uniformly at multiples of `4h/3` below 1.
pub fn chain_body(h: f64, odd_nodes: Option<&[f64]>) -> Result<ChainBody> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("height must be positive, got {h}")));
    }
    if h >= SINGLE_IMPACT_THRESHOLD_HEIGHT {
        return Err(Error::Regime(format!(
            "parabolic chains exist for heights below {SINGLE_IMPACT_THRESHOLD_HEIGHT}; \
             at h = {h} solve the single-impact profile instead"
        )));
    }
    let x1 = 4.0 * h / 3.0;
    let odd: Vec<f64> = match odd_nodes {
        Some(nodes) => {
            if nodes.is_empty() {
                return Err(Error::Parameter("need at least one odd node".into()));
            }
            if (nodes[0] - x1).abs() > 1e-12 {
                return Err(Error::Parameter(format!(
                    "first odd node must be 4h/3 = {x1}, got {}",
                    nodes[0]
                )));
            }
            if !nodes.windows(2).all(|w| w[1] > w[0]) {
                return Err(Error::Parameter(
                    "odd nodes must be strictly increasing".into(),
                ));
            }
            if nodes[nodes.len() - 1] >= 1.0 {
                return Err(Error::Parameter("odd nodes must stay below 1".into()));
            }
            for w in nodes.windows(2) {
                if w[1] - w[0] > 2.0 * x1 + 1e-12 {
                    return Err(Error::Parameter(format!(
                        "odd-node spacing {} exceeds the admissible 2*x1 = {}",
                        w[1] - w[0],
                        2.0 * x1
                    )));
                }
            }
            nodes.to_vec()
        }
        None => {
            let count = ((1.0 - 1e-9) / x1).floor() as usize;
            if count == 0 {
                return Err(Error::Parameter(format!(
                    "4h/3 = {x1} does not fit below 1; height too large for a chain"
                )));
            }
            (1..=count).map(|k| k as f64 * x1).collect()
        }
    };
    let mut elements: Vec<Element> = Vec::new();
    // center pair on [0, x1]: its valley touches the bottom when x1 = 4h/3
    let y0 = h - x1;
    elements.push(Element::ParabolicArc(ParabolicArc::new(
        pt(-x1, y0),
        pt(-x1, h),
        x1,
        2.0 * x1,
    )?));
    for i in 0..odd.len() - 1 {
        let (a, b) = (odd[i], odd[i + 1]);
        let d = b - a;
        let y = h - 0.5 * d;
        // west half descends toward the midpoint; its focus is the east node
        elements.push(Element::ParabolicArc(ParabolicArc::new(
            pt(b, y),
            pt(b, h),
            -d,
            -0.5 * d,
        )?));
        // east half rises back to the east node; focus at the west node
        elements.push(Element::ParabolicArc(ParabolicArc::new(
            pt(a, y),
            pt(a, h),
            0.5 * d,
            d,
        )?));
    }
    // closure chord to the rim (the true outer solution piece is beyond this
    // construction; a chord keeps the body valid and inscribed)
    let last = odd[odd.len() - 1];
    elements.push(Element::segment(pt(last, h), pt(1.0, 0.0)));
    let body = Body2D::new(h, GeneratorCurve::new(elements)?, true)?;
    Ok(ChainBody {
        body,
        odd_nodes: odd,
    })
}

/// Expected vertical exit velocity over a chain: `1 + v_z` at abscissa `x`.
pub fn chain_momentum_factor(chain: &ChainBody, x: f64) -> f64 {
    let h_nodes = &chain.odd_nodes;
    let x = x.abs();
    // locate the surrounding odd pair
    let mut a = 0.0;
    let mut b = h_nodes[0];
    for i in 0..h_nodes.len() - 1 {
        if x >= h_nodes[i] {
            a = h_nodes[i];
            b = h_nodes[i + 1];
        }
    }
    if x < h_nodes[0] {
        // center pair: on [0, x1] the focus is the west node -x1
        let d = 2.0 * h_nodes[0];
        let t = (x + h_nodes[0]) / d;
        return 2.0 / (1.0 + t * t);
    }
    let d = b - a;
    let mid = 0.5 * (a + b);
    let t = if x <= mid {
        (b - x) / d // west half: focus at the east node
    } else {
        (x - a) / d // east half: focus at the west node
    };
    2.0 / (1.0 + t * t)
}
