//! Resistance kernels and their convexification data.
//!
//! A kernel `p(u)` weights the momentum a surface element of slope `u`
//! transfers to the flow; the profile solver minimizes `∫ p(f'(x)) x dx`.
//! Everything the solver needs is derived from the greatest convex function
//! below `p`: the contact point `u0` where the envelope rejoins the kernel,
//! the scale `xi0 = -1/p̄'(0)`, the generalized inverse of `z = -1/p̄'(u)`
//! (the optimal slope field), and its primitive.

use crate::error::{Error, Result};
use crate::roots;
use serde::{Deserialize, Serialize};

/// Power-law tail `p(u) = c u^ular(-alpha) (1 + o(1))` as `u -> inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    pub c: f64,
    pub alpha: f64,
}

/// Kernel value at `u = 0` for the single-impact reduction.
pub fn single_impact_front_value() -> f64 {
    8.0 * ((8.0f64 / 5.0).ln() + 0.5f64.atan() - std::f64::consts::FRAC_PI_4)
}

/// Slope at which the single-impact envelope rejoins `2/(1+u^2)`.
///
/// Tangency from `(0, p(0))` to the curved branch reduces to a quadratic in
/// `u^2`.
pub fn single_impact_contact_slope() -> f64 {
    let p0 = single_impact_front_value();
    let disc = (2.0 * p0 - 6.0) * (2.0 * p0 - 6.0) - 4.0 * p0 * (p0 - 2.0);
    let t = ((6.0 - 2.0 * p0) + disc.sqrt()) / (2.0 * p0);
    t.sqrt()
}

/// Sampled kernel with a declared power-law tail.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CustomKernelFile", into = "CustomKernelFile")]
pub struct CustomKernel {
    us: Vec<f64>,
    ps: Vec<f64>,
    tail: TailParams,
}

/// On-disk form: `{"samples": [[u, p], ...], "tail_c": c, "tail_alpha": a}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CustomKernelFile {
    samples: Vec<[f64; 2]>,
    tail_c: f64,
    tail_alpha: f64,
}

impl TryFrom<CustomKernelFile> for CustomKernel {
    type Error = Error;
    fn try_from(f: CustomKernelFile) -> Result<Self> {
        let us: Vec<f64> = f.samples.iter().map(|s| s[0]).collect();
        let ps: Vec<f64> = f.samples.iter().map(|s| s[1]).collect();
        CustomKernel::new(
            us,
            ps,
            TailParams {
                c: f.tail_c,
                alpha: f.tail_alpha,
            },
        )
    }
}

impl From<CustomKernel> for CustomKernelFile {
    fn from(k: CustomKernel) -> Self {
        CustomKernelFile {
            samples: k
                .us
                .iter()
                .zip(k.ps.iter())
                .map(|(&u, &p)| [u, p])
                .collect(),
            tail_c: k.tail.c,
            tail_alpha: k.tail.alpha,
        }
    }
}

impl CustomKernel {
    /// Validates the table: `u` strictly increasing starting at 0, `p > 0`
    /// everywhere, positive tail parameters, and net decay across the table.
    pub fn new(us: Vec<f64>, ps: Vec<f64>, tail: TailParams) -> Result<Self> {
        if us.len() != ps.len() || us.len() < 2 {
            return Err(Error::InvalidKernel(
                "need at least two (u, p) samples".into(),
            ));
        }
        if us[0] != 0.0 {
            return Err(Error::InvalidKernel(
                "sample grid must start at u = 0".into(),
            ));
        }
        if !us.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidKernel(
                "u grid must be strictly increasing".into(),
            ));
        }
        if ps.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidKernel(
                "kernel values must be positive".into(),
            ));
        }
        if !(tail.c > 0.0) || !(tail.alpha > 0.0) {
            return Err(Error::InvalidKernel(
                "tail parameters must be positive".into(),
            ));
        }
        if ps[ps.len() - 1] > ps[0] {
            return Err(Error::InvalidKernel(
                "table does not decay: last value exceeds first".into(),
            ));
        }
        Ok(CustomKernel { us, ps, tail })
    }

    fn eval(&self, u: f64) -> f64 {
        let n = self.us.len();
        if u >= self.us[n - 1] {
            return self.tail.c * u.powf(-self.tail.alpha);
        }
        // Linear interpolation is monotone between samples.
        let j = match self.us.binary_search_by(|a| a.total_cmp(&u)) {
            Ok(j) => return self.ps[j],
            Err(j) => j,
        };
        let (u0, u1) = (self.us[j - 1], self.us[j]);
        let (p0, p1) = (self.ps[j - 1], self.ps[j]);
        p0 + (p1 - p0) * (u - u0) / (u1 - u0)
    }

    fn last_u(&self) -> f64 {
        self.us[self.us.len() - 1]
    }
}

/// A resistance kernel on `[0, inf)`.
#[derive(Debug, Clone)]
pub enum Kernel {
    /// `1 - u/sqrt(1+u^2)`: multiple elastic reflections, tangential exit law.
    Nonconvex,
    /// `2/(1+u^2)`: the classical single-reflection law on convex bodies.
    Newton,
    /// `2/(1+u^2)` for `u > 0` with an isolated smaller value at `u = 0`;
    /// valid reduction of the single-impact class above the threshold height.
    SingleImpact,
    Custom(CustomKernel),
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Nonconvex => "nonconvex",
            Kernel::Newton => "newton",
            Kernel::SingleImpact => "single_impact",
            Kernel::Custom(_) => "custom",
        }
    }

    /// Tail parameters of `p`.
    pub fn tail(&self) -> TailParams {
        match self {
            Kernel::Nonconvex => TailParams { c: 0.5, alpha: 2.0 },
            Kernel::Newton | Kernel::SingleImpact => TailParams { c: 2.0, alpha: 2.0 },
            Kernel::Custom(k) => k.tail,
        }
    }

    /// Kernel value `p(u)`; `u` must be nonnegative.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!(
                "kernel argument must be >= 0, got {u}"
            )));
        }
        Ok(self.eval_unchecked(u))
    }

    fn eval_unchecked(&self, u: f64) -> f64 {
        match self {
            Kernel::Nonconvex => 1.0 - u / (1.0 + u * u).sqrt(),
            Kernel::Newton => 2.0 / (1.0 + u * u),
            Kernel::SingleImpact => {
                if u == 0.0 {
                    single_impact_front_value()
                } else {
                    2.0 / (1.0 + u * u)
                }
            }
            Kernel::Custom(k) => k.eval(u),
        }
    }

    /// Load a custom kernel from its JSON document.
    pub fn from_json_str(s: &str) -> Result<Kernel> {
        let k: CustomKernel = serde_json::from_str(s)?;
        Ok(Kernel::Custom(k))
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Kernel> {
        Kernel::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Convex envelope with closed-form data for the built-in kernels.
    ///
    /// The sampled construction runs only for custom kernels (and in tests),
    /// so grid error never enters the solver path for built-ins.
    pub fn convexify(&self) -> Result<ConvexEnvelope> {
        match self {
            Kernel::Nonconvex => Ok(ConvexEnvelope {
                kernel: self.clone(),
                u0: 0.0,
                xi0: 1.0,
                repr: EnvelopeRepr::NonconvexClosed,
            }),
            Kernel::Newton => Ok(ConvexEnvelope {
                kernel: self.clone(),
                u0: 1.0,
                xi0: 1.0,
                repr: EnvelopeRepr::NewtonClosed,
            }),
            Kernel::SingleImpact => {
                let u0 = single_impact_contact_slope();
                let p0 = single_impact_front_value();
                let xi0 = u0 / (p0 - 2.0 / (1.0 + u0 * u0));
                Ok(ConvexEnvelope {
                    kernel: self.clone(),
                    u0,
                    xi0,
                    repr: EnvelopeRepr::SingleImpactClosed,
                })
            }
            Kernel::Custom(k) => {
                let u_max = k.last_u().max(64.0);
                self.convexify_numeric(u_max, 1 << 16)
            }
        }
    }

    /// Sampled convexification: lower hull of `(u_k, p(u_k))` on `[0, u_max]`
    /// joined to the analytic tail beyond. `u_max` must put the kernel in its
    /// convex tail; for custom kernels it must also cover the whole table.
    pub fn convexify_numeric(&self, u_max: f64, n: usize) -> Result<ConvexEnvelope> {
        if !(u_max > 0.0) || n < 8 {
            return Err(Error::Parameter(
                "convexification needs u_max > 0 and at least 8 samples".into(),
            ));
        }
        if let Kernel::Custom(k) = self {
            if u_max < k.last_u() {
                return Err(Error::Parameter(format!(
                    "u_max = {u_max} must cover the sample table (last u = {})",
                    k.last_u()
                )));
            }
        }
        let p_origin = self.eval_unchecked(0.0);
        let step = u_max / (n - 1) as f64;
        // Sampling runs to 2 u_max: the declared tail may sit a hair off the
        // table at the junction, and only the decay beyond closes the hull
        // without a spurious rising edge there.
        let n_ext = 2 * n - 1;
        // Lower convex hull by monotone chain over the sample points.
        let mut hu: Vec<f64> = Vec::with_capacity(64);
        let mut hp: Vec<f64> = Vec::with_capacity(64);
        for k in 0..n_ext {
            let u = if k + 1 == n {
                u_max
            } else {
                k as f64 * step
            };
            let p = self.eval_unchecked(u);
            while hu.len() >= 2 {
                let m = hu.len();
                let cross = (hu[m - 1] - hu[m - 2]) * (p - hp[m - 2])
                    - (u - hu[m - 2]) * (hp[m - 1] - hp[m - 2]);
                if cross <= 0.0 {
                    hu.pop();
                    hp.pop();
                } else {
                    break;
                }
            }
            hu.push(u);
            hp.push(p);
        }
        let slopes: Vec<f64> = hu
            .windows(2)
            .zip(hp.windows(2))
            .map(|(u, p)| (p[1] - p[0]) / (u[1] - u[0]))
            .collect();
        if slopes.is_empty() || slopes[0] >= 0.0 {
            return Err(Error::InvalidKernel(
                "envelope is not decreasing at the origin".into(),
            ));
        }
        // A valid envelope of a decaying kernel never turns back up; a rising
        // hull segment surviving the extended sampling means the declared
        // tail contradicts the table.
        if slopes.iter().any(|&s| s >= 0.0) {
            return Err(Error::InvalidKernel(
                "envelope rises within the sampled range; the tail parameters do not decay below the table".into(),
            ));
        }
        // First sampled point (u > 0) where the hull touches the kernel.
        let contact_tol = 1e-9 * p_origin;
        let mut hull = Hull {
            verts_u: hu,
            verts_p: hp,
            slopes,
            tail: self.tail(),
            inv: HullInverse::default(),
        };
        hull.inv = hull.inverse();
        let mut u0 = u_max;
        for k in 1..n {
            let u = if k + 1 == n { u_max } else { k as f64 * step };
            if self.eval_unchecked(u) - hull.value(u) < contact_tol {
                u0 = u;
                break;
            }
        }
        let xi0 = -1.0 / hull.slopes[0];
        Ok(ConvexEnvelope {
            kernel: self.clone(),
            u0,
            xi0,
            repr: EnvelopeRepr::Hull(hull),
        })
    }
}

/// Piecewise-linear lower hull plus the analytic tail.
#[derive(Debug, Clone)]
struct Hull {
    verts_u: Vec<f64>,
    verts_p: Vec<f64>,
    slopes: Vec<f64>,
    tail: TailParams,
    inv: HullInverse,
}

impl Hull {
    fn u_max(&self) -> f64 {
        *self.verts_u.last().unwrap()
    }

    fn value(&self, u: f64) -> f64 {
        if u >= self.u_max() {
            return self.tail.c * u.powf(-self.tail.alpha);
        }
        let j = self
            .verts_u
            .partition_point(|&v| v <= u)
            .clamp(1, self.verts_u.len() - 1);
        self.verts_p[j - 1] + self.slopes[j - 1] * (u - self.verts_u[j - 1])
    }

    fn tail_slope(&self, u: f64) -> f64 {
        -self.tail.c * self.tail.alpha * u.powf(-self.tail.alpha - 1.0)
    }

    fn deriv_left(&self, u: f64) -> f64 {
        if u > self.u_max() {
            return self.tail_slope(u);
        }
        let j = self
            .verts_u
            .partition_point(|&v| v < u)
            .clamp(1, self.verts_u.len() - 1);
        self.slopes[j - 1]
    }

    fn deriv_right(&self, u: f64) -> f64 {
        if u >= self.u_max() {
            return self.tail_slope(u);
        }
        // Segment k covers [verts_u[k], verts_u[k+1]); at a vertex the right
        // derivative is the outgoing slope.
        let j = self.verts_u.partition_point(|&v| v <= u).max(1);
        self.slopes[(j - 1).min(self.slopes.len() - 1)]
    }

    /// Staircase of the generalized inverse, precomputed once.
    fn inverse(&self) -> HullInverse {
        let seg_z: Vec<f64> = self.slopes.iter().map(|&s| -1.0 / s).collect();
        // prefix[j] = integral of the staircase from seg_z[0] to seg_z[j].
        let mut prefix = vec![0.0];
        let mut acc = 0.0;
        for j in 1..seg_z.len() {
            acc += self.verts_u[j] * (seg_z[j] - seg_z[j - 1]);
            prefix.push(acc);
        }
        let tail_z = -1.0 / self.tail_slope(self.u_max());
        let total_to_tail = acc + self.u_max() * (tail_z - *seg_z.last().unwrap());
        HullInverse {
            seg_z,
            prefix,
            tail_z,
            total_to_tail,
        }
    }
}

/// Staircase data for the generalized inverse over a hull.
#[derive(Debug, Clone, Default)]
struct HullInverse {
    /// `-1/slope` per hull segment, increasing.
    seg_z: Vec<f64>,
    /// Prefix integrals of the staircase at each `seg_z`.
    prefix: Vec<f64>,
    /// Where the analytic tail takes over: `-1/p'(u_max)`.
    tail_z: f64,
    /// Integral accumulated up to `tail_z`.
    total_to_tail: f64,
}

#[derive(Debug, Clone)]
enum EnvelopeRepr {
    NonconvexClosed,
    NewtonClosed,
    SingleImpactClosed,
    Hull(Hull),
}

/// The greatest convex function below a kernel, with the derived solver data.
#[derive(Debug, Clone)]
pub struct ConvexEnvelope {
    kernel: Kernel,
    u0: f64,
    xi0: f64,
    repr: EnvelopeRepr,
}

impl ConvexEnvelope {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn tail(&self) -> TailParams {
        self.kernel.tail()
    }

    /// Slope at which the envelope first rejoins the kernel (`u > 0`).
    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// `-1/p̄'(0)`: lower end of the generalized inverse's domain, and the
    /// multiplier value reached as the body height goes to zero.
    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    /// Envelope value `p̄(u)`.
    pub fn value(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!(
                "envelope argument must be >= 0, got {u}"
            )));
        }
        Ok(match &self.repr {
            EnvelopeRepr::NonconvexClosed => 1.0 - u / (1.0 + u * u).sqrt(),
            EnvelopeRepr::NewtonClosed => {
                if u <= 1.0 {
                    2.0 - u
                } else {
                    2.0 / (1.0 + u * u)
                }
            }
            EnvelopeRepr::SingleImpactClosed => {
                if u <= self.u0 {
                    single_impact_front_value() - u / self.xi0
                } else {
                    2.0 / (1.0 + u * u)
                }
            }
            // Between grid points the hull chord can sit above a strictly
            // convex kernel by O(step^2); in the contact region the envelope
            // equals the kernel, so the kernel caps the interpolation.
            EnvelopeRepr::Hull(h) => h.value(u).min(self.kernel.eval_unchecked(u)),
        })
    }

    /// Left derivative of the envelope (at 0 this equals the right one).
    pub fn deriv_left(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return self.deriv_right(0.0);
        }
        if !(u > 0.0) {
            return Err(Error::Domain(format!(
                "derivative argument must be >= 0, got {u}"
            )));
        }
        Ok(match &self.repr {
            EnvelopeRepr::NonconvexClosed => -(1.0 + u * u).powf(-1.5),
            EnvelopeRepr::NewtonClosed => {
                if u <= 1.0 {
                    -1.0
                } else {
                    -4.0 * u / ((1.0 + u * u) * (1.0 + u * u))
                }
            }
            EnvelopeRepr::SingleImpactClosed => {
                if u <= self.u0 {
                    -1.0 / self.xi0
                } else {
                    -4.0 * u / ((1.0 + u * u) * (1.0 + u * u))
                }
            }
            EnvelopeRepr::Hull(h) => h.deriv_left(u),
        })
    }

    /// Right derivative of the envelope.
    pub fn deriv_right(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!(
                "derivative argument must be >= 0, got {u}"
            )));
        }
        Ok(match &self.repr {
            EnvelopeRepr::NonconvexClosed => -(1.0 + u * u).powf(-1.5),
            EnvelopeRepr::NewtonClosed => {
                if u < 1.0 {
                    -1.0
                } else {
                    -4.0 * u / ((1.0 + u * u) * (1.0 + u * u))
                }
            }
            EnvelopeRepr::SingleImpactClosed => {
                if u < self.u0 {
                    -1.0 / self.xi0
                } else {
                    -4.0 * u / ((1.0 + u * u) * (1.0 + u * u))
                }
            }
            EnvelopeRepr::Hull(h) => h.deriv_right(u),
        })
    }

    /// Generalized inverse of `z = -1/p̄'(u)`: the optimal slope for the
    /// scaled abscissa `z`. Monotone non-decreasing; jumps take the upper
    /// value.
    pub fn optimal_slope(&self, z: f64) -> Result<f64> {
        if !(z >= self.xi0 - 1e-12) {
            return Err(Error::Domain(format!(
                "scaled abscissa {z} below the envelope's minimum {}",
                self.xi0
            )));
        }
        let z = z.max(self.xi0);
        Ok(match &self.repr {
            EnvelopeRepr::NonconvexClosed => (z.powf(2.0 / 3.0) - 1.0).max(0.0).sqrt(),
            EnvelopeRepr::NewtonClosed => newton_branch_inverse(z, 1.0),
            EnvelopeRepr::SingleImpactClosed => newton_branch_inverse(z, self.u0),
            EnvelopeRepr::Hull(h) => {
                if z >= h.inv.tail_z {
                    (h.tail.c * h.tail.alpha * z).powf(1.0 / (h.tail.alpha + 1.0))
                } else {
                    h.verts_u[h.inv.seg_z.partition_point(|&v| v <= z)]
                }
            }
        })
    }

    /// Primitive of the optimal slope, vanishing at `xi0`.
    pub fn optimal_slope_integral(&self, z: f64) -> Result<f64> {
        if !(z >= self.xi0 - 1e-12) {
            return Err(Error::Domain(format!(
                "scaled abscissa {z} below the envelope's minimum {}",
                self.xi0
            )));
        }
        let z = z.max(self.xi0);
        Ok(match &self.repr {
            EnvelopeRepr::NonconvexClosed => {
                let a = z.powf(1.0 / 3.0);
                let a2 = a * a;
                let r = (a2 - 1.0).max(0.0).sqrt();
                0.375 * ((2.0 * a2 - 1.0) * a * r - (a + r).ln())
            }
            EnvelopeRepr::NewtonClosed => {
                let u = newton_branch_inverse(z, 1.0);
                0.25 * (0.75 * u.powi(4) + u * u - u.ln() - 1.75)
            }
            EnvelopeRepr::SingleImpactClosed => {
                let u = newton_branch_inverse(z, self.u0);
                let g = |v: f64| 0.75 * v.powi(4) + v * v - v.ln();
                0.25 * (g(u) - g(self.u0))
            }
            EnvelopeRepr::Hull(h) => {
                if z >= h.inv.tail_z {
                    let t = h.tail;
                    let q = (t.alpha + 2.0) / (t.alpha + 1.0);
                    let scale = (t.c * t.alpha).powf(1.0 / (t.alpha + 1.0)) / q;
                    h.inv.total_to_tail + scale * (z.powf(q) - h.inv.tail_z.powf(q))
                } else {
                    // j <= seg_z.len() = verts_u.len() - 1, so both reads are
                    // in bounds; z >= xi0 = seg_z[0] keeps j >= 1.
                    let j = h.inv.seg_z.partition_point(|&v| v <= z).max(1);
                    h.inv.prefix[j - 1] + h.verts_u[j] * (z - h.inv.seg_z[j - 1])
                }
            }
        })
    }
}

/// Inverse of the increasing map `u -> (1+u^2)^2/(4u)` on `u >= u_lo`.
fn newton_branch_inverse(z: f64, u_lo: f64) -> f64 {
    let f = |u: f64| (1.0 + u * u).powi(2) / (4.0 * u) - z;
    if f(u_lo) >= 0.0 {
        return u_lo;
    }
    let mut hi = u_lo.max(1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    roots::bisect(&f, u_lo, hi, 1e-15)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn builtin_values() {
        close(Kernel::Nonconvex.eval(0.0).unwrap(), 1.0, 0.0);
        close(Kernel::Newton.eval(1.0).unwrap(), 1.0, 0.0);
        // 8(ln(8/5) + arctan(1/2) - pi/4)
        close(Kernel::SingleImpact.eval(0.0).unwrap(), 1.1862, 1e-3);
        close(
            Kernel::SingleImpact.eval(0.0).unwrap(),
            single_impact_front_value(),
            0.0,
        );
        // The value jumps up to 2 immediately to the right of 0.
        assert!(Kernel::SingleImpact.eval(1e-12).unwrap() > 1.99);
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(Kernel::Newton.eval(-1e-9).is_err());
        let e = Kernel::Nonconvex.convexify().unwrap();
        assert!(e.optimal_slope(0.5).is_err());
        assert!(e.optimal_slope_integral(0.99).is_err());
    }

    #[test]
    fn closed_form_contact_data() {
        let nc = Kernel::Nonconvex.convexify().unwrap();
        close(nc.u0(), 0.0, 0.0);
        close(nc.xi0(), 1.0, 0.0);

        let nw = Kernel::Newton.convexify().unwrap();
        close(nw.u0(), 1.0, 0.0);
        close(nw.xi0(), 1.0, 0.0);
        close(nw.value(0.5).unwrap(), 1.5, 1e-15);

        let si = Kernel::SingleImpact.convexify().unwrap();
        close(si.u0(), 1.808, 1e-3);
        close(si.xi0(), 2.52, 1e-2);
        // Tangency: the affine slope equals the curved branch's derivative.
        close(-1.0 / si.xi0(), si.deriv_right(si.u0()).unwrap(), 1e-12);
    }

    #[test]
    fn optimal_slope_examples() {
        let nc = Kernel::Nonconvex.convexify().unwrap();
        close(nc.optimal_slope(1.0).unwrap(), 0.0, 0.0);
        close(nc.optimal_slope(8.0).unwrap(), 3f64.sqrt(), 1e-12);
        let nw = Kernel::Newton.convexify().unwrap();
        close(nw.optimal_slope(1.0).unwrap(), 1.0, 0.0);
    }

    #[test]
    fn slope_integral_examples() {
        let nc = Kernel::Nonconvex.convexify().unwrap();
        close(nc.optimal_slope_integral(1.0).unwrap(), 0.0, 0.0);
        let nw = Kernel::Newton.convexify().unwrap();
        close(nw.optimal_slope_integral(1.0).unwrap(), 0.0, 1e-15);

        // Independent oracle: adaptive quadrature of the closed-form inverse
        // over [1, 8] against the closed-form primitive.
        let f = |z: f64| (z.powf(2.0 / 3.0) - 1.0).max(0.0).sqrt();
        let oracle = quad::integrate(
            &f,
            1.0,
            8.0,
            &quad::QuadratureSpec {
                base_panels: 64,
                panel_tol: 1e-13,
                max_panels: 1 << 16,
            },
        );
        close(nc.optimal_slope_integral(8.0).unwrap(), oracle.value, 1e-10);
    }

    #[test]
    fn numeric_envelope_matches_newton_closed_form() {
        let env = Kernel::Newton.convexify_numeric(64.0, 1 << 16).unwrap();
        let closed = Kernel::Newton.convexify().unwrap();
        let mut sup: f64 = 0.0;
        for k in 0..=1000 {
            let u = 10.0 * k as f64 / 1000.0;
            sup = sup.max((env.value(u).unwrap() - closed.value(u).unwrap()).abs());
        }
        assert!(sup < 1e-6, "sup-norm gap {sup}");
        close(env.u0(), 1.0, 2e-3);
        close(env.xi0(), 1.0, 1e-6);
    }

    #[test]
    fn numeric_envelope_dominance_and_contact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for kernel in [Kernel::Nonconvex, Kernel::Newton, Kernel::SingleImpact] {
            let env = kernel.convexify_numeric(64.0, 1 << 16).unwrap();
            for _ in 0..10_000 {
                let u: f64 = rng.gen_range(0.0..64.0);
                let p = kernel.eval(u).unwrap();
                let pb = env.value(u).unwrap();
                assert!(pb <= p + 1e-12, "{} not a minorant at {u}", kernel.name());
            }
            // Contact beyond u0 at sample points.
            for k in 0..2000 {
                let u = env.u0() + 1e-6 + k as f64 * (64.0 - env.u0()) / 2000.0;
                // snap to the sampling grid so hull vertices are exact
                let step = 64.0 / ((1 << 16) - 1) as f64;
                let u = (u / step).round() * step;
                if u <= env.u0() + 1e-6 || u >= 64.0 {
                    continue;
                }
                let gap = (kernel.eval(u).unwrap() - env.value(u).unwrap()).abs();
                assert!(gap < 1e-9, "{} contact gap {gap} at {u}", kernel.name());
            }
        }
    }

    #[test]
    fn hull_is_convex_at_breakpoints() {
        let env = Kernel::SingleImpact
            .convexify_numeric(64.0, 1 << 16)
            .unwrap();
        let EnvelopeRepr::Hull(h) = &env.repr else {
            panic!()
        };
        for w in h.slopes.windows(2) {
            assert!(w[1] >= w[0] - 1e-14, "slopes must be non-decreasing");
        }
        // Midpoint convexity across breakpoint triples.
        for k in 1..h.verts_u.len() - 1 {
            let (ua, ub, uc) = (h.verts_u[k - 1], h.verts_u[k], h.verts_u[k + 1]);
            let (pa, pb, pc) = (h.verts_p[k - 1], h.verts_p[k], h.verts_p[k + 1]);
            let t = (ub - ua) / (uc - ua);
            assert!(pb <= (1.0 - t) * pa + t * pc + 1e-12);
        }
    }

    #[test]
    fn generalized_inverse_consistency() {
        for kernel in [Kernel::Nonconvex, Kernel::Newton, Kernel::SingleImpact] {
            let env = kernel.convexify().unwrap();
            for k in 0..200 {
                let z = env.xi0() + 1e-6 + k as f64 * 0.25;
                let u = env.optimal_slope(z).unwrap();
                let left = -1.0 / env.deriv_left(u).unwrap();
                let right = -1.0 / env.deriv_right(u).unwrap();
                assert!(
                    left <= z + 1e-8 && z <= right + 1e-8,
                    "{}: z={z} not in [{left}, {right}]",
                    kernel.name()
                );
            }
        }
    }

    #[test]
    fn primitive_derivative_matches_inverse() {
        for kernel in [Kernel::Nonconvex, Kernel::Newton, Kernel::SingleImpact] {
            let env = kernel.convexify().unwrap();
            for k in 1..100 {
                let z = env.xi0() + 0.3 + 0.5 * k as f64;
                let dz = 1e-6 * z;
                let d = (env.optimal_slope_integral(z + dz).unwrap()
                    - env.optimal_slope_integral(z - dz).unwrap())
                    / (2.0 * dz);
                let v = env.optimal_slope(z).unwrap();
                assert!(
                    (d - v).abs() / v.max(1.0) < 1e-5,
                    "{}: d={d} v={v} at z={z}",
                    kernel.name()
                );
            }
        }
    }

    #[test]
    fn custom_kernel_round_trip_and_validation() {
        let json = r#"{"samples": [[0.0, 1.0], [1.0, 0.5], [2.0, 0.125]], "tail_c": 0.5, "tail_alpha": 2.0}"#;
        let k = Kernel::from_json_str(json).unwrap();
        close(k.eval(0.5).unwrap(), 0.75, 1e-15);
        close(k.eval(4.0).unwrap(), 0.5 / 16.0, 1e-15);

        // Non-decaying table is rejected.
        let bad = r#"{"samples": [[0.0, 1.0], [1.0, 2.0]], "tail_c": 1.0, "tail_alpha": 2.0}"#;
        assert!(Kernel::from_json_str(bad).is_err());
        // Grid must start at zero and increase.
        let bad = r#"{"samples": [[0.5, 1.0], [1.0, 0.5]], "tail_c": 1.0, "tail_alpha": 2.0}"#;
        assert!(Kernel::from_json_str(bad).is_err());
    }

    #[test]
    fn dipping_table_keeps_a_non_increasing_envelope() {
        // Net-decaying table that dips and rises: the decaying tail beyond
        // still yields a valid, non-increasing envelope.
        let us = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ps = vec![1.0, 0.05, 0.02, 0.2, 0.5];
        let k = Kernel::Custom(
            CustomKernel::new(us, ps, TailParams { c: 2.0, alpha: 2.0 }).unwrap(),
        );
        // u_max must reach the region where the tail decays below the dip.
        assert!(k.convexify_numeric(4.0, 1 << 10).is_err());
        let env = k.convexify_numeric(16.0, 1 << 12).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let v = env.value(24.0 * i as f64 / 200.0).unwrap();
            assert!(v <= prev + 1e-12, "envelope rose to {v}");
            prev = v;
        }
        // An absurd tail that jumps far above the table is rejected.
        let us = vec![0.0, 1.0, 4.0];
        let ps = vec![1.0, 0.8, 0.5];
        let k = Kernel::Custom(
            CustomKernel::new(us, ps, TailParams { c: 1000.0, alpha: 0.1 }).unwrap(),
        );
        assert!(k.convexify_numeric(4.0, 1 << 10).is_err());
    }

    #[test]
    fn custom_kernel_envelope_runs_end_to_end() {
        // A coarse sampling of the Newton law should reproduce its data.
        let us: Vec<f64> = (0..=64).map(|k| k as f64 * 0.25).collect();
        let ps: Vec<f64> = us.iter().map(|&u| 2.0 / (1.0 + u * u)).collect();
        let k =
            Kernel::Custom(CustomKernel::new(us, ps, TailParams { c: 2.0, alpha: 2.0 }).unwrap());
        let env = k.convexify().unwrap();
        close(env.xi0(), 1.0, 5e-2);
        let z = 3.0;
        let v = env.optimal_slope(z).unwrap();
        let exact = newton_branch_inverse(z, 1.0);
        close(v, exact, 0.3);
        assert!(env.optimal_slope_integral(3.0).unwrap() > 0.0);
    }
}
