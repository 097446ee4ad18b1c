//! Two-input Mamdani inference with seven triangular labels per variable.
//!
//! Inputs and output share the universe `[-1, 1]`. Inputs are clamped into the
//! universe before fuzzification. Rules fire with `min`, outputs are clipped
//! with `min` implication, aggregated with `max` and defuzzified by a centroid
//! over a uniform grid, with the two end points at half weight.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

/// Number of linguistic labels per variable.
pub const LABELS: usize = 7;

/// Default number of centroid quadrature points.
pub const DEFAULT_RESOLUTION: usize = 1001;

/// Smallest accepted centroid resolution.
pub const MIN_RESOLUTION: usize = 201;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    NL,
    NM,
    NS,
    ZR,
    PS,
    PM,
    PL,
}

impl Label {
    pub const ALL: [Label; LABELS] = [Label::NL, Label::NM, Label::NS, Label::ZR, Label::PS, Label::PM, Label::PL];

    /// Signed index in `-3..=3`.
    pub fn index(self) -> i32 {
        self as i32 - 3
    }

    pub fn from_index(i: i32) -> Option<Label> {
        Self::ALL.get(usize::try_from(i + 3).ok()?).copied()
    }
}

/// Seven evenly spaced triangles on `[-1, 1]` with 50% overlap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MembershipSet {
    pub centers: [f64; LABELS],
    pub half_width: f64,
}

impl Default for MembershipSet {
    fn default() -> Self {
        Self {
            centers: [-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            half_width: 1.0 / 3.0,
        }
    }
}

impl MembershipSet {
    #[inline]
    fn grade(&self, label: usize, x: f64) -> f64 {
        (1.0 - (x - self.centers[label]).abs() / self.half_width).max(0.0)
    }

    /// Membership degrees of `x` (clamped into the universe) for every label.
    pub fn degrees(&self, x: f64) -> [f64; LABELS] {
        let x = clamp_unit(x);
        let mut out = [0.0; LABELS];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.grade(i, x);
        }
        out
    }

    /// The at most two labels with nonzero degree, as `(first_label, [deg_first, deg_next])`.
    #[inline]
    fn active(&self, x: f64) -> (usize, [f64; 2]) {
        let x = clamp_unit(x);
        // lower neighbour index among the evenly spaced centers
        let pos = (x - self.centers[0]) / self.half_width;
        let lo = (pos.floor() as isize).clamp(0, LABELS as isize - 2) as usize;
        (lo, [self.grade(lo, x), self.grade(lo + 1, x)])
    }
}

#[inline(always)]
fn fmin(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}

#[inline(always)]
fn fmax(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

#[inline]
fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-1.0, 1.0)
    }
}

/// 7x7 rule table mapping (error label, rate label) to an output label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleBase {
    pub table: [[Label; LABELS]; LABELS],
}

impl Default for RuleBase {
    fn default() -> Self {
        let mut table = [[Label::ZR; LABELS]; LABELS];
        for (i, row) in table.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let sum = (i as i32 - 3) + (j as i32 - 3);
                *cell = Label::from_index(sum.clamp(-3, 3)).expect("clamped index");
            }
        }
        Self { table }
    }
}

impl RuleBase {
    /// Output label for error label `e` and rate label `de`.
    pub fn consequent(&self, e: Label, de: Label) -> Label {
        self.table[e as usize][de as usize]
    }
}

/// Mamdani engine shared by every controller structure.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyEngine {
    pub input_set: MembershipSet,
    pub output_set: MembershipSet,
    pub rules: RuleBase,
    resolution: usize,
}

impl Default for FuzzyEngine {
    fn default() -> Self {
        Self::with_resolution(DEFAULT_RESOLUTION).expect("default resolution is valid")
    }
}

impl FuzzyEngine {
    pub fn with_resolution(resolution: usize) -> Option<Self> {
        if resolution < MIN_RESOLUTION {
            return None;
        }
        Some(Self {
            input_set: MembershipSet::default(),
            output_set: MembershipSet::default(),
            rules: RuleBase::default(),
            resolution,
        })
    }

    /// Process-wide engine with default settings.
    pub fn shared() -> Arc<FuzzyEngine> {
        static ENGINE: OnceLock<Arc<FuzzyEngine>> = OnceLock::new();
        ENGINE.get_or_init(|| Arc::new(FuzzyEngine::default())).clone()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Firing strength of each output label after max aggregation of the rules.
    pub fn output_strengths(&self, e: f64, de: f64) -> [f64; LABELS] {
        let (ei, ed) = self.input_set.active(e);
        let (di, dd) = self.input_set.active(de);
        let mut strength = [0.0f64; LABELS];
        for (a, &mu_e) in ed.iter().enumerate() {
            if mu_e <= 0.0 {
                continue;
            }
            for (b, &mu_d) in dd.iter().enumerate() {
                if mu_d <= 0.0 {
                    continue;
                }
                let out = self.rules.table[ei + a][di + b] as usize;
                let w = mu_e.min(mu_d);
                if w > strength[out] {
                    strength[out] = w;
                }
            }
        }
        strength
    }

    /// Aggregated (clipped, max-combined) output membership at every point
    /// of the centroid grid, evaluated directly from the label triangles.
    pub fn aggregate(&self, e: f64, de: f64) -> Vec<f64> {
        let s = self.output_strengths(e, de);
        let set = &self.output_set;
        grid_axis(self.resolution)
            .iter()
            .map(|&x| (0..LABELS).map(|o| s[o].min(set.grade(o, x))).fold(0.0, f64::max))
            .collect()
    }

    /// Normalized controller output for normalized inputs.
    ///
    /// Exactly odd: `infer(-e, -de) == -infer(e, de)`. Only one half-plane is
    /// evaluated directly; the other is obtained by negation.
    pub fn infer(&self, e: f64, de: f64) -> f64 {
        let (e, de) = (clamp_unit(e), clamp_unit(de));
        let sum = e + de;
        if sum > 0.0 || (sum == 0.0 && e > 0.0) {
            self.centroid(e, de)
        } else if e == 0.0 && de == 0.0 {
            0.0
        } else {
            -self.centroid(-e, -de)
        }
    }

    /// Centroid over the uniform grid `x_k = -1 + k h`, end points at half
    /// weight.
    ///
    /// Between adjacent label centers the aggregate is
    /// `max(min(s_a, 1 - q), min(s_b, q))` in the local coordinate `q`, which
    /// is linear between the breakpoints `{0, 1, s_a, 1 - s_a, s_b, 1 - s_b, 1/2}`.
    /// The grid sums over each linear piece are taken in closed form.
    fn centroid(&self, e: f64, de: f64) -> f64 {
        let s = self.output_strengths(e, de);
        let (lo, hi) = match (s.iter().position(|&v| v > 0.0), s.iter().rposition(|&v| v > 0.0)) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return 0.0,
        };
        let n = self.resolution;
        let h = 2.0 / (n - 1) as f64;
        // grid step in units of the label spacing
        let g = h / self.output_set.half_width;
        let top = (LABELS - 1) as f64;

        let mut sum_m = 0.0;
        let mut sum_xm = 0.0;
        for seg in lo.saturating_sub(1)..hi.min(LABELS - 2) + 1 {
            let (sa, sb) = (s[seg], s[seg + 1]);
            if sa <= 0.0 && sb <= 0.0 {
                continue;
            }
            let mu = |q: f64| fmax(fmin(sa, 1.0 - q), fmin(sb, q));
            let mut bp = [0.0, 1.0, sa, 1.0 - sa, sb, 1.0 - sb, 0.5];
            bp.sort_by(f64::total_cmp);
            let offset = seg as f64;
            for w in bp.windows(2) {
                let (b0, b1) = (w[0], w[1]);
                if b1 <= b0 {
                    continue;
                }
                let (m0, m1) = (mu(b0), mu(b1));
                if m0 <= 0.0 && m1 <= 0.0 {
                    continue;
                }
                let (p0, p1) = (offset + b0, offset + b1);
                let k0 = (p0 / g).ceil() as usize;
                let k1 = if p1 >= top { n } else { ((p1 / g).ceil() as usize).min(n) };
                if k1 <= k0 {
                    continue;
                }
                // mu_k = a + b k on this piece
                let slope = (m1 - m0) / (b1 - b0);
                let a = m0 - slope * p0;
                let b = slope * g;
                let (count, s1, s2) = index_sums(k0, k1);
                let m_sum = a * count + b * s1;
                sum_m += m_sum;
                sum_xm += h * (a * s1 + b * s2) - m_sum;
            }
        }
        // At x = -1 and x = 1 only the extreme labels are nonzero.
        let (m_lo, m_hi) = (s[0], s[LABELS - 1]);
        sum_m -= 0.5 * (m_lo + m_hi);
        sum_xm -= 0.5 * (m_hi - m_lo);
        if sum_m > 0.0 {
            sum_xm / sum_m
        } else {
            0.0
        }
    }

    /// `grid_n x grid_n` samples of [`infer`](Self::infer) over `[-1, 1]^2`,
    /// row-major with the error varying slowest.
    pub fn control_surface(&self, grid_n: usize) -> Vec<Vec<f64>> {
        let axis = grid_axis(grid_n);
        axis.iter().map(|&e| axis.iter().map(|&de| self.infer(e, de)).collect()).collect()
    }
}

/// `(count, sum k, sum k^2)` for `k` in `k0..k1`.
#[inline]
fn index_sums(k0: usize, k1: usize) -> (f64, f64, f64) {
    let upto = |m: usize| -> (f64, f64) {
        let m = m as f64;
        (m * (m - 1.0) / 2.0, (m - 1.0) * m * (2.0 * m - 1.0) / 6.0)
    };
    let (a1, a2) = upto(k0);
    let (b1, b2) = upto(k1);
    ((k1 - k0) as f64, b1 - a1, b2 - a2)
}

/// Uniform points on `[-1, 1]`, mirrored exactly about zero.
pub fn grid_axis(n: usize) -> Vec<f64> {
    let n = n.max(2);
    let last = (n - 1) as f64;
    (0..n)
        .map(|k| {
            let two_k = 2 * k;
            if two_k < n {
                -(((n - 1 - two_k) as f64) / last)
            } else {
                ((two_k - (n - 1)) as f64) / last
            }
        })
        .collect()
}
