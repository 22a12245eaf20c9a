//! The predictor: sonic cones at quadrature points and the approximate
//! evolution operators for piecewise constant and piecewise bilinear data.
//!
//! All geometry is done in a frame centered at the quadrature point and
//! scaled by the cell width, so the work for a point depends only on the
//! data around it and not on where the point sits in the domain.
//!
//! The angular integrals are evaluated exactly. The cone footprint circle is
//! cut at every grid line it crosses and at the quadrant angles
//! `{0, π/2, π, 3π/2}`; on each arc the data is a bilinear function of
//! `(cos θ, sin θ)` and the `sgn` weights are constant, so every integrand is
//! a combination of `cos^p θ sin^q θ` with `p + q <= 4`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use smallvec::SmallVec;

use crate::mesh::{CartesianGrid, CellArray, CellIndex, PointKind, QuadPoint};
use crate::reconstruction::{stencil_cell, Bilinear, CellRecon};
use crate::state::{mean4, Bathymetry, PrimitiveState, PrimitiveValue};

/// Which evolution operator the predictor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OperatorOrder {
    /// Piecewise-constant operator on the cell averages.
    First,
    /// Bilinear operator on the recovery plus the constant operator on the
    /// conservative defect.
    #[default]
    Second,
}

/// Cell value entering a quadrature point's stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilCell {
    pub cell: CellIndex,
    pub h: f64,
    pub surface: f64,
    pub b: f64,
    pub v1: f64,
    pub v2: f64,
}

impl StencilCell {
    pub fn is_wet(&self) -> bool {
        self.h > 0.0
    }

    fn primitive(&self) -> PrimitiveValue {
        PrimitiveValue { h: self.h, v1: self.v1, v2: self.v2 }
    }
}

/// Stencil after the dry-bed modification.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedStencil {
    pub cells: SmallVec<[StencilCell; 4]>,
    /// Cells replaced by `(H, b, v) = (H_max, H_max, 0)`.
    pub replaced: SmallVec<[bool; 4]>,
    /// Highest free surface among wet cells.
    pub max_surface: f64,
}

impl ModifiedStencil {
    pub fn replaced_cell(&self, c: CellIndex) -> bool {
        self.cells.iter().zip(&self.replaced).any(|(s, r)| *r && s.cell == c)
    }
}

/// Replaces dry cells lying above the highest wet free surface by a still
/// surface at that level. Returns `None` when no cell is wet.
pub fn dry_stencil_modify(cells: &[StencilCell]) -> Option<ModifiedStencil> {
    let max_surface = cells.iter().filter(|c| c.is_wet()).map(|c| c.surface).reduce(f64::max)?;
    let mut out = ModifiedStencil { cells: SmallVec::new(), replaced: SmallVec::new(), max_surface };
    for c in cells {
        if !c.is_wet() && c.b > max_surface {
            out.cells.push(StencilCell { cell: c.cell, h: 0.0, surface: max_surface, b: max_surface, v1: 0.0, v2: 0.0 });
            out.replaced.push(true);
        } else {
            out.cells.push(*c);
            out.replaced.push(false);
        }
    }
    Some(out)
}

/// Arithmetic mean of `(h, v1, v2)` over the (modified) stencil.
pub fn average_state(cells: &[StencilCell]) -> PrimitiveValue {
    match cells {
        [] => PrimitiveValue::DRY,
        [a, b, c, d] => PrimitiveValue {
            h: mean4(a.h, b.h, c.h, d.h),
            v1: mean4(a.v1, b.v1, c.v1, d.v1),
            v2: mean4(a.v2, b.v2, c.v2, d.v2),
        },
        [a, b] => PrimitiveValue { h: 0.5 * (a.h + b.h), v1: 0.5 * (a.v1 + b.v1), v2: 0.5 * (a.v2 + b.v2) },
        _ => {
            let n = cells.len() as f64;
            PrimitiveValue {
                h: cells.iter().map(|c| c.h).sum::<f64>() / n,
                v1: cells.iter().map(|c| c.v1).sum::<f64>() / n,
                v2: cells.iter().map(|c| c.v2).sum::<f64>() / n,
            }
        }
    }
}

/// Circle in the plane; `center` may be relative to any fixed origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Smallest circle containing both inputs.
pub fn merge_circles(a: Circle, b: Circle) -> Circle {
    let dv = [b.center[0] - a.center[0], b.center[1] - a.center[1]];
    let d = dv[0].hypot(dv[1]);
    if d + b.radius <= a.radius {
        return a;
    }
    if d + a.radius <= b.radius {
        return b;
    }
    // d > 0 here: with d = 0 one of the containment tests above holds.
    let r = 0.5 * (a.radius + b.radius + d);
    let s = (r - a.radius) / d;
    Circle { center: [a.center[0] + s * dv[0], a.center[1] + s * dv[1]], radius: r }
}

/// Linearized sonic cone with apex at a quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SonicCone {
    /// Quadrature point `x_k`.
    pub apex: [f64; 2],
    /// Evolution horizon (s).
    pub tau: f64,
    /// Linearization state.
    pub mean: PrimitiveValue,
    pub c_bar: f64,
    /// Footprint center `Q0` relative to the apex (m): `-tau * v_bar`, the
    /// foot of the backward particle path.
    pub offset: [f64; 2],
    /// Footprint radius (m).
    pub radius: f64,
}

impl SonicCone {
    /// Absolute footprint center `Q0`.
    pub fn center(&self) -> [f64; 2] {
        [self.apex[0] + self.offset[0], self.apex[1] + self.offset[1]]
    }

    /// Point `Q(θ)` on the footprint.
    pub fn point(&self, theta: f64) -> [f64; 2] {
        let c = self.center();
        [c[0] + self.radius * theta.cos(), c[1] + self.radius * theta.sin()]
    }
}

pub fn build_cone(apex: [f64; 2], mean: PrimitiveValue, tau: f64, g: f64) -> SonicCone {
    let c_bar = mean.sound_speed(g);
    SonicCone { apex, tau, mean, c_bar, offset: [-tau * mean.v1, -tau * mean.v2], radius: tau * c_bar }
}

/// True when the stencil holds both a supersonic and a subsonic wet cell.
pub fn transonic_detect(cells: &[StencilCell], g: f64) -> bool {
    let (mut sub, mut sup) = (false, false);
    for c in cells.iter().filter(|c| c.is_wet()) {
        let p = c.primitive();
        let (v, s) = (p.speed(), p.sound_speed(g));
        sup |= v > s;
        sub |= v < s;
    }
    sub && sup
}

/// Cone whose footprint contains the footprints of all per-cell cones.
///
/// Four-cell stencils (ordered SW, SE, NW, NE) merge the two diagonals first
/// and then the two results. The linearization stays the stencil mean.
pub fn entropy_fix_cone(apex: [f64; 2], cells: &[StencilCell], mean: PrimitiveValue, tau: f64, g: f64) -> SonicCone {
    let circle = |c: &StencilCell| {
        let cone = build_cone(apex, c.primitive(), tau, g);
        Circle { center: cone.offset, radius: cone.radius }
    };
    let merged = match cells {
        [sw, se, nw, ne] => {
            merge_circles(merge_circles(circle(sw), circle(ne)), merge_circles(circle(se), circle(nw)))
        }
        [a, b] => merge_circles(circle(a), circle(b)),
        [a] => circle(a),
        _ => cells.iter().map(circle).reduce(merge_circles).unwrap_or(Circle { center: [0.0; 2], radius: 0.0 }),
    };
    let base = build_cone(apex, mean, tau, g);
    SonicCone { offset: merged.center, radius: merged.radius, ..base }
}

/// Angle together with its exact cosine and sine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub theta: f64,
    pub cos: f64,
    pub sin: f64,
}

impl Angle {
    const fn exact(theta: f64, cos: f64, sin: f64) -> Self {
        Self { theta, cos, sin }
    }
}

const QUADRANTS: [Angle; 5] = [
    Angle::exact(0.0, 1.0, 0.0),
    Angle::exact(FRAC_PI_2, 0.0, 1.0),
    Angle::exact(PI, -1.0, 0.0),
    Angle::exact(3.0 * FRAC_PI_2, 0.0, -1.0),
    Angle::exact(TAU, 1.0, 0.0),
];

/// Local frame of a quadrature point: origin at the point, unit length `dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointFrame {
    pub point: QuadPoint,
    pub location: [f64; 2],
    pub dx: f64,
}

impl PointFrame {
    pub fn new(grid: &CartesianGrid, point: QuadPoint) -> Self {
        Self { point, location: grid.point_location(point), dx: grid.dx }
    }

    /// Shift such that grid lines sit at integers after adding it.
    #[inline]
    fn shift(&self, axis: usize) -> f64 {
        if self.point.on_lines()[axis] {
            0.0
        } else {
            0.5
        }
    }

    /// Cell containing the local point `x` (half-open cells).
    #[inline]
    pub fn cell_at(&self, x: [f64; 2]) -> CellIndex {
        CellIndex::new(
            self.point.i + (x[0] + self.shift(0)).floor() as isize,
            self.point.j + (x[1] + self.shift(1)).floor() as isize,
        )
    }

    /// Local coordinates of the center of `c`.
    #[inline]
    pub fn cell_center(&self, c: CellIndex) -> [f64; 2] {
        [(c.i - self.point.i) as f64 + 0.5 - self.shift(0), (c.j - self.point.j) as f64 + 0.5 - self.shift(1)]
    }

    /// Cells whose closure contains the local point `x`, resolving points on
    /// grid lines toward `-direction` where that component is non-zero and
    /// keeping both sides otherwise.
    pub fn cells_at(&self, x: [f64; 2], direction: [f64; 2]) -> SmallVec<[CellIndex; 4]> {
        let mut per_axis: [SmallVec<[isize; 2]>; 2] = [SmallVec::new(), SmallVec::new()];
        for axis in 0..2 {
            let base = if axis == 0 { self.point.i } else { self.point.j };
            let y = x[axis] + self.shift(axis);
            let fl = y.floor();
            if y == fl {
                let k = fl as isize;
                if direction[axis] > 0.0 {
                    per_axis[axis].push(base + k - 1);
                } else if direction[axis] < 0.0 {
                    per_axis[axis].push(base + k);
                } else {
                    per_axis[axis].push(base + k - 1);
                    per_axis[axis].push(base + k);
                }
            } else {
                per_axis[axis].push(base + fl as isize);
            }
        }
        let mut out = SmallVec::new();
        for &j in &per_axis[1] {
            for &i in &per_axis[0] {
                out.push(CellIndex::new(i, j));
            }
        }
        out
    }
}

/// One arc of the footprint circle lying in a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: Angle,
    pub end: Angle,
    pub cell: CellIndex,
}

impl Arc {
    pub fn length(&self) -> f64 {
        self.end.theta - self.start.theta
    }

    fn mid_theta(&self) -> f64 {
        0.5 * (self.start.theta + self.end.theta)
    }
}

/// Partition of `[0, 2π)` into arcs, each inside one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcDecomposition {
    pub frame: PointFrame,
    /// Circle center relative to the point, in cell widths.
    pub center: [f64; 2],
    /// Circle radius in cell widths.
    pub radius: f64,
    pub arcs: SmallVec<[Arc; 16]>,
}

/// Splits the cone footprint at every grid line it crosses and at the
/// quadrant angles, assigning each arc to the cell holding its midpoint.
pub fn arc_decompose(cone: &SonicCone, frame: PointFrame) -> ArcDecomposition {
    let dx = frame.dx;
    let center = [cone.offset[0] / dx, cone.offset[1] / dx];
    let r = cone.radius / dx;
    let mut cuts: SmallVec<[Angle; 24]> = SmallVec::from_slice(&QUADRANTS[..4]);
    if r > 0.0 {
        for axis in 0..2 {
            let s = frame.shift(axis);
            let lo = (center[axis] - r + s).ceil() as isize;
            let hi = (center[axis] + r + s).floor() as isize;
            for k in lo..=hi {
                let u = (k as f64 - s - center[axis]) / r;
                if !(u.abs() < 1.0) {
                    continue;
                }
                let w = (1.0 - u * u).sqrt();
                if axis == 0 {
                    let a = u.acos();
                    cuts.push(Angle { theta: a, cos: u, sin: w });
                    cuts.push(Angle { theta: TAU - a, cos: u, sin: -w });
                } else {
                    let a = u.asin();
                    let a = if a < 0.0 { a + TAU } else { a };
                    cuts.push(Angle { theta: a, cos: w, sin: u });
                    cuts.push(Angle { theta: PI - u.asin(), cos: -w, sin: u });
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    cuts.dedup_by(|a, b| a.theta == b.theta);
    cuts.push(QUADRANTS[4]);

    let mut arcs: SmallVec<[Arc; 16]> = SmallVec::new();
    if r > 0.0 {
        for w in cuts.windows(2) {
            let (start, end) = (w[0], w[1]);
            if end.theta <= start.theta {
                continue;
            }
            let m = 0.5 * (start.theta + end.theta);
            let cell = frame.cell_at([center[0] + r * m.cos(), center[1] + r * m.sin()]);
            arcs.push(Arc { start, end, cell });
        }
    } else {
        let cell = frame.cells_at(center, [0.0; 2])[0];
        arcs.push(Arc { start: QUADRANTS[0], end: QUADRANTS[4], cell });
    }
    ArcDecomposition { frame, center, radius: r, arcs }
}

/// `∫ cos^p θ sin^q θ dθ` over an arc for `p + q <= 4`, stored as `m[p][q]`.
#[derive(Debug, Clone, Copy)]
struct Moments {
    m: [[f64; 5]; 5],
}

impl Moments {
    fn new(a: Angle, b: Angle) -> Self {
        let fa = Self::antiderivatives(a);
        let fb = Self::antiderivatives(b);
        let mut m = [[0.0; 5]; 5];
        for p in 0..5 {
            for q in 0..5 - p {
                m[p][q] = fb[p][q] - fa[p][q];
            }
        }
        Self { m }
    }

    fn antiderivatives(x: Angle) -> [[f64; 5]; 5] {
        let (t, c, s) = (x.theta, x.cos, x.sin);
        let sc = s * c;
        let quad = sc * (c * c - s * s) / 8.0;
        let mut f = [[0.0; 5]; 5];
        f[0][0] = t;
        f[1][0] = s;
        f[0][1] = -c;
        f[2][0] = 0.5 * t + 0.5 * sc;
        f[0][2] = 0.5 * t - 0.5 * sc;
        f[1][1] = 0.5 * s * s;
        f[3][0] = s - s * s * s / 3.0;
        f[0][3] = -c + c * c * c / 3.0;
        f[2][1] = -c * c * c / 3.0;
        f[1][2] = s * s * s / 3.0;
        f[4][0] = 0.375 * t + 0.5 * sc + quad;
        f[0][4] = 0.375 * t - 0.5 * sc + quad;
        f[3][1] = -0.25 * c * c * c * c;
        f[1][3] = 0.25 * s * s * s * s;
        f[2][2] = 0.125 * t - quad;
        f
    }

    /// `∫ f(θ) cos^p sin^q` for `f = a0 + a1 cos + a2 sin + a3 cos sin`.
    #[inline]
    fn weighted(&self, a: [f64; 4], p: usize, q: usize) -> f64 {
        let m = &self.m;
        a[0] * m[p][q] + a[1] * m[p + 1][q] + a[2] * m[p][q + 1] + a[3] * m[p + 1][q + 1]
    }
}

/// Coefficients of `f(Q(θ)) = a0 + a1 cos θ + a2 sin θ + a3 cos θ sin θ` for a
/// bilinear cell function, with the circle given in local units.
#[inline]
fn trig_coefficients(f: &Bilinear, rel: [f64; 2], r: f64, dx: f64) -> [f64; 4] {
    let (fx, fy, fxy) = (f.d1 * dx, f.d2 * dx, f.d12 * dx * dx);
    [
        f.value + fx * rel[0] + fy * rel[1] + fxy * rel[0] * rel[1],
        r * (fx + fxy * rel[1]),
        r * (fy + fxy * rel[0]),
        r * r * fxy,
    ]
}

/// Operator output before the depth is formed: free surface estimate and
/// velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatorValue {
    pub surface: f64,
    pub v1: f64,
    pub v2: f64,
}

impl std::ops::Add for OperatorValue {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { surface: self.surface + o.surface, v1: self.v1 + o.v1, v2: self.v2 + o.v2 }
    }
}

/// Piecewise-constant data on one cell for the constant operator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstCellData {
    pub surface: f64,
    pub v1: f64,
    pub v2: f64,
}

/// `(τ / 2π) ∫ v̄ · ∇b(Q(θ)) dθ` using the per-cell bilinear bottom.
pub fn bottom_slope_term(cone: &SonicCone, arcs: &ArcDecomposition, bottom: impl Fn(CellIndex) -> Bilinear) -> f64 {
    let (vb1, vb2) = (cone.mean.v1, cone.mean.v2);
    if vb1 == 0.0 && vb2 == 0.0 {
        return 0.0;
    }
    let dx = arcs.frame.dx;
    let r = arcs.radius;
    let mut acc = 0.0;
    for arc in &arcs.arcs {
        let b = bottom(arc.cell);
        if b.is_flat() {
            continue;
        }
        let cc = arcs.frame.cell_center(arc.cell);
        let rel = [arcs.center[0] - cc[0], arcs.center[1] - cc[1]];
        let m = Moments::new(arc.start, arc.end);
        // ∂b/∂x1 at Q = d1 + d12 (y - yc); ∂b/∂x2 = d2 + d12 (x - xc).
        let g1 = [b.d1 + b.d12 * dx * rel[1], 0.0, b.d12 * dx * r, 0.0];
        let g2 = [b.d2 + b.d12 * dx * rel[0], b.d12 * dx * r, 0.0, 0.0];
        acc += vb1 * m.weighted(g1, 0, 0) + vb2 * m.weighted(g2, 0, 0);
    }
    cone.tau / TAU * acc
}

/// Constant-data operator for a per-cell constant field.
///
/// `reference` is subtracted from the data before integration and added
/// back afterwards; any choice gives the same value in exact arithmetic,
/// and picking the local level makes a still surface come out exactly.
/// The bottom terms are not included.
pub fn const_operator(
    cone: &SonicCone,
    arcs: &ArcDecomposition,
    data: impl Fn(CellIndex) -> ConstCellData,
    reference: ConstCellData,
    g: f64,
) -> OperatorValue {
    let mut i_h = 0.0;
    let (mut i_h_sc, mut i_h_ss) = (0.0, 0.0);
    let (mut i_v1_sc, mut i_v2_ss) = (0.0, 0.0);
    let (mut i_v1, mut i_v2) = (0.0, 0.0);
    for arc in &arcs.arcs {
        let d = data(arc.cell);
        let dh = d.surface - reference.surface;
        let dv1 = d.v1 - reference.v1;
        let dv2 = d.v2 - reference.v2;
        if dh == 0.0 && dv1 == 0.0 && dv2 == 0.0 {
            continue;
        }
        let m = Moments::new(arc.start, arc.end);
        let mid = arc.mid_theta();
        let (sc, ss) = (mid.cos().signum(), mid.sin().signum());
        let len = m.m[0][0];
        i_h += dh * len;
        i_h_sc += dh * sc * len;
        i_h_ss += dh * ss * len;
        i_v1_sc += dv1 * sc * len;
        i_v2_ss += dv2 * ss * len;
        // v1 (cos² + 1/2) + v2 sin cos, and the v2 counterpart.
        i_v1 += dv1 * (m.m[2][0] + 0.5 * len) + dv2 * m.m[1][1];
        i_v2 += dv1 * m.m[1][1] + dv2 * (m.m[0][2] + 0.5 * len);
    }
    let c = cone.c_bar;
    let (h_term, v_term) = if c > 0.0 { (c / g, g / c) } else { (0.0, 0.0) };
    OperatorValue {
        surface: reference.surface + (i_h - h_term * (i_v1_sc + i_v2_ss)) / TAU,
        v1: reference.v1 + (-v_term * i_h_sc + i_v1) / TAU,
        v2: reference.v2 + (-v_term * i_h_ss + i_v2) / TAU,
    }
}

/// Bilinear-data operator, written relative to the values at `Q0`.
///
/// `q0` holds `(H, v1, v2)` at the footprint center. The bottom terms are
/// not included.
pub fn bilinear_operator(
    cone: &SonicCone,
    arcs: &ArcDecomposition,
    data: impl Fn(CellIndex) -> CellRecon,
    q0: ConstCellData,
    g: f64,
) -> OperatorValue {
    let dx = arcs.frame.dx;
    let r = arcs.radius;
    let (mut i_h, mut i_hc, mut i_hs) = (0.0, 0.0, 0.0);
    let mut i_div = 0.0;
    let (mut i_v1, mut i_v2) = (0.0, 0.0);
    for arc in &arcs.arcs {
        let d = data(arc.cell);
        let cc = arcs.frame.cell_center(arc.cell);
        let rel = [arcs.center[0] - cc[0], arcs.center[1] - cc[1]];
        let mut h = trig_coefficients(&d.surface, rel, r, dx);
        let mut v1 = trig_coefficients(&d.v1, rel, r, dx);
        let mut v2 = trig_coefficients(&d.v2, rel, r, dx);
        h[0] -= q0.surface;
        v1[0] -= q0.v1;
        v2[0] -= q0.v2;
        if h == [0.0; 4] && v1 == [0.0; 4] && v2 == [0.0; 4] {
            continue;
        }
        let m = Moments::new(arc.start, arc.end);
        i_h += m.weighted(h, 0, 0);
        i_hc += m.weighted(h, 1, 0);
        i_hs += m.weighted(h, 0, 1);
        i_div += m.weighted(v1, 1, 0) + m.weighted(v2, 0, 1);
        let (v1_0, v2_0) = (m.weighted(v1, 0, 0), m.weighted(v2, 0, 0));
        let v1_cs = m.weighted(v1, 1, 1);
        let v2_cs = m.weighted(v2, 1, 1);
        // v1 (3 cos² - 1) + 3 v2 sin cos, and the v2 counterpart.
        i_v1 += 3.0 * m.weighted(v1, 2, 0) - v1_0 + 3.0 * v2_cs;
        i_v2 += 3.0 * v1_cs + 3.0 * m.weighted(v2, 0, 2) - v2_0;
    }
    let c = cone.c_bar;
    let (h_term, v_term) = if c > 0.0 { (c / (g * PI), g / (c * PI)) } else { (0.0, 0.0) };
    OperatorValue {
        surface: q0.surface + 0.25 * i_h - h_term * i_div,
        v1: q0.v1 - v_term * i_hc + 0.25 * i_v1,
        v2: q0.v2 - v_term * i_hs + 0.25 * i_v2,
    }
}

/// Predicted point value at `t + τ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolvedValue {
    /// Free surface `H_P`.
    pub surface: f64,
    /// Depth `h_P = H_P - b_P >= 0`.
    pub h: f64,
    pub v1: f64,
    pub v2: f64,
    /// Bottom `b_P`.
    pub b: f64,
}

impl EvolvedValue {
    pub fn dry(b: f64) -> Self {
        Self { surface: b, h: 0.0, v1: 0.0, v2: 0.0, b }
    }

    /// Forms `h = H - b`, zeroing depth and velocity when it is negative.
    pub fn from_operator(v: OperatorValue, b: f64) -> Self {
        let h = v.surface - b;
        if h < 0.0 || h.is_nan() {
            Self::dry(b)
        } else {
            Self { surface: v.surface, h, v1: v.v1, v2: v.v2, b }
        }
    }
}

/// First-order predictor: constant operator on piecewise-constant data plus
/// the bottom terms.
pub fn evolve_const(
    cone: &SonicCone,
    arcs: &ArcDecomposition,
    data: impl Fn(CellIndex) -> ConstCellData,
    bottom: impl Fn(CellIndex) -> Bilinear,
    reference: ConstCellData,
    b_p: f64,
    g: f64,
) -> EvolvedValue {
    let mut v = const_operator(cone, arcs, data, reference, g);
    v.surface += bottom_slope_term(cone, arcs, bottom);
    EvolvedValue::from_operator(v, b_p)
}

/// Bilinear predictor including the bottom terms.
pub fn evolve_bilinear(
    cone: &SonicCone,
    arcs: &ArcDecomposition,
    data: impl Fn(CellIndex) -> CellRecon,
    q0: ConstCellData,
    b_p: f64,
    g: f64,
) -> EvolvedValue {
    let mut v = bilinear_operator(cone, arcs, &data, q0, g);
    v.surface += bottom_slope_term(cone, arcs, |c| data(c).b);
    EvolvedValue::from_operator(v, b_p)
}

/// `E^bilin(R(W)) + E^const(W - W~)` on a shared cone, then clipped.
pub fn combined_evolution(
    cone: &SonicCone,
    arcs: &ArcDecomposition,
    recon: impl Fn(CellIndex) -> CellRecon,
    correction: impl Fn(CellIndex) -> ConstCellData,
    q0: ConstCellData,
    b_p: f64,
    g: f64,
) -> EvolvedValue {
    let bilin = bilinear_operator(cone, arcs, &recon, q0, g);
    let corr = const_operator(cone, arcs, correction, ConstCellData::default(), g);
    let mut v = bilin + corr;
    v.surface += bottom_slope_term(cone, arcs, |c| recon(c).b);
    EvolvedValue::from_operator(v, b_p)
}

/// Everything the predictor reads for one time level.
pub struct EvolutionContext<'a> {
    pub grid: &'a CartesianGrid,
    pub prim: &'a PrimitiveState,
    pub bath: &'a Bathymetry,
    pub recon: &'a CellArray<CellRecon>,
    pub correction: &'a CellArray<[f64; 3]>,
    /// Dry-modified corner means of the bottom.
    pub corner_b: &'a crate::state::CornerField,
    pub tau: f64,
    pub g: f64,
    pub entropy_fix: bool,
    pub order: OperatorOrder,
}

impl EvolutionContext<'_> {
    /// Clamps a cell address to the rings where data is defined.
    #[inline]
    fn clamp(&self, c: CellIndex) -> CellIndex {
        let (nx, ny) = (self.grid.nx as isize, self.grid.ny as isize);
        CellIndex::new(c.i.clamp(-1, nx), c.j.clamp(-1, ny))
    }

    /// Bottom value used at a quadrature point.
    pub fn point_bottom(&self, p: QuadPoint) -> f64 {
        let b = self.corner_b;
        match p.kind {
            PointKind::Corner => b.get(p.i, p.j),
            PointKind::VerticalMid => 0.5 * (b.get(p.i, p.j) + b.get(p.i, p.j + 1)),
            PointKind::HorizontalMid => 0.5 * (b.get(p.i, p.j) + b.get(p.i + 1, p.j)),
        }
    }

    /// The cone at `p` after the dry modification and, where the stencil is
    /// transonic, the entropy-fix enlargement. `None` if the stencil is dry.
    pub fn cone_at(&self, p: QuadPoint) -> Option<(SonicCone, ModifiedStencil)> {
        let cells: SmallVec<[StencilCell; 4]> =
            p.stencil().into_iter().map(|c| stencil_cell(self.prim, self.bath, c)).collect();
        let modified = dry_stencil_modify(&cells)?;
        let mean = average_state(&modified.cells);
        let apex = self.grid.point_location(p);
        let cone = if self.entropy_fix && transonic_detect(&modified.cells, self.g) {
            entropy_fix_cone(apex, &modified.cells, mean, self.tau, self.g)
        } else {
            build_cone(apex, mean, self.tau, self.g)
        };
        Some((cone, modified))
    }

    /// Evolved value at one quadrature point.
    pub fn evolve_point(&self, p: QuadPoint) -> EvolvedValue {
        let b_p = self.point_bottom(p);
        let Some((cone, modified)) = self.cone_at(p) else {
            return EvolvedValue::dry(b_p);
        };
        let frame = PointFrame::new(self.grid, p);
        let arcs = arc_decompose(&cone, frame);
        let level = modified.max_surface;
        let replaced = |c: CellIndex| modified.replaced_cell(c);
        let recon = |c: CellIndex| {
            if replaced(c) {
                CellRecon::still_surface(level)
            } else {
                self.recon.get(self.clamp(c))
            }
        };
        match self.order {
            OperatorOrder::First => {
                let data = |c: CellIndex| {
                    if replaced(c) {
                        ConstCellData { surface: level, v1: 0.0, v2: 0.0 }
                    } else {
                        let c = self.clamp(c);
                        ConstCellData { surface: self.prim.surface.get(c), v1: self.prim.v1.get(c), v2: self.prim.v2.get(c) }
                    }
                };
                let reference = ConstCellData { surface: level, v1: cone.mean.v1, v2: cone.mean.v2 };
                evolve_const(&cone, &arcs, data, |c| recon(c).b, reference, b_p, self.g)
            }
            OperatorOrder::Second => {
                let correction = |c: CellIndex| {
                    if replaced(c) {
                        ConstCellData::default()
                    } else {
                        let [surface, v1, v2] = self.correction.get(self.clamp(c));
                        ConstCellData { surface, v1, v2 }
                    }
                };
                let q0 = q0_value(&cone, &arcs, recon);
                combined_evolution(&cone, &arcs, recon, correction, q0, b_p, self.g)
            }
        }
    }
}

/// Recovered `(H, v1, v2)` at the footprint center. On a grid line the
/// upwind cell is used; where the linearization velocity has no component
/// across the line, the adjacent cells are averaged.
pub fn q0_value(cone: &SonicCone, arcs: &ArcDecomposition, recon: impl Fn(CellIndex) -> CellRecon) -> ConstCellData {
    let frame = arcs.frame;
    let cells = frame.cells_at(arcs.center, [cone.mean.v1, cone.mean.v2]);
    let eval = |c: CellIndex| {
        let r = recon(c);
        let cc = frame.cell_center(c);
        let off = [(arcs.center[0] - cc[0]) * frame.dx, (arcs.center[1] - cc[1]) * frame.dx];
        [r.surface.eval(off), r.v1.eval(off), r.v2.eval(off)]
    };
    let vals: SmallVec<[[f64; 3]; 4]> = cells.iter().map(|c| eval(*c)).collect();
    let avg = |k: usize| match vals.as_slice() {
        [a] => a[k],
        [a, b] => 0.5 * (a[k] + b[k]),
        [a, b, c, d] => mean4(a[k], b[k], c[k], d[k]),
        _ => unreachable!("a point lies in one, two, or four cells"),
    };
    ConstCellData { surface: avg(0), v1: avg(1), v2: avg(2) }
}
