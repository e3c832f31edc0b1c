//! Represented convex domains and hyperspace names: vectors, boxes,
//! half-spaces, closed sets as excluded-ball streams, overt sets as dense
//! sequences, the Hilbert cube, and the compactness utilities built on them
//! (nets, certified maxima, unique choice, located distances).

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::{DyVec, Dyadic};
use crate::error::CoreError;
use crate::precision;
use crate::real::{real_from_bounds, LowerName, Prec, RealName, Stage, UpperName};

/// A name of a point of R^d: `query(n)` is a dyadic vector within `2^-n`
/// of the point in Euclidean norm.
#[derive(Clone)]
pub struct VecName {
    dim: usize,
    query: Arc<dyn Fn(Prec) -> DyVec + Send + Sync>,
}

impl VecName {
    /// Assembles a vector name from coordinate names; each coordinate is
    /// queried finely enough that the Euclidean error stays below `2^-n`.
    pub fn from_coords(coords: Vec<RealName>) -> Self {
        let dim = coords.len();
        let coords = Arc::new(coords);
        VecName {
            dim,
            query: Arc::new(move |n| {
                let per = precision::vec_coord(n, dim.max(1));
                DyVec(coords.iter().map(|c| c.query(per)).collect())
            }),
        }
    }

    /// Wraps a raw query already meeting the Euclidean contract.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(Prec) -> DyVec + Send + Sync + 'static,
    {
        VecName {
            dim,
            query: Arc::new(f),
        }
    }

    pub fn constant(v: DyVec) -> Self {
        let dim = v.dim();
        VecName {
            dim,
            query: Arc::new(move |_| v.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn query(&self, n: Prec) -> DyVec {
        (self.query)(n)
    }

    /// The i-th coordinate as a real name.
    pub fn coord(&self, i: usize) -> RealName {
        assert!(i < self.dim);
        let q = self.query.clone();
        RealName::from_fn(move |n| q(n).0[i].clone())
    }

    /// Name of the Euclidean distance between two point names.
    pub fn dist_name(&self, other: &VecName) -> RealName {
        assert_eq!(self.dim, other.dim);
        let (a, b) = (self.clone(), other.clone());
        RealName::from_fn(move |n| {
            let qa = a.query(n + 2);
            let qb = b.query(n + 2);
            qa.sub(&qb).norm_lower_to(n + 2)
        })
    }
}

/// An axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`, the concrete
/// compact convex ambient set of every finite-dimensional construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxDomain {
    lo: DyVec,
    hi: DyVec,
}

impl BoxDomain {
    pub fn new(lo: DyVec, hi: DyVec) -> Result<Self, CoreError> {
        if lo.dim() != hi.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: lo.dim(),
                got: hi.dim(),
            });
        }
        for (l, h) in lo.0.iter().zip(hi.0.iter()) {
            if l > h {
                return Err(CoreError::EmptyIntersectionProbe);
            }
        }
        Ok(BoxDomain { lo, hi })
    }

    /// `[0,1]^d`.
    pub fn unit(dim: usize) -> Self {
        BoxDomain {
            lo: DyVec::zeros(dim),
            hi: DyVec(vec![Dyadic::one(); dim]),
        }
    }

    pub fn interval(lo: Dyadic, hi: Dyadic) -> Result<Self, CoreError> {
        BoxDomain::new(DyVec(vec![lo]), DyVec(vec![hi]))
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &DyVec {
        &self.lo
    }

    pub fn hi(&self) -> &DyVec {
        &self.hi
    }

    pub fn contains(&self, p: &DyVec) -> bool {
        p.dim() == self.dim()
            && p.0
                .iter()
                .zip(self.lo.0.iter().zip(self.hi.0.iter()))
                .all(|(x, (l, h))| x >= l && x <= h)
    }

    pub fn clamp(&self, p: &DyVec) -> DyVec {
        DyVec(
            p.0.iter()
                .zip(self.lo.0.iter().zip(self.hi.0.iter()))
                .map(|(x, (l, h))| x.clamped(l, h))
                .collect(),
        )
    }

    pub fn center(&self) -> DyVec {
        DyVec(
            self.lo
                .0
                .iter()
                .zip(self.hi.0.iter())
                .map(|(l, h)| (l + h).scale_pow2(-1))
                .collect(),
        )
    }

    pub fn widths(&self) -> DyVec {
        self.hi.sub(&self.lo)
    }

    /// Exact squared diameter.
    pub fn diameter_sq(&self) -> Dyadic {
        self.widths().norm_sq()
    }

    /// All `2^d` corner points.
    pub fn corners(&self) -> Vec<DyVec> {
        let d = self.dim();
        assert!(d <= 20, "corner enumeration limited to small dimensions");
        (0..(1usize << d))
            .map(|mask| {
                DyVec(
                    (0..d)
                        .map(|i| {
                            if mask >> i & 1 == 1 {
                                self.hi.0[i].clone()
                            } else {
                                self.lo.0[i].clone()
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }

    /// An exact dyadic `B >= sup { ||x|| + 1 : x in K }`.
    pub fn norm_bound(&self) -> Dyadic {
        let mut nsq = Dyadic::zero();
        for (l, h) in self.lo.0.iter().zip(self.hi.0.iter()) {
            let m = Dyadic::max(&l.abs(), &h.abs());
            nsq = &nsq + &(&m * &m);
        }
        &nsq.sqrt_upper_to(4) + &Dyadic::one()
    }

    /// Exact distance-to-box name (the clamp realises the metric projection).
    pub fn dist_name(&self, x: &VecName) -> RealName {
        let bx = self.clone();
        let x = x.clone();
        RealName::from_fn(move |n| {
            let q = x.query(n + 2);
            let c = bx.clamp(&q);
            q.sub(&c).norm_lower_to(n + 2)
        })
    }
}

/// A rational half-space `{ x : <x, normal> + offset <= 0 }` with dyadic data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfSpace {
    normal: DyVec,
    offset: Dyadic,
}

impl HalfSpace {
    /// Rejects the empty set (zero normal with positive offset).
    pub fn new(normal: DyVec, offset: Dyadic) -> Result<Self, CoreError> {
        if normal.0.iter().all(|c| c.is_zero()) && offset.is_positive() {
            return Err(CoreError::EmptyHalfSpace);
        }
        Ok(HalfSpace { normal, offset })
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn normal(&self) -> &DyVec {
        &self.normal
    }

    pub fn offset(&self) -> &Dyadic {
        &self.offset
    }

    pub fn is_degenerate(&self) -> bool {
        self.normal.0.iter().all(|c| c.is_zero())
    }

    /// Exact signed membership value at a dyadic point:
    /// negative means interior, positive means outside.
    pub fn margin_at(&self, p: &DyVec) -> Dyadic {
        assert_eq!(p.dim(), self.dim(), "dimension mismatch");
        &p.dot(&self.normal) + &self.offset
    }

    pub fn contains(&self, p: &DyVec) -> bool {
        !self.margin_at(p).is_positive()
    }

    /// The membership functional `<x, normal> + offset` as a real name.
    pub fn margin_name(&self, x: &VecName) -> RealName {
        assert_eq!(
            x.dim(),
            self.dim(),
            "dimension mismatch between point and half-space"
        );
        let h = self.clone();
        let x = x.clone();
        RealName::from_fn(move |n| {
            let mut scale_sum = Dyadic::zero();
            for c in h.normal.0.iter() {
                scale_sum = &scale_sum + &c.abs();
            }
            if scale_sum.is_zero() {
                return h.offset.clone();
            }
            let k = n as i64 + scale_sum.ceil_log2().unwrap_or(0).max(0) + 1;
            let q = x.query(k.max(0) as u32);
            h.margin_at(&q)
        })
    }

    /// The complementary closed half-space `{ x : <x, normal> + offset >= 0 }`.
    pub fn complement_closure(&self) -> HalfSpace {
        HalfSpace {
            normal: DyVec(self.normal.0.iter().map(|c| -c).collect()),
            offset: -&self.offset,
        }
    }
}

/// An open rational ball excluded from a closed set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub center: DyVec,
    pub radius: Dyadic,
}

impl Ball {
    /// Exact test: is the whole box region inside this open ball?
    pub fn covers_box(&self, region: &BoxDomain) -> bool {
        // farthest corner of the region from the center, coordinatewise
        let mut far_sq = Dyadic::zero();
        for i in 0..region.dim() {
            let a = (&region.lo().0[i] - &self.center.0[i]).abs();
            let b = (&region.hi().0[i] - &self.center.0[i]).abs();
            let m = Dyadic::max(&a, &b);
            far_sq = &far_sq + &(&m * &m);
        }
        far_sq < &self.radius * &self.radius
    }

    /// Exact test: does the open ball meet the box region at all?
    pub fn touches_box(&self, region: &BoxDomain) -> bool {
        let nearest = region.clamp(&self.center);
        nearest.dist_sq(&self.center) < &self.radius * &self.radius
    }
}

/// A closed set named negatively: a cumulative stage stream of excluded
/// open rational balls, intersected with an ambient box.
#[derive(Clone)]
pub struct ClosedName {
    excluded: Arc<dyn Fn(Stage) -> Vec<Ball> + Send + Sync>,
}

impl ClosedName {
    /// `f(s)` must be cumulative: every ball listed at stage `s` is also
    /// listed at all later stages.
    pub fn from_stages<F>(f: F) -> Self
    where
        F: Fn(Stage) -> Vec<Ball> + Send + Sync + 'static,
    {
        ClosedName {
            excluded: Arc::new(f),
        }
    }

    /// Finite ball list revealed one ball per stage.
    pub fn from_balls(balls: Vec<Ball>) -> Self {
        let balls = Arc::new(balls);
        ClosedName::from_stages(move |s| {
            let k = ((s + 1) as usize).min(balls.len());
            balls[..k].to_vec()
        })
    }

    /// The empty exclusion stream (no information; the set is the whole box).
    pub fn trivial() -> Self {
        ClosedName::from_stages(|_| Vec::new())
    }

    pub fn excluded(&self, s: Stage) -> Vec<Ball> {
        (self.excluded)(s)
    }
}

/// An overt set named positively: a sequence of points whose closure is
/// the set. Points may be exact dyadics or genuine names.
#[derive(Clone)]
pub struct DenseSeq {
    point: Arc<dyn Fn(u64) -> VecName + Send + Sync>,
}

impl DenseSeq {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(u64) -> VecName + Send + Sync + 'static,
    {
        DenseSeq { point: Arc::new(f) }
    }

    pub fn from_points(points: Vec<DyVec>) -> Self {
        assert!(!points.is_empty());
        let points = Arc::new(points);
        DenseSeq::from_fn(move |k| VecName::constant(points[k as usize % points.len()].clone()))
    }

    pub fn point(&self, k: u64) -> VecName {
        (self.point)(k)
    }

    /// The dyadic points of a box, enumerated lattice by lattice with
    /// spacing `2^-e` for `e = 0, 1, 2, ...`.
    pub fn box_lattice(bx: &BoxDomain) -> DenseSeq {
        let bx = bx.clone();
        DenseSeq::from_fn(move |k| VecName::constant(box_lattice_point(&bx, k)))
    }
}

/// Decodes index `k` of the stacked lattice enumeration of a box.
pub(crate) fn box_lattice_point(bx: &BoxDomain, k: u64) -> DyVec {
    let mut e: i64 = 0;
    let mut rest = k as u128;
    loop {
        let n_e = lattice_count(bx, e);
        if rest < n_e {
            return lattice_point(bx, e, rest);
        }
        rest -= n_e;
        e += 1;
    }
}

pub(crate) fn axis_count(lo: &Dyadic, hi: &Dyadic, e: i64) -> u128 {
    if lo == hi {
        return 1;
    }
    // points emitted by stepping 2^-e from lo and clamping at hi:
    // ceil(width * 2^e) + 1
    let scaled = (hi - lo).scale_pow2(e).ceil_to(0);
    let steps = scaled
        .mantissa()
        .to_u128_approx()
        .map(|v| v << scaled.exponent().max(0) as u32);
    steps.map_or(u128::MAX, |s| s + 1)
}

/// Helper extension: small nonnegative BigInt to u128.
trait ToU128Approx {
    fn to_u128_approx(&self) -> Option<u128>;
}

impl ToU128Approx for num_bigint::BigInt {
    fn to_u128_approx(&self) -> Option<u128> {
        use num_traits::ToPrimitive;
        self.to_u128()
    }
}

pub(crate) fn lattice_count(bx: &BoxDomain, e: i64) -> u128 {
    let mut total: u128 = 1;
    for i in 0..bx.dim() {
        total = total.saturating_mul(axis_count(&bx.lo().0[i], &bx.hi().0[i], e));
    }
    total
}

pub(crate) fn lattice_point(bx: &BoxDomain, e: i64, mut idx: u128) -> DyVec {
    let spacing = Dyadic::pow2(-e);
    let mut coords = Vec::with_capacity(bx.dim());
    for i in 0..bx.dim() {
        let count = axis_count(&bx.lo().0[i], &bx.hi().0[i], e);
        let j = idx % count;
        idx /= count;
        let lo = &bx.lo().0[i];
        let hi = &bx.hi().0[i];
        let step = &spacing * &Dyadic::from_int(j as i64);
        coords.push(Dyadic::min(&(lo + &step), hi));
    }
    DyVec(coords)
}

/// A `2^-n`-net of the box: an axis-aligned dyadic lattice with per-axis
/// spacing `2^-(n + ceil log2 dim)`, so the covering radius
/// `sqrt(dim)/2 * spacing` stays below `2^-n`.
pub fn net_for_box(bx: &BoxDomain, n: Prec) -> Vec<DyVec> {
    let e = n as i64 + precision::ceil_log2_usize(bx.dim().max(1)) as i64;
    let count = lattice_count(bx, e);
    assert!(count <= 1 << 24, "net of {count} points is too large");
    (0..count).map(|i| lattice_point(bx, e, i)).collect()
}

/// Nearest net point by direct lattice rounding (certifies covering
/// without materialising the whole net).
pub fn net_point_near(bx: &BoxDomain, n: Prec, x: &DyVec) -> DyVec {
    let e = n as i64 + precision::ceil_log2_usize(bx.dim().max(1)) as i64;
    let spacing = Dyadic::pow2(-e);
    DyVec(
        (0..bx.dim())
            .map(|i| {
                let lo = &bx.lo().0[i];
                let hi = &bx.hi().0[i];
                let rel = (&x.0[i] - lo).scale_pow2(e).round_to(0);
                let cand = lo + &(&rel * &spacing);
                cand.clamped(lo, hi)
            })
            .collect(),
    )
}

/// A real-valued function on a box, evaluable at dyadic points to any
/// precision and carrying a declared Lipschitz bound.
#[derive(Clone)]
pub struct ScalarFn {
    lipschitz: Dyadic,
    eval: Arc<dyn Fn(&DyVec, Prec) -> Dyadic + Send + Sync>,
}

impl ScalarFn {
    pub fn new<F>(lipschitz: Dyadic, eval: F) -> Self
    where
        F: Fn(&DyVec, Prec) -> Dyadic + Send + Sync + 'static,
    {
        ScalarFn {
            lipschitz,
            eval: Arc::new(eval),
        }
    }

    pub fn lipschitz(&self) -> &Dyadic {
        &self.lipschitz
    }

    pub fn eval(&self, p: &DyVec, n: Prec) -> Dyadic {
        (self.eval)(p, n)
    }
}

/// Name of `max_K f` for a Lipschitz-evaluable `f`.
///
/// Lower bounds come from evaluating on net points, upper bounds from the
/// same evaluations plus `L` times the covering radius; the net refines
/// adaptively (best cell first) until both sides meet at the requested
/// precision. An invalid Lipschitz declaration yields an incoherent name.
pub fn compact_max(f: &ScalarFn, bx: &BoxDomain) -> RealName {
    let f = f.clone();
    let bx = bx.clone();
    RealName::from_fn(move |n| {
        let p = n + 3;
        let tol = Dyadic::pow2(-(p as i64));
        let target = Dyadic::pow2(-(n as i64) - 1);
        struct Cell {
            region: BoxDomain,
            value: Dyadic, // f(center) to precision p
            upper: Dyadic, // value + tol + L * covering radius
        }
        let make = |region: BoxDomain| {
            let c = region.center();
            let value = f.eval(&c, p);
            let radius = region.diameter_sq().sqrt_upper_to(p).scale_pow2(-1);
            let upper = &(&value + &tol) + &(f.lipschitz() * &radius);
            Cell {
                region,
                value,
                upper,
            }
        };
        let root = make(bx.clone());
        let mut best_lower = &root.value - &tol;
        let mut cells = vec![root];
        loop {
            // highest upper bound decides both the gap and the next split
            let mut imax = 0;
            for (i, c) in cells.iter().enumerate() {
                if c.upper > cells[imax].upper {
                    imax = i;
                }
            }
            let global_upper = cells[imax].upper.clone();
            if &global_upper - &best_lower <= target {
                return (&global_upper + &best_lower).scale_pow2(-1);
            }
            let cell = cells.swap_remove(imax);
            let (a, b) = split_box(&cell.region);
            for half in [a, b] {
                let c = make(half);
                let lower = &c.value - &tol;
                if lower > best_lower {
                    best_lower = lower;
                }
                // cells that cannot beat the running lower bound are dead
                if c.upper > best_lower {
                    cells.push(c);
                }
            }
        }
    })
}

/// Bisects the longest axis at its dyadic midpoint (ties: lowest index).
pub(crate) fn split_box(bx: &BoxDomain) -> (BoxDomain, BoxDomain) {
    let w = bx.widths();
    let mut axis = 0;
    for i in 1..bx.dim() {
        if w.0[i] > w.0[axis] {
            axis = i;
        }
    }
    let mid = (&bx.lo().0[axis] + &bx.hi().0[axis]).scale_pow2(-1);
    let mut hi_a = bx.hi().clone();
    hi_a.0[axis] = mid.clone();
    let mut lo_b = bx.lo().clone();
    lo_b.0[axis] = mid;
    (
        BoxDomain {
            lo: bx.lo().clone(),
            hi: hi_a,
        },
        BoxDomain {
            lo: lo_b,
            hi: bx.hi().clone(),
        },
    )
}

/// One stage of the unique-choice search: prunes regions covered by a
/// single excluded ball, collapses the rest to cells of edge `2^(-n-1)`,
/// and accumulates the survivors' bounding box, aborting once it already
/// spills past the `2^-n` ball that would certify success.
fn survivors_bbox(
    region: &BoxDomain,
    leaf: &Dyadic,
    balls: &[&Ball],
    acc: &mut Option<(DyVec, DyVec)>,
    spill_sq: &Dyadic,
) -> bool {
    if balls.iter().any(|b| b.covers_box(region)) {
        return true;
    }
    let w = region.widths();
    let is_leaf = w.0.iter().all(|wi| wi <= leaf);
    if is_leaf {
        match acc {
            None => *acc = Some((region.lo.clone(), region.hi.clone())),
            Some((lo, hi)) => {
                for i in 0..region.dim() {
                    if region.lo.0[i] < lo.0[i] {
                        lo.0[i] = region.lo.0[i].clone();
                    }
                    if region.hi.0[i] > hi.0[i] {
                        hi.0[i] = region.hi.0[i].clone();
                    }
                }
            }
        }
        let (lo, hi) = acc.as_ref().unwrap();
        return &hi.sub(lo).norm_sq() <= spill_sq;
    }
    let (a, b) = split_box(region);
    // only the balls touching a child can prune inside it
    let keep = |r: &BoxDomain| -> Vec<&Ball> {
        balls
            .iter()
            .copied()
            .filter(|b| b.touches_box(r))
            .collect()
    };
    let balls_a = keep(&a);
    let balls_b = keep(&b);
    survivors_bbox(&a, leaf, &balls_a, acc, spill_sq)
        && survivors_bbox(&b, leaf, &balls_b, acc, spill_sq)
}

/// One budgeted probe of unique choice at precision `n`: simulates the
/// exclusion stream stage by stage until all surviving cells fit in a
/// `2^-n` ball, then returns the survivors' center.
pub fn unique_choice_probe(
    a: &ClosedName,
    bx: &BoxDomain,
    n: Prec,
    stage_budget: Stage,
) -> Option<DyVec> {
    let leaf = Dyadic::pow2(-(n as i64) - 1);
    // squared diameter of a 2^-n ball
    let spill_sq = Dyadic::pow2(-2 * (n as i64) + 2);
    for s in 0..=stage_budget {
        let balls = a.excluded(s);
        let refs: Vec<&Ball> = balls.iter().collect();
        let mut acc = None;
        if survivors_bbox(bx, &leaf, &refs, &mut acc, &spill_sq) {
            if let Some((lo, hi)) = acc {
                if hi.sub(&lo).norm_sq() <= spill_sq {
                    return Some(DyVec(
                        lo.0.iter()
                            .zip(hi.0.iter())
                            .map(|(l, h)| (l + h).scale_pow2(-1))
                            .collect(),
                    ));
                }
            }
        }
    }
    None
}

/// Recovers the unique point of a singleton closed subset of the box.
///
/// A query at precision `n` loops over exclusion stages without bound; it
/// diverges when the promise is broken (the set is not a singleton), so
/// callers that distrust their input use [`unique_choice_probe`] directly.
pub fn unique_choice_compact(a: &ClosedName, bx: &BoxDomain) -> VecName {
    let a = a.clone();
    let bx = bx.clone();
    let dim = bx.dim();
    VecName::from_fn(dim, move |n| {
        let mut budget: Stage = 16;
        loop {
            if let Some(p) = unique_choice_probe(&a, &bx, n, budget) {
                return p;
            }
            budget *= 2;
        }
    })
}

/// Lower name of `d(x, A)` from the excluded-ball stream: each excluded
/// ball `B(c, r)` with `x` provably inside pushes the distance up to
/// `r - ||x - c||`, floored at zero.
pub fn dist_lower_from_closed(a: &ClosedName, x: &VecName) -> LowerName {
    let a = a.clone();
    let x = x.clone();
    LowerName::from_monotone(move |s| {
        let mut best = Dyadic::zero();
        for t in 0..=s {
            let p = precision::stage_prec(t);
            let q = x.query(p);
            let slack = Dyadic::pow2(-(p as i64));
            for ball in a.excluded(t) {
                let reach = q.sub(&ball.center).norm_upper_to(p);
                let lower = &ball.radius - &(&reach + &slack);
                if lower > best {
                    best = lower;
                }
            }
        }
        best
    })
}

/// Upper name of `d(x, A)` from a dense sequence: stage `s` takes the best
/// distance bound over the first `s + 1` listed points.
pub fn dist_upper_from_dense(seq: &DenseSeq, x: &VecName) -> UpperName {
    let seq = seq.clone();
    let x = x.clone();
    UpperName::from_monotone(move |s| {
        let mut best: Option<Dyadic> = None;
        for t in 0..=s {
            let p = precision::stage_prec(t);
            let q = x.query(p);
            let slack = Dyadic::pow2(-(p as i64) + 1);
            for k in 0..=t {
                let pt = seq.point(k).query(p);
                let up = &q.sub(&pt).norm_upper_to(p) + &slack;
                if best.as_ref().map_or(true, |b| &up < b) {
                    best = Some(up);
                }
            }
        }
        best.expect("stage scan always sees point 0")
    })
}

/// The located distance `d(x, A)` of a set named both negatively (balls)
/// and positively (dense points); the two one-sided names are squeezed.
pub fn dist_located(a: &ClosedName, seq: &DenseSeq, x: &VecName) -> RealName {
    real_from_bounds(
        &dist_lower_from_closed(a, x),
        &dist_upper_from_dense(seq, x),
    )
}

/// A nonempty closed convex set given by located data: a dense sequence
/// into the set plus a distance-function name.
#[derive(Clone)]
pub struct LocatedSet {
    dense: DenseSeq,
    dist: Arc<dyn Fn(&VecName) -> RealName + Send + Sync>,
}

impl LocatedSet {
    pub fn new<F>(dense: DenseSeq, dist: F) -> Self
    where
        F: Fn(&VecName) -> RealName + Send + Sync + 'static,
    {
        LocatedSet {
            dense,
            dist: Arc::new(dist),
        }
    }

    pub fn dense(&self) -> &DenseSeq {
        &self.dense
    }

    pub fn dist_to(&self, x: &VecName) -> RealName {
        (self.dist)(x)
    }

    /// A box as a located set: clamp distance, lattice density.
    pub fn from_box(bx: &BoxDomain) -> Self {
        let bx2 = bx.clone();
        LocatedSet::new(DenseSeq::box_lattice(bx), move |x| bx2.dist_name(x))
    }

    /// `h` intersected with an ambient box. The dense sequence is enriched
    /// by hyperplane projections of the lattice, since plain lattices
    /// almost never land on a slanted boundary.
    pub fn from_halfspace_in_box(bx: &BoxDomain, h: &HalfSpace) -> Result<Self, CoreError> {
        polytope_located(bx, &[h.clone()])
    }

    /// Box intersected with a list of half-spaces (nonempty interior is
    /// the caller's promise, probed on lattice points and corners).
    pub fn from_polytope(bx: &BoxDomain, cuts: &[HalfSpace]) -> Result<Self, CoreError> {
        polytope_located(bx, cuts)
    }
}

/// Finds some exact dyadic point of the polytope, probing corners first
/// and then lattices of increasing resolution.
pub fn polytope_feasible_point(bx: &BoxDomain, cuts: &[HalfSpace]) -> Result<DyVec, CoreError> {
    let feasible = |p: &DyVec| cuts.iter().all(|h| h.contains(p));
    for c in bx.corners() {
        if feasible(&c) {
            return Ok(c);
        }
    }
    for e in 0..=6i64 {
        let count = lattice_count(bx, e).min(1 << 22);
        for i in 0..count {
            let p = lattice_point(bx, e, i);
            if feasible(&p) {
                return Ok(p);
            }
        }
    }
    Err(CoreError::EmptyIntersectionProbe)
}

fn polytope_located(bx: &BoxDomain, cuts: &[HalfSpace]) -> Result<LocatedSet, CoreError> {
    for h in cuts {
        if h.dim() != bx.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: bx.dim(),
                got: h.dim(),
            });
        }
    }
    let anchor = polytope_feasible_point(bx, cuts)?;
    let bx2 = bx.clone();
    let cuts2: Vec<HalfSpace> = cuts.to_vec();
    let dense = DenseSeq::from_fn(move |k| polytope_dense_point(&bx2, &cuts2, &anchor, k));
    let bx3 = bx.clone();
    let cuts3: Vec<HalfSpace> = cuts.to_vec();
    Ok(LocatedSet::new(dense, move |x| {
        dist_name_to_polytope(&bx3, &cuts3, x)
    }))
}

/// Dense points of `box ∩ cuts`: lattice points that satisfy the cuts,
/// interleaved with points obtained by projecting lattice points onto
/// each cutting hyperplane (kept only when they stay feasible).
fn polytope_dense_point(bx: &BoxDomain, cuts: &[HalfSpace], anchor: &DyVec, k: u64) -> VecName {
    let streams = 1 + cuts.len() as u64;
    let (which, idx) = (k % streams, k / streams);
    let g = box_lattice_point(bx, idx);
    if which == 0 {
        if cuts.iter().all(|h| h.contains(&g)) {
            return VecName::constant(g);
        }
        return VecName::constant(anchor.clone());
    }
    let h = &cuts[(which - 1) as usize];
    match hyperplane_projection(h, &g) {
        Some(p) if p.in_box_exact(bx) && cuts.iter().all(|c| p.margin_sign(c) <= 0) => {
            p.into_vec_name()
        }
        _ => VecName::constant(anchor.clone()),
    }
}

/// A rational point `nums / den` with exact dyadic numerators and a
/// positive dyadic denominator, as produced by hyperplane projections.
pub(crate) struct RationalPoint {
    nums: Vec<Dyadic>,
    den: Dyadic,
}

impl RationalPoint {
    pub(crate) fn new(nums: Vec<Dyadic>, den: Dyadic) -> Self {
        assert!(!den.is_zero());
        if den.is_negative() {
            RationalPoint {
                nums: nums.iter().map(|n| -n).collect(),
                den: -&den,
            }
        } else {
            RationalPoint { nums, den }
        }
    }

    pub(crate) fn in_box_exact(&self, bx: &BoxDomain) -> bool {
        debug_assert!(self.den.is_positive());
        (0..self.nums.len()).all(|i| {
            let lo = &bx.lo().0[i] * &self.den;
            let hi = &bx.hi().0[i] * &self.den;
            self.nums[i] >= lo && self.nums[i] <= hi
        })
    }

    /// Exact sign of `<p, normal> + offset` by clearing the denominator.
    pub(crate) fn margin_sign(&self, h: &HalfSpace) -> i8 {
        let mut acc = &h.offset * &self.den;
        for (num, c) in self.nums.iter().zip(h.normal().0.iter()) {
            acc = &acc + &(num * c);
        }
        if acc.is_positive() {
            1
        } else if acc.is_negative() {
            -1
        } else {
            0
        }
    }

    pub(crate) fn into_vec_name(self) -> VecName {
        let dim = self.nums.len();
        let nums = Arc::new(self.nums);
        let den = self.den;
        VecName::from_fn(dim, move |n| {
            let per = precision::vec_coord(n, dim.max(1));
            DyVec(
                nums.iter()
                    .map(|num| Dyadic::div_to(num, &den, per + 1))
                    .collect(),
            )
        })
    }

    pub(crate) fn shifted(&self, dir: &DyVec, t: &Dyadic) -> RationalPoint {
        RationalPoint {
            nums: self
                .nums
                .iter()
                .zip(dir.0.iter())
                .map(|(num, d)| num + &(&(d * t) * &self.den))
                .collect(),
            den: self.den.clone(),
        }
    }
}

/// Exact metric projection of a dyadic point onto the hyperplane of `h`,
/// as a rational point over the denominator `||normal||^2`.
pub(crate) fn hyperplane_projection(h: &HalfSpace, g: &DyVec) -> Option<RationalPoint> {
    if h.is_degenerate() {
        return None;
    }
    let nsq = h.normal().norm_sq();
    let m = h.margin_at(g);
    // p = g - (m / nsq) * normal, all over the common denominator nsq
    Some(RationalPoint {
        nums: g
            .0
            .iter()
            .zip(h.normal().0.iter())
            .map(|(gi, ni)| &(gi * &nsq) - &(&m * ni))
            .collect(),
        den: nsq,
    })
}

/// Certified distance from a point name to `box ∩ cuts` by adaptive
/// subdivision: infeasible cells are pruned by exact corner margins,
/// surviving cells bound the distance from below through center distance
/// minus radius and from above through exactly feasible corners.
pub fn dist_name_to_polytope(bx: &BoxDomain, cuts: &[HalfSpace], x: &VecName) -> RealName {
    let bx = bx.clone();
    let cuts: Vec<HalfSpace> = cuts.to_vec();
    let x = x.clone();
    RealName::from_fn(move |n| {
        let q = x.query(n + 2);
        dist_to_polytope_from_dyadic(&bx, &cuts, &q, n + 2)
    })
}

pub(crate) fn dist_to_polytope_from_dyadic(
    bx: &BoxDomain,
    cuts: &[HalfSpace],
    y: &DyVec,
    n: Prec,
) -> Dyadic {
    let p = n + 3;
    let tol = Dyadic::pow2(-(p as i64));
    let target = Dyadic::pow2(-(n as i64) - 1);
    // every cut below y gives a global lower bound margin / ||normal||
    let mut floor = Dyadic::zero();
    for h in cuts {
        let m = h.margin_at(y);
        if m.is_positive() {
            let nsq = h.normal().norm_sq();
            let ratio_sq = Dyadic::div_to(&(&m * &m), &nsq, 2 * p);
            let d_h = Dyadic::max(&ratio_sq, &Dyadic::zero()).sqrt_lower_to(p);
            if d_h > floor {
                floor = d_h;
            }
        }
    }
    // a cell is certainly infeasible when some cut is violated at every corner
    let cell_infeasible = |region: &BoxDomain| {
        cuts.iter().any(|h| {
            region
                .corners()
                .iter()
                .all(|c| h.margin_at(c).is_positive())
        })
    };
    // exact clamp distance to the cell, combined with the global floor
    let lower_bound = |region: &BoxDomain| {
        let near = region.clamp(y);
        let d = &y.sub(&near).norm_lower_to(p) - &tol;
        Dyadic::max(&Dyadic::max(&d, &floor), &Dyadic::zero())
    };
    // upper bounds from exactly feasible corners and clamp points
    let feasible_upper = |region: &BoxDomain| -> Option<Dyadic> {
        let mut best: Option<Dyadic> = None;
        let mut consider = |c: &DyVec| {
            if cuts.iter().all(|h| h.contains(c)) {
                let up = y.sub(c).norm_upper_to(p);
                if best.as_ref().map_or(true, |b| &up < b) {
                    best = Some(up);
                }
            }
        };
        consider(&region.clamp(y));
        for c in region.corners() {
            consider(&c);
        }
        best
    };
    struct Cell {
        region: BoxDomain,
        lb: Dyadic,
    }
    let mut cells = vec![Cell {
        region: bx.clone(),
        lb: lower_bound(bx),
    }];
    let mut best_ub: Option<Dyadic> = feasible_upper(bx);
    loop {
        // smallest lower bound drives the gap
        let mut imin = 0;
        for (i, c) in cells.iter().enumerate() {
            if c.lb < cells[imin].lb {
                imin = i;
            }
        }
        let global_lb = cells[imin].lb.clone();
        if let Some(ub) = &best_ub {
            if ub - &global_lb <= target {
                return (ub + &global_lb).scale_pow2(-1);
            }
        }
        let cell = cells.swap_remove(imin);
        let (a, b) = split_box(&cell.region);
        for half in [a, b] {
            if cell_infeasible(&half) {
                continue;
            }
            if let Some(ub) = feasible_upper(&half) {
                if best_ub.as_ref().map_or(true, |b| &ub < b) {
                    best_ub = Some(ub);
                }
            }
            let lb = lower_bound(&half);
            // keep only cells that can still matter
            if best_ub.as_ref().map_or(true, |ub| &lb < ub) {
                cells.push(Cell { region: half, lb });
            }
        }
        if cells.is_empty() {
            // everything pruned: the upper bound is the answer
            return best_ub.expect("nonempty polytope promise violated");
        }
    }
}

/// A point of the Hilbert cube `{ x : 0 <= x(n) <= 2^-n }`, coordinate by
/// coordinate. The envelope forces the tail bound
/// `|| x past index N ||_2 <= 2^-N`.
#[derive(Clone)]
pub struct CubePoint {
    coord: Arc<dyn Fn(u32) -> RealName + Send + Sync>,
}

impl CubePoint {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(u32) -> RealName + Send + Sync + 'static,
    {
        CubePoint { coord: Arc::new(f) }
    }

    pub fn origin() -> Self {
        CubePoint::from_fn(|_| RealName::constant(Dyadic::zero()))
    }

    /// The extreme point `x(k) = 2^-k`.
    pub fn top() -> Self {
        CubePoint::from_fn(|k| RealName::constant(Dyadic::pow2(-(k as i64))))
    }

    pub fn coord(&self, k: u32) -> RealName {
        (self.coord)(k)
    }
}

/// The finite data certifying a strong (norm-topology) approximation of a
/// cube point: a coordinate prefix plus a bound on the discarded tail.
#[derive(Clone, Debug)]
pub struct TailCertificate {
    pub prefix_len: u32,
    pub tail_l2_bound: Dyadic,
}

/// Strong embedding of a cube point at precision `n`: coordinates
/// `0 ..= n+1` to per-coordinate precision `2n + 2 + ceil log2 (n+2)`,
/// with the envelope guaranteeing an omitted tail of l2-norm at most
/// `2^-(n+1)`; the total error stays below `2^-n`.
///
/// Panics when a coordinate query certifies an envelope violation.
pub fn cube_embed_strong(x: &CubePoint, n: Prec) -> (Vec<Dyadic>, TailCertificate) {
    let (len, per) = precision::cube_prefix(n);
    let tol = Dyadic::pow2(-(per as i64));
    let mut prefix = Vec::with_capacity(len as usize);
    for k in 0..len {
        let q = x.coord(k).query(per);
        let top = Dyadic::pow2(-(k as i64));
        assert!(
            !(&q + &tol).is_negative() && &q - &tol <= top,
            "cube coordinate {k} certified outside its envelope"
        );
        prefix.push(q.clamped(&Dyadic::zero(), &top));
    }
    (
        prefix,
        TailCertificate {
            prefix_len: len,
            tail_l2_bound: Dyadic::pow2(-(n as i64) - 1),
        },
    )
}

/// A point of l2 in the weak representation: coordinatewise names plus an
/// a-priori bound on the norm.
#[derive(Clone)]
pub struct WeakPoint {
    pub norm_bound: Dyadic,
    coord: Arc<dyn Fn(u32) -> RealName + Send + Sync>,
}

impl WeakPoint {
    pub fn from_fn<F>(norm_bound: Dyadic, f: F) -> Self
    where
        F: Fn(u32) -> RealName + Send + Sync + 'static,
    {
        WeakPoint {
            norm_bound,
            coord: Arc::new(f),
        }
    }

    pub fn coord(&self, k: u32) -> RealName {
        (self.coord)(k)
    }
}

/// The Hilbert-space modulus of convexity `eta(eps) = 1 - sqrt(1 - eps^2/4)`.
///
/// Domain promise `0 < eps <= 2`; a query certifying `eps > 2` panics
/// through the square root (its argument goes negative).
pub fn eta_hilbert(eps: &RealName) -> RealName {
    let one = RealName::constant(Dyadic::one());
    let quarter = Dyadic::ratio_pow2(1, 2);
    let inner = one.sub(&eps.mul(eps).scale(&quarter));
    one.sub(&inner.sqrt())
}

/// Fixed witness `mu(n) = 2n + 3` for the Hilbert modulus:
/// `2^-mu(n) <= eta(2^-n)` because `eta(eps) >= eps^2 / 8` on `(0, 2]`.
pub fn mu_hilbert(n: Prec) -> Prec {
    2 * n + 3
}

/// Parameters of the modulus-of-uniqueness projection: a witness for the
/// modulus of convexity and an integer bound on the distance to the set.
#[derive(Clone)]
pub struct ProjectionParams {
    mu: Arc<dyn Fn(Prec) -> Prec + Send + Sync>,
    pub dist_bound: u64,
}

impl ProjectionParams {
    pub fn new<F>(mu: F, dist_bound: u64) -> Self
    where
        F: Fn(Prec) -> Prec + Send + Sync + 'static,
    {
        ProjectionParams {
            mu: Arc::new(mu),
            dist_bound,
        }
    }

    /// Hilbert-space default.
    pub fn hilbert(dist_bound: u64) -> Self {
        ProjectionParams::new(mu_hilbert, dist_bound)
    }

    pub fn mu(&self, n: Prec) -> Prec {
        (self.mu)(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(num: i64, k: i64) -> Dyadic {
        Dyadic::ratio_pow2(num, k)
    }

    fn assert_close(a: &Dyadic, b: &Dyadic, bits: i64) {
        assert!(
            (a - b).abs() <= Dyadic::pow2(-bits),
            "expected |{:?} - {:?}| <= 2^-{bits}",
            a,
            b
        );
    }

    #[test]
    fn vec_name_euclidean_contract() {
        let v = VecName::from_coords(vec![
            RealName::constant(dy(1, 2)),
            RealName::constant(dy(1, 1)),
            RealName::constant(Dyadic::one()),
        ]);
        let q = v.query(10);
        let exact = DyVec(vec![dy(1, 2), dy(1, 1), Dyadic::one()]);
        assert!(q.dist_sq(&exact) <= Dyadic::pow2(-20));
    }

    #[test]
    fn box_bound_and_clamp() {
        let bx = BoxDomain::new(DyVec::from_ints(&[0, -1]), DyVec::from_ints(&[1, 1])).unwrap();
        let b = bx.norm_bound();
        // sup norm is sqrt(2); B must be at least sqrt(2) + 1
        assert!(&b * &b >= dy(2, 0));
        let p = DyVec::from_ints(&[2, -3]);
        assert_eq!(bx.clamp(&p), DyVec::from_ints(&[1, -1]));
    }

    #[test]
    fn margin_examples() {
        // h: x1 <= 0 at x = (1, 0) gives margin 1
        let h = HalfSpace::new(DyVec::from_ints(&[1, 0]), Dyadic::zero()).unwrap();
        let x = VecName::constant(DyVec::from_ints(&[1, 0]));
        assert_close(&h.margin_name(&x).query(20), &Dyadic::one(), 20);

        // h: x1 + x2 <= 1 at (1,1) gives margin 1 (dot-product oracle: 2 - 1)
        let h2 = HalfSpace::new(DyVec::from_ints(&[1, 1]), Dyadic::from_int(-1)).unwrap();
        let x2 = VecName::constant(DyVec::from_ints(&[1, 1]));
        assert_close(&h2.margin_name(&x2).query(20), &Dyadic::one(), 20);

        // degenerate whole-space half-space: margin is the offset
        let h3 = HalfSpace::new(DyVec::zeros(2), Dyadic::from_int(-1)).unwrap();
        let x3 = VecName::constant(DyVec::from_ints(&[5, 7]));
        assert_eq!(h3.margin_name(&x3).query(8), Dyadic::from_int(-1));
    }

    #[test]
    fn empty_halfspace_rejected() {
        assert_eq!(
            HalfSpace::new(DyVec::zeros(2), Dyadic::one()).unwrap_err(),
            CoreError::EmptyHalfSpace
        );
    }

    #[test]
    fn net_1d_unit_interval() {
        let bx = BoxDomain::unit(1);
        let net = net_for_box(&bx, 1);
        let pts: Vec<Dyadic> = net.into_iter().map(|p| p.0[0].clone()).collect();
        assert_eq!(pts, vec![Dyadic::zero(), dy(1, 1), Dyadic::one()]);
    }

    #[test]
    fn net_degenerate_box() {
        let bx = BoxDomain::new(DyVec::from_ints(&[3, 4]), DyVec::from_ints(&[3, 4])).unwrap();
        let net = net_for_box(&bx, 3);
        assert_eq!(net, vec![DyVec::from_ints(&[3, 4])]);
    }

    #[test]
    fn net_2d_spacing_and_covering() {
        let bx = BoxDomain::unit(2);
        let net = net_for_box(&bx, 2);
        // spacing 2^-3 per axis: 9 points per axis
        assert_eq!(net.len(), 81);
        // worst-case distance sqrt(2) * spacing / 2 <= 2^-2, spot-checked
        let x = DyVec(vec![dy(3, 5), dy(29, 5)]); // (3/32, 29/32)
        let near = net_point_near(&bx, 2, &x);
        assert!(x.dist_sq(&near) <= Dyadic::pow2(-4));
    }

    #[test]
    fn net_covering_randomized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for dim in 1..=3usize {
            let bx = BoxDomain::unit(dim);
            for n in 0..=6u32 {
                for _ in 0..50 {
                    let x = DyVec(
                        (0..dim)
                            .map(|_| Dyadic::ratio_pow2(rng.gen_range(0..=1024), 10))
                            .collect(),
                    );
                    let near = net_point_near(&bx, n, &x);
                    assert!(bx.contains(&near));
                    assert!(
                        x.dist_sq(&near) <= Dyadic::pow2(-2 * (n as i64)),
                        "dim {dim} n {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn compact_max_parabola() {
        // f(x) = x(1-x) on [0,1], L = 1, max 1/4 at x = 1/2
        let f = ScalarFn::new(Dyadic::one(), |p, _| {
            let x = &p.0[0];
            x * &(&Dyadic::one() - x)
        });
        let bx = BoxDomain::unit(1);
        let m = compact_max(&f, &bx);
        // dense-grid brute-force oracle at spacing 2^-12
        let mut oracle = Dyadic::zero();
        for i in 0..=(1i64 << 12) {
            let x = dy(i, 12);
            let v = &x * &(&Dyadic::one() - &x);
            if v > oracle {
                oracle = v;
            }
        }
        assert_close(&m.query(10), &oracle, 10);
        assert_close(&m.query(10), &dy(1, 2), 10);
    }

    #[test]
    fn compact_max_constant_and_linear() {
        let c = ScalarFn::new(Dyadic::zero(), |_, _| dy(3, 2));
        assert_close(
            &compact_max(&c, &BoxDomain::unit(2)).query(12),
            &dy(3, 2),
            12,
        );
        // f(x) = x1 + x2 on [0,1]^2, L = sqrt(2) <= 3/2; vertex max = 2
        let f = ScalarFn::new(dy(3, 1), |p, _| &p.0[0] + &p.0[1]);
        assert_close(
            &compact_max(&f, &BoxDomain::unit(2)).query(10),
            &Dyadic::from_int(2),
            10,
        );
    }

    /// Excluded-ball stream isolating a known point: level `l <= stage`
    /// contributes a ring of radius-`2^-l` balls around the point, kept
    /// only when the ball provably excludes it (squared distance above
    /// `2 r^2`) and provably stays useful (below `32 r^2`). Rings at all
    /// scales jointly exhaust the complement of the point.
    fn exclusion_around(bx: &BoxDomain, x: &DyVec, max_level: u64) -> ClosedName {
        let bx = bx.clone();
        let x = x.clone();
        ClosedName::from_stages(move |s| {
            let mut balls = Vec::new();
            for level in 0..=s.min(max_level) {
                let r = Dyadic::pow2(-(level as i64));
                let reach = r.scale_pow2(3); // 8r window around x
                let ring_lo = bx.clamp(&DyVec(
                    x.0.iter().map(|c| c - &reach).collect(),
                ));
                let ring_hi = bx.clamp(&DyVec(
                    x.0.iter().map(|c| c + &reach).collect(),
                ));
                let ring = BoxDomain::new(ring_lo, ring_hi).unwrap();
                let e = level as i64 + 1;
                let count = lattice_count(&ring, e);
                for i in 0..count {
                    let c = lattice_point(&ring, e, i);
                    let d_sq = c.dist_sq(&x);
                    let r_sq = &r * &r;
                    if d_sq > r_sq.scale_pow2(1) && d_sq <= r_sq.scale_pow2(5) {
                        balls.push(Ball {
                            center: c,
                            radius: r.clone(),
                        });
                    }
                }
            }
            balls
        })
    }

    #[test]
    fn unique_choice_recovers_point() {
        let bx = BoxDomain::unit(2);
        let target = DyVec(vec![dy(1, 1), dy(1, 2)]);
        let a = exclusion_around(&bx, &target, 10);
        let got = unique_choice_probe(&a, &bx, 6, 64).expect("must converge");
        assert!(got.dist_sq(&target) <= Dyadic::pow2(-12));
    }

    #[test]
    fn unique_choice_origin_interval() {
        let bx = BoxDomain::unit(1);
        let target = DyVec(vec![Dyadic::zero()]);
        let a = exclusion_around(&bx, &target, 14);
        let name = unique_choice_compact(&a, &bx);
        let q = name.query(8);
        assert!(q.dist_sq(&target) <= Dyadic::pow2(-16));
    }

    #[test]
    fn unique_choice_diverges_on_interval() {
        // A = [0.2, 0.4] is not a singleton: exclusions only outside it.
        // The stream saturates at level 10, so a short probe already shows
        // the persistent spread that a longer budget would keep showing.
        let bx = BoxDomain::unit(1);
        let seg_lo = dy(3277, 14); // ~0.20001
        let seg_hi = dy(6553, 14); // ~0.39996
        let a = ClosedName::from_stages(move |s| {
            let mut balls = Vec::new();
            for level in 1..=s.min(10) {
                let r = Dyadic::pow2(-(level as i64));
                let step = r.scale_pow2(-1);
                let mut t = Dyadic::zero();
                while t <= Dyadic::one() {
                    // exact distance of t to the segment
                    let near = t.clamped(&seg_lo, &seg_hi);
                    let d = (&t - &near).abs();
                    if &d * &d > (&r * &r).scale_pow2(1) {
                        balls.push(Ball {
                            center: DyVec(vec![t.clone()]),
                            radius: r.clone(),
                        });
                    }
                    t = &t + &step;
                }
            }
            balls
        });
        // survivors stay spread across ~[0.2, 0.4], never in a 2^-4 ball
        assert_eq!(unique_choice_probe(&a, &bx, 4, 40), None);
    }

    #[test]
    fn dist_bounds_on_interval() {
        // A = [1/4, 3/4] inside [0,1]; x = 0; d(x, A) = 1/4
        let sub = BoxDomain::interval(dy(1, 2), dy(3, 2)).unwrap();
        // negative information: balls exhausting [0,1] \ [1/4,3/4]
        let a = ClosedName::from_stages(move |s| {
            let mut balls = Vec::new();
            for level in 2..=(s + 2).min(14) {
                let r = Dyadic::pow2(-(level as i64));
                let mut c = Dyadic::zero();
                while c <= Dyadic::one() {
                    if &c + &r <= dy(1, 2) || &c - &r >= dy(3, 2) {
                        balls.push(Ball {
                            center: DyVec(vec![c.clone()]),
                            radius: r.clone(),
                        });
                    }
                    c = &c + &r;
                }
            }
            balls
        });
        let dense = DenseSeq::box_lattice(&sub);
        let x = VecName::constant(DyVec(vec![Dyadic::zero()]));

        let lower = dist_lower_from_closed(&a, &x);
        let upper = dist_upper_from_dense(&dense, &x);
        // sandwich at a late stage
        let l = lower.at(14);
        let u = upper.at(14);
        assert!(l <= dy(1, 2) && dy(1, 2) <= u);
        assert!(&u - &l <= dy(1, 3));

        let d = dist_located(&a, &dense, &x);
        assert_close(&d.query(8), &dy(1, 2), 8);
    }

    #[test]
    fn dist_trivial_cases() {
        let x_in = VecName::constant(DyVec(vec![dy(1, 1)]));
        // no information: lower name stays at 0
        let l = dist_lower_from_closed(&ClosedName::trivial(), &x_in);
        assert_eq!(l.at(20), Dyadic::zero());
        // single dense point c: upper converges to |x - c|
        let c = DyVec(vec![dy(3, 2)]);
        let u = dist_upper_from_dense(&DenseSeq::from_points(vec![c]), &x_in);
        assert_close(&u.at(20), &dy(1, 2), 10);
    }

    #[test]
    fn polytope_distance_matches_clamp() {
        // A = [1/4, 3/4] x [0, 1/2] expressed as unit box + cuts
        let bx = BoxDomain::unit(2);
        let cuts = vec![
            HalfSpace::new(DyVec::from_ints(&[-1, 0]), dy(1, 2)).unwrap(), // x1 >= 1/4
            HalfSpace::new(DyVec::from_ints(&[1, 0]), dy(-3, 2)).unwrap(), // x1 <= 3/4
            HalfSpace::new(DyVec::from_ints(&[0, 1]), dy(-1, 1)).unwrap(), // x2 <= 1/2
        ];
        let x = VecName::constant(DyVec::from_ints(&[0, 1]));
        let d = dist_name_to_polytope(&bx, &cuts, &x);
        // clamp oracle: nearest point (1/4, 1/2), distance sqrt(1/16 + 1/4)
        let exact_sq = &dy(1, 4) + &dy(1, 2);
        let oracle = exact_sq.sqrt_lower_to(20);
        assert_close(&d.query(10), &oracle, 9);
    }

    #[test]
    fn eta_hilbert_values() {
        // eta(2) = 1
        let eta2 = eta_hilbert(&RealName::constant(Dyadic::from_int(2)));
        assert_close(&eta2.query(12), &Dyadic::one(), 12);
        // eta(1) = 1 - sqrt(3)/2, against an integer-sqrt oracle at 40 bits
        let root3 = Dyadic::from_int(3).sqrt_lower_to(40);
        let oracle = &Dyadic::one() - &root3.scale_pow2(-1);
        let eta1 = eta_hilbert(&RealName::constant(Dyadic::one()));
        assert_close(&eta1.query(20), &oracle, 19);
    }

    #[test]
    fn eta_dominates_eps_sq_over_8() {
        // justifies mu(n) = 2n + 3
        for k in 0..=10i64 {
            let eps = Dyadic::pow2(-k);
            let eta = eta_hilbert(&RealName::constant(eps.clone()));
            let lower = (&eps * &eps).scale_pow2(-3);
            let q = eta.query(2 * k as u32 + 8);
            assert!(
                &q + &Dyadic::pow2(-2 * k - 8) >= lower,
                "eta(2^-{k}) >= eps^2/8 fails"
            );
            assert!(Dyadic::pow2(-(mu_hilbert(k as u32) as i64)) <= lower);
        }
    }

    #[test]
    fn cube_embed_geometric_point() {
        // x(k) = 2^-k, n = 3: prefix (1, 1/2, ..., 1/16), tail <= 2^-4
        let (prefix, cert) = cube_embed_strong(&CubePoint::top(), 3);
        assert_eq!(cert.prefix_len, 5);
        assert_eq!(prefix.len(), 5);
        for (k, v) in prefix.iter().enumerate() {
            assert_close(v, &Dyadic::pow2(-(k as i64)), 8);
        }
        // geometric tail oracle: sum_{k > 4} 4^-k = 4^-4 / 3 <= (2^-4)^2
        assert_eq!(cert.tail_l2_bound, Dyadic::pow2(-4));
        let tail_sq_oracle = Dyadic::div_to(&Dyadic::pow2(-8), &Dyadic::from_int(3), 30);
        assert!(tail_sq_oracle <= &cert.tail_l2_bound * &cert.tail_l2_bound);
    }

    #[test]
    fn cube_embed_zero_and_rational() {
        let (prefix, _) = cube_embed_strong(&CubePoint::origin(), 4);
        assert!(prefix.iter().all(|v| v.is_zero()));

        // x(0) = 1/3, rest 0
        let x = CubePoint::from_fn(|k| {
            if k == 0 {
                RealName::from_fn(|n| Dyadic::div_to(&Dyadic::one(), &Dyadic::from_int(3), n + 1))
            } else {
                RealName::constant(Dyadic::zero())
            }
        });
        let (prefix, _) = cube_embed_strong(&x, 10);
        let third = Dyadic::div_to(&Dyadic::one(), &Dyadic::from_int(3), 30);
        assert_close(&prefix[0], &third, 20);
        assert!(prefix[1..].iter().all(|v| v.abs() <= Dyadic::pow2(-20)));
    }

    #[test]
    #[should_panic(expected = "outside its envelope")]
    fn cube_embed_rejects_envelope_violation() {
        let bad = CubePoint::from_fn(|_| RealName::constant(Dyadic::from_int(2)));
        let _ = cube_embed_strong(&bad, 2);
    }

    #[test]
    fn cube_tail_bound_symbolic() {
        // sqrt(sum_{k>N} 4^-k) = 2^-N / sqrt(3) <= 2^-N for N <= 20
        for n in 0..=20i64 {
            let tail_sq = Dyadic::div_to(&Dyadic::pow2(-2 * n), &Dyadic::from_int(3), 60);
            assert!(tail_sq <= Dyadic::pow2(-2 * n));
        }
    }
}
