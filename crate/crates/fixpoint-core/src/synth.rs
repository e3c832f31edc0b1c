//! Both directions of the fixed-point-set characterisation, plus the
//! counterexample families: interval and polytope maps with prescribed
//! fixed point sets, the anytime enumerator of half-spaces containing a
//! map's fixed point set, Specker-style interval endpoints driven by
//! firing tables, the coordinatewise family on the Hilbert cube, and the
//! weak-point map whose norm encodes a monotone limit.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::{DyVec, Dyadic};
use crate::error::CoreError;
use crate::nonexp::{
    bruck_combine, firmly_wrap, project_back_compose, project_box, project_halfspace, residual,
    MapDomain, MapName, MapSeq,
};
use crate::real::{soft_compare, LowerName, Prec, RealName, Side, Stage, UpperName};
use crate::spaces::{
    box_lattice_point, hyperplane_projection, BoxDomain, CubePoint, DenseSeq, HalfSpace, VecName,
    WeakPoint,
};

/// A monotone firing table: `fired(index, stage)` models "the machine
/// halts on this index within `stage` steps". Once fired, always fired.
#[derive(Clone)]
pub struct Enumeration {
    fired: Arc<dyn Fn(u32, Stage) -> bool + Send + Sync>,
}

impl Enumeration {
    /// Wraps a raw table that is monotone in the stage by construction.
    pub fn from_monotone<F>(f: F) -> Self
    where
        F: Fn(u32, Stage) -> bool + Send + Sync + 'static,
    {
        Enumeration { fired: Arc::new(f) }
    }

    /// Finite table of `(index, firing stage)` pairs.
    pub fn from_table(entries: &[(u32, Stage)]) -> Self {
        let entries: Vec<(u32, Stage)> = entries.to_vec();
        Enumeration::from_monotone(move |i, s| {
            entries.iter().any(|&(ei, es)| ei == i && es <= s)
        })
    }

    pub fn empty() -> Self {
        Enumeration::from_monotone(|_, _| false)
    }

    pub fn fired(&self, index: u32, stage: Stage) -> bool {
        (self.fired)(index, stage)
    }

    /// First stage at which the index fires, scanning up to the budget.
    pub fn first_firing(&self, index: u32, budget: Stage) -> Option<Stage> {
        (0..=budget).find(|&s| self.fired(index, s))
    }
}

/// Sanity check for interval stage data: endpoints clipped to `[0,1]`
/// must not cross at any probed stage.
pub fn check_interval_stages(
    a: &LowerName,
    b: &UpperName,
    stages: Stage,
) -> Result<(), CoreError> {
    for s in 0..=stages {
        let (lo, hi) = clipped_stage(a, b, s);
        if lo > hi {
            return Err(CoreError::InconsistentStages { stage: s });
        }
    }
    Ok(())
}

fn clipped_stage(a: &LowerName, b: &UpperName, s: Stage) -> (Dyadic, Dyadic) {
    let zero = Dyadic::zero();
    let one = Dyadic::one();
    (a.at(s).clamped(&zero, &one), b.at(s).clamped(&zero, &one))
}

/// The nonexpansive monotone self-map of `[0,1]` with fixed point set
/// `[sup a_n, inf b_n]`: the weighted series `sum_n 2^(-n-1) clamp_[a_n, b_n]`,
/// truncated at `n + 2` terms per precision `n` (values stay in `[0,1]`,
/// so the dropped tail is below `2^-(n+2)`).
///
/// Stage values are clipped into `[0,1]`; a stage whose clipped endpoints
/// cross makes the evaluation panic, so run [`check_interval_stages`]
/// first when the stream is untrusted.
pub fn interval_map(a: &LowerName, b: &UpperName) -> MapName {
    let (a, b) = (a.clone(), b.clone());
    let unit = BoxDomain::unit(1);
    MapName::new(MapDomain::Box(unit), Dyadic::one(), move |x, n| {
        let q = x.query(n + 2).0[0].clamped(&Dyadic::zero(), &Dyadic::one());
        let mut acc = Dyadic::zero();
        for k in 0..(n as u64 + 2) {
            let (lo, hi) = clipped_stage(&a, &b, k);
            assert!(lo <= hi, "interval endpoints cross at stage {k}");
            acc = &acc + &q.clamped(&lo, &hi).scale_pow2(-(k as i64) - 1);
        }
        DyVec(vec![acc])
    })
}

/// Left-r.e. / right-r.e. interval endpoints driven by firing tables:
/// `a = 1/4 + sum 2^(-k-3)` over indices fired in `e1`, and symmetrically
/// `b = 3/4 - ...` for `e2`. The weights guarantee
/// `1/4 <= a <= 1/2 <= b <= 3/4` whatever fires, so the pair never crosses.
/// At stage `s` only indices up to `s` are inspected.
pub fn specker_endpoints(e1: &Enumeration, e2: &Enumeration) -> (LowerName, UpperName) {
    let (e1, e2) = (e1.clone(), e2.clone());
    let lower = LowerName::from_monotone(move |s| {
        &Dyadic::ratio_pow2(1, 2) + &fired_weight(&e1, s)
    });
    let upper = UpperName::from_monotone(move |s| {
        &Dyadic::ratio_pow2(3, 2) - &fired_weight(&e2, s)
    });
    (lower, upper)
}

fn fired_weight(e: &Enumeration, s: Stage) -> Dyadic {
    let mut acc = Dyadic::zero();
    for k in 0..=s.min(200) {
        if e.fired(k as u32, s) {
            acc = &acc + &Dyadic::pow2(-(k as i64) - 3);
        }
    }
    acc
}

/// A box together with half-spaces cutting it; the intersection must meet
/// the box (probed on corners and lattice points at build time).
#[derive(Clone, Debug)]
pub struct PolytopeSpec {
    boxk: BoxDomain,
    halfspaces: Vec<HalfSpace>,
}

impl PolytopeSpec {
    pub fn new(boxk: BoxDomain, halfspaces: Vec<HalfSpace>) -> Result<Self, CoreError> {
        for h in &halfspaces {
            if h.dim() != boxk.dim() {
                return Err(CoreError::DimensionMismatch {
                    expected: boxk.dim(),
                    got: h.dim(),
                });
            }
        }
        crate::spaces::polytope_feasible_point(&boxk, &halfspaces)?;
        Ok(PolytopeSpec { boxk, halfspaces })
    }

    pub fn boxk(&self) -> &BoxDomain {
        &self.boxk
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }
}

/// The nonexpansive self-map of the box whose fixed point set is
/// `box ∩ (∩_k h_k)`: the box projection composed with the weighted
/// combination of the half-space projections (cycled, so the weights of a
/// finite list still sum to one). An empty list yields the identity.
pub fn polytope_map(spec: &PolytopeSpec) -> MapName {
    let dom = MapDomain::Box(spec.boxk.clone());
    if spec.halfspaces.is_empty() {
        return MapName::identity(dom);
    }
    let projections: Vec<MapName> = spec.halfspaces.iter().map(project_halfspace).collect();
    let seq = MapSeq::cycled(projections).expect("nonempty list");
    let combined = bruck_combine(&seq, MapDomain::Ambient(spec.boxk.dim()), &spec.boxk.norm_bound());
    project_back_compose(&project_box(&spec.boxk), &combined)
}

/// How a cube coordinate resolved under the two firing tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordinateBranch {
    /// First table fired at this stage: the coordinate contracts to 0.
    Alpha(Stage),
    /// Second table fired: the coordinate contracts to its top value.
    Beta(Stage),
    /// Neither fired within the inspected stages.
    Pending,
}

/// The coordinatewise family on the Hilbert cube built from two disjoint
/// firing tables: coordinate `n` applies `(1 - 2^-i) t` once the first
/// table fires at stage `i`, the mirrored contraction towards the top
/// once the second fires, and the identity while neither has fired. The
/// exported maps are the firmly nonexpansive wraps.
#[derive(Clone)]
pub struct CubeFamily {
    alpha: Enumeration,
    beta: Enumeration,
}

impl core::fmt::Debug for CubeFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("CubeFamily")
    }
}

impl CubeFamily {
    /// Lazy variant: disjointness is the caller's promise, checked at
    /// every resolution (a violation panics).
    pub fn new(alpha: Enumeration, beta: Enumeration) -> Self {
        CubeFamily { alpha, beta }
    }

    /// Finite tables with an eager disjointness check.
    pub fn from_tables(
        alpha: &[(u32, Stage)],
        beta: &[(u32, Stage)],
    ) -> Result<Self, CoreError> {
        for &(i, _) in alpha {
            if beta.iter().any(|&(j, _)| j == i) {
                return Err(CoreError::DisjointFiringViolated { index: i });
            }
        }
        Ok(CubeFamily::new(
            Enumeration::from_table(alpha),
            Enumeration::from_table(beta),
        ))
    }

    /// Simulates both tables for `steps` stages on one index.
    pub fn resolve(&self, index: u32, steps: Stage) -> CoordinateBranch {
        let a = self.alpha.first_firing(index, steps);
        let b = self.beta.first_firing(index, steps);
        match (a, b) {
            (Some(_), Some(_)) => panic!("both enumerations fired on index {index}"),
            (Some(i), None) => CoordinateBranch::Alpha(i),
            (None, Some(i)) => CoordinateBranch::Beta(i),
            (None, None) => CoordinateBranch::Pending,
        }
    }

    /// The raw (unwrapped) coordinate map on `[0, 2^-index]`: evaluation
    /// at precision `m` simulates the tables for `m` stages; while neither
    /// fires the identity is output, which is sound because a branch
    /// firing at stage `i > m` moves points by at most `2^-i`.
    pub fn coordinate_map_unwrapped(&self, index: u32) -> MapName {
        let fam = self.clone();
        let top = Dyadic::pow2(-(index as i64));
        let dom = BoxDomain::interval(Dyadic::zero(), top.clone()).expect("valid interval");
        MapName::new(MapDomain::Box(dom), Dyadic::one(), move |x, m| {
            let q = x.query(m + 3).0[0].clamped(&Dyadic::zero(), &top);
            let v = match fam.resolve(index, m as Stage) {
                CoordinateBranch::Alpha(i) => {
                    // (1 - 2^-i) t, scaled form of g_i
                    &q - &q.scale_pow2(-(i as i64))
                }
                CoordinateBranch::Beta(i) => {
                    // 2^-(index+i) + (1 - 2^-i) t, scaled form of h_i
                    &(&Dyadic::pow2(-(index as i64) - (i as i64)) + &q)
                        - &q.scale_pow2(-(i as i64))
                }
                CoordinateBranch::Pending => q,
            };
            DyVec(vec![v])
        })
    }

    /// The firmly nonexpansive wrapped coordinate map `(id + g)/2`.
    pub fn coordinate_map(&self, index: u32) -> MapName {
        firmly_wrap(&self.coordinate_map_unwrapped(index))
    }

    /// Applies the wrapped map coordinatewise to a cube point.
    pub fn apply(&self, x: &CubePoint) -> CubePoint {
        let fam = self.clone();
        let x = x.clone();
        CubePoint::from_fn(move |k| {
            let map = fam.coordinate_map(k);
            let coord = x.coord(k);
            RealName::from_fn(move |n| {
                map.eval(&VecName::from_coords(vec![coord.clone()]), n).0[0].clone()
            })
        })
    }

    /// The exact fixed value of a resolved coordinate (for finite
    /// tables): 0 after the first table fires, the top after the second,
    /// and the start value while pending.
    pub fn fixed_coordinate(&self, index: u32, start: &Dyadic, sim_budget: Stage) -> Dyadic {
        match self.resolve(index, sim_budget) {
            CoordinateBranch::Alpha(_) => Dyadic::zero(),
            CoordinateBranch::Beta(_) => Dyadic::pow2(-(index as i64)),
            CoordinateBranch::Pending => start.clone(),
        }
    }

    /// The separating decision procedure: run the tests `x > 0` and
    /// `x < top` concurrently on a name of the coordinate's fixed point
    /// and put the index into the separating set iff the second test wins.
    /// Indices fired by the first table always land inside, indices fired
    /// by the second always outside.
    pub fn classify(&self, index: u32, fixed: &RealName) -> bool {
        let top = Dyadic::pow2(-(index as i64));
        matches!(
            soft_compare(fixed, &Dyadic::zero(), &top),
            Side::BelowB
        )
    }
}

/// The weak-topology point whose coordinates accumulate a monotone
/// sequence from `[0,1]`: `a(0) = x(0)`, `a(n+1) = sqrt(x(n+1)^2 - x(n)^2)`,
/// so the partial sums of `a(k)^2` telescope to `x(n)^2` exactly and the
/// l2-norm of the point is the limit of the sequence. A monotonicity
/// violation certifies as a negative square-root argument and panics.
pub fn tmap<F>(x: F) -> WeakPoint
where
    F: Fn(u64) -> RealName + Send + Sync + 'static,
{
    let x = Arc::new(x);
    WeakPoint::from_fn(Dyadic::one(), move |k| {
        if k == 0 {
            x(0)
        } else {
            let hi = x(k as u64);
            let lo = x(k as u64 - 1);
            hi.mul(&hi).sub(&lo.mul(&lo)).sqrt()
        }
    })
}

/// The canonical enumeration of rational half-spaces: denominator
/// exponents `e = 0, 1, 2, ...`; within each exponent, normal coordinate
/// numerators and the offset numerator in lexicographic order. Entries
/// whose numerators are all even already appeared at a smaller exponent
/// and are skipped, as are zero normals.
#[derive(Clone)]
pub struct CanonicalHalfspaces {
    dim: usize,
    offset_bound: i64,
    e: i64,
    cursor: Vec<i64>, // normal numerators followed by the offset numerator
    fresh: bool,
}

impl CanonicalHalfspaces {
    pub fn new(dim: usize, offset_bound: i64) -> Self {
        CanonicalHalfspaces {
            dim,
            offset_bound: offset_bound.max(1),
            e: 0,
            cursor: Vec::new(),
            fresh: true,
        }
    }

    fn limits(&self) -> Vec<i64> {
        let norm_lim = 1i64 << self.e;
        let off_lim = self.offset_bound << self.e;
        let mut lims = vec![norm_lim; self.dim];
        lims.push(off_lim);
        lims
    }

    fn advance(&mut self) -> bool {
        let lims = self.limits();
        if self.fresh {
            self.cursor = lims.iter().map(|l| -l).collect();
            self.fresh = false;
            return true;
        }
        for i in (0..self.cursor.len()).rev() {
            if self.cursor[i] < lims[i] {
                self.cursor[i] += 1;
                for j in (i + 1)..self.cursor.len() {
                    self.cursor[j] = -lims[j];
                }
                return true;
            }
        }
        // exponent block exhausted
        self.e += 1;
        self.fresh = true;
        self.advance()
    }
}

impl Iterator for CanonicalHalfspaces {
    type Item = HalfSpace;

    fn next(&mut self) -> Option<HalfSpace> {
        loop {
            if !self.advance() {
                return None;
            }
            let normal_zero = self.cursor[..self.dim].iter().all(|&c| c == 0);
            if normal_zero {
                continue;
            }
            // skip duplicates of a coarser exponent
            if self.e > 0 && self.cursor.iter().all(|&c| c % 2 == 0) {
                continue;
            }
            let normal = DyVec(
                self.cursor[..self.dim]
                    .iter()
                    .map(|&c| Dyadic::ratio_pow2(c, self.e))
                    .collect(),
            );
            let offset = Dyadic::ratio_pow2(self.cursor[self.dim], self.e);
            if let Ok(h) = HalfSpace::new(normal, offset) {
                return Some(h);
            }
        }
    }
}

/// Axis-direction candidates `± x_i <= c` with offsets on finer and finer
/// dyadic grids; the default candidate stream of the enumerator (box-face
/// normals suffice to pin the axis-aligned fixed point sets synthesised
/// here, and keep the witness searches lattice-exact).
#[derive(Clone)]
pub struct AxisHalfspaces {
    dim: usize,
    offset_bound: i64,
    e: i64,
    axis: usize,
    sign: i64,
    j: i64,
}

impl AxisHalfspaces {
    pub fn new(dim: usize, offset_bound: i64) -> Self {
        AxisHalfspaces {
            dim,
            offset_bound: offset_bound.max(1),
            e: 0,
            axis: 0,
            sign: 1,
            j: i64::MIN,
        }
    }
}

impl Iterator for AxisHalfspaces {
    type Item = HalfSpace;

    fn next(&mut self) -> Option<HalfSpace> {
        loop {
            let lim = self.offset_bound << self.e;
            if self.j == i64::MIN {
                self.j = -lim;
            } else {
                self.j += 1;
            }
            if self.j > lim {
                self.j = i64::MIN;
                if self.sign > 0 {
                    self.sign = -1;
                } else {
                    self.sign = 1;
                    self.axis += 1;
                    if self.axis == self.dim {
                        self.axis = 0;
                        self.e += 1;
                    }
                }
                continue;
            }
            // skip even numerators beyond exponent zero (already listed)
            if self.e > 0 && self.j % 2 == 0 {
                continue;
            }
            let mut normal = DyVec::zeros(self.dim);
            normal.0[self.axis] = Dyadic::from_int(self.sign);
            let offset = Dyadic::ratio_pow2(self.j, self.e);
            if let Ok(h) = HalfSpace::new(normal, offset) {
                return Some(h);
            }
        }
    }
}

/// Metric projection onto the complement region `box ∩ { margin_h >= 0 }`
/// of a half-space, in the two exactly resolvable regimes: a point already
/// on the complement side projects by box clamp (valid while the clamp
/// stays on that side), a point strictly inside `h` projects onto the
/// bounding hyperplane (valid while the result stays inside the box).
/// Both satisfy the variational inequality exactly; in the remaining
/// corner regimes `None` is returned and the caller retries elsewhere.
pub fn project_box_cap_complement(bx: &BoxDomain, h: &HalfSpace, y: &DyVec) -> Option<VecName> {
    if !h.margin_at(y).is_negative() {
        let c = bx.clamp(y);
        if !h.margin_at(&c).is_negative() {
            return Some(VecName::constant(c));
        }
        return None;
    }
    let p = hyperplane_projection(h, y)?;
    if p.in_box_exact(bx) {
        return Some(p.into_vec_name());
    }
    None
}

/// Tailored witness points for one candidate: lattice points of the
/// candidate's boundary facet (solved along its dominant axis), pushed to
/// the positive-margin side by `2^(-j-2)` along the normal. Interleaved
/// with the caller's dense backbone these keep the witness search of the
/// quantitative criterion lattice-exact for axis-aligned geometry.
fn tailored_witness(bx: &BoxDomain, h: &HalfSpace, w: u64) -> Option<VecName> {
    const J_COUNT: u64 = 28;
    let j = (w % J_COUNT) as i64 + 4;
    let g_idx = w / J_COUNT;

    // dominant axis of the normal
    let mut a_star = 0;
    for i in 1..h.dim() {
        if h.normal().0[i].abs() > h.normal().0[a_star].abs() {
            a_star = i;
        }
    }
    let nu_a = &h.normal().0[a_star];
    if nu_a.is_zero() {
        return None;
    }

    // free coordinates run over the lattice of the projected box
    let free_dims: Vec<usize> = (0..h.dim()).filter(|&i| i != a_star).collect();
    let free_point = if free_dims.is_empty() {
        DyVec(Vec::new())
    } else {
        let sub = BoxDomain::new(
            DyVec(free_dims.iter().map(|&i| bx.lo().0[i].clone()).collect()),
            DyVec(free_dims.iter().map(|&i| bx.hi().0[i].clone()).collect()),
        )
        .ok()?;
        box_lattice_point(&sub, g_idx)
    };
    if free_dims.is_empty() && g_idx > 0 {
        return None;
    }

    // solve the facet equation for the dominant coordinate:
    // nu_a * t + (offset + sum nu_i g_i) = 0
    let mut rest = h.offset().clone();
    for (slot, &i) in free_dims.iter().enumerate() {
        rest = &rest + &(&h.normal().0[i] * &free_point.0[slot]);
    }
    // facet point p: p_a = -rest / nu_a, over denominator |nu_a|
    let den = nu_a.abs();
    let sign = if nu_a.is_negative() {
        Dyadic::from_int(-1)
    } else {
        Dyadic::one()
    };
    let mut nums = vec![Dyadic::zero(); h.dim()];
    for (slot, &i) in free_dims.iter().enumerate() {
        nums[i] = &free_point.0[slot] * &den;
    }
    nums[a_star] = &(-&rest) * &sign;
    // push to the positive-margin side: + 2^(-j-2) * normal
    let shift = Dyadic::pow2(-j - 2);
    for i in 0..h.dim() {
        nums[i] = &nums[i] + &(&(&h.normal().0[i] * &shift) * &den);
    }
    let point = crate::spaces::RationalPoint::new(nums, den);
    if point.in_box_exact(bx) {
        Some(point.into_vec_name())
    } else {
        None
    }
}

/// State of one candidate's dovetailed witness search.
struct WitnessSearch {
    candidate: HalfSpace,
    next_probe: u64,
    quota: u64,
}

/// The anytime enumerator of rational half-spaces whose interior contains
/// the fixed point set of a nonexpansive self-map of a box.
///
/// Two interleaved sources: half-spaces containing the whole box in their
/// interior (inflated box faces, always sound), and candidates certified
/// through the quantitative criterion: some listed point `x` strictly on
/// the complement side has residual above `2^-n` while `P_A(f(x))` comes
/// back within `2^(-2n-3)/B` of `x`, for `A` the complement region within
/// the box. Emission order is deterministic; incompleteness exists only
/// in the limit.
pub struct FixEnumerator {
    f: MapName,
    boxk: BoxDomain,
    backbone: DenseSeq,
    b_bound: Dyadic,
    candidates: AxisHalfspaces,
    face_round: u64,
    active: Vec<WitnessSearch>,
    parked: Vec<WitnessSearch>,
    slot: u64,
    stages: Stage,
}

/// Upper bound on simultaneously searched candidates.
const MAX_ACTIVE: usize = 24;
/// Initial probe quota before a candidate is parked (revivals quadruple it).
const FIRST_QUOTA: u64 = 1 << 11;

impl FixEnumerator {
    pub fn new(f: MapName, boxk: BoxDomain, dense: DenseSeq) -> Self {
        let b_bound = boxk.norm_bound();
        let dim = boxk.dim();
        // offsets must sweep past the whole box
        let off = b_bound
            .ceil_log2()
            .map(|l| 1i64 << l.max(0).min(8))
            .unwrap_or(2);
        FixEnumerator {
            f,
            boxk,
            backbone: dense,
            b_bound,
            candidates: AxisHalfspaces::new(dim, off + 1),
            face_round: 0,
            active: Vec::new(),
            parked: Vec::new(),
            slot: 0,
            stages: 0,
        }
    }

    pub fn stages(&self) -> Stage {
        self.stages
    }

    /// Runs up to `stages` more stages, returning the half-spaces emitted.
    pub fn advance(&mut self, stages: Stage) -> Vec<HalfSpace> {
        let mut out = Vec::new();
        for _ in 0..stages {
            self.stages += 1;
            if let Some(h) = self.step() {
                out.push(h);
            }
        }
        out
    }

    fn step(&mut self) -> Option<HalfSpace> {
        let cycle = 2 + self.active.len() as u64;
        let slot = self.slot % cycle;
        self.slot += 1;
        match slot {
            0 => self.emit_face(),
            1 => self.admit_candidate(),
            i => self.advance_search((i - 2) as usize),
        }
    }

    /// L1: faces of the box pushed outward by shrinking dyadic amounts;
    /// their interiors always contain the box, hence the fixed point set.
    fn emit_face(&mut self) -> Option<HalfSpace> {
        let dim = self.boxk.dim();
        let round = self.face_round;
        self.face_round += 1;
        let per = (2 * dim) as u64;
        let j = (round / per) as i64;
        let face = (round % per) as usize;
        let axis = face / 2;
        let eps = Dyadic::pow2(-j);
        let mut normal = DyVec::zeros(dim);
        if face % 2 == 0 {
            normal.0[axis] = Dyadic::one();
            let offset = -&(&self.boxk.hi().0[axis] + &eps);
            HalfSpace::new(normal, offset).ok()
        } else {
            normal.0[axis] = Dyadic::from_int(-1);
            let offset = &self.boxk.lo().0[axis] - &eps;
            HalfSpace::new(normal, offset).ok()
        }
    }

    /// Pulls the next candidate through the decidable box filters: whole
    /// boxes in the interior are emitted outright, candidates missing the
    /// box are dropped, tangent candidates are outside the criterion's
    /// reach, and properly crossing candidates start a witness search.
    fn admit_candidate(&mut self) -> Option<HalfSpace> {
        if self.active.len() >= MAX_ACTIVE {
            return None;
        }
        if let Some(mut search) = self.parked.pop() {
            search.quota *= 4;
            self.active.push(search);
            return None;
        }
        let h = self.candidates.next()?;
        let margins: Vec<Dyadic> = self
            .boxk
            .corners()
            .iter()
            .map(|c| h.margin_at(c))
            .collect();
        let mx = margins.iter().max().cloned().unwrap_or_else(Dyadic::zero);
        let mn = margins.iter().min().cloned().unwrap_or_else(Dyadic::zero);
        if mx.is_negative() {
            // the whole box, hence the fixed point set, is interior
            return Some(h);
        }
        if !mn.is_negative() || !mx.is_positive() {
            return None;
        }
        self.active.push(WitnessSearch {
            candidate: h,
            next_probe: 0,
            quota: FIRST_QUOTA,
        });
        None
    }

    fn advance_search(&mut self, idx: usize) -> Option<HalfSpace> {
        if idx >= self.active.len() {
            return None;
        }
        let probe = self.active[idx].next_probe;
        self.active[idx].next_probe += 1;
        if probe >= self.active[idx].quota {
            let search = self.active.swap_remove(idx);
            self.parked.insert(0, search);
            return None;
        }
        let candidate = self.active[idx].candidate.clone();
        if self.run_probe(&candidate, probe) {
            self.active.swap_remove(idx);
            return Some(candidate);
        }
        None
    }

    /// Witness point `probe` of the candidate: tailored facet points
    /// interleaved with the caller's dense backbone.
    fn witness_point(&self, h: &HalfSpace, probe: u64) -> Option<VecName> {
        if probe % 2 == 0 {
            tailored_witness(&self.boxk, h, probe / 2)
        } else {
            Some(self.backbone.point(probe / 2))
        }
    }

    /// One full check of the quantitative criterion at one point. The
    /// complement region is `A = { margin >= 0 } ∩ box`, witnesses live in
    /// its interior `{ margin > 0 }`.
    fn run_probe(&self, candidate: &HalfSpace, probe: u64) -> bool {
        let x = match self.witness_point(candidate, probe) {
            Some(x) => x,
            None => return false,
        };
        // certify x strictly outside the candidate
        let margin = candidate.margin_name(&x);
        if !certify_positive(&margin, &[6, 12, 24, 40]) {
            return false;
        }
        // certify the residual and derive the strongest usable n
        let r = residual(&self.f, &x);
        let n = match derive_residual_exponent(&r, &[6, 10, 16, 24]) {
            Some(n) => n,
            None => return false,
        };
        // threshold 2^(-2n-3) / B, rounded down
        let thr = Dyadic::div_to(
            &Dyadic::pow2(-2 * (n as i64) - 3),
            &self.b_bound,
            2 * n + 10,
        );
        if !thr.is_positive() {
            return false;
        }
        let t_c = 2 * n + 10 + self.b_bound.ceil_log2().unwrap_or(1).max(1) as u32;
        let y = self.f.apply(&x).query(t_c + 2);
        let p = match project_box_cap_complement(&self.boxk, candidate, &y) {
            Some(p) => p,
            None => return false,
        };
        // ||P_A(f(x)) - x|| < thr, certified: the projection of the exact
        // f(x) sits within 2^-(t_c+2) of p's target (nonexpansiveness)
        let up = &p.query(t_c).sub(&x.query(t_c)).norm_upper_to(t_c)
            + &Dyadic::pow2(-(t_c as i64) + 2);
        up < thr
    }
}

/// Escalating certification of strict positivity of a name.
fn certify_positive(v: &RealName, schedule: &[Prec]) -> bool {
    schedule.iter().any(|&t| {
        let q = v.query(t);
        &q - &Dyadic::pow2(-(t as i64)) > Dyadic::zero()
    })
}

/// Finds the smallest `n` with a certified `residual > 2^-n`, escalating
/// the precision until the measurement dominates its own error.
fn derive_residual_exponent(r: &RealName, schedule: &[Prec]) -> Option<Prec> {
    for &t in schedule {
        let q = r.query(t);
        let v = &q - &Dyadic::pow2(-(t as i64));
        if !v.is_positive() {
            continue;
        }
        // measurement must dominate the error to pin the exponent
        if Dyadic::pow2(-(t as i64) + 3) > v {
            continue;
        }
        let f = v.floor_log2().unwrap_or(0);
        let n = (1 - f).max(1);
        return Some(n as Prec);
    }
    None
}

/// Spec-facing constructor: the anytime stream of half-spaces whose
/// interiors contain `Fix(f)`.
pub fn enumerate_excluding_halfspaces(
    f: &MapName,
    boxk: &BoxDomain,
    dense: &DenseSeq,
) -> FixEnumerator {
    FixEnumerator::new(f.clone(), boxk.clone(), dense.clone())
}
