//! The algebra of Lipschitz maps on convex domains: half-space and box
//! projections, weighted combinations with a common fixed point set,
//! projecting back into the domain, firmly nonexpansive wrapping, the
//! modulus-of-uniqueness projection onto located convex sets, and the
//! Lipschitz pseudocontraction on the unit disc.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dyadic::{DyVec, Dyadic};
use crate::error::CoreError;
use crate::precision;
use crate::real::{Prec, RealName, Stage};
use crate::spaces::{BoxDomain, HalfSpace, LocatedSet, ProjectionParams, VecName};

/// Where a map promises to send its inputs.
#[derive(Clone, Debug)]
pub enum MapDomain {
    /// No containment promise; the map acts on all of R^d.
    Ambient(usize),
    /// Self-map of an axis-aligned box.
    Box(BoxDomain),
    /// Self-map of the closed ball of the given radius about the origin.
    Ball(usize, Dyadic),
}

impl MapDomain {
    pub fn dim(&self) -> usize {
        match self {
            MapDomain::Ambient(d) => *d,
            MapDomain::Box(b) => b.dim(),
            MapDomain::Ball(d, _) => *d,
        }
    }

    /// Exact squared distance from a dyadic point to the domain
    /// (zero for ambient domains).
    pub fn escape_sq(&self, p: &DyVec) -> Dyadic {
        match self {
            MapDomain::Ambient(_) => Dyadic::zero(),
            MapDomain::Box(b) => p.dist_sq(&b.clamp(p)),
            MapDomain::Ball(_, r) => {
                let nsq = p.norm_sq();
                let r_sq = r * r;
                if nsq <= r_sq {
                    Dyadic::zero()
                } else {
                    // (||p|| - r)^2 <= ||p||^2 - r^2 for ||p|| >= r; the
                    // coarser bound is fine for escape detection
                    &nsq - &r_sq
                }
            }
        }
    }

    /// A dyadic bound on `sup { ||x|| + 1 : x in domain }`, when the
    /// domain is bounded.
    pub fn norm_bound(&self) -> Option<Dyadic> {
        match self {
            MapDomain::Ambient(_) => None,
            MapDomain::Box(b) => Some(b.norm_bound()),
            MapDomain::Ball(_, r) => Some(r + &Dyadic::one()),
        }
    }
}

/// An evaluable map of a convex domain with a declared Lipschitz bound:
/// `eval(x, n)` returns a dyadic point within `2^-n` of `f(x)`.
#[derive(Clone)]
pub struct MapName {
    domain: MapDomain,
    lipschitz: Dyadic,
    eval: Arc<dyn Fn(&VecName, Prec) -> DyVec + Send + Sync>,
}

impl MapName {
    pub fn new<F>(domain: MapDomain, lipschitz: Dyadic, eval: F) -> Self
    where
        F: Fn(&VecName, Prec) -> DyVec + Send + Sync + 'static,
    {
        MapName {
            domain,
            lipschitz,
            eval: Arc::new(eval),
        }
    }

    pub fn identity(domain: MapDomain) -> Self {
        MapName::new(domain, Dyadic::one(), |x, n| x.query(n))
    }

    pub fn constant(domain: MapDomain, value: DyVec) -> Self {
        MapName::new(domain, Dyadic::zero(), move |_, _| value.clone())
    }

    pub fn domain(&self) -> &MapDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn lipschitz(&self) -> &Dyadic {
        &self.lipschitz
    }

    pub fn eval(&self, x: &VecName, n: Prec) -> DyVec {
        (self.eval)(x, n)
    }

    /// Evaluation at an exact dyadic point.
    pub fn eval_point(&self, x: &DyVec, n: Prec) -> DyVec {
        self.eval(&VecName::constant(x.clone()), n)
    }

    /// The image `f(x)` as a point name.
    pub fn apply(&self, x: &VecName) -> VecName {
        let f = self.clone();
        let x = x.clone();
        VecName::from_fn(self.dim(), move |n| f.eval(&x, n))
    }
}

/// Metric projection onto a rational half-space, `p = x - a^+ / |n|^2 * n`
/// where `a` is the membership margin. A zero normal is decided exactly on
/// the dyadic data and yields the identity.
pub fn project_halfspace(h: &HalfSpace) -> MapName {
    let h = h.clone();
    let dim = h.dim();
    MapName::new(MapDomain::Ambient(dim), Dyadic::one(), move |x, n| {
        let q = x.query(n + 2);
        project_halfspace_exactish(&h, &q, n + 2)
    })
}

/// Shared kernel: projects a dyadic point, with error below `2^-n`.
fn project_halfspace_exactish(h: &HalfSpace, q: &DyVec, n: Prec) -> DyVec {
    if h.is_degenerate() {
        return q.clone();
    }
    let margin = h.margin_at(q);
    if !margin.is_positive() {
        return q.clone();
    }
    let nsq = h.normal().norm_sq();
    // ||normal|| <= 2^b
    let b = nsq.ceil_log2().map_or(0, |l| (l + 1).div_euclid(2)).max(0);
    let beta = Dyadic::div_to(&margin, &nsq, n + 1 + b as u32);
    q.sub(&h.normal().scale(&beta))
}

/// Componentwise clamp onto a box: the Hilbert metric projection onto an
/// axis-aligned box, exact on dyadics.
pub fn project_box(k: &BoxDomain) -> MapName {
    let k = k.clone();
    MapName::new(
        MapDomain::Box(k.clone()),
        Dyadic::one(),
        move |x, n| k.clamp(&x.query(n)),
    )
}

/// A countable sequence of maps feeding a weighted combination.
#[derive(Clone)]
pub struct MapSeq {
    get: Arc<dyn Fn(u32) -> MapName + Send + Sync>,
}

impl MapSeq {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(u32) -> MapName + Send + Sync + 'static,
    {
        MapSeq { get: Arc::new(f) }
    }

    /// Finite list repeated cyclically (so the weights of every listed map
    /// sum to a positive value and the total weight stays one).
    pub fn cycled(maps: Vec<MapName>) -> Result<Self, CoreError> {
        if maps.is_empty() {
            return Err(CoreError::EmptyIntersectionProbe);
        }
        let maps = Arc::new(maps);
        Ok(MapSeq::from_fn(move |k| {
            maps[k as usize % maps.len()].clone()
        }))
    }

    /// Finite list padded with the identity beyond its end.
    pub fn padded(maps: Vec<MapName>, domain: MapDomain) -> Result<Self, CoreError> {
        if maps.is_empty() {
            return Err(CoreError::EmptyIntersectionProbe);
        }
        let maps = Arc::new(maps);
        Ok(MapSeq::from_fn(move |k| {
            maps.get(k as usize)
                .cloned()
                .unwrap_or_else(|| MapName::identity(domain.clone()))
        }))
    }

    pub fn get(&self, k: u32) -> MapName {
        (self.get)(k)
    }
}

/// The weighted combination `sum_k 2^(-k-1) f_k` of nonexpansive maps with
/// a common domain: nonexpansive again, and its fixed point set is the
/// intersection of the individual ones (when that intersection is
/// nonempty, which is the caller's promise).
///
/// Evaluation at precision `n` truncates after `n + ceil log2 B + 2`
/// terms, evaluating term `k` at precision `n + k + 2`; the dropped tail
/// is below `2^-N * B` where `B` bounds norms over the domain.
pub fn bruck_combine(seq: &MapSeq, domain: MapDomain, norm_bound: &Dyadic) -> MapName {
    let seq = seq.clone();
    let b = norm_bound.clone();
    let dim = domain.dim();
    MapName::new(domain, Dyadic::one(), move |x, n| {
        let cutoff = precision::series_cutoff(n, &b);
        let mut acc = DyVec::zeros(dim);
        for k in 0..cutoff {
            let term = seq.get(k).eval(x, precision::series_term(n, k));
            acc = acc.add(&term.scale(&Dyadic::pow2(-(k as i64) - 1)));
        }
        acc.round_to(precision::vec_coord(n + 2, dim))
    })
}

/// `P_K ∘ g`: pushes a nonexpansive map with values in the ambient space
/// back into the convex domain of `pk` without changing its fixed points
/// (`pk` must be a metric projection and `g` must have one).
pub fn project_back_compose(pk: &MapName, g: &MapName) -> MapName {
    let (pk2, g2) = (pk.clone(), g.clone());
    MapName::new(pk.domain.clone(), g.lipschitz.clone(), move |x, n| {
        let y = g2.eval(x, n + 1);
        pk2.eval(&VecName::constant(y), n + 1)
    })
}

/// The firmly nonexpansive wrap `f = (id + g) / 2`, with the same fixed
/// points as `g`.
pub fn firmly_wrap(g: &MapName) -> MapName {
    let g2 = g.clone();
    let lip = (&g.lipschitz + &Dyadic::one()).scale_pow2(-1);
    MapName::new(g.domain.clone(), lip, move |x, n| {
        let q = x.query(n + 1);
        let y = g2.eval(x, n + 1);
        q.add(&y).scale_pow2(-1)
    })
}

/// Name of the residual `||f(x) - x||`.
pub fn residual(f: &MapName, x: &VecName) -> RealName {
    let f = f.clone();
    let x = x.clone();
    RealName::from_fn(move |n| {
        let y = f.eval(&x, n + 2);
        let q = x.query(n + 2);
        y.sub(&q).norm_lower_to(n + 2)
    })
}

/// The computable Lipschitz pseudocontraction on the unit disc of R^2
/// (Lipschitz constant 5, unique fixed point 0, not nonexpansive):
/// `x + x_perp` inside radius 1/2 and `x/||x|| - x + x_perp` outside,
/// with both branches agreeing on the seam, so resolving the branch on a
/// dyadic approximation of the input is sound.
pub fn chidume_mutangadura_map() -> MapName {
    MapName::new(
        MapDomain::Ball(2, Dyadic::one()),
        Dyadic::from_int(5),
        |x, n| {
            let q = x.query(n + 4);
            let nsq = q.norm_sq();
            let perp = DyVec(alloc::vec![-&q.0[1], q.0[0].clone()]);
            if nsq <= Dyadic::ratio_pow2(1, 2) {
                // inner branch: x + x_perp, exact on dyadics
                q.add(&perp)
            } else {
                // outer branch: x/||x|| - x + x_perp; the norm is >= 1/2
                // here, so the quotient loses few bits
                let norm = nsq.sqrt_lower_to(n + 8);
                let unit = DyVec(
                    q.0.iter()
                        .map(|c| Dyadic::div_to(c, &norm, n + 4))
                        .collect(),
                );
                unit.sub(&q).add(&perp)
            }
        },
    )
}

/// Metric projection onto a located convex set by modulus of uniqueness:
/// searches the dense sequence in enumeration order and accepts the first
/// point whose distance to `x` is certified within `delta` of `d(x, K)`,
/// where `delta` is chosen so that any two such near-minimizers (hence
/// the accepted point and the true projection) are `2^-n`-close.
///
/// The returned point satisfies `||p - P_K(x)|| < 2^-n`.
pub fn project_located_convex(
    set: &LocatedSet,
    x: &VecName,
    params: &ProjectionParams,
    n: Prec,
    stage_budget: Stage,
) -> Result<DyVec, CoreError> {
    let t = n + 1;
    let d_name = set.dist_to(x);
    // power-of-two upper estimate of d(x, K), floored at 2^-(t+2)
    let d_coarse = &d_name.query(t + 3) + &Dyadic::pow2(-(t as i64) - 3);
    let d_cap = Dyadic::from_int(params.dist_bound.max(1) as i64 + 1);
    let d_up = Dyadic::min(&Dyadic::max(&d_coarse, &Dyadic::pow2(-(t as i64) - 2)), &d_cap);
    let d_pow_exp = d_up.ceil_log2().unwrap_or(-(t as i64) - 2);
    // delta = 2^(-2t-5) / 2^ceil(log2 d): parallelogram-law modulus
    let delta = Dyadic::pow2(-2 * (t as i64) - 5 - d_pow_exp);
    for s in 0..=stage_budget {
        let p = precision::stage_prec(s);
        let d_lo = &d_name.query(p) - &Dyadic::pow2(-(p as i64));
        let accept_below = &d_lo + &delta;
        let qx = x.query(p);
        let slack = Dyadic::pow2(-(p as i64) + 1);
        for k in 0..=s {
            let cand = set.dense().point(k);
            let dist_up = &cand.query(p).sub(&qx).norm_upper_to(p) + &slack;
            if dist_up < accept_below {
                return Ok(cand.query(t + 2));
            }
        }
    }
    Err(CoreError::BudgetExhausted {
        budget: stage_budget,
    })
}

/// Convenience wrapper packaging the Lipschitz audit used by the tests:
/// checks `||f(p) - f(q)|| <= L ||p - q|| + 2^(-k+1)` at precision `k`.
pub fn lipschitz_within(f: &MapName, p: &DyVec, q: &DyVec, k: Prec) -> bool {
    let fp = f.eval_point(p, k);
    let fq = f.eval_point(q, k);
    let lhs = fp.sub(&fq).norm_lower_to(k + 2);
    let rhs = &(f.lipschitz() * &p.sub(q).norm_upper_to(k + 2)) + &Dyadic::pow2(-(k as i64) + 1);
    lhs <= rhs
}
