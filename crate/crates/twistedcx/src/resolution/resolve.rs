use crate::cover_model::{Face, Tuple};
use crate::exact_linalg::{is_quasi_iso, minimize_complex, GradedMap};
use crate::functors::{twist, GlobalComplex};
use crate::par;
use crate::twisted_core::{
    check_mc, check_nondegenerate, is_weak_equivalence, sign, solve_natural, FaceMaps, LocalFamily, Morphism,
    NatEquation, NatTerm, NatUnknown, TwistedComplex,
};

use super::ResolutionError;

/// Resolved twisted complex with its comparison map to `T(P)`.
#[derive(Clone, Debug)]
pub struct ResolutionResult {
    pub resolved: TwistedComplex,
    pub comparison: Morphism,
    pub target: TwistedComplex,
    /// Tuples solved, in order, with the Čech level of each step.
    pub steps: Vec<(usize, Tuple)>,
    pub mc_valid: bool,
    pub nondegenerate: bool,
    pub weak_equivalence: bool,
}

impl ResolutionResult {
    pub fn certified(&self) -> bool {
        self.mc_valid && self.nondegenerate && self.weak_equivalence
    }
}

/// First restriction that is not a quasi-isomorphism, if any.
pub fn perfectness_violation(p: &GlobalComplex) -> Option<(Face, Face)> {
    p.sheaf.restrictions().iter().find_map(|((s, t), r)| {
        (s != t && !is_quasi_iso(r, p.d.at(*s), p.d.at(*t)).unwrap_or(false)).then_some((*s, *t))
    })
}

/// Twisted complex with constant minimal locals weakly equivalent to `T(P)`.
pub fn twisted_resolution(p: &GlobalComplex, nerve: &crate::cover_model::CoverNerve) -> Result<ResolutionResult, ResolutionError> {
    if let Some((from, to)) = perfectness_violation(p) {
        return Err(ResolutionError::NotPerfect { from, to });
    }
    let field = p.field();
    let target = twist(p, nerve);
    let n = nerve.len();

    // local models: H_i = minimal model of P({i}), φ^0_i(σ) = r(i -> σ) ∘ incl
    let mut hs = Vec::with_capacity(n);
    let mut incl = Vec::with_capacity(n);
    for i in 0..n {
        let f = Face::singleton(i);
        let mm = minimize_complex(p.sheaf.space(f), p.d.at(f)).map_err(|_| ResolutionError::Internal("d² ≠ 0".into()))?;
        hs.push(mm.space.clone());
        incl.push(mm.incl.clone());
    }
    let efam = LocalFamily::constant(nerve, field, &hs);
    let es = efam.shifted(1);
    let lfam = es.direct_sum(&target.family);

    let phi0 = |i: usize, f: Face| p.sheaf.restriction(Face::singleton(i), f).compose(&incl[i]);

    // cone datum c on L = E[1] ⊕ T(P); E-columns of c^k are [(-1)^{k-1} a^k ; φ^k]
    let parts = |i: usize, f: Face| [es.space(i, f).clone(), target.family.space(i, f).clone()];
    let mut c = Morphism::zero(field, 1);
    for t in nerve.tuples(1, Face::EMPTY) {
        let i = t[0];
        for f in nerve.star(Face::singleton(i)) {
            let [e1, s1] = parts(i, f);
            let ph = phi0(i, f).reindexed(1, 0);
            let d = target.a_at(&[i], f);
            let blocks = [(1, 1, &d), (1, 0, &ph)];
            c.add_at(&t, f, GradedMap::from_blocks(field, &[&e1, &s1], &[&e1, &s1], 1, &blocks));
        }
    }
    for t in nerve.tuples(2, Face::EMPTY) {
        for f in nerve.star(Face::of(&t)) {
            let [e1, s1] = parts(t[1], f);
            let [e0, s0] = parts(t[0], f);
            let id = target.a_at(&t, f);
            c.add_at(&t, f, GradedMap::from_blocks(field, &[&e1, &s1], &[&e0, &s0], 0, &[(1, 1, &id)]));
        }
    }

    let (elo, ehi) = efam.amplitude().unwrap_or((0, -1));
    let (plo, _) = target.family.amplitude().unwrap_or((0, -1));
    let kmax = if elo > ehi { 0 } else { (ehi - elo.min(plo) + 2).max(1) as usize };
    let mut steps = Vec::new();
    for k in 1..=kmax {
        let tuples = nerve.tuples(k + 1, Face::EMPTY);
        let solved = par::map(&tuples, |t| solve_step(&c, &lfam, &es, &target.family, t, k));
        for (t, r) in tuples.iter().zip(solved) {
            let x = r?;
            for (f, m) in x {
                let [e1, s1] = parts(*t.last().unwrap(), f);
                let m = GradedMap::from_blocks(field, &[&e1, &s1], &[lfam.space(t[0], f)], 1 - k as i32, &[(0, 0, &m)]);
                c.add_at(t, f, m);
            }
            steps.push((k, t.clone()));
        }
    }

    // read off a^k = (-1)^{k-1} (EE block) and φ^k = PE block
    let mut a = Morphism::zero(field, 1);
    let mut phi = Morphism::zero(field, 0);
    for (t, maps) in c.comps() {
        let k = t.len() as i64 - 1;
        for (f, m) in maps {
            let [e1, s1] = parts(*t.last().unwrap(), *f);
            let [e0, s0] = parts(t[0], *f);
            let ee = m.block(&[&e1, &s1], &[&e0, &s0], 0, 0);
            let se = m.block(&[&e1, &s1], &[&e0, &s0], 1, 0);
            a.add_at(t, *f, ee.reindexed(-1, -1).scale(&sign(field, k - 1)));
            phi.add_at(t, *f, se.reindexed(-1, 0));
        }
    }
    let resolved = TwistedComplex {
        family: efam,
        a,
        generalized: false,
    };
    let mc_valid = check_mc(&resolved.family, &resolved.a).is_valid();
    let nondegenerate = mc_valid && check_nondegenerate(&resolved).is_valid();
    let weak_equivalence = is_weak_equivalence(&phi, &resolved, &target).holds();
    Ok(ResolutionResult {
        resolved,
        comparison: phi,
        target,
        steps,
        mc_valid,
        nondegenerate,
        weak_equivalence,
    })
}

/// Solves `(-1)^k c^0_{t0} X + X c^0_{tk}|_E = -res ∘ ι_E` for the E-columns at `t`.
fn solve_step(
    c: &Morphism,
    lfam: &LocalFamily,
    es: &LocalFamily,
    pfam: &LocalFamily,
    t: &[usize],
    k: usize,
) -> Result<FaceMaps, ResolutionError> {
    let field = c.field();
    let nerve = lfam.nerve();
    let (first, last) = (t[0], *t.last().unwrap());
    let mut res = c.delta_component(t);
    for (f, m) in c.compose_component(c, t) {
        res = add_face(res, f, m);
    }
    let base = Face::of(t);
    let mut eqs = Vec::new();
    let sgn = sign(field, k as i64);
    for f in nerve.star(base) {
        let (e1, s1) = (es.space(last, f), pfam.space(last, f));
        let (l0, l1) = (lfam.space(first, f), lfam.space(last, f));
        let r = res
            .get(&f)
            .cloned()
            .unwrap_or_else(|| GradedMap::zero(field, l1, l0, 2 - k as i32));
        let c0 = local(c, first, f, lfam);
        let c1 = local(c, last, f, lfam);
        // cocycle: c0 r = (-1)^k r c1
        if c0.compose(&r) != r.compose(&c1).scale(&sgn) {
            return Err(ResolutionError::NotACocycle(t.to_vec()));
        }
        let iota_e = GradedMap::from_blocks(field, &[e1], &[e1, s1], 0, &[(0, 0, &GradedMap::identity(field, e1))]);
        let iota_s = GradedMap::from_blocks(field, &[s1], &[e1, s1], 0, &[(1, 0, &GradedMap::identity(field, s1))]);
        if !r.compose(&iota_s).is_zero() {
            return Err(ResolutionError::Internal(format!("residual touches the P-columns at {t:?}")));
        }
        let c1e = c1.compose(&iota_e).block(&[e1], &[e1, s1], 0, 0);
        eqs.push(NatEquation {
            face: f,
            terms: vec![
                NatTerm { unknown: 0, coeff: sgn.clone(), left: Some(c0), right: None },
                NatTerm { unknown: 0, coeff: field.one(), left: None, right: Some(c1e) },
            ],
            rhs: r.compose(&iota_e).neg(),
        });
    }
    let unknowns = [NatUnknown {
        base,
        src: es.get(last),
        tgt: lfam.get(first),
        shift: 1 - k as i32,
    }];
    let mut sol = solve_natural(field, &unknowns, &eqs).ok_or_else(|| ResolutionError::LiftFailed(t.to_vec()))?;
    Ok(sol.remove(0))
}

fn add_face(mut acc: FaceMaps, f: Face, m: GradedMap) -> FaceMaps {
    let v = match acc.remove(&f) {
        Some(cur) => cur.add(&m),
        None => m,
    };
    acc.insert(f, v);
    acc
}

fn local(c: &Morphism, i: usize, f: Face, fam: &LocalFamily) -> GradedMap {
    c.at(&[i], f)
        .cloned()
        .unwrap_or_else(|| GradedMap::zero(c.field(), fam.space(i, f), fam.space(i, f), 1))
}

