use std::collections::BTreeMap;

use clap::ValueEnum;
use twistedcx::cover_model::{CoverNerve, Face, PresheafComplex};
use twistedcx::dgcat_descent::{fiber_differential, restrict_morphism, restrict_to_fiber, verify_fiber_object, FiberError, SIGMA};
use twistedcx::functors::{
    local_equivalence, sheaf_cohomology, sheafify, sheafify_morphism, twist, verify_adjunction, weq_criterion, Sheafified,
};
use twistedcx::resolution::{common_sheafify, hom_transfer, perfectness_violation, twisted_resolution, ResolutionError};
use twistedcx::twisted_core::{check_mc, check_nondegenerate, cone, is_weak_equivalence, shift, TwistedComplex};

use crate::report::{ErrorInfo, Report};
use crate::workspace::Workspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Cohomology,
    Sheafify,
    Twist,
    Resolve,
    Cone,
    Shift,
    CheckWeq,
    LocalEquiv,
    Adjunction,
    FiberProduct,
    Transfer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Presheaf,
    Twisted,
    Morphism,
}

impl Kind {
    fn noun(self) -> &'static str {
        match self {
            Kind::Presheaf => "presheaf",
            Kind::Twisted => "twisted complex",
            Kind::Morphism => "morphism",
        }
    }
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Cohomology => "cohomology",
            Command::Sheafify => "sheafify",
            Command::Twist => "twist",
            Command::Resolve => "resolve",
            Command::Cone => "cone",
            Command::Shift => "shift",
            Command::CheckWeq => "check-weq",
            Command::LocalEquiv => "local-equiv",
            Command::Adjunction => "adjunction",
            Command::FiberProduct => "fiber-product",
            Command::Transfer => "transfer",
        }
    }

    fn kinds(self) -> &'static [Kind] {
        use Kind::*;
        match self {
            Command::Validate => &[Presheaf, Twisted, Morphism],
            Command::Cohomology => &[Presheaf, Twisted],
            Command::Twist | Command::Resolve => &[Presheaf],
            Command::Sheafify | Command::Shift | Command::LocalEquiv | Command::Adjunction => &[Twisted],
            Command::Cone | Command::CheckWeq | Command::Transfer => &[Morphism],
            Command::FiberProduct => &[Twisted, Morphism],
        }
    }
}

fn kind_of(ws: &Workspace, name: &str) -> Option<Kind> {
    if ws.presheaves.contains_key(name) {
        Some(Kind::Presheaf)
    } else if ws.twisted.contains_key(name) {
        Some(Kind::Twisted)
    } else if ws.morphisms.contains_key(name) {
        Some(Kind::Morphism)
    } else {
        None
    }
}

fn targets(ws: &Workspace, cmd: Command, name: Option<&str>) -> Result<Vec<(Kind, String)>, String> {
    let kinds = cmd.kinds();
    if let Some(n) = name {
        let k = kind_of(ws, n).ok_or_else(|| format!("no object named {n:?}"))?;
        if !kinds.contains(&k) {
            return Err(format!("{} does not apply to the {} {n:?}", cmd.name(), k.noun()));
        }
        return Ok(vec![(k, n.to_string())]);
    }
    let mut out = Vec::new();
    for k in kinds {
        let names: Vec<&String> = match k {
            Kind::Presheaf => ws.presheaves.keys().collect(),
            Kind::Twisted => ws.twisted.keys().collect(),
            Kind::Morphism => ws.morphisms.keys().collect(),
        };
        out.extend(names.into_iter().map(|n| (*k, n.clone())));
    }
    if out.is_empty() && cmd != Command::Validate {
        let nouns: Vec<&str> = kinds.iter().map(|k| k.noun()).collect();
        return Err(format!("{} needs a {} in the input", cmd.name(), nouns.join(" or ")));
    }
    Ok(out)
}

pub fn run(ws: &mut Workspace, cmd: Command, name: Option<&str>, report: &mut Report) {
    let list = match targets(ws, cmd, name) {
        Ok(l) => l,
        Err(message) => return report.fail_input(ErrorInfo::Usage { message }),
    };
    for (kind, n) in list {
        match (cmd, kind) {
            (Command::Validate, _) => validate(ws, kind, &n, report),
            (Command::Cohomology, Kind::Presheaf) => {
                let p = ws.presheaves[&n].clone();
                cohomology_values(report, &n, &p, &ws.nerve);
            }
            (Command::Cohomology, _) => {
                let t = ws.twisted[&n].complex.clone();
                if datum_is_valid(report, &n, &t) {
                    if let Some(s) = sheafify_or_fail(report, &n, &t) {
                        cohomology_values(report, &n, &s.complex, &ws.nerve);
                    }
                }
            }
            (Command::Sheafify, _) => run_sheafify(ws, &n, report),
            (Command::Twist, _) => {
                let t = twist(&ws.presheaves[&n], &ws.nerve);
                mc_check(report, &format!("twist of {n}"), &t);
                let e = ws.add_twisted(&format!("twist.{n}"), &t);
                report.emitted.push(e);
            }
            (Command::Shift, _) => {
                let t = ws.twisted[&n].complex.clone();
                if datum_is_valid(report, &n, &t) {
                    let s = shift(&t);
                    mc_check(report, &format!("shift of {n}"), &s);
                    let e = ws.add_twisted(&format!("shift.{n}"), &s);
                    report.emitted.push(e);
                }
            }
            (Command::Resolve, _) => run_resolve(ws, &n, report),
            (Command::Cone, _) => run_cone(ws, &n, report),
            (Command::CheckWeq, _) => run_check_weq(ws, &n, report),
            (Command::LocalEquiv, _) => run_local_equiv(ws, &n, report),
            (Command::Adjunction, _) => {
                let t = ws.twisted[&n].complex.clone();
                if datum_is_valid(report, &n, &t) {
                    if let Some(s) = sheafify_or_fail(report, &n, &t) {
                        let r = verify_adjunction(&t, &s);
                        let detail = r
                            .failures
                            .first()
                            .map(|(f, d)| format!("fails at {} degree {d}", ws.nerve.face_name(*f)));
                        report.check(&n, "sheafified counit after unit is the identity", r.holds(), detail);
                        report.value(&n, "components checked", r.checked);
                    }
                }
            }
            (Command::FiberProduct, Kind::Twisted) => run_fiber_object(ws, &n, report),
            (Command::FiberProduct, _) => run_fiber_morphism(ws, &n, report),
            (Command::Transfer, _) => run_transfer(ws, &n, report),
        }
        if report.error.is_some() {
            return;
        }
    }
}

fn dims_text(dims: &BTreeMap<i32, usize>) -> String {
    let parts: Vec<String> = dims.iter().filter(|(_, d)| **d > 0).map(|(n, d)| format!("H{n}={d}")).collect();
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" ")
    }
}

fn cohomology_values(report: &mut Report, name: &str, p: &PresheafComplex, nerve: &CoverNerve) {
    for f in nerve.faces() {
        let h = p.cohomology_at(*f).expect("d² = 0 was validated");
        report.value(name, &format!("cohomology at {}", nerve.face_name(*f)), dims_text(&h));
    }
}

fn mc_check(report: &mut Report, name: &str, t: &TwistedComplex) -> bool {
    let mc = check_mc(&t.family, &t.a);
    let nerve = t.nerve();
    let detail = mc.violations.first().map(|v| {
        format!(
            "fails at tuple {} face {} degree {} (Cech degree {})",
            nerve.tuple_name(&v.tuple),
            nerve.face_name(v.face),
            v.degree,
            v.k
        )
    });
    report.check(name, "Maurer-Cartan equation", mc.is_valid(), detail);
    mc.is_valid()
}

/// Maurer-Cartan, and non-degeneracy unless generalized.
fn datum_is_valid(report: &mut Report, name: &str, t: &TwistedComplex) -> bool {
    if !mc_check(report, name, t) {
        return false;
    }
    if t.generalized {
        return true;
    }
    let nd = check_nondegenerate(t);
    let bad = nd.verdicts.iter().find(|v| !v.homotopic_to_id);
    let detail = bad.map(|v| {
        let l = t.nerve().label(v.index);
        format!("a(1,0) at ({l},{l}) is not homotopic to the identity")
    });
    report.check(name, "non-degenerate", bad.is_none(), detail);
    bad.is_none()
}

fn sheafify_or_fail(report: &mut Report, name: &str, t: &TwistedComplex) -> Option<Sheafified> {
    match sheafify(t) {
        Ok(s) => Some(s),
        Err(e) => {
            report.check(name, "sheafification", false, Some(e.to_string()));
            None
        }
    }
}

fn is_acyclic(s: &Sheafified, nerve: &CoverNerve) -> bool {
    sheaf_cohomology(s, nerve).values().all(|h| h.values().all(|d| *d == 0))
}

fn validate(ws: &Workspace, kind: Kind, n: &str, report: &mut Report) {
    match kind {
        Kind::Presheaf => report.check(n, "functorial presheaf complex", true, None),
        Kind::Twisted => {
            let t = &ws.twisted[n].complex;
            if datum_is_valid(report, n, t) && t.generalized {
                report.note(format!("{n} is generalized; non-degeneracy is not required"));
            }
        }
        Kind::Morphism => {
            let m = &ws.morphisms[n];
            report.check(n, "natural components", true, None);
            let (e, f) = (&ws.twisted[&m.source].complex, &ws.twisted[&m.target].complex);
            report.value(n, "degree", m.morphism.deg());
            let closed = m.morphism.diff(&e.a, &f.a, &ws.nerve).is_zero();
            report.value(n, "closed", if closed { "yes" } else { "no" });
        }
    }
}

fn run_sheafify(ws: &mut Workspace, n: &str, report: &mut Report) {
    let t = ws.twisted[n].complex.clone();
    if !datum_is_valid(report, n, &t) {
        return;
    }
    let Some(s) = sheafify_or_fail(report, n, &t) else { return };
    let nerve = ws.nerve.clone();
    let out = format!("sheafify.{n}");
    for f in nerve.faces() {
        let dims: BTreeMap<i32, usize> = s.complex.sheaf.space(*f).dims().clone();
        let text: Vec<String> = dims.iter().map(|(k, d)| format!("{k}:{d}")).collect();
        report.value(&out, &format!("dimensions at {}", nerve.face_name(*f)), text.join(" "));
    }
    cohomology_values(report, &out, &s.complex, &nerve);
    if is_acyclic(&s, &nerve) {
        report.note(format!("the sheafification of {n} is acyclic on every face"));
    }
    let e = ws.add_presheaf(&out, s.complex.clone());
    report.emitted.push(e);
}

fn run_resolve(ws: &mut Workspace, n: &str, report: &mut Report) {
    let p = ws.presheaves[n].clone();
    if let Some((s, t)) = perfectness_violation(&p) {
        let d = format!(
            "restriction {} -> {} is not a quasi-isomorphism",
            ws.nerve.face_name(s),
            ws.nerve.face_name(t)
        );
        report.check(n, "locally constant cohomology", false, Some(d));
        return;
    }
    let r = match twisted_resolution(&p, &ws.nerve) {
        Ok(r) => r,
        Err(e) => return report.check(n, "twisted resolution", false, Some(e.to_string())),
    };
    let out = format!("resolve.{n}");
    report.check(&out, "Maurer-Cartan equation", r.mc_valid, None);
    report.check(&out, "non-degenerate", r.nondegenerate, None);
    report.check(&out, "comparison is a weak equivalence", r.weak_equivalence, None);
    for i in 0..ws.nerve.len() {
        let sp = r.resolved.family.space(i, Face::singleton(i));
        let text: Vec<String> = sp.dims().iter().map(|(k, d)| format!("{k}:{d}")).collect();
        report.value(&out, &format!("local dimensions at {}", ws.nerve.label(i)), text.join(" "));
    }
    report.value(&out, "lifting steps", r.steps.len());
    let higher = r.resolved.a.comps().iter().filter(|(t, m)| t.len() > 2 && m.values().any(|g| !g.is_zero())).count();
    report.value(&out, "nonzero components of length 3 or more", higher);
    let target = ws.add_twisted(&format!("twist.{n}"), &r.target);
    let resolved = ws.add_twisted(&out, &r.resolved);
    let cmp = ws.add_morphism(&format!("{out}.comparison"), &resolved, &target, r.comparison.clone());
    report.emitted.extend([resolved, target, cmp]);
}

fn endpoints(ws: &Workspace, n: &str) -> (String, String, TwistedComplex, TwistedComplex) {
    let m = &ws.morphisms[n];
    (
        m.source.clone(),
        m.target.clone(),
        ws.twisted[&m.source].complex.clone(),
        ws.twisted[&m.target].complex.clone(),
    )
}

fn endpoints_valid(ws: &Workspace, n: &str, report: &mut Report) -> Option<(String, String, TwistedComplex, TwistedComplex)> {
    let (a, b, e, f) = endpoints(ws, n);
    let ok = datum_is_valid(report, &a, &e);
    let ok = (a == b || datum_is_valid(report, &b, &f)) && ok;
    ok.then_some((a, b, e, f))
}

fn run_cone(ws: &mut Workspace, n: &str, report: &mut Report) {
    let Some((_, _, e, f)) = endpoints_valid(ws, n, report) else { return };
    let phi = ws.morphisms[n].morphism.clone();
    match cone(&phi, &e, &f) {
        Ok(c) => {
            mc_check(report, &format!("cone of {n}"), &c);
            let name = ws.add_twisted(&format!("cone.{n}"), &c);
            report.emitted.push(name);
        }
        Err(err) => report.check(n, "closed morphism of degree 0", false, Some(err.to_string())),
    }
}

fn run_check_weq(ws: &Workspace, n: &str, report: &mut Report) {
    let Some((a, b, e, f)) = endpoints_valid(ws, n, report) else { return };
    let phi = &ws.morphisms[n].morphism;
    let v = is_weak_equivalence(phi, &e, &f);
    let detail = (!v.holds()).then(|| {
        let mut why = Vec::new();
        if !v.degree_zero {
            why.push(format!("degree {}", phi.deg()));
        }
        if !v.closed {
            why.push("not closed".to_string());
        }
        if let Some((i, fc)) = v.failures.first() {
            why.push(format!(
                "component at ({l},{l}) is not a quasi-isomorphism at {}",
                ws.nerve.face_name(*fc),
                l = ws.nerve.label(*i)
            ));
        }
        format!("not a weak equivalence: {}", why.join("; "))
    });
    report.check(n, "weak equivalence", v.holds(), detail);
    if let Ok(c) = weq_criterion(phi, &e, &f) {
        let verdict = if c.sheafified { "quasi-isomorphism" } else { "not a quasi-isomorphism" };
        report.value(n, "sheafified map", verdict);
        if !e.generalized && !f.generalized {
            report.check(n, "twisted and sheafified tests agree", c.agree(), None);
        }
    }
    for (name, t) in [(&a, &e), (&b, &f)] {
        if let Ok(s) = sheafify(t) {
            if is_acyclic(&s, &ws.nerve) {
                report.note(format!("the sheafification of {name} is acyclic on every face"));
            }
        }
        if a == b {
            break;
        }
    }
}

fn run_local_equiv(ws: &Workspace, n: &str, report: &mut Report) {
    let t = ws.twisted[n].complex.clone();
    if !datum_is_valid(report, n, &t) {
        return;
    }
    let Some(s) = sheafify_or_fail(report, n, &t) else { return };
    for j in 0..ws.nerve.len() {
        let le = local_equivalence(&t, &s, j);
        let l = ws.nerve.label(j);
        let obj = format!("{n} at {l}");
        report.check(&obj, "projection to the local complex is a chain map", le.f_chain, None);
        report.check(&obj, "map from the local complex is a chain map", le.g_chain, None);
        report.check(&obj, &format!("projection after that map equals a(1,0) at ({l},{l})"), le.fg_is_ajj, None);
        report.check(&obj, "the other composite is homotopic to the identity", le.homotopy, None);
    }
}

fn run_fiber_object(ws: &Workspace, n: &str, report: &mut Report) {
    let t = ws.twisted[n].complex.clone();
    if let Some(err) = cover_shape(&ws.nerve) {
        return report.fail_input(err);
    }
    if !datum_is_valid(report, n, &t) {
        return;
    }
    match restrict_to_fiber(&t) {
        Ok(o) => {
            report.check(n, "gluing map is a homotopy equivalence", verify_fiber_object(&o), None);
            report.value(n, "overlap", ws.nerve.face_name(o.overlap));
            let how = if o.certificate.seeded { "from the gluing datum" } else { "by solving" };
            report.value(n, "inverse found", how);
        }
        Err(FiberError::WrongCoverShape(k)) => report.fail_input(shape_error(k)),
        Err(e) => report.check(n, "fiber object", false, Some(e.to_string())),
    }
}

fn shape_error(k: usize) -> ErrorInfo {
    ErrorInfo::Validation {
        object: "cover".to_string(),
        reason: format!("fiber products need two opens with nonempty overlap, got {k} opens"),
    }
}

fn cover_shape(nerve: &CoverNerve) -> Option<ErrorInfo> {
    let ok = nerve.len() == 2 && nerve.is_face(Face::of(&[0, 1]));
    (!ok).then(|| shape_error(nerve.len()))
}

fn run_fiber_morphism(ws: &Workspace, n: &str, report: &mut Report) {
    if let Some(err) = cover_shape(&ws.nerve) {
        return report.fail_input(err);
    }
    let Some((_, _, e, f)) = endpoints_valid(ws, n, report) else { return };
    let phi = &ws.morphisms[n].morphism;
    let (oe, of) = match (restrict_to_fiber(&e), restrict_to_fiber(&f)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(err), _) | (_, Err(err)) => return report.check(n, "fiber objects", false, Some(err.to_string())),
    };
    let lhs = fiber_differential(&restrict_morphism(phi, &oe, &of, SIGMA), &oe, &of);
    let rhs = restrict_morphism(&phi.diff(&e.a, &f.a, &ws.nerve), &oe, &of, SIGMA);
    report.check(n, "restriction commutes with the differential", lhs == rhs, None);
    report.value(n, "sign", SIGMA);
}

fn run_transfer(ws: &Workspace, n: &str, report: &mut Report) {
    let Some((_, _, e, f)) = endpoints_valid(ws, n, report) else { return };
    let phi = &ws.morphisms[n].morphism;
    let closed = phi.deg() == 0 && phi.diff(&e.a, &f.a, &ws.nerve).is_zero();
    report.check(n, "closed morphism of degree 0", closed, None);
    if !closed {
        return;
    }
    let run = || -> Result<_, ResolutionError> {
        let (sa, sb) = common_sheafify(&e, &f)?;
        let fm = sheafify_morphism(phi, &e, &f, &sa, &sb).map_err(|x| ResolutionError::Internal(x.to_string()))?;
        hom_transfer(&fm, &e, &f, &sa, &sb, Some(phi))
    };
    match run() {
        Ok(tr) => {
            report.check(n, "transferred map is closed", true, None);
            report.check(n, "sheafified maps agree up to homotopy", tr.presheaf_homotopy.is_some(), None);
            report.check(n, "transferred map is homotopic to the original", tr.twisted_homotopy.is_some(), None);
        }
        Err(err) => report.check(n, "transfer", false, Some(err.to_string())),
    }
}
