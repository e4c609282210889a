//! Common invariant cones of finite families of 2×2 matrices.

use std::f64::consts::PI;

use nalgebra::DVector;

use super::frame::{
    associated_sign, classify2, coords, cross, line_angle, line_sine, perp, same_line, unit_at, EigenFrame2, Kind2,
    Sign,
};
use crate::cone::{conic_hull, is_invariant, ConeRep, PolyhedralCone};
use crate::decision::{Certificate, FailedCondition, FamilyDecision, LineRecord, MemberCheck, Origin};
use crate::error::{Error, Result};
use crate::linalg::{dense, SquareMatrix, ToleranceConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedMember {
    pub origin: Origin,
    pub matrix: SquareMatrix,
    pub frame: EigenFrame2,
}

impl ExtendedMember {
    fn neg_det(&self) -> bool {
        self.frame.kind == Kind2::NegDet
    }
}

fn check_2x2(family: &[SquareMatrix]) -> Result<()> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    for m in family {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: m.dim() });
        }
    }
    Ok(())
}

fn det2(a: &SquareMatrix) -> f64 {
    a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
}

fn negative_det(a: &SquareMatrix, tol: &ToleranceConfig) -> bool {
    let s = a.norm();
    det2(a) < -tol.geom_tol * s * s
}

/// The family plus all non-scalar ordered products of its negative-determinant members.
pub fn extended_family(family: &[SquareMatrix], tol: &ToleranceConfig) -> Result<Vec<ExtendedMember>> {
    check_2x2(family)?;
    let mut out: Vec<ExtendedMember> = family
        .iter()
        .enumerate()
        .map(|(i, m)| ExtendedMember { origin: Origin::Member(i), matrix: m.clone(), frame: classify2(m, tol) })
        .collect();
    let neg: Vec<usize> = (0..family.len()).filter(|&i| negative_det(&family[i], tol)).collect();
    for &i in &neg {
        for &j in &neg {
            let p = family[i].mul(&family[j]);
            if p.scalar_value(tol.geom_tol).is_some() {
                continue;
            }
            let frame = classify2(&p, tol);
            out.push(ExtendedMember { origin: Origin::Product(i, j), matrix: p, frame });
        }
    }
    Ok(out)
}

/// Closed arc of line angles `[start, start + length]`, taken mod π.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationArc {
    pub start: f64,
    pub length: f64,
}

fn mod_pi(x: f64) -> f64 {
    let r = x.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Distance between two line angles.
fn angle_gap(a: f64, b: f64) -> f64 {
    let d = mod_pi(a - b);
    d.min(PI - d)
}

impl SeparationArc {
    /// Offset of a line angle from the start, folded so that near-`π` offsets read as 0.
    fn offset(&self, angle: f64, tol: f64) -> f64 {
        let o = mod_pi(angle - self.start);
        if o > PI - tol {
            o - PI
        } else {
            o
        }
    }

    fn strictly_inside(&self, angle: f64, tol: f64) -> bool {
        let o = self.offset(angle, tol);
        o > tol && o < self.length - tol
    }

    fn on_endpoint(&self, angle: f64, tol: f64) -> bool {
        let o = self.offset(angle, tol);
        o.abs() <= tol || (o - self.length).abs() <= tol
    }

    /// `u` or `−u`, whichever points into the arc.
    pub fn orient(&self, u: &DVector<f64>, tol: f64) -> DVector<f64> {
        let o = self.offset(line_angle(u), tol).clamp(0.0, self.length);
        let dir = unit_at(self.start + o);
        if u.dot(&dir) >= 0.0 {
            u.clone()
        } else {
            -u
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NecessaryReport {
    pub extended: Vec<ExtendedMember>,
    pub vandergraft: bool,
    pub nondiag_ok: bool,
    pub separated: bool,
    /// First failing condition with the family indices involved.
    pub failure: Option<(FailedCondition, Vec<usize>)>,
    pub arcs: Vec<SeparationArc>,
    /// Non-diagonalizable members of the extended family, grouped by dominant line.
    pub nondiag_groups: Vec<Vec<usize>>,
    pub lines: Vec<LineRecord>,
    pub flags: Vec<String>,
}

impl NecessaryReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn push_flag(flags: &mut Vec<String>, f: &str) {
    if !flags.iter().any(|x| x == f) {
        flags.push(f.into());
    }
}

fn note_near_line(flags: &mut Vec<String>, a: &DVector<f64>, b: &DVector<f64>, tol: &ToleranceConfig) {
    let s = line_sine(a, b);
    if s > tol.geom_tol && s <= 10.0 * tol.geom_tol {
        push_flag(flags, "near-collinear-lines");
    }
}

fn line_records(ext: &[ExtendedMember]) -> Vec<LineRecord> {
    let mut lines = Vec::new();
    for m in ext {
        if !m.frame.has_dominant_line() {
            continue;
        }
        let deg = |v: &DVector<f64>| line_angle(v).to_degrees();
        if let Some(u) = &m.frame.u1 {
            lines.push(LineRecord { angle_deg: deg(u), dominant: true, origin: m.origin });
        }
        if let Some(u) = &m.frame.u2 {
            lines.push(LineRecord { angle_deg: deg(u), dominant: false, origin: m.origin });
        }
    }
    lines
}

fn group_nondiag(ext: &[ExtendedMember], tol: &ToleranceConfig, flags: &mut Vec<String>) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, m) in ext.iter().enumerate() {
        if m.frame.kind != Kind2::NonDiag {
            continue;
        }
        let u = m.frame.u1.as_ref().expect("non-diagonalizable frame has u1");
        let hit = groups.iter_mut().find(|g| {
            let w = ext[g[0]].frame.u1.as_ref().expect("u1");
            note_near_line(flags, u, w, tol);
            same_line(u, w, tol)
        });
        match hit {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

struct LineSets {
    dominant: Vec<(f64, usize)>,
    non_dominant: Vec<(f64, usize, bool)>,
}

fn line_sets(ext: &[ExtendedMember]) -> LineSets {
    let mut dominant = Vec::new();
    let mut non_dominant = Vec::new();
    for (i, m) in ext.iter().enumerate() {
        if !m.frame.has_dominant_line() {
            continue;
        }
        if let Some(u) = &m.frame.u1 {
            dominant.push((line_angle(u), i));
        }
        if let Some(u) = &m.frame.u2 {
            non_dominant.push((line_angle(u), i, m.neg_det()));
        }
    }
    LineSets { dominant, non_dominant }
}

/// Distinct dominant angles, merged within `tol`.
fn distinct_angles(d: &[(f64, usize)], tol: f64) -> Vec<f64> {
    let mut a: Vec<f64> = d.iter().map(|x| x.0).collect();
    a.sort_by(|x, y| x.total_cmp(y));
    let mut out: Vec<f64> = Vec::new();
    for x in a {
        if out.last().is_none_or(|&y| angle_gap(x, y) > tol) {
            out.push(x);
        }
    }
    if out.len() > 1 && angle_gap(out[0], *out.last().unwrap()) <= tol {
        out.pop();
    }
    out
}

/// All minimal arcs containing every dominant line with no non-dominant line strictly inside.
///
/// A non-dominant line on an endpoint is tolerated only for matrices with nonnegative determinant.
fn separation_arcs(sets: &LineSets, tol: &ToleranceConfig, flags: &mut Vec<String>) -> (Vec<SeparationArc>, Vec<usize>) {
    let g = tol.geom_tol;
    let ds = distinct_angles(&sets.dominant, g);
    if ds.is_empty() {
        return (vec![SeparationArc { start: 0.0, length: 0.5 * PI }], vec![]);
    }
    let mut candidates: Vec<SeparationArc> = Vec::new();
    if ds.len() == 1 {
        candidates.push(SeparationArc { start: ds[0], length: 0.0 });
    } else {
        let m = ds.len();
        for i in 0..m {
            let gap = if i + 1 < m { ds[i + 1] - ds[i] } else { ds[0] + PI - ds[m - 1] };
            let start = ds[(i + 1) % m];
            candidates.push(SeparationArc { start, length: PI - gap });
        }
        candidates.sort_by(|a, b| a.length.total_cmp(&b.length).then(a.start.total_cmp(&b.start)));
    }
    let mut valid = Vec::new();
    let mut blockers: Vec<usize> = Vec::new();
    for arc in candidates {
        let mut ok = true;
        for &(n, idx, neg) in &sets.non_dominant {
            let near = arc.on_endpoint(n, 10.0 * g) && !arc.on_endpoint(n, g);
            if near {
                push_flag(flags, "near-tolerance-separation");
            }
            if arc.strictly_inside(n, g) || (neg && arc.on_endpoint(n, g)) {
                if neg && arc.on_endpoint(n, g) {
                    push_flag(flags, "negdet-line-on-dominant-line");
                }
                ok = false;
                if !blockers.contains(&idx) {
                    blockers.push(idx);
                }
            }
        }
        if ok {
            valid.push(arc);
        }
    }
    (valid, blockers)
}

fn origin_members(ext: &[ExtendedMember], idx: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = idx.iter().flat_map(|&i| ext[i].origin.members()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Checks the three necessary conditions on the extended family.
pub fn necessary_conditions(family: &[SquareMatrix], tol: &ToleranceConfig) -> Result<NecessaryReport> {
    let ext = extended_family(family, tol)?;
    let mut flags = Vec::new();
    let lines = line_records(&ext);
    let mut failure = None;

    let bad: Vec<usize> = (0..ext.len()).filter(|&i| !ext[i].frame.is_vandergraft()).collect();
    let vandergraft = bad.is_empty();
    if !vandergraft {
        failure = Some((FailedCondition::NotVandergraftInA1, origin_members(&ext, &bad[..1])));
        return Ok(NecessaryReport {
            extended: ext,
            vandergraft,
            nondiag_ok: false,
            separated: false,
            failure,
            arcs: vec![],
            nondiag_groups: vec![],
            lines,
            flags,
        });
    }

    let groups = group_nondiag(&ext, tol, &mut flags);
    let mut nondiag_ok = true;
    if groups.len() > 2 {
        nondiag_ok = false;
        let reps: Vec<usize> = groups.iter().map(|g| g[0]).collect();
        failure = Some((FailedCondition::TooManyNondiagLines, origin_members(&ext, &reps)));
    } else {
        'outer: for g in &groups {
            let first = &ext[g[0]].frame;
            let u = first.u1.as_ref().expect("u1");
            let r = first.orientation_ref.as_ref().expect("orientation reference");
            for &j in &g[1..] {
                if associated_sign(&ext[j].matrix, u, r, tol)? != Sign::Positive {
                    nondiag_ok = false;
                    failure = Some((FailedCondition::OrientationConflict, origin_members(&ext, &[g[0], j])));
                    break 'outer;
                }
            }
        }
    }

    let sets = line_sets(&ext);
    let (arcs, blockers) = separation_arcs(&sets, tol, &mut flags);
    let separated = !arcs.is_empty();
    if !separated && failure.is_none() {
        let mut idx: Vec<usize> = sets.dominant.iter().map(|d| d.1).collect();
        idx.extend(blockers);
        failure = Some((FailedCondition::SeparationFails, origin_members(&ext, &idx)));
    }
    Ok(NecessaryReport { extended: ext, vandergraft, nondiag_ok, separated, failure, arcs, nondiag_groups: groups, lines, flags })
}

fn verify_witness(family: &[SquareMatrix], k: &ConeRep, tol: &ToleranceConfig, cert: &mut Certificate) -> Result<()> {
    for (i, a) in family.iter().enumerate() {
        let report = is_invariant(k, a, tol)?;
        if !report.invariant {
            return Err(Error::WitnessVerificationFailed(format!(
                "member {i}: relative violation {:.3e}",
                report.worst_violation
            )));
        }
        cert.checks.push(MemberCheck { member: i, report });
    }
    Ok(())
}

fn yes(family: &[SquareMatrix], k: PolyhedralCone, mut cert: Certificate, tol: &ToleranceConfig) -> Result<FamilyDecision> {
    let k = ConeRep::Polyhedral(k);
    verify_witness(family, &k, tol, &mut cert)?;
    Ok(FamilyDecision::yes(k, cert))
}

fn vec_matrix_unit(a: &SquareMatrix) -> DVector<f64> {
    dense::unit(&DVector::from_column_slice(a.as_matrix().as_slice()))
}

fn scalar_multiples(a: &SquareMatrix, b: &SquareMatrix, tol: &ToleranceConfig) -> bool {
    let x = vec_matrix_unit(a);
    let y = vec_matrix_unit(b);
    (&x - &y).norm() <= tol.geom_tol.sqrt() || (&x + &y).norm() <= tol.geom_tol.sqrt()
}

fn interior_hits(k: &PolyhedralCone, v: &DVector<f64>, tol: &ToleranceConfig) -> Result<bool> {
    Ok(k.contains(v, tol)?.interior || k.contains(&-v, tol)?.interior)
}

/// Decision for a family whose non-scalar members share one dominant eigenline.
pub fn decide_shared_dominant_2x2(family: &[SquareMatrix], tol: &ToleranceConfig) -> Result<FamilyDecision> {
    check_2x2(family)?;
    let frames: Vec<EigenFrame2> = family.iter().map(|a| classify2(a, tol)).collect();
    if let Some(i) = frames.iter().position(|f| !f.is_vandergraft()) {
        return Err(Error::PreconditionFailed(format!("member {i} is not a Vandergraft matrix")));
    }
    let active: Vec<usize> = (0..family.len()).filter(|&i| frames[i].has_dominant_line()).collect();
    let method = "shared-dominant";
    if active.is_empty() {
        return yes(family, PolyhedralCone::orthant(2), Certificate::new("scalar-only"), tol);
    }
    let mut u = frames[active[0]].u1.clone().expect("u1");
    dense::sign_normalize(&mut u);
    let mut cert = Certificate::new(method);
    for &i in &active {
        let w = frames[i].u1.as_ref().expect("u1");
        note_near_line(&mut cert.flags, &u, w, tol);
        if !same_line(&u, w, tol) {
            return Err(Error::PreconditionFailed("members do not share a dominant eigenvector".into()));
        }
    }
    let p = perp(&u);
    let negdet: Vec<usize> = active.iter().copied().filter(|&i| frames[i].kind == Kind2::NegDet).collect();
    let nondiag: Vec<usize> = active.iter().copied().filter(|&i| frames[i].kind == Kind2::NonDiag).collect();

    let zero_trace: Vec<usize> = negdet
        .iter()
        .copied()
        .filter(|&i| family[i].trace().abs() <= tol.geom_tol * family[i].norm())
        .collect();
    for (a, &i) in zero_trace.iter().enumerate() {
        for &j in &zero_trace[a + 1..] {
            if !scalar_multiples(&family[i], &family[j], tol) {
                return Ok(FamilyDecision::no(Certificate::failing(
                    method,
                    FailedCondition::NegDetTraceZeroConflict,
                    vec![i, j],
                )));
            }
        }
    }

    let mut sign_of = Vec::new();
    for &i in &nondiag {
        sign_of.push((i, associated_sign(&family[i], &u, &p, tol)?));
    }
    if let Some(&(i, s)) = sign_of.first() {
        if let Some(&(j, _)) = sign_of.iter().find(|(_, t)| *t != s) {
            return Ok(FamilyDecision::no(Certificate::failing(method, FailedCondition::OrientationConflict, vec![i, j])));
        }
    }

    if let (Some(&i), Some(&j)) = (nondiag.first(), negdet.first()) {
        let mut m = vec![i, j];
        m.sort_unstable();
        return Ok(FamilyDecision::no(Certificate::failing(method, FailedCondition::BigConeEdgeCollision, m)));
    }

    // Natural candidates Cone{u, ±w} over the non-dominant lines.
    let mut cand_dirs: Vec<DVector<f64>> = active.iter().filter_map(|&i| frames[i].u2.clone()).collect();
    if let Some(&(_, s)) = sign_of.first() {
        cand_dirs.push(if s == Sign::Positive { p.clone() } else { -&p });
    }
    cand_dirs.sort_by(|a, b| line_angle(a).total_cmp(&line_angle(b)));
    for w in &cand_dirs {
        if same_line(&u, w, tol) {
            continue;
        }
        for w in [w.clone(), -w] {
            let k = PolyhedralCone::new(2, vec![u.clone(), w])?;
            if passes_all(family, &k, tol)? {
                let mut c = cert.clone();
                c.notes.push("natural candidate".into());
                return yes(family, k, c, tol);
            }
        }
    }

    // Shrinking construction: v tends to u from the positively associated side.
    let side = match sign_of.first() {
        Some((_, Sign::Negative)) => -1.0,
        _ => 1.0,
    };
    let products: Vec<SquareMatrix> =
        negdet.iter().flat_map(|&i| negdet.iter().map(move |&j| (i, j))).map(|(i, j)| family[i].mul(&family[j])).collect();
    let mut excluded: Vec<DVector<f64>> = active
        .iter()
        .filter(|&&i| frames[i].kind == Kind2::DiagNonneg)
        .filter_map(|&i| frames[i].u2.clone())
        .collect();
    for pm in &products {
        let f = classify2(pm, tol);
        if let Some(w) = f.u2 {
            excluded.push(w);
        }
    }
    let mut theta: f64 = 0.1;
    for _ in 0..60 {
        let v = &u * theta.cos() + &p * (side * theta.sin());
        let mut gens = vec![u.clone(), v.clone()];
        gens.extend(negdet.iter().map(|&i| family[i].apply(&v)));
        let k = conic_hull(&gens, 2, tol)?.prune(tol);
        let clear = excluded.iter().try_fold(true, |acc, w| Ok::<bool, Error>(acc && !interior_hits(&k, w, tol)?))?;
        if k.is_proper(tol).proper && clear && passes_all(family, &k, tol)? {
            cert.notes.push(format!("shrunk to angle {theta:.3e}"));
            return yes(family, k, cert, tol);
        }
        theta *= 0.5;
    }
    Err(Error::WitnessVerificationFailed("shrinking construction exhausted its iteration cap".into()))
}

fn passes_all(family: &[SquareMatrix], k: &PolyhedralCone, tol: &ToleranceConfig) -> Result<bool> {
    if !k.is_proper(tol).proper {
        return Ok(false);
    }
    let rep = ConeRep::Polyhedral(k.clone());
    for a in family {
        if !is_invariant(&rep, a, tol)?.invariant {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Failure of one candidate cone, in reporting priority order.
#[derive(Clone, Debug, PartialEq)]
struct BranchFailure {
    condition: FailedCondition,
    members: Vec<usize>,
}

struct Context<'a> {
    family: &'a [SquareMatrix],
    ext: &'a [ExtendedMember],
    /// Original indices of negative-determinant members.
    negdet: Vec<usize>,
    tol: &'a ToleranceConfig,
}

impl Context<'_> {
    fn dominant_vectors(&self) -> Vec<DVector<f64>> {
        let mut out: Vec<DVector<f64>> = Vec::new();
        for m in self.ext {
            if !m.frame.has_dominant_line() {
                continue;
            }
            let u = m.frame.u1.as_ref().expect("u1");
            if !out.iter().any(|w| same_line(w, u, self.tol)) {
                out.push(u.clone());
            }
        }
        out
    }

    fn big_cone(&self, arc: &SeparationArc) -> Result<PolyhedralCone> {
        let g = self.tol.geom_tol;
        let us: Vec<DVector<f64>> = self.dominant_vectors().iter().map(|u| arc.orient(u, g)).collect();
        let mut gens = us.clone();
        for &i in &self.negdet {
            for u in &us {
                let w = self.family[i].apply(u);
                if w.norm() > 0.0 {
                    gens.push(w);
                }
            }
        }
        Ok(conic_hull(&gens, 2, self.tol)?.prune(self.tol))
    }

    /// Properness, non-dominant exclusion and edge tests on a candidate.
    fn big_cone_checks(&self, k: &PolyhedralCone) -> Result<Option<BranchFailure>> {
        let tol = self.tol;
        if !k.is_proper(tol).proper || k.generators.len() != 2 {
            return Ok(Some(BranchFailure { condition: FailedCondition::BigConeImproper, members: self.negdet.clone() }));
        }
        for m in self.ext {
            if !m.frame.has_dominant_line() {
                continue;
            }
            if let Some(w) = &m.frame.u2 {
                if interior_hits(k, w, tol)? {
                    return Ok(Some(BranchFailure {
                        condition: FailedCondition::BigConeHitsNonDominant,
                        members: m.origin.members(),
                    }));
                }
            }
        }
        for &i in &self.negdet {
            let f = &self.ext[i].frame;
            for e in &k.generators {
                for w in [f.u1.as_ref(), f.u2.as_ref()].into_iter().flatten() {
                    if same_line(e, w, tol) {
                        return Ok(Some(BranchFailure {
                            condition: FailedCondition::BigConeEdgeCollision,
                            members: vec![i],
                        }));
                    }
                }
            }
        }
        Ok(None)
    }

    fn one_line_checks(&self, k: &PolyhedralCone, b: &ExtendedMember, arc: &SeparationArc) -> Result<Option<BranchFailure>> {
        let u1 = arc.orient(b.frame.u1.as_ref().expect("u1"), self.tol.geom_tol);
        for gen in &k.generators {
            if same_line(gen, &u1, self.tol) {
                continue;
            }
            if associated_sign(&b.matrix, &u1, gen, self.tol)? != Sign::Positive {
                return Ok(Some(BranchFailure {
                    condition: FailedCondition::OrientationConflict,
                    members: b.origin.members(),
                }));
            }
        }
        Ok(None)
    }
}

/// The two-line case: the only candidates are `±Cone{u1, u2}`.
fn two_line_case(
    ctx: &Context<'_>,
    groups: &[Vec<usize>],
    mut cert: Certificate,
) -> Result<FamilyDecision> {
    let tol = ctx.tol;
    let g = tol.geom_tol;
    let b1 = &ctx.ext[groups[0][0]];
    let b2 = &ctx.ext[groups[1][0]];
    let fail = |members: Vec<usize>, note: &str, mut cert: Certificate| -> Result<FamilyDecision> {
        cert.failed = Some(FailedCondition::TwoLineConditionFails);
        let mut m = members;
        m.sort_unstable();
        m.dedup();
        cert.members = m;
        cert.notes.push(note.into());
        Ok(FamilyDecision::no(cert))
    };
    let mut u1 = b1.frame.u1.clone().expect("u1");
    dense::sign_normalize(&mut u1);
    let mut u2 = b2.frame.u1.clone().expect("u1");
    if associated_sign(&b1.matrix, &u1, &u2, tol)? != Sign::Positive {
        u2 = -u2;
    }
    let pair: Vec<usize> = b1.origin.members().into_iter().chain(b2.origin.members()).collect();
    if associated_sign(&b2.matrix, &u2, &u1, tol)? != Sign::Positive {
        let mut c = cert.clone();
        c.members = pair.clone();
        c.failed = Some(FailedCondition::OrientationConflict);
        c.notes.push("the two non-diagonalizable lines admit no common cone".into());
        c.members.sort_unstable();
        c.members.dedup();
        return Ok(FamilyDecision::no(c));
    }
    let k = PolyhedralCone::new(2, vec![u1.clone(), u2.clone()])?;
    let in_pm = |v: &DVector<f64>| -> (f64, f64) {
        let (a, b) = coords(&u1, &u2, v);
        if a < 0.0 || (a == 0.0 && b < 0.0) {
            (-a, -b)
        } else {
            (a, b)
        }
    };
    for (i, a) in ctx.family.iter().enumerate() {
        let f = &ctx.ext[i].frame;
        if !f.has_dominant_line() {
            continue;
        }
        let d = f.u1.as_ref().expect("u1");
        // (a) orientation of non-diagonalizable members on either line
        if f.kind == Kind2::NonDiag {
            let (line, other) = if same_line(d, &u1, tol) { (&u1, &u2) } else { (&u2, &u1) };
            if associated_sign(a, line, other, tol)? != Sign::Positive {
                return fail(vec![i], "orientation", cert);
            }
            continue;
        }
        // (b) dominant in ±K, non-dominant outside the interior of ±K
        let (p, q) = in_pm(d);
        if q < -g * (p.abs() + q.abs()) {
            return fail(vec![i], "dominant eigenvector outside ±K", cert);
        }
        let w = f.u2.as_ref().expect("u2");
        let (r, s) = in_pm(w);
        let scale = r.abs() + s.abs();
        if s > g * scale && r > g * scale {
            return fail(vec![i], "non-dominant eigenvector inside ±K", cert);
        }
        // (c) ratio bound for negative-determinant members
        if f.kind == Kind2::NegDet {
            if q <= g * (p.abs() + q.abs()) || p <= g * (p.abs() + q.abs()) {
                return fail(vec![i], "dominant eigenvector on an edge of K", cert);
            }
            if r.abs() <= g * scale || s.abs() <= g * scale {
                return fail(vec![i], "non-dominant eigenvector on an edge of K", cert);
            }
            let xi = q / p;
            let eta = s / r;
            let ratio = eta / xi;
            let lo = f.lambda1 / f.lambda2;
            let hi = f.lambda2 / f.lambda1;
            let slack = g * (1.0 + ratio.abs());
            if ratio < lo - slack || ratio > hi + slack {
                return fail(vec![i], "ratio bound", cert);
            }
        }
    }
    cert.notes.push("two non-diagonalizable dominant lines".into());
    yes(ctx.family, k, cert, tol)
}

/// Decides whether a finite family of 2×2 matrices has a common invariant proper cone.
pub fn decide_common_2x2(family: &[SquareMatrix], tol: &ToleranceConfig) -> Result<FamilyDecision> {
    check_2x2(family)?;
    let frames: Vec<EigenFrame2> = family.iter().map(|a| classify2(a, tol)).collect();
    if let Some(i) = frames.iter().position(|f| !f.is_vandergraft()) {
        let mut c = Certificate::failing("necessary-conditions", FailedCondition::NotVandergraftInA1, vec![i]);
        c.notes.push("member is not a Vandergraft matrix".into());
        return Ok(FamilyDecision::no(c));
    }
    let active: Vec<usize> = (0..family.len()).filter(|&i| frames[i].has_dominant_line()).collect();
    if active.is_empty() {
        return yes(family, PolyhedralCone::orthant(2), Certificate::new("scalar-only"), tol);
    }
    let u0 = frames[active[0]].u1.as_ref().expect("u1");
    if active.iter().all(|&i| same_line(u0, frames[i].u1.as_ref().expect("u1"), tol)) {
        return decide_shared_dominant_2x2(family, tol);
    }

    let report = necessary_conditions(family, tol)?;
    let mut base = Certificate::new("necessary-conditions");
    base.lines = report.lines.clone();
    base.flags = report.flags.clone();
    base.products = report
        .extended
        .iter()
        .filter_map(|m| match m.origin {
            Origin::Product(i, j) => Some((i, j)),
            Origin::Member(_) => None,
        })
        .collect();
    if let Some((cond, members)) = &report.failure {
        let mut c = base;
        c.failed = Some(*cond);
        c.members = members.clone();
        return Ok(FamilyDecision::no(c));
    }

    let ctx = Context {
        family,
        ext: &report.extended,
        negdet: (0..family.len()).filter(|&i| frames[i].kind == Kind2::NegDet).collect(),
        tol,
    };
    let groups = &report.nondiag_groups;
    if groups.len() == 2 {
        let mut c = base;
        c.method = "two-line".into();
        return two_line_case(&ctx, groups, c);
    }

    let method = if groups.is_empty() { "big-cone" } else { "big-cone-one-line" };
    let mut first_failure: Option<BranchFailure> = None;
    for arc in &report.arcs {
        let k = ctx.big_cone(arc)?;
        let mut failure = ctx.big_cone_checks(&k)?;
        if failure.is_none() && groups.len() == 1 {
            failure = ctx.one_line_checks(&k, &ctx.ext[groups[0][0]], arc)?;
        }
        match failure {
            None => {
                let mut c = base.clone();
                c.method = method.into();
                let mut k = k;
                orient_output(&mut k);
                return yes(family, k, c, tol);
            }
            Some(f) => {
                if first_failure.is_none() {
                    first_failure = Some(f);
                }
            }
        }
    }
    let f = first_failure.expect("at least one separation arc was tried");
    let mut c = base;
    c.method = method.into();
    c.failed = Some(f.condition);
    c.members = f.members;
    Ok(FamilyDecision::no(c))
}

/// Flips a 2D cone so that its first generator is sign-normalized.
fn orient_output(k: &mut PolyhedralCone) {
    if k.generators.is_empty() {
        return;
    }
    let mut g = k.generators[0].clone();
    dense::sign_normalize(&mut g);
    if g != k.generators[0] {
        for v in &mut k.generators {
            *v = -&*v;
        }
    }
    if k.generators.len() == 2 && cross(&k.generators[0], &k.generators[1]) < 0.0 {
        k.generators.swap(0, 1);
        let mut g = k.generators[0].clone();
        dense::sign_normalize(&mut g);
        if g != k.generators[0] {
            k.generators.swap(0, 1);
        }
    }
}

/// Smallest subfamily (by size, then lexicographically) that still decides NO.
pub fn minimal_bad_subfamily(family: &[SquareMatrix], tol: &ToleranceConfig) -> Result<Vec<usize>> {
    check_2x2(family)?;
    if decide_common_2x2(family, tol)?.is_yes() {
        return Err(Error::PreconditionFailed("the family has a common invariant proper cone".into()));
    }
    let n = family.len();
    for size in 1..=n {
        for combo in combinations(n, size) {
            let sub: Vec<SquareMatrix> = combo.iter().map(|&i| family[i].clone()).collect();
            if !decide_common_2x2(&sub, tol)?.is_yes() {
                return Ok(combo);
            }
        }
    }
    unreachable!("the full family decides NO")
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Searches for a two-generator cone invariant under every member.
///
/// Tries all eigen-direction pairs of the extended family first, then random direction pairs,
/// `budget` candidates in total. Returns the first cone found.
pub fn refute_search(family: &[SquareMatrix], budget: usize, seed: u64, tol: &ToleranceConfig) -> Result<Option<PolyhedralCone>> {
    use rand::{Rng, SeedableRng};
    check_2x2(family)?;
    let ext = extended_family(family, tol)?;
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    for m in &ext {
        for v in [m.frame.u1.as_ref(), m.frame.u2.as_ref(), m.frame.orientation_ref.as_ref()].into_iter().flatten() {
            dirs.push(v.clone());
            dirs.push(-v);
        }
    }
    dirs.push(unit_at(0.0));
    dirs.push(unit_at(0.5 * PI));
    let mut tried = 0;
    let test = |a: &DVector<f64>, b: &DVector<f64>| -> Result<Option<PolyhedralCone>> {
        if cross(a, b).abs() <= tol.geom_tol {
            return Ok(None);
        }
        let k = PolyhedralCone::new(2, vec![a.clone(), b.clone()])?;
        Ok(if passes_all(family, &k, tol)? { Some(k) } else { None })
    };
    for a in &dirs {
        for b in &dirs {
            if tried >= budget {
                return Ok(None);
            }
            tried += 1;
            if let Some(k) = test(a, b)? {
                return Ok(Some(k));
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    while tried < budget {
        tried += 1;
        let a = unit_at(rng.random_range(0.0..2.0 * PI));
        let b = unit_at(rng.random_range(0.0..2.0 * PI));
        if let Some(k) = test(&a, &b)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones2d::frame::from_eigenpairs;
    use crate::decision::Answer;

    fn t() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn ep(u1: &[f64], u2: &[f64]) -> SquareMatrix {
        from_eigenpairs(2.0, u1, 1.0, u2).unwrap()
    }

    fn triple() -> Vec<SquareMatrix> {
        vec![ep(&[1.0, 0.0], &[0.0, 1.0]), ep(&[1.0, 2.0], &[-2.0, 1.0]), ep(&[1.0, -2.0], &[2.0, 1.0])]
    }

    fn quadruple() -> Vec<SquareMatrix> {
        vec![
            ep(&[1.0, 0.0], &[0.0, 1.0]),
            ep(&[0.0, 1.0], &[1.0, 0.0]),
            ep(&[1.0, 1.0], &[1.0, -1.0]),
            ep(&[1.0, -1.0], &[1.0, 1.0]),
        ]
    }

    /// Same cone up to a global sign.
    fn same_cone_pm(k: &PolyhedralCone, a: &[f64], b: &[f64]) -> bool {
        let a = dense::unit(&DVector::from_column_slice(a));
        let b = dense::unit(&DVector::from_column_slice(b));
        let close = |x: &DVector<f64>, y: &DVector<f64>| (x - y).norm() < 1e-9;
        let g = &k.generators;
        if g.len() != 2 {
            return false;
        }
        [1.0, -1.0].iter().any(|&s| {
            let (a, b) = (&a * s, &b * s);
            (close(&g[0], &a) && close(&g[1], &b)) || (close(&g[0], &b) && close(&g[1], &a))
        })
    }

    fn witness(d: &FamilyDecision) -> &PolyhedralCone {
        d.witness.as_ref().unwrap().as_polyhedral().unwrap()
    }

    #[test]
    fn extended_family_examples() {
        let ex1 = vec![m(&[&[1.0, 1.0], &[0.0, -1.0]]), m(&[&[1.0, 2.0], &[0.0, -1.0]])];
        let ext = extended_family(&ex1, &t()).unwrap();
        let origins: Vec<Origin> = ext.iter().map(|e| e.origin).collect();
        assert_eq!(
            origins,
            vec![Origin::Member(0), Origin::Member(1), Origin::Product(0, 1), Origin::Product(1, 0)]
        );
        let diag = vec![SquareMatrix::diag(&[2.0, 1.0]), SquareMatrix::diag(&[3.0, 1.0])];
        assert_eq!(extended_family(&diag, &t()).unwrap().len(), 2);
        let a = m(&[&[1.0, 1.0], &[0.0, -1.0]]);
        assert_eq!(extended_family(&[a.clone(), a], &t()).unwrap().len(), 2);
    }

    #[test]
    fn separation_fails_for_triple() {
        let rep = necessary_conditions(&triple(), &t()).unwrap();
        assert!(rep.vandergraft && rep.nondiag_ok && !rep.separated);
        assert_eq!(rep.failure.as_ref().unwrap().0, FailedCondition::SeparationFails);
        let mut dom: Vec<f64> = rep.lines.iter().filter(|l| l.dominant).map(|l| l.angle_deg).collect();
        let mut non: Vec<f64> = rep.lines.iter().filter(|l| !l.dominant).map(|l| l.angle_deg).collect();
        dom.sort_by(f64::total_cmp);
        non.sort_by(f64::total_cmp);
        let at = |y: f64, x: f64| y.atan2(x).to_degrees().rem_euclid(180.0);
        let want_dom = [0.0, at(2.0, 1.0), at(-2.0, 1.0)];
        let want_non = [at(1.0, 2.0), 90.0, at(1.0, -2.0)];
        for (x, y) in dom.iter().zip(want_dom) {
            assert!((x - y).abs() < 1e-9);
        }
        for (x, y) in non.iter().zip(want_non) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn single_matrix_passes() {
        let rep = necessary_conditions(&[m(&[&[2.0, 1.0], &[0.0, 1.0]])], &t()).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn orientation_conflict() {
        let fam = vec![m(&[&[1.0, 1.0], &[0.0, 1.0]]), m(&[&[1.0, -1.0], &[0.0, 1.0]])];
        let rep = necessary_conditions(&fam, &t()).unwrap();
        assert_eq!(rep.failure.unwrap().0, FailedCondition::OrientationConflict);
        let d = decide_common_2x2(&fam, &t()).unwrap();
        assert_eq!(d.answer, Answer::No);
        assert_eq!(d.failed(), Some(FailedCondition::OrientationConflict));
        assert_eq!(minimal_bad_subfamily(&fam, &t()).unwrap(), vec![0, 1]);
    }

    #[test]
    fn negdet_trace_zero_conflict() {
        let fam = vec![m(&[&[1.0, 1.0], &[0.0, -1.0]]), m(&[&[1.0, 2.0], &[0.0, -1.0]])];
        let d = decide_common_2x2(&fam, &t()).unwrap();
        assert_eq!(d.failed(), Some(FailedCondition::NegDetTraceZeroConflict));
        assert_eq!(d.certificate.members, vec![0, 1]);
        // scalar multiples are fine
        let fam = vec![m(&[&[1.0, 1.0], &[0.0, -1.0]]), m(&[&[2.0, 2.0], &[0.0, -2.0]])];
        assert!(decide_common_2x2(&fam, &t()).unwrap().is_yes());
    }

    #[test]
    fn pairs_of_triple_have_listed_witnesses() {
        let f = triple();
        let pair = |i: usize, j: usize| decide_common_2x2(&[f[i].clone(), f[j].clone()], &t()).unwrap();
        let ab = pair(0, 1);
        assert!(same_cone_pm(witness(&ab), &[1.0, 0.0], &[1.0, 2.0]));
        let bc = pair(1, 2);
        assert!(same_cone_pm(witness(&bc), &[-1.0, -2.0], &[1.0, -2.0]));
        let ac = pair(0, 2);
        assert!(same_cone_pm(witness(&ac), &[1.0, 0.0], &[1.0, -2.0]));
        let d = decide_common_2x2(&f, &t()).unwrap();
        assert_eq!(d.failed(), Some(FailedCondition::SeparationFails));
        assert_eq!(minimal_bad_subfamily(&f, &t()).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn quadruple_triples_have_listed_witnesses() {
        let f = quadruple();
        let sub = |idx: &[usize]| {
            let s: Vec<SquareMatrix> = idx.iter().map(|&i| f[i].clone()).collect();
            decide_common_2x2(&s, &t()).unwrap()
        };
        assert!(same_cone_pm(witness(&sub(&[0, 1, 2])), &[1.0, 0.0], &[0.0, 1.0]));
        assert!(same_cone_pm(witness(&sub(&[0, 1, 3])), &[1.0, 0.0], &[0.0, -1.0]));
        assert!(same_cone_pm(witness(&sub(&[0, 2, 3])), &[1.0, 1.0], &[1.0, -1.0]));
        assert!(same_cone_pm(witness(&sub(&[1, 2, 3])), &[1.0, 1.0], &[-1.0, 1.0]));
        assert_eq!(sub(&[0, 1, 2, 3]).answer, Answer::No);
        assert_eq!(minimal_bad_subfamily(&f, &t()).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn shared_dominant_cases() {
        let diag = vec![SquareMatrix::diag(&[2.0, 1.0]), SquareMatrix::diag(&[3.0, 1.0])];
        let d = decide_common_2x2(&diag, &t()).unwrap();
        assert_eq!(witness(&d), &PolyhedralCone::orthant(2));

        let fam = vec![m(&[&[1.0, 1.0], &[0.0, 1.0]]), m(&[&[2.0, 3.0], &[0.0, 1.0]])];
        let d = decide_shared_dominant_2x2(&fam, &t()).unwrap();
        let k = witness(&d);
        assert!(k.generators.iter().any(|g| (g - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-12));
        assert_eq!(d.certificate.checks.len(), 2);

        let bad = vec![SquareMatrix::diag(&[2.0, 1.0]), SquareMatrix::diag(&[1.0, 2.0])];
        assert!(matches!(decide_shared_dominant_2x2(&bad, &t()), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn shrinking_with_negative_determinants() {
        let fam = vec![m(&[&[1.0, 1.0], &[0.0, -0.5]]), SquareMatrix::diag(&[2.0, 1.0]), m(&[&[1.0, 0.3], &[0.0, -0.2]])];
        let d = decide_common_2x2(&fam, &t()).unwrap();
        assert!(d.is_yes(), "{d:?}");
        let fam = vec![m(&[&[1.0, 1.0], &[0.0, 1.0]]), m(&[&[1.0, 1.0], &[0.0, -0.5]])];
        let d = decide_common_2x2(&fam, &t()).unwrap();
        assert_eq!(d.failed(), Some(FailedCondition::BigConeEdgeCollision));
    }

    #[test]
    fn infinite_family_prefixes() {
        for n in 1..=8 {
            let fam: Vec<SquareMatrix> = (1..=n).map(|q| m(&[&[1.0, q as f64], &[0.0, 0.5]])).collect();
            let d = decide_common_2x2(&fam, &t()).unwrap();
            assert!(d.is_yes(), "prefix {n}");
        }
    }

    #[test]
    fn scalars() {
        let base = vec![SquareMatrix::diag(&[2.0, 1.0])];
        let mut with_pos = base.clone();
        with_pos.push(SquareMatrix::scalar(2, 3.0));
        assert!(decide_common_2x2(&with_pos, &t()).unwrap().is_yes());
        let mut with_neg = base;
        with_neg.push(SquareMatrix::scalar(2, -1.0));
        let d = decide_common_2x2(&with_neg, &t()).unwrap();
        assert_eq!(d.failed(), Some(FailedCondition::NotVandergraftInA1));
        assert_eq!(d.certificate.members, vec![1]);
        let only = vec![SquareMatrix::identity(2)];
        assert_eq!(witness(&decide_common_2x2(&only, &t()).unwrap()), &PolyhedralCone::orthant(2));
        assert_eq!(decide_common_2x2(&[], &t()), Err(Error::EmptyFamily));
    }

    #[test]
    fn big_cone_with_negative_determinant() {
        let a = SquareMatrix::diag(&[1.0, -0.5]);
        let b = ep(&[1.0, 1.0], &[1.0, -1.0]);
        let d = decide_common_2x2(&[a, b], &t()).unwrap();
        assert_eq!(d.certificate.method, "big-cone");
        assert!(d.is_yes());
    }

    #[test]
    fn two_line_case() {
        let b1 = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let b2 = m(&[&[1.0, 0.0], &[1.0, 1.0]]);
        let d = decide_common_2x2(&[b1.clone(), b2], &t()).unwrap();
        assert_eq!(d.certificate.method, "two-line");
        assert_eq!(witness(&d), &PolyhedralCone::orthant(2));
        let b3 = m(&[&[1.0, 0.0], &[-1.0, 1.0]]);
        let d = decide_common_2x2(&[b1.clone(), b3], &t()).unwrap();
        assert_eq!(d.answer, Answer::No);
        let d = decide_common_2x2(&[b1, m(&[&[1.0, 0.0], &[1.0, 1.0]]), SquareMatrix::diag(&[1.0, 2.0])], &t()).unwrap();
        assert_eq!(d.answer, Answer::Yes);
    }

    #[test]
    fn refutation_finds_nothing_for_no_examples() {
        for fam in [triple(), quadruple()] {
            assert!(refute_search(&fam, 2_000, 7, &t()).unwrap().is_none());
        }
        let ok = refute_search(&[SquareMatrix::diag(&[2.0, 1.0])], 100, 7, &t()).unwrap();
        assert!(ok.is_some());
    }

    #[test]
    fn combinations_order() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(2, 3), Vec::<Vec<usize>>::new());
    }
}
