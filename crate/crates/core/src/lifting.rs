//! Newton lifting of models from finite fields into truncated local rings,
//! and the correspondences between canonical (or `a_i`-normalized) models
//! and Kummer models of the type with one slot removed.

use std::sync::Arc;

use crate::algebra::linalg::{determinant, solve, Matrix};
use crate::algebra::{Gf, GfContext, Integer, LocalContext, LocalElem, Polynomial, Ring};
use crate::equations::{expand, phi, psi_all, truncated_product, Model, ModelKind};
use crate::error::{Error, Result};
use crate::fqsolver::{canonical, solve_tuples};
use crate::reduction::{classify_prime, PrimeClass};
use crate::trees::ValencyType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Recompute the Jacobian at every step (quadratic convergence).
    #[default]
    Newton,
    /// Keep the Jacobian of the starting point (linear convergence).
    FrozenJacobian,
}

/// `prod_{i<j} (x_i - x_j)` over the listed slots, in order.
fn vandermonde<R: Ring>(xs: &[&R], like: &R) -> R {
    let mut acc = like.one_like();
    for (i, xi) in xs.iter().enumerate() {
        for xj in &xs[i + 1..] {
            acc = acc * &((*xi).clone() - *xj);
        }
    }
    acc
}

/// Jacobian of `psi_1, ..., psi_{n-1}` with respect to the roots in `vars`.
pub fn psi_jacobian<R: Ring>(m: &Model<R>, vars: &[usize]) -> Matrix<R> {
    let n = m.n();
    let p = truncated_product(m, n, false);
    let cols: Vec<Vec<R>> = vars
        .iter()
        .map(|&j| {
            // P / (1 + x_j X), truncated
            let x = &m.roots[j];
            let mut q: Vec<R> = Vec::with_capacity(n);
            for (k, c) in p.iter().enumerate() {
                let v = if k == 0 {
                    c.clone()
                } else {
                    c.clone() - &(x.clone() * &q[k - 1])
                };
                q.push(v);
            }
            let a = x.from_u64_like(m.exponents[j]);
            q.into_iter().map(|c| c * &a).collect()
        })
        .collect();
    (1..n)
        .map(|row| cols.iter().map(|c| c[row - 1].clone()).collect())
        .collect()
}

/// `prod_{j in vars} a_j * prod_{i<j in vars} (x_i - x_j)`.
pub fn psi_jacobian_closed_form<R: Ring>(m: &Model<R>, vars: &[usize]) -> R {
    let like = &m.roots[0];
    let a = vars.iter().fold(like.one_like(), |acc, &j| {
        acc * &like.from_u64_like(m.exponents[j])
    });
    let xs: Vec<&R> = vars.iter().map(|&j| &m.roots[j]).collect();
    a * &vandermonde(&xs, like)
}

/// Jacobian of `phi_1, ..., phi_n` with respect to all roots.
pub fn phi_jacobian<R: Ring>(m: &Model<R>) -> Matrix<R> {
    let n = m.n();
    (1..=n as u64)
        .map(|row| {
            m.roots
                .iter()
                .zip(&m.exponents)
                .map(|(x, &a)| x.pow(row - 1) * &x.from_u64_like(row * a))
                .collect()
        })
        .collect()
}

/// `n! prod a_i prod_{i<j} (x_j - x_i)`.
pub fn phi_jacobian_closed_form<R: Ring>(m: &Model<R>) -> R {
    let like = &m.roots[0];
    let n = m.n() as u64;
    let mut acc = like.from_integer_like(&crate::algebra::factorial(n));
    for &a in &m.exponents {
        acc = acc * &like.from_u64_like(a);
    }
    let rev: Vec<&R> = m.roots.iter().rev().collect();
    acc * &vandermonde(&rev, like)
}

fn newton<R: Ring>(
    mut y: Vec<R>,
    system: impl Fn(&[R]) -> (Vec<R>, Matrix<R>),
    schedule: Schedule,
    max_steps: usize,
) -> Result<Vec<R>> {
    let (_, j0) = system(&y);
    for _ in 0..max_steps {
        let (f, j) = system(&y);
        if f.iter().all(Ring::is_zero) {
            return Ok(y);
        }
        let jac = if schedule == Schedule::Newton {
            j
        } else {
            j0.clone()
        };
        let delta = solve(&jac, &f)
            .ok_or_else(|| Error::SingularPoint("Jacobian has no unit pivot".into()))?;
        y = y.into_iter().zip(delta).map(|(a, d)| a - &d).collect();
    }
    Err(Error::InternalInconsistency(
        "Newton iteration did not converge".into(),
    ))
}

fn step_budget(ctx: &LocalContext) -> usize {
    4 * ctx.precision_valuation() as usize + 16
}

#[derive(Clone, Debug)]
pub struct LiftResult {
    pub model: Model<LocalElem>,
    pub precision: u32,
    /// The closed-form Jacobian determinant at the lift.
    pub jacobian_witness: LocalElem,
    pub residue: Model<Gf>,
}

impl LiftResult {
    /// The lifted model reduced to the residue field.
    pub fn reduction(&self) -> Model<Gf> {
        self.model
            .map_roots(LocalElem::residue_gf)
            .with_kind(self.residue.kind)
    }
}

fn residue_context(m: &Model<Gf>) -> Result<Arc<GfContext>> {
    m.roots
        .first()
        .map(|r| Arc::clone(r.context()))
        .ok_or_else(|| Error::DegenerateInput("empty model".into()))
}

fn witness(closed: LocalElem, direct: LocalElem) -> Result<LocalElem> {
    if closed != direct {
        return Err(Error::InternalInconsistency(format!(
            "closed-form Jacobian {closed} differs from the determinant {direct}"
        )));
    }
    if !closed.is_unit() {
        return Err(Error::SingularPoint(format!(
            "Jacobian {closed} is not a unit"
        )));
    }
    Ok(closed)
}

pub fn hensel_lift_normalized(residue: &Model<Gf>, prec: u32) -> Result<LiftResult> {
    hensel_lift_normalized_with(residue, prec, Schedule::Newton)
}

/// Lifts a normalized model (one root equal to 1, held fixed) through
/// `psi_1 = ... = psi_{n-1} = 0`.
pub fn hensel_lift_normalized_with(
    residue: &Model<Gf>,
    prec: u32,
    schedule: Schedule,
) -> Result<LiftResult> {
    residue.check_distinct_units()?;
    let n = residue.n();
    let fixed = residue
        .roots
        .iter()
        .rposition(Ring::is_one)
        .ok_or_else(|| Error::NotAModel("no root equal to 1".into()))?;
    if !psi_all(residue, n - 1).iter().all(Ring::is_zero) {
        return Err(Error::NotAModel(format!(
            "{residue} fails psi_1 .. psi_{}",
            n - 1
        )));
    }
    let vars: Vec<usize> = (0..n).filter(|&j| j != fixed).collect();
    let ctx = LocalContext::unramified(&residue_context(residue)?, prec)?;
    let start = residue.map_roots(|r| ctx.lift_residue(r.encoding()));
    if !psi_jacobian_closed_form(&start, &vars).is_unit() {
        return Err(Error::SingularPoint(
            "Jacobian vanishes at the residue model".into(),
        ));
    }
    let at = |y: &[LocalElem]| {
        let mut m = start.clone();
        for (&j, v) in vars.iter().zip(y) {
            m.roots[j] = v.clone();
        }
        m
    };
    let y0: Vec<LocalElem> = vars.iter().map(|&j| start.roots[j].clone()).collect();
    let y = newton(
        y0,
        |y| {
            let m = at(y);
            (psi_all(&m, n - 1), psi_jacobian(&m, &vars))
        },
        schedule,
        step_budget(&ctx),
    )?;
    let model = at(&y).with_kind(residue.kind);
    let w = witness(
        psi_jacobian_closed_form(&model, &vars),
        determinant(&psi_jacobian(&model, &vars), &ctx.zero()),
    )?;
    Ok(LiftResult {
        model,
        precision: prec,
        jacobian_witness: w,
        residue: residue.clone(),
    })
}

fn phi_residuals<R: Ring>(m: &Model<R>) -> Vec<R> {
    let n = m.n() as u64;
    let mut f: Vec<R> = (1..=n).map(|k| phi(k, m)).collect();
    let last = f.pop().unwrap();
    f.push(last - &m.roots[0].one_like());
    f
}

/// Lifts a Kummer model through `phi_1 = ... = phi_{n-1} = 0`, `phi_n = 1`.
pub fn hensel_lift_kummer(residue: &Model<Gf>, prec: u32) -> Result<LiftResult> {
    let field = residue_context(residue)?;
    let p = field.characteristic();
    let n = residue.n();
    if p <= n as u64 {
        return Err(Error::WildPrime(format!(
            "Kummer lifting needs p > n = {n}, got {p}"
        )));
    }
    residue.check_distinct_units()?;
    if !phi_residuals(residue).iter().all(Ring::is_zero) {
        return Err(Error::NotAModel(format!("{residue} is not a Kummer model")));
    }
    let ctx = LocalContext::unramified(&field, prec)?;
    let start = residue.map_roots(|r| ctx.lift_residue(r.encoding()));
    if !phi_jacobian_closed_form(&start).is_unit() {
        return Err(Error::SingularPoint(
            "Jacobian vanishes at the residue model".into(),
        ));
    }
    let with = |y: &[LocalElem]| Model {
        roots: y.to_vec(),
        ..start.clone()
    };
    let y = newton(
        start.roots.clone(),
        |y| {
            let m = with(y);
            (phi_residuals(&m), phi_jacobian(&m))
        },
        Schedule::Newton,
        step_budget(&ctx),
    )?;
    let model = with(&y).with_kind(ModelKind::Kummer);
    let w = witness(
        phi_jacobian_closed_form(&model),
        determinant(&phi_jacobian(&model), &ctx.zero()),
    )?;
    Ok(LiftResult {
        model,
        precision: prec,
        jacobian_witness: w,
        residue: residue.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistMode {
    /// Roots `x_j = x y_j` around the slot with root 1.
    Zero,
    /// Roots `x_j = 1 + x y_j`.
    Infinity,
}

/// The element `x` with `x^{n-1} = -c`, where `c = a_i` (zero) or
/// `(-1)^n N` (infinity), possibly rescaled by a Teichmuller root of unity.
#[derive(Clone, Debug)]
pub struct TwistDescriptor {
    pub mode: TwistMode,
    pub slot: usize,
    pub x: LocalElem,
    pub constant: Integer,
    pub e: u32,
    pub h: u32,
    pub zeta: Option<u32>,
}

impl TwistDescriptor {
    pub fn new(
        t: &ValencyType,
        slot: usize,
        mode: TwistMode,
        field: &Arc<GfContext>,
        prec: u32,
        zeta: Option<u32>,
    ) -> Result<Self> {
        let n = t.n();
        if slot >= n || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "slot {} invalid for {t}",
                slot + 1
            )));
        }
        let constant = match mode {
            TwistMode::Zero => Integer::from(t.valencies()[slot]),
            TwistMode::Infinity => {
                let big_n = Integer::from(t.degree());
                if n.is_multiple_of(2) {
                    big_n
                } else {
                    -big_n
                }
            }
        };
        let e = (n - 1) as u32;
        let ctx = LocalContext::pure(field, prec, e, &constant)?;
        let mut x = ctx.generator();
        if let Some(z) = zeta {
            if z == 0 || field.pow(z, e as u64) != 1 {
                return Err(Error::InvalidArgument(format!("zeta^{e} != 1")));
            }
            x = x * &ctx.teichmuller(z);
        }
        let h = ctx.twist_valuation();
        Ok(TwistDescriptor {
            mode,
            slot,
            x,
            constant,
            e,
            h,
            zeta,
        })
    }

    pub fn context(&self) -> &Arc<LocalContext> {
        self.x.context()
    }

    /// `x^{n-1} + c`, which vanishes.
    pub fn defining_residual(&self) -> LocalElem {
        self.x.pow(self.e as u64) + &self.x.from_integer_like(&self.constant)
    }
}

fn twisted_residuals(
    b: &[u64],
    twist: &TwistDescriptor,
    n: usize,
    y: &[LocalElem],
) -> Vec<LocalElem> {
    let e = twist.e as u64;
    (1..=e)
        .map(|m| {
            let s = y.iter().zip(b).fold(twist.x.zero_like(), |acc, (yj, &bj)| {
                acc + &(yj.pow(m) * &yj.from_u64_like(bj))
            });
            let xt = twist.x.pow(e - m);
            let plus = match twist.mode {
                TwistMode::Zero => false,
                TwistMode::Infinity => (m + n as u64).is_multiple_of(2),
            };
            if plus {
                s + &xt
            } else {
                s - &xt
            }
        })
        .collect()
}

/// Lifts residues `y_j` (slots other than `twist.slot`, in order) of the
/// twisted power-sum system into the ramified ring.
pub fn lift_phi_twisted_system(
    t: &ValencyType,
    twist: &TwistDescriptor,
    residue_ys: &[Gf],
) -> Result<Vec<LocalElem>> {
    let ctx = Arc::clone(twist.context());
    let p = ctx.prime();
    let n = t.n();
    if p <= n as u64 {
        return Err(Error::WildPrime(format!(
            "twisted lifting needs p > n = {n}"
        )));
    }
    if residue_ys.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} residues",
            n - 1
        )));
    }
    let b = t.omit(twist.slot)?.valencies().to_vec();
    let y0: Vec<LocalElem> = residue_ys
        .iter()
        .map(|r| ctx.lift_residue(r.encoding()))
        .collect();
    if twisted_residuals(&b, twist, n, &y0)
        .iter()
        .any(|f| f.residue() != 0)
    {
        return Err(Error::NotAModel(
            "residues do not solve the twisted system".into(),
        ));
    }
    let as_model = |y: &[LocalElem]| Model {
        exponents: b.clone(),
        roots: y.to_vec(),
        kind: ModelKind::Kummer,
    };
    // The x-terms are constants, so the Jacobian is that of phi_1..phi_{n-1}.
    let jac = |y: &[LocalElem]| {
        let m = as_model(y);
        phi_jacobian(&m)
    };
    if !phi_jacobian_closed_form(&as_model(&y0)).is_unit() {
        return Err(Error::SingularPoint(
            "residues are not distinct units".into(),
        ));
    }
    let y = newton(
        y0,
        |y| (twisted_residuals(&b, twist, n, y), jac(y)),
        Schedule::Newton,
        step_budget(&ctx),
    )?;
    witness(
        phi_jacobian_closed_form(&as_model(&y)),
        determinant(&jac(&y), &ctx.zero()),
    )?;
    Ok(y)
}

#[derive(Clone, Debug)]
pub struct Correspondence {
    pub twist: TwistDescriptor,
    /// The reconstructed model of the full type, `Canonical` (zero) or
    /// `AiNormalized` (infinity).
    pub model: Model<LocalElem>,
    pub ys: Vec<LocalElem>,
    /// The unramified lift of the input Kummer model.
    pub kummer_lift: LiftResult,
}

fn require_regular(t: &ValencyType, slot: usize, p: u64, mode: TwistMode) -> Result<()> {
    if p <= t.n() as u64 {
        return Err(Error::WildPrime(format!("need p > n = {}", t.n())));
    }
    let class = classify_prime(t, p)?;
    let ok = match mode {
        TwistMode::Zero => matches!(&class, PrimeClass::AiRegular(s) if s.contains(&slot)),
        TwistMode::Infinity => class == PrimeClass::RegularAtInfinity,
    };
    if !ok {
        return Err(Error::NotRegular(format!("p = {p} is {class} for {t}")));
    }
    Ok(())
}

fn inverse(
    t: &ValencyType,
    slot: usize,
    mode: TwistMode,
    kummer: &Model<Gf>,
    prec: u32,
    zeta: Option<u32>,
) -> Result<Correspondence> {
    let field = residue_context(kummer)?;
    let p = field.characteristic();
    require_regular(t, slot, p, mode)?;
    if kummer.exponents != t.omit(slot)?.valencies() {
        return Err(Error::InvalidArgument(format!(
            "Kummer model exponents {:?} do not match the reduced type",
            kummer.exponents
        )));
    }
    let kummer_lift = hensel_lift_kummer(kummer, prec)?;
    let twist = TwistDescriptor::new(t, slot, mode, &field, prec, zeta)?;
    let ys = lift_phi_twisted_system(t, &twist, &kummer.roots)?;
    let ctx = twist.context();
    let mut roots = Vec::with_capacity(t.n());
    let mut it = ys.iter();
    for j in 0..t.n() {
        roots.push(if j == slot {
            ctx.one()
        } else {
            let xy = twist.x.clone() * it.next().unwrap();
            match mode {
                TwistMode::Zero => xy,
                TwistMode::Infinity => xy + &ctx.one(),
            }
        });
    }
    let kind = match mode {
        TwistMode::Zero => ModelKind::Canonical,
        TwistMode::Infinity => ModelKind::AiNormalized(slot),
    };
    let model = Model::from_parts(t.valencies().to_vec(), roots, kind)?;
    Ok(Correspondence {
        twist,
        model,
        ys,
        kummer_lift,
    })
}

fn forward(
    t: &ValencyType,
    model: &Model<LocalElem>,
    twist: &TwistDescriptor,
) -> Result<Model<Gf>> {
    let slot = twist.slot;
    if model.exponents != t.valencies() || !model.roots[slot].is_one() {
        return Err(Error::InvalidArgument(format!(
            "model is not normalized at slot {}",
            slot + 1
        )));
    }
    let ctx = twist.context();
    if !Arc::ptr_eq(model.roots[0].context(), ctx) {
        return Err(Error::InvalidArgument(
            "model and twist live in different rings".into(),
        ));
    }
    let zeta_inv = twist
        .zeta
        .map(|z| ctx.teichmuller(ctx.residue_field().inv(z).unwrap()));
    let field = ctx.residue_field();
    let mut roots = Vec::with_capacity(t.n() - 1);
    for (j, xj) in model.roots.iter().enumerate() {
        if j == slot {
            continue;
        }
        let shifted = match twist.mode {
            TwistMode::Zero => xj.clone(),
            TwistMode::Infinity => xj.clone() - &ctx.one(),
        };
        let mut y = shifted.div_by_t()?;
        if let Some(zi) = &zeta_inv {
            y = y * zi;
        }
        roots.push(field.elem(y.residue()));
    }
    Model::new(t.omit(slot)?.valencies().to_vec(), roots, ModelKind::Kummer)
}

/// Kummer residue model of the reduced type to a canonical model of `t`.
pub fn phi_inverse(
    t: &ValencyType,
    slot: usize,
    kummer: &Model<Gf>,
    prec: u32,
    zeta: Option<u32>,
) -> Result<Correspondence> {
    inverse(t, slot, TwistMode::Zero, kummer, prec, zeta)
}

/// Canonical model of `t` to the Kummer residue model of the reduced type.
pub fn phi_forward(
    t: &ValencyType,
    model: &Model<LocalElem>,
    twist: &TwistDescriptor,
) -> Result<Model<Gf>> {
    if twist.mode != TwistMode::Zero {
        return Err(Error::InvalidArgument("twist is not at zero".into()));
    }
    forward(t, model, twist)
}

/// Kummer residue model of the reduced type to an `a_i`-normalized model of
/// `t` reducing to `(1 - X)^N`.
pub fn psi_inverse(
    t: &ValencyType,
    slot: usize,
    kummer: &Model<Gf>,
    prec: u32,
    zeta: Option<u32>,
) -> Result<Correspondence> {
    inverse(t, slot, TwistMode::Infinity, kummer, prec, zeta)
}

pub fn psi_forward(
    t: &ValencyType,
    model: &Model<LocalElem>,
    twist: &TwistDescriptor,
) -> Result<Model<Gf>> {
    if twist.mode != TwistMode::Infinity {
        return Err(Error::InvalidArgument("twist is not at infinity".into()));
    }
    forward(t, model, twist)
}

/// All Kummer models of `t` with roots in `field`, one per ordering class,
/// obtained by scaling normalized models by `n`-th roots of `phi_n^{-1}`.
pub fn kummer_models_over(t: &ValencyType, field: &Arc<GfContext>) -> Result<Vec<Model<Gf>>> {
    let n = t.n();
    let mut seen = std::collections::BTreeSet::new();
    for x in solve_tuples(t, field)? {
        let s = x.iter().zip(t.valencies()).fold(0u32, |acc, (&xi, &a)| {
            field.add(
                acc,
                field.mul(
                    field.from_i64((a % field.characteristic()) as i64),
                    field.pow(xi, n as u64),
                ),
            )
        });
        let Some(inv) = field.inv(s) else { continue };
        for c in field.nth_roots(inv, n as u64) {
            let y: Vec<u32> = x.iter().map(|&xi| field.mul(c, xi)).collect();
            seen.insert(canonical(t, &y));
        }
    }
    seen.into_iter()
        .map(|y| {
            Model::new(
                t.valencies().to_vec(),
                y.iter().map(|&v| field.elem(v)).collect(),
                ModelKind::Kummer,
            )
        })
        .collect()
}

/// `beta(X)` reduced modulo the maximal ideal.
pub fn reduced_expansion(m: &Model<LocalElem>) -> Polynomial<Gf> {
    expand(m).map(LocalElem::residue_gf)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileMode {
    Zero(usize),
    Infinity,
}

/// Valuations `v(x_j - x_k)` for `j < k` (with `v(p) = e`), checked
/// against the expected pattern: around slot `i`, `v(x_j - x_i) = 0` and
/// `(n-1) v(x_j - x_k) = (n-1) v(x_j) = v(a_i)`; at infinity,
/// `(n-1) v(x_j - x_k) = v(N)`.
pub fn valuation_profile(
    m: &Model<LocalElem>,
    mode: ProfileMode,
) -> Result<Vec<(usize, usize, Option<u32>)>> {
    let n = m.n();
    let like = &m.roots[0];
    let scale = (n - 1) as u32;
    let mut out = Vec::new();
    let mismatch = |msg: String| Err(Error::ValuationMismatch(msg));
    let target = match mode {
        ProfileMode::Zero(i) => like.from_u64_like(m.exponents[i]).valuation(),
        ProfileMode::Infinity => like.from_u64_like(m.degree()).valuation(),
    };
    for j in 0..n {
        for k in j + 1..n {
            let v = (m.roots[j].clone() - &m.roots[k]).valuation();
            out.push((j, k, v));
            let expected = match mode {
                ProfileMode::Zero(i) if j == i || k == i => Some(0),
                _ => target
                    .map(|t| t / scale)
                    .filter(|_| target.unwrap() % scale == 0),
            };
            let ok = match (mode, v) {
                (ProfileMode::Zero(i), Some(v)) if j == i || k == i => v == 0,
                (_, Some(v)) => Some(scale * v) == target,
                (_, None) => false,
            };
            if !ok {
                return mismatch(format!(
                    "v(x_{} - x_{}) = {v:?}, expected {expected:?}",
                    j + 1,
                    k + 1
                ));
            }
        }
    }
    if let ProfileMode::Zero(i) = mode {
        for j in (0..n).filter(|&j| j != i) {
            if m.roots[j].valuation().map(|v| scale * v) != target {
                return mismatch(format!("v(x_{}) does not match v(a_i)/(n-1)", j + 1));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::linalg::determinant;
    use crate::algebra::{Fp, Rational};
    use crate::fqsolver::solve_over_fq;
    use proptest::prelude::*;

    fn ty(a: &[u64]) -> ValencyType {
        ValencyType::from_slice(a).unwrap()
    }

    fn rat(v: i64) -> Rational {
        Rational::from_integer(Integer::from(v))
    }

    /// -1/2 modulo 5^M.
    fn minus_half(m: u32) -> Integer {
        let pm = Integer::from(5).pow(m);
        (&pm - Integer::from(1)) / Integer::from(2)
    }

    #[test]
    fn one_two_lifts_to_minus_half() {
        let f = GfContext::new(5, 1).unwrap();
        let residue = Model::new(
            vec![1, 2],
            vec![f.elem(1), f.elem(2)],
            ModelKind::Normalized,
        )
        .unwrap();
        for m in [1u32, 2, 8, 32] {
            let lift = hensel_lift_normalized(&residue, m).unwrap();
            assert_eq!(lift.model.roots[1].coefficients()[0], minus_half(m));
            assert_eq!(lift.reduction(), residue);
            assert!(lift.jacobian_witness.is_unit());
        }
        assert_eq!(minus_half(2), Integer::from(12));
    }

    #[test]
    fn frozen_jacobian_gives_same_lift() {
        for (a, p, k) in [
            (&[1u64, 2, 3][..], 7u64, 2usize),
            (&[1, 2, 3, 5], 7, 1),
            (&[1, 1, 1, 9, 17], 2, 4),
        ] {
            for residue in solve_over_fq(&ty(a), p, k).unwrap().iter().take(3) {
                let x = hensel_lift_normalized_with(residue, 8, Schedule::Newton).unwrap();
                let y = hensel_lift_normalized_with(residue, 8, Schedule::FrozenJacobian).unwrap();
                assert_eq!(x.model, y.model);
                assert!(psi_all(&x.model, a.len() - 1).iter().all(Ring::is_zero));
                assert_eq!(x.reduction(), *residue);
            }
        }
    }

    #[test]
    fn lift_is_frobenius_equivariant() {
        let t = ty(&[1, 1, 1, 9, 17]);
        for residue in solve_over_fq(&t, 2, 4).unwrap() {
            let frob = residue.map_roots(Gf::frobenius).with_kind(residue.kind);
            let a = hensel_lift_normalized(&frob, 6).unwrap();
            let b = hensel_lift_normalized(&residue, 6).unwrap();
            assert_eq!(
                a.model.roots,
                b.model
                    .roots
                    .iter()
                    .map(LocalElem::frobenius)
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn kummer_lifts() {
        // (1,2) over F_5: x_1 = -2 x_2 and 6 x_2^2 = 1.
        let f = GfContext::new(5, 1).unwrap();
        let roots = f.nth_roots(f.inv(1).unwrap(), 2);
        assert_eq!(roots.len(), 2);
        for r in roots {
            let x1 = f.mul(f.neg(2), r);
            let m = Model::new(vec![1, 2], vec![f.elem(x1), f.elem(r)], ModelKind::Kummer).unwrap();
            let lift = hensel_lift_kummer(&m, 4).unwrap();
            assert!(phi_residuals(&lift.model).iter().all(Ring::is_zero));
            assert_eq!(hensel_lift_kummer(&m, 1).unwrap().reduction(), m);
        }
        let bad = Model::new(vec![1, 2], vec![f.elem(1), f.elem(3)], ModelKind::Standard).unwrap();
        assert!(matches!(
            hensel_lift_kummer(&bad, 3),
            Err(Error::NotAModel(_))
        ));
        let f3 = GfContext::new(2, 2).unwrap();
        let m3 =
            Model::from_parts(vec![1, 3], vec![f3.elem(1), f3.elem(2)], ModelKind::Kummer).unwrap();
        assert!(matches!(
            hensel_lift_kummer(&m3, 3),
            Err(Error::WildPrime(_))
        ));
    }

    #[test]
    fn singular_residue_is_rejected() {
        let f = GfContext::new(5, 1).unwrap();
        let m = Model::from_parts(
            vec![1, 2],
            vec![f.elem(1), f.elem(1)],
            ModelKind::Normalized,
        )
        .unwrap();
        assert!(hensel_lift_normalized(&m, 3).is_err());
    }

    #[test]
    fn jacobian_closed_forms_over_rationals() {
        let m = Model::from_parts(
            vec![2, 3, 5, 7],
            vec![rat(2), rat(-3), rat(5), rat(1)],
            ModelKind::Standard,
        )
        .unwrap();
        let vars = [0, 1, 2];
        assert_eq!(
            determinant(&psi_jacobian(&m, &vars), &rat(0)),
            psi_jacobian_closed_form(&m, &vars)
        );
        assert_eq!(
            determinant(&phi_jacobian(&m), &rat(0)),
            phi_jacobian_closed_form(&m)
        );
    }

    proptest! {
        #[test]
        fn jacobian_closed_forms_mod_p(
            a in proptest::collection::vec(1u64..50, 2..6),
            x in proptest::collection::vec(-1000i64..1000, 6),
            fixed in 0usize..6,
        ) {
            let n = a.len();
            let p = 1_000_003;
            let m = Model::from_parts(a.clone(), x[..n].iter().map(|&v| Fp::new_unchecked(v, p)).collect(), ModelKind::Standard).unwrap();
            let fixed = fixed % n;
            let vars: Vec<usize> = (0..n).filter(|&j| j != fixed).collect();
            let zero = Fp::new_unchecked(0, p);
            prop_assert_eq!(determinant(&psi_jacobian(&m, &vars), &zero), psi_jacobian_closed_form(&m, &vars));
            prop_assert_eq!(determinant(&phi_jacobian(&m), &zero), phi_jacobian_closed_form(&m));
        }
    }

    fn kummer_models(b: &ValencyType, f: &Arc<GfContext>) -> Vec<Model<Gf>> {
        let n = b.n();
        let q = f.order() as u64;
        let mut out: Vec<Vec<u32>> = Vec::new();
        for code in 0..q.pow(n as u32) {
            let x: Vec<u32> = (0..n)
                .map(|i| ((code / q.pow(i as u32)) % q) as u32)
                .collect();
            let m = Model::from_parts(
                b.valencies().to_vec(),
                x.iter().map(|&v| f.elem(v)).collect(),
                ModelKind::Kummer,
            )
            .unwrap();
            if m.check_distinct_units().is_ok() && phi_residuals(&m).iter().all(Ring::is_zero) {
                let c = canonical(b, &x);
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out.sort();
        out.into_iter()
            .map(|x| {
                Model::new(
                    b.valencies().to_vec(),
                    x.iter().map(|&v| f.elem(v)).collect(),
                    ModelKind::Kummer,
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn phi_round_trip_small() {
        let t = ty(&[1, 2, 5]);
        let f = GfContext::new(5, 1).unwrap();
        let kummers = kummer_models(&t.omit(2).unwrap(), &f);
        assert_eq!(kummers.len(), 2);
        assert_eq!(
            kummer_models_over(&t.omit(2).unwrap(), &f).unwrap(),
            kummers
        );
        for k in &kummers {
            let c = phi_inverse(&t, 2, k, 6, None).unwrap();
            assert_eq!(phi_forward(&t, &c.model, &c.twist).unwrap(), *k);
            let red = reduced_expansion(&c.model);
            let want = Polynomial::new(vec![
                f.elem(1),
                f.elem(0),
                f.elem(0),
                f.elem(0),
                f.elem(0),
                f.elem(4),
            ]);
            assert_eq!(red, want);
            for m in 1..3 {
                assert!(phi(m, &c.model).is_zero());
            }
            valuation_profile(&c.model, ProfileMode::Zero(2)).unwrap();
            assert!(c.twist.defining_residual().is_zero());
        }
    }

    #[test]
    fn psi_round_trip_small() {
        let t = ty(&[1, 2, 4]);
        let f = GfContext::new(7, 2).unwrap();
        let b = t.omit(0).unwrap();
        let kummers = kummer_models(&b, &f);
        assert!(!kummers.is_empty());
        assert_eq!(kummer_models_over(&b, &f).unwrap(), kummers);
        for k in &kummers {
            let c = psi_inverse(&t, 0, k, 5, None).unwrap();
            assert_eq!(psi_forward(&t, &c.model, &c.twist).unwrap(), *k);
            let red = reduced_expansion(&c.model);
            let want =
                Polynomial::new(vec![f.elem(1), f.elem(0)]) - Polynomial::monomial(f.elem(1), 1);
            assert_eq!(red, want.pow(7));
            for m in 1..3 {
                assert!(phi(m, &c.model).is_zero());
            }
            valuation_profile(&c.model, ProfileMode::Infinity).unwrap();
        }
    }

    #[test]
    fn equivariance_under_roots_of_unity() {
        let t = ty(&[1, 2, 3, 13]);
        let f = GfContext::new(13, 1).unwrap();
        let kummers = kummer_models(&t.omit(3).unwrap(), &f);
        assert!(!kummers.is_empty());
        for zeta in f.nth_roots(1, 3) {
            for k in kummers.iter().take(4) {
                let twisted = phi_inverse(&t, 3, k, 4, Some(zeta)).unwrap();
                let moved = k.scaled(&f.elem(zeta), ModelKind::Kummer);
                let plain = phi_inverse(&t, 3, &moved, 4, None).unwrap();
                assert_eq!(twisted.model.roots, plain.model.roots);
                assert_eq!(phi_forward(&t, &twisted.model, &twisted.twist).unwrap(), *k);
            }
        }
    }

    #[test]
    fn correspondence_rejects_bad_primes() {
        let f = GfContext::new(5, 1).unwrap();
        let k = kummer_models(&ty(&[1, 2]), &f).remove(0);
        assert!(matches!(
            phi_inverse(&ty(&[1, 2, 6]), 2, &k, 3, None),
            Err(Error::NotRegular(_))
        ));
        assert!(matches!(
            psi_inverse(&ty(&[1, 2, 5]), 2, &k, 3, None),
            Err(Error::NotRegular(_))
        ));
        // h = 2, e = 2: not pure
        let f = GfContext::new(5, 1).unwrap();
        assert!(matches!(
            TwistDescriptor::new(&ty(&[1, 2, 25]), 2, TwistMode::Zero, &f, 3, None),
            Err(Error::UnsupportedRamification(_))
        ));
    }

    #[test]
    fn valuation_profile_unramified() {
        // (1,2) at p = 3: x_2 = -1/2 and x_2 - 1 = -3/2.
        let f = GfContext::new(3, 1).unwrap();
        let ctx = LocalContext::unramified(&f, 6).unwrap();
        let x2 = ctx.from_integer(&Integer::from(-1))
            * &ctx.from_integer(&Integer::from(2)).inverse().unwrap();
        let m = Model::from_parts(vec![1, 2], vec![ctx.one(), x2], ModelKind::Normalized).unwrap();
        let prof = valuation_profile(&m, ProfileMode::Infinity).unwrap();
        assert_eq!(prof, vec![(0, 1, Some(1))]);
        let u = Model::from_parts(
            vec![1, 2],
            vec![ctx.one(), ctx.from_integer(&Integer::from(2))],
            ModelKind::Normalized,
        )
        .unwrap();
        assert!(matches!(
            valuation_profile(&u, ProfileMode::Infinity),
            Err(Error::ValuationMismatch(_))
        ));
    }
}
