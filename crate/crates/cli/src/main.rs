use std::fmt::Write as _;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use d4trees::algebra::galois::is_irreducible;
use d4trees::algebra::{
    discriminant, factorize, Fp, Gf, GfContext, Integer, LocalElem, Polynomial,
};
use d4trees::equations::{check_conditions, Model};
use d4trees::families::{
    approximate_roots, family_ab, family_abc_disc, family_abc_fp_trichotomy, family_ones_ab_hpoly,
    family_ones_ab_model, family_regularity_constants,
};
use d4trees::fqsolver::{orbit_report, rational_models, DEFAULT_K_MAX};
use d4trees::lifting::{
    hensel_lift_kummer, hensel_lift_normalized, kummer_models_over, phi_forward, phi_inverse,
    psi_forward, psi_inverse, reduced_expansion, valuation_profile, Correspondence, LiftResult,
    ProfileMode, TwistDescriptor,
};
use d4trees::reduction::{
    classify_prime, cyclotomic_orbit_count, h_p, normalize_exponents, ramification_bound_report,
    reduction_report, DInvariant, Locus, RamificationIndex,
};
use d4trees::trees::{
    count_trees, enumerate_trees, normalized_model_count, predicted_normalized_models, ValencyType,
};
use d4trees::Error;

const SCHEMA_VERSION: u32 = 1;
const ENUMERATION_LIMIT: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "d4trees",
    version,
    about = "Models of diameter-four trees over finite fields, local rings and number fields"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads for parallel searches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LocusArg {
    Zero,
    Infinity,
}

#[derive(Subcommand)]
enum Command {
    /// Count and enumerate the planar trees of a valency type.
    Trees {
        #[arg(value_parser = parse_type)]
        valency_type: TypeArg,
    },
    /// Normalized models over finite fields with Galois orbits.
    Solve {
        #[arg(long = "type", value_parser = parse_type)]
        valency_type: TypeArg,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        kmax: usize,
    },
    /// Bad primes, their classification and ramification data.
    Invariants {
        #[arg(long = "type", value_parser = parse_type)]
        valency_type: TypeArg,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Lift finite-field models to the unramified local ring mod p^M.
    Lift {
        #[arg(long = "type", value_parser = parse_type)]
        valency_type: TypeArg,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        precision: u32,
        /// Lift Kummer models instead of normalized ones.
        #[arg(long)]
        kummer: bool,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        kmax: usize,
    },
    /// Kummer models of the reduced type to canonical or infinity-normalized models.
    Correspondence {
        #[arg(long = "type", value_parser = parse_type)]
        valency_type: TypeArg,
        #[arg(long)]
        p: u64,
        /// 1-based slot of the removed valency.
        #[arg(long)]
        slot: usize,
        #[arg(long, value_enum)]
        locus: LocusArg,
        #[arg(long, default_value_t = 4)]
        precision: u32,
        /// Residue field degree (default: where the reduced type's search completes).
        #[arg(long)]
        k: Option<usize>,
    },
    /// Closed-form families.
    Family {
        #[command(subcommand)]
        family: FamilyCommand,
    },
    /// Sweep of the (1,...,1,a,b) family testing irreducibility of h modulo small primes.
    Census {
        #[arg(long, value_enum)]
        family: CensusFamily,
        #[arg(long)]
        nmax: u64,
        #[arg(long)]
        bmax: u64,
        #[arg(long, default_value_t = 100)]
        pmax: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CensusFamily {
    OnesAb,
}

#[derive(Subcommand)]
enum FamilyCommand {
    /// Type (a,b).
    Ab {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
    },
    /// Type (a,b,c): discriminant and reduction behaviour at p.
    Abc {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Type (1,...,1,a,b) with n slots.
    OnesAb {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: Option<u64>,
        /// 0-based index of the root of h used to build an exact model.
        #[arg(long)]
        root: Option<usize>,
    },
}

#[derive(Clone, Debug)]
struct TypeArg(Vec<u64>);

fn parse_type(s: &str) -> Result<TypeArg, String> {
    s.split(',')
        .map(|v| {
            let v = v.trim();
            match v.parse::<u64>() {
                Ok(0) | Err(_) => Err(format!("bad valency '{v}'")),
                Ok(a) => Ok(a),
            }
        })
        .collect::<Result<_, _>>()
        .map(TypeArg)
}

fn valency_type(TypeArg(raw): TypeArg, warnings: &mut Vec<String>) -> Result<ValencyType, Error> {
    if raw.windows(2).any(|w| w[0] > w[1]) {
        warnings.push(format!("valency type {raw:?} is not ascending; sorting"));
    }
    ValencyType::new(raw)
}

struct Report {
    text: String,
    json: Value,
}

fn int(v: &Integer) -> Value {
    Value::String(v.to_string())
}

fn type_json(t: &ValencyType) -> Value {
    json!(t.valencies())
}

fn field_json(f: &GfContext) -> Value {
    json!({ "p": f.characteristic(), "k": f.degree(), "modulus": f.modulus() })
}

fn gf_json(x: &Gf) -> Value {
    json!(x.digits())
}

fn local_json(x: &LocalElem) -> Value {
    let c = x.context();
    let coeffs: Vec<Vec<Value>> = x
        .digits()
        .iter()
        .map(|d| d.iter().map(int).collect())
        .collect();
    json!({
        "p": c.prime(),
        "modulus": c.residue_field().modulus(),
        "ramification": c.ramification(),
        "twist_constant": int(c.twist_constant()),
        "precision": c.precision(),
        "coeffs": coeffs,
    })
}

fn model_json<R>(m: &Model<R>, elem: impl Fn(&R) -> Value) -> Value {
    json!({
        "exponents": m.exponents,
        "roots": m.roots.iter().map(elem).collect::<Vec<_>>(),
        "kind": m.kind.to_string(),
    })
}

fn d_json(d: &DInvariant) -> Value {
    json!({ "primes": d.primes, "exact": d.exact.as_ref().map(int) })
}

fn d_text(d: &DInvariant) -> String {
    let primes: Vec<String> = d.primes.iter().map(u64::to_string).collect();
    match &d.exact {
        Some(v) => format!("{v} (primes {{{}}})", primes.join(",")),
        None => format!("primes {{{}}}", primes.join(",")),
    }
}

fn locus_text(l: Locus) -> String {
    match l {
        Locus::Zero(i) => format!("zero({})", i + 1),
        Locus::Infinity => "infinity".into(),
    }
}

fn ram_json(r: &RamificationIndex) -> Value {
    json!({ "locus": locus_text(r.locus), "e": r.e, "n0": r.n0, "h": r.h, "classes": r.classes })
}

fn cmd_trees(t: &ValencyType) -> Result<Report, Error> {
    let count = count_trees(t);
    let predicted = predicted_normalized_models(t);
    let mut text = format!("type {t}\ntrees {count}\nnormalized models {predicted}\n");
    let listed = count <= Integer::from(ENUMERATION_LIMIT);
    let mut rows = Vec::new();
    if listed {
        let _ = writeln!(text, "{:<32} {:>4} {:>7}", "necklace", "aut", "models");
        for tree in enumerate_trees(t) {
            let nm = normalized_model_count(&tree);
            let s: Vec<String> = tree.necklace.iter().map(u64::to_string).collect();
            let _ = writeln!(text, "{:<32} {:>4} {:>7}", s.join(","), tree.aut_order, nm);
            rows.push(json!({ "necklace": tree.necklace, "aut_order": tree.aut_order, "normalized_models": nm }));
        }
    } else {
        let _ = writeln!(
            text,
            "enumeration omitted (more than {ENUMERATION_LIMIT} trees)"
        );
    }
    Ok(Report {
        text,
        json: json!({
            "type": type_json(t),
            "count": int(&count),
            "normalized_models": predicted,
            "trees": if listed { Value::Array(rows) } else { Value::Null },
        }),
    })
}

fn cmd_solve(t: &ValencyType, p: u64, kmax: usize) -> Result<Report, Error> {
    let r = orbit_report(t, p, kmax)?;
    let f = &r.field;
    let mut text = format!(
        "type {t} over F_{}^{}\nmodels {} (predicted {}){}\n",
        p,
        r.k_searched,
        r.models.len(),
        r.predicted_models,
        if r.complete { "" } else { " INCOMPLETE" }
    );
    if let Some(n) = &r.note {
        let _ = writeln!(text, "note: {n}");
    }
    let fmt_tuple = |x: &[u32]| {
        x.iter()
            .map(|&v| f.format(v))
            .collect::<Vec<_>>()
            .join(", ")
    };
    for (i, x) in r.models.iter().enumerate() {
        let _ = writeln!(
            text,
            "  model {i}: ({}) degree {}",
            fmt_tuple(x),
            r.model_splitting_degree(i)
        );
    }
    let _ = writeln!(text, "trees {}", r.trees.len());
    for (j, tr) in r.trees.iter().enumerate() {
        let _ = writeln!(
            text,
            "  tree {j}: models {:?} aut {} splitting {} moduli {} orbit {}",
            tr.models, tr.aut_order, tr.splitting_degree, tr.moduli_degree, tr.orbit
        );
    }
    let _ = writeln!(text, "orbit sizes {:?}", r.orbit_sizes());
    let rational = rational_models(&r);
    let _ = writeln!(text, "models over F_p {rational:?}");
    let models: Vec<Value> = r
        .models
        .iter()
        .enumerate()
        .map(|(i, x)| {
            json!({
                "roots": x.iter().map(|&v| f.digits(v)).collect::<Vec<_>>(),
                "splitting_degree": r.model_splitting_degree(i),
            })
        })
        .collect();
    let trees: Vec<Value> = r
        .trees
        .iter()
        .map(|tr| {
            json!({
                "models": tr.models, "aut_order": tr.aut_order, "splitting_degree": tr.splitting_degree,
                "moduli_degree": tr.moduli_degree, "orbit": tr.orbit,
            })
        })
        .collect();
    Ok(Report {
        text,
        json: json!({
            "type": type_json(t), "p": p, "field": field_json(f), "k_searched": r.k_searched,
            "complete": r.complete, "note": r.note, "predicted_models": r.predicted_models,
            "models": models, "trees": trees, "orbits": r.orbits, "rational_models": rational,
        }),
    })
}

fn cmd_invariants(t: &ValencyType, p: Option<u64>) -> Result<Report, Error> {
    let r = reduction_report(t)?;
    let odd: Vec<u64> = r.d.primes.iter().copied().filter(|&q| q != 2).collect();
    let mut text = format!("type {t}\nd {}\nodd prime support {odd:?}\n", d_text(&r.d));
    for (i, d) in r.d_omit.iter().enumerate() {
        let _ = writeln!(text, "d_{} {}", i + 1, d_text(d));
    }
    let _ = writeln!(text, "d_proper {}", d_text(&r.d_proper));
    let _ = writeln!(text, "{:>8}  {:<24} ramification", "prime", "class");
    let mut primes = Vec::new();
    for (q, class, ram) in &r.primes {
        let rs = ram
            .as_ref()
            .map(|x| format!("{} e={} n0={} h={}", locus_text(x.locus), x.e, x.n0, x.h))
            .unwrap_or_default();
        let _ = writeln!(text, "{q:>8}  {:<24} {rs}", class.to_string());
        primes.push(json!({ "p": q, "class": class.to_string(), "ramification": ram.as_ref().map(ram_json) }));
    }
    let mut at_p = Value::Null;
    if let Some(p) = p {
        let class = classify_prime(t, p)?;
        let h = h_p(t.n() as u64, p);
        let normalized = normalize_exponents(t, p)?;
        let _ = writeln!(
            text,
            "at p = {p}: {class}, h = {h}, normalized exponents {normalized}"
        );
        let bound = match ramification_bound_report(t, p) {
            Ok(b) => {
                let _ = writeln!(
                    text,
                    "  ramification bound at {}: lower {} upper {}{}",
                    locus_text(b.locus),
                    b.lower,
                    b.upper,
                    if b.totally_determined {
                        " (determined)"
                    } else {
                        ""
                    }
                );
                json!({ "locus": locus_text(b.locus), "lower": b.lower, "upper": b.upper, "totally_determined": b.totally_determined })
            }
            Err(Error::NotApplicable(_)) => Value::Null,
            Err(e) => return Err(e),
        };
        let orbits = match cyclotomic_orbit_count(t, p) {
            Ok(c) => {
                let _ = writeln!(text, "  predicted orbit count {c}");
                int(&c)
            }
            Err(Error::NotApplicable(_)) => Value::Null,
            Err(e) => return Err(e),
        };
        at_p = json!({
            "p": p, "class": class.to_string(), "h": h, "normalized_exponents": type_json(&normalized),
            "ramification_bound": bound, "cyclotomic_orbit_count": orbits,
        });
    }
    Ok(Report {
        text,
        json: json!({
            "type": type_json(t), "d": d_json(&r.d), "odd_prime_support": odd,
            "d_omit": r.d_omit.iter().map(d_json).collect::<Vec<_>>(), "d_proper": d_json(&r.d_proper),
            "primes": primes, "at_p": at_p,
        }),
    })
}

fn lift_entry(l: &LiftResult, text: &mut String, idx: usize) -> Value {
    let _ = writeln!(text, "  model {idx}: residue {}", l.residue);
    for (a, x) in l.model.exponents.iter().zip(&l.model.roots) {
        let _ = writeln!(text, "    a={a} x={x}");
    }
    let _ = writeln!(text, "    jacobian {}", l.jacobian_witness);
    json!({
        "residue": model_json(&l.residue, gf_json),
        "model": model_json(&l.model, local_json),
        "jacobian": local_json(&l.jacobian_witness),
        "reduction_matches": l.reduction() == l.residue,
    })
}

fn cmd_lift(
    t: &ValencyType,
    p: u64,
    prec: u32,
    kummer: bool,
    kmax: usize,
) -> Result<Report, Error> {
    let r = orbit_report(t, p, kmax)?;
    let residues: Vec<Model<Gf>> = if kummer {
        kummer_models_over(t, &r.field)?
    } else {
        (0..r.models.len()).map(|i| r.model(i)).collect()
    };
    let lifts: Vec<LiftResult> = residues
        .par_iter()
        .map(|m| {
            if kummer {
                hensel_lift_kummer(m, prec)
            } else {
                hensel_lift_normalized(m, prec)
            }
        })
        .collect::<Result<_, _>>()?;
    let mut text = format!(
        "type {t}: {} {} models over F_{p}^{} lifted mod p^{prec}\n",
        lifts.len(),
        if kummer { "Kummer" } else { "normalized" },
        r.field.degree()
    );
    let entries: Vec<Value> = lifts
        .iter()
        .enumerate()
        .map(|(i, l)| lift_entry(l, &mut text, i))
        .collect();
    Ok(Report {
        text,
        json: json!({
            "type": type_json(t), "p": p, "precision": prec, "kummer": kummer,
            "field": field_json(&r.field), "lifts": entries,
        }),
    })
}

/// Smallest `F_{p^k}` carrying as many Kummer models as predicted.
fn smallest_complete_field(
    t: &ValencyType,
    p: u64,
    predicted: u64,
) -> Result<(Arc<GfContext>, Vec<Model<Gf>>), Error> {
    let mut last = None;
    for k in 1..=DEFAULT_K_MAX {
        let attempt =
            GfContext::new(p, k).and_then(|f| kummer_models_over(t, &f).map(|km| (f, km)));
        let (f, km) = match attempt {
            Ok(x) => x,
            Err(Error::SearchTooLarge(_)) if last.is_some() => break,
            Err(e) => return Err(e),
        };
        if km.len() as u64 >= predicted {
            return Ok((f, km));
        }
        last = Some((f, km));
    }
    Ok(last.expect("at least one field"))
}

type InverseFn =
    fn(&ValencyType, usize, &Model<Gf>, u32, Option<u32>) -> Result<Correspondence, Error>;
type ForwardFn = fn(&ValencyType, &Model<LocalElem>, &TwistDescriptor) -> Result<Model<Gf>, Error>;

fn cmd_correspondence(
    t: &ValencyType,
    p: u64,
    slot: usize,
    locus: LocusArg,
    prec: u32,
    k: Option<usize>,
) -> Result<Report, Error> {
    if slot == 0 || slot > t.n() {
        return Err(Error::InvalidArgument(format!(
            "slot {slot} out of range 1..{}",
            t.n()
        )));
    }
    let i = slot - 1;
    let reduced = t.omit(i)?;
    let predicted = predicted_normalized_models(&reduced);
    let (field, kummers) = match k {
        Some(k) => {
            let f = GfContext::new(p, k)?;
            let km = kummer_models_over(&reduced, &f)?;
            (f, km)
        }
        None => smallest_complete_field(&reduced, p, predicted)?,
    };
    let (inverse, forward, profile, expected): (InverseFn, ForwardFn, _, _) = match locus {
        LocusArg::Zero => (
            phi_inverse,
            phi_forward,
            ProfileMode::Zero(i),
            t.valencies()[i],
        ),
        LocusArg::Infinity => (psi_inverse, psi_forward, ProfileMode::Infinity, t.degree()),
    };
    let one = field.elem(1);
    let target = (Polynomial::constant(one.clone()) - Polynomial::monomial(one, 1)).pow(expected);
    let results: Vec<_> = kummers
        .par_iter()
        .map(|km| -> Result<_, Error> {
            let c = inverse(t, i, km, prec, None)?;
            let back = forward(t, &c.model, &c.twist)?;
            let profile_ok = valuation_profile(&c.model, profile).is_ok();
            let reduces = reduced_expansion(&c.model) == target;
            Ok((c, back == *km, profile_ok, reduces))
        })
        .collect::<Result<_, _>>()?;
    let mut text = format!(
        "type {t}, slot {slot}, locus {}, reduced type {reduced}, F_{p}^{}, precision {prec}\nKummer models {} (predicted {predicted})\n",
        if locus == LocusArg::Zero { "zero" } else { "infinity" },
        field.degree(),
        kummers.len()
    );
    let mut entries = Vec::new();
    for (j, (km, (c, round, prof, red))) in kummers.iter().zip(&results).enumerate() {
        let _ = writeln!(text, "  {j}: {km}");
        for (a, x) in c.model.exponents.iter().zip(&c.model.roots) {
            let _ = writeln!(text, "    a={a} x={x}");
        }
        let _ = writeln!(
            text,
            "    round trip {round}, valuation profile {prof}, reduction (1-X)^{expected} {red}"
        );
        entries.push(json!({
            "kummer": model_json(km, gf_json), "model": model_json(&c.model, local_json),
            "round_trip": round, "valuation_profile": prof, "reduction": red,
        }));
    }
    let all_ok = results.iter().all(|(_, a, b, c)| *a && *b && *c);
    let _ = writeln!(
        text,
        "all checks {}",
        if all_ok { "passed" } else { "FAILED" }
    );
    Ok(Report {
        text,
        json: json!({
            "type": type_json(t), "slot": slot, "locus": if locus == LocusArg::Zero { "zero" } else { "infinity" },
            "reduced_type": type_json(&reduced), "field": field_json(&field), "precision": prec, "predicted": predicted,
            "models": entries, "all_checks": all_ok,
        }),
    })
}

fn cmd_family(f: FamilyCommand) -> Result<Report, Error> {
    match f {
        FamilyCommand::Ab { a, b } => {
            let m = family_ab(a, b)?;
            let c = check_conditions(&m)?;
            Ok(Report {
                text: format!(
                    "beta(X) = {m}\nconditions i={} ii={} iii={} iv={}\n",
                    c.i, c.ii, c.iii, c.iv
                ),
                json: json!({
                    "exponents": m.exponents, "roots": m.roots.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                    "conditions": [c.i, c.ii, c.iii, c.iv],
                }),
            })
        }
        FamilyCommand::Abc { a, b, c, p } => {
            let d = family_abc_disc(a, b, c);
            let fac = factorize(&d)?;
            let mut text = format!("D = {d} = {fac}\n");
            let mut case = Value::Null;
            if let Some(p) = p {
                let k = family_abc_fp_trichotomy(a, b, c, p)?;
                let _ = writeln!(text, "at p = {p}: {k}");
                case = Value::String(k.to_string());
            }
            Ok(Report {
                text,
                json: json!({ "disc": int(&d), "factorization": fac.to_string(), "case": case }),
            })
        }
        FamilyCommand::OnesAb { n, a, b, root } => {
            let consts = family_regularity_constants(n, a, b)?;
            let mut text = format!("c = {} = {}\n", consts.c, consts.c_factors);
            if let (Some(u), Some(uf)) = (&consts.u, &consts.u_factors) {
                let _ = writeln!(text, "u = {u} = {uf}");
            }
            let mut out = json!({
                "c": int(&consts.c), "c_factorization": consts.c_factors.to_string(),
                "u": consts.u.as_ref().map(int), "u_factorization": consts.u_factors.as_ref().map(|f| f.to_string()),
            });
            if let Some(b) = b {
                let h = family_ones_ab_hpoly(n, a, b)?;
                let disc = discriminant(&h)?;
                let fac = factorize(&disc)?;
                let roots = approximate_roots(&h);
                let _ = writeln!(text, "h = {h}\ndisc(h) = {disc} = {fac}");
                for (j, z) in roots.iter().enumerate() {
                    let _ = writeln!(text, "  root {j}: {:.9} {:+.9}i", z.re, z.im);
                }
                out["h"] = json!(h.coeffs().iter().map(int).collect::<Vec<_>>());
                out["disc"] = int(&disc);
                out["disc_factorization"] = Value::String(fac.to_string());
                out["roots"] = json!(roots
                    .iter()
                    .map(|z| [format!("{:.9}", z.re), format!("{:.9}", z.im)])
                    .collect::<Vec<_>>());
                if let Some(ri) = root {
                    let m = family_ones_ab_model(n, a, b, ri)?;
                    let (r1, r2) = m.numeric_residuals();
                    let _ = writeln!(
                        text,
                        "model at root {ri}: beta(X) = {}\nu = {}\nresiduals {r1:.3e} {r2:.3e}",
                        m.beta, m.u
                    );
                    out["model"] = json!({
                        "root_index": ri, "beta": m.beta.to_string(), "u": m.u.to_string(),
                        "residuals": [format!("{r1:.3e}"), format!("{r2:.3e}")],
                    });
                }
            }
            Ok(Report { text, json: out })
        }
    }
}

/// Smallest prime `p <= pmax` not dividing the leading coefficient with
/// `h` irreducible mod `p`.
fn irreducibility_witness(h: &Polynomial<Integer>, pmax: u64) -> Option<u64> {
    let lead = h.leading()?.clone();
    (2..=pmax)
        .filter(|&p| d4trees::algebra::is_prime_u64(p))
        .find(|&p| {
            let pi = Integer::from(p);
            if (&lead % &pi) == Integer::from(0) {
                return false;
            }
            let red: Vec<Fp> = h
                .coeffs()
                .iter()
                .map(|c| {
                    let r = ((c % &pi) + &pi) % &pi;
                    Fp::new(i64::try_from(r).unwrap_or(0), p).expect("prime modulus")
                })
                .collect();
            is_irreducible(&Polynomial::new(red))
        })
}

fn cmd_census(nmax: u64, bmax: u64, pmax: u64) -> Result<Report, Error> {
    let mut cells = Vec::new();
    for n in 3..=nmax {
        for a in 2..=bmax {
            for b in a + 1..=bmax {
                cells.push((n, a, b));
            }
        }
    }
    let rows: Vec<(u64, u64, u64, usize, Option<u64>)> = cells
        .par_iter()
        .map(|&(n, a, b)| -> Result<_, Error> {
            let h = family_ones_ab_hpoly(n, a, b)?;
            Ok((
                n,
                a,
                b,
                h.degree().unwrap_or(0),
                irreducibility_witness(&h, pmax),
            ))
        })
        .collect::<Result<_, _>>()?;
    let mut text = format!(
        "{:>3} {:>4} {:>4} {:>4}  irreducible mod\n",
        "n", "a", "b", "deg"
    );
    let undecided = rows.iter().filter(|r| r.4.is_none()).count();
    for (n, a, b, d, w) in &rows {
        let _ = writeln!(
            text,
            "{n:>3} {a:>4} {b:>4} {d:>4}  {}",
            w.map_or("undecided".to_string(), |p| p.to_string())
        );
    }
    let _ = writeln!(text, "{} cells, {} undecided", rows.len(), undecided);
    Ok(Report {
        text,
        json: json!({
            "family": "ones-ab", "pmax": pmax,
            "rows": rows.iter().map(|(n, a, b, d, w)| json!({ "n": n, "a": a, "b": b, "degree": d, "witness_prime": w })).collect::<Vec<_>>(),
            "undecided": undecided,
        }),
    })
}

fn run(cli: Cli, warnings: &mut Vec<String>) -> Result<(&'static str, Report), Error> {
    Ok(match cli.command {
        Command::Trees { valency_type: raw } => {
            ("trees", cmd_trees(&valency_type(raw, warnings)?)?)
        }
        Command::Solve {
            valency_type: raw,
            p,
            kmax,
        } => ("solve", cmd_solve(&valency_type(raw, warnings)?, p, kmax)?),
        Command::Invariants {
            valency_type: raw,
            p,
        } => (
            "invariants",
            cmd_invariants(&valency_type(raw, warnings)?, p)?,
        ),
        Command::Lift {
            valency_type: raw,
            p,
            precision,
            kummer,
            kmax,
        } => (
            "lift",
            cmd_lift(&valency_type(raw, warnings)?, p, precision, kummer, kmax)?,
        ),
        Command::Correspondence {
            valency_type: raw,
            p,
            slot,
            locus,
            precision,
            k,
        } => (
            "correspondence",
            cmd_correspondence(&valency_type(raw, warnings)?, p, slot, locus, precision, k)?,
        ),
        Command::Family { family } => ("family", cmd_family(family)?),
        Command::Census {
            family: CensusFamily::OnesAb,
            nmax,
            bmax,
            pmax,
        } => ("census", cmd_census(nmax, bmax, pmax)?),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut warnings = Vec::new();
    let result = run(cli, &mut warnings);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match result {
        Ok((command, report)) => {
            match format {
                Format::Text => print!("{}", report.text),
                Format::Json => {
                    let doc = json!({
                        "schema_version": SCHEMA_VERSION, "command": command,
                        "warnings": warnings, "result": report.json,
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&doc).expect("serializable")
                    );
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.tag());
            if format == Format::Json {
                let doc = json!({ "schema_version": SCHEMA_VERSION, "error": { "tag": e.tag(), "message": e.to_string() } });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&doc).expect("serializable")
                );
            }
            ExitCode::from(3)
        }
    }
}
