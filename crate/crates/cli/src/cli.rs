//! Command-line surface.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use conelab::cone::{is_invariant, ConeRep, InvarianceMethod};
use conelab::linalg::{enumerate_words, is_vandergraft};
use conelab::simdiag::{SimDiagOptions, DEFAULT_BOUND, DEFAULT_WORD_LEN};
use conelab::{Answer, SquareMatrix, ToleranceConfig};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fixtures;
use crate::plot;
use crate::route::{decide, is_input_error, Method, RouteOptions};
use crate::schema::{self, DecisionFile, Family, InputError, DECISION_SCHEMA};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;

/// Word length of the Vandergraft screen in `classify`.
pub const SCREEN_LEN: usize = 4;

#[derive(Parser, Debug)]
#[command(name = "conelab", version, about = "Common invariant proper cones of real matrix families")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Vandergraft report per matrix and a screen of all words up to length 4.
    Classify { file: String },
    /// Decide whether the family has a common invariant proper cone.
    Common {
        file: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        #[arg(long, env = "CONELAB_SEED", default_value_t = 0)]
        seed: u64,
        /// Exponent-sum bound for the dominant index search.
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: u32,
        /// Word length of the truncated cone closure.
        #[arg(long, default_value_t = DEFAULT_WORD_LEN)]
        wordlen: u32,
        #[arg(long)]
        out: Option<String>,
        /// Omit the timestamp so equal inputs give byte-identical output.
        #[arg(long)]
        reproducible: bool,
    },
    /// Check that a cone is invariant under every matrix of a family.
    Verify {
        family: String,
        /// A cone file or a YES decision file.
        cone: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, env = "CONELAB_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Built-in families.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
    /// SVG of eigenlines and the witness sector of a 2×2 family.
    Plot { family: String, decision: String, out: String },
}

#[derive(Subcommand, Debug)]
pub enum FixtureAction {
    List,
    Emit {
        name: String,
        #[arg(long)]
        out: Option<String>,
    },
}

fn vec_str(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn write_or_print(out: &mut dyn Write, path: Option<&str>, text: &str) -> Result<(), InputError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| InputError::Io { path: p.into(), source }),
        None => out.write_all(text.as_bytes()).map_err(|source| InputError::Io { path: "stdout".into(), source }),
    }
}

fn load_family(path: &str) -> Result<Family, InputError> {
    schema::parse_family(&schema::read_text(path)?)
}

fn classify(out: &mut dyn Write, file: &str, tol: &ToleranceConfig) -> Result<i32, InputError> {
    let fam = load_family(file)?;
    for (a, label) in fam.members.iter().zip(&fam.labels) {
        let r = is_vandergraft(a, tol)?;
        if r.is_vandergraft {
            let vecs: Vec<String> = r.dominant_eigenvectors.iter().flatten().map(vec_str).collect();
            let _ = writeln!(
                out,
                "{label}: Vandergraft, rho = {:.6}, dominant eigenvectors {}",
                r.spectral_radius,
                vecs.join(" ")
            );
        } else {
            let _ = writeln!(out, "{label}: not Vandergraft: {}", r.failed_condition.as_str());
        }
        if r.near_defective {
            let _ = writeln!(out, "{label}: warning: degree decision near the rank cutoff");
        }
    }
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for (word, m) in enumerate_words(&fam.members, SCREEN_LEN)? {
        checked += 1;
        if !is_vandergraft(&m, tol)?.is_vandergraft {
            let w: Vec<&str> = word.iter().map(|&i| fam.labels[i].as_str()).collect();
            bad.push(w.join("·"));
        }
    }
    if bad.is_empty() {
        let _ = writeln!(out, "words up to length {SCREEN_LEN}: {checked} checked, all Vandergraft");
    } else {
        let _ = writeln!(
            out,
            "words up to length {SCREEN_LEN}: {checked} checked, {} not Vandergraft: {}",
            bad.len(),
            bad.join(", ")
        );
    }
    Ok(0)
}

fn exit_code(a: Answer) -> i32 {
    match a {
        Answer::Yes => EXIT_YES,
        Answer::No => EXIT_NO,
        Answer::Undecided => EXIT_UNDECIDED,
    }
}

#[allow(clippy::too_many_arguments)]
fn common(
    out: &mut dyn Write,
    file: &str,
    method: Method,
    seed: u64,
    bound: u32,
    wordlen: u32,
    dest: Option<&str>,
    reproducible: bool,
    tol: &ToleranceConfig,
) -> Result<i32, InputError> {
    let fam = load_family(file)?;
    let opts = RouteOptions { method, simdiag: SimDiagOptions { bound, word_len: wordlen, seed }, tol: *tol };
    let (route, d) = decide(&fam, &opts).map_err(|e| {
        if is_input_error(&e) {
            InputError::Core(e)
        } else {
            InputError::Invalid(e.to_string())
        }
    })?;
    let timestamp =
        (!reproducible).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
    let file = DecisionFile {
        schema: DECISION_SCHEMA.into(),
        answer: d.answer,
        witness: d.witness,
        certificate: d.certificate,
        route,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        tolerances: *tol,
        timestamp,
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    write_or_print(out, dest, &text)?;
    if dest.is_some() {
        let _ = writeln!(out, "{} via {}", file.answer.as_str(), route.as_str());
    }
    Ok(exit_code(file.answer))
}

/// Random point of the cone.
fn sample_in(k: &ConeRep, rng: &mut ChaCha8Rng) -> DVector<f64> {
    match k {
        ConeRep::Polyhedral(p) => {
            let mut v = DVector::zeros(p.dim);
            for g in &p.generators {
                v += g * rng.random_range(0.0..1.0);
            }
            v
        }
        ConeRep::Quadratic(q) => {
            let m = q.dim - 1;
            let z = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
            let len = z.dot(&(&q.form * &z)).sqrt();
            let z = if len > 0.0 { z * (rng.random_range(0.0..1.0) / len) } else { z };
            &q.axis + &q.complement_basis * z
        }
    }
}

fn verify(
    out: &mut dyn Write,
    family: &str,
    cone: &str,
    samples: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<i32, InputError> {
    let fam = load_family(family)?;
    let k = schema::parse_cone(&schema::read_text(cone)?)?;
    let n = fam.members[0].dim();
    if k.dim() != n {
        return Err(InputError::Invalid(format!("cone dimension {} does not match family dimension {n}", k.dim())));
    }
    let proper = k.is_proper(tol);
    let mut ok = proper.proper;
    let _ = writeln!(out, "cone: {}", proper.diagnosis);
    for (a, label) in fam.members.iter().zip(&fam.labels) {
        let r = is_invariant(&k, a, tol)?;
        let how = match r.method {
            InvarianceMethod::GeneratorMapping => "generator-mapping",
            InvarianceMethod::RhoCertificate => "rho-certificate",
            InvarianceMethod::SLemma => "s-lemma",
            InvarianceMethod::Sampled => "sampled",
        };
        if r.invariant {
            let _ = writeln!(out, "{label}: invariant ({how}, worst {:.3e})", r.worst_violation);
        } else {
            ok = false;
            let place = match (r.method, r.worst_generator) {
                (InvarianceMethod::GeneratorMapping, Some(g)) => format!("generator {g} maps outside"),
                (_, Some(g)) => format!("boundary sample {g} maps outside"),
                _ => "invariance certificate fails".into(),
            };
            let _ = writeln!(out, "{label}: NOT invariant: {place} (relative distance {:.3e})", r.worst_violation);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    for _ in 0..samples {
        let v = sample_in(&k, &mut rng);
        for a in &fam.members {
            let w = a.apply(&v);
            if !k.contains(&w, tol)?.inside {
                violations += 1;
            }
        }
    }
    let _ = writeln!(out, "probes: {samples} samples, {violations} violations");
    ok &= violations == 0;
    let _ = writeln!(out, "{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { 0 } else { 1 })
}

fn fixtures_cmd(out: &mut dyn Write, action: &FixtureAction) -> Result<i32, InputError> {
    match action {
        FixtureAction::List => {
            for name in fixtures::NAMES {
                let probe = name.replace("<m>", "1");
                let summary = fixtures::get(&probe).map(|f| f.summary).unwrap_or_default();
                let _ = writeln!(out, "{name:<22} {summary}");
            }
            Ok(0)
        }
        FixtureAction::Emit { name, out: dest } => {
            let f = fixtures::get(name).ok_or_else(|| InputError::Invalid(format!("unknown fixture \"{name}\"")))?;
            let mut text = serde_json::to_string_pretty(&f.file())?;
            text.push('\n');
            write_or_print(out, dest.as_deref(), &text)?;
            Ok(0)
        }
    }
}

fn plot_cmd(out: &mut dyn Write, family: &str, decision: &str, dest: &str, tol: &ToleranceConfig) -> Result<i32, InputError> {
    let fam = load_family(family)?;
    let n = fam.members[0].dim();
    if n != 2 {
        return Err(InputError::Invalid(format!("plot needs a 2x2 family, found dimension {n}")));
    }
    let d = schema::parse_decision(&schema::read_text(decision)?)?;
    let members: Vec<SquareMatrix> = fam.members.clone();
    let svg = plot::render(&members, &fam.labels, d.witness.as_ref(), tol);
    std::fs::write(dest, svg).map_err(|source| InputError::Io { path: dest.into(), source })?;
    let _ = writeln!(out, "wrote {dest}");
    Ok(0)
}

/// Runs one command; the return value is the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let tol = ToleranceConfig::default();
    let res = match &cli.command {
        Command::Classify { file } => classify(out, file, &tol),
        Command::Common { file, method, seed, bound, wordlen, out: dest, reproducible } => {
            common(out, file, *method, *seed, *bound, *wordlen, dest.as_deref(), *reproducible, &tol)
        }
        Command::Verify { family, cone, samples, seed } => verify(out, family, cone, *samples, *seed, &tol),
        Command::Fixtures { action } => fixtures_cmd(out, action),
        Command::Plot { family, decision, out: dest } => plot_cmd(out, family, decision, dest, &tol),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
