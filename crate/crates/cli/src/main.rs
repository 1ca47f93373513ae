//! Command-line driver for the cohomotopy library.
//!
//! Every subcommand reads and writes the JSON documents defined in the
//! library's `serial` module, re-runs the relevant exact checks, and
//! reports them one per line.  Exit codes: `0` when every check passes,
//! `1` when a mathematical check fails (the failed condition is named on
//! standard error), `2` for malformed input.
//!
//! `verify` re-checks any document emitted by any other subcommand, so
//! results can be exchanged and audited offline.

use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use cohomotopy::cocycle::{
    cocycle_extract, completion_to_split, milnor_patch, obstruction_group, split_complete,
    Completion, SplitWitness,
};
use cohomotopy::error::{Error, Result};
use cohomotopy::homotopy::{Check, ChiCertificate};
use cohomotopy::matrix::sl2_factor_euclidean;
use cohomotopy::pipelines::{
    cylinder_demo, klein_demo, patch_roundtrip_demo, rotation, swan_demo, torus_demo, Report,
};
use cohomotopy::ring::builtin_square;
use cohomotopy::serial::{
    certificate_to_json, checks_to_json, chi_from_json, chi_to_json, factorization_to_json,
    factors_from_json, loop_from_json, matrix_from_json, matrix_to_json, obstruction_to_json,
    patch_to_json, report_to_json, ring_from_json, row_from_json, smith_to_json, square_from_json,
    verify_witness, winding_to_json,
};
use cohomotopy::smith::smith_normal_form;
use cohomotopy::winding::winding_number;

// ====================================================================
// Argument parsing
// ====================================================================

#[derive(Parser)]
#[command(
    name = "cohomotopy",
    version,
    about = "Exact loops, homotopies and obstruction certificates in SL2 over commutative rings"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Input JSON document; `-` reads standard input.
    #[arg(long, global = true)]
    file: Option<String>,

    /// Ring or builtin-square shorthand (e.g. `Q[Y]`, `circle`, `torus`).
    #[arg(long, global = true)]
    ring: Option<String>,

    /// Integer parameter: twist degree for `swan-demo` and `obstruction
    /// --ring swan`, factor count for the seeded `milnor-patch`.
    #[arg(long, global = true)]
    n: Option<u32>,

    /// Seed for the deterministic random generator used by seeded runs.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of random trials in seeded runs.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Emit a machine-readable JSON document on standard output.
    #[arg(long, global = true)]
    json: bool,

    /// Print only failures and summary facts.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that a loop document is a based SL2 loop.
    CheckLoop,
    /// Check that a homotopy document has determinant one and pinned ends.
    CheckHomotopy,
    /// Build the canonical connecting certificate for a loop pair, or
    /// re-check a certificate document.
    Chi,
    /// Apply one of the comparison maps (psi1, psi2, phi1, phi2) and
    /// re-verify the result.
    MvMap,
    /// Re-run a constructive kernel witness (ker-psi2, ker-phi1,
    /// ker-phi2, circle-class, sphere-trivial).
    MvWitness,
    /// Factor an SL2 matrix into elementary factors and re-assemble.
    Factor,
    /// Extract the boundary co-cycle of a completion pair.
    Cocycle,
    /// Complete a split co-cycle to a free completion over the pullback,
    /// or recover a splitting from a completion (`recover-split`).
    SplitComplete,
    /// Patch an obstruction block into a unimodular row over the
    /// pullback; with `--seed`, run the seeded round-trip instead.
    MilnorPatch,
    /// Winding number of the first column of an SL2 matrix.
    Winding,
    /// Smith normal form of a small integer matrix.
    Smith,
    /// Obstruction group of a Milnor square.
    Obstruction,
    /// Freeness certificate for the squared rotation over the twisted
    /// circle square of degree `--n`.
    SwanDemo,
    /// Obstruction group of the reflected double circle.
    KleinDemo,
    /// Obstruction group of the doubled circle.
    TorusDemo,
    /// Trivial obstruction group plus seeded factorisation round-trips.
    CylinderDemo,
    /// List the builtin squares with their obstruction groups.
    Catalog,
    /// Re-verify any witness document emitted by another subcommand.
    Verify,
}

// ====================================================================
// Output
// ====================================================================

/// Everything a subcommand produces: human-readable facts, named
/// checks, and the JSON document for `--json` mode.
struct Output {
    facts: Vec<(String, String)>,
    checks: Vec<Check>,
    doc: Value,
}

impl Output {
    fn new(doc: Value) -> Output {
        Output { facts: Vec::new(), checks: Vec::new(), doc }
    }

    fn fact(&mut self, key: &str, value: impl ToString) {
        self.facts.push((key.to_string(), value.to_string()));
    }

    fn from_report(report: Report) -> Output {
        let doc = report_to_json(&report);
        Output { facts: report.facts, checks: report.checks, doc }
    }
}

fn emit(cli: &Cli, mut out: Output) -> u8 {
    if cli.json {
        if let Some(obj) = out.doc.as_object_mut() {
            obj.insert("checks".into(), checks_to_json(&out.checks));
        }
        println!("{}", serde_json::to_string_pretty(&out.doc).unwrap());
    } else {
        for (key, value) in &out.facts {
            println!("{key}: {value}");
        }
        for c in &out.checks {
            if c.ok {
                if !cli.quiet {
                    println!("ok   {}", c.name);
                }
            } else {
                println!("FAIL {}", c.name);
            }
        }
    }
    if let Some(c) = out.checks.iter().find(|c| !c.ok) {
        eprintln!("failed condition: {}", c.name);
        1
    } else {
        0
    }
}

// ====================================================================
// Input
// ====================================================================

fn read_doc(cli: &Cli) -> Result<Value> {
    let path = cli
        .file
        .as_ref()
        .ok_or_else(|| Error::Invalid("this subcommand needs --file".into()))?;
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Invalid(format!("cannot read standard input: {e}")))?;
        buf
    } else {
        fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read `{path}`: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("`{path}` is not valid JSON: {e}")))
}

fn doc_kind(doc: &Value) -> Option<&str> {
    doc.get("kind").and_then(Value::as_str)
}

fn expect_kind<'a>(doc: &'a Value, allowed: &[&str]) -> Result<&'a str> {
    match doc_kind(doc) {
        Some(k) if allowed.contains(&k) => Ok(k),
        Some(k) => Err(Error::Invalid(format!(
            "expected a document of kind {}, got `{k}`",
            allowed.join(" or ")
        ))),
        None => Err(Error::Invalid("document has no `kind` field".into())),
    }
}

/// The ring for commands that accept either a `ring` field in the
/// document or the `--ring` shorthand.
fn ring_of(cli: &Cli, doc: &Value) -> Result<cohomotopy::RingCtx> {
    if let Some(r) = doc.get("ring") {
        return ring_from_json(r);
    }
    match &cli.ring {
        Some(name) => ring_from_json(&json!(name)),
        None => Err(Error::Invalid("no ring: give a `ring` field or --ring".into())),
    }
}

/// The square for `obstruction`: from `--file` (a square or obstruction
/// document) or from `--ring NAME [--n K]`.
fn square_of(cli: &Cli) -> Result<cohomotopy::MilnorSquare> {
    if cli.file.is_some() {
        let doc = read_doc(cli)?;
        let inner = doc.get("square").cloned().unwrap_or(doc);
        return square_from_json(&inner);
    }
    match &cli.ring {
        Some(name) => match cli.n {
            Some(n) => square_from_json(&json!({"builtin": name, "n": n})),
            None => square_from_json(&json!(name)),
        },
        None => Err(Error::Invalid("no square: give --file or --ring NAME".into())),
    }
}

// ====================================================================
// Subcommands
// ====================================================================

fn run_check_doc(cli: &Cli, allowed: &[&str]) -> Result<Output> {
    let doc = read_doc(cli)?;
    expect_kind(&doc, allowed)?;
    let checks = verify_witness(&doc)?;
    let mut out = Output::new(doc);
    out.checks = checks;
    Ok(out)
}

fn run_chi(cli: &Cli) -> Result<Output> {
    let doc = read_doc(cli)?;
    let cert = match doc_kind(&doc) {
        Some("chi") => chi_from_json(&doc)?,
        _ => {
            // A loop pair: build the canonical certificate.
            let obj = doc
                .as_object()
                .ok_or_else(|| Error::Invalid("expected a JSON object".into()))?;
            let alpha = loop_from_json(
                obj.get("alpha")
                    .ok_or_else(|| Error::Invalid("missing field `alpha`".into()))?,
            )?;
            let beta = loop_from_json(
                obj.get("beta")
                    .ok_or_else(|| Error::Invalid("missing field `beta`".into()))?,
            )?;
            let xvar = obj.get("xvar").and_then(Value::as_str).unwrap_or("X");
            ChiCertificate::canonical(&alpha, &beta, xvar)?
        }
    };
    let checks = cert.checklist()?;
    let mut out = Output::new(chi_to_json(&cert));
    out.fact("base ring", &cert.base);
    out.fact("loop variable", &cert.tvar);
    out.fact("interpolation variable", &cert.xvar);
    out.checks = checks;
    Ok(out)
}

fn run_factor(cli: &Cli) -> Result<Output> {
    let doc = read_doc(cli)?;
    if doc_kind(&doc) == Some("factorization") {
        let checks = verify_witness(&doc)?;
        let mut out = Output::new(doc);
        out.checks = checks;
        return Ok(out);
    }
    let ring = ring_of(cli, &doc)?;
    let matrix = matrix_from_json(
        &ring,
        doc.get("matrix")
            .ok_or_else(|| Error::Invalid("missing field `matrix`".into()))?,
    )?;
    let factors = sl2_factor_euclidean(&matrix)?;
    let rebuilt = cohomotopy::matrix::assemble(&ring, matrix.n(), &factors)?;
    let mut out = Output::new(factorization_to_json(&matrix, &factors));
    out.fact("ring", &ring);
    out.fact("factors", factors.len());
    out.checks.push(Check::new("factors assemble exactly to the input matrix", rebuilt == matrix));
    Ok(out)
}

fn run_cocycle(cli: &Cli) -> Result<Output> {
    let mut doc = read_doc(cli)?;
    expect_kind(&doc, &["cocycle"])?;
    let obj = doc.as_object().unwrap();
    let square = square_from_json(
        obj.get("square")
            .ok_or_else(|| Error::Invalid("missing field `square`".into()))?,
    )?;
    let total = square.total();
    let row = row_from_json(
        &total,
        obj.get("row").ok_or_else(|| Error::Invalid("missing field `row`".into()))?,
    )?;
    let theta = matrix_from_json(
        &square.right,
        obj.get("theta").ok_or_else(|| Error::Invalid("missing field `theta`".into()))?,
    )?;
    let sigma = matrix_from_json(
        &square.left,
        obj.get("sigma").ok_or_else(|| Error::Invalid("missing field `sigma`".into()))?,
    )?;
    let completion = Completion::new(row, theta, sigma)?;
    let mut checks = completion.verify()?;
    let cocycle = cocycle_extract(&completion)?;
    let lambda = cocycle.lambda()?;
    checks.push(Check::new("boundary matrix fixes the first basis vector", true));
    if let Some(recorded) = obj.get("lambda") {
        let recorded = matrix_from_json(&square.common, recorded)?;
        checks.push(Check::new(
            "recorded lambda matches the extracted lower-right block",
            lambda == recorded,
        ));
    }
    doc["lambda"] = matrix_to_json(&lambda);
    let mut out = Output::new(doc);
    out.fact("provenance", &cocycle.provenance);
    out.fact("lambda", &lambda);
    out.checks = checks;
    Ok(out)
}

fn run_split_complete(cli: &Cli) -> Result<Output> {
    let mut doc = read_doc(cli)?;
    let kind = expect_kind(&doc, &["split", "recover-split"])?.to_string();
    let obj = doc.as_object().unwrap();
    let square = square_from_json(
        obj.get("square")
            .ok_or_else(|| Error::Invalid("missing field `square`".into()))?,
    )?;
    let total = square.total();
    let row = row_from_json(
        &total,
        obj.get("row").ok_or_else(|| Error::Invalid("missing field `row`".into()))?,
    )?;
    let theta = matrix_from_json(
        &square.right,
        obj.get("theta").ok_or_else(|| Error::Invalid("missing field `theta`".into()))?,
    )?;
    let sigma = matrix_from_json(
        &square.left,
        obj.get("sigma").ok_or_else(|| Error::Invalid("missing field `sigma`".into()))?,
    )?;
    let completion = Completion::new(row, theta, sigma)?;

    if kind == "split" {
        let gamma = matrix_from_json(
            &square.right,
            obj.get("gamma").ok_or_else(|| Error::Invalid("missing field `gamma`".into()))?,
        )?;
        let delta = matrix_from_json(
            &square.left,
            obj.get("delta").ok_or_else(|| Error::Invalid("missing field `delta`".into()))?,
        )?;
        let witness = SplitWitness::new(&square, gamma, delta)?;
        let completed = split_complete(&square, &completion, &witness)?;
        doc["completion"] = matrix_to_json(&completed.matrix);
        let mut out = Output::new(doc);
        out.fact("completion over", total);
        out.checks = completed.checks;
        Ok(out)
    } else {
        let a_completion = matrix_from_json(
            &total,
            obj.get("completion")
                .ok_or_else(|| Error::Invalid("missing field `completion`".into()))?,
        )?;
        let (witness, checks) = completion_to_split(&square, &completion, &a_completion)?;
        doc["gamma"] = matrix_to_json(&witness.gamma);
        doc["delta"] = matrix_to_json(&witness.delta);
        let mut out = Output::new(doc);
        out.fact("recovered gamma", &witness.gamma);
        out.fact("recovered delta", &witness.delta);
        out.checks = checks;
        Ok(out)
    }
}

fn run_milnor_patch(cli: &Cli) -> Result<Output> {
    if cli.file.is_none() || cli.seed.is_some() {
        let seed = cli.seed.unwrap_or(0);
        let count = cli.n.unwrap_or(2) as usize;
        let report = patch_roundtrip_demo(seed, count)?;
        return Ok(Output::from_report(report));
    }
    let doc = read_doc(cli)?;
    expect_kind(&doc, &["patch"])?;
    let obj = doc.as_object().unwrap();
    let square = square_from_json(
        obj.get("square")
            .ok_or_else(|| Error::Invalid("missing field `square`".into()))?,
    )?;
    let lambda = matrix_from_json(
        &square.common,
        obj.get("lambda").ok_or_else(|| Error::Invalid("missing field `lambda`".into()))?,
    )?;
    let witness = factors_from_json(
        &square.common,
        obj.get("witness").ok_or_else(|| Error::Invalid("missing field `witness`".into()))?,
    )?;
    let result = milnor_patch(&square, &lambda, &witness)?;
    let mut out = Output::new(patch_to_json(&square, &lambda, &witness, &result.row));
    out.fact("square", &square.label);
    out.fact("row over", result.row.ring());
    for (i, e) in result.row.entries().iter().enumerate() {
        out.fact(&format!("row[{i}]"), e);
    }
    out.checks = result.checks;
    Ok(out)
}

fn run_winding(cli: &Cli) -> Result<Output> {
    let doc = read_doc(cli)?;
    if doc_kind(&doc) == Some("winding") {
        let checks = verify_witness(&doc)?;
        let mut out = Output::new(doc);
        out.checks = checks;
        return Ok(out);
    }
    let ring = ring_of(cli, &doc)?;
    let matrix = matrix_from_json(
        &ring,
        doc.get("matrix")
            .ok_or_else(|| Error::Invalid("missing field `matrix`".into()))?,
    )?;
    let report = winding_number(&matrix)?;
    let mut out = Output::new(winding_to_json(&matrix, &report));
    out.fact("winding", report.value);
    out.fact("samples", report.samples);
    out.fact("residual", format!("{:.2e}", report.residual));
    out.checks.push(Check::new("accumulated angle is certified within tolerance", true));
    Ok(out)
}

fn run_smith(cli: &Cli) -> Result<Output> {
    let doc = read_doc(cli)?;
    if doc_kind(&doc) == Some("smith") {
        let checks = verify_witness(&doc)?;
        let mut out = Output::new(doc);
        out.checks = checks;
        return Ok(out);
    }
    let rows_val = doc
        .get("matrix")
        .cloned()
        .unwrap_or(doc);
    let rows: Vec<Vec<i64>> = rows_val
        .as_array()
        .ok_or_else(|| Error::Invalid("expected an array of integer rows".into()))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Invalid("matrix rows must be arrays".into()))?
                .iter()
                .map(|c| {
                    c.as_i64().ok_or_else(|| Error::Invalid("matrix entries must be integers".into()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let factors = smith_normal_form(&rows)?;
    let name = cohomotopy::smith::group_name(&factors);
    let mut out = Output::new(smith_to_json(&rows, &factors));
    out.fact("invariant factors", format!("{factors:?}"));
    out.fact("group", &name);
    out.checks.push(Check::new("diagonal entries divide in sequence", true));
    Ok(out)
}

fn run_obstruction(cli: &Cli) -> Result<Output> {
    let square = square_of(cli)?;
    let mut checks: Vec<Check> = square
        .verify()?
        .into_iter()
        .map(|(name, ok)| Check::new(&name, ok))
        .collect();
    let group = obstruction_group(&square)?;
    checks.push(Check::new("generator images have integer winding coordinates", true));
    let mut out = Output::new(obstruction_to_json(&square, &group));
    out.fact("square", &square.label);
    out.fact("winding coordinates", group.coords);
    out.fact("generators", format!("{:?}", group.generators));
    out.fact("group", &group.name);
    out.checks = checks;
    Ok(out)
}

fn run_swan_demo(cli: &Cli) -> Result<Output> {
    let n = cli.n.unwrap_or(3);
    let (report, cert) = swan_demo(n)?;
    let tau = rotation()?;
    let lambda = tau.mul(&tau)?;
    let mut doc = certificate_to_json(&cert, &lambda);
    doc["report"] = report_to_json(&report);
    let mut out = Output::new(doc);
    out.facts = report.facts;
    out.checks = report.checks;
    Ok(out)
}

fn run_catalog(cli: &Cli) -> Result<Output> {
    let mut report = Report { title: "builtin squares".into(), facts: Vec::new(), checks: Vec::new() };
    let entries: Vec<(&str, Option<u32>)> = vec![
        ("circle", None),
        ("cylinder", None),
        ("torus", None),
        ("klein", None),
        ("sphere", None),
        ("projective", None),
        ("swan", Some(2)),
        ("swan", Some(3)),
    ];
    for (name, n) in entries {
        let square = builtin_square(name, n)?;
        let label = match n {
            Some(k) => format!("{name} (degree {k})"),
            None => name.to_string(),
        };
        for (check_name, ok) in square.verify()? {
            report.checks.push(Check::new(&format!("{label}: {check_name}"), ok));
        }
        let group = obstruction_group(&square)?;
        report.facts.push((label, group.name));
    }
    let _ = cli;
    Ok(Output::from_report(report))
}

fn run_verify(cli: &Cli) -> Result<Output> {
    let doc = read_doc(cli)?;
    let checks = verify_witness(&doc)?;
    let kind = doc_kind(&doc).unwrap_or("?").to_string();
    let report = Report {
        title: format!("re-verified a `{kind}` document"),
        facts: vec![("kind".into(), kind)],
        checks,
    };
    Ok(Output::from_report(report))
}

fn run(cli: &Cli) -> Result<Output> {
    match cli.command {
        Cmd::CheckLoop => run_check_doc(cli, &["loop", "path"]),
        Cmd::CheckHomotopy => run_check_doc(cli, &["homotopy"]),
        Cmd::Chi => run_chi(cli),
        Cmd::MvMap => run_check_doc(cli, &["mv-map"]),
        Cmd::MvWitness => run_check_doc(cli, &["mv-witness"]),
        Cmd::Factor => run_factor(cli),
        Cmd::Cocycle => run_cocycle(cli),
        Cmd::SplitComplete => run_split_complete(cli),
        Cmd::MilnorPatch => run_milnor_patch(cli),
        Cmd::Winding => run_winding(cli),
        Cmd::Smith => run_smith(cli),
        Cmd::Obstruction => run_obstruction(cli),
        Cmd::SwanDemo => run_swan_demo(cli),
        Cmd::KleinDemo => Ok(Output::from_report(klein_demo()?)),
        Cmd::TorusDemo => Ok(Output::from_report(torus_demo()?)),
        Cmd::CylinderDemo => Ok(Output::from_report(cylinder_demo(
            cli.seed.unwrap_or(0),
            cli.samples.unwrap_or(10),
        )?)),
        Cmd::Catalog => run_catalog(cli),
        Cmd::Verify => run_verify(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => ExitCode::from(emit(&cli, out)),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
