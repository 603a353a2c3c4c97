//! `kclaw`: build biregular multigraphs with certified second eigenvalues,
//! and poke at the exact-arithmetic machinery underneath.
//!
//! Exit codes: 0 success (certificate/oracle passed), 1 verification or
//! oracle failure, 2 invalid input, 3 enumeration cap exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use kclaw_core::bounds::{cor_ok_bound, r_bound, ramanujan_bound, u_star, BoundParams};
use kclaw_core::builder::{construct, node_gram_poly, state_from_text, BigraphAdjacency};
use kclaw_core::conv::{expected_union_gram, rect_conv, ConvDims, TrivialValue};
use kclaw_core::error::Error as CoreError;
use kclaw_core::matrix::{claw_matrix, RatMatrix};
use kclaw_core::oracle::{
    expected_bipartite_charpoly_bruteforce, expected_gram_charpoly_signed,
    minor_orthogonality_check, partial_matching_bruteforce, PermEnsemble,
};
use kclaw_core::poly::RatPoly;
use kclaw_core::rat::{decimal_string, format_rat, parse_rat, rat, to_f64};
use kclaw_core::theta::{expected_completion, gram_poly_from_completion, theta_hat, FrameDims};
use kclaw_core::verify::{certify_ramanujan, check_biregular, lambda2_numeric};

const DEFAULT_CAP: u128 = 1_000_000;

#[derive(Parser)]
#[command(
    name = "kclaw",
    version,
    about = "Biregular multigraph builder with exact spectral certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for candidate/oracle evaluation
    /// (default: available parallelism; env KCLAW_WORKERS)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Enumeration cap for brute-force oracles
    /// (default: 1000000; env KCLAW_CAP)
    #[arg(long, global = true)]
    cap: Option<u128>,
    /// Seed for Monte-Carlo oracles; everything else is deterministic
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Interval precision in bits for irrational bounds
    #[arg(long, global = true, default_value_t = 128)]
    precision_bits: u32,
    /// Emit machine-readable JSON instead of text reports
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build an (n, k, d) multigraph greedily and certify it
    Construct {
        n: usize,
        k: usize,
        d: usize,
        /// Directory for graph.txt, trail.txt, certificate.txt
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Certify a graph file; optional k and d must match its header
    Verify {
        graph: PathBuf,
        k: Option<usize>,
        d: Option<usize>,
    },
    /// Additively convolve two polynomial files over an m x n frame
    Convolve {
        p: PathBuf,
        q: PathBuf,
        m: usize,
        n: usize,
        /// Output file (default: stdout)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the spectral bound for (k, d); with --theta and --n also the
    /// theta-dependent bound, its optimizer, and the R(u) value at --u
    Bound {
        k: usize,
        d: usize,
        /// Trivial-value parameter (rational, e.g. 2 or 5/2)
        #[arg(long)]
        theta: Option<String>,
        /// Evaluation point for R(u) (rational)
        #[arg(long)]
        u: Option<String>,
        /// Right-side vertex count fixing the frame m = kn
        #[arg(long)]
        n: Option<usize>,
    },
    /// Evaluate the expected node polynomial of a build-state file
    ExpectedPoly {
        state: PathBuf,
        /// Output file (default: stdout)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a named identity check against its brute-force oracle
    Oracle {
        check: OracleCheck,
        /// Monte-Carlo sample count (stiefel check only)
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleCheck {
    /// Expected bipartite polynomial vs the convolution quadrature formula
    Quadrature,
    /// Signed-ensemble expected Gram polynomial vs the convolution
    SignedConv,
    /// Node pipeline vs the partial-matching brute force (one golden node)
    Pipeline,
    /// Minor orthogonality of signed permutations (exact)
    MinorSigned,
    /// Minor orthogonality of the standard representation (exact)
    MinorStd,
    /// Minor orthogonality of Haar frames (Monte Carlo)
    MinorStiefel,
    /// Plain permutations are NOT minor-orthogonal; expected to fail
    MinorPerm,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            match err.downcast_ref::<CoreError>() {
                Some(CoreError::CapExceeded { .. }) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let workers = cli.workers.or_else(|| {
        std::env::var("KCLAW_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(workers) = workers {
        if workers < 1 {
            bail!("worker count must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("worker pool already initialized")?;
    }
    let cap = cli
        .cap
        .or_else(|| std::env::var("KCLAW_CAP").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(DEFAULT_CAP);
    if cap < 1 {
        bail!("cap must be positive");
    }
    match &cli.command {
        Command::Construct { n, k, d, out_dir } => cmd_construct(cli, *n, *k, *d, out_dir),
        Command::Verify { graph, k, d } => cmd_verify(cli, graph, *k, *d),
        Command::Convolve { p, q, m, n, out } => cmd_convolve(cli, p, q, *m, *n, out.as_deref()),
        Command::Bound { k, d, theta, u, n } => {
            cmd_bound(cli, *k, *d, theta.as_deref(), u.as_deref(), *n)
        }
        Command::ExpectedPoly { state, out } => cmd_expected_poly(cli, state, out.as_deref()),
        Command::Oracle { check, trials } => cmd_oracle(cli, *check, *trials, cap),
    }
}

fn poly_json(p: &RatPoly) -> serde_json::Value {
    json!({
        "degree": p.degree().map(|d| d as i64).unwrap_or(-1),
        "coeffs": p.coeffs().iter().map(format_rat).collect::<Vec<_>>(),
    })
}

fn interval_json(iv: &kclaw_core::interval::RatInterval) -> serde_json::Value {
    json!({
        "lo": format_rat(iv.lo()),
        "hi": format_rat(iv.hi()),
        "lo_approx": to_f64(iv.lo()),
        "hi_approx": to_f64(iv.hi()),
    })
}

fn cmd_construct(
    cli: &Cli,
    n: usize,
    k: usize,
    d: usize,
    out_dir: &Path,
) -> anyhow::Result<ExitCode> {
    let outcome = construct(n, k, d)?;
    let cert = certify_ramanujan(&outcome.graph, n, k, d, cli.precision_bits)?;
    let lambda2 = lambda2_numeric(&outcome.graph)?;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let graph_path = out_dir.join("graph.txt");
    let trail_path = out_dir.join("trail.txt");
    let cert_path = out_dir.join("certificate.txt");
    fs::write(&graph_path, outcome.graph.to_text())?;
    fs::write(&trail_path, trail_text(&outcome))?;
    fs::write(&cert_path, cert.to_text())?;
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "n": n, "k": k, "d": d,
                "graph_file": graph_path.display().to_string(),
                "trail_file": trail_path.display().to_string(),
                "certificate_file": cert_path.display().to_string(),
                "final_poly": poly_json(&outcome.final_poly),
                "bound_sq": interval_json(&cert.bound_enclosure),
                "lambda2_numeric": lambda2,
                "valid": cert.valid(),
            }))?
        );
    } else {
        println!("graph       {}", graph_path.display());
        println!("trail       {}", trail_path.display());
        println!("certificate {}", cert_path.display());
        println!("lambda2     {lambda2:.12} (numeric, advisory)");
        println!("valid       {}", cert.valid());
    }
    Ok(if cert.valid() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn trail_text(outcome: &kclaw_core::builder::BuildOutcome) -> String {
    let mut out = String::new();
    for s in &outcome.trail {
        let lefts: Vec<String> = s
            .candidate
            .lefts
            .iter()
            .map(|l| (l + 1).to_string())
            .collect();
        out.push_str(&format!(
            "matching={} step={} right={} lefts={} candidates={} forced={}",
            s.matching,
            s.step,
            s.candidate.right + 1,
            lefts.join(","),
            s.num_candidates,
            s.forced,
        ));
        match &s.bracket {
            Some(b) => out.push_str(&format!(
                " maxroot_lo={} maxroot_hi={}",
                decimal_string(&b.lo, 24),
                decimal_string(&b.hi, 24),
            )),
            None => out.push_str(" maxroot=none"),
        }
        out.push('\n');
    }
    out
}

fn cmd_verify(
    cli: &Cli,
    graph_path: &Path,
    k_arg: Option<usize>,
    d_arg: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(graph_path)
        .with_context(|| format!("reading {}", graph_path.display()))?;
    let graph = BigraphAdjacency::from_text(&text)?;
    let (n, k, d) = (graph.n, graph.k, graph.d);
    if let Some(ka) = k_arg {
        if ka != k {
            bail!("k argument {ka} does not match graph header k={k}");
        }
    }
    if let Some(da) = d_arg {
        if da != d {
            bail!("d argument {da} does not match graph header d={d}");
        }
    }
    if !check_biregular(&graph, n, k, d) {
        if cli.json {
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "n": n, "k": k, "d": d, "biregular": false, "valid": false,
                }))?
            );
        } else {
            println!("biregular false");
            println!("valid     false");
        }
        return Ok(ExitCode::from(1));
    }
    let cert = certify_ramanujan(&graph, n, k, d, cli.precision_bits)?;
    let lambda2 = lambda2_numeric(&graph)?;
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "n": n, "k": k, "d": d,
                "biregular": true,
                "bound_sq": interval_json(&cert.bound_enclosure),
                "gram_poly": poly_json(&cert.gram_poly),
                "roots_above_bound": cert.roots_above_bound,
                "precision_bits": cert.precision_bits,
                "lambda2_numeric": lambda2,
                "valid": cert.valid(),
            }))?
        );
    } else {
        print!("{}", cert.to_text());
        println!("lambda2_numeric {lambda2:.12}");
    }
    Ok(if cert.valid() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_convolve(
    cli: &Cli,
    p_path: &Path,
    q_path: &Path,
    m: usize,
    n: usize,
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let p = RatPoly::from_text(
        &fs::read_to_string(p_path).with_context(|| format!("reading {}", p_path.display()))?,
    )?;
    let q = RatPoly::from_text(
        &fs::read_to_string(q_path).with_context(|| format!("reading {}", q_path.display()))?,
    )?;
    let dims = ConvDims::new(m, n)?;
    let result = rect_conv(&p, &q, dims)?;
    let rendered = if cli.json {
        serde_json::to_string_pretty(&json!({
            "m": m, "n": n,
            "p": poly_json(&p),
            "q": poly_json(&q),
            "result": poly_json(&result),
        }))? + "\n"
    } else {
        result.to_text()
    };
    match out {
        Some(path) => {
            fs::write(path, rendered).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bound(
    cli: &Cli,
    k: usize,
    d: usize,
    theta: Option<&str>,
    u: Option<&str>,
    n: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let bits = cli.precision_bits;
    let bound = ramanujan_bound(k, d, bits)?;
    let mut report = json!({
        "k": k, "d": d, "precision_bits": bits,
        "spectral_bound": interval_json(&bound),
    });
    let mut lines = vec![format!(
        "spectral_bound   [{}, {}]",
        decimal_string(bound.lo(), 15),
        decimal_string(bound.hi(), 15)
    )];
    if let Some(theta_text) = theta {
        let n = n.ok_or_else(|| anyhow!("--theta requires --n to fix the frame m = kn"))?;
        let theta = parse_rat(theta_text)?;
        let m = k * n;
        let ok = cor_ok_bound(&theta, m, n, d, bits)?;
        lines.push(format!(
            "theta_bound      [{}, {}]",
            decimal_string(ok.lo(), 15),
            decimal_string(ok.hi(), 15)
        ));
        report["theta_bound"] = interval_json(&ok);
        match u_star(&theta, m, n, d, bits) {
            Ok(ustar) => {
                lines.push(format!(
                    "optimal_u        [{}, {}]",
                    decimal_string(ustar.lo(), 15),
                    decimal_string(ustar.hi(), 15)
                ));
                report["optimal_u"] = interval_json(&ustar);
            }
            Err(CoreError::OutOfDomain(msg)) => {
                lines.push(format!("optimal_u        undefined ({msg})"));
                report["optimal_u"] = json!(null);
            }
            Err(e) => return Err(e.into()),
        }
        if let Some(u_text) = u {
            let u = parse_rat(u_text)?;
            let params = BoundParams::new(theta.clone(), d, ConvDims::new(m, n)?, u)?;
            let r = r_bound(&params, bits)?;
            lines.push(format!(
                "r_value          [{}, {}]",
                decimal_string(r.lo(), 15),
                decimal_string(r.hi(), 15)
            ));
            report["r_value"] = interval_json(&r);
        }
    } else if u.is_some() {
        bail!("--u requires --theta and --n");
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        for line in lines {
            println!("{line}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_expected_poly(cli: &Cli, state_path: &Path, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(state_path)
        .with_context(|| format!("reading {}", state_path.display()))?;
    let state = state_from_text(&text)?;
    let poly = node_gram_poly(&state, None)?;
    let rendered = if cli.json {
        serde_json::to_string_pretty(&json!({
            "n": state.n(), "k": state.k(), "d": state.d(),
            "completed": state.completed().len(),
            "placed": state.t(),
            "poly": poly_json(&poly),
        }))? + "\n"
    } else {
        poly.to_text()
    };
    match out {
        Some(path) => {
            fs::write(path, rendered).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// One pass/fail line per case; exit 1 on any failure.
struct OracleReport {
    name: &'static str,
    cases: Vec<(String, bool)>,
    details: Vec<String>,
}

impl OracleReport {
    fn pass(&self) -> bool {
        self.cases.iter().all(|(_, ok)| *ok)
    }
}

fn cmd_oracle(cli: &Cli, check: OracleCheck, trials: usize, cap: u128) -> anyhow::Result<ExitCode> {
    let report = match check {
        OracleCheck::Quadrature => oracle_quadrature(cap)?,
        OracleCheck::SignedConv => oracle_signed_conv(cap)?,
        OracleCheck::Pipeline => oracle_pipeline(cap)?,
        OracleCheck::MinorSigned => oracle_minor(
            "minor-signed",
            &PermEnsemble::SignedPermutation { dim: 3 },
            cap,
        )?,
        OracleCheck::MinorStd => oracle_minor(
            "minor-std",
            &PermEnsemble::StandardRepresentation { dim: 3 },
            cap,
        )?,
        OracleCheck::MinorStiefel => oracle_minor(
            "minor-stiefel",
            &PermEnsemble::StiefelMc {
                dim: 4,
                frame_cols: 2,
                trials,
                seed: cli.seed,
            },
            cap,
        )?,
        OracleCheck::MinorPerm => {
            oracle_minor("minor-perm", &PermEnsemble::Permutation { dim: 3 }, cap)?
        }
    };
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "check": report.name,
                "pass": report.pass(),
                "cases": report.cases.iter().map(|(name, ok)| json!({
                    "case": name, "pass": ok,
                })).collect::<Vec<_>>(),
                "details": report.details,
            }))?
        );
    } else {
        for (name, ok) in &report.cases {
            println!(
                "{} {name}: {}",
                report.name,
                if *ok { "pass" } else { "FAIL" }
            );
        }
        for d in &report.details {
            println!("  {d}");
        }
    }
    Ok(if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Expected bipartite polynomial of two independent claw unions vs the
/// quadrature formula built from the convolution of their reduced Gram
/// polynomials.
fn oracle_quadrature(cap: u128) -> anyhow::Result<OracleReport> {
    let mut cases = Vec::new();
    for (n, k) in [(1usize, 2usize), (2, 2), (2, 3), (3, 2)] {
        let a = claw_matrix(n, k);
        let lhs = expected_bipartite_charpoly_bruteforce(&a, &a, cap)?;
        let rhs = quadrature_formula_for_claws(n, k)?;
        let ok = lhs == rhs;
        cases.push((format!("m={} n={n} k={k}", k * n), ok));
    }
    Ok(OracleReport {
        name: "quadrature",
        cases,
        details: vec![],
    })
}

/// `x^(m-n) S((x - 4k) (p conv q))` with `p = q = (x-k)^(n-1)`.
fn quadrature_formula_for_claws(n: usize, k: usize) -> anyhow::Result<RatPoly> {
    let m = k * n;
    let reduced = RatPoly::from_roots(&vec![rat(k as i64); n - 1]);
    let trivial = TrivialValue::sqrt_of(rat(k as i64))?;
    let (folded, sum) = expected_union_gram(
        &[reduced.clone(), reduced],
        &[trivial.clone(), trivial],
        ConvDims::new(m, n)?,
    )?;
    let with_root = &RatPoly::from_roots(&[sum.value_sq()]) * &folded;
    Ok(&RatPoly::monomial(m - n, rat(1)) * &with_root.s_transform())
}

/// The signed-ensemble brute force recomputes the convolution internally
/// and errors on mismatch; running it IS the check.
fn oracle_signed_conv(cap: u128) -> anyhow::Result<OracleReport> {
    let shapes: Vec<(RatMatrix, RatMatrix, &str)> = vec![
        (
            RatMatrix::from_int_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]),
            RatMatrix::from_int_rows(&[vec![0, 1], vec![1, 0], vec![1, 0]]),
            "3x2 binary",
        ),
        (
            RatMatrix::from_int_rows(&[vec![2], vec![1]]),
            RatMatrix::from_int_rows(&[vec![1], vec![1]]),
            "2x1 integer",
        ),
    ];
    let mut cases = Vec::new();
    for (a, b, label) in &shapes {
        let ok = expected_gram_charpoly_signed(a, b, cap).is_ok();
        cases.push((label.to_string(), ok));
    }
    Ok(OracleReport {
        name: "signed-conv",
        cases,
        details: vec![],
    })
}

/// Node pipeline vs the 48-term brute force on the golden (n=3, k=2)
/// partially built instance.
fn oracle_pipeline(cap: u128) -> anyhow::Result<OracleReport> {
    let union = RatMatrix::from_int_rows(&[
        vec![1, 0, 0],
        vec![0, 1, 0],
        vec![1, 0, 0],
        vec![0, 1, 0],
        vec![0, 0, 2],
        vec![0, 0, 2],
    ]);
    let a_plus = RatMatrix::from_fn(6, 3, |i, j| {
        let mut v = union.at(i, j).clone();
        if i < 4 && j < 2 {
            v += kclaw_core::rat::ratio(1, 2);
        }
        v
    });
    let (n, k, l, t) = (3usize, 2usize, 2usize, 1usize);
    let tab = theta_hat(&a_plus, k, l, t)?;
    let dims = FrameDims::new(k * n, n, k * l - 1, l - 1)?;
    let plus = expected_completion(&tab, &dims, k)?;
    let gram = gram_poly_from_completion(&plus);
    let lifted = &RatPoly::monomial(k * n - n, rat(1)) * &gram.s_transform();
    let brute = partial_matching_bruteforce(&union, k, l, t, cap)?;
    let ok = lifted == brute;
    Ok(OracleReport {
        name: "pipeline",
        cases: vec![("n=3 k=2 l=2 t=1".to_string(), ok)],
        details: vec![],
    })
}

fn oracle_minor(name: &'static str, ens: &PermEnsemble, cap: u128) -> anyhow::Result<OracleReport> {
    let mut cases = Vec::new();
    let mut details = Vec::new();
    for sizes in [(1usize, 1usize), (2, 2), (1, 2)] {
        let report = minor_orthogonality_check(ens, sizes, cap)?;
        cases.push((format!("orders ({}, {})", sizes.0, sizes.1), report.pass));
        details.extend(report.failures.iter().take(3).cloned());
        if let (Some(dz), Some(oz)) = (report.max_diag_z, report.max_offdiag_z) {
            details.push(format!(
                "orders ({}, {}): max |z| diag {dz:.3}, offdiag {oz:.3}",
                sizes.0, sizes.1
            ));
        }
    }
    Ok(OracleReport {
        name,
        cases,
        details,
    })
}
