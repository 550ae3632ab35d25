//! Batch front end: job files, subcommands, exact output and exit codes.
//!
//! A job file is line based, `key = value`, with `#` comments:
//!
//! ```text
//! space = wps(1,2,3)              # or P2, or quot(P1; m=2; act=0,1)
//! bundle = 2*O(1) - O(-3)         # O(a) or O(a,c) with a character shift c
//! obstruction = 3, 4              # degrees of E = O(3) + O(4)
//! shift = 1                       # linearization residue on a quotient
//! ```
//!
//! Exit codes: `0` success, `1` input error, `2` internal invariant violation.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::classes::{KClass, KTerm};
use crate::engine::{self, Engine, EulerResult, ObstructionSetup};
use crate::error::Error;
use crate::geometry::{CyclicQuotient, WeightedProjective};
use crate::oracle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Space {
    Weighted(WeightedProjective),
    Quotient(CyclicQuotient),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub space: Space,
    pub bundle: KClass,
    pub obstruction: Vec<i64>,
    pub shift: i64,
}

/// An input error with the offending line, when there is one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

fn perr(line: Option<usize>, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn parse_int<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("invalid {what} `{}`", s.trim()))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    let s = s.trim().trim_start_matches('[').trim_end_matches(']');
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_int(x, what)).collect()
}

/// `wps(w0,...)`, `P<n>`, or `quot(P<n>; m=<order>; act=t0,...)`.
pub fn parse_space(s: &str) -> Result<Space, String> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("wps(").and_then(|r| r.strip_suffix(')')) {
        let weights: Vec<i64> = parse_list(inner, "weight")?;
        if weights.iter().any(|&w| w <= 0) {
            return Err("weights must be positive".into());
        }
        let y = WeightedProjective::new(weights.into_iter().map(|w| w as u64).collect())
            .map_err(|e| e.to_string())?;
        return Ok(Space::Weighted(y));
    }
    if let Some(inner) = s.strip_prefix("quot(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(';').map(str::trim).collect();
        let [base, order, act] = parts.as_slice() else {
            return Err("expected quot(P<n>; m=<order>; act=<t0,...>)".into());
        };
        let n = parse_projective(base)?;
        let m: u64 = match order.split_once('=') {
            Some((k, v)) if k.trim() == "m" => parse_int(v, "group order")?,
            _ => return Err("expected m=<order> in quot(...)".into()),
        };
        if m == 0 {
            return Err("group order must be positive".into());
        }
        let act: Vec<i64> = match act.split_once('=') {
            Some((k, v)) if k.trim() == "act" => parse_list(v, "action weight")?,
            _ => return Err("expected act=<t0,...> in quot(...)".into()),
        };
        if act.len() != n + 1 {
            return Err(format!("P{n} needs {} action weights, got {}", n + 1, act.len()));
        }
        let act = act.into_iter().map(|t| t.rem_euclid(m as i64) as u64).collect();
        let q = CyclicQuotient::new(m, act).map_err(|e| e.to_string())?;
        return Ok(Space::Quotient(q));
    }
    let n = parse_projective(s)?;
    Ok(Space::Weighted(WeightedProjective::projective(n)))
}

fn parse_projective(s: &str) -> Result<usize, String> {
    let digits = s
        .strip_prefix('P')
        .ok_or_else(|| format!("unknown space `{s}`"))?
        .trim_start_matches('^');
    parse_int(digits, "projective dimension")
}

/// A formal sum of terms `[c*]O(a)` or `[c*]O(a,shift)` joined by `+` and `-`.
pub fn parse_bundle(s: &str) -> Result<KClass, String> {
    let mut class = KClass::zero();
    let mut rest = s.trim();
    if rest.is_empty() {
        return Err("empty bundle".into());
    }
    let mut first = true;
    while !rest.is_empty() {
        let mut sign = 1;
        if let Some(r) = rest.strip_prefix('+') {
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r.trim_start();
        } else if !first {
            return Err(format!("expected `+` or `-` before `{rest}`"));
        }
        first = false;
        let close = rest
            .find(')')
            .ok_or_else(|| format!("unterminated term `{rest}`"))?;
        let (term, tail) = rest.split_at(close + 1);
        class.push(parse_term(term, sign)?);
        rest = tail.trim_start();
    }
    Ok(class)
}

fn parse_term(term: &str, sign: i64) -> Result<KTerm, String> {
    let (coeff, line) = match term.split_once('*') {
        Some((c, l)) => (parse_int::<i64>(c, "coefficient")?, l.trim()),
        None => (1, term.trim()),
    };
    let args = line
        .strip_prefix("O(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| format!("expected O(a) or O(a,c), got `{line}`"))?;
    let (degree, char_shift) = match args.split_once(',') {
        Some((a, c)) => (parse_int(a, "degree")?, parse_int(c, "character shift")?),
        None => (parse_int(args, "degree")?, 0),
    };
    Ok(KTerm {
        coefficient: sign * coeff,
        degree,
        char_shift,
    })
}

fn at<T>(line: Option<usize>, r: Result<T, String>) -> Result<T, ParseError> {
    r.map_err(|m| perr(line, m))
}

/// Parse a job file; unknown or repeated keys are rejected with their line number.
pub fn parse_job(text: &str) -> Result<Job, ParseError> {
    let mut space = None;
    let mut bundle = None;
    let mut obstruction = None;
    let mut shift = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = Some(idx + 1);
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(lineno, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let duplicate = || perr(lineno, format!("duplicate key `{key}`"));
        match key {
            "space" if space.is_none() => space = Some(at(lineno, parse_space(value))?),
            "bundle" if bundle.is_none() => bundle = Some(at(lineno, parse_bundle(value))?),
            "obstruction" if obstruction.is_none() => {
                let degrees: Vec<i64> = at(lineno, parse_list(value, "obstruction degree"))?;
                if degrees.iter().any(|&d| d <= 0) {
                    return Err(perr(lineno, "obstruction degrees must be positive"));
                }
                obstruction = Some(degrees);
            }
            "shift" if shift.is_none() => shift = Some(at(lineno, parse_int(value, "shift"))?),
            "space" | "bundle" | "obstruction" | "shift" => return Err(duplicate()),
            _ => return Err(perr(lineno, format!("unknown key `{key}`"))),
        }
    }
    Ok(Job {
        space: space.ok_or_else(|| perr(None, "missing key `space`"))?,
        bundle: bundle.unwrap_or_else(|| KClass::line(0)),
        obstruction: obstruction.unwrap_or_default(),
        shift: shift.unwrap_or(0),
    })
}

#[derive(Debug, Parser)]
#[command(name = "kawasaki", about = "Exact orbifold Euler characteristics by sector sums")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Euler characteristic by the full sector sum (averaged Lefschetz on quotients)
    Chi(JobArgs),
    /// Identity-sector term only
    ChiFake(JobArgs),
    /// chi(Y, V * Lambda E*) for the zero locus of a section of E
    ChiVirtual(JobArgs),
    /// Sum over strata with virtual structure sheaves and virtual normal bundles
    ChiVirtualStrata(JobArgs),
    /// Averaged holomorphic Lefschetz formula on a cyclic quotient
    Lefschetz(JobArgs),
    /// List the sectors (or fixed components) of the space
    Sectors(JobArgs),
    /// Compare against the monomial-counting oracle
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct JobArgs {
    /// Job file in `key = value` format
    #[arg(long)]
    pub job: Option<PathBuf>,
    /// Inline space, overriding the job file
    #[arg(long)]
    pub space: Option<String>,
    /// Inline bundle, overriding the job file
    #[arg(long)]
    pub bundle: Option<String>,
    /// Inline obstruction degrees, e.g. `3,4`
    #[arg(long)]
    pub obstruction: Option<String>,
    /// Inline linearization shift
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<i64>,
    /// Print one line per sector before the total
    #[arg(long)]
    pub breakdown: bool,
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub inject_trace_fault: Option<i64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub job: JobArgs,
    /// Run the full oracle sweep instead of a single job
    #[arg(long)]
    pub sweep: bool,
}

/// Text output and exit code of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn input_error(msg: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }

    fn from_error(e: Error) -> Self {
        if !e.is_internal() {
            return Self::input_error(e);
        }
        let mut stderr = format!("internal error: {e}\n");
        for line in e.sector_dump().unwrap_or_default() {
            stderr.push_str(line);
            stderr.push('\n');
        }
        Outcome {
            code: EXIT_INTERNAL,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Build a job from a file and inline overrides.
pub fn load_job(args: &JobArgs) -> Result<Job, ParseError> {
    let mut text = match &args.job {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| perr(None, format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = Vec::new();
    if let Some(s) = &args.space {
        overrides.push(("space", s.clone()));
    }
    if let Some(b) = &args.bundle {
        overrides.push(("bundle", b.clone()));
    }
    if let Some(o) = &args.obstruction {
        overrides.push(("obstruction", o.clone()));
    }
    if let Some(s) = args.shift {
        overrides.push(("shift", s.to_string()));
    }
    if !overrides.is_empty() {
        // inline flags replace the matching lines of the file
        let keys: Vec<&str> = overrides.iter().map(|(k, _)| *k).collect();
        let kept: Vec<&str> = text
            .lines()
            .map(|l| {
                let key = l.split('#').next().unwrap().split('=').next().unwrap().trim();
                if keys.contains(&key) { "" } else { l }
            })
            .collect();
        text = kept.join("\n");
        for (k, v) in overrides {
            let _ = write!(text, "\n{k} = {v}");
        }
    }
    parse_job(&text)
}

pub fn run_cli(cli: Cli) -> Outcome {
    match cli.command {
        Command::Verify(v) if v.sweep => run_sweep(),
        Command::Verify(v) => with_job(&v.job, |job, engine| verify(job, engine)),
        Command::Chi(a) => with_job(&a, |job, engine| chi(job, engine, a.breakdown)),
        Command::ChiFake(a) => with_job(&a, |job, engine| chi_fake(job, engine)),
        Command::ChiVirtual(a) => with_job(&a, |job, engine| chi_virtual(job, engine, a.breakdown, false)),
        Command::ChiVirtualStrata(a) => {
            with_job(&a, |job, engine| chi_virtual(job, engine, a.breakdown, true))
        }
        Command::Lefschetz(a) => with_job(&a, |job, engine| lefschetz(job, engine, a.breakdown)),
        Command::Sectors(a) => with_job(&a, |job, _| sectors(job)),
    }
}

/// Parse `argv` (including the program name) and run.
pub fn run_args<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run_cli(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}

type Step = Result<Vec<String>, Outcome>;

fn with_job(args: &JobArgs, f: impl FnOnce(&Job, &Engine) -> Step) -> Outcome {
    let job = match load_job(args) {
        Ok(j) => j,
        Err(e) => return Outcome::input_error(e),
    };
    let engine = match args.inject_trace_fault {
        Some(offset) => Engine::with_trace_fault(offset),
        None => Engine::default(),
    };
    match f(&job, &engine) {
        Ok(lines) => Outcome {
            code: EXIT_OK,
            stdout: lines.into_iter().map(|l| l + "\n").collect(),
            stderr: String::new(),
        },
        Err(o) => o,
    }
}

fn weighted(job: &Job, command: &str) -> Result<WeightedProjective, Outcome> {
    match &job.space {
        Space::Weighted(y) => Ok(y.clone()),
        Space::Quotient(_) => Err(Outcome::input_error(format!(
            "{command} needs a weighted projective space"
        ))),
    }
}

fn no_obstruction(job: &Job, command: &str) -> Result<(), Outcome> {
    if job.obstruction.is_empty() {
        Ok(())
    } else {
        Err(Outcome::input_error(format!(
            "{command} does not take an obstruction; use chi-virtual or chi-virtual-strata"
        )))
    }
}

fn setup(job: &Job, command: &str) -> Result<ObstructionSetup, Outcome> {
    let y = weighted(job, command)?;
    if job.obstruction.is_empty() {
        return Err(Outcome::input_error(format!("{command} needs `obstruction`")));
    }
    ObstructionSetup::new(y, job.obstruction.clone()).map_err(Outcome::from_error)
}

fn with_breakdown(result: &EulerResult, breakdown: bool) -> Vec<String> {
    let mut lines = if breakdown {
        engine::render_breakdown(&result.sectors)
    } else {
        Vec::new()
    };
    lines.push(result.total.to_string());
    lines
}

fn chi(job: &Job, engine: &Engine, breakdown: bool) -> Step {
    match &job.space {
        Space::Quotient(_) => lefschetz(job, engine, breakdown),
        Space::Weighted(y) => {
            no_obstruction(job, "chi")?;
            let r = engine.chi_kawasaki(y, &job.bundle).map_err(Outcome::from_error)?;
            Ok(with_breakdown(&r, breakdown))
        }
    }
}

fn chi_fake(job: &Job, engine: &Engine) -> Step {
    let y = weighted(job, "chi-fake")?;
    no_obstruction(job, "chi-fake")?;
    let q = engine.chi_fake(&y, &job.bundle).map_err(Outcome::from_error)?;
    Ok(vec![q.to_string()])
}

fn chi_virtual(job: &Job, engine: &Engine, breakdown: bool, strata: bool) -> Step {
    let name = if strata { "chi-virtual-strata" } else { "chi-virtual" };
    let s = setup(job, name)?;
    let r = if strata {
        engine.chi_virtual_strata(&s, &job.bundle)
    } else {
        engine.chi_virtual_direct(&s, &job.bundle)
    }
    .map_err(Outcome::from_error)?;
    Ok(with_breakdown(&r, breakdown))
}

fn lefschetz(job: &Job, engine: &Engine, breakdown: bool) -> Step {
    let Space::Quotient(q) = &job.space else {
        return Err(Outcome::input_error("lefschetz needs a quot(...) space"));
    };
    no_obstruction(job, "lefschetz")?;
    let r = engine
        .chi_lefschetz(q, &job.bundle, job.shift)
        .map_err(Outcome::from_error)?;
    let mut lines = if breakdown {
        engine::render_lefschetz_breakdown(&r.terms)
    } else {
        Vec::new()
    };
    lines.push(r.total.to_string());
    Ok(lines)
}

fn sectors(job: &Job) -> Step {
    let mut lines = Vec::new();
    match &job.space {
        Space::Weighted(y) => {
            for s in y.sectors() {
                let normal: Vec<String> = y
                    .normal_data(&s)
                    .map_err(Outcome::from_error)?
                    .iter()
                    .map(|d| format!("({},{})", d.weight, d.character))
                    .collect();
                lines.push(format!(
                    "sector r={} k={} S={} m={} dim={} normal=[{}]",
                    s.order,
                    s.exponent,
                    s.fixed_label(),
                    s.multiplicity,
                    s.dim(),
                    normal.join(",")
                ));
            }
        }
        Space::Quotient(q) => {
            for t in 0..q.order() {
                for c in q.fixed_components(t) {
                    let idx: Vec<String> = c.coords.iter().map(usize::to_string).collect();
                    lines.push(format!("element t={t} fixed={{{}}} v={}", idx.join(","), c.residue));
                }
            }
        }
    }
    lines.push(lines.len().to_string());
    Ok(lines)
}

fn verdict(lines: &mut Vec<String>, ok: bool) -> Step {
    lines.push(if ok { "PASS" } else { "FAIL" }.to_string());
    if ok {
        Ok(lines.clone())
    } else {
        Err(Outcome {
            code: EXIT_INTERNAL,
            stdout: lines.iter().map(|l| format!("{l}\n")).collect(),
            stderr: "error: engine disagrees with oracle\n".into(),
        })
    }
}

fn verify(job: &Job, engine: &Engine) -> Step {
    let mut lines = Vec::new();
    match &job.space {
        Space::Weighted(y) => {
            let mut degrees = Vec::new();
            for t in job.bundle.terms() {
                if t.char_shift != 0 {
                    return Err(Outcome::input_error("verify on wps needs untwisted bundle terms"));
                }
                degrees.push((t.coefficient, t.degree));
            }
            let w = y.weights();
            if job.obstruction.is_empty() {
                let r = engine.chi_kawasaki(y, &job.bundle).map_err(Outcome::from_error)?;
                let expected: i64 = degrees
                    .iter()
                    .map(|&(c, a)| c * oracle::weighted_euler(w, a))
                    .sum();
                let ok = r.total_i64() == expected;
                lines.push(format!("{} chi engine={} oracle={expected}", tag(ok), r.total));
                verdict(&mut lines, ok)
            } else {
                let s = setup(job, "verify")?;
                let direct = engine.chi_virtual_direct(&s, &job.bundle).map_err(Outcome::from_error)?;
                let strata = engine.chi_virtual_strata(&s, &job.bundle).map_err(Outcome::from_error)?;
                let expected: i64 = degrees
                    .iter()
                    .map(|&(c, a)| c * oracle::complete_intersection_euler(w, &job.obstruction, a))
                    .sum();
                let ok_oracle = direct.total_i64() == expected;
                let ok_strata = direct.sectors.iter().zip(&strata.sectors).all(|(a, b)| a.contribution == b.contribution)
                    && direct.total == strata.total;
                let name = if job.obstruction.len() == 1 {
                    "hypersurface_difference"
                } else {
                    "complete_intersection"
                };
                lines.push(format!("{} chi-virtual engine={} {name}={expected}", tag(ok_oracle), direct.total));
                lines.push(format!(
                    "{} chi-virtual-strata engine={} per-sector agreement",
                    tag(ok_strata),
                    strata.total
                ));
                verdict(&mut lines, ok_oracle && ok_strata)
            }
        }
        Space::Quotient(q) => {
            no_obstruction(job, "verify")?;
            let r = engine
                .chi_lefschetz(q, &job.bundle, job.shift)
                .map_err(Outcome::from_error)?;
            let mut expected = 0i64;
            for t in job.bundle.terms() {
                let n = oracle::count_invariant_monomials(q.order(), q.action(), t.degree, job.shift + t.char_shift)
                    .map_err(|e| Outcome::input_error(e))?;
                expected += t.coefficient * n as i64;
            }
            let ok = r.total_i64() == expected;
            lines.push(format!("{} lefschetz engine={} invariant_monomials={expected}", tag(ok), r.total));
            verdict(&mut lines, ok)
        }
    }
}

fn tag(ok: bool) -> &'static str {
    if ok { "PASS" } else { "FAIL" }
}

/// Nondecreasing weight vectors of length `1..=max_len` with entries in `1..=max_weight`.
pub fn weight_vectors(max_len: usize, max_weight: u64) -> Vec<Vec<u64>> {
    fn rec(prefix: &mut Vec<u64>, len: usize, lo: u64, hi: u64, out: &mut Vec<Vec<u64>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for w in lo..=hi {
            prefix.push(w);
            rec(prefix, len, w, hi, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for len in 1..=max_len {
        rec(&mut Vec::new(), len, 1, max_weight, &mut out);
    }
    out
}

fn run_sweep() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut internal = None;

    let mut record = |name: &str, checked: usize, failures: Vec<String>| {
        ok &= failures.is_empty();
        lines.push(format!("{} {name}: {checked} checks, {} failures", tag(failures.is_empty()), failures.len()));
        lines.extend(failures.into_iter().take(10).map(|f| format!("  {f}")));
    };

    let (mut n, mut fails) = (0, Vec::new());
    for w in weight_vectors(4, 6) {
        let y = WeightedProjective::new(w.clone()).unwrap();
        for a in 0..=30 {
            n += 1;
            match engine::chi_line(&y, a) {
                Ok(v) if v == oracle::count_weighted_monomials(&w, a).unwrap() as i64 => {}
                Ok(v) => fails.push(format!("P{w:?} O({a}): engine {v}")),
                Err(e) => {
                    fails.push(format!("P{w:?} O({a}): {e}"));
                    internal.get_or_insert(e);
                }
            }
        }
    }
    record("weighted projective sections", n, fails);

    let (mut n, mut fails) = (0, Vec::new());
    for (w, d, a) in [
        (vec![1u64, 1, 1], vec![3i64], 0i64),
        (vec![1, 1, 1], vec![3], 1),
        (vec![1, 1, 1, 1], vec![4], 0),
        (vec![1, 1], vec![2], 0),
    ] {
        n += 1;
        let s = ObstructionSetup::new(WeightedProjective::new(w.clone()).unwrap(), d.clone()).unwrap();
        match engine::chi_virtual_direct(&s, &KClass::line(a)) {
            Ok(r) if r.total_i64() == oracle::hypersurface_difference(&w, d[0], a) => {}
            Ok(r) => fails.push(format!("P{w:?} E={d:?} O({a}): engine {}", r.total)),
            Err(e) => fails.push(format!("P{w:?} E={d:?} O({a}): {e}")),
        }
    }
    record("hypersurfaces", n, fails);

    let (mut n, mut fails) = (0, Vec::new());
    for m in 1..=6u64 {
        for dim in 0..=3usize {
            for act in residue_vectors(dim + 1, m) {
                let q = CyclicQuotient::new(m, act.clone()).unwrap();
                for shift in 0..m as i64 {
                    for a in 0..=12 {
                        n += 1;
                        let expected = oracle::count_invariant_monomials(m, &act, a, shift).unwrap() as i64;
                        match engine::chi_lefschetz(&q, &KClass::line(a), shift) {
                            Ok(r) if r.total_i64() == expected => {}
                            Ok(r) => fails.push(format!("{q} O({a}) shift {shift}: engine {}", r.total)),
                            Err(e) => fails.push(format!("{q} O({a}) shift {shift}: {e}")),
                        }
                    }
                }
            }
        }
    }
    record("cyclic quotients", n, fails);

    lines.push(tag(ok).to_string());
    Outcome {
        code: if ok { EXIT_OK } else { EXIT_INTERNAL },
        stdout: lines.into_iter().map(|l| l + "\n").collect(),
        stderr: internal.map(|e| format!("internal error: {e}\n")).unwrap_or_default(),
    }
}

/// Nondecreasing action vectors of the given length with entries in `0..m`.
pub fn residue_vectors(len: usize, m: u64) -> Vec<Vec<u64>> {
    weight_vectors_exact(len, m)
}

fn weight_vectors_exact(len: usize, m: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u64>| {
                let lo = v.last().copied().unwrap_or(0);
                (lo..m).map(move |t| {
                    let mut v = v.clone();
                    v.push(t);
                    v
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Outcome {
        run_args(std::iter::once("kawasaki").chain(args.iter().copied()))
    }

    #[test]
    fn parse_examples() {
        let job = parse_job("space = wps(1,2,3)\nbundle = O(6)").unwrap();
        assert_eq!(job.space, Space::Weighted(WeightedProjective::new(vec![1, 2, 3]).unwrap()));
        assert_eq!(job.bundle, KClass::line(6));

        let job = parse_job("space = quot(P1; m=2; act=0,1)\nbundle = O(2)").unwrap();
        assert_eq!(job.space, Space::Quotient(CyclicQuotient::new(2, vec![0, 1]).unwrap()));

        let err = parse_job("space = wps(1,0)").unwrap_err();
        assert_eq!(err.message, "weights must be positive");
        assert_eq!(err.line, Some(1));
    }

    #[test]
    fn parse_rejects_unknown_and_duplicate_keys() {
        let err = parse_job("# comment\nspace = P2\ncolour = red\n").unwrap_err();
        assert_eq!(err.to_string(), "line 3: unknown key `colour`");
        let err = parse_job("space = P2\nspace = P3\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(parse_job("bundle = O(1)").is_err());
        assert!(parse_job("space = P2\nobstruction = 0").is_err());
        assert!(parse_job("space = quot(P1; m=2; act=0)").is_err());
        assert!(parse_job("space = P2 extra").is_err());
    }

    #[test]
    fn bundle_syntax() {
        let b = parse_bundle("2*O(1) - O(-3) + O(2,1)").unwrap();
        assert_eq!(
            b.terms().collect::<Vec<_>>(),
            vec![
                KTerm { coefficient: -1, degree: -3, char_shift: 0 },
                KTerm { coefficient: 2, degree: 1, char_shift: 0 },
                KTerm { coefficient: 1, degree: 2, char_shift: 1 },
            ]
        );
        assert_eq!(parse_bundle("-O(0)").unwrap().to_string(), "-O(0)");
        assert!(parse_bundle("O(1) O(2)").is_err());
        assert!(parse_bundle("O(x)").is_err());
        assert!(parse_bundle("").is_err());
    }

    #[test]
    fn space_syntax() {
        assert_eq!(parse_space("P2").unwrap(), Space::Weighted(WeightedProjective::projective(2)));
        assert_eq!(parse_space("P^3").unwrap(), Space::Weighted(WeightedProjective::projective(3)));
        assert!(parse_space("quot(P1; m=0; act=0,1)").is_err());
        assert!(parse_space("wps()").is_err());
    }

    #[test]
    fn run_examples() {
        let o = run(&["chi", "--space", "wps(1,2)", "--bundle", "O(5)"]);
        assert_eq!((o.code, o.stdout.as_str()), (0, "3\n"));
        let o = run(&["chi-fake", "--space", "wps(1,2)", "--bundle", "O(0)"]);
        assert_eq!(o.stdout, "3/4\n");
        let o = run(&["chi-virtual", "--space", "P2", "--obstruction", "3", "--bundle", "O(1)"]);
        assert_eq!(o.stdout, "3\n");
        let o = run(&["verify", "--space", "P2", "--obstruction", "3", "--bundle", "O(1)"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.starts_with("PASS chi-virtual engine=3 hypersurface_difference=3\n"));
        assert!(o.stdout.ends_with("PASS\n"));
    }

    #[test]
    fn breakdown_output() {
        let o = run(&["chi", "--space", "wps(1,2)", "--bundle", "O(0)", "--breakdown"]);
        assert_eq!(
            o.stdout,
            "z = zeta_2\n\
             sector r=1 k=0 S={0,1} m=1 contribution=3/4\n\
             sector r=2 k=1 S={1} m=2 contribution=1/4\n\
             1\n"
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["chi", "--space", "wps(1,0)"]).code, EXIT_INPUT);
        assert_eq!(run(&["chi", "--bundle", "O(1)"]).code, EXIT_INPUT);
        assert_eq!(run(&["frobnicate"]).code, EXIT_INPUT);
        assert_eq!(run(&["lefschetz", "--space", "P2"]).code, EXIT_INPUT);
        assert_eq!(run(&["chi-virtual", "--space", "P2"]).code, EXIT_INPUT);
        assert_eq!(run(&["--help"]).code, EXIT_OK);
        let o = run(&["chi", "--space", "wps(1,2)", "--inject-trace-fault", "1"]);
        assert_eq!(o.code, EXIT_INTERNAL);
        assert!(o.stderr.contains("non-integer total 1/2"));
        assert!(o.stderr.contains("sector r=2 k=1 S={1} m=2 contribution=-1/4"));
    }

    #[test]
    fn quotient_commands() {
        let o = run(&["lefschetz", "--space", "quot(P1; m=2; act=0,1)", "--bundle", "O(2)"]);
        assert_eq!(o.stdout, "2\n");
        let o = run(&["chi", "--space", "quot(P1; m=2; act=0,1)", "--bundle", "O(1)", "--shift", "1"]);
        assert_eq!(o.stdout, "1\n");
        let o = run(&["verify", "--space", "quot(P1; m=2; act=0,1)", "--bundle", "O(3)"]);
        assert_eq!(o.stdout, "PASS lefschetz engine=2 invariant_monomials=2\nPASS\n");
        let o = run(&["sectors", "--space", "quot(P1; m=2; act=0,1)"]);
        assert_eq!(o.stdout, "element t=0 fixed={0,1} v=0\nelement t=1 fixed={0} v=0\nelement t=1 fixed={1} v=1\n3\n");
    }

    #[test]
    fn sectors_listing() {
        let o = run(&["sectors", "--space", "wps(1,2,3)"]);
        assert_eq!(
            o.stdout,
            "sector r=1 k=0 S={0,1,2} m=1 dim=2 normal=[]\n\
             sector r=2 k=1 S={1} m=2 dim=0 normal=[(1,1),(3,1)]\n\
             sector r=3 k=1 S={2} m=3 dim=0 normal=[(1,1),(2,2)]\n\
             sector r=3 k=2 S={2} m=3 dim=0 normal=[(1,2),(2,1)]\n\
             4\n"
        );
    }

    #[test]
    fn inline_flags_override_job_file() {
        let dir = std::env::temp_dir().join(format!("kawasaki-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p12.job");
        std::fs::write(&path, "space = wps(1,2)\nbundle = O(5)\n").unwrap();
        let p = path.to_str().unwrap();
        assert_eq!(run(&["chi", "--job", p]).stdout, "3\n");
        assert_eq!(run(&["chi", "--job", p, "--bundle", "O(4)"]).stdout, "3\n");
        assert_eq!(run(&["chi", "--job", p, "--space", "P1"]).stdout, "6\n");
        assert_eq!(run(&["chi", "--job", "/nonexistent/x.job"]).code, EXIT_INPUT);
    }

    #[test]
    fn enumerations() {
        assert_eq!(weight_vectors(2, 2), vec![vec![1], vec![2], vec![1, 1], vec![1, 2], vec![2, 2]]);
        assert_eq!(residue_vectors(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
    }
}
